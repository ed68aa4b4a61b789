//! Penn-Treebank-style constituency trees: parsing, rendering, and height measures.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnnotateError, Upos};

/// A labeled ordered tree whose leaves are surface tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tree {
    Leaf(String),
    Node { label: String, children: Vec<Tree> },
}

impl Tree {
    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Self {
        Tree::Node {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(word: impl Into<String>) -> Self {
        Tree::Leaf(word.into())
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Node { label, .. } => Some(label),
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => {
                1 + children.iter().map(Tree::height).max().unwrap_or(0)
            }
        }
    }

    /// Height after contracting every maximal chain of single-child internal
    /// nodes to a single edge. Edges into leaves are never contracted, so
    /// `(S (VP (VB go)))` has height 3 and flattened height 2.
    pub fn flattened_height(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => {
                if let [only @ Tree::Node { .. }] = children.as_slice() {
                    let mut bottom = only;
                    while let Tree::Node { children, .. } = bottom {
                        match children.as_slice() {
                            [next @ Tree::Node { .. }] => bottom = next,
                            _ => break,
                        }
                    }
                    1 + bottom.spread_height()
                } else {
                    self.spread_height()
                }
            }
        }
    }

    /// Flattened height of a node measured through its children, without
    /// treating the node itself as the top of a unary chain.
    fn spread_height(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => children
                .iter()
                .map(|c| match c {
                    Tree::Leaf(_) => 1,
                    node => 1 + node.flattened_height(),
                })
                .max()
                .unwrap_or(0),
        }
    }

    /// Leaves in left-to-right order, each paired with its parent's label.
    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_leaves("", &mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, parent: &'a str, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            Tree::Leaf(w) => out.push((parent, w)),
            Tree::Node { label, children } => {
                for c in children {
                    c.collect_leaves(label, out);
                }
            }
        }
    }

    /// Leaves that correspond to word tokens: punctuation, symbols, and empty
    /// elements (`-NONE-`) are skipped.
    pub fn word_leaf_count(&self) -> usize {
        self.leaves()
            .into_iter()
            .filter(|(parent, word)| is_word_leaf(parent, word))
            .count()
    }

    /// Number of internal nodes whose base label (function tags and indices
    /// stripped) equals `base`.
    pub fn count_label(&self, base: &str) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { label, children } => {
                usize::from(base_label(label) == base)
                    + children.iter().map(|c| c.count_label(base)).sum::<usize>()
            }
        }
    }
}

fn is_word_leaf(parent: &str, word: &str) -> bool {
    if parent == "-NONE-" {
        return false;
    }
    match Upos::from_ptb(parent) {
        Some(tag) => tag.is_word_class(),
        None => word.chars().any(char::is_alphanumeric),
    }
}

/// `NP-SBJ-1` → `NP`, `PP=2` → `PP`. Labels starting with `-` are returned unchanged.
pub fn base_label(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    label.split(['-', '=']).next().unwrap_or(label)
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(w) => f.write_str(w),
            Tree::Node { label, children } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme {
    Open,
    Close,
    Atom(String),
}

fn lex(text: &str, base_offset: usize) -> Vec<(usize, Lexeme)> {
    let mut out = Vec::new();
    let mut atom = String::new();
    let mut atom_start = 0;
    for (offset, c) in text.chars().enumerate() {
        let offset = base_offset + offset;
        if c == '(' || c == ')' || c.is_whitespace() {
            if !atom.is_empty() {
                out.push((atom_start, Lexeme::Atom(std::mem::take(&mut atom))));
            }
            match c {
                '(' => out.push((offset, Lexeme::Open)),
                ')' => out.push((offset, Lexeme::Close)),
                _ => {}
            }
        } else {
            if atom.is_empty() {
                atom_start = offset;
            }
            atom.push(c);
        }
    }
    if !atom.is_empty() {
        out.push((atom_start, Lexeme::Atom(atom)));
    }
    out
}

fn tree_error(offset: usize, message: impl Into<String>) -> AnnotateError {
    AnnotateError::TreeParse {
        offset,
        message: message.into(),
    }
}

/// Parses any number of whitespace-separated trees. `base_offset` is added to
/// every reported character offset.
pub fn parse_forest_at(text: &str, base_offset: usize) -> Result<Vec<Tree>, AnnotateError> {
    let lexemes = lex(text, base_offset);
    let mut trees = Vec::new();
    // Stack of (open offset, label, children).
    let mut stack: Vec<(usize, Option<String>, Vec<Tree>)> = Vec::new();
    let mut i = 0;
    while i < lexemes.len() {
        let (offset, lexeme) = &lexemes[i];
        match lexeme {
            Lexeme::Open => {
                let label = match lexemes.get(i + 1) {
                    Some((_, Lexeme::Atom(a))) => {
                        i += 1;
                        a.clone()
                    }
                    _ => String::new(),
                };
                stack.push((*offset, Some(label), Vec::new()));
            }
            Lexeme::Close => {
                let (open, label, children) = stack
                    .pop()
                    .ok_or_else(|| tree_error(*offset, "unbalanced ')'"))?;
                if children.is_empty() {
                    return Err(tree_error(open, "constituent has no children"));
                }
                let node = Tree::Node {
                    label: label.unwrap_or_default(),
                    children,
                };
                match stack.last_mut() {
                    Some((_, _, siblings)) => siblings.push(node),
                    None => trees.push(node),
                }
            }
            Lexeme::Atom(a) => match stack.last_mut() {
                Some((_, _, siblings)) => siblings.push(Tree::Leaf(a.clone())),
                None => return Err(tree_error(*offset, format!("token {a:?} outside brackets"))),
            },
        }
        i += 1;
    }
    if let Some((open, _, _)) = stack.first() {
        return Err(tree_error(*open, "unbalanced '(' never closed"));
    }
    Ok(trees)
}

pub fn parse_forest(text: &str) -> Result<Vec<Tree>, AnnotateError> {
    parse_forest_at(text, 0)
}

/// Parses exactly one tree.
pub fn parse_tree(text: &str) -> Result<Tree, AnnotateError> {
    let mut trees = parse_forest(text)?;
    match trees.len() {
        1 => Ok(trees.pop().expect("one tree")),
        0 => Err(tree_error(0, "no tree found")),
        n => Err(tree_error(0, format!("expected one tree, found {n}"))),
    }
}

/// Trees bound to one record id by a `# id = ...` comment line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBlock {
    pub id: Option<String>,
    pub trees: Vec<Tree>,
}

/// Parses a bracketed-tree file: trees separated by blank lines, grouped into
/// blocks by `# id = <record id>` comments. Trees before the first id comment
/// form a block with no id. Other `#` lines are ignored.
pub fn parse_tree_file(text: &str) -> Result<Vec<TreeBlock>, AnnotateError> {
    let mut blocks: Vec<TreeBlock> = Vec::new();
    let mut current = TreeBlock {
        id: None,
        trees: Vec::new(),
    };
    let mut segment = String::new();
    let mut segment_offset = 0usize;
    let mut offset = 0usize;
    let flush = |segment: &mut String,
                 segment_offset: usize,
                 block: &mut TreeBlock|
     -> Result<(), AnnotateError> {
        if !segment.trim().is_empty() {
            block
                .trees
                .extend(parse_forest_at(segment, segment_offset)?);
        }
        segment.clear();
        Ok(())
    };
    for line in text.split_inclusive('\n') {
        let len = line.chars().count();
        let trimmed = line.trim();
        let id = trimmed
            .strip_prefix('#')
            .map(str::trim)
            .and_then(|c| c.strip_prefix("id"))
            .map(str::trim)
            .and_then(|c| c.strip_prefix('='))
            .map(str::trim);
        if trimmed.starts_with('#') {
            flush(&mut segment, segment_offset, &mut current)?;
            if let Some(id) = id {
                let finished = std::mem::replace(
                    &mut current,
                    TreeBlock {
                        id: Some(id.to_string()),
                        trees: Vec::new(),
                    },
                );
                if finished.id.is_some() || !finished.trees.is_empty() {
                    blocks.push(finished);
                }
            }
        } else {
            if segment.is_empty() {
                segment_offset = offset;
            }
            segment.push_str(line);
        }
        offset += len;
    }
    flush(&mut segment, segment_offset, &mut current)?;
    if current.id.is_some() || !current.trees.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

pub fn read_bracketed_trees(path: &Path) -> Result<Vec<TreeBlock>, AnnotateError> {
    let text = fs::read_to_string(path).map_err(|source| AnnotateError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_tree_file(&text)
}
