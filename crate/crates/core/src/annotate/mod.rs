//! Turning raw text into [`AnnotatedDocument`]s.
//!
//! Two tiers are supported. The builtin tier needs nothing but the bundled
//! lexicons: it segments, tokenizes, tags with a lexicon + suffix tagger, and
//! counts syllables by rule. The full tier takes gold CoNLL-U (tokens, POS,
//! dependencies) and PTB bracketed trees keyed by document id, which the
//! phrasal and tree-height features require.

mod conllu;
mod segment;
mod syllables;
mod tagger;
mod tree;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{parse_conllu, read_conllu, ConlluDocument};
pub use segment::{is_abbreviation, segment_sentences, tokenize, ABBREVIATIONS};
pub use syllables::{count_syllables, SyllableCounter};
pub use tagger::{tag_pos, TagLexicon};
pub use tree::{
    base_label, parse_forest, parse_tree, parse_tree_file, read_bracketed_trees, Tree, TreeBlock,
};

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("tree parse error at character {offset}: {message}")]
    TreeParse { offset: usize, message: String },
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Validation { line: Option<usize>, message: String },
    #[error("document {doc:?}, sentence {sentence}: tree has {leaves} word leaves but the sentence has {words} word tokens")]
    Alignment {
        doc: String,
        sentence: usize,
        leaves: usize,
        words: usize,
    },
    #[error("document {doc:?}: {message}")]
    SentenceCount { doc: String, message: String },
    #[error("no {layer} annotation for document {id:?}")]
    MissingGold { id: String, layer: &'static str },
}

/// Universal POS tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Upos {
    Noun,
    Propn,
    Verb,
    Aux,
    Adj,
    Adv,
    Adp,
    Sconj,
    Cconj,
    Det,
    Pron,
    Num,
    Part,
    Punct,
    Sym,
    Intj,
    X,
}

impl Upos {
    pub const ALL: [Upos; 17] = [
        Upos::Noun,
        Upos::Propn,
        Upos::Verb,
        Upos::Aux,
        Upos::Adj,
        Upos::Adv,
        Upos::Adp,
        Upos::Sconj,
        Upos::Cconj,
        Upos::Det,
        Upos::Pron,
        Upos::Num,
        Upos::Part,
        Upos::Punct,
        Upos::Sym,
        Upos::Intj,
        Upos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Noun => "NOUN",
            Upos::Propn => "PROPN",
            Upos::Verb => "VERB",
            Upos::Aux => "AUX",
            Upos::Adj => "ADJ",
            Upos::Adv => "ADV",
            Upos::Adp => "ADP",
            Upos::Sconj => "SCONJ",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Pron => "PRON",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Punct => "PUNCT",
            Upos::Sym => "SYM",
            Upos::Intj => "INTJ",
            Upos::X => "X",
        }
    }

    /// False for punctuation and symbols.
    pub fn is_word_class(self) -> bool {
        !matches!(self, Upos::Punct | Upos::Sym)
    }

    /// Maps a Penn Treebank tag to the universal tagset.
    ///
    /// | PTB | UPOS |
    /// |-----|------|
    /// | NN NNS | NOUN |
    /// | NNP NNPS | PROPN |
    /// | VB VBD VBG VBN VBP VBZ | VERB |
    /// | MD | AUX |
    /// | JJ JJR JJS | ADJ |
    /// | RB RBR RBS WRB | ADV |
    /// | IN | ADP |
    /// | CC | CCONJ |
    /// | DT PDT WDT | DET |
    /// | PRP PRP$ WP WP$ EX | PRON |
    /// | CD | NUM |
    /// | RP TO POS | PART |
    /// | UH | INTJ |
    /// | SYM $ # | SYM |
    /// | . , : `` '' -LRB- -RRB- HYPH NFP | PUNCT |
    /// | FW LS ADD AFX GW XX -NONE- | X |
    pub fn from_ptb(tag: &str) -> Option<Upos> {
        Some(match tag {
            "NN" | "NNS" => Upos::Noun,
            "NNP" | "NNPS" => Upos::Propn,
            "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" => Upos::Verb,
            "MD" => Upos::Aux,
            "JJ" | "JJR" | "JJS" => Upos::Adj,
            "RB" | "RBR" | "RBS" | "WRB" => Upos::Adv,
            "IN" => Upos::Adp,
            "CC" => Upos::Cconj,
            "DT" | "PDT" | "WDT" => Upos::Det,
            "PRP" | "PRP$" | "WP" | "WP$" | "EX" => Upos::Pron,
            "CD" => Upos::Num,
            "RP" | "TO" | "POS" => Upos::Part,
            "UH" => Upos::Intj,
            "SYM" | "$" | "#" => Upos::Sym,
            "." | "," | ":" | "``" | "''" | "-LRB-" | "-RRB-" | "HYPH" | "NFP" => Upos::Punct,
            "FW" | "LS" | "ADD" | "AFX" | "GW" | "XX" | "-NONE-" => Upos::X,
            _ => return None,
        })
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownTag(pub String);

impl FromStr for Upos {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Upos::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownTag(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Upos,
    /// Zero for punctuation and for words without letters (numerals).
    pub syllables: u32,
    pub is_word: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep_label: Option<String>,
    /// 1-based index of the head token in the same sentence; 0 is the root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<Tree>,
}

impl Sentence {
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word)
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    #[default]
    Builtin,
    Full,
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(Tier::Builtin),
            "full" => Ok(Tier::Full),
            other => Err(format!("unknown tier {other:?} (expected builtin or full)")),
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Builtin => "builtin",
            Tier::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub tier: Tier,
}

impl AnnotatedDocument {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens().filter(|t| t.is_word)
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    /// Checks the structural invariants for the document's tier.
    pub fn validate(&self) -> Result<(), AnnotateError> {
        let invalid = |message: String| AnnotateError::Validation {
            line: None,
            message: format!("document {:?}: {message}", self.id),
        };
        for (i, sentence) in self.sentences.iter().enumerate() {
            if sentence.tokens.is_empty() {
                return Err(invalid(format!("sentence {i} has no tokens")));
            }
            let n = sentence.tokens.len();
            for t in &sentence.tokens {
                if !t.is_word && t.syllables != 0 {
                    return Err(invalid(format!("non-word token {:?} has syllables", t.surface)));
                }
                if t.head.is_some_and(|h| h > n) {
                    return Err(invalid(format!("sentence {i}: head out of range")));
                }
            }
            match self.tier {
                Tier::Full => {
                    if sentence.tokens.iter().any(|t| t.dep_label.is_none()) {
                        return Err(invalid(format!("sentence {i}: token without dependency label")));
                    }
                    let Some(tree) = &sentence.tree else {
                        return Err(invalid(format!("sentence {i} has no tree")));
                    };
                    let (leaves, words) = (tree.word_leaf_count(), sentence.word_count());
                    if leaves != words {
                        return Err(AnnotateError::Alignment {
                            doc: self.id.clone(),
                            sentence: i,
                            leaves,
                            words,
                        });
                    }
                }
                Tier::Builtin => {
                    if sentence.tree.is_some() || sentence.tokens.iter().any(|t| t.dep_label.is_some()) {
                        return Err(invalid(format!(
                            "sentence {i}: builtin tier carries parse annotations"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Gold annotations for the full tier, keyed by document id.
#[derive(Debug, Clone, Default)]
pub struct GoldAnnotations {
    pub conllu: HashMap<String, ConlluDocument>,
    pub trees: HashMap<String, Vec<Tree>>,
}

impl GoldAnnotations {
    pub fn from_parts(
        conllu: Vec<ConlluDocument>,
        trees: Vec<TreeBlock>,
    ) -> Result<Self, AnnotateError> {
        let mut gold = GoldAnnotations::default();
        for doc in conllu {
            if gold.conllu.contains_key(&doc.id) {
                return Err(AnnotateError::Validation {
                    line: None,
                    message: format!("duplicate CoNLL-U document id {:?}", doc.id),
                });
            }
            gold.conllu.insert(doc.id.clone(), doc);
        }
        for block in trees {
            let id = block.id.ok_or_else(|| AnnotateError::Validation {
                line: None,
                message: "tree block without a '# id =' comment".into(),
            })?;
            gold.trees.entry(id).or_default().extend(block.trees);
        }
        Ok(gold)
    }
}

/// Read-only resources shared by all annotation calls.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a> {
    pub tags: &'a TagLexicon,
    pub syllables: &'a SyllableCounter,
    pub gold: Option<&'a GoldAnnotations>,
}

impl Default for Resources<'static> {
    fn default() -> Self {
        Resources {
            tags: TagLexicon::builtin(),
            syllables: SyllableCounter::builtin(),
            gold: None,
        }
    }
}

fn annotate_builtin(id: &str, text: &str, resources: &Resources<'_>) -> AnnotatedDocument {
    let sentences = segment_sentences(text)
        .into_iter()
        .filter_map(|raw| {
            let surfaces = tokenize(&raw);
            if surfaces.is_empty() {
                return None;
            }
            let tags = tag_pos(&surfaces, resources.tags);
            let tokens = surfaces
                .into_iter()
                .zip(tags)
                .map(|(surface, pos)| {
                    let is_word = pos.is_word_class();
                    Token {
                        lemma: resources.tags.lemmatize(&surface, pos),
                        syllables: if is_word { resources.syllables.count(&surface) } else { 0 },
                        surface,
                        pos,
                        is_word,
                        dep_label: None,
                        head: None,
                    }
                })
                .collect();
            Some(Sentence { tokens, tree: None })
        })
        .collect();
    AnnotatedDocument {
        id: id.to_string(),
        sentences,
        tier: Tier::Builtin,
    }
}

fn annotate_full(id: &str, gold: &GoldAnnotations) -> Result<AnnotatedDocument, AnnotateError> {
    let conllu = gold.conllu.get(id).ok_or_else(|| AnnotateError::MissingGold {
        id: id.to_string(),
        layer: "CoNLL-U",
    })?;
    let trees = gold.trees.get(id).ok_or_else(|| AnnotateError::MissingGold {
        id: id.to_string(),
        layer: "tree",
    })?;
    if trees.len() != conllu.sentences.len() {
        return Err(AnnotateError::SentenceCount {
            doc: id.to_string(),
            message: format!(
                "{} CoNLL-U sentences but {} trees",
                conllu.sentences.len(),
                trees.len()
            ),
        });
    }
    let doc = AnnotatedDocument {
        id: id.to_string(),
        sentences: conllu
            .sentences
            .iter()
            .zip(trees)
            .map(|(tokens, tree)| Sentence {
                tokens: tokens.clone(),
                tree: Some(tree.clone()),
            })
            .collect(),
        tier: Tier::Full,
    };
    doc.validate()?;
    Ok(doc)
}

/// Builds the annotated document for one text.
///
/// In the full tier the gold layers keyed by `id` are authoritative and `text`
/// is not re-tokenized.
pub fn annotate(
    id: &str,
    text: &str,
    resources: &Resources<'_>,
    tier: Tier,
) -> Result<AnnotatedDocument, AnnotateError> {
    match tier {
        Tier::Builtin => Ok(annotate_builtin(id, text, resources)),
        Tier::Full => {
            let gold = resources.gold.ok_or_else(|| AnnotateError::MissingGold {
                id: id.to_string(),
                layer: "gold (CoNLL-U + trees)",
            })?;
            annotate_full(id, gold)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONLLU: &str = "# newdoc id = r1/prompt\n\
1\tThe\tthe\tDET\tDT\t_\t2\tdet\t_\t_\n\
2\tdog\tdog\tNOUN\tNN\t_\t3\tnsubj\t_\t_\n\
3\tran\trun\tVERB\tVBD\t_\t0\troot\t_\t_\n\
4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n\n";

    fn gold(tree: &str) -> GoldAnnotations {
        let conllu = parse_conllu(CONLLU, SyllableCounter::builtin()).unwrap();
        let trees = parse_tree_file(&format!("# id = r1/prompt\n{tree}\n")).unwrap();
        GoldAnnotations::from_parts(conllu, trees).unwrap()
    }

    #[test]
    fn builtin_tier_structure() {
        let doc = annotate("d", "The dog ran.", &Resources::default(), Tier::Builtin).unwrap();
        assert_eq!(doc.sentences.len(), 1);
        assert_eq!(doc.sentences[0].tokens.len(), 4);
        assert!(doc.sentences[0].tree.is_none());
        assert_eq!(doc.tier, Tier::Builtin);
        assert_eq!(doc.word_count(), 3);
        assert_eq!(doc.sentences[0].tokens[2].lemma, "run");
        doc.validate().unwrap();
    }

    #[test]
    fn full_tier_with_matching_gold() {
        let g = gold("(S (NP (DT The) (NN dog)) (VP (VBD ran)) (. .))");
        let res = Resources {
            gold: Some(&g),
            ..Resources::default()
        };
        let doc = annotate("r1/prompt", "ignored", &res, Tier::Full).unwrap();
        assert_eq!(doc.tier, Tier::Full);
        assert_eq!(doc.sentences[0].tree.as_ref().unwrap().height(), 3);
        doc.validate().unwrap();
    }

    #[test]
    fn full_tier_misaligned_tree() {
        let g = gold("(S (NP (NN dog)) (VP (VBD ran)))");
        let res = Resources {
            gold: Some(&g),
            ..Resources::default()
        };
        match annotate("r1/prompt", "", &res, Tier::Full) {
            Err(AnnotateError::Alignment {
                sentence: 0,
                leaves: 2,
                words: 3,
                ..
            }) => {}
            other => panic!("expected alignment error, got {other:?}"),
        }
    }

    #[test]
    fn full_tier_missing_layers() {
        let g = gold("(S (NP (DT The) (NN dog)) (VP (VBD ran)))");
        let res = Resources {
            gold: Some(&g),
            ..Resources::default()
        };
        assert!(matches!(
            annotate("nope", "", &res, Tier::Full),
            Err(AnnotateError::MissingGold { layer: "CoNLL-U", .. })
        ));
        assert!(matches!(
            annotate("x", "", &Resources::default(), Tier::Full),
            Err(AnnotateError::MissingGold { .. })
        ));
    }

    #[test]
    fn sentence_token_counts_sum_to_document_total() {
        let text = "It was late. \"Come in,\" she said! The rain didn't stop?";
        let doc = annotate("d", text, &Resources::default(), Tier::Builtin).unwrap();
        let per_sentence: usize = doc.sentences.iter().map(|s| s.tokens.len()).sum();
        assert_eq!(per_sentence, doc.tokens().count());
        assert_eq!(doc.sentences.len(), 3);
    }

    #[test]
    fn ptb_mapping_covers_core_tags() {
        assert_eq!(Upos::from_ptb("NNS"), Some(Upos::Noun));
        assert_eq!(Upos::from_ptb("MD"), Some(Upos::Aux));
        assert_eq!(Upos::from_ptb("-LRB-"), Some(Upos::Punct));
        assert_eq!(Upos::from_ptb("NP"), None);
        assert_eq!("SCONJ".parse::<Upos>(), Ok(Upos::Sconj));
        assert!("sconj".parse::<Upos>().is_err());
    }
}
