//! The 160-feature complexity battery.
//!
//! [`registry`] is the fixed catalog; [`extract`] computes one [`FeatureVector`]
//! per annotated document, keyed and ordered by the catalog.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::annotate::{AnnotatedDocument, Upos};
use crate::lexicons::NormLexicon;

pub mod discourse;
pub mod formula;
mod phrasal;
mod pos;
mod psycho;
mod shallow;
pub mod table;
mod tree;
mod ttr;
mod variation;

pub use discourse::{EntityGrid, Role};
pub use formula::SurfaceCounts;
pub use psycho::LEXICON_NAMES;
pub use table::{read_csv, read_json, write_csv, write_json};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("document {0:?} is empty (no sentences)")]
    EmptyDocument(String),
    #[error("feature table: {0}")]
    Table(String),
    #[error("feature table row {row}: {message}")]
    Row { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Shallow,
    Formula,
    Pos,
    Ttr,
    Variation,
    Phrasal,
    Tree,
    Psycho,
    Discourse,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Shallow,
        Family::Formula,
        Family::Pos,
        Family::Ttr,
        Family::Variation,
        Family::Phrasal,
        Family::Tree,
        Family::Psycho,
        Family::Discourse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Shallow => "shallow",
            Family::Formula => "formula",
            Family::Pos => "pos",
            Family::Ttr => "ttr",
            Family::Variation => "variation",
            Family::Phrasal => "phrasal",
            Family::Tree => "tree",
            Family::Psycho => "psycho",
            Family::Discourse => "discourse",
        }
    }

    /// Table caption used by the report renderer.
    pub fn title(self) -> &'static str {
        match self {
            Family::Shallow => "Shallow based features.",
            Family::Formula => "Readability formula based features.",
            Family::Pos => "Part-of-speech based features.",
            Family::Ttr => "Type-token ratio based features.",
            Family::Variation => "Lexical variation based features.",
            Family::Phrasal => "Phrasal based features.",
            Family::Tree => "Syntax tree based features.",
            Family::Psycho => "Psycholinguistic based features.",
            Family::Discourse => "Discourse based features.",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown feature family {s:?}"))
    }
}

/// What a feature needs beyond the builtin annotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Requirement {
    Builtin,
    Full,
    Lexicon(String),
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Builtin => f.write_str("builtin"),
            Requirement::Full => f.write_str("full"),
            Requirement::Lexicon(name) => write!(f, "lexicon:{name}"),
        }
    }
}

impl Serialize for Requirement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureDef {
    pub id: String,
    pub family: Family,
    /// Row label as printed in the published tables.
    pub paper_name: String,
    pub requires: Requirement,
    /// Definition or interpretation note; empty when the label says it all.
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl FeatureDef {
    pub(crate) fn new(id: impl Into<String>, family: Family, paper_name: impl Into<String>) -> Self {
        FeatureDef {
            id: id.into(),
            family,
            paper_name: paper_name.into(),
            requires: Requirement::Builtin,
            note: String::new(),
        }
    }

    pub(crate) fn requires(mut self, requires: Requirement) -> Self {
        self.requires = requires;
        self
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// The fixed catalog, in output order.
pub fn registry() -> &'static [FeatureDef] {
    static REGISTRY: OnceLock<Vec<FeatureDef>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut defs = Vec::with_capacity(160);
        defs.extend(shallow::defs());
        defs.extend(formula::defs());
        defs.extend(pos::defs());
        defs.extend(ttr::defs());
        defs.extend(variation::defs());
        defs.extend(phrasal::defs());
        defs.extend(tree::defs());
        defs.extend(psycho::defs());
        defs.extend(discourse::defs());
        defs
    })
}

pub fn feature(id: &str) -> Option<&'static FeatureDef> {
    static INDEX: OnceLock<HashMap<&'static str, usize>> = OnceLock::new();
    let index = INDEX.get_or_init(|| {
        registry()
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.as_str(), i))
            .collect()
    });
    index.get(id).map(|&i| &registry()[i])
}

pub fn family_features(family: Family) -> impl Iterator<Item = &'static FeatureDef> {
    registry().iter().filter(move |d| d.family == family)
}

/// The catalog as TSV: id, family, paper_name, requires, note.
pub fn render_catalog() -> String {
    let mut out = String::from("id\tfamily\tpaper_name\trequires\tnote\n");
    for d in registry() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            d.id, d.family, d.paper_name, d.requires, d.note
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeRatio {
    pub value: f64,
    pub degenerate: bool,
}

/// `numerator / denominator`, or 0 flagged as degenerate when the denominator is 0.
pub fn safe_ratio(numerator: f64, denominator: f64) -> SafeRatio {
    if denominator == 0.0 {
        SafeRatio {
            value: 0.0,
            degenerate: true,
        }
    } else {
        SafeRatio {
            value: numerator / denominator,
            degenerate: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureValue {
    pub value: f64,
    pub available: bool,
}

impl FeatureValue {
    pub const UNAVAILABLE: FeatureValue = FeatureValue {
        value: 0.0,
        available: false,
    };

    pub fn available(value: f64) -> Self {
        FeatureValue { value, available: true }
    }

    /// The value, if available.
    pub fn get(self) -> Option<f64> {
        self.available.then_some(self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub doc_id: String,
    /// Every registry feature, in registry order.
    pub values: IndexMap<String, FeatureValue>,
    /// Features whose value came from a zero denominator.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<String>,
    /// Lexicon name to share of word tokens found in it.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coverage: BTreeMap<String, f64>,
}

impl FeatureVector {
    pub fn empty(doc_id: impl Into<String>) -> Self {
        FeatureVector {
            doc_id: doc_id.into(),
            values: registry()
                .iter()
                .map(|d| (d.id.clone(), FeatureValue::UNAVAILABLE))
                .collect(),
            degenerate: Vec::new(),
            coverage: BTreeMap::new(),
        }
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.get(id).and_then(|v| v.get())
    }

    pub fn available_count(&self) -> usize {
        self.values.values().filter(|v| v.available).count()
    }

    fn set(&mut self, id: &str, value: f64) {
        let slot = self
            .values
            .get_mut(id)
            .unwrap_or_else(|| panic!("feature {id:?} is not registered"));
        *slot = if value.is_finite() {
            FeatureValue::available(value)
        } else {
            FeatureValue::UNAVAILABLE
        };
    }

    fn set_ratio(&mut self, id: &str, numerator: f64, denominator: f64) {
        let r = safe_ratio(numerator, denominator);
        if r.degenerate {
            self.degenerate.push(id.to_string());
        }
        self.set(id, r.value);
    }
}

/// Norm lexicons available to the psycholinguistic family, by name.
#[derive(Debug, Clone, Default)]
pub struct FeatureResources {
    lexicons: HashMap<String, NormLexicon>,
}

impl FeatureResources {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_lexicon(&mut self, lexicon: NormLexicon) {
        self.lexicons.insert(lexicon.name.clone(), lexicon);
    }

    pub fn with_lexicon(mut self, lexicon: NormLexicon) -> Self {
        self.add_lexicon(lexicon);
        self
    }

    pub fn lexicon(&self, name: &str) -> Option<&NormLexicon> {
        self.lexicons.get(name)
    }
}

/// Open-class tags counted as content words.
pub(crate) const CONTENT_TAGS: [Upos; 6] = [Upos::Noun, Upos::Propn, Upos::Verb, Upos::Aux, Upos::Adj, Upos::Adv];

/// Document-level counts shared by several families.
pub(crate) struct Context<'a> {
    pub doc: &'a AnnotatedDocument,
    /// Sentences.
    pub s: f64,
    /// Word tokens (punctuation and symbols excluded).
    pub t: f64,
    pub surface: SurfaceCounts,
    pub pos: HashMap<Upos, usize>,
}

impl<'a> Context<'a> {
    fn new(doc: &'a AnnotatedDocument) -> Self {
        let surface = SurfaceCounts::from_document(doc);
        let mut pos = HashMap::new();
        for w in doc.words() {
            *pos.entry(w.pos).or_insert(0) += 1;
        }
        Context {
            doc,
            s: surface.sentences as f64,
            t: surface.words as f64,
            surface,
            pos,
        }
    }

    pub fn pos_count(&self, tags: &[Upos]) -> f64 {
        tags.iter().map(|t| self.pos.get(t).copied().unwrap_or(0)).sum::<usize>() as f64
    }
}

/// Computes the full vector for one document.
///
/// Family failures (missing tier, missing lexicon, singular denominators) turn
/// into unavailable values; only an empty document is an error.
pub fn extract(doc: &AnnotatedDocument, resources: &FeatureResources) -> Result<FeatureVector, FeatureError> {
    if doc.sentences.is_empty() {
        return Err(FeatureError::EmptyDocument(doc.id.clone()));
    }
    let ctx = Context::new(doc);
    let mut out = FeatureVector::empty(&doc.id);
    shallow::extract(&ctx, &mut out);
    formula::extract(&ctx, &mut out);
    pos::extract(&ctx, &mut out);
    ttr::extract(&ctx, &mut out);
    variation::extract(&ctx, &mut out);
    phrasal::extract(&ctx, &mut out);
    tree::extract(&ctx, &mut out);
    psycho::extract(&ctx, resources, &mut out);
    discourse::extract(&ctx, &mut out);
    Ok(out)
}

/// [`extract`] over many documents in parallel; output order follows input order.
pub fn extract_all(
    docs: &[AnnotatedDocument],
    resources: &FeatureResources,
) -> Result<Vec<FeatureVector>, FeatureError> {
    docs.par_iter().map(|d| extract(d, resources)).collect()
}

#[cfg(test)]
pub(crate) mod test_util {
    use crate::annotate::{AnnotatedDocument, Sentence, Tier, Token, Upos};

    /// Builds a builtin-tier document from `(surface, tag, syllables)` sentences.
    pub fn doc(sentences: &[&[(&str, Upos, u32)]]) -> AnnotatedDocument {
        AnnotatedDocument {
            id: "t".into(),
            tier: Tier::Builtin,
            sentences: sentences
                .iter()
                .map(|s| Sentence {
                    tree: None,
                    tokens: s
                        .iter()
                        .map(|&(surface, pos, syllables)| Token {
                            surface: surface.into(),
                            lemma: surface.to_lowercase(),
                            pos,
                            syllables,
                            is_word: pos.is_word_class(),
                            dep_label: None,
                            head: None,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Full-tier document whose tokens are the leaves of the given trees.
    pub fn full_doc(trees: &[&str]) -> AnnotatedDocument {
        let sentences = trees
            .iter()
            .map(|text| {
                let tree = crate::annotate::parse_tree(text).unwrap();
                let tokens = tree
                    .leaves()
                    .into_iter()
                    .map(|(parent, word)| {
                        let pos = Upos::from_ptb(parent).unwrap_or(Upos::X);
                        Token {
                            surface: word.into(),
                            lemma: word.to_lowercase(),
                            pos,
                            syllables: if pos.is_word_class() { crate::annotate::count_syllables(word) } else { 0 },
                            is_word: pos.is_word_class(),
                            dep_label: Some("dep".into()),
                            head: Some(0),
                        }
                    })
                    .collect();
                Sentence { tokens, tree: Some(tree) }
            })
            .collect();
        let doc = AnnotatedDocument {
            id: "f".into(),
            sentences,
            tier: Tier::Full,
        };
        doc.validate().unwrap();
        doc
    }
}
