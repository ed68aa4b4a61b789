//! Psycholinguistic norm lexicons (age-of-acquisition, subtitle frequencies).
//!
//! The databases are not redistributed. Users point a profile at their own
//! copy; a profile names the key column, the value column, and whether keys
//! are surface forms or lemmas.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{AnnotatedDocument, Token};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon {name:?}: {message}")]
    Schema { name: String, message: String },
    #[error("lexicon {name:?} has no usable entries")]
    Empty { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KeyKind {
    #[default]
    Surface,
    Lemma,
}

/// A column addressed by header name or by zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSchema {
    pub key_column: Column,
    pub value_column: Column,
    pub delimiter: u8,
    pub has_header: bool,
    pub key_kind: KeyKind,
}

/// One entry of a lexicon profile file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconProfile {
    pub name: String,
    pub path: PathBuf,
    pub key_column: Column,
    pub value_column: Column,
    #[serde(default)]
    pub key_kind: KeyKind,
    /// Single-character delimiter; `"\t"` when absent.
    #[serde(default)]
    pub delimiter: Option<String>,
    #[serde(default = "default_true")]
    pub has_header: bool,
}

fn default_true() -> bool {
    true
}

impl LexiconProfile {
    pub fn schema(&self) -> Result<LexiconSchema, LexiconError> {
        let delimiter = match self.delimiter.as_deref() {
            None | Some("\t") | Some("tab") => b'\t',
            Some(d) if d.len() == 1 => d.as_bytes()[0],
            Some(d) => {
                return Err(LexiconError::Schema {
                    name: self.name.clone(),
                    message: format!("delimiter must be one byte, got {d:?}"),
                })
            }
        };
        Ok(LexiconSchema {
            key_column: self.key_column.clone(),
            value_column: self.value_column.clone(),
            delimiter,
            has_header: self.has_header,
            key_kind: self.key_kind,
        })
    }

    /// Resolves a relative path against `base`.
    pub fn resolved_path(&self, base: Option<&Path>) -> PathBuf {
        match base {
            Some(dir) if self.path.is_relative() => dir.join(&self.path),
            _ => self.path.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based record number in the file, header included.
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormLexicon {
    pub name: String,
    pub key_kind: KeyKind,
    entries: HashMap<String, f64>,
    /// Rows whose folded key was already present (first occurrence wins).
    pub duplicates: usize,
}

/// A loaded lexicon plus the rows that were skipped.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub lexicon: NormLexicon,
    pub row_errors: Vec<RowError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coverage {
    pub ratio: f64,
    pub empty_document: bool,
}

fn fold(key: &str) -> String {
    key.trim().to_lowercase()
}

fn resolve(column: &Column, headers: Option<&csv::StringRecord>, name: &str) -> Result<usize, LexiconError> {
    match column {
        Column::Index(i) => Ok(*i),
        Column::Name(n) => headers
            .and_then(|h| h.iter().position(|c| c.trim() == n))
            .ok_or_else(|| LexiconError::Schema {
                name: name.to_string(),
                message: format!("column {n:?} not found in header"),
            }),
    }
}

impl NormLexicon {
    /// Builds a lexicon directly from pairs; keys are case-folded here.
    pub fn from_entries<I, K>(name: &str, key_kind: KeyKind, entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: AsRef<str>,
    {
        let mut lex = NormLexicon {
            name: name.to_string(),
            key_kind,
            entries: HashMap::new(),
            duplicates: 0,
        };
        for (k, v) in entries {
            lex.insert(k.as_ref(), v);
        }
        if lex.entries.is_empty() {
            return Err(LexiconError::Empty { name: name.into() });
        }
        Ok(lex)
    }

    fn insert(&mut self, key: &str, value: f64) {
        match self.entries.entry(fold(key)) {
            std::collections::hash_map::Entry::Occupied(_) => self.duplicates += 1,
            std::collections::hash_map::Entry::Vacant(slot) => {
                slot.insert(value);
            }
        }
    }

    pub fn parse<R: Read>(name: &str, reader: R, schema: &LexiconSchema) -> Result<Loaded, LexiconError> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(schema.delimiter)
            .has_headers(schema.has_header)
            .flexible(true)
            .quoting(schema.delimiter != b'\t')
            .from_reader(reader);
        let headers = if schema.has_header {
            Some(rdr.headers().map_err(|e| LexiconError::Schema {
                name: name.into(),
                message: format!("cannot read header: {e}"),
            })?.clone())
        } else {
            None
        };
        let key_idx = resolve(&schema.key_column, headers.as_ref(), name)?;
        let value_idx = resolve(&schema.value_column, headers.as_ref(), name)?;
        if let Some(h) = &headers {
            let width = h.len();
            if key_idx >= width || value_idx >= width {
                return Err(LexiconError::Schema {
                    name: name.into(),
                    message: format!("column index out of range for a {width}-column header"),
                });
            }
        }
        let mut lexicon = NormLexicon {
            name: name.to_string(),
            key_kind: schema.key_kind,
            entries: HashMap::new(),
            duplicates: 0,
        };
        let mut row_errors = Vec::new();
        let first_row = if schema.has_header { 2 } else { 1 };
        for (i, record) in rdr.records().enumerate() {
            let row = first_row + i;
            let record = match record {
                Ok(r) => r,
                Err(e) => {
                    row_errors.push(RowError { row, message: e.to_string() });
                    continue;
                }
            };
            let (Some(key), Some(raw)) = (record.get(key_idx), record.get(value_idx)) else {
                row_errors.push(RowError {
                    row,
                    message: "row is missing the key or value column".into(),
                });
                continue;
            };
            if key.trim().is_empty() {
                row_errors.push(RowError { row, message: "empty key".into() });
                continue;
            }
            match raw.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => lexicon.insert(key, v),
                _ => row_errors.push(RowError {
                    row,
                    message: format!("non-numeric value {raw:?}"),
                }),
            }
        }
        if lexicon.entries.is_empty() {
            return Err(LexiconError::Empty { name: name.into() });
        }
        Ok(Loaded { lexicon, row_errors })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value for a token, keyed by its case-folded surface or lemma. A miss is `None`, never 0.
    pub fn lookup(&self, token: &Token) -> Option<f64> {
        let key = match self.key_kind {
            KeyKind::Surface => &token.surface,
            KeyKind::Lemma => &token.lemma,
        };
        self.get(key)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(&fold(key)).copied()
    }

    /// Share of word tokens found in the lexicon.
    pub fn coverage(&self, doc: &AnnotatedDocument) -> Coverage {
        let (hits, total) = doc.words().fold((0usize, 0usize), |(h, t), tok| {
            (h + usize::from(self.lookup(tok).is_some()), t + 1)
        });
        if total == 0 {
            return Coverage {
                ratio: 0.0,
                empty_document: true,
            };
        }
        Coverage {
            ratio: hits as f64 / total as f64,
            empty_document: false,
        }
    }
}

pub fn load_norm_lexicon(path: &Path, name: &str, schema: &LexiconSchema) -> Result<Loaded, LexiconError> {
    let file = File::open(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    NormLexicon::parse(name, file, schema)
}

pub fn load_profile(profile: &LexiconProfile, base: Option<&Path>) -> Result<Loaded, LexiconError> {
    load_norm_lexicon(&profile.resolved_path(base), &profile.name, &profile.schema()?)
}
