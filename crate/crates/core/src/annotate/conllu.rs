//! CoNLL-U reader for externally supplied gold annotations.

use std::fs;
use std::path::Path;

use super::syllables::SyllableCounter;
use super::{AnnotateError, Token, Upos};

/// One CoNLL-U document (delimited by `# newdoc id = ...`), tokens only.
/// Combine with trees via [`super::annotate`] to obtain a full-tier document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConlluDocument {
    pub id: String,
    pub sentences: Vec<Vec<Token>>,
}

struct PendingSentence {
    tokens: Vec<Token>,
    lines: Vec<usize>,
}

fn parse_error(line: usize, message: impl Into<String>) -> AnnotateError {
    AnnotateError::Parse {
        line,
        message: message.into(),
    }
}

fn finish_sentence(
    pending: &mut PendingSentence,
    docs: &mut Vec<ConlluDocument>,
) -> Result<(), AnnotateError> {
    if pending.tokens.is_empty() {
        return Ok(());
    }
    let n = pending.tokens.len();
    for (token, &line) in pending.tokens.iter().zip(&pending.lines) {
        if let Some(head) = token.head {
            if head > n {
                return Err(AnnotateError::Validation {
                    line: Some(line),
                    message: format!("head {head} out of range for a {n}-token sentence"),
                });
            }
        }
    }
    if docs.is_empty() {
        docs.push(ConlluDocument {
            id: "doc-1".into(),
            sentences: Vec::new(),
        });
    }
    let doc = docs.last_mut().expect("at least one document");
    doc.sentences.push(std::mem::take(&mut pending.tokens));
    pending.lines.clear();
    Ok(())
}

fn optional(field: &str) -> Option<&str> {
    (field != "_").then_some(field)
}

/// Parses CoNLL-U text. Multiword-token ranges (`1-2`) and empty nodes (`1.1`)
/// are skipped. When the UPOS column is `_`, the XPOS column is mapped from PTB tags.
pub fn parse_conllu(text: &str, syllables: &SyllableCounter) -> Result<Vec<ConlluDocument>, AnnotateError> {
    let mut docs: Vec<ConlluDocument> = Vec::new();
    let mut pending = PendingSentence {
        tokens: Vec::new(),
        lines: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish_sentence(&mut pending, &mut docs)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("newdoc") {
                finish_sentence(&mut pending, &mut docs)?;
                let id = rest
                    .trim()
                    .strip_prefix("id")
                    .map(str::trim)
                    .and_then(|r| r.strip_prefix('='))
                    .map(|r| r.trim().to_string())
                    .filter(|r| !r.is_empty())
                    .unwrap_or_else(|| format!("doc-{}", docs.len() + 1));
                docs.push(ConlluDocument {
                    id,
                    sentences: Vec::new(),
                });
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(parse_error(
                line_no,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| parse_error(line_no, format!("bad token id {:?}", cols[0])))?;
        if id != pending.tokens.len() + 1 {
            return Err(parse_error(
                line_no,
                format!("token id {id} out of sequence (expected {})", pending.tokens.len() + 1),
            ));
        }
        let surface = cols[1].to_string();
        let pos = match optional(cols[3]) {
            Some(upos) => upos
                .parse::<Upos>()
                .map_err(|_| parse_error(line_no, format!("unknown UPOS tag {upos:?}")))?,
            None => optional(cols[4])
                .and_then(Upos::from_ptb)
                .ok_or_else(|| parse_error(line_no, "no usable UPOS or XPOS tag"))?,
        };
        let head = match optional(cols[6]) {
            Some(h) => Some(
                h.parse::<usize>()
                    .map_err(|_| parse_error(line_no, format!("bad head {h:?}")))?,
            ),
            None => None,
        };
        let lemma = optional(cols[2])
            .map(str::to_string)
            .unwrap_or_else(|| surface.to_lowercase());
        let is_word = pos.is_word_class();
        pending.tokens.push(Token {
            syllables: if is_word { syllables.count(&surface) } else { 0 },
            surface,
            lemma,
            pos,
            is_word,
            dep_label: optional(cols[7]).map(str::to_string),
            head,
        });
        pending.lines.push(line_no);
    }
    finish_sentence(&mut pending, &mut docs)?;
    Ok(docs)
}

pub fn read_conllu(path: &Path) -> Result<Vec<ConlluDocument>, AnnotateError> {
    let text = fs::read_to_string(path).map_err(|source| AnnotateError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_conllu(&text, SyllableCounter::builtin())
}
