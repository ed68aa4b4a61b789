//! Prompt/continuation corpora: JSONL ingestion and word-count filtering.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default lower bound on prompt length, in whitespace-delimited words.
pub const DEFAULT_MIN_PROMPT_WORDS: usize = 30;
/// Default lower bound on continuation length.
pub const DEFAULT_MIN_CONT_WORDS: usize = 150;
/// Default upper bound on continuation length.
pub const DEFAULT_MAX_CONT_WORDS: usize = 300;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate record id {id:?} at line {line} (first seen at line {first_line})")]
    DuplicateId {
        id: String,
        line: usize,
        first_line: usize,
    },
    #[error("invalid filter bounds: {0}")]
    Config(String),
}

/// One prompt with the continuation a model (or a human) wrote for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: String,
    pub prompt: String,
    pub continuation: String,
    pub model: String,
}

/// A problem with a single input line. Malformed lines are collected, not fatal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Word-count bounds, all inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSettings {
    pub min_prompt_words: usize,
    pub min_cont_words: usize,
    pub max_cont_words: usize,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self {
            min_prompt_words: DEFAULT_MIN_PROMPT_WORDS,
            min_cont_words: DEFAULT_MIN_CONT_WORDS,
            max_cont_words: DEFAULT_MAX_CONT_WORDS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    /// Every filter applied so far, in order.
    pub filters: Vec<FilterSettings>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Corpus {
    pub records: Vec<PairRecord>,
    pub provenance: Provenance,
}

/// Result of [`load_pairs`]: the valid records plus every rejected line.
#[derive(Debug, Clone, Default)]
pub struct Loaded {
    pub corpus: Corpus,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    PromptTooShort,
    ContinuationTooShort,
    ContinuationTooLong,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::PromptTooShort => "prompt-too-short",
            DropReason::ContinuationTooShort => "continuation-too-short",
            DropReason::ContinuationTooLong => "continuation-too-long",
        }
    }
}

/// Sidecar report written next to a filtered pairs file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub settings: FilterSettings,
    pub input: usize,
    pub kept: usize,
    pub dropped_by_reason: BTreeMap<String, usize>,
}

/// Number of Unicode-whitespace-separated words in raw text.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[derive(Deserialize)]
struct RawPair {
    id: Option<String>,
    prompt: Option<String>,
    continuation: Option<String>,
    model: Option<String>,
}

fn parse_line(line: &str) -> Result<PairRecord, String> {
    let raw: RawPair = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let missing: Vec<&str> = [
        ("id", raw.id.is_none()),
        ("prompt", raw.prompt.is_none()),
        ("continuation", raw.continuation.is_none()),
        ("model", raw.model.is_none()),
    ]
    .into_iter()
    .filter_map(|(k, m)| m.then_some(k))
    .collect();
    if !missing.is_empty() {
        return Err(format!("missing required key(s): {}", missing.join(", ")));
    }
    let record = PairRecord {
        id: raw.id.unwrap_or_default(),
        prompt: raw.prompt.unwrap_or_default(),
        continuation: raw.continuation.unwrap_or_default(),
        model: raw.model.unwrap_or_default(),
    };
    if record.id.is_empty() {
        return Err("empty id".into());
    }
    if record.prompt.trim().is_empty() {
        return Err("prompt is empty".into());
    }
    if record.continuation.trim().is_empty() {
        return Err("continuation is empty".into());
    }
    Ok(record)
}

/// Parses JSONL text. Line numbers in errors are 1-based; blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Loaded, CorpusError> {
    let mut loaded = Loaded::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(record) => {
                if let Some(&first_line) = seen.get(&record.id) {
                    return Err(CorpusError::DuplicateId {
                        id: record.id,
                        line: line_no,
                        first_line,
                    });
                }
                seen.insert(record.id.clone(), line_no);
                loaded.corpus.records.push(record);
            }
            Err(message) => loaded.errors.push(LineError {
                line: line_no,
                message,
            }),
        }
    }
    Ok(loaded)
}

pub fn load_pairs(path: &Path) -> Result<Loaded, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut loaded = parse_pairs(&text)?;
    loaded.corpus.provenance.source = Some(path.to_path_buf());
    Ok(loaded)
}

/// Serializes records as JSONL with keys in `id, prompt, continuation, model` order.
pub fn write_pairs<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for record in &corpus.records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn classify(record: &PairRecord, settings: &FilterSettings) -> Option<DropReason> {
    if word_count(&record.prompt) < settings.min_prompt_words {
        return Some(DropReason::PromptTooShort);
    }
    let cont = word_count(&record.continuation);
    if cont < settings.min_cont_words {
        Some(DropReason::ContinuationTooShort)
    } else if cont > settings.max_cont_words {
        Some(DropReason::ContinuationTooLong)
    } else {
        None
    }
}

/// Keeps records whose prompt has at least `min_prompt_words` words and whose
/// continuation length lies in `[min_cont_words, max_cont_words]`.
pub fn filter_pairs(
    corpus: &Corpus,
    settings: FilterSettings,
) -> Result<(Corpus, FilterReport), CorpusError> {
    if settings.min_cont_words > settings.max_cont_words {
        return Err(CorpusError::Config(format!(
            "min continuation words ({}) exceeds max continuation words ({})",
            settings.min_cont_words, settings.max_cont_words
        )));
    }
    let mut dropped: BTreeMap<String, usize> = [
        DropReason::PromptTooShort,
        DropReason::ContinuationTooShort,
        DropReason::ContinuationTooLong,
    ]
    .into_iter()
    .map(|r| (r.as_str().to_string(), 0))
    .collect();
    let mut records = Vec::with_capacity(corpus.records.len());
    for record in &corpus.records {
        match classify(record, &settings) {
            None => records.push(record.clone()),
            Some(reason) => *dropped.entry(reason.as_str().to_string()).or_default() += 1,
        }
    }
    let mut provenance = corpus.provenance.clone();
    provenance.filters.push(settings);
    let report = FilterReport {
        settings,
        input: corpus.records.len(),
        kept: records.len(),
        dropped_by_reason: dropped,
    };
    Ok((Corpus { records, provenance }, report))
}

/// Ids present in `left` but not `right`, and vice versa.
pub fn id_difference<'a>(
    left: impl IntoIterator<Item = &'a str>,
    right: impl IntoIterator<Item = &'a str>,
) -> (Vec<String>, Vec<String>) {
    let l: HashSet<&str> = left.into_iter().collect();
    let r: HashSet<&str> = right.into_iter().collect();
    let mut only_left: Vec<String> = l.difference(&r).map(|s| s.to_string()).collect();
    let mut only_right: Vec<String> = r.difference(&l).map(|s| s.to_string()).collect();
    only_left.sort();
    only_right.sort();
    (only_left, only_right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(n: usize) -> String {
        vec!["w"; n].join(" ")
    }

    fn rec(id: &str, prompt_words: usize, cont_words: usize) -> PairRecord {
        PairRecord {
            id: id.into(),
            prompt: words(prompt_words),
            continuation: words(cont_words),
            model: "human".into(),
        }
    }

    fn corpus(records: Vec<PairRecord>) -> Corpus {
        Corpus {
            records,
            provenance: Provenance::default(),
        }
    }

    #[test]
    fn loads_well_formed_lines_in_order() {
        let text = r#"{"id":"a","prompt":"p1","continuation":"c1","model":"human"}
{"id":"b","prompt":"p2","continuation":"c2","model":"gpt2","extra":1}
{"id":"c","prompt":"p3","continuation":"c3","model":"human"}
"#;
        let loaded = parse_pairs(text).unwrap();
        assert!(loaded.errors.is_empty());
        let ids: Vec<_> = loaded.corpus.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn empty_file_gives_empty_corpus() {
        let loaded = parse_pairs("").unwrap();
        assert!(loaded.corpus.records.is_empty());
        assert!(loaded.errors.is_empty());
    }

    #[test]
    fn missing_key_is_reported_with_line_number() {
        let text = "{\"id\":\"a\",\"prompt\":\"p\",\"continuation\":\"c\",\"model\":\"m\"}\n\
                    {\"id\":\"b\",\"prompt\":\"p\",\"model\":\"m\"}\n";
        let loaded = parse_pairs(text).unwrap();
        assert_eq!(loaded.corpus.records.len(), 1);
        assert_eq!(loaded.errors.len(), 1);
        assert_eq!(loaded.errors[0].line, 2);
        assert!(loaded.errors[0].message.contains("continuation"));
    }

    #[test]
    fn junk_and_blank_prompt_lines_are_reported() {
        let text = "not json\n{\"id\":\"a\",\"prompt\":\"  \",\"continuation\":\"c\",\"model\":\"m\"}\n";
        let loaded = parse_pairs(text).unwrap();
        assert!(loaded.corpus.records.is_empty());
        assert_eq!(
            loaded.errors.iter().map(|e| e.line).collect::<Vec<_>>(),
            [1, 2]
        );
    }

    #[test]
    fn duplicate_id_is_fatal() {
        let line = "{\"id\":\"a\",\"prompt\":\"p\",\"continuation\":\"c\",\"model\":\"m\"}";
        let err = parse_pairs(&format!("{line}\n{line}\n")).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { line: 2, first_line: 1, .. }));
    }

    #[test]
    fn unreadable_file_is_io_error() {
        let err = load_pairs(Path::new("/nonexistent/pairs.jsonl")).unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }

    #[test]
    fn bounds_are_inclusive() {
        let c = corpus(vec![
            rec("keep", 30, 150),
            rec("short-prompt", 29, 200),
            rec("long-cont", 40, 301),
            rec("short-cont", 40, 149),
            rec("keep-max", 40, 300),
        ]);
        let (kept, report) = filter_pairs(&c, FilterSettings::default()).unwrap();
        let ids: Vec<_> = kept.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["keep", "keep-max"]);
        assert_eq!(report.kept, 2);
        assert_eq!(report.dropped_by_reason["prompt-too-short"], 1);
        assert_eq!(report.dropped_by_reason["continuation-too-long"], 1);
        assert_eq!(report.dropped_by_reason["continuation-too-short"], 1);
        assert_eq!(kept.provenance.filters, vec![FilterSettings::default()]);
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let settings = FilterSettings {
            min_prompt_words: 1,
            min_cont_words: 10,
            max_cont_words: 5,
        };
        assert!(matches!(
            filter_pairs(&corpus(vec![]), settings),
            Err(CorpusError::Config(_))
        ));
    }

    #[test]
    fn word_count_uses_unicode_whitespace() {
        assert_eq!(word_count("a\u{00A0}b\tc\n d"), 4);
        assert_eq!(word_count("   "), 0);
    }

    fn arb_record() -> impl Strategy<Value = (usize, usize)> {
        (0usize..60, 100usize..350)
    }

    proptest! {
        #[test]
        fn filter_is_idempotent_and_order_preserving(lens in prop::collection::vec(arb_record(), 0..40)) {
            let records: Vec<_> = lens.iter().enumerate()
                .map(|(i, &(p, c))| rec(&format!("r{i}"), p, c))
                .collect();
            let c = corpus(records);
            let settings = FilterSettings::default();
            let (once, _) = filter_pairs(&c, settings).unwrap();
            let (twice, report) = filter_pairs(&once, settings).unwrap();
            prop_assert_eq!(&once.records, &twice.records);
            prop_assert_eq!(report.kept, once.records.len());
            let positions: Vec<usize> = once.records.iter()
                .map(|r| c.records.iter().position(|o| o.id == r.id).unwrap())
                .collect();
            prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn write_then_load_round_trips(texts in prop::collection::vec(("[a-zA-Z\"\\\\ é]{1,20}", "[a-z\n\t ]{0,5}[a-z]{1,20}"), 0..10)) {
            let records: Vec<_> = texts.iter().enumerate().map(|(i, (p, c))| PairRecord {
                id: format!("id-{i}"),
                prompt: format!("x{p}"),
                continuation: c.clone(),
                model: "gpt2".into(),
            }).collect();
            let c = corpus(records);
            let mut buf = Vec::new();
            write_pairs(&c, &mut buf).unwrap();
            let loaded = parse_pairs(std::str::from_utf8(&buf).unwrap()).unwrap();
            prop_assert!(loaded.errors.is_empty());
            prop_assert_eq!(loaded.corpus.records, c.records);
        }
    }
}
