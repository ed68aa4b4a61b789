//! Prompt-vs-continuation significance tables and continuation correlation tables.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::features::{family_features, registry, Family, FeatureVector};
use crate::stats::{bonferroni, pearson, welch_test, StatsError, TestResult};

/// Correlations below this are weak; the correlation table says so.
pub const WEAK_CORRELATION: f64 = 0.50;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0}")]
    Stats(#[from] StatsError),
    #[error("model {model:?} does not cover the prompt documents: {summary}")]
    IdMismatch { model: String, summary: String },
    #[error("no document ids shared between the human and {model:?} tables")]
    NoAlignedIds { model: String },
    #[error("top_k must be at least 1")]
    InvalidTopK,
    #[error("no models to compare")]
    NoModels,
    #[error("unknown format {0:?} (expected markdown, csv, or json)")]
    UnknownFormat(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Difference between two id sets, as counts plus a few examples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdDiff {
    pub only_left: Vec<String>,
    pub only_right: Vec<String>,
}

impl IdDiff {
    pub fn new<'a>(left: impl IntoIterator<Item = &'a str>, right: impl IntoIterator<Item = &'a str>) -> Self {
        let l: BTreeSet<&str> = left.into_iter().collect();
        let r: BTreeSet<&str> = right.into_iter().collect();
        IdDiff {
            only_left: l.difference(&r).map(|s| s.to_string()).collect(),
            only_right: r.difference(&l).map(|s| s.to_string()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.only_left.is_empty() && self.only_right.is_empty()
    }

    pub fn summary(&self, left: &str, right: &str) -> String {
        fn head(ids: &[String]) -> String {
            let shown: Vec<&str> = ids.iter().take(5).map(String::as_str).collect();
            let more = if ids.len() > 5 { format!(", ... {} more", ids.len() - 5) } else { String::new() };
            format!("[{}{more}]", shown.join(", "))
        }
        format!(
            "{} only in {left} {}, {} only in {right} {}",
            self.only_left.len(),
            head(&self.only_left),
            self.only_right.len(),
            head(&self.only_right)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    /// Documents where the feature was available on both sides.
    pub n: usize,
    /// `None` when fewer than two documents were usable.
    pub test: Option<TestResult>,
}

impl Cell {
    pub fn p(&self) -> Option<f64> {
        self.test.as_ref().map(|t| t.p)
    }

    pub fn significant(&self) -> bool {
        self.test.as_ref().is_some_and(|t| t.significant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceRow {
    pub feature_id: String,
    pub paper_name: String,
    /// One cell per model, in `SignificanceTable::models` order.
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceTable {
    pub family: Family,
    pub title: String,
    pub alpha: f64,
    pub comparisons: usize,
    pub alpha_used: f64,
    pub models: Vec<String>,
    pub rows: Vec<SignificanceRow>,
}

impl SignificanceTable {
    pub fn significant_cells(&self) -> usize {
        self.rows.iter().flat_map(|r| &r.cells).filter(|c| c.significant()).count()
    }

    pub fn row(&self, feature_id: &str) -> Option<&SignificanceRow> {
        self.rows.iter().find(|r| r.feature_id == feature_id)
    }
}

fn index(rows: &[FeatureVector]) -> HashMap<&str, &FeatureVector> {
    rows.iter().map(|r| (r.doc_id.as_str(), r)).collect()
}

/// Welch test per feature and model between prompt values and continuation values.
///
/// Each model table must hold exactly the prompt document ids. A document is
/// dropped from both samples of a feature when either side lacks that feature.
pub fn compare(
    prompts: &[FeatureVector],
    models: &IndexMap<String, Vec<FeatureVector>>,
    alpha: f64,
    comparisons: usize,
) -> Result<Vec<SignificanceTable>, ReportError> {
    let alpha_used = bonferroni(alpha, comparisons)?;
    if models.is_empty() {
        return Err(ReportError::NoModels);
    }
    let mut aligned: Vec<Vec<&FeatureVector>> = Vec::with_capacity(models.len());
    for (label, rows) in models {
        let diff = IdDiff::new(prompts.iter().map(|r| r.doc_id.as_str()), rows.iter().map(|r| r.doc_id.as_str()));
        if !diff.is_empty() {
            return Err(ReportError::IdMismatch {
                model: label.clone(),
                summary: diff.summary("prompts", label),
            });
        }
        let by_id = index(rows);
        aligned.push(prompts.iter().map(|p| by_id[p.doc_id.as_str()]).collect());
    }

    let rows: Vec<SignificanceRow> = registry()
        .par_iter()
        .map(|def| {
            let cells = aligned
                .iter()
                .map(|conts| {
                    let (a, b): (Vec<f64>, Vec<f64>) = prompts
                        .iter()
                        .zip(conts)
                        .filter_map(|(p, c)| Some((p.get(&def.id)?, c.get(&def.id)?)))
                        .unzip();
                    let n = a.len();
                    if n < 2 {
                        return Ok(Cell { n, test: None });
                    }
                    let test = welch_test(&def.id, &a, &b, alpha_used)?;
                    Ok(Cell { n, test: Some(test) })
                })
                .collect::<Result<Vec<_>, StatsError>>()?;
            Ok(SignificanceRow {
                feature_id: def.id.clone(),
                paper_name: def.paper_name.clone(),
                cells,
            })
        })
        .collect::<Result<_, StatsError>>()?;

    let mut by_id: HashMap<String, SignificanceRow> = rows.into_iter().map(|r| (r.feature_id.clone(), r)).collect();
    Ok(Family::ALL
        .iter()
        .map(|&family| SignificanceTable {
            family,
            title: family.title().to_string(),
            alpha,
            comparisons,
            alpha_used,
            models: models.keys().cloned().collect(),
            rows: family_features(family)
                .map(|d| by_id.remove(&d.id).expect("row computed for every feature"))
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub feature_id: String,
    pub paper_name: String,
    pub r: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationColumn {
    pub model: String,
    /// Documents present in both tables.
    pub aligned: usize,
    /// Top rows, descending by r.
    pub rows: Vec<CorrelationRow>,
    /// Features with no defined r (constant or fewer than two usable documents).
    pub undefined: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub top_k: usize,
    pub columns: Vec<CorrelationColumn>,
}

impl CorrelationTable {
    /// Largest r over all reported rows.
    pub fn max_r(&self) -> Option<f64> {
        self.columns
            .iter()
            .flat_map(|c| c.rows.iter().map(|r| r.r))
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
    }

    pub fn is_weak(&self) -> bool {
        self.max_r().is_some_and(|m| m < WEAK_CORRELATION)
    }
}

/// Pearson r per feature between human and model continuations over shared ids,
/// ranked by r descending (ties by feature id) and cut to `top_k`.
pub fn correlate(
    model: &str,
    human: &[FeatureVector],
    continuations: &[FeatureVector],
    top_k: usize,
) -> Result<CorrelationColumn, ReportError> {
    if top_k == 0 {
        return Err(ReportError::InvalidTopK);
    }
    let by_id = index(continuations);
    let pairs: Vec<(&FeatureVector, &FeatureVector)> = human
        .iter()
        .filter_map(|h| Some((h, *by_id.get(h.doc_id.as_str())?)))
        .collect();
    if pairs.is_empty() {
        return Err(ReportError::NoAlignedIds { model: model.to_string() });
    }
    let results: Vec<Result<CorrelationRow, String>> = registry()
        .par_iter()
        .map(|def| {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs
                .iter()
                .filter_map(|(h, m)| Some((h.get(&def.id)?, m.get(&def.id)?)))
                .unzip();
            match pearson(&x, &y) {
                Ok(r) => Ok(CorrelationRow {
                    feature_id: def.id.clone(),
                    paper_name: def.paper_name.clone(),
                    r,
                    n: x.len(),
                }),
                Err(_) => Err(def.id.clone()),
            }
        })
        .collect();
    let mut rows = Vec::new();
    let mut undefined = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(id) => undefined.push(id),
        }
    }
    rows.sort_by(|a, b| b.r.total_cmp(&a.r).then_with(|| a.feature_id.cmp(&b.feature_id)));
    rows.truncate(top_k);
    Ok(CorrelationColumn {
        model: model.to_string(),
        aligned: pairs.len(),
        rows,
        undefined,
    })
}

pub fn correlation_table(
    human: &[FeatureVector],
    models: &IndexMap<String, Vec<FeatureVector>>,
    top_k: usize,
) -> Result<CorrelationTable, ReportError> {
    if top_k == 0 {
        return Err(ReportError::InvalidTopK);
    }
    if models.is_empty() {
        return Err(ReportError::NoModels);
    }
    let columns = models
        .iter()
        .map(|(label, rows)| correlate(label, human, rows, top_k))
        .collect::<Result<_, _>>()?;
    Ok(CorrelationTable { top_k, columns })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Markdown => "md",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// p to at most 6 decimals, trailing zeros trimmed down to 4 decimals.
pub fn format_p(p: f64) -> String {
    let mut s = format!("{p:.6}");
    while s.ends_with('0') && s.len() - s.find('.').map_or(s.len(), |i| i + 1) > 4 {
        s.pop();
    }
    s
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_string(header: &[&str], records: Vec<Vec<String>>) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders significance tables. Markdown bolds the non-significant cells.
pub fn render_significance(tables: &[SignificanceTable], format: Format) -> Result<String, ReportError> {
    match format {
        Format::Json => json(tables),
        Format::Csv => {
            let header = [
                "family", "feature_id", "paper_name", "model", "n", "t", "df", "p", "significant", "alpha_used", "status",
            ];
            let mut records = Vec::new();
            for table in tables {
                for row in &table.rows {
                    for (model, cell) in table.models.iter().zip(&row.cells) {
                        let t = cell.test.as_ref();
                        records.push(vec![
                            table.family.to_string(),
                            row.feature_id.clone(),
                            row.paper_name.clone(),
                            model.clone(),
                            cell.n.to_string(),
                            opt(t.map(|t| t.t)),
                            opt(t.map(|t| t.df)),
                            opt(t.map(|t| t.p)),
                            cell.significant().to_string(),
                            table.alpha_used.to_string(),
                            if t.is_some() { "tested" } else { "untestable" }.to_string(),
                        ]);
                    }
                }
            }
            csv_string(&header, records)
        }
        Format::Markdown => {
            let mut out = String::new();
            for (i, table) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                render_significance_markdown(table, &mut out);
            }
            Ok(out)
        }
    }
}

fn render_significance_markdown(table: &SignificanceTable, out: &mut String) {
    let _ = writeln!(out, "### {}\n", table.title);
    let _ = writeln!(
        out,
        "Welch's t-test, prompt vs. continuation; alpha = {} ({} / {}). **Bold** p-values are not significant; n/a marks features with fewer than two usable documents.\n",
        format_p(table.alpha_used),
        table.alpha,
        table.comparisons
    );
    out.push_str("| Feature |");
    for m in &table.models {
        let _ = write!(out, " {m} |");
    }
    out.push_str("\n|---|");
    for _ in &table.models {
        out.push_str("---:|");
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(out, "| {} |", row.paper_name);
        for cell in &row.cells {
            match cell.p() {
                Some(p) if cell.significant() => {
                    let _ = write!(out, " {} |", format_p(p));
                }
                Some(p) => {
                    let _ = write!(out, " **{}** |", format_p(p));
                }
                None => out.push_str(" n/a |"),
            }
        }
        out.push('\n');
    }
}

pub fn render_correlation(table: &CorrelationTable, format: Format) -> Result<String, ReportError> {
    match format {
        Format::Json => json(table),
        Format::Csv => {
            let header = ["model", "rank", "feature_id", "paper_name", "r", "n"];
            let records = table
                .columns
                .iter()
                .flat_map(|c| {
                    c.rows.iter().enumerate().map(move |(i, r)| {
                        vec![
                            c.model.clone(),
                            (i + 1).to_string(),
                            r.feature_id.clone(),
                            r.paper_name.clone(),
                            r.r.to_string(),
                            r.n.to_string(),
                        ]
                    })
                })
                .collect();
            csv_string(&header, records)
        }
        Format::Markdown => {
            let mut out = String::from("### Top correlated features with human continuations\n\n");
            let _ = writeln!(out, "Pearson r over aligned documents, top {} per model.\n", table.top_k);
            out.push('|');
            for c in &table.columns {
                let _ = write!(out, " {} | r |", c.model);
            }
            out.push_str("\n|");
            for _ in &table.columns {
                out.push_str("---|---:|");
            }
            out.push('\n');
            let depth = table.columns.iter().map(|c| c.rows.len()).max().unwrap_or(0);
            for i in 0..depth {
                out.push('|');
                for c in &table.columns {
                    match c.rows.get(i) {
                        Some(r) => {
                            let _ = write!(out, " {} | {:.3} |", r.paper_name, r.r);
                        }
                        None => out.push_str(" | |"),
                    }
                }
                out.push('\n');
            }
            for c in &table.columns {
                if !c.undefined.is_empty() {
                    let _ = write!(
                        out,
                        "\n{}: {} features with undefined r (constant values) were excluded.\n",
                        c.model,
                        c.undefined.len()
                    );
                }
            }
            if table.is_weak() {
                let _ = write!(
                    out,
                    "\nNote: every reported r is below {WEAK_CORRELATION:.2}, so these features are at most weakly correlated.\n"
                );
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureValue;

    fn vector(id: &str, f: impl Fn(usize) -> Option<f64>) -> FeatureVector {
        let mut v = FeatureVector::empty(id);
        for (i, val) in v.values.values_mut().enumerate() {
            if let Some(x) = f(i) {
                *val = FeatureValue::available(x);
            }
        }
        v
    }

    fn corpus(n: usize, shift: f64) -> Vec<FeatureVector> {
        (0..n)
            .map(|d| vector(&format!("d{d}"), |i| Some(((d * 7 + i * 3) % 11) as f64 + shift * (i % 2) as f64)))
            .collect()
    }

    fn models(rows: Vec<FeatureVector>) -> IndexMap<String, Vec<FeatureVector>> {
        IndexMap::from([("m".to_string(), rows)])
    }

    #[test]
    fn identical_inputs_give_p_one() {
        let p = corpus(12, 0.0);
        let tables = compare(&p, &models(p.clone()), 0.05, 3).unwrap();
        assert_eq!(tables.len(), 9);
        assert_eq!(tables.iter().map(|t| t.rows.len()).sum::<usize>(), 160);
        for t in &tables {
            assert_eq!(t.significant_cells(), 0);
            assert!((t.alpha_used - 0.05 / 3.0).abs() < 1e-15);
            for r in &t.rows {
                assert_eq!(r.cells[0].p(), Some(1.0));
            }
        }
    }

    #[test]
    fn shifted_features_are_significant() {
        let p = corpus(30, 0.0);
        let tables = compare(&p, &models(corpus(30, 50.0)), 0.05, 3).unwrap();
        let shallow = &tables[0];
        assert!(shallow.rows[1].cells[0].significant());
        assert!(!shallow.rows[0].cells[0].significant());
    }

    #[test]
    fn pairwise_exclusion_and_untestable() {
        let p: Vec<_> = (0..4).map(|d| vector(&format!("d{d}"), |i| (i != 0 || d == 0).then_some(d as f64 + i as f64))).collect();
        let mut c = p.clone();
        c[1].values[1] = FeatureValue::UNAVAILABLE;
        let tables = compare(&p, &models(c), 0.05, 3).unwrap();
        let rows = &tables[0].rows;
        assert_eq!(rows[0].cells[0].n, 1);
        assert!(rows[0].cells[0].test.is_none());
        assert_eq!(rows[1].cells[0].n, 3);
        assert_eq!(rows[2].cells[0].n, 4);
    }

    #[test]
    fn id_mismatch_reports_diff() {
        let p = corpus(3, 0.0);
        let mut c = corpus(3, 0.0);
        c[2].doc_id = "zz".into();
        let err = compare(&p, &models(c), 0.05, 3).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("d2") && msg.contains("zz"), "{msg}");
    }

    #[test]
    fn bad_alpha_or_m() {
        let p = corpus(3, 0.0);
        assert!(compare(&p, &models(p.clone()), 0.05, 0).is_err());
        assert!(compare(&p, &models(p.clone()), 0.0, 3).is_err());
    }

    #[test]
    fn correlation_identity_and_ranking() {
        let h = corpus(8, 0.0);
        let col = correlate("m", &h, &h, 10).unwrap();
        assert_eq!(col.rows.len(), 10);
        assert!(col.rows.iter().all(|r| (r.r - 1.0).abs() < 1e-12));
        let ids: Vec<&str> = col.rows.iter().map(|r| r.feature_id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted, "ties broken by id");
    }

    #[test]
    fn correlation_negated_feature_ranks_last() {
        let h = corpus(8, 0.0);
        let mut m = h.clone();
        for v in &mut m {
            let x = v.values[5].value;
            v.values[5] = FeatureValue::available(10.0 - 2.0 * x);
        }
        let col = correlate("m", &h, &m, 160).unwrap();
        let last = col.rows.last().unwrap();
        assert_eq!(last.feature_id, registry()[5].id);
        assert!((last.r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_features_are_undefined() {
        let h: Vec<_> = (0..5).map(|d| vector(&format!("d{d}"), |i| Some(if i == 0 { 1.0 } else { (d + i) as f64 }))).collect();
        let col = correlate("m", &h, &h, 200).unwrap();
        assert_eq!(col.undefined, [registry()[0].id.clone()]);
        assert_eq!(col.rows.len(), 159);
    }

    #[test]
    fn correlation_errors() {
        let h = corpus(3, 0.0);
        assert!(matches!(correlate("m", &h, &h, 0), Err(ReportError::InvalidTopK)));
        let mut other = corpus(3, 0.0);
        for (i, v) in other.iter_mut().enumerate() {
            v.doc_id = format!("x{i}");
        }
        assert!(matches!(correlate("m", &h, &other, 5), Err(ReportError::NoAlignedIds { .. })));
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.3535), "0.3535");
        assert_eq!(format_p(1.0), "1.0000");
        assert_eq!(format_p(0.05 / 3.0), "0.016667");
        assert_eq!(format_p(0.00001), "0.00001");
        assert_eq!(format_p(0.0), "0.0000");
    }

    #[test]
    fn markdown_bolds_non_significant() {
        let table = SignificanceTable {
            family: Family::Formula,
            title: "t".into(),
            alpha: 0.05,
            comparisons: 3,
            alpha_used: 0.05 / 3.0,
            models: vec!["human".into()],
            rows: vec![SignificanceRow {
                feature_id: "new_ari".into(),
                paper_name: "NARI".into(),
                cells: vec![Cell {
                    n: 10,
                    test: Some(TestResult {
                        feature_id: "new_ari".into(),
                        t: 0.9,
                        df: 17.0,
                        p: 0.3535,
                        significant: false,
                        alpha_used: 0.05 / 3.0,
                        n: 10,
                        infinite_t: false,
                    }),
                }],
            }],
        };
        let md = render_significance(std::slice::from_ref(&table), Format::Markdown).unwrap();
        assert!(md.contains("| NARI | **0.3535** |"), "{md}");
        assert_eq!(md, render_significance(&[table], Format::Markdown).unwrap());
    }

    #[test]
    fn empty_tables_render_header_only() {
        let csv = render_significance(&[], Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), 1);
        let empty = CorrelationTable { top_k: 10, columns: vec![] };
        assert_eq!(render_correlation(&empty, Format::Csv).unwrap().lines().count(), 1);
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("html".parse::<Format>(), Err(ReportError::UnknownFormat(_))));
    }

    #[test]
    fn weak_note_threshold() {
        let mk = |r: f64| CorrelationTable {
            top_k: 1,
            columns: vec![CorrelationColumn {
                model: "m".into(),
                aligned: 3,
                rows: vec![CorrelationRow { feature_id: "a".into(), paper_name: "A".into(), r, n: 3 }],
                undefined: vec![],
            }],
        };
        assert!(render_correlation(&mk(0.188), Format::Markdown).unwrap().contains("weakly"));
        assert!(!render_correlation(&mk(0.9), Format::Markdown).unwrap().contains("weakly"));
    }
}
