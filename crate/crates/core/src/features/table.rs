//! Feature tables on disk.
//!
//! CSV layout: `doc_id`, one value column per feature in registry order, then
//! one `<id>:available` column per feature. Values use the shortest decimal
//! form that round-trips.

use std::collections::HashSet;
use std::io::{Read, Write};

use indexmap::IndexMap;

use super::{registry, FeatureError, FeatureValue, FeatureVector};

pub const AVAILABLE_SUFFIX: &str = ":available";

pub fn csv_header() -> Vec<String> {
    let mut header = vec!["doc_id".to_string()];
    header.extend(registry().iter().map(|d| d.id.clone()));
    header.extend(registry().iter().map(|d| format!("{}{AVAILABLE_SUFFIX}", d.id)));
    header
}

pub fn write_csv<W: Write>(rows: &[FeatureVector], writer: W) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(csv_header())?;
    for row in rows {
        check_keys(row)?;
        let mut record = Vec::with_capacity(1 + 2 * row.values.len());
        record.push(row.doc_id.clone());
        record.extend(row.values.values().map(|v| v.value.to_string()));
        record.extend(row.values.values().map(|v| v.available.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn check_keys(row: &FeatureVector) -> Result<(), FeatureError> {
    if row.values.len() != registry().len() || !row.values.keys().zip(registry()).all(|(k, d)| *k == d.id) {
        return Err(FeatureError::Table(format!(
            "vector for {:?} does not follow the registry ordering",
            row.doc_id
        )));
    }
    Ok(())
}

fn check_unique(rows: &[FeatureVector]) -> Result<(), FeatureError> {
    let mut seen = HashSet::new();
    for (i, r) in rows.iter().enumerate() {
        if !seen.insert(r.doc_id.as_str()) {
            return Err(FeatureError::Row {
                row: i + 1,
                message: format!("duplicate doc_id {:?}", r.doc_id),
            });
        }
    }
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != csv_header() {
        let expected = csv_header();
        let first_diff = header
            .iter()
            .zip(&expected)
            .position(|(a, b)| a != b)
            .unwrap_or(header.len().min(expected.len()));
        return Err(FeatureError::Table(format!(
            "header does not match the feature registry (first difference at column {}, {} columns found, {} expected)",
            first_diff + 1,
            header.len(),
            expected.len()
        )));
    }
    let n = registry().len();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let row_err = |message: String| FeatureError::Row { row: line, message };
        let mut values = IndexMap::with_capacity(n);
        for (k, def) in registry().iter().enumerate() {
            let raw = &record[1 + k];
            let value: f64 = raw
                .parse()
                .map_err(|_| row_err(format!("{}: bad value {raw:?}", def.id)))?;
            let flag = &record[1 + n + k];
            let available = match flag {
                "true" => true,
                "false" => false,
                other => return Err(row_err(format!("{}: bad availability flag {other:?}", def.id))),
            };
            if available && !value.is_finite() {
                return Err(row_err(format!("{}: non-finite value", def.id)));
            }
            values.insert(def.id.clone(), FeatureValue { value, available });
        }
        rows.push(FeatureVector {
            doc_id: record[0].to_string(),
            values,
            degenerate: Vec::new(),
            coverage: Default::default(),
        });
    }
    check_unique(&rows)?;
    Ok(rows)
}

pub fn write_json<W: Write>(rows: &[FeatureVector], mut writer: W) -> Result<(), FeatureError> {
    for row in rows {
        check_keys(row)?;
    }
    serde_json::to_writer_pretty(&mut writer, rows)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<Vec<FeatureVector>, FeatureError> {
    let rows: Vec<FeatureVector> = serde_json::from_reader(reader)?;
    for row in &rows {
        check_keys(row)?;
    }
    check_unique(&rows)?;
    Ok(rows)
}
