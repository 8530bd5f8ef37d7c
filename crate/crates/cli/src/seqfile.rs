//! `offset,value` sequence files.
//!
//! ```text
//! # base=0.5
//! offset,value
//! 0,1.0000000000000000e0
//! 1,1.5000000000000000e0
//! ```
//!
//! Lines starting with `#` are comments; `# base=<real>` records the grid base.
//! Offsets must be contiguous. Values are written with 17 significant digits.

use std::fmt::Write as _;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub base: Option<f64>,
    /// Offset of the first row.
    pub start: usize,
    pub values: Vec<f64>,
}

pub fn parse(text: &str, origin: &str) -> Result<Sequence, CliError> {
    let bad = |msg: String| CliError::Input(format!("{origin}: {msg}"));

    let mut base = None;
    for line in text.lines() {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some(v) = comment.trim().strip_prefix("base=") {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad base `{}`", v.trim())))?;
            if !v.is_finite() {
                return Err(bad(format!("base must be finite, got {v}")));
            }
            base = Some(v);
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.len() != 2 || &header[0] != "offset" || &header[1] != "value" {
        return Err(bad(format!(
            "expected header `offset,value`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut start = None;
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 2 {
            return Err(bad(format!(
                "row {}: expected 2 fields, found {}",
                row + 1,
                record.len()
            )));
        }
        let offset: usize = record[0]
            .parse()
            .map_err(|_| bad(format!("row {}: bad offset `{}`", row + 1, &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| bad(format!("row {}: bad value `{}`", row + 1, &record[1])))?;
        if !value.is_finite() {
            return Err(bad(format!(
                "row {}: value must be finite, got {value}",
                row + 1
            )));
        }
        let first = *start.get_or_insert(offset);
        if offset != first + values.len() {
            return Err(bad(format!(
                "row {}: offsets must be contiguous, expected {} found {offset}",
                row + 1,
                first + values.len()
            )));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(Sequence {
        base,
        start: start.unwrap_or(0),
        values,
    })
}

pub fn render(seq: &Sequence) -> Result<String, CliError> {
    let mut out = String::new();
    if let Some(base) = seq.base {
        writeln!(out, "# base={base}").unwrap();
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Input(e.to_string());
    writer.write_record(["offset", "value"]).map_err(io)?;
    for (i, v) in seq.values.iter().enumerate() {
        writer
            .write_record([(seq.start + i).to_string(), format!("{v:.16e}")])
            .map_err(io)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Input(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}
