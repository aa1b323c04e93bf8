//! Score CSV: an optional `# method: <MSP|EBM|MAH>` line, the header
//! `index,score`, then one row per sample with 17 significant digits.

use std::fs;
use std::path::Path;

use super::{Method, ScoreSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn format_scores_csv<T: Scalar>(scores: &ScoreSet<T>) -> String {
    let mut out = String::new();
    if let Some(m) = scores.method() {
        out.push_str(&format!("# method: {m}\n"));
    }
    out.push_str("index,score\n");
    for (i, s) in scores.scores().iter().enumerate() {
        out.push_str(&format!("{i},{:.16e}\n", s.as_f64()));
    }
    out
}

pub fn parse_scores_csv<T: Scalar>(text: &str) -> Result<ScoreSet<T>> {
    let mut method = None;
    let mut saw_header = false;
    let mut scores = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(name) = comment.trim().strip_prefix("method:") {
                method = Some(name.trim().parse::<Method>()?);
            }
            continue;
        }
        if !saw_header {
            if line.replace(' ', "") != "index,score" {
                return Err(Error::ingest("malformed header: expected `index,score`"));
            }
            saw_header = true;
            continue;
        }
        let row = scores.len();
        let (index, value) = line
            .split_once(',')
            .ok_or_else(|| Error::at_row(row, "expected `index,score`"))?;
        if index.trim().parse::<usize>().ok() != Some(row) {
            return Err(Error::at_row(
                row,
                format!("index `{}` out of sequence", index.trim()),
            ));
        }
        let v: T = value
            .trim()
            .parse()
            .map_err(|_| Error::at_row(row, format!("invalid score `{value}`")))?;
        if !v.is_finite() {
            return Err(Error::at_row(row, "non-finite score"));
        }
        scores.push(v);
    }
    if !saw_header {
        return Err(Error::ingest("malformed header: expected `index,score`"));
    }
    ScoreSet::new(method, scores)
}

pub fn write_scores_csv<T: Scalar>(scores: &ScoreSet<T>, path: &Path) -> Result<()> {
    fs::write(path, format_scores_csv(scores)).map_err(|e| Error::io(path, e))
}

pub fn read_scores_csv<T: Scalar>(path: &Path) -> Result<ScoreSet<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores_csv(&text)
}
