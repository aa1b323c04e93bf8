//! Feature-table file formats.
//!
//! OODF binary layout, all integers little-endian:
//!
//! | offset | size | field                                    |
//! |--------|------|------------------------------------------|
//! | 0      | 4    | magic `OODF`                             |
//! | 4      | 4    | `u32` version = 1                        |
//! | 8      | 8    | `u64` n                                  |
//! | 16     | 8    | `u64` d                                  |
//! | 24     | 8    | `u64` c (0 when logits are absent)       |
//! | 32     | 1    | dtype code (0 = binary32, 1 = binary64)  |
//! | 33     | 7    | reserved, zero                           |
//! | 40     | ...  | features (n·d), logits (n·c), labels     |
//!
//! Labels are `n` little-endian `i32`, `-1` marking unlabeled rows.
//!
//! The CSV alternative has a header `label,f0,..,f{d-1},l0,..,l{c-1}` and
//! one sample per line; an empty label or `-1` means unlabeled.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::data::table::{FeatureTable, Label};
use crate::error::{Error, Result};
use crate::scalar::{Dtype, Scalar};

pub const OODF_MAGIC: &[u8; 4] = b"OODF";
pub const OODF_VERSION: u32 = 1;
pub const OODF_HEADER_LEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Binary,
    Csv,
}

impl TableFormat {
    /// `.csv` files are CSV, everything else is OODF.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => TableFormat::Csv,
            _ => TableFormat::Binary,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TableFormat::Binary => "OODF",
            TableFormat::Csv => "CSV",
        }
    }
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "OODF" | "BINARY" | "BINARY_DUMP" => Ok(TableFormat::Binary),
            "CSV" => Ok(TableFormat::Csv),
            other => Err(Error::Config(format!("unknown table format `{other}`"))),
        }
    }
}

pub fn read_feature_table<T: Scalar>(path: &Path, format: TableFormat) -> Result<FeatureTable<T>> {
    match format {
        TableFormat::Binary => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_oodf(&bytes)
        }
        TableFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_csv(&text)
        }
    }
}

/// Writes the table as OODF in its native dtype.
pub fn write_feature_table<T: Scalar>(table: &FeatureTable<T>, path: &Path) -> Result<()> {
    write_feature_table_as(table, path, T::DTYPE)
}

pub fn write_feature_table_as<T: Scalar>(
    table: &FeatureTable<T>,
    path: &Path,
    dtype: Dtype,
) -> Result<()> {
    fs::write(path, encode_oodf(table, dtype)).map_err(|e| Error::io(path, e))
}

pub fn write_feature_table_csv<T: Scalar>(table: &FeatureTable<T>, path: &Path) -> Result<()> {
    fs::write(path, format_csv(table)).map_err(|e| Error::io(path, e))
}

pub fn encode_oodf<T: Scalar>(table: &FeatureTable<T>, dtype: Dtype) -> Vec<u8> {
    let (n, d, c) = (table.n(), table.dim(), table.logit_classes());
    let values = n * (d + c);
    let mut out = Vec::with_capacity(OODF_HEADER_LEN + values * dtype.width() + n * 4);
    out.extend_from_slice(OODF_MAGIC);
    out.extend_from_slice(&OODF_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&(c as u64).to_le_bytes());
    out.push(dtype.code());
    out.extend_from_slice(&[0u8; 7]);
    for v in table.features().iter().chain(table.logits()) {
        match dtype {
            Dtype::F32 => out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes()),
            Dtype::F64 => out.extend_from_slice(&v.as_f64().to_le_bytes()),
        }
    }
    for label in table.labels() {
        out.extend_from_slice(&label.to_i32().to_le_bytes());
    }
    out
}

fn le_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

pub fn decode_oodf<T: Scalar>(bytes: &[u8]) -> Result<FeatureTable<T>> {
    if bytes.len() < OODF_HEADER_LEN {
        return Err(Error::ingest(format!(
            "malformed header: {} bytes, need {OODF_HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != OODF_MAGIC {
        return Err(Error::ingest(
            "malformed header: bad magic, expected `OODF`",
        ));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != OODF_VERSION {
        return Err(Error::ingest(format!(
            "malformed header: unsupported version {version}"
        )));
    }
    let (n, d, c) = (le_u64(bytes, 8), le_u64(bytes, 16), le_u64(bytes, 24));
    let dtype = Dtype::from_code(bytes[32]).ok_or_else(|| {
        Error::ingest(format!(
            "malformed header: unknown dtype code {}",
            bytes[32]
        ))
    })?;
    if bytes[33..40].iter().any(|&b| b != 0) {
        return Err(Error::ingest(
            "malformed header: reserved bytes must be zero",
        ));
    }

    let expected = n
        .checked_mul(
            d.checked_add(c)
                .ok_or_else(|| Error::ingest("malformed header: size overflow"))?,
        )
        .and_then(|v| v.checked_mul(dtype.width() as u64))
        .and_then(|v| v.checked_add(n.checked_mul(4)?))
        .and_then(|v| v.checked_add(OODF_HEADER_LEN as u64))
        .ok_or_else(|| Error::ingest("malformed header: size overflow"))?;
    if expected != bytes.len() as u64 {
        return Err(Error::DimensionMismatch(format!(
            "header declares n={n}, d={d}, c={c} ({expected} bytes) but file has {} bytes",
            bytes.len()
        )));
    }
    let (n, d, c) = (n as usize, d as usize, c as usize);

    let w = dtype.width();
    let read_values = |start: usize, count: usize| -> Vec<T> {
        bytes[start..start + count * w]
            .chunks_exact(w)
            .map(|chunk| match dtype {
                Dtype::F32 => {
                    T::from_f64_lossy(f32::from_le_bytes(chunk.try_into().unwrap()) as f64)
                }
                Dtype::F64 => T::from_f64_lossy(f64::from_le_bytes(chunk.try_into().unwrap())),
            })
            .collect()
    };
    let features = read_values(OODF_HEADER_LEN, n * d);
    let logits_at = OODF_HEADER_LEN + n * d * w;
    let logits = read_values(logits_at, n * c);
    let labels_at = logits_at + n * c * w;
    let labels = bytes[labels_at..]
        .chunks_exact(4)
        .enumerate()
        .map(|(row, chunk)| {
            let raw = i32::from_le_bytes(chunk.try_into().unwrap());
            Label::from_i32(raw).ok_or_else(|| Error::at_row(row, format!("invalid label {raw}")))
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureTable::new(d, c, features, logits, labels)
}

pub fn parse_csv<T: Scalar>(text: &str) -> Result<FeatureTable<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::ingest("malformed header: empty CSV"))?;
    let (d, c) = parse_csv_header(header)?;
    let width = 1 + d + c;

    let mut features = Vec::new();
    let mut logits = Vec::new();
    let mut labels = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::at_row(
                row,
                format!("expected {width} columns, found {}", fields.len()),
            ));
        }
        let label = match fields[0] {
            "" | "-1" => Label::UNLABELED,
            s => {
                let k: usize = s
                    .parse()
                    .map_err(|_| Error::at_row(row, format!("invalid label `{s}`")))?;
                if c > 0 && k >= c {
                    return Err(Error::at_row(
                        row,
                        format!("label out of range: {k} >= {c}"),
                    ));
                }
                Label::class(k)
            }
        };
        labels.push(label);
        for (j, field) in fields[1..].iter().enumerate() {
            let v: T = field
                .parse()
                .map_err(|_| Error::at_row(row, format!("invalid number `{field}`")))?;
            if !v.is_finite() {
                return Err(Error::at_row(row, "non-finite value"));
            }
            if j < d {
                features.push(v);
            } else {
                logits.push(v);
            }
        }
    }
    FeatureTable::new(d, c, features, logits, labels)
}

fn parse_csv_header(header: &str) -> Result<(usize, usize)> {
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"label") {
        return Err(Error::ingest(
            "malformed header: first column must be `label`",
        ));
    }
    let d = cols[1..].iter().take_while(|c| c.starts_with('f')).count();
    let c = cols.len() - 1 - d;
    for (j, name) in cols[1..1 + d].iter().enumerate() {
        if *name != format!("f{j}") {
            return Err(Error::ingest(format!(
                "malformed header: expected `f{j}`, found `{name}`"
            )));
        }
    }
    for (j, name) in cols[1 + d..].iter().enumerate() {
        if *name != format!("l{j}") {
            return Err(Error::ingest(format!(
                "malformed header: expected `l{j}`, found `{name}`"
            )));
        }
    }
    if d == 0 {
        return Err(Error::ingest("malformed header: no feature columns"));
    }
    Ok((d, c))
}

pub fn format_csv<T: Scalar>(table: &FeatureTable<T>) -> String {
    let mut out = String::from("label");
    for j in 0..table.dim() {
        out.push_str(&format!(",f{j}"));
    }
    for j in 0..table.logit_classes() {
        out.push_str(&format!(",l{j}"));
    }
    out.push('\n');
    for i in 0..table.n() {
        match table.labels()[i].index() {
            Some(k) => out.push_str(&k.to_string()),
            None => out.push_str("-1"),
        }
        for v in table.feature_row(i).iter().chain(table.logit_row(i)) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}
