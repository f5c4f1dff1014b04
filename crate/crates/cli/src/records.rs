//! Plaintext record framing: fixed-width n-bit records.
//!
//! Text encoding: one record per line, n characters of `0`/`1`.
//! Binary encoding: each record packed MSB-first into ceil(n/8) bytes, so
//! every record starts on a byte boundary; the file length must be an exact
//! multiple of the record size.

use esc_core::{BitWord, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Text,
    Binary,
}

pub fn parse_records(data: &[u8], n: usize, format: RecordFormat) -> Result<Vec<BitWord>> {
    match format {
        RecordFormat::Text => {
            let text = std::str::from_utf8(data).map_err(|_| {
                Error::InvalidParameter("text record file is not valid UTF-8".into())
            })?;
            let mut records = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let word = BitWord::parse(line).map_err(|e| {
                    Error::InvalidParameter(format!("record on line {}: {e}", idx + 1))
                })?;
                if word.len() != n {
                    return Err(Error::InvalidParameter(format!(
                        "record on line {} has {} bits, expected {n}",
                        idx + 1,
                        word.len()
                    )));
                }
                records.push(word);
            }
            Ok(records)
        }
        RecordFormat::Binary => {
            let record_bytes = n.div_ceil(8);
            if !data.len().is_multiple_of(record_bytes) {
                return Err(Error::InvalidParameter(format!(
                    "binary record file length {} is not a multiple of the {record_bytes}-byte record size",
                    data.len()
                )));
            }
            data.chunks(record_bytes)
                .map(|chunk| BitWord::from_bytes(chunk, n))
                .collect()
        }
    }
}

pub fn render_records(records: &[BitWord], format: RecordFormat) -> Vec<u8> {
    match format {
        RecordFormat::Text => {
            let mut out = String::new();
            for record in records {
                out.push_str(&record.to_string());
                out.push('\n');
            }
            out.into_bytes()
        }
        RecordFormat::Binary => {
            let mut out = Vec::new();
            for record in records {
                out.extend_from_slice(&record.to_bytes());
            }
            out
        }
    }
}
