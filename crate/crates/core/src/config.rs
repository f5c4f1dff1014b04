//! Family configuration files.
//!
//! The format is line-oriented text. Blank lines and `#` comments are
//! ignored. Keys:
//!
//! ```text
//! n = 2
//! kind = explicit
//! member = 1/2 1/4 1/8 1/8
//! member = 9/16 3/16 3/16 1/16
//! ```
//!
//! `kind` is `explicit` or `bernoulli-nml`. Explicit families carry one
//! `member` line per distribution, each listing 2^n probabilities in
//! big-endian word order; entries are decimals or rationals `a/b`, parsed
//! exactly. `bernoulli-nml` takes no member lines. Parse errors cite the
//! line and field.
//!
//! The canonical rendering (lowest-terms rationals, fixed key order) is
//! hashed with SHA-256 to produce the 32-byte family fingerprint that binds
//! ciphertexts to their family config.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::family::{FamilySpec, Pmf};
use crate::ratio::{parse_ratio, ratio_to_string};

fn config_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses a family configuration from text.
pub fn parse_family(text: &str) -> Result<FamilySpec> {
    let mut n: Option<(u32, usize)> = None;
    let mut kind: Option<(String, usize)> = None;
    let mut member_rows: Vec<(Vec<crate::ratio::Ratio>, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(line_no, "line", "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "n" => {
                if n.is_some() {
                    return Err(config_err(line_no, "n", "duplicate `n`"));
                }
                let parsed: u32 = value
                    .parse()
                    .map_err(|_| config_err(line_no, "n", format!("invalid integer {value:?}")))?;
                if parsed == 0 {
                    return Err(config_err(line_no, "n", "n must be at least 1"));
                }
                if parsed > 24 {
                    return Err(config_err(
                        line_no,
                        "n",
                        "n larger than 24 is outside desk scale",
                    ));
                }
                n = Some((parsed, line_no));
            }
            "kind" => {
                if kind.is_some() {
                    return Err(config_err(line_no, "kind", "duplicate `kind`"));
                }
                match value {
                    "explicit" | "bernoulli-nml" => kind = Some((value.to_string(), line_no)),
                    other => {
                        return Err(config_err(
                            line_no,
                            "kind",
                            format!("unknown kind {other:?}; expected `explicit` or `bernoulli-nml`"),
                        ))
                    }
                }
            }
            "member" => {
                let (n_val, _) = n.ok_or_else(|| {
                    config_err(line_no, "member", "`n` must be declared before members")
                })?;
                let entries: Vec<&str> = value.split_whitespace().collect();
                let expected = 1usize << n_val;
                if entries.len() != expected {
                    return Err(config_err(
                        line_no,
                        "member",
                        format!("expected {expected} probabilities, got {}", entries.len()),
                    ));
                }
                let mut row = Vec::with_capacity(expected);
                for (col, entry) in entries.iter().enumerate() {
                    let p = parse_ratio(entry).map_err(|e| {
                        config_err(line_no, &format!("member entry {}", col + 1), e.to_string())
                    })?;
                    row.push(p);
                }
                member_rows.push((row, line_no));
            }
            other => {
                return Err(config_err(
                    line_no,
                    other,
                    "unknown key; expected `n`, `kind`, or `member`",
                ))
            }
        }
    }

    let (n, _) = n.ok_or_else(|| config_err(0, "n", "missing `n`"))?;
    let (kind, kind_line) = kind.ok_or_else(|| config_err(0, "kind", "missing `kind`"))?;
    match kind.as_str() {
        "explicit" => {
            if member_rows.is_empty() {
                return Err(config_err(
                    kind_line,
                    "member",
                    "explicit family needs at least one member line",
                ));
            }
            let mut members = Vec::with_capacity(member_rows.len());
            for (row, line_no) in member_rows {
                let pmf = Pmf::new(n, row)
                    .map_err(|e| config_err(line_no, "member", e.to_string()))?;
                members.push(pmf);
            }
            FamilySpec::explicit(members)
        }
        "bernoulli-nml" => {
            if let Some((_, line_no)) = member_rows.first() {
                return Err(config_err(
                    *line_no,
                    "member",
                    "bernoulli-nml families take no member lines",
                ));
            }
            FamilySpec::bernoulli_nml(n)
        }
        _ => unreachable!("kind validated above"),
    }
}

/// Renders a family in the same grammar `parse_family` accepts, with every
/// probability in lowest terms. Parsing the output reproduces the family.
pub fn to_config_string(family: &FamilySpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("n = {}\n", family.n()));
    out.push_str(&format!("kind = {}\n", family.kind().as_str()));
    for member in family.members() {
        let row: Vec<String> = member.probs().iter().map(ratio_to_string).collect();
        out.push_str(&format!("member = {}\n", row.join(" ")));
    }
    out
}

/// Canonical byte string hashed into the fingerprint. Distinct families (or
/// the same members in a different order) canonicalize differently.
fn canonical_bytes(family: &FamilySpec) -> Vec<u8> {
    let mut text = String::from("esc-family-v1\n");
    text.push_str(&to_config_string(family));
    text.into_bytes()
}

/// 32-byte SHA-256 fingerprint of the canonical family config.
pub fn fingerprint(family: &FamilySpec) -> [u8; 32] {
    let digest = Sha256::digest(canonical_bytes(family));
    digest.into()
}
