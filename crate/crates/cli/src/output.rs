use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use mobicache::rates::{format_count, format_sig, SubfileCount};

use crate::error::CliError;

/// Everything one command produced. Nothing is written until the caller
/// decides where the pieces go.
#[derive(Debug, Default)]
pub struct Report {
    pub json: Value,
    pub text: String,
    pub csv: Option<String>,
    /// Set when a check failed; the report is still emitted.
    pub failure: Option<String>,
}

/// Exact fraction and 3-significant-digit decimal.
pub fn rational_json(r: &BigRational) -> Value {
    json!({ "exact": r.to_string(), "decimal": format_sig(r, 3) })
}

pub fn rational_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_string()
    } else {
        format!("{r} ({})", format_sig(r, 3))
    }
}

pub fn subfiles_json(c: &SubfileCount) -> Value {
    match c {
        SubfileCount::Exact(n) => json!({ "exact": n.to_string(), "approx": format_count(n, 3) }),
        SubfileCount::MemorySharing { lower, upper } => json!({
            "memory_sharing": true,
            "lower": lower.to_string(),
            "upper": upper.to_string(),
        }),
    }
}

pub fn subfiles_text(c: &SubfileCount) -> String {
    match c {
        SubfileCount::Exact(n) => format_count(n, 3),
        SubfileCount::MemorySharing { lower, upper } => {
            format!(
                "{} | {} (memory sharing)",
                format_count(lower, 3),
                format_count(upper, 3)
            )
        }
    }
}

/// `p/q`, an integer, or a terminating decimal such as `0.125`.
pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let bad = || CliError::Validation(format!("`{s}` is not a rational number"));
    let s = s.trim();
    let r = if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        BigRational::new(p, q)
    } else if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
        BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32))
    } else {
        BigRational::from_integer(s.parse().map_err(|_| bad())?)
    };
    if r.is_negative() {
        return Err(bad());
    }
    Ok(r)
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Record of one invocation. Replaying `args` reproduces every hashed
/// output byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: BTreeMap<String, String>,
}
