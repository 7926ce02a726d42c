//! Closed-form delivery rates and sub-file counts, in exact arithmetic.
//!
//! Every rate is normalized by the file size. For a non-integer caching
//! level `t`, the rate is the memory-sharing combination
//! `γ R(⌊t⌋) + (1 - γ) R(⌈t⌉)` with `γ = ⌈t⌉ - t`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::binomial;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    SingleAccess,
    MultiAccess,
    Mobility,
    Clustering,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::SingleAccess => "single_access",
            SchemeKind::MultiAccess => "multi_access",
            SchemeKind::Mobility => "mobility",
            SchemeKind::Clustering => "clustering",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "single_access" | "single" | "mn" => Ok(SchemeKind::SingleAccess),
            "multi_access" | "multi" => Ok(SchemeKind::MultiAccess),
            "mobility" => Ok(SchemeKind::Mobility),
            "clustering" | "cluster" => Ok(SchemeKind::Clustering),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

fn ratio(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn int(a: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(a))
}

fn to_usize(r: &BigRational) -> usize {
    r.to_integer().to_usize().expect("level fits in usize")
}

fn check_memory(memory: &BigRational, files: usize) -> Result<()> {
    if files == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if memory.is_negative() || *memory > int(files) {
        return Err(Error::InvalidParameter(format!(
            "M = {memory} must lie in [0, N = {files}]"
        )));
    }
    Ok(())
}

/// `(K̂ - t)/(t + 1)` at integer `t`, zero once `t ≥ K̂`.
fn mn_at(khat: usize, t: usize) -> BigRational {
    if t >= khat {
        BigRational::zero()
    } else {
        ratio(khat - t, t + 1)
    }
}

/// Rate of coded delivery among `khat` caches at level `t`, memory-shared
/// when `t` is fractional.
pub fn mn_interpolated(khat: usize, t: &BigRational) -> BigRational {
    if *t >= int(khat) {
        return BigRational::zero();
    }
    let lo = t.floor();
    let hi = t.ceil();
    if lo == hi {
        return mn_at(khat, to_usize(t));
    }
    let gamma = &hi - t;
    &gamma * mn_at(khat, to_usize(&lo)) + (BigRational::one() - gamma) * mn_at(khat, to_usize(&hi))
}

/// `t = M K / N`.
pub fn single_access_level(k: usize, memory: &BigRational, files: usize) -> BigRational {
    memory * ratio(k, files)
}

/// `t = K M T / (N L)`.
pub fn mobility_level(
    k: usize,
    memory: &BigRational,
    files: usize,
    path_length: usize,
    colors: usize,
) -> BigRational {
    memory * ratio(k * path_length, files * colors)
}

pub fn rate_single_access(k: usize, memory: &BigRational, files: usize) -> Result<BigRational> {
    check_memory(memory, files)?;
    Ok(mn_interpolated(k, &single_access_level(k, memory, files)))
}

/// `(K - L t)/(t + 1)` with `t = M K / N`.
pub fn rate_multi_access(k: usize, memory: &BigRational, files: usize, groups: usize) -> Result<BigRational> {
    check_memory(memory, files)?;
    check_divides(groups, k, "L")?;
    let t = single_access_level(k, memory, files);
    Ok(int(groups) * mn_interpolated(k / groups, &t))
}

/// `(K - t L)/(1 + t)` with `t = K M T / (N L)`; memory-shared for
/// fractional `t` and zero once `t ≥ K/L`.
pub fn rate_mobility(
    k: usize,
    memory: &BigRational,
    files: usize,
    path_length: usize,
    colors: usize,
) -> Result<BigRational> {
    check_memory(memory, files)?;
    check_divides(colors, k, "L")?;
    if path_length == 0 {
        return Err(Error::InvalidParameter("T must be positive".into()));
    }
    let t = mobility_level(k, memory, files, path_length, colors);
    Ok(int(colors) * mn_interpolated(k / colors, &t))
}

/// Mobility rate for color groups of arbitrary sizes: each group `g` runs
/// coded delivery at its own level `|G_g| M T / N`.
pub fn rate_mobility_groups(
    group_sizes: &[usize],
    memory: &BigRational,
    files: usize,
    path_length: usize,
) -> Result<BigRational> {
    check_memory(memory, files)?;
    Ok(group_sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| mn_interpolated(s, &(memory * ratio(s * path_length, files))))
        .fold(BigRational::zero(), |a, b| a + b))
}

/// `c` independent clusters of `K/c` SBSs: returns the summed rate and the
/// per-cluster sub-file count (with the `T`-fragment factor).
pub fn rate_clustering(
    k: usize,
    memory: &BigRational,
    files: usize,
    clusters: usize,
    path_length: usize,
) -> Result<(BigRational, SubfileCount)> {
    check_divides(clusters, k, "c")?;
    let rate = int(clusters) * rate_single_access(k / clusters, memory, files)?;
    let t = single_access_level(k / clusters, memory, files);
    Ok((rate, count_at(k / clusters, &t, path_length)))
}

fn check_divides(d: usize, k: usize, name: &str) -> Result<()> {
    if d == 0 || k == 0 || !k.is_multiple_of(d) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {d} must divide K = {k}"
        )));
    }
    Ok(())
}

/// Sub-file count; a fractional level reports the two memory-sharing
/// endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubfileCount {
    Exact(BigUint),
    MemorySharing { lower: BigUint, upper: BigUint },
}

impl SubfileCount {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            SubfileCount::Exact(n) => Some(n),
            SubfileCount::MemorySharing { .. } => None,
        }
    }
}

impl fmt::Display for SubfileCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubfileCount::Exact(n) => write!(f, "{n}"),
            SubfileCount::MemorySharing { lower, upper } => write!(f, "{lower}|{upper}"),
        }
    }
}

/// `factor * C(n, t)`, or the endpoint pair when `t` is fractional.
fn count_at(n: usize, t: &BigRational, factor: usize) -> SubfileCount {
    let t = if *t > int(n) { int(n) } else { t.clone() };
    let at = |x: &BigRational| BigUint::from(factor) * binomial(n as u64, to_usize(x) as u64);
    if t.is_integer() {
        SubfileCount::Exact(at(&t))
    } else {
        SubfileCount::MemorySharing {
            lower: at(&t.floor()),
            upper: at(&t.ceil()),
        }
    }
}

/// Number of sub-files per file.
///
/// - single access: `T C(K, t)` (each of the `T` fragments split alike;
///   pass `T = 1` for the plain scheme);
/// - multi-access: `L C(K/L, t)`;
/// - mobility: `T C(K/L, t)` with `t = K M T / (N L)`;
/// - clustering: `T C(K/c, t)` with `c = L`.
pub fn subfile_count(
    scheme: SchemeKind,
    k: usize,
    memory: &BigRational,
    files: usize,
    path_length: usize,
    groups: usize,
) -> Result<SubfileCount> {
    check_memory(memory, files)?;
    match scheme {
        SchemeKind::SingleAccess => Ok(count_at(k, &single_access_level(k, memory, files), path_length)),
        SchemeKind::MultiAccess => {
            check_divides(groups, k, "L")?;
            Ok(count_at(
                k / groups,
                &single_access_level(k, memory, files),
                groups,
            ))
        }
        SchemeKind::Mobility => {
            check_divides(groups, k, "L")?;
            let t = mobility_level(k, memory, files, path_length, groups);
            Ok(count_at(k / groups, &t, path_length))
        }
        SchemeKind::Clustering => Ok(rate_clustering(k, memory, files, groups, path_length)?.1),
    }
}

/// Inputs of a rate evaluation. `groups` is `L` for multi-access and
/// mobility, and the cluster count for clustering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateParams {
    pub scheme: SchemeKind,
    pub k: usize,
    pub memory: BigRational,
    pub files: usize,
    pub path_length: usize,
    pub groups: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateReport {
    pub params: RateParams,
    pub level: BigRational,
    pub rate: BigRational,
    pub subfiles: SubfileCount,
}

pub fn evaluate(p: &RateParams) -> Result<RateReport> {
    let (level, rate) = match p.scheme {
        SchemeKind::SingleAccess => (
            single_access_level(p.k, &p.memory, p.files),
            rate_single_access(p.k, &p.memory, p.files)?,
        ),
        SchemeKind::MultiAccess => (
            single_access_level(p.k, &p.memory, p.files),
            rate_multi_access(p.k, &p.memory, p.files, p.groups)?,
        ),
        SchemeKind::Mobility => (
            mobility_level(p.k, &p.memory, p.files, p.path_length, p.groups),
            rate_mobility(p.k, &p.memory, p.files, p.path_length, p.groups)?,
        ),
        SchemeKind::Clustering => {
            check_divides(p.groups, p.k, "c")?;
            (
                single_access_level(p.k / p.groups, &p.memory, p.files),
                rate_clustering(p.k, &p.memory, p.files, p.groups, p.path_length)?.0,
            )
        }
    };
    let subfiles = subfile_count(p.scheme, p.k, &p.memory, p.files, p.path_length, p.groups)?;
    Ok(RateReport {
        params: p.clone(),
        level,
        rate,
        subfiles,
    })
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub scheme: String,
    pub k: usize,
    pub memory_ratio: BigRational,
    pub subfiles: Option<SubfileCount>,
    pub rate: Option<BigRational>,
    /// Published figures used verbatim instead of a computation.
    pub reference: Option<(f64, f64)>,
}

impl TableRow {
    fn computed(scheme: SchemeKind, k: usize, num: usize, den: usize, t: usize, g: usize) -> Result<Self> {
        // any N works; the table is stated per memory ratio
        let files = den * 60;
        let memory = ratio(num * files, den);
        let report = evaluate(&RateParams {
            scheme,
            k,
            memory,
            files,
            path_length: t,
            groups: g,
        })?;
        Ok(TableRow {
            scheme: scheme.name().to_string(),
            k,
            memory_ratio: ratio(num, den),
            subfiles: Some(report.subfiles),
            rate: Some(report.rate),
            reference: None,
        })
    }
}

/// Sub-files and rates for `K ∈ {24, 48}` and `M/N ∈ {1/8, 1/4}` with
/// `T = 2` and `L = 3`; single access uses the `T`-fragment split and
/// clustering uses two clusters.
pub fn table1() -> Result<Vec<TableRow>> {
    use SchemeKind::*;
    let mut rows = Vec::new();
    for (k, den) in [(24, 8), (24, 4), (48, 8), (48, 4)] {
        rows.push(TableRow::computed(SingleAccess, k, 1, den, 2, 1)?);
        if k == 48 {
            rows.push(TableRow::computed(Clustering, k, 1, den, 2, 2)?);
        }
        rows.push(TableRow::computed(Mobility, k, 1, den, 2, 3)?);
    }
    Ok(rows)
}

/// `K = 60`, `M/N = 1/5`, `T = 2`, `L = 3`, with the block-code row taken
/// from published figures.
pub fn table2() -> Result<Vec<TableRow>> {
    use SchemeKind::*;
    Ok(vec![
        TableRow::computed(SingleAccess, 60, 1, 5, 2, 1)?,
        TableRow::computed(Mobility, 60, 1, 5, 2, 3)?,
        TableRow {
            scheme: "block_code_12_8".to_string(),
            k: 60,
            memory_ratio: ratio(1, 5),
            subfiles: None,
            rate: None,
            reference: Some((2.34e6, 5.33)),
        },
        TableRow::computed(Clustering, 60, 1, 5, 2, 2)?,
    ])
}

/// Decimal rendering with `sig` significant digits.
pub fn format_sig(r: &BigRational, sig: usize) -> String {
    let x = r.to_f64().unwrap_or(f64::NAN);
    format_f64_sig(x, sig)
}

pub fn format_f64_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Scientific rendering of a large count, e.g. `2.45e7`.
pub fn format_count(n: &BigUint, sig: usize) -> String {
    let x = n.to_f64().unwrap_or(f64::INFINITY);
    if x < 1e5 {
        return n.to_string();
    }
    format!("{:.*e}", sig.saturating_sub(1), x)
}
