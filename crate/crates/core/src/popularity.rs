//! Non-uniform demand: Zipf popularity, the file-removal cache plan that
//! caches only the `N_c` most popular files, and the expected delivery rate.
//!
//! Requests for uncached files are served by unicast at unit cost. The
//! expected rate is bounded by `R(M, N_c, K) + K (1 - p_c)` where `p_c` is
//! the probability mass of the cached files; the planner minimizes this
//! bound with a linear scan over `N_c`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::binomial_u128;
use crate::par::map_indexed;
use crate::rates::{mn_interpolated, mobility_level};
use crate::stats::Estimate;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSource {
    Zipf { alpha: f64 },
    Explicit,
}

/// Request probabilities `p_1 ≥ p_2 ≥ … ≥ p_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityProfile {
    probabilities: Vec<f64>,
    source: ProfileSource,
}

pub fn zipf_profile(files: usize, alpha: f64) -> Result<PopularityProfile> {
    if files == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must be finite and >= 0"
        )));
    }
    let weights: Vec<f64> = (1..=files).map(|n| (n as f64).powf(-alpha)).collect();
    let total: f64 = weights.iter().sum();
    Ok(PopularityProfile {
        probabilities: weights.into_iter().map(|w| w / total).collect(),
        source: ProfileSource::Zipf { alpha },
    })
}

impl PopularityProfile {
    /// Validates a non-increasing probability vector summing to one.
    pub fn explicit(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidParameter("empty profile".into()));
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter(
                "probabilities must be finite and >= 0".into(),
            ));
        }
        if probabilities.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "probabilities must be non-increasing".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(PopularityProfile {
            probabilities,
            source: ProfileSource::Explicit,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn source(&self) -> ProfileSource {
        self.source
    }

    pub fn files(&self) -> usize {
        self.probabilities.len()
    }

    /// `p_c`: mass of the `n_cached` most popular files.
    pub fn cached_mass(&self, n_cached: usize) -> f64 {
        self.probabilities[..n_cached.min(self.files())].iter().sum()
    }

    /// `1 - p_c`, summed over the tail so it is exactly zero at `N_c = N`.
    pub fn uncached_mass(&self, n_cached: usize) -> f64 {
        self.probabilities[n_cached.min(self.files())..].iter().sum()
    }
}

/// Network and cache dimensions shared by the planning functions. `memory`
/// is `M` in files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParams {
    pub k: usize,
    pub memory: BigRational,
    pub path_length: usize,
    pub colors: usize,
}

impl SystemParams {
    fn check(&self) -> Result<()> {
        if self.colors == 0 || !self.k.is_multiple_of(self.colors) {
            return Err(Error::InvalidParameter(format!(
                "L = {} must divide K = {}",
                self.colors, self.k
            )));
        }
        if self.path_length == 0 || self.path_length > self.colors {
            return Err(Error::InvalidParameter(format!(
                "T = {} must be in 1..=L",
                self.path_length
            )));
        }
        if self.memory < BigRational::zero() {
            return Err(Error::InvalidParameter("M must be non-negative".into()));
        }
        Ok(())
    }

    fn group_size(&self) -> usize {
        self.k / self.colors
    }

    /// Caching level when the whole cache is spent on `n_cached` files,
    /// capped at the group size.
    pub fn level(&self, n_cached: usize) -> BigRational {
        let t = mobility_level(self.k, &self.memory, n_cached, self.path_length, self.colors);
        let cap = BigRational::from_integer(BigInt::from(self.group_size()));
        if t > cap {
            cap
        } else {
            t
        }
    }

    /// Mobility-scheme rate for a library of `n_cached` files.
    pub fn cached_rate(&self, n_cached: usize) -> BigRational {
        BigRational::from_integer(BigInt::from(self.colors))
            * mn_interpolated(self.group_size(), &self.level(n_cached))
    }
}

/// Result of planning for one `N_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CachePlan {
    pub n_cached: usize,
    pub level: BigRational,
    /// `R(M, N_c, K)`, exact.
    pub cached_rate: BigRational,
    pub p_cached: f64,
    /// `R(M, N_c, K) + K (1 - p_c)`.
    pub bound: f64,
}

pub fn expected_rate_bound(
    profile: &PopularityProfile,
    params: &SystemParams,
    n_cached: usize,
) -> Result<CachePlan> {
    params.check()?;
    if n_cached == 0 || n_cached > profile.files() {
        return Err(Error::InvalidParameter(format!(
            "N_c = {n_cached} must be in 1..={}",
            profile.files()
        )));
    }
    let cached_rate = params.cached_rate(n_cached);
    let p_cached = profile.cached_mass(n_cached);
    let bound = cached_rate.to_f64().unwrap_or(f64::NAN) + params.k as f64 * profile.uncached_mass(n_cached);
    Ok(CachePlan {
        n_cached,
        level: params.level(n_cached),
        cached_rate,
        p_cached,
        bound,
    })
}

/// Bounds for every `N_c` in `1..=N`, in order.
pub fn bound_curve(profile: &PopularityProfile, params: &SystemParams) -> Result<Vec<CachePlan>> {
    (1..=profile.files())
        .map(|n| expected_rate_bound(profile, params, n))
        .collect()
}

/// The `N_c` minimizing the bound; ties go to the larger `N_c`.
pub fn optimize_cache_plan(profile: &PopularityProfile, params: &SystemParams) -> Result<CachePlan> {
    let mut best: Option<CachePlan> = None;
    for plan in bound_curve(profile, params)? {
        if best.as_ref().is_none_or(|b| plan.bound <= b.bound) {
            best = Some(plan);
        }
    }
    Ok(best.expect("profile is non-empty"))
}

/// Rate terms of one sampled demand vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    /// Coded delivery cost of the cached requests.
    pub cached: f64,
    /// Unicast cost of the uncached requests.
    pub uncached: f64,
}

impl RateSample {
    pub fn total(&self) -> f64 {
        self.cached + self.uncached
    }
}

/// Color of the SBS serving user `u` during slot `τ` under full occupancy:
/// `(u + τ) mod L`.
pub fn serving_color(user: usize, slot: usize, colors: usize) -> usize {
    (user + slot) % colors
}

/// Cost of serving `demands` (0-based file indices) when the `n_cached`
/// most popular files are cached. Coded messages whose every intended
/// receiver wants an uncached file are skipped, so the cached-part cost is
/// `R(M, N_c, K)` minus, per slot and color group, the share of such
/// messages.
pub fn sample_rate(params: &SystemParams, n_cached: usize, demands: &[usize]) -> RateSample {
    let khat = params.group_size();
    let t = params.level(n_cached);
    let lo = t.floor().to_integer().to_u64().expect("small level");
    let hi = t.ceil().to_integer().to_u64().expect("small level");
    let gamma = (t.ceil() - &t).to_f64().unwrap_or(0.0);
    let mut skipped = 0.0;
    for slot in 0..params.path_length {
        let mut uncached = vec![0u64; params.colors];
        for (u, &d) in demands.iter().enumerate() {
            if d >= n_cached {
                uncached[serving_color(u, slot, params.colors)] += 1;
            }
        }
        for &nu in &uncached {
            let share = |x: u64| binomial_u128(nu, x + 1) as f64 / binomial_u128(khat as u64, x) as f64;
            skipped += if lo == hi {
                share(lo)
            } else {
                gamma * share(lo) + (1.0 - gamma) * share(hi)
            };
        }
    }
    let base = params.cached_rate(n_cached).to_f64().unwrap_or(f64::NAN);
    RateSample {
        cached: base - skipped / params.path_length as f64,
        uncached: demands.iter().filter(|&&d| d >= n_cached).count() as f64,
    }
}

/// Monte Carlo estimate of the expected rate with i.i.d. demands.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRate {
    pub estimate: Estimate,
    /// Samples whose total exceeded `R(M, N_c, K) + R_u`; always zero for
    /// a correct implementation.
    pub bound_violations: usize,
}

/// Trial `i` draws its demands from a ChaCha8 stream keyed by `(seed, i)`,
/// so the estimate is independent of the thread count.
pub fn expected_rate_monte_carlo(
    profile: &PopularityProfile,
    params: &SystemParams,
    n_cached: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloRate> {
    params.check()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if n_cached == 0 || n_cached > profile.files() {
        return Err(Error::InvalidParameter(format!(
            "N_c = {n_cached} must be in 1..={}",
            profile.files()
        )));
    }
    let dist = WeightedIndex::new(profile.probabilities())
        .map_err(|e| Error::InvalidParameter(format!("profile: {e}")))?;
    let base = params.cached_rate(n_cached).to_f64().unwrap_or(f64::NAN);
    let samples = map_indexed(trials, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let demands: Vec<usize> = (0..params.k).map(|_| dist.sample(&mut rng)).collect();
        sample_rate(params, n_cached, &demands)
    });
    let bound_violations = samples
        .iter()
        .filter(|s| s.total() > base + s.uncached + 1e-9)
        .count();
    let totals: Vec<f64> = samples.iter().map(RateSample::total).collect();
    Ok(MonteCarloRate {
        estimate: Estimate::from_samples(&totals),
        bound_violations,
    })
}
