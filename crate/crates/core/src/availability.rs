//! Availability of committee-based intersection systems.
//!
//! Processes are available independently with probability `p`. A committee
//! of size `c` is live when at least `ceil(r c)` of its members are available,
//! and the level is available when some committee quorum is entirely live.
//! This module provides the exact committee failure probability, the
//! exponential tail bound on it, the resulting analytic availability bound
//! and committee sizing rule, and a seeded Monte Carlo estimator.

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multilevel::{committee_threshold, MultilevelSystem};
use crate::par::{self, Exec};
use crate::rational::{self, Rational};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Trials per independently seeded Monte Carlo block.
pub const TRIALS_PER_BLOCK: u64 = 1024;

/// `exp(-δ² n q / (2 + δ))`, the Chernoff bound on `P(Z >= (1 + δ) n q)` for `Z ~ Bin(n, q)`.
pub fn chernoff_tail(n: u64, q: f64, delta: f64) -> Result<f64> {
    if n == 0 || !(0.0..=1.0).contains(&q) || delta.is_nan() || delta <= 0.0 {
        return Err(Error::invalid(format!(
            "chernoff_tail needs n >= 1, q in [0, 1], delta > 0 (got {n}, {q}, {delta})"
        )));
    }
    Ok((-(delta * delta) * n as f64 * q / (2.0 + delta)).exp())
}

/// `P(Z >= at_least)` for `Z ~ Bin(n, q)`, exactly.
pub fn binomial_upper_tail(n: u64, q: &Rational, at_least: u64) -> Result<Rational> {
    if q.is_negative() || *q > Rational::one() {
        return Err(Error::invalid(format!(
            "probability {} outside [0, 1]",
            rational::render(q)
        )));
    }
    if at_least == 0 {
        return Ok(Rational::one());
    }
    if at_least > n {
        return Ok(Rational::zero());
    }
    // Common denominator b^n with q = a / b.
    let (a, b) = (q.numer().clone(), q.denom().clone());
    let rest = &b - &a;
    let mut binom = BigInt::one();
    let mut sum = BigInt::zero();
    for i in 0..=n {
        if i >= at_least {
            sum +=
                &binom * num::pow(a.clone(), i as usize) * num::pow(rest.clone(), (n - i) as usize);
        }
        binom = binom * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Ok(Rational::new(sum, num::pow(b, n as usize)))
}

fn check_prob(name: &str, p: &Rational) -> Result<()> {
    if p.is_negative() || *p > Rational::one() {
        return Err(Error::invalid(format!(
            "{name} = {} outside [0, 1]",
            rational::render(p)
        )));
    }
    Ok(())
}

/// `a1(x) = (p - x)² / (2 - p - x)`, the exponent rate of committee failure.
pub fn a1(p: &Rational, x: &Rational) -> Result<Rational> {
    check_prob("p", p)?;
    if x.is_negative() || x >= p {
        return Err(Error::invalid(format!(
            "a1 needs 0 <= x < p, got x = {}, p = {}",
            rational::render(x),
            rational::render(p)
        )));
    }
    let diff = p - x;
    Ok(&diff * &diff / (rational::from_int(2) - p - x))
}

fn check_threshold(r: &Rational, p: &Rational) -> Result<()> {
    check_prob("p", p)?;
    if *r <= rational::from_ratio(1, 2) || r >= p {
        return Err(Error::invalid(format!(
            "threshold r = {} must lie in (1/2, p = {})",
            rational::render(r),
            rational::render(p)
        )));
    }
    Ok(())
}

/// Committee failure probability alongside its exponential bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CommitteeFailure {
    /// `P(fewer than ceil(r c) members available)`, exact.
    pub exact: Rational,
    /// `exp(-a1(r) c)`.
    pub bound: f64,
    /// `a1(r) c`, exact.
    pub exponent: Rational,
}

impl CommitteeFailure {
    pub fn exact_f64(&self) -> f64 {
        rational::to_f64(&self.exact)
    }

    /// Whether `exact <= bound` holds, certified against floating-point error.
    ///
    /// The exact rational is compared with a rational strictly below the
    /// computed `exp`, lowered by a relative margin that dominates the error
    /// of rounding the exponent to `f64` and of `exp` itself. A `false`
    /// answer means the inequality could not be certified.
    pub fn certified_within_bound(&self) -> bool {
        let x = rational::to_f64(&self.exponent);
        let margin = 1e-12 + x.abs() * 1e-15;
        let lowered = self.bound * (1.0 - margin);
        match Rational::from_float(lowered) {
            Some(lo) => self.exact <= lo,
            None => false,
        }
    }
}

pub fn committee_failure(c: u64, r: &Rational, p: &Rational) -> Result<CommitteeFailure> {
    if c == 0 {
        return Err(Error::invalid("committee size must be positive"));
    }
    check_threshold(r, p)?;
    let needed = committee_threshold(c, r);
    // Failure iff the unavailable count Z ~ Bin(c, 1 - p) exceeds c - needed.
    let exact = binomial_upper_tail(c, &(Rational::one() - p), c - needed + 1)?;
    let exponent = a1(p, r)? * rational::from_int(c);
    let bound = (-rational::to_f64(&exponent)).exp();
    Ok(CommitteeFailure {
        exact,
        bound,
        exponent,
    })
}

/// `max(0, 1 - (n / c_min) exp(-a1(r) c_min))`.
pub fn availability_lower_bound(n: u64, c_min: u64, r: &Rational, p: &Rational) -> Result<f64> {
    if c_min == 0 || c_min > n {
        return Err(Error::invalid(format!(
            "need 1 <= c_min <= n, got c_min = {c_min}, n = {n}"
        )));
    }
    check_threshold(r, p)?;
    let rate = rational::to_f64(&a1(p, r)?);
    let deficit = n as f64 / c_min as f64 * (-rate * c_min as f64).exp();
    Ok((1.0 - deficit).max(0.0))
}

/// `a = (b + 1) / a1(r)`, the committee-size coefficient for polynomial decay `n^-b`.
pub fn sizing_coefficient(b: f64, r: &Rational, p: &Rational) -> Result<f64> {
    if !b.is_finite() || b < 0.0 {
        return Err(Error::invalid(format!(
            "b = {b} must be a nonnegative finite number"
        )));
    }
    check_threshold(r, p)?;
    Ok((b + 1.0) / rational::to_f64(&a1(p, r)?))
}

/// Smallest committee size with `c >= a ln n`.
pub fn required_committee_size(b: f64, r: &Rational, p: &Rational, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::invalid("n must be at least 2"));
    }
    required_committee_size_for_log(b, r, p, (n as f64).ln())
}

/// [`required_committee_size`] with `ln n` supplied directly.
pub fn required_committee_size_for_log(
    b: f64,
    r: &Rational,
    p: &Rational,
    ln_n: f64,
) -> Result<u64> {
    if ln_n.is_nan() || ln_n <= 0.0 {
        return Err(Error::invalid("ln n must be positive"));
    }
    Ok((sizing_coefficient(b, r, p)? * ln_n).ceil() as u64)
}

/// `1 - 1 / (a n^b ln n)`, the availability guaranteed once `c_min >= a ln n`.
pub fn sizing_guarantee(b: f64, r: &Rational, p: &Rational, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n must be at least 2"));
    }
    let a = sizing_coefficient(b, r, p)?;
    let nf = n as f64;
    Ok(1.0 - 1.0 / (a * nf.powf(b) * nf.ln()))
}

/// How Monte Carlo trials draw availability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// One uniform per committee, compared against its exact failure probability.
    #[default]
    CommitteeCounts,
    /// One uniform per process; a process is available when its uniform is below `p`.
    PerProcess,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvailabilityReport {
    pub level: usize,
    pub p: String,
    pub r: String,
    pub n: u64,
    pub committees: usize,
    pub c_min: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: SamplingMode,
    pub successes: u64,
    pub analytic_lower_bound: f64,
    pub mc_estimate: f64,
    pub mc_half_width: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Fraction of trials in which every committee was live.
    pub all_committees_live: f64,
    /// Exact probability that every committee is live, `prod (1 - F_p(|C|; r))`.
    pub product_form: f64,
}

/// 99% Wilson score interval `(low, high)` for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z_99 * Z_99;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z_99 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn availability_monte_carlo(
    sys: &MultilevelSystem,
    j: usize,
    trials: u64,
    seed: u64,
) -> Result<AvailabilityReport> {
    availability_monte_carlo_with(
        sys,
        j,
        None,
        trials,
        seed,
        SamplingMode::default(),
        Exec::default(),
    )
}

/// Monte Carlo availability of level `j`, optionally at a different `p`.
///
/// Trials are split into blocks of [`TRIALS_PER_BLOCK`]; block `b` draws from
/// ChaCha stream `b` of `seed`, so results are identical across `exec` and
/// across `p` the same uniforms are reused (common random numbers).
pub fn availability_monte_carlo_with(
    sys: &MultilevelSystem,
    j: usize,
    p_override: Option<&Rational>,
    trials: u64,
    seed: u64,
    mode: SamplingMode,
    exec: Exec,
) -> Result<AvailabilityReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let level = sys.level(j)?;
    let p = p_override.unwrap_or(&sys.config().p).clone();
    check_threshold(&level.r, &p)?;
    let assignment = sys.assignment();
    let sizes = assignment.sizes();
    let thresholds: Vec<u64> = sizes.iter().map(|&s| level.threshold(s)).collect();

    // Exact failure probability per distinct committee size.
    let mut distinct: Vec<u64> = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let failures: Vec<(u64, Rational)> = distinct
        .iter()
        .map(|&s| committee_failure(s, &level.r, &p).map(|f| (s, f.exact)))
        .collect::<Result<_>>()?;
    let fail_of = |size: u64| -> &Rational {
        &failures
            .iter()
            .find(|(s, _)| *s == size)
            .expect("size tabulated")
            .1
    };
    let fail_f64: Vec<f64> = sizes
        .iter()
        .map(|&s| rational::to_f64(fail_of(s)))
        .collect();
    let product_form: f64 = sizes
        .iter()
        .map(|&s| 1.0 - rational::to_f64(fail_of(s)))
        .product();
    let p_f64 = rational::to_f64(&p);

    let quorums = level.system().quorums();
    let blocks = trials.div_ceil(TRIALS_PER_BLOCK) as usize;
    let counts = par::map_indexed(exec, blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let start = b as u64 * TRIALS_PER_BLOCK;
        let n_trials = TRIALS_PER_BLOCK.min(trials - start);
        let mut live = vec![false; sizes.len()];
        let (mut ok, mut all_live) = (0u64, 0u64);
        for _ in 0..n_trials {
            match mode {
                SamplingMode::CommitteeCounts => {
                    for (l, &f) in live.iter_mut().zip(&fail_f64) {
                        *l = rng.gen::<f64>() >= f;
                    }
                }
                SamplingMode::PerProcess => {
                    for ((l, &size), &need) in live.iter_mut().zip(sizes).zip(&thresholds) {
                        let up = (0..size).filter(|_| rng.gen::<f64>() < p_f64).count() as u64;
                        *l = up >= need;
                    }
                }
            }
            if live.iter().all(|&l| l) {
                all_live += 1;
                ok += 1;
            } else if quorums.iter().any(|q| q.iter().all(|&c| live[c as usize])) {
                ok += 1;
            }
        }
        (ok, all_live)
    });
    let successes: u64 = counts.iter().map(|c| c.0).sum();
    let all_live: u64 = counts.iter().map(|c| c.1).sum();
    let (lo, hi) = wilson_interval(successes, trials);
    let c_min = assignment.min_size();
    Ok(AvailabilityReport {
        level: j,
        p: rational::render(&p),
        r: rational::render(&level.r),
        n: sys.config().n,
        committees: sizes.len(),
        c_min,
        trials,
        seed,
        mode,
        successes,
        analytic_lower_bound: availability_lower_bound(sys.config().n, c_min, &level.r, &p)?,
        mc_estimate: successes as f64 / trials as f64,
        mc_half_width: (hi - lo) / 2.0,
        wilson_low: lo,
        wilson_high: hi,
        all_committees_live: all_live as f64 / trials as f64,
        product_form,
    })
}
