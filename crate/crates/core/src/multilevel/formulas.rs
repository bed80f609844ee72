//! Closed-form metrics of the projective construction.

use num::bigint::{BigInt, BigUint};
use num::{One, Signed};

use crate::error::{Error, Result};
use crate::projective::point_count;
use crate::rational::{self, Rational};

/// Committees per level quorum: `(q^(d+1) - 1) / (q - 1)`.
pub fn quorum_size_formula(q: u32, d: u32) -> BigUint {
    point_count(d, q)
}

/// Committee-level slashability of `PG_d(k, q)`: `(q^(2d-k+1) - 1) / (q - 1)`.
pub fn slashability_formula(k: u32, q: u32, d: u32) -> Result<BigUint> {
    if 2 * d <= k || d > k {
        return Err(Error::invalid(format!(
            "slashability formula needs k < 2d <= 2k, got k={k}, d={d}"
        )));
    }
    Ok(point_count(2 * d - k, q))
}

/// Least member count meeting an `r` fraction of a committee: `ceil(r * size)`.
pub fn committee_threshold(committee_size: u64, r: &Rational) -> u64 {
    rational::ceil_u64(&(r * rational::from_int(committee_size)))
}

fn check_threshold(r: &Rational) -> Result<()> {
    let half = rational::from_ratio(1, 2);
    if *r <= half || *r >= Rational::one() {
        return Err(Error::invalid(format!(
            "threshold {} must lie in (1/2, 1)",
            rational::render(r)
        )));
    }
    Ok(())
}

/// `(2r - 1) * c * slash` for equal committees of size `c` with `r * c` integral.
pub fn process_slashability_equal(
    c: u64,
    r: &Rational,
    committee_slash: &BigUint,
) -> Result<BigUint> {
    check_threshold(r)?;
    let rc = r * rational::from_int(c);
    if !rc.is_integer() {
        return Err(Error::invalid(format!(
            "r * c = {} is not an integer",
            rational::render(&rc)
        )));
    }
    let per_committee = BigInt::from(2) * rc.to_integer() - BigInt::from(c);
    Ok(per_committee.to_biguint().expect("r > 1/2") * committee_slash)
}

/// The same quantity written through `n`: `(2r - 1) (q^(2d-k+1) - 1) / (q^(k+1) - 1) * n`.
pub fn process_slashability_via_n(
    k: u32,
    q: u32,
    d: u32,
    r: &Rational,
    n: u64,
) -> Result<Rational> {
    check_threshold(r)?;
    if 2 * d <= k || d > k {
        return Err(Error::invalid(format!(
            "need k < 2d <= 2k, got k={k}, d={d}"
        )));
    }
    let qb = BigInt::from(q);
    let num = num::pow(qb.clone(), (2 * d - k + 1) as usize) - 1;
    let den = num::pow(qb, (k + 1) as usize) - 1;
    let two_r_minus_1 = rational::from_int(2) * r - Rational::one();
    Ok(two_r_minus_1 * Rational::new(num, den) * rational::from_int(n))
}

/// Per-committee overlap forced by two `r`-quorums: `max(0, 2 ceil(r s) - s)`.
pub fn forced_overlap(size: u64, r: &Rational) -> u64 {
    (2 * committee_threshold(size, r)).saturating_sub(size)
}

/// Lower bound on `|S ∩ T|` for any two process quorums whose committee
/// quorums share at least `shared` committees, given arbitrary committee sizes.
///
/// Sums the `shared` smallest [`forced_overlap`] values over all committees.
pub fn generalized_lower_bound(committee_sizes: &[u64], r: &Rational, shared: usize) -> BigUint {
    let mut overlaps: Vec<u64> = committee_sizes
        .iter()
        .map(|&s| forced_overlap(s, r))
        .collect();
    overlaps.sort_unstable();
    overlaps
        .iter()
        .take(shared)
        .map(|&v| BigUint::from(v))
        .sum()
}

/// `(2r - 1) * c * mu * lambda`, the slashability ceiling for systems whose
/// message complexity times load is at most `mu * lambda`.
pub fn slashing_upper_bound(
    r: &Rational,
    c: u64,
    mu: &Rational,
    lambda: &Rational,
) -> Result<Rational> {
    check_threshold(r)?;
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(Error::invalid(format!(
            "load {} must lie in (0, 1)",
            rational::render(lambda)
        )));
    }
    if *mu < Rational::one() {
        return Err(Error::invalid(format!(
            "mu {} must be at least 1",
            rational::render(mu)
        )));
    }
    if c == 0 {
        return Err(Error::invalid("committee size must be positive"));
    }
    let two_r_minus_1 = rational::from_int(2) * r - Rational::one();
    Ok(two_r_minus_1 * rational::from_int(c) * mu * lambda)
}

/// `(q^(2d-k+1) - 1)(q^(k+1) - 1) / (q^(d+1) - 1)^2`: achieved slashability over the upper bound.
pub fn optimality_ratio(k: u32, q: u32, d: u32) -> Result<Rational> {
    if 2 * d <= k || d > k {
        return Err(Error::invalid(format!(
            "optimality ratio needs k < 2d <= 2k, got k={k}, d={d}"
        )));
    }
    if q < 2 {
        return Err(Error::invalid("q must be at least 2"));
    }
    let qb = BigInt::from(q);
    let pw = |e: u32| num::pow(qb.clone(), e as usize) - BigInt::one();
    let den = pw(d + 1);
    Ok(Rational::new(pw(2 * d - k + 1) * pw(k + 1), &den * &den))
}

/// The exponent `2 - k/d` relating slashability to message complexity.
pub fn slash_msg_exponent(k: u32, d: u32) -> Result<Rational> {
    if d == 0 {
        return Err(Error::invalid("d must be positive"));
    }
    Ok(rational::from_int(2) - rational::from_ratio(k as i64, d as i64))
}
