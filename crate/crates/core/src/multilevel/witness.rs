//! Worst-case pairs of conflicting process quorums.

use num::ToPrimitive;

use super::MultilevelSystem;
use super::Variant;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::projective::sharpness_pair;
use crate::quorum::{intersection_size, DEFAULT_PAIR_BUDGET};
use crate::rational;

/// Two process quorums built over a pair of committee quorums.
///
/// `s` takes the lowest-numbered `ceil(r|C|)` processes of every committee in
/// the first committee quorum; `t` takes the highest-numbered ones of every
/// committee in the second. Both lists are ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub level: usize,
    pub quorum_pair: (usize, usize),
    pub committees: (Vec<u32>, Vec<u32>),
    pub s: Vec<u32>,
    pub t: Vec<u32>,
    pub overlap: usize,
}

/// A pair of level-`j` committee quorums meeting in exactly the minimum number of committees.
///
/// The full variant uses the standard-basis sharp pair; the sampled variant
/// falls back to a brute-force scan.
pub fn minimizing_pair(sys: &MultilevelSystem, j: usize) -> Result<(usize, usize)> {
    let level = sys.level(j)?;
    match sys.variant() {
        Variant::Full => {
            let cfg = sys.config();
            let (u, w) = sharpness_pair(sys.field(), cfg.k as usize, level.d as usize)?;
            let find = |s: &crate::projective::Subspace| {
                level
                    .system()
                    .position(&s.point_indices())
                    .ok_or_else(|| Error::invalid("sharp pair is missing from the level"))
            };
            Ok((find(&u)?, find(&w)?))
        }
        Variant::Sampled { .. } => {
            let min = level
                .system()
                .slashability_bruteforce_with(DEFAULT_PAIR_BUDGET, Exec::default())?;
            Ok(min.pair)
        }
    }
}

/// Builds the least/greatest-identity process quorums over an explicit committee-quorum pair.
pub fn witness_for_pair(sys: &MultilevelSystem, j: usize, pair: (usize, usize)) -> Result<Witness> {
    let level = sys.level(j)?;
    let quorums = level.system().quorums();
    let (a, b) = (
        quorums.get(pair.0).ok_or(Error::UnknownElement(pair.0))?,
        quorums.get(pair.1).ok_or(Error::UnknownElement(pair.1))?,
    );
    let assignment = sys.assignment();
    let mut s = Vec::new();
    for &c in a {
        let members = assignment.members(c as usize);
        let take = level.threshold(assignment.size(c as usize)) as u32;
        s.extend(members.start..members.start + take);
    }
    let mut t = Vec::new();
    for &c in b {
        let members = assignment.members(c as usize);
        let take = level.threshold(assignment.size(c as usize)) as u32;
        t.extend(members.end - take..members.end);
    }
    let overlap = intersection_size(&s, &t);
    Ok(Witness {
        level: j,
        quorum_pair: pair,
        committees: (a.clone(), b.clone()),
        s,
        t,
        overlap,
    })
}

/// Witness pair whose overlap equals the exact process-level slashability.
///
/// Requires equal committee sizes `c` with `r_j c` integral.
pub fn worst_case_witness(sys: &MultilevelSystem, j: usize) -> Result<Witness> {
    let level = sys.level(j)?;
    let c = sys
        .assignment()
        .uniform_size()
        .ok_or_else(|| Error::invalid("worst-case witness needs equal committee sizes"))?;
    let rc = &level.r * rational::from_int(c);
    if !rc.is_integer() {
        return Err(Error::invalid(format!(
            "r * c = {} is not an integer",
            rational::render(&rc)
        )));
    }
    let pair = minimizing_pair(sys, j)?;
    let w = witness_for_pair(sys, j, pair)?;
    debug_assert_eq!(
        Some(w.overlap as u64),
        sys.process_slashability_strict(j)
            .ok()
            .and_then(|v| v.to_u64())
    );
    Ok(w)
}
