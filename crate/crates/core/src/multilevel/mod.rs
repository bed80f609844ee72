//! The multilevel committee construction.
//!
//! Processes `0..n` are split into `m = |PG(k, q)|` contiguous committees of
//! near-equal size; committee `i` is identified with the `i`-th point of
//! `PG(k, q)` in enumeration order. Level `j` takes the `d_j`-dimensional
//! subspaces as committee quorums (or, in the sampled variant, `δ_j` random
//! subspaces through every point). A process set is a level-`j` quorum when
//! it holds at least `ceil(r_j |C|)` members of every committee `C` of some
//! committee quorum; those process-level systems are never materialised.

mod formulas;
mod witness;

pub use formulas::*;
pub use witness::{minimizing_pair, witness_for_pair, worst_case_witness, Witness};

use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;

use num::bigint::BigUint;
use num::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Field;
use crate::par::{self, Exec};
use crate::projective::{
    self, count_subspaces_through_point, enumerate_subspaces_with_cap, point_at, point_count,
    sample_subspace_containing, Subspace, DEFAULT_ENUMERATION_CAP,
};
use crate::quorum::IntersectionSystem;
use crate::rational::{self, Rational};

/// Draws allowed per requested subspace when sampling distinct subspaces through a point.
pub const SAMPLING_RETRY_FACTOR: u64 = 64;

/// Parameters of a multilevel system. Thresholds and `p` are exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultilevelConfig {
    pub n: u64,
    #[serde(with = "rational::as_string")]
    pub p: Rational,
    pub k: u32,
    pub q: u32,
    pub d: Vec<u32>,
    #[serde(with = "rational::vec_as_string")]
    pub r: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<u64>>,
}

impl MultilevelConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: MultilevelConfig =
            toml::from_str(s).map_err(|e| Error::invalid(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn levels(&self) -> usize {
        self.d.len()
    }

    /// Number of committees, `|PG(k, q)|`.
    pub fn committee_count(&self) -> BigUint {
        point_count(self.k, self.q)
    }

    pub fn validate(&self) -> Result<()> {
        Field::new(self.q)?;
        let half = rational::from_ratio(1, 2);
        if self.p <= half || self.p > Rational::one() {
            return Err(Error::invalid(format!(
                "p = {} must lie in (1/2, 1]",
                rational::render(&self.p)
            )));
        }
        if self.d.is_empty() {
            return Err(Error::invalid("at least one level is required"));
        }
        if self.d.len() != self.r.len() {
            return Err(Error::invalid(format!(
                "{} dimensions but {} thresholds",
                self.d.len(),
                self.r.len()
            )));
        }
        for (j, &d) in self.d.iter().enumerate() {
            if 2 * d <= self.k || d >= self.k {
                return Err(Error::invalid(format!(
                    "level {}: d = {d} is not in (k/2, k) for k = {}",
                    j + 1,
                    self.k
                )));
            }
        }
        if self.d.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("dimensions d must be weakly increasing"));
        }
        for (j, r) in self.r.iter().enumerate() {
            if *r <= half || *r >= self.p {
                return Err(Error::invalid(format!(
                    "level {}: r = {} is not in (1/2, p)",
                    j + 1,
                    rational::render(r)
                )));
            }
        }
        if self.r.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("thresholds r must be weakly increasing"));
        }
        let m = self.committee_count();
        if BigUint::from(self.n) < m {
            return Err(Error::invalid(format!(
                "n = {} is smaller than |PG(k, q)| = {m}",
                self.n
            )));
        }
        if self.n > u32::MAX as u64 {
            return Err(Error::invalid(format!(
                "n = {} exceeds the supported {}",
                self.n,
                u32::MAX
            )));
        }
        if let Some(delta) = &self.delta {
            if delta.len() != self.d.len() {
                return Err(Error::invalid(format!(
                    "{} deltas for {} levels",
                    delta.len(),
                    self.d.len()
                )));
            }
            if delta.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::invalid("deltas must be weakly increasing"));
            }
            for (j, (&delta, &d)) in delta.iter().zip(&self.d).enumerate() {
                let available = count_subspaces_through_point(self.k, d, self.q);
                if delta == 0 || BigUint::from(delta) > available {
                    return Err(Error::invalid(format!(
                        "level {}: delta = {delta} must be in 1..={available}",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Which construction produced a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Variant {
    Full,
    Sampled { seed: u64 },
}

/// Sizes of an equitable partition of `n` into `m` blocks: the first
/// `n mod m` blocks get one extra member.
pub fn equitable_partition(n: u64, m: u64) -> Result<Vec<u64>> {
    if m == 0 || n < m {
        return Err(Error::invalid(format!(
            "cannot split {n} processes into {m} nonempty committees"
        )));
    }
    let (base, extra) = (n / m, n % m);
    Ok((0..m).map(|i| base + u64::from(i < extra)).collect())
}

/// Committees as contiguous blocks of process identities `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitteeAssignment {
    sizes: Vec<u64>,
    starts: Vec<u64>,
}

impl CommitteeAssignment {
    pub fn equitable(n: u64, m: u64) -> Result<Self> {
        let sizes = equitable_partition(n, m)?;
        let starts = sizes
            .iter()
            .scan(0u64, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect();
        Ok(CommitteeAssignment { sizes, starts })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn size(&self, committee: usize) -> u64 {
        self.sizes[committee]
    }

    pub fn process_count(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Process identities of `committee`, ascending.
    pub fn members(&self, committee: usize) -> Range<u32> {
        let start = self.starts[committee] as u32;
        start..start + self.sizes[committee] as u32
    }

    pub fn committee_of(&self, process: u32) -> Option<usize> {
        let p = process as u64;
        if p >= self.process_count() {
            return None;
        }
        Some(self.starts.partition_point(|&s| s <= p) - 1)
    }

    pub fn min_size(&self) -> u64 {
        self.sizes.iter().copied().min().unwrap_or(0)
    }

    /// The common committee size, when all committees are equal.
    pub fn uniform_size(&self) -> Option<u64> {
        let first = *self.sizes.first()?;
        self.sizes.iter().all(|&s| s == first).then_some(first)
    }
}

/// One level: committee quorums as subspaces and as an intersection system over committees.
#[derive(Clone, Debug)]
pub struct Level {
    pub d: u32,
    pub r: Rational,
    pub delta: Option<u64>,
    subspaces: Vec<Subspace>,
    system: IntersectionSystem,
}

impl Level {
    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn system(&self) -> &IntersectionSystem {
        &self.system
    }

    /// Per-committee vote count needed in this level.
    pub fn threshold(&self, committee_size: u64) -> u64 {
        committee_threshold(committee_size, &self.r)
    }
}

#[derive(Clone, Debug)]
pub struct MultilevelSystem {
    config: MultilevelConfig,
    field: Field,
    assignment: CommitteeAssignment,
    levels: Vec<Level>,
    variant: Variant,
}

impl MultilevelSystem {
    pub fn build(config: &MultilevelConfig, variant: Variant) -> Result<Self> {
        Self::build_with(config, variant, DEFAULT_ENUMERATION_CAP, Exec::default())
    }

    pub fn build_with(
        config: &MultilevelConfig,
        variant: Variant,
        cap: u64,
        exec: Exec,
    ) -> Result<Self> {
        config.validate()?;
        let field = Field::new(config.q)?;
        let m = config
            .committee_count()
            .to_u64()
            .filter(|&m| m <= cap)
            .ok_or_else(|| Error::SizeOverflow {
                count: config.committee_count().to_string(),
                cap,
            })?;
        let assignment = CommitteeAssignment::equitable(config.n, m)?;
        let k = config.k as usize;
        let labels: Vec<String> = (0..m as usize)
            .map(|i| point_at(k, &field, i).map(|p| p.to_string()))
            .collect::<Result<_>>()?;

        let mut levels = Vec::with_capacity(config.levels());
        for (j, (&d, r)) in config.d.iter().zip(&config.r).enumerate() {
            let (subspaces, delta) = match variant {
                Variant::Full => (
                    enumerate_subspaces_with_cap(k, d as usize, &field, cap)?,
                    None,
                ),
                Variant::Sampled { seed } => {
                    let delta = config
                        .delta
                        .as_ref()
                        .map(|ds| ds[j])
                        .ok_or_else(|| Error::invalid("the sampled variant needs delta"))?;
                    (
                        sample_level(&field, k, d as usize, m as usize, j + 1, delta, seed, exec)?,
                        Some(delta),
                    )
                }
            };
            let quorums = subspaces.iter().map(Subspace::point_indices).collect();
            let system = IntersectionSystem::new(labels.clone(), quorums)?;
            levels.push(Level {
                d,
                r: r.clone(),
                delta,
                subspaces,
                system,
            });
        }
        Ok(MultilevelSystem {
            config: config.clone(),
            field,
            assignment,
            levels,
            variant,
        })
    }

    pub fn config(&self) -> &MultilevelConfig {
        &self.config
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn assignment(&self) -> &CommitteeAssignment {
        &self.assignment
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Level `j`, numbered from 1.
    pub fn level(&self, j: usize) -> Result<&Level> {
        j.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "level {j} does not exist (1..={})",
                    self.levels.len()
                ))
            })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Checks that every level-`j` quorum contains some level-`i` quorum for `i < j`.
    ///
    /// For each subspace at level `j`, the span of its first `d_i + 1` basis
    /// rows is a `d_i`-subspace inside it and must appear at level `i`. Only
    /// meaningful for the full variant.
    pub fn verify_nesting(&self) -> Result<bool> {
        if self.variant != Variant::Full {
            return Err(Error::invalid("nesting only holds for the full variant"));
        }
        for (i, lower) in self.levels.iter().enumerate() {
            let lower_set: HashSet<&Subspace> = lower.subspaces.iter().collect();
            for upper in &self.levels[i + 1..] {
                for s in &upper.subspaces {
                    let inner = Subspace::span(
                        &self.field,
                        s.ambient_k(),
                        &s.basis()[..=lower.d as usize],
                    )?;
                    if !lower_set.contains(&inner) {
                        return Ok(false);
                    }
                    let outer: HashSet<u32> = s.point_indices().into_iter().collect();
                    if !inner.point_indices().iter().all(|p| outer.contains(p)) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Exact process-level slashability of level `j` when committees are equal
    /// and `r_j c` is integral; otherwise the generalized lower bound.
    pub fn process_slashability(&self, j: usize) -> Result<ProcessSlashability> {
        let level = self.level(j)?;
        let committee_slash = slashability_formula(self.config.k, self.config.q, level.d)?;
        if let Some(c) = self.assignment.uniform_size() {
            if let Ok(v) = process_slashability_equal(c, &level.r, &committee_slash) {
                return Ok(ProcessSlashability {
                    value: v,
                    exact: true,
                });
            }
        }
        let shared = committee_slash
            .to_usize()
            .expect("committee count fits in usize");
        Ok(ProcessSlashability {
            value: generalized_lower_bound(self.assignment.sizes(), &level.r, shared),
            exact: false,
        })
    }

    /// As [`Self::process_slashability`], but refuses when the exact formula's hypotheses fail.
    pub fn process_slashability_strict(&self, j: usize) -> Result<BigUint> {
        let level = self.level(j)?;
        let c = self
            .assignment
            .uniform_size()
            .ok_or_else(|| Error::invalid("committees have unequal sizes"))?;
        process_slashability_equal(
            c,
            &level.r,
            &slashability_formula(self.config.k, self.config.q, level.d)?,
        )
    }

    /// Serialises the system. Identical systems give identical bytes.
    pub fn to_json(&self) -> String {
        let file = SystemFile {
            config: self.config.clone(),
            variant: self.variant,
            committee_sizes: self.assignment.sizes().to_vec(),
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(i, l)| LevelFile {
                    level: i + 1,
                    d: l.d,
                    r: l.r.clone(),
                    delta: l.delta,
                    quorums: l.system.quorums().to_vec(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string(&file).expect("system serialises");
        s.push('\n');
        s
    }

    /// Loads a system file, rebuilding it from its configuration and checking
    /// that the stored committees and quorums match.
    pub fn from_json(s: &str) -> Result<Self> {
        let file: SystemFile =
            serde_json::from_str(s).map_err(|e| Error::invalid(format!("system file: {e}")))?;
        let sys = Self::build(&file.config, file.variant)?;
        let matches = sys.assignment.sizes() == file.committee_sizes.as_slice()
            && sys.levels.len() == file.levels.len()
            && sys
                .levels
                .iter()
                .zip(&file.levels)
                .enumerate()
                .all(|(i, (a, b))| {
                    b.level == i + 1
                        && a.d == b.d
                        && a.r == b.r
                        && a.delta == b.delta
                        && a.system.quorums() == b.quorums.as_slice()
                });
        if !matches {
            return Err(Error::invalid(
                "system file does not match its own configuration",
            ));
        }
        Ok(sys)
    }
}

/// Process-level slashability value and whether it is the exact equal-size formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessSlashability {
    pub value: BigUint,
    pub exact: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    config: MultilevelConfig,
    variant: Variant,
    committee_sizes: Vec<u64>,
    levels: Vec<LevelFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelFile {
    level: usize,
    d: u32,
    #[serde(with = "rational::as_string")]
    r: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<u64>,
    quorums: Vec<Vec<u32>>,
}

/// Draws `delta` distinct `d`-subspaces through every point and merges them,
/// keeping first occurrences in point order.
///
/// Point `i` at level `j` uses its own ChaCha stream seeded with `seed ^ i`
/// on stream `j`, so the result does not depend on `exec`.
#[allow(clippy::too_many_arguments)]
fn sample_level(
    field: &Field,
    k: usize,
    d: usize,
    m: usize,
    level: usize,
    delta: u64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<Subspace>> {
    let per_point = par::map_indexed(exec, m, |i| -> Result<Vec<Subspace>> {
        let pt = point_at(k, field, i)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        rng.set_stream(level as u64);
        let budget = SAMPLING_RETRY_FACTOR * delta;
        let mut seen = HashSet::new();
        let mut picked = Vec::with_capacity(delta as usize);
        let mut draws = 0;
        while (picked.len() as u64) < delta {
            if draws == budget {
                return Err(Error::SamplingExhausted {
                    level,
                    point: i,
                    wanted: delta,
                    draws,
                });
            }
            draws += 1;
            let s = sample_subspace_containing(&pt, d, field, &mut rng)?;
            if seen.insert(s.clone()) {
                picked.push(s);
            }
        }
        Ok(picked)
    });
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for subs in per_point {
        for s in subs? {
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Committee index of each point, i.e. the `com` bijection (the identity on indices).
pub fn committee_of_point(point: &projective::ProjectivePoint, q: u32) -> usize {
    point.index(q)
}
