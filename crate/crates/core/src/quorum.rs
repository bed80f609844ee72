//! Intersection systems over an abstract ground set, with message
//! complexity, degree, load and slashability.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rational::{self, Rational};

/// Default limit on the number of quorum pairs a brute-force scan may visit.
pub const DEFAULT_PAIR_BUDGET: u64 = 10_000_000;

/// A collection of quorums, each a set of indices into `ground`.
///
/// Quorums are stored sorted; duplicates are collapsed on construction
/// keeping the first occurrence. Pairwise intersection is not enforced here,
/// see [`IntersectionSystem::verify_intersecting`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct IntersectionSystem {
    ground: Vec<String>,
    quorums: Vec<Vec<u32>>,
}

#[derive(Deserialize)]
struct RawSystem {
    ground: Vec<String>,
    quorums: Vec<Vec<u32>>,
}

impl TryFrom<RawSystem> for IntersectionSystem {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        IntersectionSystem::new(raw.ground, raw.quorums)
    }
}

/// A minimizing quorum pair and its intersection size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairMin {
    pub size: usize,
    pub pair: (usize, usize),
}

/// Result of checking randomly drawn quorum pairs.
///
/// `upper_bound` is an upper bound on the true slashability, witnessed by `pair`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledSlashability {
    pub upper_bound: usize,
    pub pair: (usize, usize),
    pub pairs_checked: u64,
    pub mean_intersection: f64,
    pub seed: u64,
}

impl IntersectionSystem {
    pub fn new(ground: Vec<String>, quorums: Vec<Vec<u32>>) -> Result<Self> {
        if quorums.is_empty() {
            return Err(Error::invalid(
                "an intersection system needs at least one quorum",
            ));
        }
        let m = ground.len();
        let mut seen = HashSet::with_capacity(quorums.len());
        let mut kept = Vec::with_capacity(quorums.len());
        let mut covered = vec![false; m];
        for (i, mut q) in quorums.into_iter().enumerate() {
            if q.is_empty() {
                return Err(Error::invalid(format!("quorum {i} is empty")));
            }
            q.sort_unstable();
            q.dedup();
            if let Some(&bad) = q.iter().find(|&&e| e as usize >= m) {
                return Err(Error::UnknownElement(bad as usize));
            }
            for &e in &q {
                covered[e as usize] = true;
            }
            if seen.insert(q.clone()) {
                kept.push(q);
            }
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(Error::invalid(format!(
                "ground element {} ({missing}) is not in any quorum",
                ground[missing]
            )));
        }
        Ok(IntersectionSystem {
            ground,
            quorums: kept,
        })
    }

    /// Ground set labelled `"0"`, `"1"`, ... `"m-1"`.
    pub fn with_indexed_ground(m: usize, quorums: Vec<Vec<u32>>) -> Result<Self> {
        Self::new((0..m).map(|i| i.to_string()).collect(), quorums)
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn quorums(&self) -> &[Vec<u32>] {
        &self.quorums
    }

    pub fn len(&self) -> usize {
        self.quorums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quorums.is_empty()
    }

    fn bitsets(&self) -> Vec<Bits> {
        self.quorums
            .iter()
            .map(|q| Bits::from_indices(q, self.ground.len()))
            .collect()
    }

    pub fn verify_intersecting(&self) -> bool {
        self.verify_intersecting_with(Exec::default())
    }

    pub fn verify_intersecting_with(&self, exec: Exec) -> bool {
        let bits = self.bitsets();
        par::all_indexed(exec, bits.len(), |i| {
            bits[i + 1..].iter().all(|b| bits[i].intersects(b))
        })
    }

    /// Largest quorum size.
    pub fn msg_complexity(&self) -> usize {
        self.quorums.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.ground.len()];
        for q in &self.quorums {
            for &e in q {
                deg[e as usize] += 1;
            }
        }
        deg
    }

    pub fn degree(&self, element: usize) -> Result<usize> {
        if element >= self.ground.len() {
            return Err(Error::UnknownElement(element));
        }
        Ok(self
            .quorums
            .iter()
            .filter(|q| q.binary_search(&(element as u32)).is_ok())
            .count())
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Probability that a uniformly chosen quorum contains `element`.
    pub fn load_of(&self, element: usize) -> Result<Rational> {
        let deg = self.degree(element)?;
        Ok(rational::from_ratio(deg as i64, self.len() as i64))
    }

    /// Maximum element load, `max_degree / |quorums|`.
    pub fn load(&self) -> Rational {
        rational::from_ratio(self.max_degree() as i64, self.len() as i64)
    }

    pub fn pair_count(&self) -> u64 {
        let n = self.len() as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Exact minimum `|A ∩ B|` over distinct quorums (the quorum size when
    /// there is only one).
    pub fn slashability_bruteforce(&self) -> Result<PairMin> {
        self.slashability_bruteforce_with(DEFAULT_PAIR_BUDGET, Exec::default())
    }

    pub fn slashability_bruteforce_with(&self, budget: u64, exec: Exec) -> Result<PairMin> {
        if self.len() == 1 {
            return Ok(PairMin {
                size: self.quorums[0].len(),
                pair: (0, 0),
            });
        }
        let pairs = self.pair_count();
        if pairs > budget {
            return Err(Error::BudgetExceeded { pairs, budget });
        }
        let bits = self.bitsets();
        let n = bits.len();
        let rows = par::map_indexed(exec, n - 1, |i| {
            let mut best: Option<PairMin> = None;
            for j in i + 1..n {
                let size = bits[i].and_count(&bits[j]);
                if best.is_none_or(|b| size < b.size) {
                    best = Some(PairMin { size, pair: (i, j) });
                }
            }
            best.expect("row has at least one pair")
        });
        // Ties go to the lexicographically first pair, independent of `exec`.
        Ok(rows
            .into_iter()
            .min_by_key(|b| (b.size, b.pair))
            .expect("at least two quorums"))
    }

    /// Minimum intersection over `pairs` uniformly drawn pairs of distinct quorums.
    pub fn slashability_sampled(
        &self,
        pairs: u64,
        seed: u64,
        exec: Exec,
    ) -> Result<SampledSlashability> {
        let n = self.len();
        if n < 2 {
            return Err(Error::invalid("sampling pairs needs at least two quorums"));
        }
        if pairs == 0 {
            return Err(Error::invalid("sample at least one pair"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let drawn: Vec<(usize, usize)> = (0..pairs)
            .map(|_| {
                let a = rng.gen_range(0..n);
                let b = loop {
                    let b = rng.gen_range(0..n);
                    if b != a {
                        break b;
                    }
                };
                (a, b)
            })
            .collect();
        let sizes = par::map_indexed(exec, drawn.len(), |i| {
            let (a, b) = drawn[i];
            intersection_size(&self.quorums[a], &self.quorums[b])
        });
        let (best, &size) = sizes
            .iter()
            .enumerate()
            .min_by_key(|&(i, s)| (*s, i))
            .expect("nonempty sample");
        let total: usize = sizes.iter().sum();
        Ok(SampledSlashability {
            upper_bound: size,
            pair: drawn[best],
            pairs_checked: pairs,
            mean_intersection: total as f64 / pairs as f64,
            seed,
        })
    }

    pub fn intersection_size(&self, a: usize, b: usize) -> usize {
        intersection_size(&self.quorums[a], &self.quorums[b])
    }

    /// Index of the quorum equal to `members`, if present.
    pub fn position(&self, members: &[u32]) -> Option<usize> {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.quorums.iter().position(|q| *q == sorted)
    }
}

/// `|a ∩ b|` for sorted index lists.
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Fixed-width bitset over the ground set.
struct Bits(Vec<u64>);

impl Bits {
    fn from_indices(idx: &[u32], m: usize) -> Bits {
        let mut words = vec![0u64; m.div_ceil(64)];
        for &i in idx {
            words[i as usize / 64] |= 1 << (i % 64);
        }
        Bits(words)
    }

    #[inline]
    fn and_count(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    #[inline]
    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}
