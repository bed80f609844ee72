//! Equivocation scenarios over a multilevel system.
//!
//! A scenario is a vote table: every process attests to nothing, to block
//! `v`, to block `v'`, or to both. Processes attesting to both are provably
//! slashable. The harness builds the vote table an adversary needs to form
//! conflicting quorums at a level and counts who it exposes.

use std::fmt;
use std::str::FromStr;

use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multilevel::{
    forced_overlap, minimizing_pair, witness_for_pair, MultilevelSystem, Witness,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Vote {
    #[default]
    None,
    V,
    VPrime,
    Both,
}

impl Vote {
    fn for_v(self) -> bool {
        matches!(self, Vote::V | Vote::Both)
    }

    fn for_v_prime(self) -> bool {
        matches!(self, Vote::VPrime | Vote::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Equivocate on a pair of committee quorums meeting in the fewest committees.
    MinimalPair,
    /// Equivocate on two committee quorums drawn independently and uniformly.
    RandomPair,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::MinimalPair, Strategy::RandomPair];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::MinimalPair => "minimal-pair",
            Strategy::RandomPair => "random-pair",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimal-pair" => Ok(Strategy::MinimalPair),
            "random-pair" => Ok(Strategy::RandomPair),
            other => Err(Error::invalid(format!(
                "unknown strategy {other:?} (expected minimal-pair or random-pair)"
            ))),
        }
    }
}

/// Who attested to what at one level, for one pair of committee quorums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttestationScenario {
    pub level: usize,
    pub quorum_pair: (usize, usize),
    /// Processes controlled by the adversary, ascending.
    pub byzantine: Vec<u32>,
    /// Indexed by process identity.
    pub votes: Vec<Vote>,
}

impl AttestationScenario {
    /// The adversary's scenario for a witness: `s` attests `v`, `t` attests `v'`,
    /// and the processes in both are byzantine and sign both.
    pub fn equivocation(sys: &MultilevelSystem, w: &Witness) -> Self {
        let mut votes = vec![Vote::None; sys.assignment().process_count() as usize];
        for &p in &w.s {
            votes[p as usize] = Vote::V;
        }
        let mut byzantine = Vec::new();
        for &p in &w.t {
            let slot = &mut votes[p as usize];
            *slot = match *slot {
                Vote::V => {
                    byzantine.push(p);
                    Vote::Both
                }
                _ => Vote::VPrime,
            };
        }
        byzantine.sort_unstable();
        AttestationScenario {
            level: w.level,
            quorum_pair: w.quorum_pair,
            byzantine,
            votes,
        }
    }

    /// Everyone is honest: `s` attests `v` and the rest of `t` attests `v'`.
    pub fn honest(sys: &MultilevelSystem, w: &Witness) -> Self {
        let mut votes = vec![Vote::None; sys.assignment().process_count() as usize];
        for &p in &w.s {
            votes[p as usize] = Vote::V;
        }
        for &p in &w.t {
            if votes[p as usize] == Vote::None {
                votes[p as usize] = Vote::VPrime;
            }
        }
        AttestationScenario {
            level: w.level,
            quorum_pair: w.quorum_pair,
            byzantine: Vec::new(),
            votes,
        }
    }

    pub fn equivocators(&self) -> Vec<u32> {
        (0..self.votes.len() as u32)
            .filter(|&p| self.votes[p as usize] == Vote::Both)
            .collect()
    }

    pub fn slashed_count(&self) -> usize {
        self.votes.iter().filter(|&&v| v == Vote::Both).count()
    }

    /// Whether every committee of the `v` quorum and of the `v'` quorum reaches its threshold.
    pub fn quorums_formed(&self, sys: &MultilevelSystem) -> Result<(bool, bool)> {
        let level = sys.level(self.level)?;
        let quorums = level.system().quorums();
        let forms = |qi: usize, pick: fn(Vote) -> bool| -> Result<bool> {
            let q = quorums.get(qi).ok_or(Error::UnknownElement(qi))?;
            Ok(q.iter().all(|&c| {
                let members = sys.assignment().members(c as usize);
                let size = members.len() as u64;
                let votes = members.filter(|&p| pick(self.votes[p as usize])).count() as u64;
                votes >= level.threshold(size)
            }))
        };
        Ok((
            forms(self.quorum_pair.0, Vote::for_v)?,
            forms(self.quorum_pair.1, Vote::for_v_prime)?,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlashingReport {
    pub level: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub quorum_pair: (usize, usize),
    pub shared_committees: usize,
    pub quorums_formed: (bool, bool),
    pub slashed_count: u64,
    /// Process-level slashability of the level.
    pub analytic_lower_bound: u64,
    /// Whether `analytic_lower_bound` is the exact equal-size value.
    pub bound_exact: bool,
    /// `sum max(0, 2 ceil(r|C|) - |C|)` over the committees this pair shares.
    pub pair_lower_bound: u64,
}

fn pick_pair(
    sys: &MultilevelSystem,
    j: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<(usize, usize)> {
    match strategy {
        Strategy::MinimalPair => minimizing_pair(sys, j),
        Strategy::RandomPair => {
            let len = sys.level(j)?.system().len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            Ok((rng.gen_range(0..len), rng.gen_range(0..len)))
        }
    }
}

pub fn run_equivocation(
    sys: &MultilevelSystem,
    j: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<SlashingReport> {
    let pair = pick_pair(sys, j, strategy, seed)?;
    let w = witness_for_pair(sys, j, pair)?;
    let scenario = AttestationScenario::equivocation(sys, &w);
    report(sys, strategy, seed, &w, &scenario)
}

/// As [`run_equivocation`] with the strategy given by name.
pub fn run_equivocation_named(
    sys: &MultilevelSystem,
    j: usize,
    strategy: &str,
    seed: u64,
) -> Result<SlashingReport> {
    run_equivocation(sys, j, strategy.parse()?, seed)
}

fn report(
    sys: &MultilevelSystem,
    strategy: Strategy,
    seed: u64,
    w: &Witness,
    scenario: &AttestationScenario,
) -> Result<SlashingReport> {
    let level = sys.level(w.level)?;
    let (a, b) = &w.committees;
    let shared: Vec<u32> = a
        .iter()
        .copied()
        .filter(|c| b.binary_search(c).is_ok())
        .collect();
    let pair_lower_bound = shared
        .iter()
        .map(|&c| forced_overlap(sys.assignment().size(c as usize), &level.r))
        .sum();
    let bound = sys.process_slashability(w.level)?;
    Ok(SlashingReport {
        level: w.level,
        strategy,
        seed,
        quorum_pair: w.quorum_pair,
        shared_committees: shared.len(),
        quorums_formed: scenario.quorums_formed(sys)?,
        slashed_count: scenario.slashed_count() as u64,
        analytic_lower_bound: bound.value.to_u64().expect("bound fits in u64"),
        bound_exact: bound.exact,
        pair_lower_bound,
    })
}

/// One report per level and strategy, levels outermost.
pub fn sweep_levels(
    sys: &MultilevelSystem,
    strategies: &[Strategy],
    seed: u64,
) -> Result<Vec<SlashingReport>> {
    let mut out = Vec::new();
    for j in 1..=sys.level_count() {
        for &s in strategies {
            out.push(run_equivocation(sys, j, s, seed)?);
        }
    }
    Ok(out)
}

pub fn reports_to_json(reports: &[SlashingReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialise");
    s.push('\n');
    s
}

pub fn reports_to_csv(reports: &[SlashingReport]) -> String {
    let mut s = String::from("level,strategy,slashed_count,bound\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.level, r.strategy, r.slashed_count, r.analytic_lower_bound
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilevel::{MultilevelConfig, Variant};
    use crate::rational::from_ratio;

    fn sys(
        n: u64,
        k: u32,
        d: &[u32],
        delta: Option<Vec<u64>>,
        variant: Variant,
    ) -> MultilevelSystem {
        let cfg = MultilevelConfig {
            n,
            p: from_ratio(3, 4),
            k,
            q: 2,
            d: d.to_vec(),
            r: vec![from_ratio(3, 5); d.len()],
            delta,
        };
        MultilevelSystem::build(&cfg, variant).unwrap()
    }

    #[test]
    fn minimal_pair_matches_formula() {
        let s = sys(150, 3, &[2], None, Variant::Full);
        for seed in 0..20 {
            let r = run_equivocation(&s, 1, Strategy::MinimalPair, seed).unwrap();
            assert_eq!(r.quorums_formed, (true, true));
            assert_eq!(r.slashed_count, 6);
            assert_eq!(r.analytic_lower_bound, 6);
            assert!(r.bound_exact);
            assert_eq!(r.shared_committees, 3);
        }
    }

    #[test]
    fn random_pairs_meet_bounds() {
        for (k, d, n) in [
            (3u32, vec![2u32], 150u64),
            (4, vec![3], 310),
            (5, vec![3, 4], 630),
        ] {
            let s = sys(n, k, &d, None, Variant::Full);
            for seed in 0..200 {
                for j in 1..=d.len() {
                    let r = run_equivocation(&s, j, Strategy::RandomPair, seed).unwrap();
                    assert_eq!(r.quorums_formed, (true, true));
                    assert!(r.slashed_count >= r.analytic_lower_bound);
                    assert!(r.slashed_count >= r.pair_lower_bound);
                }
            }
        }
    }

    #[test]
    fn uneven_committees_meet_generalized_bound() {
        let s = sys(157, 3, &[2], None, Variant::Full);
        for seed in 0..50 {
            let r = run_equivocation(&s, 1, Strategy::RandomPair, seed).unwrap();
            assert!(!r.bound_exact);
            assert!(r.slashed_count >= r.pair_lower_bound);
            assert!(r.pair_lower_bound >= r.analytic_lower_bound);
        }
    }

    #[test]
    fn honest_votes_expose_nobody() {
        let s = sys(150, 3, &[2], None, Variant::Full);
        let pair = minimizing_pair(&s, 1).unwrap();
        let w = witness_for_pair(&s, 1, pair).unwrap();
        let sc = AttestationScenario::honest(&s, &w);
        assert_eq!(sc.slashed_count(), 0);
        assert!(sc.equivocators().is_empty());
        let formed = sc.quorums_formed(&s).unwrap();
        assert!(!(formed.0 && formed.1));
    }

    #[test]
    fn equivocators_are_byzantine() {
        let s = sys(150, 3, &[2], None, Variant::Full);
        let w = witness_for_pair(&s, 1, (2, 9)).unwrap();
        let sc = AttestationScenario::equivocation(&s, &w);
        assert_eq!(sc.equivocators(), sc.byzantine);
        assert_eq!(sc.slashed_count(), w.overlap);
    }

    #[test]
    fn unknown_strategy() {
        let s = sys(150, 3, &[2], None, Variant::Full);
        assert!(matches!(
            run_equivocation_named(&s, 1, "honest-ish", 0),
            Err(Error::InvalidArgs(_))
        ));
        assert_eq!(
            "random-pair".parse::<Strategy>().unwrap(),
            Strategy::RandomPair
        );
    }

    #[test]
    fn sweep_bounds_increase() {
        let s = sys(63 * 5, 5, &[3, 4], None, Variant::Full);
        let reports = sweep_levels(&s, &Strategy::ALL, 4).unwrap();
        assert_eq!(reports.len(), 4);
        let bounds: Vec<u64> = reports.iter().map(|r| r.analytic_lower_bound).collect();
        assert_eq!(bounds, [3, 3, 15, 15]);
        let single = sweep_levels(
            &sys(150, 3, &[2], None, Variant::Full),
            &[Strategy::MinimalPair],
            0,
        )
        .unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn sampled_bound_not_below_full() {
        let full = sys(150, 3, &[2], None, Variant::Full);
        let sampled = sys(150, 3, &[2], Some(vec![3]), Variant::Sampled { seed: 5 });
        let f = run_equivocation(&full, 1, Strategy::MinimalPair, 0).unwrap();
        let s = run_equivocation(&sampled, 1, Strategy::MinimalPair, 0).unwrap();
        assert!(s.slashed_count >= f.slashed_count);
        assert!(s.analytic_lower_bound >= f.analytic_lower_bound);
    }

    #[test]
    fn csv_and_json() {
        let s = sys(150, 3, &[2], None, Variant::Full);
        let reports = sweep_levels(&s, &Strategy::ALL, 1).unwrap();
        let csv = reports_to_csv(&reports);
        assert!(csv.starts_with("level,strategy,slashed_count,bound\n1,minimal-pair,6,6\n"));
        let json: serde_json::Value = serde_json::from_str(&reports_to_json(&reports)).unwrap();
        assert_eq!(json[0]["strategy"], "minimal-pair");
        assert_eq!(json[0]["quorums_formed"], serde_json::json!([true, true]));
    }
}
