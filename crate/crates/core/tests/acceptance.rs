//! Acceptance criteria 1 through 10. Each check prints one PASS/FAIL line.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num::{BigUint, ToPrimitive};
use pgquorum::availability::{
    self, availability_lower_bound, availability_monte_carlo_with, committee_failure,
    required_committee_size, sizing_coefficient, SamplingMode,
};
use pgquorum::multilevel::{
    optimality_ratio, slashing_upper_bound, worst_case_witness, MultilevelConfig, MultilevelSystem,
    Variant,
};
use pgquorum::projective::{enumerate_subspaces, gaussian_binomial, sharpness_pair};
use pgquorum::rational::{self, from_int, from_ratio};
use pgquorum::sim::{run_equivocation, Strategy};
use pgquorum::{Exec, Field, Rational};

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Gaussian binomial by the product formula in 128-bit integers.
fn gaussian_oracle(s: u32, r: u32, q: u128) -> u128 {
    if r > s {
        return 0;
    }
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..r {
        num *= q.pow(s - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    num / den
}

fn slash_oracle(k: u32, d: u32, q: u128) -> u128 {
    (q.pow(2 * d - k + 1) - 1) / (q - 1)
}

fn config(n: u64, k: u32, q: u32, d: &[u32], r: Rational, p: Rational) -> MultilevelConfig {
    MultilevelConfig {
        n,
        p,
        k,
        q,
        d: d.to_vec(),
        r: vec![r; d.len()],
        delta: None,
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut cases = Vec::new();
    for q in [2u32, 3] {
        for k in 0..=4u32 {
            for d in 0..=k {
                cases.push((k, d, q));
            }
        }
    }
    for q in [4u32, 5] {
        for d in 0..=2 {
            cases.push((3, d, q));
        }
    }
    for &(k, d, q) in &cases {
        let field = Field::new(q).map_err(|e| e.to_string())?;
        let subs =
            enumerate_subspaces(k as usize, d as usize, &field).map_err(|e| e.to_string())?;
        let oracle = gaussian_oracle(k + 1, d + 1, q as u128);
        ensure(subs.len() as u128 == oracle, || {
            format!("(k={k}, d={d}, q={q}): {} != {oracle}", subs.len())
        })?;
        ensure(
            gaussian_binomial(k + 1, d + 1, q) == BigUint::from(oracle),
            || format!("gaussian_binomial({k}, {d}, {q})"),
        )?;
        let distinct: HashSet<_> = subs.iter().collect();
        ensure(distinct.len() == subs.len(), || {
            format!("duplicates at (k={k}, d={d}, q={q})")
        })?;
        ensure(subs.iter().all(|s| s.dim() == d as isize), || {
            format!("wrong dimension at (k={k}, d={d}, q={q})")
        })?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{} parameter sets in {took:.2?}", cases.len()))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    for (s, r, want) in [(8u32, 5u32, 97155u64), (8, 6, 10795), (8, 7, 255)] {
        ensure(gaussian_binomial(s, r, 2) == BigUint::from(want), || {
            format!("gaussian_binomial({s}, {r}, 2)")
        })?;
        ensure(gaussian_oracle(s, r, 2) == want as u128, || {
            format!("oracle({s}, {r}, 2)")
        })?;
    }
    let field = Field::new(2).unwrap();
    for (d, want) in [(6usize, 255usize), (4, 97155)] {
        let subs = enumerate_subspaces(7, d, &field).map_err(|e| e.to_string())?;
        ensure(subs.len() == want, || {
            format!("d={d}: enumerated {}", subs.len())
        })?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!("97155/10795/255, enumeration in {took:.2?}"))
}

fn criterion_3() -> Check {
    for (k, d, q) in [(3u32, 2u32, 2u32), (3, 2, 3), (4, 3, 2), (5, 3, 2)] {
        let m = gaussian_oracle(k + 1, 1, q as u128) as u64;
        let sys = MultilevelSystem::build(
            &config(m, k, q, &[d], from_ratio(3, 5), from_ratio(3, 4)),
            Variant::Full,
        )
        .map_err(|e| e.to_string())?;
        let level = sys.level(1).unwrap().system();
        // Direct pairwise scan over sorted member lists.
        let qs = level.quorums();
        let mut min = usize::MAX;
        for a in 0..qs.len() {
            for b in a + 1..qs.len() {
                let set: HashSet<u32> = qs[a].iter().copied().collect();
                min = min.min(qs[b].iter().filter(|x| set.contains(x)).count());
            }
        }
        let oracle = slash_oracle(k, d, q as u128) as usize;
        ensure(min == oracle, || {
            format!("(k={k}, d={d}, q={q}): oracle scan {min} != {oracle}")
        })?;
        let brute = level.slashability_bruteforce().map_err(|e| e.to_string())?;
        ensure(brute.size == oracle, || {
            format!(
                "(k={k}, d={d}, q={q}): bruteforce {} != {oracle}",
                brute.size
            )
        })?;
    }
    let sys = MultilevelSystem::build(
        &config(255, 7, 2, &[4, 5, 6], from_ratio(3, 5), from_ratio(3, 4)),
        Variant::Full,
    )
    .map_err(|e| e.to_string())?;
    let field = Field::new(2).unwrap();
    let mut row = Vec::new();
    for (j, d) in [(1usize, 4u32), (2, 5), (3, 6)] {
        let want = slash_oracle(7, d, 2) as usize;
        let level = sys.level(j).unwrap().system();
        let s = level
            .slashability_sampled(10_000, 1000 + j as u64, Exec::default())
            .map_err(|e| e.to_string())?;
        ensure(s.pairs_checked == 10_000, || {
            format!("level {j}: checked {}", s.pairs_checked)
        })?;
        ensure(s.upper_bound >= want, || {
            format!(
                "level {j}: sampled pair meets in {} < {want}",
                s.upper_bound
            )
        })?;
        let (u, w) = sharpness_pair(&field, 7, d as usize).map_err(|e| e.to_string())?;
        let (pu, pw) = (u.point_indices(), w.point_indices());
        let set: HashSet<u32> = pu.iter().copied().collect();
        let inter = pw.iter().filter(|x| set.contains(x)).count();
        ensure(inter == want, || {
            format!("level {j}: witness meets in {inter} != {want}")
        })?;
        ensure(
            level.position(&pu).is_some() && level.position(&pw).is_some(),
            || format!("level {j}: witness not in system"),
        )?;
        row.push(inter);
    }
    ensure(row == [3, 15, 63], || format!("witness row {row:?}"))?;
    Ok(format!("4 exhaustive cases, k=7 witness row {row:?}"))
}

fn criterion_4() -> Check {
    let (r, c, slash) = (from_ratio(3, 5), 10u64, 3u64);
    let sys = MultilevelSystem::build(
        &config(15 * c, 3, 2, &[2], r.clone(), from_ratio(3, 4)),
        Variant::Full,
    )
    .map_err(|e| e.to_string())?;
    let oracle = ((from_int(2) * &r - from_int(1)) * from_int(c) * from_int(slash))
        .to_integer()
        .to_u64()
        .unwrap();
    let w = worst_case_witness(&sys, 1).map_err(|e| e.to_string())?;
    let direct = w.s.iter().filter(|p| w.t.binary_search(p).is_ok()).count() as u64;
    ensure(oracle == 6 && direct == 6 && w.overlap as u64 == 6, || {
        format!("|S n T| = {direct}, oracle {oracle}")
    })?;
    ensure(
        sys.process_slashability_strict(1)
            .map_err(|e| e.to_string())?
            == BigUint::from(6u32),
        || "formula".into(),
    )?;
    for seed in 0..20u64 {
        let rep = run_equivocation(&sys, 1, Strategy::MinimalPair, seed * 7919 + 1)
            .map_err(|e| e.to_string())?;
        ensure(
            rep.slashed_count == 6 && rep.quorums_formed == (true, true),
            || format!("seed {seed}: {rep:?}"),
        )?;
    }
    Ok("|S n T| = 6 and 20 minimal-pair runs slash 6".into())
}

fn criterion_5() -> Check {
    let qs = [2u32, 3, 4, 5, 7, 8, 9, 11, 13, 16];
    let r = from_ratio(3, 5);
    let c = 10u64;
    let pairs = [
        (3u32, 2u32),
        (4, 3),
        (5, 3),
        (5, 4),
        (6, 4),
        (7, 4),
        (7, 5),
        (7, 6),
    ];
    for &(k, d) in &pairs {
        let mut prev: Option<Rational> = None;
        for &q in &qs {
            let qq = q as u128;
            let msg = (qq.pow(d + 1) - 1) / (qq - 1);
            let m = (qq.pow(k + 1) - 1) / (qq - 1);
            let load = Rational::new((msg as i128).into(), (m as i128).into());
            let achieved = (from_int(2) * &r - from_int(1))
                * from_int(c)
                * from_int(slash_oracle(k, d, qq) as i128);
            let upper = slashing_upper_bound(&r, c, &from_int(msg as i128), &load)
                .map_err(|e| e.to_string())?;
            let ratio = optimality_ratio(k, q, d).map_err(|e| e.to_string())?;
            ensure(&achieved / &upper == ratio, || {
                format!("(k={k}, d={d}, q={q}): achieved/upper != ratio")
            })?;
            ensure(ratio < from_int(1), || {
                format!("(k={k}, d={d}, q={q}): ratio >= 1")
            })?;
            if let Some(p) = &prev {
                ensure(ratio > *p, || {
                    format!("(k={k}, d={d}): not increasing at q={q}")
                })?;
            }
            prev = Some(ratio);
        }
    }
    // Measured msg and load of built systems agree with the closed forms.
    for (k, d, q) in [
        (3u32, 2u32, 2u32),
        (3, 2, 3),
        (3, 2, 4),
        (3, 2, 5),
        (4, 3, 2),
        (4, 3, 3),
    ] {
        let m = gaussian_oracle(k + 1, 1, q as u128) as u64;
        let sys = MultilevelSystem::build(
            &config(m * c, k, q, &[d], r.clone(), from_ratio(3, 4)),
            Variant::Full,
        )
        .map_err(|e| e.to_string())?;
        let level = sys.level(1).unwrap().system();
        let msg = from_int(level.msg_complexity() as i64);
        let upper = slashing_upper_bound(&r, c, &msg, &level.load()).map_err(|e| e.to_string())?;
        let achieved = from_int(
            sys.process_slashability_strict(1)
                .map_err(|e| e.to_string())?
                .to_i64()
                .unwrap(),
        );
        ensure(
            &achieved / &upper == optimality_ratio(k, q, d).unwrap(),
            || format!("built (k={k}, d={d}, q={q})"),
        )?;
    }
    let at2 = optimality_ratio(3, 2, 2).unwrap();
    let at16 = optimality_ratio(3, 16, 2).unwrap();
    ensure(at2 == from_ratio(45, 49), || {
        format!("q=2 ratio {}", rational::render(&at2))
    })?;
    ensure(at16 > from_ratio(996, 1000), || {
        format!("q=16 ratio {}", rational::render(&at16))
    })?;
    Ok(format!(
        "{} (k,d) pairs over 10 field orders; q=16 ratio {:.6}",
        pairs.len(),
        rational::to_f64(&at16)
    ))
}

fn criterion_6() -> Check {
    let mut points = 0;
    for (pn, pd) in [(7i64, 10i64), (3, 4), (4, 5)] {
        for (rn, rd) in [(11i64, 20i64), (3, 5), (13, 20)] {
            let (p, r) = (from_ratio(pn, pd), from_ratio(rn, rd));
            if r >= p {
                continue;
            }
            for c in (5..=200u64).step_by(5) {
                let f = committee_failure(c, &r, &p).map_err(|e| e.to_string())?;
                // Independent summation of the failure probability.
                let need = (rn as u64 * c).div_ceil(rd as u64);
                let pf = pn as f64 / pd as f64;
                let mut pmf = (1.0 - pf).powi(c as i32);
                let mut oracle = 0.0;
                for i in 0..need {
                    oracle += pmf;
                    pmf *= (c - i) as f64 / (i + 1) as f64 * pf / (1.0 - pf);
                }
                let exact = f.exact_f64();
                ensure((exact - oracle).abs() <= 1e-9 * oracle + 1e-300, || {
                    format!("c={c}: exact {exact} vs oracle {oracle}")
                })?;
                ensure(f.certified_within_bound(), || {
                    format!(
                        "c={c}, p={pn}/{pd}, r={rn}/{rd}: exact {exact:e} not certified below {:e}",
                        f.bound
                    )
                })?;
                points += 1;
            }
        }
    }
    Ok(format!(
        "{points} grid points, exact <= exp(-a1(r) c) certified"
    ))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let (r, p) = (from_ratio(3, 5), from_ratio(3, 4));
    let sys = MultilevelSystem::build(
        &config(6000, 3, 2, &[2], r.clone(), p.clone()),
        Variant::Full,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        sys.assignment().uniform_size() == Some(400) && sys.assignment().len() == 15,
        || "partition".into(),
    )?;
    let rep = availability_monte_carlo_with(
        &sys,
        1,
        None,
        100_000,
        2024,
        SamplingMode::PerProcess,
        Exec::default(),
    )
    .map_err(|e| e.to_string())?;
    let a1 = rational::to_f64(&availability::a1(&p, &r).unwrap());
    let bound = 1.0 - 15.0 * (-a1 * 400.0).exp();
    ensure((rep.analytic_lower_bound - bound).abs() < 1e-12, || {
        format!("bound {} vs {bound}", rep.analytic_lower_bound)
    })?;
    ensure(rep.mc_estimate + 3.0 * rep.mc_half_width >= bound, || {
        format!(
            "estimate {} + 3 * {} < {bound}",
            rep.mc_estimate, rep.mc_half_width
        )
    })?;
    ensure(rep.mc_estimate >= rep.all_committees_live, || {
        "live-quorum event below all-live event".into()
    })?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    let mut mono = Vec::new();
    for mode in [SamplingMode::CommitteeCounts, SamplingMode::PerProcess] {
        // Committees of 10 put availability well below 1 so the sweep is informative.
        let small = MultilevelSystem::build(
            &config(150, 3, 2, &[2], r.clone(), p.clone()),
            Variant::Full,
        )
        .unwrap();
        let trials = if mode == SamplingMode::PerProcess {
            20_000
        } else {
            100_000
        };
        let mut prev = 0;
        for ps in ["0.7", "0.75", "0.8"] {
            let pv = rational::parse(ps).unwrap();
            let rep = availability_monte_carlo_with(
                &small,
                1,
                Some(&pv),
                trials,
                77,
                mode,
                Exec::default(),
            )
            .map_err(|e| e.to_string())?;
            ensure(rep.successes >= prev, || {
                format!("{mode:?}: not monotone at p={ps}")
            })?;
            prev = rep.successes;
            mono.push(rep.mc_estimate);
        }
    }
    Ok(format!(
        "estimate {} (half-width {:.2e}) vs bound {bound:.12}; monotone {mono:.4?}; {took:.2?}",
        rep.mc_estimate, rep.mc_half_width
    ))
}

fn criterion_8() -> Check {
    let (r, p) = (from_ratio(3, 5), from_ratio(3, 4));
    let full = MultilevelSystem::build(
        &config(150, 3, 2, &[2], r.clone(), p.clone()),
        Variant::Full,
    )
    .unwrap();
    let full_set: HashSet<Vec<u32>> = full
        .level(1)
        .unwrap()
        .system()
        .quorums()
        .iter()
        .cloned()
        .collect();
    let mut min_slash = usize::MAX;
    for seed in 0..50u64 {
        let mut cfg = config(150, 3, 2, &[2], r.clone(), p.clone());
        cfg.delta = Some(vec![3]);
        let sys =
            MultilevelSystem::build(&cfg, Variant::Sampled { seed }).map_err(|e| e.to_string())?;
        let level = sys.level(1).unwrap().system();
        ensure(level.quorums().iter().all(|q| full_set.contains(q)), || {
            format!("seed {seed}: Q' not within Q")
        })?;
        let covered: HashSet<u32> = level.quorums().iter().flatten().copied().collect();
        ensure(covered.len() == 15, || {
            format!("seed {seed}: {} committees covered", covered.len())
        })?;
        let s = level
            .slashability_bruteforce()
            .map_err(|e| e.to_string())?
            .size;
        ensure(s >= 3, || format!("seed {seed}: slashability {s}"))?;
        min_slash = min_slash.min(s);
    }
    Ok(format!("50 seeds, min slashability {min_slash}"))
}

fn criterion_9() -> Check {
    let (r, p) = (from_ratio(3, 5), from_ratio(3, 4));
    let mut rows = Vec::new();
    for n in [1_000u64, 10_000, 100_000] {
        for b in [0.0, 1.0] {
            let c = required_committee_size(b, &r, &p, n).map_err(|e| e.to_string())?;
            let a = sizing_coefficient(b, &r, &p).unwrap();
            let nf = n as f64;
            let guarantee = 1.0 - 1.0 / (a * nf.powf(b) * nf.ln());
            let lb = availability_lower_bound(n, c, &r, &p).map_err(|e| e.to_string())?;
            ensure(lb >= guarantee, || {
                format!("n={n}, b={b}: c={c}, bound {lb} < {guarantee}")
            })?;
            ensure(
                (guarantee - availability::sizing_guarantee(b, &r, &p, n).unwrap()).abs() < 1e-15,
                || "guarantee".into(),
            )?;
            rows.push(c);
        }
    }
    Ok(format!("committee sizes {rows:?}"))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pgquorum"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn criterion_10() -> Check {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        std::fs::write(
            dir.path().join("cfg.toml"),
            "n = 6000\np = \"3/4\"\nk = 3\nq = 2\nd = [2]\nr = [\"3/5\"]\ndelta = [3]\n",
        )
        .unwrap();
        let cmds: [&[&str]; 4] = [
            &[
                "build",
                "cfg.toml",
                "--variant",
                "sampled",
                "--seed",
                "17",
                "-o",
                "sys.json",
            ],
            &["build", "cfg.toml", "--variant", "full", "-o", "full.json"],
            &[
                "availability",
                "sys.json",
                "--trials",
                "20000",
                "--seed",
                "5",
                "-o",
                "avail.json",
            ],
            &["simulate", "full.json", "--seed", "9", "-o", "sim.json"],
        ];
        for args in cmds {
            run_cli(dir.path(), args)?;
        }
        let mut files = Vec::new();
        for name in ["sys.json", "full.json", "avail.json", "sim.json"] {
            let body = std::fs::read(dir.path().join(name)).unwrap();
            let manifest: serde_json::Value = serde_json::from_slice(
                &std::fs::read(dir.path().join(format!("{name}.manifest.json"))).unwrap(),
            )
            .unwrap();
            let recorded = manifest["outputs"][0]["sha256"]
                .as_str()
                .unwrap()
                .to_string();
            ensure(recorded == pgquorum::cli::sha256_hex(&body), || {
                format!("{name}: manifest checksum mismatch")
            })?;
            files.push((body, recorded));
        }
        runs.push(files);
    }
    for (i, name) in ["sys.json", "full.json", "avail.json", "sim.json"]
        .iter()
        .enumerate()
    {
        ensure(runs[0][i] == runs[1][i], || {
            format!("{name} differs between runs")
        })?;
    }
    Ok("build/availability/simulate outputs and checksums identical".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (1, "subspace counts", criterion_1),
        (2, "k=7 level sizes", criterion_2),
        (3, "committee slashability", criterion_3),
        (4, "process slashability", criterion_4),
        (5, "optimality ratio", criterion_5),
        (6, "committee failure bound", criterion_6),
        (7, "availability", criterion_7),
        (8, "sampled variant", criterion_8),
        (9, "sizing rule", criterion_9),
        (10, "determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (id, name, check) in criteria {
        let line = match check() {
            Ok(detail) => format!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed.push(id);
                format!("criterion {id:>2} FAIL  {name}: {why}")
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
