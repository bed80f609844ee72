//! The `pgquorum` command line.
//!
//! Every command writes its report to `-o FILE` or stdout. With `-o` (or an
//! explicit `--manifest`) a run manifest is written next to it recording the
//! command, arguments, seed, tool version and SHA-256 of every output.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 resource cap
//! exceeded, 4 subspace sampling exhausted.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::availability::{self, AvailabilityReport, SamplingMode};
use crate::error::Error;
use crate::multilevel::{
    minimizing_pair, optimality_ratio, slash_msg_exponent, slashability_formula,
    slashing_upper_bound, MultilevelConfig, MultilevelSystem, Variant,
};
use crate::par::Exec;
use crate::projective::{self, DEFAULT_ENUMERATION_CAP};
use crate::quorum::DEFAULT_PAIR_BUDGET;
use crate::rational::{self, Rational};
use crate::sim::{self, Strategy};
use crate::Field;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_SAMPLING: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pgquorum",
    version,
    about = "Multilevel committee quorum systems from projective spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count or list the d-dimensional subspaces of PG(k, q).
    Pg {
        #[command(subcommand)]
        action: PgAction,
    },
    /// Build a multilevel system from a TOML config.
    Build(BuildArgs),
    /// Per-level metrics of a system file.
    Metrics(MetricsArgs),
    /// Analytic and Monte Carlo availability of a system file.
    Availability(AvailabilityArgs),
    /// Equivocation scenarios on a system file.
    Simulate(SimulateArgs),
    /// Optimality ratio of the construction over a range of field orders.
    Optimality(OptimalityArgs),
}

#[derive(Subcommand, Debug)]
pub enum PgAction {
    Count(PgArgs),
    Enum(PgArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Full,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    CommitteeCounts,
    PerProcess,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    MinimalPair,
    RandomPair,
    All,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// Manifest path; defaults to `<output>.manifest.json` when `-o` is given.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PgArgs {
    #[arg(short = 'k')]
    pub k: u32,
    #[arg(short = 'q')]
    pub q: u32,
    #[arg(short = 'd')]
    pub d: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest enumeration allowed.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-level subspaces drawn through each point, e.g. `8,8,8`. Overrides the config.
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<u64>>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    pub system: PathBuf,
    /// Largest number of quorum pairs checked exhaustively.
    #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
    pub budget: u64,
    /// Pairs sampled when a level exceeds the budget.
    #[arg(long, default_value_t = 10_000)]
    pub pairs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct AvailabilityArgs {
    pub system: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Single level to analyse (1-based); all levels when absent.
    #[arg(long)]
    pub level: Option<usize>,
    /// Process availability probability, overriding the system's `p`.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long, value_enum, default_value = "committee-counts")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub system: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct OptimalityArgs {
    #[arg(short = 'k')]
    pub k: u32,
    #[arg(short = 'd')]
    pub d: u32,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,7,8,9,11,13,16")]
    pub q: Vec<u32>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: Output,
}

/// A failed command and its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeOverflow { .. } | Error::BudgetExceeded { .. } => EXIT_CAP,
            Error::SamplingExhausted { .. } => EXIT_SAMPLING,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<OutputChecksum>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct OutputChecksum {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let recorded: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, &recorded, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: &Cli, args: &[String], stdout: &mut dyn Write) -> CliResult<()> {
    let (name, seed, out, body) = match &cli.command {
        Command::Pg { action } => {
            let (name, a) = match action {
                PgAction::Count(a) => ("pg count", a),
                PgAction::Enum(a) => ("pg enum", a),
            };
            let body = if name == "pg count" {
                pg_count(a)?
            } else {
                pg_enum(a)?
            };
            (name, None, &a.out, body)
        }
        Command::Build(a) => ("build", Some(a.seed), &a.out, build(a)?),
        Command::Metrics(a) => ("metrics", Some(a.seed), &a.out, metrics(a)?),
        Command::Availability(a) => ("availability", Some(a.seed), &a.out, availability(a)?),
        Command::Simulate(a) => ("simulate", Some(a.seed), &a.out, simulate(a)?),
        Command::Optimality(a) => ("optimality", None, &a.out, optimality(a)?),
    };
    let path = match &out.output {
        Some(p) => {
            fs::write(p, &body).map_err(|e| io_error(p, e))?;
            p.display().to_string()
        }
        None => {
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| io_error(Path::new("-"), e))?;
            "-".to_string()
        }
    };
    let manifest_path = out.manifest.clone().or_else(|| {
        out.output.as_ref().map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    if let Some(mp) = manifest_path {
        let manifest = RunManifest {
            command: name.to_string(),
            args: args.to_vec(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: vec![OutputChecksum {
                path,
                sha256: sha256_hex(body.as_bytes()),
            }],
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        fs::write(&mp, text).map_err(|e| io_error(&mp, e))?;
    }
    Ok(())
}

fn exact(v: &Rational) -> Value {
    json!({ "exact": rational::render(v), "decimal": rational::to_f64(v) })
}

fn to_json_line(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

fn check_pg(a: &PgArgs) -> CliResult<Field> {
    if a.d > a.k {
        return Err(Error::invalid(format!("d = {} exceeds k = {}", a.d, a.k)).into());
    }
    Ok(Field::new(a.q)?)
}

fn pg_count(a: &PgArgs) -> CliResult<String> {
    check_pg(a)?;
    let count = projective::gaussian_binomial(a.k + 1, a.d + 1, a.q);
    let points = projective::point_count(a.k, a.q);
    Ok(match a.format {
        Format::Json => to_json_line(&json!({
            "k": a.k, "q": a.q, "d": a.d,
            "count": count.to_string(),
            "points": points.to_string(),
            "through_point": projective::count_subspaces_through_point(a.k, a.d, a.q).to_string(),
        })),
        Format::Csv => format!("k,q,d,count\n{},{},{},{}\n", a.k, a.q, a.d, count),
    })
}

fn pg_enum(a: &PgArgs) -> CliResult<String> {
    let field = check_pg(a)?;
    let subspaces =
        projective::enumerate_subspaces_with_cap(a.k as usize, a.d as usize, &field, a.cap)?;
    let basis = |s: &projective::Subspace| -> Vec<Vec<usize>> {
        s.basis()
            .iter()
            .map(|row| row.iter().map(|e| e.index()).collect())
            .collect()
    };
    Ok(match a.format {
        Format::Json => {
            let items: Vec<Value> = subspaces
                .iter()
                .enumerate()
                .map(|(i, s)| json!({ "index": i, "basis": basis(s), "points": s.point_indices() }))
                .collect();
            to_json_line(
                &json!({ "k": a.k, "q": a.q, "d": a.d, "count": subspaces.len(), "subspaces": items }),
            )
        }
        Format::Csv => {
            let mut s = String::from("index,basis,points\n");
            for (i, sub) in subspaces.iter().enumerate() {
                let rows: Vec<String> = basis(sub)
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                let pts: Vec<String> = sub.point_indices().iter().map(|p| p.to_string()).collect();
                s.push_str(&format!("{},{},{}\n", i, rows.join(";"), pts.join(" ")));
            }
            s
        }
    })
}

fn build(a: &BuildArgs) -> CliResult<String> {
    let mut config = MultilevelConfig::from_path(&a.config)?;
    if let Some(delta) = &a.delta {
        config.delta = Some(delta.clone());
        config.validate()?;
    }
    let variant = match a.variant {
        VariantArg::Full => Variant::Full,
        VariantArg::Sampled => Variant::Sampled { seed: a.seed },
    };
    let sys = MultilevelSystem::build_with(&config, variant, a.cap, Exec::default())?;
    Ok(sys.to_json())
}

fn load_system(path: &Path) -> CliResult<MultilevelSystem> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(MultilevelSystem::from_json(&text)?)
}

fn metrics(a: &MetricsArgs) -> CliResult<String> {
    let sys = load_system(&a.system)?;
    let cfg = sys.config();
    let m = sys.assignment().len() as u64;
    let c = sys.assignment().uniform_size();
    let mut levels = Vec::new();
    let mut rows = vec!["level,d,r,quorums,msg,load,slash_formula,slash_observed,process_slash,optimality_ratio,upper_bound,exponent".to_string()];
    for j in 1..=sys.level_count() {
        let level = sys.level(j)?;
        let system = level.system();
        let msg = system.msg_complexity() as u64;
        let load = system.load();
        let formula = slashability_formula(cfg.k, cfg.q, level.d)?;
        let observed = if system.pair_count() <= a.budget {
            let min = system.slashability_bruteforce_with(a.budget, Exec::default())?;
            json!({ "method": "bruteforce", "value": min.size, "pair": min.pair, "pairs_checked": system.pair_count() })
        } else {
            let s = system.slashability_sampled(a.pairs, a.seed, Exec::default())?;
            json!({
                "method": "sampled",
                "upper_bound": s.upper_bound,
                "pair": s.pair,
                "pairs_checked": s.pairs_checked,
                "mean_intersection": s.mean_intersection,
                "seed": s.seed,
                "budget": a.budget,
            })
        };
        let witness = match sys.variant() {
            Variant::Full => {
                let (x, y) = minimizing_pair(&sys, j)?;
                json!({ "pair": [x, y], "intersection": system.intersection_size(x, y) })
            }
            Variant::Sampled { .. } => Value::Null,
        };
        let process = sys.process_slashability(j)?;
        let ratio = optimality_ratio(cfg.k, cfg.q, level.d)?;
        let c_used = c.unwrap_or_else(|| sys.assignment().min_size());
        let mu = rational::from_int(msg);
        let upper = slashing_upper_bound(&level.r, c_used, &mu, &load)?;
        let exponent = slash_msg_exponent(cfg.k, level.d)?;
        let observed_value = observed
            .get("value")
            .or_else(|| observed.get("upper_bound"))
            .cloned()
            .unwrap_or(Value::Null);
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            j,
            level.d,
            rational::render(&level.r),
            system.len(),
            msg,
            rational::render(&load),
            formula,
            observed_value,
            process.value,
            rational::render(&ratio),
            rational::render(&upper),
            rational::render(&exponent)
        ));
        levels.push(json!({
            "level": j,
            "d": level.d,
            "r": exact(&level.r),
            "quorums": system.len(),
            "msg": msg,
            "load": exact(&load),
            "msg_times_load": exact(&(&mu * &load)),
            "committee_slashability": { "formula": formula.to_string(), "observed": observed, "witness": witness },
            "process_slashability": { "value": process.value.to_string(), "exact": process.exact },
            "optimality_ratio": exact(&ratio),
            "upper_bound": exact(&upper),
            "upper_bound_committee_size": c_used,
            "exponent": exact(&exponent),
        }));
    }
    Ok(match a.format {
        Format::Json => to_json_line(&json!({
            "committees": m,
            "n": cfg.n,
            "uniform_committee_size": c,
            "levels": levels,
        })),
        Format::Csv => rows.join("\n") + "\n",
    })
}

fn availability(a: &AvailabilityArgs) -> CliResult<String> {
    let sys = load_system(&a.system)?;
    let p = a.p.as_deref().map(rational::parse).transpose()?;
    let mode = match a.mode {
        ModeArg::CommitteeCounts => SamplingMode::CommitteeCounts,
        ModeArg::PerProcess => SamplingMode::PerProcess,
    };
    let levels: Vec<usize> = match a.level {
        Some(j) => vec![j],
        None => (1..=sys.level_count()).collect(),
    };
    let reports: Vec<AvailabilityReport> = levels
        .iter()
        .map(|&j| {
            availability::availability_monte_carlo_with(
                &sys,
                j,
                p.as_ref(),
                a.trials,
                a.seed,
                mode,
                Exec::default(),
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(match a.format {
        Format::Json => to_json_line(&reports),
        Format::Csv => {
            let mut s = String::from("level,p,r,trials,successes,mc_estimate,wilson_low,wilson_high,analytic_lower_bound\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.level,
                    r.p,
                    r.r,
                    r.trials,
                    r.successes,
                    r.mc_estimate,
                    r.wilson_low,
                    r.wilson_high,
                    r.analytic_lower_bound
                ));
            }
            s
        }
    })
}

fn simulate(a: &SimulateArgs) -> CliResult<String> {
    let sys = load_system(&a.system)?;
    let strategies: Vec<Strategy> = match a.strategy {
        StrategyArg::MinimalPair => vec![Strategy::MinimalPair],
        StrategyArg::RandomPair => vec![Strategy::RandomPair],
        StrategyArg::All => Strategy::ALL.to_vec(),
    };
    let reports = match a.level {
        Some(j) => strategies
            .iter()
            .map(|&s| sim::run_equivocation(&sys, j, s, a.seed))
            .collect::<Result<Vec<_>, _>>()?,
        None => sim::sweep_levels(&sys, &strategies, a.seed)?,
    };
    Ok(match a.format {
        Format::Json => sim::reports_to_json(&reports),
        Format::Csv => sim::reports_to_csv(&reports),
    })
}

fn optimality(a: &OptimalityArgs) -> CliResult<String> {
    let mut rows = Vec::new();
    for &q in &a.q {
        Field::new(q)?;
        let ratio = optimality_ratio(a.k, q, a.d)?;
        rows.push((q, ratio));
    }
    Ok(match a.format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(q, r)| json!({ "q": q, "ratio": exact(r) }))
                .collect();
            to_json_line(&json!({ "k": a.k, "d": a.d, "rows": items }))
        }
        Format::Csv => {
            let mut s = String::from("k,d,q,ratio,decimal\n");
            for (q, r) in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    a.k,
                    a.d,
                    q,
                    rational::render(r),
                    rational::to_f64(r)
                ));
            }
            s
        }
    })
}
