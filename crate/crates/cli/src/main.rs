//! `qpv`: scenario runner for the QPV simulator.
//!
//! `qpv run` executes one protocol/attack scenario (Monte Carlo, exact
//! enumeration, or both) and writes a JSON report; `qpv sweep` varies one
//! of m / n / trials over an inclusive `a..b` range and writes a CSV.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use qpv_core::adversaries::AttackKind;
use qpv_core::analysis::{
    exact_success, inference_error, monte_carlo, sweep, Estimate, ExactResult, SweepParam,
    SweepRow,
};
use qpv_core::protocols::ProtocolKind;
use qpv_core::rng::{splitmix64, RngStream};
use qpv_core::scenario::{run_round, Mode, ScenarioConfig};
use qpv_core::simnet::EventRecord;

#[derive(Parser)]
#[command(
    name = "qpv",
    about = "Simulate 1-D quantum position verification protocols and attacks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write report.json.
    Run(ScenarioArgs),
    /// Sweep m, n or trials over an a..b range and write sweep.csv.
    Sweep(ScenarioArgs),
}

#[derive(Args, Clone, Default)]
struct ScenarioArgs {
    /// Protocol: p1, p1-mod, p2, p2-mod, p1-oracle, p2-oracle.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    /// Attack strategy; omit for the honest prover.
    #[arg(long, value_enum)]
    attack: Option<AttackArg>,
    /// mc, exact, or both.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Monte Carlo trials (sweep: value or a..b range).
    #[arg(long)]
    trials: Option<String>,
    /// Root seed; drawn from system entropy when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Oracle input half-width (sweep: value or a..b range).
    #[arg(long)]
    n: Option<String>,
    /// Entangled-pair budget for the hybrid attack (sweep: value or a..b).
    #[arg(long)]
    m: Option<String>,
    /// Verifier-prover distance.
    #[arg(long)]
    d: Option<f64>,
    /// E0 coordinate, in (0, d).
    #[arg(long = "e0-pos")]
    e0_pos: Option<f64>,
    /// E1 coordinate, in (d, 2d).
    #[arg(long = "e1-pos")]
    e1_pos: Option<f64>,
    /// Local-measurement basis amplitude α (real part).
    #[arg(long)]
    alpha: Option<f64>,
    /// Local-measurement basis amplitude β (real part).
    #[arg(long)]
    beta: Option<f64>,
    /// Output path (default report.json / sweep.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same fields; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ProtocolArg {
    P1,
    #[value(name = "p1-mod")]
    P1Mod,
    P2,
    #[value(name = "p2-mod")]
    P2Mod,
    #[value(name = "p1-oracle")]
    P1Oracle,
    #[value(name = "p2-oracle")]
    P2Oracle,
}

impl From<ProtocolArg> for ProtocolKind {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::P1 => ProtocolKind::P1,
            ProtocolArg::P1Mod => ProtocolKind::P1Mod,
            ProtocolArg::P2 => ProtocolKind::P2,
            ProtocolArg::P2Mod => ProtocolKind::P2Mod,
            ProtocolArg::P1Oracle => ProtocolKind::P1Oracle,
            ProtocolArg::P2Oracle => ProtocolKind::P2Oracle,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum AttackArg {
    Honest,
    Intercept,
    #[value(name = "teleport-1epr")]
    Teleport1Epr,
    #[value(name = "2epr")]
    TwoEpr,
    #[value(name = "1epr-heuristic")]
    OneEprHeuristic,
    Local,
    #[value(name = "1epr")]
    OneEpr,
    #[value(name = "5epr")]
    FiveEpr,
    #[value(name = "2n")]
    TwoN,
    Hybrid,
    Full,
    #[value(name = "naive-wait")]
    NaiveWait,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ModeArg {
    Mc,
    Exact,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mc => Mode::Mc,
            ModeArg::Exact => Mode::Exact,
            ModeArg::Both => Mode::Both,
        }
    }
}

/// A flag that is either a plain value or an inclusive `a..b` range.
#[derive(Clone, Copy, Debug)]
enum ValueOrRange {
    Value(u64),
    Range(u64, u64),
}

fn parse_value_or_range(field: &str, s: &str) -> Result<ValueOrRange, String> {
    if let Some((a, b)) = s.split_once("..") {
        let lo: u64 = a
            .trim()
            .parse()
            .map_err(|_| format!("--{field}: bad range start '{a}'"))?;
        let hi: u64 = b
            .trim()
            .parse()
            .map_err(|_| format!("--{field}: bad range end '{b}'"))?;
        if hi < lo {
            return Err(format!("--{field}: empty range {lo}..{hi}"));
        }
        Ok(ValueOrRange::Range(lo, hi))
    } else {
        s.trim()
            .parse()
            .map(ValueOrRange::Value)
            .map_err(|_| format!("--{field}: expected an integer or a..b range, got '{s}'"))
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<qpv_core::scenario::ConfigError> for CliError {
    fn from(e: qpv_core::scenario::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<qpv_core::analysis::AnalysisError> for CliError {
    fn from(e: qpv_core::analysis::AnalysisError) -> Self {
        match e {
            qpv_core::analysis::AnalysisError::InvalidScenario(c) => {
                CliError::Config(c.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn merge_config_file(args: &mut ScenarioArgs, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let obj = v
        .as_object()
        .ok_or_else(|| CliError::config("config file must hold a JSON object"))?;
    let known = [
        "protocol", "attack", "mode", "trials", "seed", "n", "m", "d", "e0-pos", "e1-pos",
        "alpha", "beta", "out",
    ];
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            return Err(CliError::config(format!("unknown config field '{key}'")));
        }
    }
    let get_str = |k: &str| obj.get(k).and_then(|v| v.as_str().map(String::from));
    let get_num_str = |k: &str| {
        obj.get(k).map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    };

    if args.protocol.is_none() {
        if let Some(s) = get_str("protocol") {
            args.protocol = Some(
                ValueEnum::from_str(&s, true)
                    .map_err(|_| CliError::config(format!("config: bad protocol '{s}'")))?,
            );
        }
    }
    if args.attack.is_none() {
        if let Some(s) = get_str("attack") {
            args.attack = Some(
                ValueEnum::from_str(&s, true)
                    .map_err(|_| CliError::config(format!("config: bad attack '{s}'")))?,
            );
        }
    }
    if args.mode.is_none() {
        if let Some(s) = get_str("mode") {
            args.mode = Some(
                ValueEnum::from_str(&s, true)
                    .map_err(|_| CliError::config(format!("config: bad mode '{s}'")))?,
            );
        }
    }
    if args.trials.is_none() {
        args.trials = get_num_str("trials");
    }
    if args.seed.is_none() {
        args.seed = obj.get("seed").and_then(|v| v.as_u64());
    }
    if args.n.is_none() {
        args.n = get_num_str("n");
    }
    if args.m.is_none() {
        args.m = get_num_str("m");
    }
    if args.d.is_none() {
        args.d = obj.get("d").and_then(|v| v.as_f64());
    }
    if args.e0_pos.is_none() {
        args.e0_pos = obj.get("e0-pos").and_then(|v| v.as_f64());
    }
    if args.e1_pos.is_none() {
        args.e1_pos = obj.get("e1-pos").and_then(|v| v.as_f64());
    }
    if args.alpha.is_none() {
        args.alpha = obj.get("alpha").and_then(|v| v.as_f64());
    }
    if args.beta.is_none() {
        args.beta = obj.get("beta").and_then(|v| v.as_f64());
    }
    if args.out.is_none() {
        args.out = get_str("out").map(PathBuf::from);
    }
    Ok(())
}

/// The resolved scenario plus sweep information.
struct Resolved {
    config: ScenarioConfig,
    sweep: Option<(SweepParam, Vec<u64>)>,
    out: PathBuf,
}

fn resolve(mut args: ScenarioArgs, sweeping: bool) -> Result<Resolved, CliError> {
    if let Some(path) = args.config.clone() {
        merge_config_file(&mut args, &path)?;
    }
    let protocol: ProtocolKind = args
        .protocol
        .ok_or_else(|| CliError::config("--protocol is required"))?
        .into();

    let mut ranges: Vec<(SweepParam, u64, u64)> = Vec::new();
    let take = |field: &'static str,
                    param: SweepParam,
                    raw: &Option<String>,
                    ranges: &mut Vec<(SweepParam, u64, u64)>|
     -> Result<Option<u64>, CliError> {
        match raw {
            None => Ok(None),
            Some(s) => match parse_value_or_range(field, s).map_err(CliError::Config)? {
                ValueOrRange::Value(v) => Ok(Some(v)),
                ValueOrRange::Range(a, b) if sweeping => {
                    ranges.push((param, a, b));
                    Ok(None)
                }
                ValueOrRange::Range(..) => Err(CliError::config(format!(
                    "--{field}: ranges are only valid with `qpv sweep`"
                ))),
            },
        }
    };
    let trials_v = take("trials", SweepParam::Trials, &args.trials, &mut ranges)?;
    let n_v = take("n", SweepParam::N, &args.n, &mut ranges)?;
    let m_v = take("m", SweepParam::M, &args.m, &mut ranges)?;

    let seed = args.seed.unwrap_or_else(|| {
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        splitmix64(nanos ^ u64::from(std::process::id()))
    });

    let mut config = ScenarioConfig::new(protocol).with_seed(seed);
    if let Some(t) = trials_v {
        config.trials = t;
    }
    if let Some(n) = n_v {
        config.n = n as usize;
    }
    if let Some(d) = args.d {
        config.d = d;
        config.e0_pos = d / 2.0;
        config.e1_pos = 1.5 * d;
    }
    if let Some(p) = args.e0_pos {
        config.e0_pos = p;
    }
    if let Some(p) = args.e1_pos {
        config.e1_pos = p;
    }
    if let Some(mode) = args.mode {
        config.mode = mode.into();
    }

    let alpha = args.alpha.unwrap_or(1.0);
    let beta = args.beta.unwrap_or(0.0);
    config.attack = match args.attack.unwrap_or(AttackArg::Honest) {
        AttackArg::Honest => None,
        AttackArg::Intercept => Some(AttackKind::P1Intercept),
        AttackArg::Teleport1Epr => Some(AttackKind::P1Teleport1Epr),
        AttackArg::TwoEpr => Some(AttackKind::P1Mod2Epr),
        AttackArg::OneEprHeuristic => Some(AttackKind::P1Mod1Epr),
        AttackArg::Local => Some(AttackKind::P2LocalMeasure {
            alpha: [alpha, 0.0],
            beta: [beta, 0.0],
        }),
        AttackArg::OneEpr => Some(AttackKind::P2OneEpr),
        AttackArg::FiveEpr => Some(AttackKind::P2Mod5Epr),
        AttackArg::TwoN => Some(AttackKind::P1Oracle2n),
        AttackArg::Hybrid => {
            let m = m_v.or_else(|| {
                ranges
                    .iter()
                    .any(|(p, ..)| *p == SweepParam::M)
                    .then_some(0)
            });
            match m {
                Some(m) => Some(AttackKind::P1OracleHybrid { m }),
                None => {
                    return Err(CliError::config(
                        "--attack hybrid requires --m (pair budget)",
                    ))
                }
            }
        }
        AttackArg::Full => Some(AttackKind::P2OracleFull),
        AttackArg::NaiveWait => Some(AttackKind::NaiveWait),
    };

    let sweep = if sweeping {
        match ranges.len() {
            1 => {
                let (param, lo, hi) = ranges[0];
                Some((param, (lo..=hi).collect()))
            }
            0 => {
                return Err(CliError::config(
                    "sweep needs exactly one of --m/--n/--trials as an a..b range",
                ))
            }
            _ => {
                return Err(CliError::config(
                    "sweep accepts only one range; give the others as plain values",
                ))
            }
        }
    } else {
        None
    };

    config.validate()?;
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(if sweeping { "sweep.csv" } else { "report.json" }));
    Ok(Resolved { config, sweep, out })
}

#[derive(Serialize)]
struct ResultRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inference_error: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    config: ScenarioConfig,
    /// Seed of the derived random-oracle table, for oracle protocols.
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_seed: Option<u64>,
    results: Vec<ResultRow>,
    transcript_sample: Vec<EventRecord>,
    wall_time_ms: u128,
}

fn cmd_run(args: ScenarioArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let resolved = resolve(args, false)?;
    let config = resolved.config;

    let estimate = match config.mode {
        Mode::Mc | Mode::Both => Some(monte_carlo(&config, config.trials, config.seed)?),
        Mode::Exact => None,
    };
    let exact = match config.mode {
        Mode::Exact | Mode::Both => Some(exact_success(&config)?),
        Mode::Mc => None,
    };
    let inference = match &config.attack {
        Some(AttackKind::P2LocalMeasure { alpha, beta }) => Some(
            inference_error(
                num_complex::Complex64::new(alpha[0], alpha[1]),
                num_complex::Complex64::new(beta[0], beta[1]),
            )
            .map_err(CliError::from)?,
        ),
        _ => None,
    };

    if let Some(e) = &estimate {
        println!(
            "mc    p_hat = {:.6}  CI [{:.6}, {:.6}]  ({} trials, seed {})",
            e.p_hat, e.ci_lo, e.ci_hi, e.trials, e.seed
        );
    }
    if let Some(x) = &exact {
        println!(
            "exact p = {:.12}  ({} branches, mass {:.12})",
            x.probability, x.branch_count, x.prob_mass
        );
    }
    if let Some(err) = inference {
        println!("inference_error = {err:.6}");
    }

    let mut sample_rng = RngStream::for_trial(config.seed, 0);
    let sample =
        run_round(&config, &mut sample_rng, None).map_err(|e| CliError::Runtime(e.to_string()))?;

    let report = Report {
        oracle_seed: qpv_core::scenario::oracle_seed(&config),
        config,
        results: vec![ResultRow {
            estimate,
            exact,
            inference_error: inference,
        }],
        transcript_sample: sample.transcript.events,
        wall_time_ms: started.elapsed().as_millis(),
    };
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(&resolved.out, json)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", resolved.out.display())))?;
    println!("report written to {}", resolved.out.display());
    Ok(())
}

fn csv_cell_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "param,value,p_hat,ci_lo,ci_hi,trials,successes,exact_probability,branch_count,cond_rate\n",
    );
    for row in rows {
        let e = row.estimate.as_ref();
        let x = row.exact.as_ref();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.param,
            row.value,
            csv_cell_f64(e.map(|e| e.p_hat)),
            csv_cell_f64(e.map(|e| e.ci_lo)),
            csv_cell_f64(e.map(|e| e.ci_hi)),
            e.map(|e| e.trials.to_string()).unwrap_or_default(),
            e.map(|e| e.successes.to_string()).unwrap_or_default(),
            csv_cell_f64(x.map(|x| x.probability)),
            x.map(|x| x.branch_count.to_string()).unwrap_or_default(),
            csv_cell_f64(x.map(|x| x.rate("cond"))),
        ));
    }
    out
}

fn cmd_sweep(args: ScenarioArgs) -> Result<(), CliError> {
    let resolved = resolve(args, true)?;
    let (param, values) = resolved.sweep.expect("sweep resolved a range");
    let rows = sweep(&resolved.config, param, &values)?;
    for row in &rows {
        let mc = row
            .estimate
            .as_ref()
            .map(|e| format!("p_hat {:.6}", e.p_hat))
            .unwrap_or_default();
        let ex = row
            .exact
            .as_ref()
            .map(|x| format!("exact {:.9}", x.probability))
            .unwrap_or_default();
        println!("{} = {:<6} {mc} {ex}", row.param, row.value);
    }
    std::fs::write(&resolved.out, sweep_csv(&rows))
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", resolved.out.display())))?;
    println!("sweep written to {}", resolved.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("runtime failure: {msg}");
            ExitCode::from(3)
        }
    }
}
