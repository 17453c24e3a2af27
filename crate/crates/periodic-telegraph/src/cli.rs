//! Command-line front end.
//!
//! Eight subcommands wire the library together; all numeric output is
//! deterministic for a fixed `--seed`, CSV carries a header row and 17
//! significant digits, JSON numbers round-trip at full double precision.
//!
//! Exit codes: `0` success, `2` input or validation failure (one-line
//! machine-readable error on stderr), `3` a numeric resolution warning
//! escalated by `--strict`, `4` resource cap exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::montecarlo::{self, EnsembleConfig, EnsembleSampler, InitialCondition, State};
use crate::pspm::Pspm;
use crate::rates::RateSpec;
use crate::resonance::{self, BarrierParams};
use crate::{genfun, Error, DEFAULT_STEPS_PER_PERIOD};

#[derive(Parser, Debug)]
#[command(
    name = "periodic-telegraph",
    version,
    about = "Periodically forced two-state Markov chains: stationary measures, Floquet spectra, resonance tuning",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the artifact to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Base seed for simulation commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Escalate numeric resolution warnings to exit status 3.
    #[arg(long, global = true)]
    strict: bool,

    /// Integrator steps per period.
    #[arg(long, global = true, default_value_t = DEFAULT_STEPS_PER_PERIOD)]
    steps_per_period: usize,

    /// Resolution of the discrete approximation chain.
    #[arg(long = "N", global = true, default_value_t = 16384)]
    n_steps: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the periodic stationary measure against the ODE fixed point.
    Pspm(PspmArgs),
    /// Floquet spectrum of the up-crossing generating function.
    Floquet(FloquetArgs),
    /// Discrete-chain monodromy and stationary transition statistics.
    Discrete(DiscreteArgs),
    /// Monte Carlo path ensemble with per-eta MGF estimates.
    Simulate(SimulateArgs),
    /// Tune the half-period (Arrhenius) family: solve E[N_T] = 1 for T.
    #[command(name = "tune-a")]
    TuneA(TuneAArgs),
    /// Tune the constant-trace family: positive root of the cubic.
    #[command(name = "tune-b")]
    TuneB(TuneBArgs),
    /// Mean transitions per period over a log-spaced period grid.
    Figure1(Figure1Args),
    /// Floquet spectra over a grid of eta values (parallel).
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct PspmArgs {
    /// Path to a JSON rate-spec document.
    spec: PathBuf,
    /// Number of sample points over one period.
    #[arg(long, default_value_t = 256)]
    grid: usize,
}

#[derive(Args, Debug)]
struct FloquetArgs {
    spec: PathBuf,
    /// MGF argument; repeat for several values.
    #[arg(long = "eta", required = true)]
    etas: Vec<f64>,
}

#[derive(Args, Debug)]
struct DiscreteArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    spec: PathBuf,
    #[arg(long)]
    paths: usize,
    #[arg(long)]
    horizon: f64,
    /// MGF argument; repeat for several values.
    #[arg(long = "eta")]
    etas: Vec<f64>,
    /// Initial state of each path.
    #[arg(long, value_enum, default_value_t = InitialArg::Stationary)]
    initial: InitialArg,
    /// Also write one CSV row per path (seed, n_up, final_state) here.
    #[arg(long)]
    paths_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InitialArg {
    Minus,
    Plus,
    Stationary,
}

#[derive(Args, Debug)]
struct TuneAArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long = "V")]
    barrier_high: f64,
    #[arg(long = "v")]
    barrier_low: f64,
    #[arg(long)]
    eps: f64,
}

#[derive(Args, Debug)]
struct TuneBArgs {
    #[arg(long)]
    a: f64,
}

#[derive(Args, Debug)]
struct Figure1Args {
    #[arg(long, default_value_t = 1.0e3)]
    t_min: f64,
    #[arg(long, default_value_t = 1.0e8)]
    t_max: f64,
    #[arg(long, default_value_t = 241)]
    points: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    eta_min: f64,
    #[arg(long, default_value_t = 8.0)]
    eta_max: f64,
    #[arg(long, default_value_t = 29)]
    points: usize,
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Parse and execute; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let first_line = e.to_string().lines().next().unwrap_or("argument error").to_string();
            emit_error(2, &first_line);
            return 2;
        }
    };

    match execute(&cli) {
        Ok(output) => {
            if cli.strict && !output.warnings.is_empty() {
                emit_error(3, &format!("resolution warning: {}", output.warnings.join("; ")));
                return 3;
            }
            for w in &output.warnings {
                eprintln!("{}", json!({ "warning": w }));
            }
            if let Err(e) = write_artifact(&cli.out, &output.artifact) {
                emit_error(2, &format!("cannot write output: {e}"));
                return 2;
            }
            if let Some((path, content)) = &output.side_artifact {
                if let Err(e) = std::fs::write(path, content) {
                    emit_error(2, &format!("cannot write {}: {e}", path.display()));
                    return 2;
                }
            }
            0
        }
        Err(e) => {
            let code = match e {
                Error::ResourceExhausted(_) => 4,
                _ => 2,
            };
            emit_error(code, &e.to_string());
            code
        }
    }
}

struct Output {
    artifact: String,
    warnings: Vec<String>,
    side_artifact: Option<(PathBuf, String)>,
}

impl Output {
    fn new(artifact: String) -> Self {
        Self { artifact, warnings: Vec::new(), side_artifact: None }
    }
}

fn emit_error(code: i32, message: &str) {
    eprintln!("{}", json!({ "error": { "code": code, "message": message } }));
}

fn write_artifact(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// 17 significant digits; enough to round-trip any f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn execute(cli: &Cli) -> crate::Result<Output> {
    match &cli.command {
        Command::Pspm(args) => cmd_pspm(cli, args),
        Command::Floquet(args) => cmd_floquet(cli, args),
        Command::Discrete(args) => cmd_discrete(cli, args),
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::TuneA(args) => cmd_tune_a(args),
        Command::TuneB(args) => cmd_tune_b(args),
        Command::Figure1(args) => cmd_figure1(args),
        Command::Sweep(args) => cmd_sweep(cli, args),
    }
}

fn cmd_pspm(cli: &Cli, args: &PspmArgs) -> crate::Result<Output> {
    if args.grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let spec = RateSpec::from_path(&args.spec)?;
    let pspm = Pspm::new(&spec)?;
    let t_per = spec.period();
    let offsets: Vec<f64> = (0..args.grid).map(|i| t_per * i as f64 / args.grid as f64).collect();
    let mu0 = pspm.mu_minus_zero();
    let y0 = crate::StateVec::new(mu0, 1.0 - mu0);
    let fine = crate::ode::run_one_period_at(&spec, 1.0, y0, cli.steps_per_period, &offsets);
    let coarse_end = crate::ode::run_one_period_at(
        &spec,
        1.0,
        y0,
        (cli.steps_per_period / 2).max(8),
        &[t_per],
    );
    let fine_end = crate::ode::run_one_period_at(&spec, 1.0, y0, cli.steps_per_period, &[t_per]);
    let shift = (fine_end[0] - coarse_end[0]).norm();

    let mut csv = String::from("t,mu_minus,mu_plus,nu_minus,nu_plus,err\n");
    for (t, nu) in offsets.iter().zip(&fine) {
        let (mu_m, mu_p) = pspm.at(*t);
        let err = (nu.minus - mu_m).abs().max((nu.plus - mu_p).abs());
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt(*t),
            fmt(mu_m),
            fmt(mu_p),
            fmt(nu.minus),
            fmt(nu.plus),
            fmt(err)
        )
        .expect("string write");
    }
    let mut out = Output::new(csv);
    if shift > crate::RESOLUTION_WARNING_THRESHOLD {
        out.warnings.push(format!("period map moved {shift:.3e} under step halving"));
    }
    Ok(out)
}

fn cmd_floquet(cli: &Cli, args: &FloquetArgs) -> crate::Result<Output> {
    let spec = RateSpec::from_path(&args.spec)?;
    let pspm = Pspm::new(&spec)?;
    let mut csv = String::from("eta,lambda1,lambda2,mean_exponent,liouville_residual\n");
    let mut warnings = Vec::new();
    for &eta in &args.etas {
        let sp = genfun::floquet_spectrum_with(&spec, eta, cli.steps_per_period, Some(&pspm))?;
        if sp.resolution_warning() {
            warnings.push(format!(
                "monodromy at eta={eta} moved {:.3e} under step halving",
                sp.richardson_shift
            ));
        }
        writeln!(
            csv,
            "{},{},{},{},{}",
            fmt(eta),
            fmt(sp.lambda.0),
            fmt(sp.lambda.1),
            fmt(sp.mean_exponent),
            fmt(sp.liouville_residual)
        )
        .expect("string write");
    }
    let mut out = Output::new(csv);
    out.warnings = warnings;
    Ok(out)
}

fn cmd_discrete(cli: &Cli, args: &DiscreteArgs) -> crate::Result<Output> {
    let spec = RateSpec::from_path(&args.spec)?;
    let chain = crate::discrete::DiscreteChain::from_spec(&spec, cli.n_steps)?;
    let mono = chain.monodromy(args.eta)?;
    let doc = json!({
        "N": cli.n_steps,
        "eta": args.eta,
        "lambda1": mono.lambda1,
        "lambda2": mono.lambda2,
        "log_lambda1": mono.log_lambda1,
        "mean_transitions": chain.mean_transitions(),
        "det_check": mono.det_residual(),
    });
    Ok(Output::new(format!("{doc:#}\n")))
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> crate::Result<Output> {
    let spec = RateSpec::from_path(&args.spec)?;
    let mut config = EnsembleConfig::new(args.paths, args.horizon, cli.seed);
    config.etas = args.etas.clone();
    config.initial = match args.initial {
        InitialArg::Minus => InitialCondition::Fixed(State::Minus),
        InitialArg::Plus => InitialCondition::Fixed(State::Plus),
        InitialArg::Stationary => InitialCondition::Stationary,
    };
    let stats = montecarlo::ensemble_stats(&spec, &config)?;
    let mut warnings = Vec::new();
    for &eta in &stats.high_variance_etas {
        warnings.push(format!("MGF estimate at eta={eta} has relative standard error above 50%"));
    }

    let mut out = Output::new(format!(
        "{:#}\n",
        serde_json::to_value(&stats).expect("stats serialize")
    ));
    out.warnings = warnings;

    if let Some(path) = &args.paths_csv {
        let sampler = EnsembleSampler::new(&spec, config.clone())?;
        let mut csv = String::from("seed,n_up,final_state\n");
        for i in 0..config.n_paths as u64 {
            let p = sampler.path(i)?;
            writeln!(csv, "{},{},{}", p.seed, p.n_up, p.final_state.value()).expect("string write");
        }
        out.side_artifact = Some((path.clone(), csv));
    }
    Ok(out)
}

fn cmd_tune_a(args: &TuneAArgs) -> crate::Result<Output> {
    let barriers =
        BarrierParams::new(args.p, args.q, args.barrier_high, args.barrier_low, args.eps)?;
    let tuned = resonance::tune_half_period(&barriers, None)?;
    let doc = json!({
        "T_opt": tuned.argument,
        "residual": tuned.residual,
        "iterations": tuned.iterations,
        "bracket": [tuned.bracket.0, tuned.bracket.1],
        "asymptotic_period": resonance::asymptotic_period(&barriers),
        "log_asymptotic_period": resonance::log_asymptotic_period(&barriers),
        "mean_at_T_opt": barriers.mean_for_period(tuned.argument),
    });
    Ok(Output::new(format!("{doc:#}\n")))
}

fn cmd_tune_b(args: &TuneBArgs) -> crate::Result<Output> {
    let tuned = resonance::tune_constant_trace(args.a)?;
    let doc = json!({
        "a": args.a,
        "mu_opt": tuned.argument,
        "residual": tuned.residual,
        "iterations": tuned.iterations,
        "bracket": [tuned.bracket.0, tuned.bracket.1],
    });
    Ok(Output::new(format!("{doc:#}\n")))
}

fn cmd_figure1(args: &Figure1Args) -> crate::Result<Output> {
    if !crate::positive_finite(args.t_min) || args.t_max <= args.t_min || args.points < 2 {
        return Err(Error::InvalidArgument(
            "need 0 < t-min < t-max and at least 2 points".into(),
        ));
    }
    let barriers = BarrierParams::new(1.0, 1.0, 2.0, 1.0, 0.1)?;
    let mut csv = String::from("T,mean_transitions\n");
    let log_lo = args.t_min.ln();
    let log_hi = args.t_max.ln();
    for i in 0..args.points {
        let x = log_lo + (log_hi - log_lo) * i as f64 / (args.points - 1) as f64;
        let t = x.exp();
        writeln!(csv, "{},{}", fmt(t), fmt(barriers.mean_for_period(t))).expect("string write");
    }
    Ok(Output::new(csv))
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> crate::Result<Output> {
    if !crate::positive_finite(args.eta_min) || args.eta_max < args.eta_min || args.points < 1 {
        return Err(Error::InvalidArgument(
            "need 0 < eta-min <= eta-max and at least 1 point".into(),
        ));
    }
    let spec = RateSpec::from_path(&args.spec)?;
    let pspm = Pspm::new(&spec)?;
    let etas: Vec<f64> = (0..args.points)
        .map(|i| {
            if args.points == 1 {
                args.eta_min
            } else {
                args.eta_min
                    + (args.eta_max - args.eta_min) * i as f64 / (args.points - 1) as f64
            }
        })
        .collect();
    let spectra: Vec<crate::Result<genfun::FloquetSpectrum>> = etas
        .par_iter()
        .map(|&eta| genfun::floquet_spectrum_with(&spec, eta, cli.steps_per_period, Some(&pspm)))
        .collect();

    let mut csv = String::from("eta,lambda1,lambda2,mean_exponent,liouville_residual\n");
    let mut warnings = Vec::new();
    for sp in spectra {
        let sp = sp?;
        if sp.resolution_warning() {
            warnings.push(format!(
                "monodromy at eta={} moved {:.3e} under step halving",
                sp.eta, sp.richardson_shift
            ));
        }
        writeln!(
            csv,
            "{},{},{},{},{}",
            fmt(sp.eta),
            fmt(sp.lambda.0),
            fmt(sp.lambda.1),
            fmt(sp.mean_exponent),
            fmt(sp.liouville_residual)
        )
        .expect("string write");
    }
    let mut out = Output::new(csv);
    out.warnings = warnings;
    Ok(out)
}
