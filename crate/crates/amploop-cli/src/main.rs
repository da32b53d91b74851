//! Experiment driver: runs Monte Carlo campaigns, emits figure data as
//! plain CSV/JSON, and exposes the bound-verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 capped
//! run (partial output written).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use amploop::geometry::{angle_trajectory, is_active, KappaChoice, ProblemParams};
use amploop::runners::{Algorithm, BackendSpec, RunConfig};
use amploop::stats::{
    ad_two_sample, histogram, ks_two_sample, monte_carlo, segment_active_latent, with_thread_limit,
    SampleSet, TestResult,
};
use amploop::verify;
use amploop::Error;

#[derive(Parser)]
#[command(
    name = "amploop",
    version,
    about = "Amplitude amplification with measurement-controlled feedback: experiments, figure data and bound checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write samples plus summary.
    Run(RunArgs),
    /// Emit the data behind one of the three reference figures.
    Figure(FigureArgs),
    /// Run the bound-verification suites (exit 1 on any violation).
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Weak,
    TestRestart,
    Standard,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Weak => Algorithm::Weak,
            AlgoArg::TestRestart => Algorithm::TestRestart,
            AlgoArg::Standard => Algorithm::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Angle,
    Statevector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CoreArgs {
    /// Initial success probability ρ.
    #[arg(long)]
    rho: Option<f64>,
    /// Weak-measurement strength: a number, `auto` (√ρ) or `bound`
    /// (the efficient-regime limit).
    #[arg(long, default_value = "auto")]
    kappa: String,
    /// Number of independent trials.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Base RNG seed; trial i uses stream i of this seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on worker threads (default: rayon's choice). Results do not
    /// depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    core: CoreArgs,
    /// Which loop to run.
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Simulation backend.
    #[arg(long, value_enum, default_value_t = BackendArg::Angle)]
    backend: BackendArg,
    /// Search-space dimension (statevector backend).
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated marked indices (statevector backend).
    #[arg(long)]
    marked: Option<String>,
    /// Iteration safety cap (defaults: 1e9 angle, 1e6 statevector).
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Reject degenerate or out-of-regime strengths up front instead of
    /// running into the iteration cap.
    #[arg(long)]
    strict: bool,
    /// Replay the restart baseline's inner loop draw-by-draw.
    #[arg(long)]
    per_step_replay: bool,
    /// Skip the restart baseline's measurement of the initial state.
    #[arg(long)]
    skip_initial_measurement: bool,
}

#[derive(Args)]
struct FigureArgs {
    /// Which figure's data to emit: 2 (histogram), 3 (angle window),
    /// 4 (ECDFs + tests).
    #[arg(value_parser = clap::value_parser!(u8).range(2..=4))]
    which: u8,
    #[command(flatten)]
    core: CoreArgs,
    /// Iteration window for figure 3, e.g. `10..30` (inclusive).
    #[arg(long, default_value = "10..30")]
    window: String,
    /// Output path (figures 2 and 3) or path prefix (figure 4 writes
    /// `<out>_wm_ecdf.csv`, `<out>_tr_ecdf.csv`, `<out>_tests.json`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Success probabilities to sweep (repeatable).
    #[arg(long = "rho", num_args = 1..)]
    rhos: Vec<f64>,
    /// Strength: number, `auto` or `bound`.
    #[arg(long, default_value = "auto")]
    kappa: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Angle grid step for the offset-bound sweep.
    #[arg(long, default_value_t = verify::THETA_GRID_STEP)]
    grid_step: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_kappa(text: &str) -> anyhow::Result<KappaChoice> {
    match text {
        "auto" => Ok(KappaChoice::Auto),
        "bound" => Ok(KappaChoice::AtBound),
        other => other
            .parse::<f64>()
            .map(KappaChoice::Value)
            .map_err(|_| anyhow!("--kappa expects a number, `auto` or `bound`, got {other:?}")),
    }
}

fn resolve_params(rho: f64, kappa_text: &str) -> anyhow::Result<ProblemParams> {
    let kappa = parse_kappa(kappa_text)?.resolve(rho)?;
    Ok(ProblemParams::new(rho, kappa)?)
}

fn writer_for(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn cmd_run(args: RunArgs) -> anyhow::Result<u8> {
    let rho = args.core.rho.ok_or_else(|| anyhow!("--rho is required"))?;
    let params = resolve_params(rho, &args.core.kappa)?;

    if args.strict {
        if params.kappa() == 0.0 {
            bail!("kappa = 0 never terminates (rejected under --strict)");
        }
        if !params.efficient_regime() {
            bail!(
                "kappa = {} is outside the efficient regime (bound {}); rejected under --strict",
                params.kappa(),
                params.kappa_bound()
            );
        }
    }

    let backend = match args.backend {
        BackendArg::Angle => BackendSpec::Angle,
        BackendArg::Statevector => {
            let n = args
                .n
                .ok_or_else(|| anyhow!("--n is required with --backend statevector"))?;
            let marked = args
                .marked
                .as_deref()
                .ok_or_else(|| anyhow!("--marked is required with --backend statevector"))?;
            let marked: Vec<usize> = marked
                .split(',')
                .map(|s| s.trim().parse().context("parsing --marked"))
                .collect::<anyhow::Result<_>>()?;
            BackendSpec::Statevector { n, marked }
        }
    };

    let mut cfg = match &backend {
        BackendSpec::Angle => RunConfig::angle(params, args.core.seed),
        BackendSpec::Statevector { n, marked } => {
            RunConfig::statevector(params, args.core.seed, *n, marked.clone())
        }
    };
    if let Some(cap) = args.max_iterations {
        cfg.max_iterations = cap;
    }
    cfg.restart.per_step_replay = args.per_step_replay;
    cfg.restart.skip_initial_measurement = args.skip_initial_measurement;
    cfg.validate()?;

    let algorithm: Algorithm = args.algo.into();
    let trials = args.core.trials;
    let result = with_thread_limit(args.core.threads, || monte_carlo(algorithm, &cfg, trials));

    match result {
        Ok(samples) => {
            let mut w = writer_for(args.out.as_deref())?;
            match args.format {
                FormatArg::Csv => samples.write_csv(&mut w)?,
                FormatArg::Json => writeln!(w, "{}", samples.to_json()?)?,
            }
            w.flush()?;
            Ok(0)
        }
        Err(Error::TrialCapExceeded { trial, cap, record }) => {
            let mut w = writer_for(args.out.as_deref())?;
            match args.format {
                FormatArg::Csv => {
                    writeln!(w, "# amploop-capped-run v1")?;
                    writeln!(w, "# algorithm: {algorithm}")?;
                    writeln!(w, "# rho: {}", params.rho())?;
                    writeln!(w, "# kappa: {}", params.kappa())?;
                    writeln!(w, "# trials: {trials}")?;
                    writeln!(w, "# seed: {}", args.core.seed)?;
                    writeln!(w, "# capped_trial: {trial}")?;
                    writeln!(w, "# cap: {cap}")?;
                    writeln!(w, "# partial_record: {}", serde_json::to_string(&record)?)?;
                }
                FormatArg::Json => {
                    let doc = serde_json::json!({
                        "capped": { "trial": trial, "cap": cap, "partial_record": record },
                        "spec": {
                            "algorithm": algorithm,
                            "rho": params.rho(),
                            "kappa": params.kappa(),
                            "trials": trials,
                            "seed": args.core.seed,
                        },
                    });
                    writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
                }
            }
            w.flush()?;
            eprintln!("run capped: trial {trial} exceeded {cap} iterations");
            Ok(3)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_figure(args: FigureArgs) -> anyhow::Result<u8> {
    match args.which {
        2 => figure_histogram(args),
        3 => figure_angle_window(args),
        4 => figure_cumulative(args),
        _ => unreachable!("clap range guard"),
    }
}

/// Histogram of weak-loop iteration counts, bin width π/(8α) so each
/// active/latent period spans four bins.
fn figure_histogram(args: FigureArgs) -> anyhow::Result<u8> {
    let rho = args.core.rho.unwrap_or(1e-6);
    let params = resolve_params(rho, &args.core.kappa)?;
    let cfg = RunConfig::angle(params, args.core.seed);
    let trials = args.core.trials;
    let samples = with_thread_limit(args.core.threads, || {
        monte_carlo(Algorithm::Weak, &cfg, trials)
    })?;
    let bin_width = std::f64::consts::PI / (8.0 * params.alpha());
    let bins = histogram(samples.values(), bin_width)?;

    let path = args.out.unwrap_or_else(|| PathBuf::from("figure2.csv"));
    let mut w = writer_for(Some(&path))?;
    writeln!(w, "# amploop-figure2 v1")?;
    writeln!(w, "# algorithm: weak")?;
    writeln!(w, "# backend: angle")?;
    writeln!(w, "# rho: {}", params.rho())?;
    writeln!(w, "# kappa: {}", params.kappa())?;
    writeln!(w, "# trials: {}", trials)?;
    writeln!(w, "# seed: {}", args.core.seed)?;
    writeln!(w, "# bin_width: {bin_width}")?;
    writeln!(w, "bin_lower,bin_upper,count")?;
    for b in bins {
        writeln!(w, "{},{},{}", b.lower, b.upper, b.count)?;
    }
    w.flush()?;
    Ok(0)
}

/// Per-iteration angle of the deterministic all-⊥ trajectory over the
/// requested window, with the active flag and the two growth-bound lines
/// anchored at the window start.
fn figure_angle_window(args: FigureArgs) -> anyhow::Result<u8> {
    let rho = args.core.rho.unwrap_or(0.01);
    let params = resolve_params(rho, &args.core.kappa)?;
    let (start, end) = parse_window(&args.window)?;
    let report = segment_active_latent(&params, start, end)?;
    let traj = angle_trajectory(&params, end as usize);
    let alpha = params.alpha();
    let anchor = traj[start as usize];

    let path = args.out.unwrap_or_else(|| PathBuf::from("figure3.csv"));
    let mut w = writer_for(Some(&path))?;
    writeln!(w, "# amploop-figure3 v1")?;
    writeln!(w, "# rho: {}", params.rho())?;
    writeln!(w, "# kappa: {}", params.kappa())?;
    writeln!(w, "# window: {start}..{end}")?;
    writeln!(w, "# L: {}", report.l_max.unwrap_or(0))?;
    writeln!(w, "# ell: {}", report.ell_min.unwrap_or(0))?;
    writeln!(w, "n,angle,active,lower_bound,upper_bound")?;
    for n in start..=end {
        let a = traj[n as usize];
        let offset = (n - start) as f64;
        writeln!(
            w,
            "{},{},{},{},{}",
            n,
            a,
            u8::from(is_active(a)),
            anchor + offset * alpha,
            anchor + 3.0 * offset * alpha
        )?;
    }
    w.flush()?;
    Ok(0)
}

/// Weak vs test-restart cumulative distributions plus the two-sample test
/// verdicts.
fn figure_cumulative(args: FigureArgs) -> anyhow::Result<u8> {
    let rho = args.core.rho.unwrap_or(1e-6);
    let params = resolve_params(rho, &args.core.kappa)?;
    let cfg = RunConfig::angle(params, args.core.seed);
    let trials = args.core.trials;
    let (weak, restart) = with_thread_limit(args.core.threads, || {
        let weak = monte_carlo(Algorithm::Weak, &cfg, trials);
        let restart = monte_carlo(Algorithm::TestRestart, &cfg, trials);
        (weak, restart)
    });
    let (weak, restart) = (weak?, restart?);

    let prefix = args.out.unwrap_or_else(|| PathBuf::from("figure4"));
    let ecdf_path = |tag: &str| {
        let mut name = prefix
            .file_name()
            .map(|s| s.to_os_string())
            .unwrap_or_default();
        name.push(format!("_{tag}"));
        prefix.with_file_name(name)
    };

    write_ecdf(&ecdf_path("wm_ecdf.csv"), &weak, "weak")?;
    write_ecdf(&ecdf_path("tr_ecdf.csv"), &restart, "test_restart")?;

    let ks = ks_two_sample(weak.values(), restart.values())?;
    let ad = ad_two_sample(weak.values(), restart.values())?;
    let doc = TestsDocument {
        spec: TestsSpec {
            rho: params.rho(),
            kappa: params.kappa(),
            trials,
            seed: args.core.seed,
            significance: 0.01,
        },
        ks,
        ad,
    };
    let mut w = writer_for(Some(&ecdf_path("tests.json")))?;
    writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
    w.flush()?;
    Ok(0)
}

#[derive(serde::Serialize)]
struct TestsSpec {
    rho: f64,
    kappa: f64,
    trials: u64,
    seed: u64,
    significance: f64,
}

#[derive(serde::Serialize)]
struct TestsDocument {
    spec: TestsSpec,
    ks: TestResult,
    ad: TestResult,
}

fn write_ecdf(path: &Path, samples: &SampleSet, algo: &str) -> anyhow::Result<()> {
    let mut w = writer_for(Some(path))?;
    let m = samples.meta();
    writeln!(w, "# amploop-figure4 v1")?;
    writeln!(w, "# algorithm: {algo}")?;
    writeln!(w, "# backend: {}", m.backend)?;
    writeln!(w, "# rho: {}", m.rho)?;
    writeln!(w, "# kappa: {}", m.kappa)?;
    writeln!(w, "# trials: {}", m.trials)?;
    writeln!(w, "# seed: {}", m.seed)?;
    writeln!(w, "value,cdf")?;
    for (value, cdf) in samples.ecdf().steps() {
        writeln!(w, "{value},{cdf}")?;
    }
    w.flush()?;
    Ok(())
}

fn parse_window(text: &str) -> anyhow::Result<(u64, u64)> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| anyhow!("--window expects `start..end`, got {text:?}"))?;
    let start: u64 = a.trim().parse().context("window start")?;
    let end: u64 = b.trim().parse().context("window end")?;
    if start == 0 || end < start {
        bail!("--window needs 1 <= start <= end");
    }
    Ok((start, end))
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let rhos = if args.rhos.is_empty() {
        vec![1e-2, 1e-4, 1e-6]
    } else {
        args.rhos.clone()
    };
    let choice = parse_kappa(&args.kappa)?;
    let mut all_pass = true;

    for &rho in &rhos {
        let kappa = choice.resolve(rho)?;
        let params = ProblemParams::new(rho, kappa)?;

        let theta = verify::check_theta_bounds(&params, args.grid_step);
        print_check(
            &format!("offset-bounds rho={rho:e} kappa={kappa:e}"),
            theta.passed(),
            &match &theta.witness {
                None => format!(
                    "worst excess {:.3e} at a = {:.6}",
                    theta.worst_excess, theta.worst_angle
                ),
                Some(w) => format!(
                    "violation at a = {:.6}: theta = {:.6e} vs bound {:.6e}",
                    w.angle, w.value, w.bound
                ),
            },
        );
        all_pass &= theta.passed();

        let traj = verify::check_trajectory_bounds(&params, 10_000, 1_000, args.seed);
        print_check(
            &format!("growth-bounds rho={rho:e} kappa={kappa:e}"),
            traj.passed(),
            &match traj.witness {
                None => format!(
                    "worst lower/upper excess {:.3e} / {:.3e}",
                    traj.worst_lower_excess, traj.worst_upper_excess
                ),
                Some((k, l)) => format!("violation at window (k = {k}, l = {l})"),
            },
        );
        all_pass &= traj.passed();

        if params.efficient_regime() {
            let gamma = verify::check_gamma(&params)?;
            print_check(
                &format!("active-proportion rho={rho:e} kappa={kappa:e}"),
                gamma.passed(),
                &format!(
                    "gamma = {:.4} vs lower bound {:.4} over {} iterations",
                    gamma.gamma, gamma.lower_bound, gamma.window_iterations
                ),
            );
            all_pass &= gamma.passed();
        } else {
            println!(
                "SKIP active-proportion rho={rho:e}: kappa={kappa:e} outside the efficient regime"
            );
        }
    }

    let equiv = verify::check_backend_equivalence(64, 20, args.seed)?;
    print_check(
        "backend-equivalence n=64",
        equiv.passed(),
        &format!(
            "iteration mismatches {}, worst angle gap {:.3e} over {} iterations",
            equiv.iteration_mismatches, equiv.worst_angle_gap, equiv.iterations_checked
        ),
    );
    all_pass &= equiv.passed();

    Ok(if all_pass { 0 } else { 1 })
}

fn print_check(name: &str, passed: bool, detail: &str) {
    println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
}
