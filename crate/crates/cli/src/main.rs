//! `dde`: convergence experiments, scheme comparisons, bound certificates and
//! single trajectory dumps for the preset delay equations.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use dde_core::analysis::{ExperimentOutcome, SlopeFit};
use dde_core::{
    bound_certificate, check_bounds, check_holder, compare_schemes, io, run_experiment, solve, Aggregate, Error,
    ExperimentConfig, PresetKind, PresetParams, ProblemPreset, ReferenceSpec, Scheme, SolverConfig,
};

#[derive(Parser)]
#[command(name = "dde", version, about = "Randomized Euler experiments for delay differential equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo errors and convergence slopes for one scheme.
    Convergence(ConvergenceArgs),
    /// The same experiment for the randomized and the classical scheme.
    Compare(CompareArgs),
    /// A priori bound and Hölder checks on a fine reference run.
    Certify(CertifyArgs),
    /// Solve once and write the trajectory.
    Solve(SolveArgs),
}

#[derive(Args, Debug, Clone)]
struct PresetArgs {
    /// f1, f2, kainhofer, comparison or wiener.
    #[arg(long)]
    problem: PresetKind,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long = "P")]
    p_coef: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Horizon: the run covers n + 1 lag intervals.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    x0: Option<f64>,
    /// Grid step of the Wiener path.
    #[arg(long)]
    path_step: Option<f64>,
    /// Master seed (decimal, 64-bit).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PresetArgs {
    fn build(&self) -> dde_core::Result<ProblemPreset> {
        let d = self.problem.defaults();
        let params = PresetParams {
            m: self.m.unwrap_or(d.m),
            p: self.p_coef.unwrap_or(d.p),
            alpha: self.alpha.unwrap_or(d.alpha),
            gamma: self.gamma.unwrap_or(d.gamma),
            lambda: self.lambda.unwrap_or(d.lambda),
            lambda1: self.lambda1.unwrap_or(d.lambda1),
            tau: self.tau.unwrap_or(d.tau),
            horizon: self.n.unwrap_or(d.horizon),
            x0: self.x0.unwrap_or(d.x0),
            seed: self.seed,
            path_step: self.path_step.unwrap_or(d.path_step),
        };
        ProblemPreset::new(self.problem, params)
    }
}

fn parse_norm(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| format!("{e}")),
    }
}

#[derive(Args, Debug, Clone)]
struct ExperimentArgs {
    #[command(flatten)]
    preset: PresetArgs,
    /// Steps per lag interval, comma-separated.
    #[arg(long = "N-list", value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    /// Monte Carlo samples per step count.
    #[arg(long = "K", default_value_t = 100)]
    samples: usize,
    /// Reference refinement factor m (reference runs on m N steps).
    #[arg(long, conflicts_with_all = ["ref_step", "oracle"])]
    ref_m: Option<usize>,
    /// Absolute reference step; must divide every coarse step.
    #[arg(long, conflicts_with = "oracle")]
    ref_step: Option<f64>,
    /// Compare against the closed-form solution.
    #[arg(long)]
    oracle: bool,
    /// Norm order over samples; `inf` takes the maximum.
    #[arg(long, default_value = "2", value_parser = parse_norm)]
    p: f64,
    #[arg(long, default_value = "randomized")]
    reference_scheme: Scheme,
    /// Fit a single interval instead of the maximum over intervals.
    #[arg(long)]
    interval: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    slopes_csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self, preset: &ProblemPreset) -> anyhow::Result<ExperimentConfig> {
        let reference = if self.oracle {
            match preset.exact() {
                Some(exact) => ReferenceSpec::Exact(exact),
                None => bail!(Error::InvalidParameter {
                    name: "oracle",
                    reason: format!("no closed form for {} with this horizon", preset.kind()),
                }),
            }
        } else if let Some(step) = self.ref_step {
            ReferenceSpec::Step(step)
        } else {
            ReferenceSpec::Refine(self.ref_m.unwrap_or(100))
        };
        let mut cfg = ExperimentConfig::new(
            preset.problem().clone(),
            self.n_list.clone(),
            self.samples,
            reference,
            self.preset.seed,
        );
        cfg.p = self.p;
        cfg.reference_scheme = self.reference_scheme;
        cfg.aggregate = self.interval.map_or(Aggregate::MaxOverIntervals, Aggregate::Interval);
        Ok(cfg)
    }
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    #[arg(long, default_value = "randomized")]
    scheme: Scheme,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: ExperimentArgs,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    preset: PresetArgs,
    /// Steps per interval of the reference run.
    #[arg(long = "N", default_value_t = 4096)]
    steps: usize,
    #[arg(long, default_value = "inf", value_parser = parse_norm)]
    p: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    preset: PresetArgs,
    #[arg(long = "N")]
    steps: usize,
    #[arg(long, default_value = "randomized")]
    scheme: Scheme,
    /// Trajectory CSV; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Wiener path CSV (wiener preset only).
    #[arg(long)]
    path_csv: Option<PathBuf>,
}

fn print_outcome(out: &ExperimentOutcome) {
    println!("{} scheme", out.scheme.name());
    println!("{:>8} {:>12} {:>3} {:>14} {:>12}", "N", "h", "j", "err", "spread");
    for r in out.table.rows() {
        println!("{:>8} {:>12.5e} {:>3} {:>14.6e} {:>12.4e}", r.steps, r.h, r.interval, r.err, r.spread);
    }
    match &out.slopes {
        SlopeFit::Fitted(rep) => {
            let pairs: Vec<String> = rep.pairwise.iter().map(|s| format!("{:.3}", s.slope)).collect();
            println!("pairwise slopes: {}", pairs.join(", "));
            println!("OLS slope {:.4}, r^2 {:.4}", rep.ols_slope, rep.r_squared);
            for n in &rep.notices {
                println!("note: {n}");
            }
        }
        SlopeFit::Degenerate(why) => println!("{why}"),
    }
    for f in &out.failures {
        eprintln!("sample {} at N = {} failed: {}", f.sample, f.steps, f.error);
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}{ext}"))
}

fn write_outputs(out: &ExperimentOutcome, args: &ExperimentArgs, suffix: Option<&str>) -> anyhow::Result<()> {
    let name = |p: &PathBuf| suffix.map_or_else(|| p.clone(), |s| with_suffix(p, s));
    if let Some(p) = &args.csv {
        out.write_csv(name(p)).with_context(|| format!("writing {}", name(p).display()))?;
    }
    if let Some(p) = &args.slopes_csv {
        out.write_slopes_csv(name(p)).with_context(|| format!("writing {}", name(p).display()))?;
    }
    Ok(())
}

fn title(preset: &ProblemPreset) -> String {
    format!("{} errors", preset.kind())
}

fn convergence(args: ConvergenceArgs) -> anyhow::Result<ExitCode> {
    let preset = args.common.preset.build()?;
    let mut cfg = args.common.config(&preset)?;
    cfg.scheme = args.scheme;
    let out = run_experiment(&cfg)?;
    print_outcome(&out);
    write_outputs(&out, &args.common, None)?;
    if let Some(p) = &args.common.svg {
        std::fs::write(p, out.plot(&title(&preset)).render())?;
    }
    Ok(if out.is_partial() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn compare(args: CompareArgs) -> anyhow::Result<ExitCode> {
    let preset = args.common.preset.build()?;
    let cfg = args.common.config(&preset)?;
    let cmp = compare_schemes(&cfg)?;
    for out in [&cmp.randomized, &cmp.classical] {
        print_outcome(out);
        write_outputs(out, &args.common, Some(out.scheme.name()))?;
    }
    if let Some(p) = &args.common.svg {
        std::fs::write(p, cmp.plot(&title(&preset)).render())?;
    }
    Ok(if cmp.is_partial() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn certify(args: CertifyArgs) -> anyhow::Result<ExitCode> {
    let preset = args.preset.build()?;
    let problem = preset.problem();
    let (l1, lp) = preset.envelope_norms(args.p);
    let x0_norm = problem.x0().iter().map(|v| v * v).sum::<f64>().sqrt();
    let cert = bound_certificate(&l1, &lp, x0_norm, args.p)?;
    let mut stream = dde_core::derive_stream(args.preset.seed, "certify", &[]);
    let traj = solve(problem, &SolverConfig::new(args.steps, Scheme::Randomized)?, &mut stream)?;
    let bounds = check_bounds(&traj, &cert)?;
    let holder = check_holder(&traj, &cert)?;
    println!("Hölder exponent {}", holder.exponent);
    println!("{:>3} {:>14} {:>14} {:>5} {:>14} {:>14} {:>5}", "j", "max |y|", "K_j", "ok", "worst ratio", "C_j", "ok");
    for (b, h) in bounds.intervals.iter().zip(&holder.intervals) {
        println!(
            "{:>3} {:>14.6e} {:>14.6e} {:>5} {:>14.6e} {:>14.6e} {:>5}",
            b.interval, b.max_norm, b.bound, b.ok, h.worst_ratio, h.constant, h.ok
        );
    }
    println!("{}", if bounds.passed() && holder.passed() { "certificate holds" } else { "certificate violated" });
    Ok(ExitCode::SUCCESS)
}

fn solve_once(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let preset = args.preset.build()?;
    let cfg = SolverConfig::new(args.steps, args.scheme)?;
    let mut stream = dde_core::derive_stream(args.preset.seed, "solve", &[]);
    let traj = solve(preset.problem(), &cfg, &mut stream)?;
    match &args.csv {
        Some(p) => io::write_trajectory(&traj, File::create(p)?)?,
        None => io::write_trajectory(&traj, std::io::stdout().lock())?,
    }
    if let Some(p) = &args.path_csv {
        let Some(path) = preset.path() else {
            bail!(Error::InvalidParameter {
                name: "path-csv",
                reason: "only the wiener preset has a driving path".into(),
            });
        };
        io::write_path(path, File::create(p)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convergence(a) => convergence(a),
        Command::Compare(a) => compare(a),
        Command::Certify(a) => certify(a),
        Command::Solve(a) => solve_once(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Divergence { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
