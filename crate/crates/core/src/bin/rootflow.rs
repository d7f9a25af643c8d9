use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rootflow::evolve::{differentiate_many_with, EvolveConfig};
use rootflow::projections::{iterate_projections, ProjectionMode};
use rootflow::report::{histogram, read_roots, roots_to_csv, semicircle_distance, write_atomic, write_json, Histogram};
use rootflow::sampling::{normalize_affine, sample_roots, DistributionSpec, RngStream};
use rootflow::verify::{
    hermite_chain, lemma_sweep_multi, proposition_check, theorem_sweep, ConservationReport, ConservationTracker,
    Route,
};
use rootflow::{Error, Result, RootSet};

#[derive(Parser)]
#[command(name = "rootflow", version, about = "Roots of real-rooted polynomials under repeated differentiation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a root set from one of the built-in laws.
    Sample(SampleArgs),
    /// Differentiate repeatedly, writing final roots, snapshot histograms and a conservation report.
    Evolve(EvolveArgs),
    /// Numerical checks of the limit theorems and identities.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Iterated rank-one compressions of a spectrum.
    Project(ProjectArgs),
    /// Histogram and semicircle distance of a roots CSV.
    Hist(HistArgs),
}

#[derive(Subcommand)]
enum VerifyCommand {
    Theorem(TheoremArgs),
    Lemma(LemmaArgs),
    Conservation(ConservationArgs),
    Proposition(PropositionArgs),
    HermiteChain(ChainArgs),
}

#[derive(Args, Clone, Serialize)]
struct Source {
    /// uniform, gaussian, parabolic, gap or semicircle
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read roots from a CSV instead of sampling.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Shift and scale to mean 0, variance 1.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Clone, Serialize)]
struct Solver {
    #[arg(long, default_value_t = 1e-12)]
    eps: f64,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct EvolveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    steps: usize,
    /// Snapshot every this many steps (default max(1, steps/10)).
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct TheoremArgs {
    #[arg(long, default_value = "parabolic")]
    dist: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    ell: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "evolve")]
    route: String,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct LemmaArgs {
    #[arg(long, default_value = "uniform")]
    dist: String,
    /// Largest n; the grid is n/16, n/4, n.
    #[arg(long, default_value_t = 1600)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct ConservationArgs {
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Number of independent trajectories.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct PropositionArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct ChainArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct ProjectArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    steps: usize,
    /// deterministic or random
    #[arg(long, default_value = "random")]
    mode: String,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Serialize)]
struct HistArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rootflow: {e}");
            ExitCode::from(if e.is_numerical() { 1 } else { 2 })
        }
    }
}

fn run(cmd: Command) -> Result<String> {
    match cmd {
        Command::Sample(a) => sample(a),
        Command::Evolve(a) => evolve(a),
        Command::Verify(v) => match v {
            VerifyCommand::Theorem(a) => theorem(a),
            VerifyCommand::Lemma(a) => lemma(a),
            VerifyCommand::Conservation(a) => conservation(a),
            VerifyCommand::Proposition(a) => proposition(a),
            VerifyCommand::HermiteChain(a) => chain(a),
        },
        Command::Project(a) => project(a),
        Command::Hist(a) => hist(a),
    }
}

fn load(src: &Source) -> Result<RootSet> {
    let roots = match &src.input {
        Some(p) => read_roots(p)?,
        None => {
            let spec: DistributionSpec = src.dist.parse()?;
            sample_roots(&spec, src.n, RngStream::new(src.seed, 0))?
        }
    };
    if src.normalize {
        Ok(normalize_affine(&roots)?.0)
    } else {
        Ok(roots)
    }
}

fn evolve_config(solver: &Solver, stride: usize) -> Result<EvolveConfig> {
    let cfg = EvolveConfig {
        epsilon: solver.eps,
        snapshot_stride: stride,
        ..EvolveConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn default_stride(steps: usize, stride: Option<usize>) -> usize {
    stride.unwrap_or((steps / 10).max(1))
}

fn check_bins(bins: usize) -> Result<()> {
    if bins == 0 {
        return Err(Error::InvalidArgument("--bins must be at least 1".into()));
    }
    Ok(())
}

fn write_roots(path: &Path, roots: &RootSet) -> Result<()> {
    write_atomic(path, roots_to_csv(roots).as_bytes())
}

fn write_hist(path: &Path, h: &Histogram) -> Result<()> {
    write_atomic(path, h.to_csv().as_bytes())
}

fn snapshot_name(step: usize) -> String {
    format!("hist_step_{step:06}.csv")
}

/// Semicircle distance, or `None` when it is undefined (fewer than two roots).
fn semicircle_or_none(roots: &RootSet) -> Option<f64> {
    semicircle_distance(roots.as_slice()).ok()
}

#[derive(Serialize)]
struct SampleReport<'a> {
    config: &'a SampleArgs,
    n: usize,
    mean: f64,
    variance: f64,
    semicircle_distance: Option<f64>,
}

fn sample(a: SampleArgs) -> Result<String> {
    check_bins(a.bins)?;
    let roots = load(&a.source)?;
    let dir = &a.output.out;
    write_roots(&dir.join("roots.csv"), &roots)?;
    write_hist(&dir.join("hist.csv"), &histogram(roots.as_slice(), a.bins)?)?;
    let rep = SampleReport {
        config: &a,
        n: roots.len(),
        mean: roots.mean(),
        variance: roots.variance(),
        semicircle_distance: semicircle_or_none(&roots),
    };
    write_json(&dir.join("sample.json"), &rep)?;
    Ok(format!(
        "sample: n={} mean={:.6e} variance={:.6e} -> {}",
        rep.n,
        rep.mean,
        rep.variance,
        dir.join("roots.csv").display()
    ))
}

#[derive(Serialize)]
struct EvolveReport<'a> {
    config: &'a EvolveArgs,
    stride: usize,
    n_initial: usize,
    n_final: usize,
    snapshot_steps: Vec<usize>,
    semicircle_distance: Option<f64>,
    conservation: ConservationReport,
}

fn evolve(a: EvolveArgs) -> Result<String> {
    check_bins(a.bins)?;
    let stride = default_stride(a.steps, a.stride);
    let cfg = evolve_config(&a.solver, stride)?;
    let roots = load(&a.source)?;
    let dir = a.output.out.clone();

    let mut tracker = ConservationTracker::new();
    tracker.push(&roots);
    let mut hists = vec![(0, histogram(roots.as_slice(), a.bins)?)];
    let last = differentiate_many_with(&roots, a.steps, &cfg, |step, state| {
        tracker.push(state);
        if step % stride == 0 || step == a.steps {
            if let Ok(h) = histogram(state.as_slice(), a.bins) {
                hists.push((step, h));
            }
        }
    })?;

    for (step, h) in &hists {
        write_hist(&dir.join(snapshot_name(*step)), h)?;
    }
    write_roots(&dir.join("roots.csv"), &last)?;
    let conservation = tracker.report();
    write_json(&dir.join("conservation.json"), &conservation)?;
    let rep = EvolveReport {
        config: &a,
        stride,
        n_initial: roots.len(),
        n_final: last.len(),
        snapshot_steps: hists.iter().map(|(s, _)| *s).collect(),
        semicircle_distance: semicircle_or_none(&last),
        conservation,
    };
    write_json(&dir.join("evolve.json"), &rep)?;
    Ok(format!(
        "evolve: {} -> {} roots in {} steps, mean drift {:.3e}, pairwise rel err {:.3e} -> {}",
        rep.n_initial,
        rep.n_final,
        a.steps,
        rep.conservation.mean_drift,
        rep.conservation.pairwise_identity_rel_err,
        dir.display()
    ))
}

fn theorem(a: TheoremArgs) -> Result<String> {
    let spec: DistributionSpec = a.dist.parse()?;
    let route: Route = a.route.parse()?;
    let cfg = evolve_config(&a.solver, 1)?;
    let rep = theorem_sweep(&spec, a.n, a.ell, a.trials, RngStream::new(a.seed, 0), route, &cfg)?;
    let dir = &a.output.out;
    let mut table = String::from("trial,gamma,rms_error\n");
    for (i, t) in rep.trials.iter().enumerate() {
        table.push_str(&format!("{i},{:.16e},{:.16e}\n", t.gamma, t.rms_error));
    }
    write_atomic(&dir.join("theorem.csv"), table.as_bytes())?;
    write_json(&dir.join("theorem.json"), &rep)?;
    Ok(format!(
        "theorem: law={} n={} ell={} trials={} gamma mean={:.4} var={:.4} median rms={:.4e}",
        rep.law, rep.n, rep.ell, a.trials, rep.gamma_mean, rep.gamma_variance, rep.median_rms_error
    ))
}

fn lemma(a: LemmaArgs) -> Result<String> {
    let spec: DistributionSpec = a.dist.parse()?;
    if a.n < 16 {
        return Err(Error::InvalidArgument("--n must be at least 16".into()));
    }
    let grid = [a.n / 16, a.n / 4, a.n];
    let ms = [2, 3, 4, 5, 6];
    let reps = lemma_sweep_multi(&spec, &ms, &grid, a.trials, RngStream::new(a.seed, 0))?;
    write_json(&a.output.out.join("lemma.json"), &reps)?;
    let worst = ms
        .iter()
        .map(|&m| {
            let r: Vec<f64> = reps.iter().filter(|r| r.m == m).map(|r| r.normalized_ratio).collect();
            r[r.len() - 1] / r[0]
        })
        .fold(0.0, f64::max);
    Ok(format!(
        "lemma: law={} n={:?} m=2..=6 trials={} worst ratio growth {:.3}",
        a.dist, grid, a.trials, worst
    ))
}

#[derive(Serialize)]
struct ConservationSummary<'a> {
    config: &'a ConservationArgs,
    trajectories: Vec<ConservationReport>,
}

fn conservation(a: ConservationArgs) -> Result<String> {
    let spec: DistributionSpec = a.dist.parse()?;
    let cfg = evolve_config(&a.solver, 1)?;
    let mut trajectories = Vec::with_capacity(a.trials);
    for t in 0..a.trials.max(1) {
        let roots = sample_roots(&spec, a.n, RngStream::new(a.seed, 0).substream(t as u64))?;
        let mut tracker = ConservationTracker::new();
        tracker.push(&roots);
        differentiate_many_with(&roots, a.steps, &cfg, |_, s| tracker.push(s))?;
        trajectories.push(tracker.report());
    }
    let drift = trajectories.iter().map(|r| r.mean_drift_scaled).fold(0.0, f64::max);
    let pair = trajectories.iter().map(|r| r.pairwise_identity_rel_err).fold(0.0, f64::max);
    let count = trajectories.len();
    write_json(&a.output.out.join("conservation.json"), &ConservationSummary { config: &a, trajectories })?;
    Ok(format!(
        "conservation: {count} trajectories, max scaled mean drift {drift:.3e}, max pairwise rel err {pair:.3e}"
    ))
}

fn proposition(a: PropositionArgs) -> Result<String> {
    let grid: Vec<f64> = (0..=80).map(|i| -2.0 + 0.05 * i as f64).collect();
    let rep = proposition_check(a.n, a.ell, &grid)?;
    write_json(&a.output.out.join("proposition.json"), &rep)?;
    Ok(format!(
        "proposition: n={} ell={} max deviation {:.6e}",
        rep.n, rep.ell, rep.max_deviation
    ))
}

fn chain(a: ChainArgs) -> Result<String> {
    let cfg = evolve_config(&a.solver, 1)?;
    let rep = hermite_chain(a.n, &cfg)?;
    write_json(&a.output.out.join("hermite_chain.json"), &rep)?;
    Ok(format!(
        "hermite-chain: He_{} -> He_{} max root error {:.4e}",
        rep.n, rep.ell, rep.max_root_error
    ))
}

#[derive(Serialize)]
struct ProjectReport<'a> {
    config: &'a ProjectArgs,
    mode: ProjectionMode,
    stride: usize,
    snapshot_steps: Vec<usize>,
    semicircle_distance: Option<f64>,
}

fn project(a: ProjectArgs) -> Result<String> {
    check_bins(a.bins)?;
    let mode: ProjectionMode = a.mode.parse()?;
    let stride = default_stride(a.steps, a.stride);
    let cfg = evolve_config(&a.solver, stride)?;
    let eigs = load(&a.source)?;
    let traj = iterate_projections(&eigs, a.steps, mode, RngStream::new(a.source.seed, 1), &cfg)?;
    let dir = &a.output.out;
    for (step, s) in &traj.snapshots {
        write_hist(&dir.join(snapshot_name(*step)), &histogram(s.as_slice(), a.bins)?)?;
    }
    let last = traj.final_spectrum();
    write_roots(&dir.join("spectrum.csv"), last)?;
    let rep = ProjectReport {
        config: &a,
        mode,
        stride,
        snapshot_steps: traj.snapshots.iter().map(|(s, _)| *s).collect(),
        semicircle_distance: semicircle_or_none(last),
    };
    write_json(&dir.join("project.json"), &rep)?;
    Ok(format!(
        "project: {} mode, {} -> {} eigenvalues -> {}",
        a.mode,
        eigs.len(),
        last.len(),
        dir.display()
    ))
}

#[derive(Serialize)]
struct HistReport<'a> {
    config: &'a HistArgs,
    histogram: &'a Histogram,
    semicircle_distance: Option<f64>,
}

fn hist(a: HistArgs) -> Result<String> {
    let roots = read_roots(&a.input)?;
    let h = histogram(roots.as_slice(), a.bins)?;
    let dir = &a.output.out;
    write_hist(&dir.join("hist.csv"), &h)?;
    let d = semicircle_or_none(&roots);
    write_json(
        &dir.join("hist.json"),
        &HistReport {
            config: &a,
            histogram: &h,
            semicircle_distance: d,
        },
    )?;
    Ok(format!(
        "hist: {} values in {} bins, semicircle distance {}",
        h.total,
        h.bins(),
        d.map_or("n/a".to_string(), |d| format!("{d:.4}"))
    ))
}
