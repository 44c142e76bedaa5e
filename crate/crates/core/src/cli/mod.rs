//! The `redkit` command line: read CSV inputs, run one computation, print a
//! JSON [`Report`] on standard output.
//!
//! Exit codes: `0` success, `2` input or validation error, `1` numerical failure.

pub mod curves;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use thiserror::Error;

use crate::discrete::{apply_coordinate_channels, redundancy_f, total_correlation_entropy};
use crate::equilibrium::{
    find_equilibrium_with, sandwich_optimum_with, simulate_band, ushape_fit, EquilibriumProblem, SandwichModel,
    SearchOptions, SimulationConfig, StepSchedule, DEFAULT_GRID, DEFAULT_WINDOW_FRACTION,
};
use crate::error::Error;
use crate::estimators::{chi2_redundancy_estimate, empirical_joint, sample_correlation, SampleBatch};
use crate::gaussian::{
    chi2_quadratic_proxy, correlation_from_covariance, gaussian_total_correlation, kl_frobenius_lower_bound,
    CorrelationModel,
};
use crate::kernels::Kernel;
use crate::spectral::{head_redundancy, spectral_redundancy_of_batch, spectrum_from_eigenvalues, AttentionStack};

use curves::{CurveSpec, ProblemConfig};
use io::InputFile;
pub use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: u64, msg: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(Error::Numerical { .. }) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "redkit",
    version,
    about = "Redundancy functionals: f-divergence, Gaussian, spectral, equilibrium"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// f-divergence redundancy of a joint probability table
    Discrete {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "kl")]
        kernel: String,
        /// One row-stochastic matrix per coordinate, separated by `---`
        #[arg(long)]
        channels: Option<PathBuf>,
    },
    /// Gaussian total correlation, quadratic proxy and KL–Frobenius bound
    Gaussian {
        #[arg(long, conflicts_with = "cov", required_unless_present = "cov")]
        corr: Option<PathBuf>,
        #[arg(long)]
        cov: Option<PathBuf>,
    },
    /// Spectral entropy, effective rank and spectral redundancy
    Spectral {
        /// Latent batch, rows = samples
        #[arg(long, conflicts_with = "eigs", required_unless_present = "eigs")]
        batch: Option<PathBuf>,
        #[arg(long)]
        eigs: Option<PathBuf>,
    },
    /// Attention-head redundancy
    Heads {
        /// One file with `---` separators, or one file per head
        #[arg(long, required = true, num_args = 1..)]
        heads: Vec<PathBuf>,
    },
    /// Plug-in estimates from samples
    Estimate {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum, default_value_t = EstimateMode::Joint)]
        mode: EstimateMode,
        /// Alphabet sizes for joint mode, e.g. `2,2`; defaults to max symbol + 1
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value = "kl")]
        kernel: String,
    },
    /// Redundancy equilibrium tools
    #[command(subcommand)]
    Equilibrium(EquilibriumCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateMode {
    Joint,
    Chi2,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// TOML problem file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// `lo,hi` (default `0,1`)
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    domain: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum EquilibriumCommand {
    /// Minimizer of D(R) + λR
    Find {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Noisy gradient dynamics and their stability band
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, env = "REDKIT_SEED")]
        seed: Option<u64>,
        /// Initial step size
        #[arg(long)]
        eta: Option<f64>,
        /// Step decay exponent p in η_t = η/(t+1)^p; 0 keeps steps constant
        #[arg(long)]
        decay: Option<f64>,
        /// Starting point (default: domain midpoint)
        #[arg(long = "init")]
        initial: Option<f64>,
        /// Trailing share of steps forming the band
        #[arg(long)]
        window: Option<f64>,
        /// Write the trajectory as `step,R` CSV
        #[arg(long)]
        trajectory_out: Option<PathBuf>,
    },
    /// Interior optimum of a sandwich-bounded error curve
    Sandwich {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        c0: f64,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long)]
        g_robust: String,
        #[arg(long)]
        g_info: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Quadratic fit over (R, score) points
    Ufit {
        #[arg(long)]
        points: PathBuf,
        /// Fit a minimum instead of a maximum
        #[arg(long)]
        minimize: bool,
    },
}

/// Parses `args` (including the program name), runs the command and writes
/// the report or diagnostics. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => match out.write_all(report.to_json().as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: writing report: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Discrete {
            table,
            kernel,
            channels,
        } => discrete(table, kernel, channels.as_deref()),
        Command::Gaussian { corr, cov } => gaussian(corr.as_deref(), cov.as_deref()),
        Command::Spectral { batch, eigs } => spectral(batch.as_deref(), eigs.as_deref()),
        Command::Heads { heads } => heads_cmd(heads),
        Command::Estimate {
            samples,
            mode,
            sizes,
            kernel,
        } => estimate(samples, *mode, sizes.as_deref(), kernel),
        Command::Equilibrium(cmd) => equilibrium(cmd),
    }
}

fn read_input(report: &mut Report, path: &Path) -> Result<InputFile, CliError> {
    let file = InputFile::read(path)?;
    report.input(path.display().to_string(), file.digest());
    Ok(file)
}

fn parse_kernel(name: &str) -> Result<Kernel, CliError> {
    name.parse().map_err(|e: Error| CliError::Usage(e.to_string()))
}

fn discrete(table: &Path, kernel: &str, channels: Option<&Path>) -> Result<Report, CliError> {
    let kernel = parse_kernel(kernel)?;
    let mut report = Report::new("discrete");
    let joint = read_input(&mut report, table)?.joint_table()?;
    let before = redundancy_f(&joint, kernel)?;
    report.value("kernel", kernel.to_string());
    report.value("cells", joint.num_cells());
    report.value("coordinates", joint.num_coordinates());
    report.number("redundancy", before)?;
    report.number("total_correlation", total_correlation_entropy(&joint))?;
    if let Some(path) = channels {
        let chans = read_input(&mut report, path)?.channels()?;
        let pushed = apply_coordinate_channels(&joint, &chans)?;
        let after = redundancy_f(&pushed, kernel)?;
        report.number("redundancy_after_channels", after)?;
        report.value("dpi_holds", after <= before + 1e-10);
    }
    Ok(report)
}

fn gaussian(corr: Option<&Path>, cov: Option<&Path>) -> Result<Report, CliError> {
    let mut report = Report::new("gaussian");
    let model = match (corr, cov) {
        (Some(path), _) => CorrelationModel::new(read_input(&mut report, path)?.matrix()?)?,
        (None, Some(path)) => correlation_from_covariance(&read_input(&mut report, path)?.matrix()?)?,
        (None, None) => return Err(CliError::Usage("one of --corr or --cov is required".into())),
    };
    report.value("dim", model.dim());
    report.number("total_correlation", gaussian_total_correlation(&model)?)?;
    report.number("chi2_proxy", chi2_quadratic_proxy(&model))?;
    report.number("frobenius_deviation", model.deviation_frobenius())?;
    report.number("spectral_radius_deviation", model.deviation_spectral_radius())?;
    match kl_frobenius_lower_bound(&model) {
        Ok(bound) => {
            report.number("kl_frobenius_bound", bound)?;
            report.value("kl_frobenius_applicable", true);
        }
        Err(Error::Precondition(_)) => report.value("kl_frobenius_applicable", false),
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

fn spectral(batch: Option<&Path>, eigs: Option<&Path>) -> Result<Report, CliError> {
    let mut report = Report::new("spectral");
    let spectrum = match (batch, eigs) {
        (Some(path), _) => spectral_redundancy_of_batch(&read_input(&mut report, path)?.matrix()?)?,
        (None, Some(path)) => spectrum_from_eigenvalues(&read_input(&mut report, path)?.numbers()?)?,
        (None, None) => return Err(CliError::Usage("one of --batch or --eigs is required".into())),
    };
    report.value("dim", spectrum.dim());
    report.number("spectral_entropy", spectrum.spectral_entropy())?;
    report.number("effective_rank", spectrum.effective_rank())?;
    report.number("r_spec", spectrum.spectral_redundancy())?;
    Ok(report)
}

fn heads_cmd(paths: &[PathBuf]) -> Result<Report, CliError> {
    let mut report = Report::new("heads");
    let mut heads: Vec<DMatrix<f64>> = Vec::new();
    for path in paths {
        heads.extend(read_input(&mut report, path)?.matrices()?);
    }
    let stack = AttentionStack::new(heads)?;
    report.value("heads", stack.heads().len());
    report.number("r_head", head_redundancy(&stack))?;
    Ok(report)
}

fn estimate(samples: &Path, mode: EstimateMode, sizes: Option<&[usize]>, kernel: &str) -> Result<Report, CliError> {
    let mut report = Report::new("estimate");
    let file = read_input(&mut report, samples)?;
    match mode {
        EstimateMode::Joint => {
            let kernel = parse_kernel(kernel)?;
            let rows = file.integer_rows()?;
            let sizes = match sizes {
                Some(s) => s.to_vec(),
                None => {
                    let width = rows.first().map(Vec::len).unwrap_or(0);
                    (0..width)
                        .map(|c| rows.iter().map(|r| r[c]).max().unwrap_or(0) + 1)
                        .collect()
                }
            };
            let joint = empirical_joint(&rows, &sizes)?;
            report.value("mode", "joint");
            report.value("kernel", kernel.to_string());
            report.value("rows", rows.len());
            report.value("sizes", sizes);
            report.number("redundancy", redundancy_f(&joint, kernel)?)?;
            report.number("total_correlation", total_correlation_entropy(&joint))?;
        }
        EstimateMode::Chi2 => {
            let batch = SampleBatch::new(file.matrix()?)?;
            let corr = sample_correlation(&batch)?;
            report.value("mode", "chi2");
            report.value("rows", batch.data().nrows());
            report.value("columns", batch.data().ncols());
            report.number("chi2_estimate", chi2_redundancy_estimate(&batch)?)?;
            report.number("frobenius_deviation", corr.deviation_frobenius())?;
        }
    }
    Ok(report)
}

struct ResolvedProblem {
    problem: EquilibriumProblem,
    config: ProblemConfig,
    tol: f64,
    options: SearchOptions,
}

fn resolve_problem(report: &mut Report, args: &ProblemArgs) -> Result<ResolvedProblem, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let (config, file) = ProblemConfig::load(path)?;
            report.input(path.display().to_string(), file.digest());
            config
        }
        None => ProblemConfig::default(),
    };
    if let Some(c) = &args.curve {
        config.curve = Some(c.clone());
    }
    if let Some(l) = args.lambda {
        config.lambda = Some(l);
    }
    if let Some(d) = &args.domain {
        config.domain = Some([d[0], d[1]]);
    }
    if let Some(t) = args.tol {
        config.tol = Some(t);
    }
    if let Some(g) = args.grid {
        config.grid = Some(g);
    }

    let spec = CurveSpec::parse(
        config
            .curve
            .as_deref()
            .ok_or_else(|| CliError::Usage("a curve is required (--curve or config)".into()))?,
    )?;
    let [lo, hi] = config.domain.unwrap_or([0.0, 1.0]);
    let (curve, table) = spec.to_curve(lo, hi)?;
    if let Some(file) = table {
        report.input(file.path.display().to_string(), file.digest());
    }
    let lambda = config
        .lambda
        .ok_or_else(|| CliError::Usage("lambda is required (--lambda or config)".into()))?;
    let problem = EquilibriumProblem::new(curve, lambda)?;
    let tol = config.tol.unwrap_or(1e-9);
    let options = SearchOptions {
        grid: config.grid.unwrap_or(DEFAULT_GRID),
    };
    Ok(ResolvedProblem {
        problem,
        config,
        tol,
        options,
    })
}

fn equilibrium(cmd: &EquilibriumCommand) -> Result<Report, CliError> {
    match cmd {
        EquilibriumCommand::Find { problem } => {
            let mut report = Report::new("equilibrium find");
            let resolved = resolve_problem(&mut report, problem)?;
            let eq = find_equilibrium_with(&resolved.problem, resolved.tol, &resolved.options)?;
            report.number("lambda", resolved.problem.lambda())?;
            report.number("r_star", eq.r_star)?;
            report.number("phi", eq.phi)?;
            report.value("interior", eq.interior);
            Ok(report)
        }
        EquilibriumCommand::Simulate {
            problem,
            sigma,
            steps,
            seed,
            eta,
            decay,
            initial,
            window,
            trajectory_out,
        } => {
            let mut report = Report::new("equilibrium simulate");
            let resolved = resolve_problem(&mut report, problem)?;
            let cfg = &resolved.config;
            let (lo, hi) = resolved.problem.curve().domain();
            let eta = eta.or(cfg.eta).unwrap_or(0.1);
            let decay = decay.or(cfg.decay).unwrap_or(0.0);
            let schedule = if decay == 0.0 {
                StepSchedule::Constant(eta)
            } else {
                StepSchedule::RobbinsMonro {
                    initial: eta,
                    exponent: decay,
                }
            };
            let config = SimulationConfig::new(
                initial.or(cfg.initial).unwrap_or(0.5 * (lo + hi)),
                steps.or(cfg.steps).unwrap_or(500),
            )
            .schedule(schedule)
            .noise(sigma.or(cfg.sigma).unwrap_or(0.0), seed.or(cfg.seed).unwrap_or(0))
            .window_fraction(window.or(cfg.window).unwrap_or(DEFAULT_WINDOW_FRACTION));
            let traj = simulate_band(&resolved.problem, &config)?;
            let eq = find_equilibrium_with(&resolved.problem, resolved.tol, &resolved.options)?;

            if let Some(path) = trajectory_out {
                write_trajectory(path, &traj.times, &traj.values)?;
            }
            report.numbers("band", &[traj.band.0, traj.band.1])?;
            report.number("band_width", traj.band_width())?;
            report.number("final", traj.last())?;
            report.number("initial", config.initial)?;
            report.number("sigma", traj.noise_scale)?;
            report.value("seed", traj.seed);
            report.value("steps", config.steps);
            report.value("window", config.window_len());
            report.value("schedule", if decay == 0.0 { "constant" } else { "robbins-monro" });
            report.number("eta", eta)?;
            report.number("r_star", eq.r_star)?;
            report.value("interior", eq.interior);
            Ok(report)
        }
        EquilibriumCommand::Sandwich {
            curve,
            c0,
            r1,
            r2,
            g_robust,
            g_info,
            tol,
            grid,
        } => {
            let mut report = Report::new("equilibrium sandwich");
            let (error_curve, table) = CurveSpec::parse(curve)?.to_curve(0.0, *c0)?;
            let (robust, robust_file) = CurveSpec::parse(g_robust)?.to_fn()?;
            let (info, info_file) = CurveSpec::parse(g_info)?.to_fn()?;
            for file in [table, robust_file, info_file].into_iter().flatten() {
                report.input(file.path.display().to_string(), file.digest());
            }
            let model = SandwichModel::new(error_curve, *c0, *r1, *r2, robust, info)?;
            let opt = sandwich_optimum_with(&model, *tol, &SearchOptions { grid: *grid })?;
            report.number("r_star", opt.r_star)?;
            report.number("error", opt.error)?;
            report.value("plateau", opt.plateau);
            match opt.plateau_interval {
                Some((a, b)) => report.numbers("plateau_interval", &[a, b])?,
                None => report.value("plateau_interval", serde_json::Value::Null),
            }
            Ok(report)
        }
        EquilibriumCommand::Ufit { points, minimize } => {
            let mut report = Report::new("equilibrium ufit");
            let pts = read_input(&mut report, points)?.points()?;
            let fit = ushape_fit(&pts, *minimize)?;
            report.value("points", pts.len());
            report.value("minimize", *minimize);
            report.number("a", fit.a)?;
            report.number("b", fit.b)?;
            report.number("c", fit.c)?;
            match (fit.vertex, fit.vertex_score()) {
                (Some(v), Some(s)) => {
                    report.number("vertex", v)?;
                    report.number("vertex_score", s)?;
                }
                _ => {
                    report.value("vertex", serde_json::Value::Null);
                    report.value("vertex_score", serde_json::Value::Null);
                }
            }
            report.value("interior", fit.interior);
            Ok(report)
        }
    }
}

fn write_trajectory(path: &Path, times: &[usize], values: &[f64]) -> Result<(), CliError> {
    let io_err = |source: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(e.into()))?;
    w.write_record(["step", "R"]).map_err(|e| io_err(e.into()))?;
    for (&t, &r) in times.iter().zip(values) {
        let r = report::round_significant(r).ok_or_else(|| {
            CliError::Compute(Error::Numerical {
                step: t,
                detail: "non-finite iterate".into(),
            })
        })?;
        w.write_record([t.to_string(), r.to_string()])
            .map_err(|e| io_err(e.into()))?;
    }
    w.flush().map_err(io_err)
}
