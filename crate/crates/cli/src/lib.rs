//! Command-line front end: argument parsing, settings resolution and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use spinmix::figures::FigureId;
use spinmix::measures::InferredVariant;
use spinmix::scans::Backend;
use spinmix::SeedKind;

mod commands;
pub mod settings;

use settings::{resolve_out, FileConfig, QChoice, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(spinmix::Error),
    /// A validation suite ran and reported failures.
    Validation(usize),
    /// A nested invocation already reported its failure; carries its exit code.
    Relayed(i32),
}

impl From<spinmix::Error> for CliError {
    fn from(e: spinmix::Error) -> Self {
        match e {
            spinmix::Error::InvalidParameter(_)
            | spinmix::Error::Routing { .. }
            | spinmix::Error::UnsupportedLinearZeeman(_) => CliError::Usage(e.to_string()),
            other => CliError::Run(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "error: {e}"),
            CliError::Validation(n) => {
                write!(f, "validation failed: {n} check(s) out of tolerance")
            }
            CliError::Relayed(code) => write!(f, "rerun failed with exit code {code}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(_) | CliError::Validation(_) => EXIT_FAILURE,
            CliError::Relayed(code) => *code,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spinmix",
    version,
    about = "Spin-mixing entanglement simulations in three-mode spinor condensates"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Initial mean pump population N0.
    #[arg(long, global = true)]
    pub n0: Option<f64>,
    /// Quadratic Zeeman shift q/g, or `matched` for q/g = N0.
    #[arg(long, global = true, value_parser = parse_q)]
    pub q: Option<QChoice>,
    /// Signal/idler seed: vacuum, thermal or coherent.
    #[arg(long, global = true)]
    pub seed: Option<SeedKind>,
    /// Thermal occupation per seeded mode.
    #[arg(long, global = true)]
    pub nbar: Option<f64>,
    /// Coherent seed population |alpha|^2 per mode.
    #[arg(long = "alpha-sq", global = true)]
    pub alpha_sq: Option<f64>,
    #[arg(long = "tau-max", global = true)]
    pub tau_max: Option<f64>,
    #[arg(long = "tau-steps", global = true)]
    pub tau_steps: Option<usize>,
    #[arg(long = "theta-steps", global = true)]
    pub theta_steps: Option<usize>,
    /// Truncated Wigner trajectory count.
    #[arg(long, global = true)]
    pub trajectories: Option<usize>,
    #[arg(long = "rng-seed", global = true)]
    pub rng_seed: Option<u64>,
    /// Wigner integrator tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Jackknife batch count.
    #[arg(long, global = true)]
    pub batches: Option<usize>,
    /// Omitted Poisson weight of the exact pump truncation.
    #[arg(long = "epsilon-cut", global = true)]
    pub epsilon_cut: Option<f64>,
    #[arg(long, global = true)]
    pub backend: Option<Backend>,
    /// Inferred-variance estimator: optimal or symdiff.
    #[arg(long, global = true)]
    pub inferred: Option<InferredVariant>,
    /// Output directory (default: $SPINMIX_OUT, then ./spinmix-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Key-value (TOML) configuration file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Keep and dump this many raw Wigner trajectories.
    #[arg(long = "dump-trajectories", global = true)]
    pub dump_trajectories: Option<usize>,
    /// Dump exact sector spectra.
    #[arg(long = "dump-spectra", global = true)]
    pub dump_spectra: bool,
    /// Dump the exact sector amplitudes at the last grid time.
    #[arg(long = "dump-state", global = true)]
    pub dump_state: bool,
}

fn parse_q(s: &str) -> Result<QChoice, String> {
    s.parse()
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Signal and pump populations versus time.
    Populations,
    /// Phase-optimized EPR parameter versus time.
    Epr,
    /// Minimum two-mode quadrature variance versus time.
    Squeezing,
    /// Inseparability ratio versus time.
    Inseparability,
    /// Time-optimized measures versus seed strength.
    ScanSeed {
        /// Seed values (nbar or |alpha|^2), comma separated.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Time-optimized measures versus N0.
    ScanN0 {
        /// N0 values, comma separated.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Thermal seed at which the time-optimized EPR parameter reaches one.
    Threshold {
        /// N0 values (default: --n0).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Absolute tolerance in nbar.
        #[arg(long = "threshold-tol")]
        threshold_tol: Option<f64>,
    },
    /// Power-law fit of thresholds versus N0.
    Fit {
        /// CSV with n0 and nbar_threshold columns; thresholds are computed when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long = "threshold-tol")]
        threshold_tol: Option<f64>,
    },
    /// Undepleted-pump closed forms versus time.
    Analytic,
    /// Dataset of one reference figure.
    Figure {
        id: FigureId,
        #[arg(long = "n0-values", value_delimiter = ',')]
        n0_values: Option<Vec<f64>>,
        #[arg(long = "seed-values", value_delimiter = ',')]
        seed_values: Option<Vec<f64>>,
        #[arg(long = "curve-nbar", value_delimiter = ',')]
        curve_nbar: Option<Vec<f64>>,
        #[arg(long = "theta-points")]
        theta_points: Option<usize>,
    },
    /// Oracle-equivalence and analytic-limit checks.
    Validate,
    /// Re-runs the invocation recorded in a manifest.
    Rerun { manifest: PathBuf },
}

/// Resolved invocation handed to the command implementations.
pub struct Context {
    pub settings: Settings,
    pub out: PathBuf,
    pub dump_trajectories: Option<usize>,
    pub dump_spectra: bool,
    pub dump_state: bool,
}

fn resolve(common: &CommonArgs) -> Result<Context, CliError> {
    let mut s = Settings::default();
    let file = match &common.config {
        Some(p) => Some(FileConfig::load(p)?),
        None => None,
    };
    if let Some(f) = &file {
        f.apply(&mut s)?;
    }
    let c = common;
    macro_rules! take {
        ($($f:ident),*) => { $( if let Some(v) = c.$f.clone() { s.$f = v; } )* };
    }
    take!(
        n0,
        q,
        seed,
        nbar,
        alpha_sq,
        tau_max,
        theta_steps,
        trajectories,
        rng_seed,
        tol,
        batches,
        epsilon_cut,
        inferred
    );
    if c.tau_steps.is_some() {
        s.tau_steps = c.tau_steps;
    }
    if c.backend.is_some() {
        s.backend = c.backend;
    }
    if c.threads.is_some() {
        s.threads = c.threads;
    }
    let out = resolve_out(
        c.out.as_deref(),
        file.as_ref().and_then(|f| f.out.as_deref()),
    );
    Ok(Context {
        settings: s,
        out,
        dump_trajectories: c.dump_trajectories,
        dump_spectra: c.dump_spectra,
        dump_state: c.dump_state,
    })
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Normal output goes to `stdout`, diagnostics to
/// `stderr`.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    if let Command::Rerun { manifest } = &cli.command {
        return commands::rerun(manifest, cli.common.out.as_deref(), stdout, stderr);
    }
    let ctx = resolve(&cli.common)?;
    // the pool closure must be Send, so command output is buffered
    let job = || {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let r = commands::dispatch(&cli.command, &ctx, &mut out, &mut err);
        (r, out, err)
    };
    let (r, out, err) = match ctx.settings.threads {
        Some(0) => return Err(CliError::Usage("--threads must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    };
    stdout.write_all(&out)?;
    stderr.write_all(&err)?;
    r
}
