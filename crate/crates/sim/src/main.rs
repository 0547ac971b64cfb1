use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use mqubit::campaigns::{self, CampaignError};
use mqubit::config::{load_config, RunConfig};
use mqubit::ensemble::Workers;
use mqubit::output::CsvSink;
use mqubit::validate;

/// Energy flow and its fluctuations for a dissipative qubit under continuous
/// measurement and feedback.
///
/// Configuration files are TOML with the sections [physics], [monitor],
/// [trajectory], [sweep] and [output]. Angles are in units of π. Defaults:
/// delta = 1, omega_c = 1000, theta_n = theta_m, dt = 0.005/delta,
/// t_equilibrate = 10/γ₊, t_window = 50/γ₊, n_traj = 100000, seed = 1.
#[derive(Parser)]
#[command(name = "mqubit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state, flows and effective bath at each point.
    Steady(Common),
    /// Numerical and closed-form monitor flow over a grid.
    SweepFlow(Common),
    /// Bath currents and COP over a grid.
    Cooling(Common),
    /// One trajectory record (n_traj = 1) or the ensemble mean against the master equation.
    Trajectory(Common),
    /// Analytic and Monte Carlo noise at each point.
    Noise(Common),
    /// Monte Carlo backaction spectrum at a single point.
    Spectrum(Common),
    /// Invariant suite at pinned parameters; nonzero exit on any failure.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct RunFlags {
    /// Master seed (overrides [trajectory] seed).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Trajectory count (overrides [trajectory] n_traj).
    #[arg(long, value_name = "N")]
    traj: Option<usize>,
    /// Worker threads (overrides the MQUBIT_THREADS environment variable).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output CSV (overrides [output] path; stdout when neither is set).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Configuration to check against the step-size and window limits.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

fn workers(flags: &RunFlags) -> Result<Workers, String> {
    Workers::new(flags.threads).map_err(|e| format!("worker pool: {e}"))
}

fn apply(cfg: &mut RunConfig, flags: &RunFlags) {
    if let Some(s) = flags.seed {
        cfg.trajectory.seed = s;
    }
    if let Some(n) = flags.traj {
        cfg.trajectory.n_traj = n;
    }
    if let Some(p) = &flags.out {
        cfg.output.path = Some(p.clone());
    }
}

type Campaign = fn(&RunConfig, &Workers, &mut dyn mqubit::output::RowSink) -> Result<(), CampaignError>;

fn run_campaign(name: &str, args: &Common, f: Campaign) -> Result<(), String> {
    let mut cfg = load_config(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    apply(&mut cfg, &args.run);
    let workers = workers(&args.run)?;
    let metadata = [
        ("version", env!("CARGO_PKG_VERSION").to_string()),
        ("command", name.to_string()),
        ("seed", cfg.trajectory.seed.to_string()),
        ("n_traj", cfg.trajectory.n_traj.to_string()),
        ("dt", cfg.trajectory.dt.to_string()),
        ("config_sha256", cfg.hash.clone()),
    ];
    let mut sink = CsvSink::create(cfg.output.path.as_deref(), &metadata).map_err(|e| format!("output: {e}"))?;
    let start = Instant::now();
    f(&cfg, &workers, &mut sink).map_err(|e| e.to_string())?;
    eprintln!(
        "{name}: {:.2} s on {} threads",
        start.elapsed().as_secs_f64(),
        workers.threads()
    );
    Ok(())
}

fn run_validate(args: &ValidateArgs) -> Result<bool, String> {
    if let Some(path) = &args.config {
        load_config(path).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let workers = workers(&args.run)?;
    let seed = args.run.seed.unwrap_or(mqubit::config::DEFAULT_SEED);
    let start = Instant::now();
    let checks = validate::run_suite(&workers, seed).map_err(|e| e.to_string())?;
    eprint!("{}", validate::summary(&checks));
    let metadata = [
        ("version", env!("CARGO_PKG_VERSION").to_string()),
        ("command", "validate".to_string()),
        ("seed", seed.to_string()),
    ];
    let written = match &args.run.out {
        Some(p) => std::fs::File::create(p).and_then(|f| validate::write_csv(&checks, &metadata, f)),
        None => validate::write_csv(&checks, &metadata, std::io::stdout()),
    };
    written.map_err(|e| format!("output: {e}"))?;
    eprintln!("validate: {:.2} s", start.elapsed().as_secs_f64());
    Ok(checks.iter().all(|c| c.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Steady(a) => run_campaign("steady", a, campaigns::steady).map(|_| true),
        Command::SweepFlow(a) => run_campaign("sweep-flow", a, campaigns::sweep_flow).map(|_| true),
        Command::Cooling(a) => run_campaign("cooling", a, campaigns::cooling).map(|_| true),
        Command::Trajectory(a) => run_campaign("trajectory", a, campaigns::trajectory).map(|_| true),
        Command::Noise(a) => run_campaign("noise", a, campaigns::noise).map(|_| true),
        Command::Spectrum(a) => run_campaign("spectrum", a, campaigns::spectrum).map(|_| true),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
