//! Run configuration files.
//!
//! TOML with the sections `[physics]`, `[monitor]`, `[trajectory]`,
//! `[sweep]` and `[output]`. Energies and times are in units of `Δ` and
//! `1/Δ`; angles are in units of `π`.

use std::fmt;
use std::path::PathBuf;

use mqubit_core::qubit::DEFAULT_OMEGA_C;
use mqubit_core::trajectory::{InitialState, TrajectoryConfig, DEFAULT_TRAJECTORY_STEP};
use mqubit_core::{Bath, BathSpec, BlochState, MonitorConfig, QubitParams, Rates, System};
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// Trajectory count used when a config does not set one.
pub const DEFAULT_N_TRAJ: usize = 100_000;
/// Master seed used when a config does not set one.
pub const DEFAULT_SEED: u64 = 1;

/// Parse or validation failure, with the offending line when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    physics: Option<RawPhysics>,
    monitor: Option<RawMonitor>,
    #[serde(default)]
    trajectory: RawTrajectory,
    sweep: Option<RawSweep>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    #[serde(default = "one")]
    delta: f64,
    gamma_plus: Option<f64>,
    gamma_minus: Option<f64>,
    omega_c: Option<f64>,
    bath: Option<Vec<RawBath>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    temperature: f64,
    alpha: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonitor {
    gamma: f64,
    #[serde(default)]
    theta_m: f64,
    #[serde(default)]
    phi_m: f64,
    theta_n: Option<f64>,
    phi_n: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTrajectory {
    dt: Option<f64>,
    t_equilibrate: Option<f64>,
    t_window: Option<f64>,
    n_traj: Option<usize>,
    seed: Option<u64>,
    initial_theta: Option<f64>,
    initial_phi: Option<f64>,
    checkpoints: Option<Vec<f64>>,
    #[serde(default)]
    correlations: bool,
    omegas: Option<Vec<f64>>,
    centering: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    theta_m: RawGrid,
    theta_n: Option<RawGrid>,
    #[serde(default)]
    diagonal: bool,
    #[serde(default)]
    mirror: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    stride: Option<usize>,
}

fn one() -> f64 {
    1.0
}

/// Which flow is subtracted from the step energies in noise estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Centering {
    /// Exact steady-state flow from the master equation.
    Solver,
    /// Ensemble sample mean from a first pass; diagnostic only.
    SampleMean,
}

/// Trajectory campaign settings; unset times default from `γ₊`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySection {
    pub dt: f64,
    pub t_equilibrate: Option<f64>,
    pub t_window: Option<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub initial: InitialState,
    pub checkpoints: Option<Vec<f64>>,
    pub correlations: bool,
    pub omegas: Vec<f64>,
    pub centering: Centering,
}

impl TrajectorySection {
    /// Engine configuration for `system`.
    pub fn config_for(&self, system: &System) -> TrajectoryConfig {
        let minimal = TrajectoryConfig::minimal(system, self.n_traj, self.seed);
        TrajectoryConfig {
            dt: self.dt,
            t_equilibrate: self.t_equilibrate.unwrap_or(minimal.t_equilibrate),
            t_window: self.t_window.unwrap_or(minimal.t_window),
            n_traj: self.n_traj,
            master_seed: self.seed,
            initial: self.initial,
        }
    }
}

/// Grid of `(θ_m, θ_n)` points in units of `π`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub stride: usize,
}

/// Validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// System at the `[monitor]` angles.
    pub system: System,
    /// Bath temperatures in `[physics]` order; empty for bare rates.
    pub bath_temperatures: Vec<f64>,
    pub trajectory: TrajectorySection,
    pub sweep: Option<Sweep>,
    pub output: OutputSection,
    /// SHA-256 of the configuration text.
    pub hash: String,
}

impl RunConfig {
    /// `System` with the monitor moved to `(θ_m, θ_n)` (units of `π`), keeping `γ` and the azimuths.
    pub fn system_at(&self, theta_m: f64, theta_n: f64) -> Result<System, mqubit_core::Error> {
        let mc = &self.system.monitor;
        let m = BlochState::new(theta_m * std::f64::consts::PI, mc.measure.phi())?;
        let n = BlochState::new(theta_n * std::f64::consts::PI, mc.feedback.phi())?;
        Ok(self.system.with_monitor(MonitorConfig::new(mc.gamma(), m, n)?))
    }

    /// Sweep points, or the single `[monitor]` point.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match &self.sweep {
            Some(s) => s.points.clone(),
            None => {
                let mc = &self.system.monitor;
                vec![(mc.measure.theta() / std::f64::consts::PI, mc.feedback.theta() / std::f64::consts::PI)]
            }
        }
    }
}

/// Line (1-based) of `key` inside `[section]`, or of the section header.
fn locate(text: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').to_string();
            if current == section && header.is_none() {
                header = Some(i + 1);
            }
            continue;
        }
        if let Some(k) = key {
            let matches = current == section
                && line
                    .split_once('=')
                    .is_some_and(|(lhs, _)| lhs.trim() == k);
            if matches {
                return Some(i + 1);
            }
        }
    }
    header
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, section: &str, key: Option<&str>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: locate(self.text, section, key),
            message: message.into(),
        }
    }

    fn core(&self, section: &str, key: Option<&str>, e: mqubit_core::Error) -> ConfigError {
        match key {
            Some(k) => self.err(section, key, format!("[{section}] {k}: {e}")),
            None => self.err(section, key, format!("[{section}]: {e}")),
        }
    }
}

fn grid(ctx: &Ctx<'_>, key: &str, g: RawGrid) -> Result<Vec<f64>, ConfigError> {
    let values = match g {
        RawGrid::List(v) => v,
        RawGrid::Range { start, stop, points } => match points {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
        },
    };
    if values.is_empty() {
        return Err(ctx.err("sweep", Some(key), format!("sweep.{key} is empty")));
    }
    if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(ctx.err("sweep", Some(key), format!("sweep.{key} value {bad} outside [0, 1] (units of π)")));
    }
    Ok(values)
}

/// Parses and validates a configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
        message: e.message().to_string(),
    })?;
    let ctx = Ctx { text };

    let physics = raw.physics.ok_or_else(|| ctx.err("physics", None, "missing section [physics]"))?;
    let qubit = QubitParams::new(physics.delta).map_err(|e| ctx.core("physics", Some("delta"), e))?;
    let monitor_raw = raw.monitor.ok_or_else(|| ctx.err("monitor", None, "missing section [monitor]"))?;
    let pi = std::f64::consts::PI;
    let m = BlochState::new(monitor_raw.theta_m * pi, monitor_raw.phi_m * pi)
        .map_err(|e| ctx.core("monitor", Some("theta_m"), e))?;
    let n = BlochState::new(
        monitor_raw.theta_n.unwrap_or(monitor_raw.theta_m) * pi,
        monitor_raw.phi_n.unwrap_or(monitor_raw.phi_m) * pi,
    )
    .map_err(|e| ctx.core("monitor", Some("theta_n"), e))?;
    let monitor = MonitorConfig::new(monitor_raw.gamma, m, n).map_err(|e| ctx.core("monitor", Some("gamma"), e))?;

    let rates_given = physics.gamma_plus.is_some() || physics.gamma_minus.is_some();
    let (system, bath_temperatures) = match (rates_given, physics.bath) {
        (true, Some(_)) => {
            return Err(ctx.err(
                "physics",
                Some("gamma_plus"),
                "give either gamma_plus/gamma_minus or [[physics.bath]] entries, not both",
            ))
        }
        (false, None) => {
            return Err(ctx.err(
                "physics",
                None,
                "[physics] needs gamma_plus and gamma_minus or at least one [[physics.bath]]",
            ))
        }
        (true, None) => {
            let (Some(gp), Some(gm)) = (physics.gamma_plus, physics.gamma_minus) else {
                return Err(ctx.err("physics", Some("gamma_plus"), "gamma_plus and gamma_minus must be given together"));
            };
            if physics.omega_c.is_some() {
                return Err(ctx.err("physics", Some("omega_c"), "omega_c applies only to [[physics.bath]] entries"));
            }
            let rates = Rates::new(gp, gm).map_err(|e| ctx.core("physics", Some("gamma_plus"), e))?;
            (System::from_rates(qubit, rates, monitor), Vec::new())
        }
        (false, Some(baths)) => {
            let temps = baths.iter().map(|b| b.temperature).collect();
            let baths = baths
                .into_iter()
                .map(|b| Bath {
                    temperature: b.temperature,
                    alpha: b.alpha,
                })
                .collect();
            let spec = BathSpec::new(baths, physics.omega_c.unwrap_or(DEFAULT_OMEGA_C))
                .map_err(|e| ctx.core("physics", Some("temperature"), e))?;
            (System::from_baths(qubit, &spec, monitor), temps)
        }
    };
    if system.rates().gp() <= 0.0 {
        return Err(ctx.err("physics", None, "total relaxation rate Γ₊ + Γ₋ must be positive"));
    }

    let t = raw.trajectory;
    let delta = qubit.delta();
    let initial = match (t.initial_theta, t.initial_phi) {
        (None, None) => InitialState::SteadyState,
        (theta, phi) => InitialState::Pure(
            BlochState::new(theta.unwrap_or(0.0) * pi, phi.unwrap_or(0.0) * pi)
                .map_err(|e| ctx.core("trajectory", Some("initial_theta"), e))?,
        ),
    };
    let centering = match t.centering.as_deref() {
        None | Some("solver") => Centering::Solver,
        Some("sample") => Centering::SampleMean,
        Some(other) => {
            return Err(ctx.err(
                "trajectory",
                Some("centering"),
                format!("centering must be \"solver\" or \"sample\", got \"{other}\""),
            ))
        }
    };
    let trajectory = TrajectorySection {
        dt: t.dt.unwrap_or(DEFAULT_TRAJECTORY_STEP / delta),
        t_equilibrate: t.t_equilibrate,
        t_window: t.t_window,
        n_traj: t.n_traj.unwrap_or(DEFAULT_N_TRAJ),
        seed: t.seed.unwrap_or(DEFAULT_SEED),
        initial,
        checkpoints: t.checkpoints,
        correlations: t.correlations,
        omegas: t.omegas.unwrap_or_default(),
        centering,
    };
    trajectory
        .config_for(&system)
        .validate(&system)
        .map_err(|e| {
            let key = match e {
                mqubit_core::Error::StepTooLarge { .. } => "dt",
                mqubit_core::Error::InvalidParameter { name, .. } => name,
                _ => "dt",
            };
            ctx.core("trajectory", Some(key), e)
        })?;

    let sweep = match raw.sweep {
        None => None,
        Some(s) => {
            let tm = grid(&ctx, "theta_m", s.theta_m)?;
            let modes = s.diagonal as u8 + s.mirror as u8 + s.theta_n.is_some() as u8;
            if modes != 1 {
                return Err(ctx.err(
                    "sweep",
                    None,
                    "[sweep] needs exactly one of theta_n, diagonal = true, mirror = true",
                ));
            }
            let points = if s.diagonal {
                tm.iter().map(|&a| (a, a)).collect()
            } else if s.mirror {
                tm.iter().map(|&a| (a, 1.0 - a)).collect()
            } else {
                let tn = grid(&ctx, "theta_n", s.theta_n.expect("checked above"))?;
                tm.iter().flat_map(|&a| tn.iter().map(move |&b| (a, b))).collect()
            };
            Some(Sweep { points })
        }
    };

    let output = OutputSection {
        path: raw.output.path,
        stride: raw.output.stride.unwrap_or(1).max(1),
    };
    let hash = Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(RunConfig {
        system,
        bath_temperatures,
        trajectory,
        sweep,
        output,
        hash,
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}
