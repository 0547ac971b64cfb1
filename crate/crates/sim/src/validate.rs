//! Invariant suite behind the `validate` subcommand.

use std::f64::consts::PI;
use std::io::Write;

use mqubit_core::energetics::{analytic_flow, flow_breakdown, steady_flows};
use mqubit_core::noise::{excess_energy, fano_closed_form, fano_ratio, q_jump, s0_exact, s1_from_parts, NoiseSettings};
use mqubit_core::qubit::{effective_bath, DEFAULT_OMEGA_C};
use mqubit_core::trajectory::{InitialState, TrajectoryConfig, TrajectoryRunner};
use mqubit_core::lindblad::{evolve, DEFAULT_EVOLVE_STEP};
use mqubit_core::{BlochState, MonitorConfig, QubitParams, Rates, System};

use crate::ensemble::Workers;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

/// Root of `f` on `[a, b]` by bisection; `None` without a sign change.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Γ₊/Δ = 0.1, Γ₋/Δ = 0.05, γ/Δ = 0.1.
pub fn flow_system(theta_m: f64, theta_n: f64) -> System {
    System::from_rates(
        QubitParams::default(),
        Rates::new(0.1, 0.05).expect("valid rates"),
        MonitorConfig::polar(0.1, theta_m, theta_n).expect("valid monitor"),
    )
}

/// Γ₊/Δ = 0.3, Γ₋/Δ = 0.15, γ/Δ = 0.01.
pub fn noise_system(theta_m: f64, theta_n: f64) -> System {
    System::from_rates(
        QubitParams::default(),
        Rates::new(0.3, 0.15).expect("valid rates"),
        MonitorConfig::polar(0.01, theta_m, theta_n).expect("valid monitor"),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Runs every check. Monte Carlo checks use `seed`.
pub fn run_suite(workers: &Workers, seed: u64) -> mqubit_core::Result<Vec<Check>> {
    let mut checks = Vec::new();
    let grid: Vec<(f64, f64)> = (0..=20)
        .flat_map(|i| (0..=20).map(move |j| (PI * i as f64 / 20.0, PI * j as f64 / 20.0)))
        .collect();

    let rows = workers.map(&grid, |&(a, b)| {
        steady_flows(&flow_system(a, b)).map(|(rho, f)| (rho.min_eigenvalue(), rho.trace(), f.first_law_residual()))
    });
    let mut min_eig = f64::INFINITY;
    let mut trace_err: f64 = 0.0;
    let mut first_law: f64 = 0.0;
    for r in rows {
        let (e, t, fl) = r?;
        min_eig = min_eig.min(e);
        trace_err = trace_err.max((t - 1.0).abs());
        first_law = first_law.max(fl.abs());
    }
    checks.push(Check::at_most("steady_state_trace", trace_err, 1e-10));
    checks.push(Check::at_most("steady_state_positivity", -min_eig, 1e-9));
    checks.push(Check::at_most("first_law", first_law, 1e-10 * 0.1));

    let bare = System::from_rates(
        QubitParams::default(),
        Rates::new(0.1, 0.05).expect("valid rates"),
        MonitorConfig::polar(0.0, 0.3, 1.2)?,
    );
    let rho = bare.steady_state()?;
    checks.push(Check::at_most("detailed_balance", (rho.rho_ee() / rho.rho_gg() - 0.5).abs(), 1e-12));

    let jmax = steady_flows(&flow_system(0.0, PI))?.1.j_total;
    let jmin = steady_flows(&flow_system(PI, 0.0))?.1.j_total;
    checks.push(Check::at_most("flow_max", rel(jmax / 0.1, 0.4), 0.02));
    checks.push(Check::at_most("flow_min", rel(jmin / 0.1, -0.2), 0.02));

    let diag: Vec<f64> = (0..=200).map(|k| PI * k as f64 / 200.0).collect();
    let flows = workers.map(&diag, |&t| steady_flows(&flow_system(t, t)).map(|(_, f)| f.j_total));
    let mut diag_min = f64::INFINITY;
    for f in flows {
        diag_min = diag_min.min(f?);
    }
    checks.push(Check::at_most("measurement_only_nonnegative", -diag_min, 1e-10 * 0.1));

    let r = Rates::new(0.1, 0.05).expect("valid rates");
    let q = QubitParams::default();
    let mirror = grid
        .iter()
        .map(|&(a, b)| (analytic_flow(a, b, &r, 0.1, &q) - analytic_flow(PI - b, PI - a, &r, 0.1, &q)).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("mirror_symmetry", mirror, 1e-12));

    let t_eff = effective_bath(&r, &q, DEFAULT_OMEGA_C)?.temperature;
    checks.push(Check::at_most("effective_temperature", (t_eff - 1.0 / 2f64.ln()).abs(), 1e-12));

    let mut fano_gap: f64 = 0.0;
    for &(a, b) in &[(0.7, 2.1), (1.0, 1.0), (2.5, 0.4)] {
        let sys = noise_system(a, b);
        let rho = sys.steady_state()?;
        let qe = excess_energy(&sys)?;
        let qj = q_jump(&rho, &sys.qubit, b);
        let ratio = fano_ratio(s0_exact(&rho, &sys), s1_from_parts(&rho, &sys, qe))?;
        fano_gap = fano_gap.max((ratio - fano_closed_form(qj, qe)?).abs());
    }
    checks.push(Check::at_most("fano_consistency", fano_gap, 1e-10));

    let q_ex_zero = bisect(
        |t| excess_energy(&noise_system(t * PI, t * PI)).unwrap_or(f64::NAN),
        0.37,
        0.39,
        1e-5,
    )
    .unwrap_or(f64::NAN);
    checks.push(Check::at_most("q_ex_zero", (q_ex_zero - 0.381).abs(), 0.005));
    let q_jump_zero = bisect(
        |t| {
            let sys = noise_system(t * PI, t * PI);
            sys.steady_state().map_or(f64::NAN, |rho| q_jump(&rho, &sys.qubit, t * PI))
        },
        0.38,
        0.40,
        1e-6,
    )
    .unwrap_or(f64::NAN);
    checks.push(Check::at_most("q_jump_zero", (q_jump_zero - 0.394).abs(), 0.006));

    let sys = flow_system(0.8, 2.4);
    let cfg = TrajectoryConfig {
        initial: InitialState::Pure(BlochState::EXCITED),
        ..TrajectoryConfig::minimal(&sys, 2000, seed)
    };
    let runner = TrajectoryRunner::new(&cfg, &sys)?;
    let times = [2.0, 5.0, 10.0, 20.0];
    let ens = workers.mean_state(&runner, &times, cfg.n_traj)?;
    let path = evolve(&mqubit_core::qubit::density(&BlochState::EXCITED), &sys.liouvillian(), 20.0, DEFAULT_EVOLVE_STEP)?;
    let mut worst: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let me = path.at(t).coords();
        let mc = ens.mean[k].coords();
        for i in 1..4 {
            worst = worst.max((mc[i] - me[i]).abs() / ens.stderr[k][i]);
        }
    }
    checks.push(Check::at_most("unraveling_mean_state_z", worst, 5.0));

    let steady_cfg = TrajectoryConfig::minimal(&sys, 2000, seed);
    let runner = TrajectoryRunner::new(&steady_cfg, &sys)?;
    let j = flow_breakdown(runner.steady_state(), &sys).j_total;
    let mc = workers.noise(&runner, &NoiseSettings::poisson_only(), j, steady_cfg.n_traj)?;
    checks.push(Check::at_most("unraveling_flow_z", (mc.flow - j).abs() / mc.flow_stderr, 4.0));

    let small = TrajectoryConfig::minimal(&sys, 300, seed);
    let runner = TrajectoryRunner::new(&small, &sys)?;
    let one = Workers::new(Some(1)).expect("pool");
    let settings = NoiseSettings::standard(&sys, small.dt, vec![0.5]);
    let a = format!("{:?}", one.noise(&runner, &settings, j, small.n_traj)?);
    let b = format!("{:?}", workers.noise(&runner, &settings, j, small.n_traj)?);
    checks.push(Check::at_most("thread_count_independence", if a == b { 0.0 } else { 1.0 }, 0.0));
    Ok(checks)
}

/// Machine-readable report: one CSV row per check, after `# key: value` lines.
pub fn write_csv(checks: &[Check], metadata: &[(&str, String)], mut out: impl Write) -> std::io::Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "value", "tolerance", "pass"])?;
    for c in checks {
        w.write_record([c.name.to_string(), c.value.to_string(), c.tolerance.to_string(), c.pass.to_string()])?;
    }
    w.flush()
}

/// Human-readable report.
pub fn summary(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        s.push_str(&format!("{tag} {:<32} {:>12.4e} (tolerance {:.1e})\n", c.name, c.value, c.tolerance));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    s.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    s
}
