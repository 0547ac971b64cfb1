//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run everything with `cargo test --release -p mqubit --test acceptance`, or a
//! subset by number: `... --test acceptance -- 4 9`. The process exits 0 unless
//! `MQUBIT_ACCEPTANCE_STRICT=1` is set and some criterion failed.

use std::f64::consts::{LN_2, PI};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use mqubit::campaigns::{analytic_point, split_currents, AnalyticPoint};
use mqubit::config::{load_config, parse_config, RunConfig};
use mqubit::ensemble::Workers;
use mqubit::validate::{bisect, flow_system, noise_system};
use mqubit_core::energetics::{analytic_flow, cop, flow_breakdown, mirror_axis_sign_change, monitor_flow, steady_flows};
use mqubit_core::lindblad::{evolve, DEFAULT_EVOLVE_STEP};
use mqubit_core::noise::{
    excess_energy_with, fano_closed_form, fano_ratio, q_jump, s0_exact, s0_weak_coupling, s1_from_parts, ExcessSettings,
    NoiseMc, NoiseSettings,
};
use mqubit_core::qubit::{density, effective_bath, Bath, BathSpec, DEFAULT_OMEGA_C};
use mqubit_core::rng::uniform_at;
use mqubit_core::trajectory::{InitialState, TrajectoryConfig, TrajectoryRunner};
use mqubit_core::{BlochState, MonitorConfig, QubitParams, Rates, System};

const SEED: u64 = 20_240_601;
const STRICT_ENV: &str = "MQUBIT_ACCEPTANCE_STRICT";

/// Fig. 4 measurement-only sweep, `θ_m/π = 0, 0.1, …, 1`.
const POISSON_POINTS: usize = 11;
const POISSON_TRAJ: usize = 100_000;
/// Points where the Monte Carlo `S₁` is compared.
const BACKACTION_POINTS: [f64; 5] = [0.3, 0.4, 0.5, 0.6, 0.7];
/// Points re-run at half the step.
const REFINED_POINTS: [f64; 2] = [0.3, 0.7];

struct Report {
    selected: Vec<u32>,
    passed: usize,
    failed: Vec<u32>,
}

impl Report {
    fn wants(&self, id: u32) -> bool {
        self.selected.is_empty() || self.selected.contains(&id)
    }

    fn record(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("{} {id:>2} {name:<28} {detail}", if pass { "PASS" } else { "FAIL" });
        if pass {
            self.passed += 1;
        } else {
            self.failed.push(id);
        }
    }
}

fn uniform(stream: u64, slot: u64) -> f64 {
    uniform_at(SEED, stream, slot)
}

fn rates_fig2() -> Rates {
    Rates::new(0.1, 0.05).unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn diagonal(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 / (points - 1) as f64).collect()
}

fn flow_extrema(report: &mut Report, workers: &Workers) {
    let grid: Vec<(f64, f64)> = (0..101)
        .flat_map(|i| (0..101).map(move |j| (i as f64 / 100.0, j as f64 / 100.0)))
        .collect();
    let flows = workers.map(&grid, |&(a, b)| steady_flows(&flow_system(a * PI, b * PI)).unwrap().1.j_total);
    let gamma_delta = 0.1;
    let (imax, jmax) = flows.iter().enumerate().fold((0, f64::MIN), |acc, (i, &j)| if j > acc.1 { (i, j) } else { acc });
    let (imin, jmin) = flows.iter().enumerate().fold((0, f64::MAX), |acc, (i, &j)| if j < acc.1 { (i, j) } else { acc });
    let rel_max = (jmax / gamma_delta - 0.4).abs() / 0.4;
    let rel_min = (jmin / gamma_delta + 0.2).abs() / 0.2;
    let pass = grid[imax] == (0.0, 1.0) && grid[imin] == (1.0, 0.0) && rel_max <= 0.02 && rel_min <= 0.02;
    report.record(
        1,
        "flow_extrema",
        pass,
        format!(
            "max {:.5} at {:?}, min {:.5} at {:?} (units γΔ; rel err {rel_max:.2e}, {rel_min:.2e}; tol 2e-2)",
            jmax / gamma_delta,
            grid[imax],
            jmin / gamma_delta,
            grid[imin]
        ),
    );
}

fn effective_temperature(report: &mut Report) {
    let t = effective_bath(&rates_fig2(), &QubitParams::default(), DEFAULT_OMEGA_C).unwrap().temperature;
    let exact = 1.0 / LN_2;
    let three_sig = format!("{t:.2}");
    let pass = (t - exact).abs() < 1e-12 && three_sig == "1.44";
    report.record(2, "effective_temperature", pass, format!("T_eff/Δ = {t:.6} → {three_sig} (expected 1.44)"));
}

fn measurement_only(report: &mut Report, workers: &Workers) {
    let thetas: Vec<f64> = (0..=1000).map(|k| PI * k as f64 / 1000.0).collect();
    let flows = workers.map(&thetas, |&t| steady_flows(&flow_system(t, t)).unwrap().1.j_total);
    let min = flows.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = -1e-10 * 0.1;
    report.record(3, "measurement_only_nonneg", min >= tol, format!("min J(θ,θ) = {min:.3e} (bound {tol:.1e}, 1001 points)"));
}

fn mirror(report: &mut Report) {
    let r = rates_fig2();
    let q = QubitParams::default();
    let mut worst: f64 = 0.0;
    for i in 0..10_000u64 {
        let a = PI * uniform(1, 2 * i);
        let b = PI * uniform(1, 2 * i + 1);
        worst = worst.max((analytic_flow(a, b, &r, 0.1, &q) - analytic_flow(PI - b, PI - a, &r, 0.1, &q)).abs());
    }
    let t_eff = effective_bath(&r, &q, DEFAULT_OMEGA_C).unwrap().temperature;
    let expected = mirror_axis_sign_change(t_eff, &q);
    let root = bisect(|t| analytic_flow(t, PI - t, &r, 0.1, &q), 0.0, PI, 1e-12).unwrap_or(f64::NAN);
    let solver = bisect(
        |t| steady_flows(&flow_system(t, PI - t)).unwrap().1.j_total,
        0.0,
        PI,
        1e-10,
    )
    .unwrap_or(f64::NAN);
    let pass = worst <= 1e-12 && (root - expected).abs() <= 1e-3;
    report.record(
        4,
        "mirror_symmetry_sign_change",
        pass,
        format!(
            "max asymmetry {worst:.1e} (tol 1e-12, 10⁴ pairs); sign change at {root:.6} rad vs {expected:.6} (tol 1e-3); exact solver {solver:.6}"
        ),
    );
}

fn random_system(i: u64) -> System {
    let u = |k: u64| uniform(2, 16 * i + k);
    let q = QubitParams::new(0.5 + u(0)).unwrap();
    let monitor = MonitorConfig::new(
        0.001 + 0.5 * u(1),
        BlochState::new(PI * u(2), 2.0 * PI * u(3)).unwrap(),
        BlochState::new(PI * u(4), 2.0 * PI * u(5)).unwrap(),
    )
    .unwrap();
    if i % 2 == 0 {
        let baths = vec![
            Bath {
                temperature: 0.2 + 3.0 * u(6),
                alpha: 0.05 * u(7),
            },
            Bath {
                temperature: 0.2 + 3.0 * u(8),
                alpha: 0.05 * u(9),
            },
        ];
        let spec = BathSpec::new(baths, 0.5 + 10.0 * u(10)).unwrap();
        System::from_baths(q, &spec, monitor)
    } else {
        let emission = 0.005 + 0.5 * u(6);
        System::from_rates(q, Rates::new(emission, emission * u(7)).unwrap(), monitor)
    }
}

fn first_law(report: &mut Report, workers: &Workers) {
    let ids: Vec<u64> = (0..10_000).collect();
    let scaled = workers.map(&ids, |&i| {
        let sys = random_system(i);
        let (_, f) = steady_flows(&sys).unwrap();
        f.first_law_residual().abs() / (sys.monitor.gamma() * sys.qubit.delta())
    });
    let worst = scaled.iter().copied().fold(0.0, f64::max);
    report.record(5, "first_law", worst <= 1e-10, format!("max |J+J_c+J_h|/(γΔ) = {worst:.2e} (tol 1e-10, 10⁴ configurations)"));
}

struct CoolingScan {
    cooling: usize,
    qubit_cooling: usize,
    outside: usize,
    max_jc: f64,
    axis_points: usize,
    axis_monotone: bool,
}

fn cooling_scan(cfg: &RunConfig, workers: &Workers) -> CoolingScan {
    let currents = |tm: f64, tn: f64| {
        let (_, f) = steady_flows(&cfg.system_at(tm, tn).unwrap()).unwrap();
        let (jc, jh) = split_currents(cfg, &f.bath_currents);
        (f.j_total, jc, jh)
    };
    let grid = workers.map(&cfg.points(), |&(tm, tn)| currents(tm, tn));
    let cooling = grid.iter().filter(|g| g.1 > 0.0).count();
    let qubit_cooling = grid.iter().filter(|g| g.0 < 0.0).count();
    let outside = grid.iter().filter(|g| g.1 > 0.0 && g.0 >= 0.0).count();
    let max_jc = grid.iter().map(|g| g.1).fold(f64::MIN, f64::max);

    let axis: Vec<f64> = (0..=2000).map(|k| k as f64 / 2000.0).collect();
    let on_axis = workers.map(&axis, |&tm| currents(tm, 1.0 - tm));
    let mut axis_points = 0;
    let mut axis_monotone = true;
    let mut prev: Option<(f64, f64)> = None;
    for &(_, jc, jh) in &on_axis {
        if jc > 0.0 {
            axis_points += 1;
            let c = cop(jc, jh).unwrap();
            if let Some((pj, pc)) = prev {
                if (jc - pj) * (c - pc) < 0.0 {
                    axis_monotone = false;
                }
            }
            prev = Some((jc, c));
        } else {
            prev = None;
        }
    }
    CoolingScan {
        cooling,
        qubit_cooling,
        outside,
        max_jc,
        axis_points,
        axis_monotone,
    }
}

fn cooling(report: &mut Report, workers: &Workers) {
    let path = configs().join("fig3.cfg");
    let cfg = load_config(&path).unwrap();
    let s = cooling_scan(&cfg, workers);
    let pass = s.cooling > 0 && s.outside == 0 && s.qubit_cooling > s.cooling && s.axis_points > 0 && s.axis_monotone;
    report.record(
        6,
        "cooling_region",
        pass,
        format!(
            "J_c>0 at {} of 10201 points (max J_c {:.3e}), J<0 at {}, J_c>0 outside J<0 at {}; mirror axis: {} points, COP monotone in J_c: {}",
            s.cooling, s.max_jc, s.qubit_cooling, s.outside, s.axis_points, s.axis_monotone
        ),
    );
    let text = std::fs::read_to_string(&path).unwrap().replacen("delta = 1.0", "delta = 1.0\nomega_c = 1.0", 1);
    let s = cooling_scan(&parse_config(&text).unwrap(), workers);
    println!(
        "     info: same scan with ω_c = Δ: J_c>0 at {} points (max {:.3e}), J<0 at {}, outside {}, axis {} points, COP monotone {}",
        s.cooling, s.max_jc, s.qubit_cooling, s.outside, s.axis_points, s.axis_monotone
    );
}

/// Unraveling setup shared by criteria 7 and 11.
fn unraveling_system() -> System {
    flow_system(0.3 * PI, 0.8 * PI)
}

struct Unraveling {
    worst_z: f64,
    flow: NoiseMc,
    j: f64,
}

fn unraveling_run(workers: &Workers, refine: u32) -> Unraveling {
    let sys = unraveling_system();
    let base = TrajectoryConfig {
        initial: InitialState::Pure(BlochState::EXCITED),
        ..TrajectoryConfig::minimal(&sys, 10_000, SEED)
    };
    let cfg = base.refined(refine);
    let runner = TrajectoryRunner::new(&cfg, &sys).unwrap();
    let gp = sys.rates().gp();
    let times: Vec<f64> = (1..=10).map(|k| (k as f64 * 2.0 / gp / 0.05).round() * 0.05).collect();
    let ens = workers.mean_state(&runner, &times, cfg.n_traj).unwrap();
    let t_end = *times.last().unwrap();
    let path = evolve(&density(&BlochState::EXCITED), &sys.liouvillian(), t_end, DEFAULT_EVOLVE_STEP).unwrap();
    let mut worst_z: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let me = path.at(t).coords();
        let mc = ens.mean[k].coords();
        for i in 1..4 {
            worst_z = worst_z.max((mc[i] - me[i]).abs() / ens.stderr[k][i]);
        }
    }
    let steady = TrajectoryConfig::minimal(&sys, 10_000, SEED).refined(refine);
    let runner = TrajectoryRunner::new(&steady, &sys).unwrap();
    let j = flow_breakdown(runner.steady_state(), &sys).j_total;
    let flow = workers.noise(&runner, &NoiseSettings::poisson_only(), j, steady.n_traj).unwrap();
    Unraveling { worst_z, flow, j }
}

fn unraveling(report: &mut Report, u: &Unraveling) {
    let z = (u.flow.flow - u.j).abs() / u.flow.flow_stderr;
    let pass = u.worst_z <= 5.0 && z <= 3.0;
    report.record(
        7,
        "unraveling_oracle",
        pass,
        format!(
            "mean state max |z| = {:.2} over 10 checkpoints (tol 5); window flow {:.6e} ± {:.1e} vs {:.6e}, |z| = {z:.2} (tol 3)",
            u.worst_z, u.flow.flow, u.flow.flow_stderr, u.j
        ),
    );
}

fn noise_run(workers: &Workers, theta: f64, refine: u32) -> NoiseMc {
    let sys = noise_system(theta * PI, theta * PI);
    let cfg = TrajectoryConfig::minimal(&sys, POISSON_TRAJ, SEED).refined(refine);
    let runner = TrajectoryRunner::new(&cfg, &sys).unwrap();
    let j = monitor_flow(runner.steady_state(), &sys.qubit, &sys.monitor).j_total;
    workers.noise(&runner, &NoiseSettings::standard(&sys, cfg.dt, vec![]), j, cfg.n_traj).unwrap()
}

fn poisson(report: &mut Report, sweep: &[(f64, NoiseMc)]) {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (theta, mc) in sweep {
        let weak = s0_weak_coupling(&noise_system(theta * PI, theta * PI));
        let z = if mc.estimate.s0_stderr > 0.0 {
            (mc.estimate.s0 - weak).abs() / mc.estimate.s0_stderr
        } else if mc.estimate.s0 == weak {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
        lines.push(format!("{theta:.1}:{z:.2}"));
    }
    let analytic: Vec<f64> = diagonal(101).iter().map(|t| s0_weak_coupling(&noise_system(t * PI, t * PI))).collect();
    let scale = analytic.iter().copied().fold(0.0, f64::max);
    let asym = (0..=50).map(|k| (analytic[k] - analytic[100 - k]).abs()).fold(0.0, f64::max) / scale;
    let pass = worst <= 3.0 && asym > 0.1;
    report.record(
        8,
        "poisson_noise",
        pass,
        format!(
            "max |z| = {worst:.2} at {} points, n = {POISSON_TRAJ} (tol 3) [{}]; max |S₀(θ)−S₀(π−θ)|/max S₀ = {asym:.3}",
            sweep.len(),
            lines.join(" ")
        ),
    );
}

fn analytic_at(theta: f64, excess: &ExcessSettings) -> AnalyticPoint {
    analytic_point(&noise_system(theta * PI, theta * PI), excess).unwrap()
}

fn backaction(report: &mut Report, workers: &Workers, sweep: &[(f64, NoiseMc)]) {
    let excess = ExcessSettings::default();
    let grid = diagonal(201);
    let s1 = workers.map(&grid, |&t| analytic_at(t, &excess).s1);
    let ends = s1[0].abs().max(s1[200].abs());
    let scale = s1.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut crossings = Vec::new();
    for k in 1..199 {
        if s1[k].signum() != s1[k + 1].signum() {
            let root = bisect(|t| analytic_at(t, &excess).s1, grid[k], grid[k + 1], 1e-7);
            crossings.push(root.unwrap_or(f64::NAN));
        }
    }
    let q_ex_zero = bisect(|t| analytic_at(t, &excess).q_ex, 0.3, 0.39, 1e-7).unwrap_or(f64::NAN);
    let q_jump_zero = bisect(|t| analytic_at(t, &excess).q_jump, 0.3, 0.45, 1e-9).unwrap_or(f64::NAN);
    let crossings_ok = crossings.len() == 2
        && (crossings[0] - 0.381).abs() <= 0.005
        && (0.393 - 0.005..=0.395 + 0.005).contains(&crossings[1]);
    let zeros_ok = (q_ex_zero - 0.381).abs() <= 0.005 && (0.393 - 0.005..=0.395 + 0.005).contains(&q_jump_zero);
    let ends_ok = ends <= 1e-12 * scale;
    report.record(
        9,
        "backaction_zero_crossings",
        crossings_ok && zeros_ok && ends_ok,
        format!(
            "|S₁| at 0, π = {ends:.1e}; interior S₁ zeros {crossings:.4?}; Q_ex = 0 at {q_ex_zero:.4}, Q_jump = 0 at {q_jump_zero:.4} (units π)"
        ),
    );

    let ratio_scale = 0.01 / 0.45;
    let mut ok = true;
    let mut lines = Vec::new();
    for &theta in &BACKACTION_POINTS {
        let Some((_, mc)) = sweep.iter().find(|(t, _)| (t - theta).abs() < 1e-9) else {
            continue;
        };
        let an = analytic_at(theta, &excess).s1;
        let est = &mc.estimate;
        let ratio = est.s1_dc.abs() / est.s0 / ratio_scale;
        let sign = est.s1_dc.signum() == an.signum();
        ok &= sign && (0.1..=10.0).contains(&ratio);
        lines.push(format!("{theta:.1}: {:.2e}±{:.1e} vs {an:.2e} (|S₁|/S₀ = {ratio:.2} γ/γ₊)", est.s1_dc, est.s1_stderr));
    }
    report.record(9, "backaction_mc_sign_magnitude", ok && lines.len() == BACKACTION_POINTS.len(), lines.join("; "));
}

fn fano(report: &mut Report, workers: &Workers) {
    let excess = ExcessSettings::default();
    let grid = diagonal(201);
    let rows = workers.map(&grid, |&t| {
        let sys = noise_system(t * PI, t * PI);
        let rho = sys.steady_state().unwrap();
        let qe = excess_energy_with(&sys, &excess).unwrap().value;
        let qj = q_jump(&rho, &sys.qubit, t * PI);
        let closed = fano_closed_form(qj, qe).unwrap_or(f64::NAN);
        let ratio = fano_ratio(s0_exact(&rho, &sys), s1_from_parts(&rho, &sys, qe)).unwrap_or(f64::NAN);
        (t, closed, ratio)
    });
    let identity = rows
        .iter()
        .filter(|r| r.1.is_finite() && r.2.is_finite())
        .map(|r| (r.1 - r.2).abs())
        .fold(0.0, f64::max);
    let ends = (rows[0].1 - 1.0).abs().max((rows[200].1 - 1.0).abs());
    let in_band = |t: f64| (0.05..=0.35).contains(&t) || (0.45..=0.95).contains(&t);
    let sub = rows.iter().filter(|r| in_band(r.0)).all(|r| r.1 < 1.0);
    let sub_worst = rows.iter().filter(|r| in_band(r.0)).map(|r| r.1).fold(f64::MIN, f64::max);
    let lo = bisect(|t| analytic_at(t, &excess).q_ex, 0.3, 0.39, 1e-9).unwrap_or(f64::NAN);
    let hi = bisect(|t| analytic_at(t, &excess).q_jump, 0.3, 0.45, 1e-9).unwrap_or(f64::NAN);
    let inner: Vec<f64> = (1..200).map(|k| lo + (hi - lo) * k as f64 / 200.0).collect();
    let peak = workers
        .map(&inner, |&t| analytic_at(t, &excess).fano)
        .into_iter()
        .fold(f64::MIN, f64::max);
    let pass = identity <= 1e-10 && ends <= 1e-10 && sub && peak > 1.0;
    report.record(
        10,
        "fano_factor",
        pass,
        format!(
            "identity gap {identity:.1e} (tol 1e-10); |F−1| at 0, π = {ends:.1e}; max F on bands = {sub_worst:.4}; max F in ({lo:.4}, {hi:.4}) = {peak:.4e}"
        ),
    );
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn discretization(report: &mut Report, workers: &Workers, coarse: &Unraveling, sweep: &[(f64, NoiseMc)]) {
    let half = ExcessSettings {
        dt: 0.5 * DEFAULT_EVOLVE_STEP,
        ..ExcessSettings::default()
    };
    let thetas = diagonal(POISSON_POINTS);
    let pairs = workers.map(&thetas, |&t| (analytic_at(t, &ExcessSettings::default()), analytic_at(t, &half)));
    let floor = 1e-12;
    let mut analytic: f64 = 0.0;
    for (a, b) in &pairs {
        for (x, y) in [(a.s1, b.s1), (a.fano, b.fano), (a.q_ex, b.q_ex), (a.s0_exact, b.s0_exact), (a.q_jump, b.q_jump)] {
            if x.abs().max(y.abs()) > floor {
                analytic = analytic.max(relative_change(x, y));
            }
        }
    }
    let sys = unraveling_system();
    let rho0 = density(&BlochState::EXCITED);
    let p1 = evolve(&rho0, &sys.liouvillian(), 100.0, DEFAULT_EVOLVE_STEP).unwrap();
    let p2 = evolve(&rho0, &sys.liouvillian(), 100.0, 0.5 * DEFAULT_EVOLVE_STEP).unwrap();
    for t in [1.0, 10.0, 50.0, 100.0] {
        let (a, b) = (p1.at(t).coords(), p2.at(t).coords());
        for i in 1..4 {
            if a[i].abs().max(b[i].abs()) > floor {
                analytic = analytic.max(relative_change(a[i], b[i]));
            }
        }
    }

    let fine = unraveling_run(workers, 2);
    let mut mc_worst = (fine.flow.flow - coarse.flow.flow).abs() / coarse.flow.flow_stderr;
    let mut lines = vec![format!("flow {mc_worst:.2}")];
    for &theta in &REFINED_POINTS {
        let Some((_, a)) = sweep.iter().find(|(t, _)| (t - theta).abs() < 1e-9) else {
            continue;
        };
        let b = noise_run(workers, theta, 2);
        let zs = [
            (a.flow - b.flow).abs() / a.flow_stderr,
            (a.estimate.s0 - b.estimate.s0).abs() / a.estimate.s0_stderr,
            (a.estimate.s1_dc - b.estimate.s1_dc).abs() / a.estimate.s1_stderr,
        ];
        mc_worst = zs.iter().copied().fold(mc_worst, f64::max);
        lines.push(format!("{theta:.1}: J {:.2} S₀ {:.2} S₁ {:.2}", zs[0], zs[1], zs[2]));
    }
    let pass = analytic < 1e-3 && mc_worst < 1.0;
    report.record(
        11,
        "discretization_stability",
        pass,
        format!(
            "analytic max rel change {analytic:.1e} (tol 1e-3); MC shifts in stderr units [{}] (tol 1)",
            lines.join("; ")
        ),
    );
}

fn run_cli(args: &[&str], out: &Path, threads: Option<&str>, env_threads: Option<&str>) -> Vec<u8> {
    let _ = std::fs::remove_file(out);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mqubit"));
    cmd.args(args).arg("--out").arg(out).env_remove("MQUBIT_THREADS");
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    if let Some(t) = env_threads {
        cmd.env("MQUBIT_THREADS", t);
    }
    let status = cmd.output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out).unwrap()
}

fn determinism(report: &mut Report) {
    let dir = std::env::temp_dir().join(format!("mqubit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let noise_cfg = dir.join("noise.cfg");
    std::fs::write(
        &noise_cfg,
        "[physics]\ngamma_plus = 0.3\ngamma_minus = 0.15\n\n[monitor]\ngamma = 0.01\n\n\
         [trajectory]\nn_traj = 700\ncorrelations = true\n\n[sweep]\ntheta_m = [0.3, 0.6]\ndiagonal = true\n",
    )
    .unwrap();
    let fig2 = configs().join("fig2.cfg");
    let cases: [(&str, Vec<&str>); 2] = [
        ("sweep-flow", vec!["sweep-flow", "--config", fig2.to_str().unwrap(), "--seed", "5"]),
        ("noise", vec!["noise", "--config", noise_cfg.to_str().unwrap(), "--seed", "5"]),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, args) in &cases {
        let out = dir.join(format!("{name}.csv"));
        let runs = [
            run_cli(args, &out, Some("1"), None),
            run_cli(args, &out, Some("1"), None),
            run_cli(args, &out, Some("4"), None),
            run_cli(args, &out, None, Some("3")),
        ];
        let same = runs.iter().all(|r| r == &runs[0]) && !runs[0].is_empty();
        ok &= same;
        details.push(format!("{name}: {} bytes, identical {same}", runs[0].len()));
    }
    let _ = std::fs::remove_dir_all(&dir);
    report.record(12, "determinism", ok, format!("{} (threads 1, 1, 4, env 3)", details.join("; ")));
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut report = Report {
        selected,
        passed: 0,
        failed: Vec::new(),
    };
    let workers = Workers::new(None).unwrap();
    let start = Instant::now();
    println!("acceptance: {} worker threads, seed {SEED}", workers.threads());

    if report.wants(1) {
        flow_extrema(&mut report, &workers);
    }
    if report.wants(2) {
        effective_temperature(&mut report);
    }
    if report.wants(3) {
        measurement_only(&mut report, &workers);
    }
    if report.wants(4) {
        mirror(&mut report);
    }
    if report.wants(5) {
        first_law(&mut report, &workers);
    }
    if report.wants(6) {
        cooling(&mut report, &workers);
    }
    let coarse = (report.wants(7) || report.wants(11)).then(|| unraveling_run(&workers, 1));
    if let (true, Some(u)) = (report.wants(7), &coarse) {
        unraveling(&mut report, u);
    }
    let sweep: Vec<(f64, NoiseMc)> = if report.wants(8) {
        diagonal(POISSON_POINTS).into_iter().map(|t| (t, noise_run(&workers, t, 1))).collect()
    } else if report.wants(9) || report.wants(11) {
        let mut pts: Vec<f64> = BACKACTION_POINTS.to_vec();
        pts.extend(REFINED_POINTS);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.into_iter().map(|t| (t, noise_run(&workers, t, 1))).collect()
    } else {
        Vec::new()
    };
    if report.wants(8) {
        poisson(&mut report, &sweep);
    }
    if report.wants(9) {
        backaction(&mut report, &workers, &sweep);
    }
    if report.wants(10) {
        fano(&mut report, &workers);
    }
    if let (true, Some(u)) = (report.wants(11), &coarse) {
        discretization(&mut report, &workers, u, &sweep);
    }
    if report.wants(12) {
        determinism(&mut report);
    }

    println!(
        "acceptance: {} checks passed, {} failed (criteria {:?}) in {:.0} s",
        report.passed,
        report.failed.len(),
        report.failed,
        start.elapsed().as_secs_f64()
    );
    let strict = std::env::var(STRICT_ENV).is_ok_and(|v| v == "1");
    if strict && !report.failed.is_empty() {
        std::process::exit(1);
    }
}
