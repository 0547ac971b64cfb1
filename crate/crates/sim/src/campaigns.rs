//! One function per subcommand; each writes a single table to a [`RowSink`].

use std::f64::consts::PI;
use std::io;

use mqubit_core::energetics::{analytic_flow, cop, monitor_flow, steady_flows};
use mqubit_core::lindblad::{evolve, DEFAULT_EVOLVE_STEP};
use mqubit_core::noise::{
    excess_energy_with, fano_closed_form, q_jump, s0_exact, s0_weak_coupling, s1_from_parts, ExcessSettings, NoiseMc,
    NoiseSettings,
};
use mqubit_core::qubit::{density, effective_bath, DEFAULT_OMEGA_C};
use mqubit_core::trajectory::{regime_warning, InitialState, TrajectoryRunner};
use mqubit_core::{DensityMatrix, System};
use thiserror::Error;

use crate::config::{Centering, RunConfig};
use crate::ensemble::Workers;
use crate::output::{columns, RowSink};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("at θ_m/π = {theta_m}, θ_n/π = {theta_n}: {source}")]
    Physics {
        theta_m: f64,
        theta_n: f64,
        source: mqubit_core::Error,
    },
    #[error(transparent)]
    Core(#[from] mqubit_core::Error),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, CampaignError>;

fn at<T>(theta_m: f64, theta_n: f64, r: mqubit_core::Result<T>) -> Result<T> {
    r.map_err(|source| CampaignError::Physics { theta_m, theta_n, source })
}

/// Cold-bath and hot-bath currents. The coldest bath is `J_c` and the rest
/// sum to `J_h`; with a single bath `J_h = 0`.
pub fn split_currents(cfg: &RunConfig, currents: &[f64]) -> (f64, f64) {
    let cold = cfg
        .bath_temperatures
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let jc = currents[cold];
    let jh = currents.iter().sum::<f64>() - jc;
    (jc, jh)
}

/// Steady state and flows at each point.
pub fn steady(cfg: &RunConfig, workers: &Workers, sink: &mut dyn RowSink) -> Result<()> {
    let n_baths = cfg.system.bath_rates().len();
    let mut names = columns(&["theta_m", "theta_n", "rho_gg", "rho_ee", "re_rho_ge", "im_rho_ge", "sigma_z", "J", "J1", "J2"]);
    names.extend((0..n_baths).map(|i| format!("J_bath{i}")));
    names.extend(columns(&["first_law_residual", "T_eff", "alpha_eff", "tau_jump", "tau_relax"]));
    sink.header(&names)?;
    let rates = cfg.system.rates();
    let eff = effective_bath(&rates, &cfg.system.qubit, DEFAULT_OMEGA_C).ok();
    let rows = workers.map(&cfg.points(), |&(tm, tn)| -> Result<Vec<f64>> {
        let sys = at(tm, tn, cfg.system_at(tm, tn))?;
        let (rho, flows) = at(tm, tn, steady_flows(&sys))?;
        let mut row = vec![tm, tn, rho.rho_gg(), rho.rho_ee(), rho.rho_ge().re, rho.rho_ge().im, rho.sigma_z()];
        row.extend([flows.j_total, flows.j1, flows.j2]);
        row.extend(flows.bath_currents.iter().copied());
        let tau = sys.monitor.gamma() * rho.population(&sys.monitor.measure);
        row.extend([
            flows.first_law_residual(),
            eff.map_or(f64::NAN, |e| e.temperature),
            eff.map_or(f64::NAN, |e| e.alpha),
            if tau > 0.0 { 1.0 / tau } else { f64::INFINITY },
            2.0 / sys.rates().gp(),
        ]);
        Ok(row)
    });
    for r in rows {
        sink.row(&r?)?;
    }
    Ok(())
}

/// Steady-state monitor flow and bath currents over the sweep grid.
pub fn sweep_flow(cfg: &RunConfig, workers: &Workers, sink: &mut dyn RowSink) -> Result<()> {
    sink.header(&columns(&["theta_m", "theta_n", "J_numeric", "J_analytic", "J1", "J2", "Jc", "Jh"]))?;
    let rates = cfg.system.rates();
    let gamma = cfg.system.monitor.gamma();
    let rows = workers.map(&cfg.points(), |&(tm, tn)| -> Result<Vec<f64>> {
        let sys = at(tm, tn, cfg.system_at(tm, tn))?;
        let (_, f) = at(tm, tn, steady_flows(&sys))?;
        let (jc, jh) = split_currents(cfg, &f.bath_currents);
        let ja = analytic_flow(tm * PI, tn * PI, &rates, gamma, &sys.qubit);
        Ok(vec![tm, tn, f.j_total, ja, f.j1, f.j2, jc, jh])
    });
    for r in rows {
        sink.row(&r?)?;
    }
    Ok(())
}

/// Cold-bath current, cooling flags and COP over the sweep grid.
pub fn cooling(cfg: &RunConfig, workers: &Workers, sink: &mut dyn RowSink) -> Result<()> {
    sink.header(&columns(&["theta_m", "theta_n", "J", "Jc", "Jh", "cop", "measurement_cooling", "qubit_cooling"]))?;
    let rows = workers.map(&cfg.points(), |&(tm, tn)| -> Result<Vec<f64>> {
        let sys = at(tm, tn, cfg.system_at(tm, tn))?;
        let (_, f) = at(tm, tn, steady_flows(&sys))?;
        let (jc, jh) = split_currents(cfg, &f.bath_currents);
        let c = if jc > 0.0 { cop(jc, jh).unwrap_or(f64::NAN) } else { f64::NAN };
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        Ok(vec![tm, tn, f.j_total, jc, jh, c, flag(jc > 0.0), flag(f.j_total < 0.0)])
    });
    for r in rows {
        sink.row(&r?)?;
    }
    Ok(())
}

/// Checkpoint times: the configured list, or ten even steps up to the equilibration time.
pub fn checkpoint_times(cfg: &RunConfig, sys: &System) -> Vec<f64> {
    let t = cfg.trajectory.config_for(sys);
    let raw = cfg.trajectory.checkpoints.clone().unwrap_or_else(|| {
        (1..=10).map(|k| t.t_equilibrate * k as f64 / 10.0).collect()
    });
    let grid = DEFAULT_EVOLVE_STEP / sys.qubit.delta();
    let unit = if t.dt > grid { t.dt } else { grid };
    raw.into_iter().map(|x| (x / unit).round() * unit).collect()
}

/// With one trajectory, dumps its step records every `stride` steps (and at
/// every jump). Otherwise compares the ensemble-mean conditional state with
/// the master-equation path at the checkpoints.
pub fn trajectory(cfg: &RunConfig, workers: &Workers, sink: &mut dyn RowSink) -> Result<()> {
    let sys = cfg.system.clone();
    let tcfg = cfg.trajectory.config_for(&sys);
    let runner = TrajectoryRunner::new(&tcfg, &sys)?;
    if cfg.trajectory.n_traj == 1 {
        sink.header(&columns(&["t", "jumped", "q1", "q2", "rho_gg", "rho_ee", "re_rho_ge", "im_rho_ge"]))?;
        let stride = cfg.output.stride;
        let mut failure = None;
        runner.run_with(0, |v| {
            if failure.is_some() || !(v.record.jumped || (v.index + 1) % stride == 0) {
                return;
            }
            let rho = DensityMatrix::from_coords(*v.state).normalized();
            let row = [
                (v.index + 1) as f64 * tcfg.dt,
                if v.record.jumped { 1.0 } else { 0.0 },
                v.record.q1,
                v.record.q2,
                rho.rho_gg(),
                rho.rho_ee(),
                rho.rho_ge().re,
                rho.rho_ge().im,
            ];
            if let Err(e) = sink.row(&row) {
                failure = Some(e);
            }
        })?;
        return failure.map_or(Ok(()), |e| Err(e.into()));
    }
    sink.header(&columns(&[
        "t",
        "mc_rho_ee",
        "mc_rho_ee_stderr",
        "me_rho_ee",
        "mc_re_rho_ge",
        "mc_re_rho_ge_stderr",
        "me_re_rho_ge",
        "mc_im_rho_ge",
        "mc_im_rho_ge_stderr",
        "me_im_rho_ge",
        "max_z",
    ]))?;
    let times = checkpoint_times(cfg, &sys);
    let ens = workers.mean_state(&runner, &times, cfg.trajectory.n_traj)?;
    let initial = match tcfg.initial {
        InitialState::SteadyState => *runner.steady_state(),
        InitialState::Pure(s) => density(&s),
    };
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let path = evolve(&initial, &sys.liouvillian(), t_end, DEFAULT_EVOLVE_STEP / sys.qubit.delta())?;
    for (k, &t) in times.iter().enumerate() {
        let mc = ens.mean[k];
        let se = ens.stderr[k];
        let me = path.at(t);
        let pairs = [
            (mc.rho_ee(), se[1], me.rho_ee()),
            (mc.rho_ge().re, se[2], me.rho_ge().re),
            (mc.rho_ge().im, se[3], me.rho_ge().im),
        ];
        let max_z = pairs
            .iter()
            .map(|(a, s, b)| if *s > 0.0 { (a - b).abs() / s } else if a == b { 0.0 } else { f64::INFINITY })
            .fold(0.0, f64::max);
        let mut row = vec![t];
        for (a, s, b) in pairs {
            row.extend([a, s, b]);
        }
        row.push(max_z);
        sink.row(&row)?;
    }
    Ok(())
}

/// Analytic dc noise at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticPoint {
    pub s0_weak: f64,
    pub s0_exact: f64,
    pub s1: f64,
    pub fano: f64,
    pub q_jump: f64,
    pub q_ex: f64,
    pub q_ex_tail: f64,
    pub j_solver: f64,
}

pub fn analytic_point(sys: &System, excess: &ExcessSettings) -> mqubit_core::Result<AnalyticPoint> {
    let rho = sys.steady_state()?;
    let ex = excess_energy_with(sys, excess)?;
    if !ex.converged {
        return Err(mqubit_core::Error::NotConverged {
            t_max: ex.t_end,
            tail: ex.tail,
        });
    }
    let qj = q_jump(&rho, &sys.qubit, sys.monitor.feedback.theta());
    Ok(AnalyticPoint {
        s0_weak: s0_weak_coupling(sys),
        s0_exact: s0_exact(&rho, sys),
        s1: s1_from_parts(&rho, sys, ex.value),
        fano: fano_closed_form(qj, ex.value).unwrap_or(f64::NAN),
        q_jump: qj,
        q_ex: ex.value,
        q_ex_tail: ex.tail,
        j_solver: monitor_flow(&rho, &sys.qubit, &sys.monitor).j_total,
    })
}

/// Monte Carlo noise at one point with the configured estimator settings.
pub fn noise_mc(cfg: &RunConfig, workers: &Workers, sys: &System, settings: &NoiseSettings) -> mqubit_core::Result<NoiseMc> {
    let tcfg = cfg.trajectory.config_for(sys);
    let runner = TrajectoryRunner::new(&tcfg, sys)?;
    if let Some(w) = regime_warning(sys, runner.steady_state()) {
        eprintln!(
            "warning: jumps are not rare (τ₀ = {:.3e} < 10 τ_r = {:.3e}); rare-jump formulas may not apply",
            w.tau_jump,
            10.0 * w.tau_relax
        );
    }
    let j = monitor_flow(runner.steady_state(), &sys.qubit, &sys.monitor).j_total;
    let reference = match cfg.trajectory.centering {
        Centering::Solver => j,
        Centering::SampleMean => workers.noise(&runner, &NoiseSettings::poisson_only(), j, tcfg.n_traj)?.flow,
    };
    workers.noise(&runner, settings, reference, tcfg.n_traj)
}

/// Noise estimator settings for `sys` under `cfg`.
pub fn noise_settings(cfg: &RunConfig, sys: &System, correlations: bool) -> NoiseSettings {
    if correlations {
        NoiseSettings::standard(sys, cfg.trajectory.dt, cfg.trajectory.omegas.clone())
    } else {
        NoiseSettings::poisson_only()
    }
}

/// Poisson and backaction noise, Fano factor, `Q_jump` and `Q_ex` per point.
/// Monte Carlo columns appear when `n_traj > 0`; `S₁` and the Fano factor
/// need `correlations = true`.
pub fn noise(cfg: &RunConfig, workers: &Workers, sink: &mut dyn RowSink) -> Result<()> {
    let with_mc = cfg.trajectory.n_traj > 0;
    let mut names = vec!["theta_m", "theta_n", "S0_analytic"];
    if with_mc {
        names.extend(["S0_mc", "S0_stderr"]);
    }
    names.push("S1_analytic");
    if with_mc {
        names.extend(["S1_mc", "S1_stderr"]);
    }
    names.push("fano_analytic");
    if with_mc {
        names.push("fano_mc");
    }
    names.extend(["q_jump", "q_ex", "S0_exact", "q_ex_tail", "J_solver"]);
    if with_mc {
        names.extend(["fano_stderr", "flow_mc", "flow_stderr", "jumps"]);
    }
    sink.header(&columns(&names))?;
    let points = cfg.points();
    let excess = ExcessSettings::default();
    let analytic = workers.map(&points, |&(tm, tn)| -> Result<AnalyticPoint> {
        let sys = at(tm, tn, cfg.system_at(tm, tn))?;
        at(tm, tn, analytic_point(&sys, &excess))
    });
    for (&(tm, tn), a) in points.iter().zip(analytic) {
        let a = a?;
        let mc = if with_mc {
            let sys = at(tm, tn, cfg.system_at(tm, tn))?;
            let settings = noise_settings(cfg, &sys, cfg.trajectory.correlations);
            Some(at(tm, tn, noise_mc(cfg, workers, &sys, &settings))?)
        } else {
            None
        };
        let mut row = vec![tm, tn, a.s0_weak];
        if let Some(m) = &mc {
            row.extend([m.estimate.s0, m.estimate.s0_stderr]);
        }
        row.push(a.s1);
        if let Some(m) = &mc {
            row.extend([m.estimate.s1_dc, m.estimate.s1_stderr]);
        }
        row.push(a.fano);
        if let Some(m) = &mc {
            row.push(m.estimate.fano);
        }
        row.extend([a.q_jump, a.q_ex, a.s0_exact, a.q_ex_tail, a.j_solver]);
        if let Some(m) = &mc {
            row.extend([m.estimate.fano_stderr, m.flow, m.flow_stderr, m.jumps as f64]);
        }
        sink.row(&row)?;
    }
    Ok(())
}

/// Default frequency grid for `spectrum`: `0, 0.05Δ, …, 3Δ`.
pub fn default_omegas(delta: f64) -> Vec<f64> {
    (0..=60).map(|k| 0.05 * k as f64 * delta).collect()
}

/// Finite-frequency noise at the `[monitor]` point.
pub fn spectrum(cfg: &RunConfig, workers: &Workers, sink: &mut dyn RowSink) -> Result<()> {
    sink.header(&columns(&["omega", "S_mc", "S1_mc", "S1_stderr"]))?;
    let sys = cfg.system.clone();
    let omegas = if cfg.trajectory.omegas.is_empty() {
        default_omegas(sys.qubit.delta())
    } else {
        cfg.trajectory.omegas.clone()
    };
    let settings = NoiseSettings::standard(&sys, cfg.trajectory.dt, omegas.clone());
    let mc = noise_mc(cfg, workers, &sys, &settings)?;
    for (k, &w) in omegas.iter().enumerate() {
        let s1 = mc.s1_omega[k];
        sink.row(&[w, mc.estimate.s0 + s1, s1, mc.s1_omega_stderr[k]])?;
    }
    Ok(())
}
