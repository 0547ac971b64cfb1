//! Quantum-jump unraveling of the master equation.
//!
//! Per step of length `dt` the monitor detects `|m⟩` with probability
//! `γ⟨m|ρ_c|m⟩dt`. On detection the conditional state is reset to the
//! feedback state `|n⟩⟨n|`; otherwise it follows
//!
//! ```text
//! ρ_c ← ρ_c + (−i[H₀, ρ_c] + D_B[ρ_c] + D_M⁽¹⁾[ρ_c]) dt,
//! D_M⁽¹⁾[ρ_c] = γ⟨m|ρ_c|m⟩ρ_c − (γ/2){P_m, ρ_c}
//! ```
//!
//! followed by trace renormalization. The energy handed over by the monitor
//! in the step is `q1 = tr[H₀ D_M⁽¹⁾[ρ_c]] dt` plus, on detection,
//! `q2 = tr[H₀(P_n − ρ_c)]`.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::lindblad::bath_dissipator;
use crate::mat2::{Mat2, I};
use crate::qubit::{density, BlochState, DensityMatrix, MonitorConfig, QubitParams};
use crate::real::{self, Real4};
use crate::rng::{JumpClock, JumpClocks};
use crate::system::System;

/// Default trajectory step, in units of `1/Δ`.
pub const DEFAULT_TRAJECTORY_STEP: f64 = 0.005;
/// Largest trajectory step, in units of `1/Δ`.
pub const MAX_TRAJECTORY_STEP: f64 = 0.01;
/// Largest `γ dt` for which first-order jump statistics are used.
pub const MAX_GAMMA_DT: f64 = 0.01;
/// Jump probabilities above this are rejected by [`jump_probability`].
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;
/// Minimum equilibration time in units of `1/γ₊`.
pub const MIN_EQUILIBRATE_RELAXATIONS: f64 = 10.0;
/// Minimum record window in units of `1/γ₊`.
pub const MIN_WINDOW_RELAXATIONS: f64 = 50.0;

/// Starting point of each trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    /// The exact stationary state of the master equation.
    SteadyState,
    /// A pure state, for transient studies.
    Pure(BlochState),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub t_equilibrate: f64,
    pub t_window: f64,
    pub n_traj: usize,
    pub master_seed: u64,
    pub initial: InitialState,
}

impl TrajectoryConfig {
    /// Shortest admissible times for the given system at the default step.
    pub fn minimal(system: &System, n_traj: usize, master_seed: u64) -> Self {
        let gp = system.rates().gp();
        TrajectoryConfig {
            dt: DEFAULT_TRAJECTORY_STEP / system.qubit.delta(),
            t_equilibrate: MIN_EQUILIBRATE_RELAXATIONS / gp,
            t_window: MIN_WINDOW_RELAXATIONS / gp,
            n_traj,
            master_seed,
            initial: InitialState::SteadyState,
        }
    }

    /// Same run with the step divided by `factor`; jump thresholds are shared with `self`.
    pub fn refined(&self, factor: u32) -> Self {
        TrajectoryConfig {
            dt: self.dt / factor as f64,
            ..*self
        }
    }

    pub fn equilibrate_steps(&self) -> usize {
        libm::round(self.t_equilibrate / self.dt) as usize
    }

    pub fn window_steps(&self) -> usize {
        libm::round(self.t_window / self.dt) as usize
    }

    pub fn total_steps(&self) -> usize {
        self.equilibrate_steps() + self.window_steps()
    }

    pub fn validate(&self, system: &System) -> Result<()> {
        let delta = system.qubit.delta();
        let limit = MAX_TRAJECTORY_STEP / delta;
        if !(self.dt > 0.0 && self.dt <= limit * (1.0 + 1e-12)) {
            return Err(Error::StepTooLarge { dt: self.dt, limit });
        }
        let gamma_limit = MAX_GAMMA_DT / system.monitor.gamma();
        if self.dt > gamma_limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge {
                dt: self.dt,
                limit: gamma_limit,
            });
        }
        let gp = system.rates().gp();
        let slack = 1.0 - 1e-9;
        if !(self.t_equilibrate * gp >= MIN_EQUILIBRATE_RELAXATIONS * slack) {
            return Err(Error::InvalidParameter {
                name: "t_equilibrate",
                value: self.t_equilibrate,
                reason: "equilibration must last at least 10/γ₊",
            });
        }
        if !(self.t_window * gp >= MIN_WINDOW_RELAXATIONS * slack) {
            return Err(Error::InvalidParameter {
                name: "t_window",
                value: self.t_window,
                reason: "record window must last at least 50/γ₊",
            });
        }
        Ok(())
    }
}

/// Mean waiting time between detections versus the relaxation time
/// `τ_r = 2/γ₊`, reported when jumps are not rare (`τ₀ < 10 τ_r`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeWarning {
    pub tau_jump: f64,
    pub tau_relax: f64,
}

/// `None` when detections are rare on the relaxation scale.
pub fn regime_warning(system: &System, rho_ss: &DensityMatrix) -> Option<RegimeWarning> {
    let rate = system.monitor.gamma() * rho_ss.population(&system.monitor.measure);
    let tau_jump = if rate > 0.0 { 1.0 / rate } else { f64::INFINITY };
    let tau_relax = 2.0 / system.rates().gp();
    (tau_jump < 10.0 * tau_relax).then_some(RegimeWarning { tau_jump, tau_relax })
}

/// Outcome of one trajectory step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepRecord {
    pub jumped: bool,
    /// No-detection energy increment `J_c⁽¹⁾ dt`.
    pub q1: f64,
    /// Jump energy increment; zero unless `jumped`.
    pub q2: f64,
}

impl StepRecord {
    pub fn energy(&self) -> f64 {
        self.q1 + self.q2
    }
}

/// `γ⟨m|ρ_c|m⟩dt`, clamped to `[0, 1]`.
pub fn jump_probability(rho_c: &DensityMatrix, mc: &MonitorConfig, dt: f64) -> Result<f64> {
    let p = (mc.gamma() * rho_c.population(&mc.measure) * dt).clamp(0.0, 1.0);
    if p > MAX_JUMP_PROBABILITY {
        return Err(Error::JumpProbabilityTooLarge { probability: p });
    }
    Ok(p)
}

/// `D_M⁽¹⁾[ρ] = γ⟨m|ρ|m⟩ρ − (γ/2){P_m, ρ}`.
pub fn no_detection_dissipator(rho: &DensityMatrix, mc: &MonitorConfig) -> Mat2 {
    let g = mc.gamma();
    let r = rho.to_mat2();
    r.scale_re(g * rho.population(&mc.measure)) - mc.measure.projector().anticommutator(&r).scale_re(0.5 * g)
}

/// One step of the conditional master equation.
pub fn sme_step(rho_c: &DensityMatrix, jumped: bool, system: &System, dt: f64) -> Result<DensityMatrix> {
    if jumped {
        return Ok(density(&system.monitor.feedback));
    }
    let r = rho_c.to_mat2();
    let drift = system.qubit.hamiltonian().commutator(&r).scale(-I)
        + bath_dissipator(&r, &system.rates())
        + no_detection_dissipator(rho_c, &system.monitor);
    let next = r + drift.scale_re(dt);
    let trace = next.trace().re;
    if !(trace >= 0.5) {
        return Err(Error::TraceCollapse { trace });
    }
    let ge = (next.get(0, 1) + next.get(1, 0).conj()) * 0.5;
    Ok(DensityMatrix::from_parts_unchecked(next.get(0, 0).re, next.get(1, 1).re, ge).normalized())
}

/// `(q1, q2)` for a step starting in `rho_c`.
pub fn step_energies(rho_c: &DensityMatrix, jumped: bool, q: &QubitParams, mc: &MonitorConfig, dt: f64) -> (f64, f64) {
    let q1 = q.energy_of(&no_detection_dissipator(rho_c, mc)) * dt;
    let q2 = if jumped {
        q.state_energy(&mc.feedback) - q.energy(rho_c)
    } else {
        0.0
    };
    (q1, q2)
}

/// Trajectories advanced together by [`TrajectoryRunner::run_batch`].
pub const LANES: usize = 8;

/// Conditional states of a batch, component-major: `x[i][lane]`.
pub type LaneStates = [[f64; LANES]; 4];

/// Steps between explicit trace renormalizations of the fast kernel.
pub const RENORMALIZE_EVERY: usize = 256;

/// Precomputed real-coordinate form of [`sme_step`] and [`step_energies`].
///
/// The gain term `γρ_mm ρ dt` restores exactly the trace lost by the linear
/// part, so the kernel renormalizes only every [`RENORMALIZE_EVERY`] steps
/// to remove rounding drift.
#[derive(Clone, Copy, Debug)]
pub struct SmeKernel {
    /// `I + dt L₀` with `L₀ = −i[H₀,·] + D_B − (γ/2){P_m,·}`.
    propagator: Real4,
    population: [f64; 4],
    energy: [f64; 4],
    anti_energy: [f64; 4],
    feedback: [f64; 4],
    feedback_energy: f64,
    gamma_dt: f64,
}

impl SmeKernel {
    pub fn new(system: &System, dt: f64) -> Self {
        let q = system.qubit;
        let mc = system.monitor;
        let rates = system.rates();
        let p_m = mc.measure.projector();
        let g = mc.gamma();
        let linear = real::superop(|r| {
            q.hamiltonian().commutator(r).scale(-I) + bath_dissipator(r, &rates) - p_m.anticommutator(r).scale_re(0.5 * g)
        });
        let mut propagator = linear;
        for (i, row) in propagator.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v *= dt;
            }
            row[i] += 1.0;
        }
        SmeKernel {
            propagator,
            population: real::functional(|r| (p_m * *r).trace().re),
            energy: real::functional(|r| q.energy_of(r)),
            anti_energy: real::functional(|r| q.energy_of(&p_m.anticommutator(r))),
            feedback: density(&mc.feedback).coords(),
            feedback_energy: q.state_energy(&mc.feedback),
            gamma_dt: g * dt,
        }
    }

    #[inline]
    pub fn probability(&self, x: &[f64; 4]) -> f64 {
        (self.gamma_dt * real::dot(&self.population, x)).clamp(0.0, 1.0)
    }

    #[inline]
    pub fn energies(&self, x: &[f64; 4], jumped: bool) -> (f64, f64) {
        let rho_mm = real::dot(&self.population, x);
        let e = real::dot(&self.energy, x);
        let q1 = self.gamma_dt * (rho_mm * e - 0.5 * real::dot(&self.anti_energy, x));
        let q2 = if jumped { self.feedback_energy - e } else { 0.0 };
        (q1, q2)
    }

    /// One step with the jump decided by `clock`; `x` is left unnormalized.
    #[inline]
    pub fn advance(&self, x: &mut [f64; 4], clock: &mut JumpClock) -> StepRecord {
        let rho_mm = real::dot(&self.population, x);
        let e = real::dot(&self.energy, x);
        let anti = real::dot(&self.anti_energy, x);
        let p = self.gamma_dt * rho_mm;
        let jumped = clock.decide(p.clamp(0.0, 1.0));
        let q1 = self.gamma_dt * (rho_mm * e - 0.5 * anti);
        if jumped {
            *x = self.feedback;
            StepRecord {
                jumped,
                q1,
                q2: self.feedback_energy - e,
            }
        } else {
            let y = real::matvec(&self.propagator, x);
            for (xi, yi) in x.iter_mut().zip(y) {
                *xi = yi + p * *xi;
            }
            StepRecord { jumped, q1, q2: 0.0 }
        }
    }

    /// [`advance`](Self::advance) for [`LANES`] trajectories at once, with
    /// bit-identical results per lane.
    #[inline]
    pub fn advance_lanes(&self, x: &mut LaneStates, clocks: &mut JumpClocks<LANES>, out: &mut [StepRecord; LANES]) {
        let (w, h, a) = (&self.population, &self.energy, &self.anti_energy);
        let mut rho_mm = [0.0; LANES];
        let mut e = [0.0; LANES];
        let mut p = [0.0; LANES];
        let mut pc = [0.0; LANES];
        for l in 0..LANES {
            rho_mm[l] = (w[0] * x[0][l] + w[1] * x[1][l]) + (w[2] * x[2][l] + w[3] * x[3][l]);
            e[l] = (h[0] * x[0][l] + h[1] * x[1][l]) + (h[2] * x[2][l] + h[3] * x[3][l]);
            let anti = (a[0] * x[0][l] + a[1] * x[1][l]) + (a[2] * x[2][l] + a[3] * x[3][l]);
            p[l] = self.gamma_dt * rho_mm[l];
            pc[l] = p[l].clamp(0.0, 1.0);
            out[l].q1 = self.gamma_dt * (rho_mm[l] * e[l] - 0.5 * anti);
            out[l].q2 = 0.0;
        }
        let mut jumped = [false; LANES];
        let any = clocks.decide(&pc, &mut jumped);
        let m = &self.propagator;
        let mut y = [[0.0; LANES]; 4];
        for (yi, mi) in y.iter_mut().zip(m) {
            for l in 0..LANES {
                yi[l] = (mi[0] * x[0][l] + mi[1] * x[1][l]) + (mi[2] * x[2][l] + mi[3] * x[3][l]);
            }
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            for l in 0..LANES {
                xi[l] = yi[l] + p[l] * xi[l];
            }
        }
        for l in 0..LANES {
            out[l].jumped = jumped[l];
        }
        if any {
            for l in 0..LANES {
                if jumped[l] {
                    for i in 0..4 {
                        x[i][l] = self.feedback[i];
                    }
                    out[l].q2 = self.feedback_energy - e[l];
                }
            }
        }
    }

    pub fn renormalize(&self, x: &mut [f64; 4]) -> Result<()> {
        let trace = x[0] + x[1];
        if !(trace >= 0.5) {
            return Err(Error::TraceCollapse { trace });
        }
        for xi in x.iter_mut() {
            *xi /= trace;
        }
        Ok(())
    }

    /// Normalized step with a given outcome.
    pub fn step(&self, x: &[f64; 4], jumped: bool) -> Result<[f64; 4]> {
        if jumped {
            return Ok(self.feedback);
        }
        let p = self.gamma_dt * real::dot(&self.population, x);
        let mut y = real::matvec(&self.propagator, x);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += p * xi;
        }
        self.renormalize(&mut y)?;
        Ok(y)
    }
}

/// What an observer sees after each step.
#[derive(Clone, Copy, Debug)]
pub struct StepView<'a> {
    /// Step index from the start of the run (equilibration included).
    pub index: usize,
    /// `true` inside the record window.
    pub recording: bool,
    pub record: StepRecord,
    /// Conditional state after the step, in real coordinates.
    pub state: &'a [f64; 4],
}

/// What a batch observer sees after each step.
#[derive(Clone, Copy, Debug)]
pub struct BatchView<'a> {
    pub index: usize,
    pub recording: bool,
    pub records: &'a [StepRecord; LANES],
    pub states: &'a LaneStates,
}

impl BatchView<'_> {
    pub fn state(&self, lane: usize) -> [f64; 4] {
        let x = self.states;
        [x[0][lane], x[1][lane], x[2][lane], x[3][lane]]
    }
}

/// Validated configuration plus everything precomputed for running trajectories.
#[derive(Clone, Debug)]
pub struct TrajectoryRunner {
    cfg: TrajectoryConfig,
    kernel: SmeKernel,
    initial: [f64; 4],
    steady: DensityMatrix,
}

impl TrajectoryRunner {
    pub fn new(cfg: &TrajectoryConfig, system: &System) -> Result<Self> {
        cfg.validate(system)?;
        let steady = system.steady_state()?;
        let initial = match cfg.initial {
            InitialState::SteadyState => steady,
            InitialState::Pure(s) => density(&s),
        };
        Ok(TrajectoryRunner {
            cfg: *cfg,
            kernel: SmeKernel::new(system, cfg.dt),
            initial: initial.coords(),
            steady,
        })
    }

    pub fn config(&self) -> &TrajectoryConfig {
        &self.cfg
    }

    pub fn steady_state(&self) -> &DensityMatrix {
        &self.steady
    }

    pub fn initial_state(&self) -> DensityMatrix {
        DensityMatrix::from_coords(self.initial)
    }

    /// Runs trajectory `traj_index` over equilibration and window, calling
    /// `observe` after every step.
    pub fn run_with<F>(&self, traj_index: u64, observe: F) -> Result<()>
    where
        F: FnMut(StepView<'_>),
    {
        self.run_steps(traj_index, self.cfg.total_steps(), observe)
    }

    /// Like [`run_with`](Self::run_with) but stops after `steps` steps.
    pub fn run_steps<F>(&self, traj_index: u64, steps: usize, mut observe: F) -> Result<()>
    where
        F: FnMut(StepView<'_>),
    {
        let mut clock = JumpClock::new(self.cfg.master_seed, traj_index);
        let n_eq = self.cfg.equilibrate_steps();
        let total = steps.min(self.cfg.total_steps());
        let mut x = self.initial;
        for index in 0..total {
            let record = self.kernel.advance(&mut x, &mut clock);
            if index % RENORMALIZE_EVERY == RENORMALIZE_EVERY - 1 {
                self.kernel.renormalize(&mut x)?;
            }
            observe(StepView {
                index,
                recording: index >= n_eq,
                record,
                state: &x,
            });
        }
        Ok(())
    }

    /// Runs trajectories `first .. first + LANES` in lockstep. Each lane
    /// matches [`run_with`](Self::run_with) for its trajectory bit for bit.
    pub fn run_batch<F>(&self, first: u64, observe: F) -> Result<()>
    where
        F: FnMut(BatchView<'_>),
    {
        self.run_batch_steps(first, self.cfg.total_steps(), observe)
    }

    /// Like [`run_batch`](Self::run_batch) but stops after `steps` steps.
    pub fn run_batch_steps<F>(&self, first: u64, steps: usize, mut observe: F) -> Result<()>
    where
        F: FnMut(BatchView<'_>),
    {
        let mut clocks = JumpClocks::<LANES>::new(self.cfg.master_seed, first);
        let n_eq = self.cfg.equilibrate_steps();
        let mut x: LaneStates = core::array::from_fn(|i| [self.initial[i]; LANES]);
        let mut records = [StepRecord::default(); LANES];
        for index in 0..steps.min(self.cfg.total_steps()) {
            self.kernel.advance_lanes(&mut x, &mut clocks, &mut records);
            if index % RENORMALIZE_EVERY == RENORMALIZE_EVERY - 1 {
                for l in 0..LANES {
                    let mut s = [x[0][l], x[1][l], x[2][l], x[3][l]];
                    self.kernel.renormalize(&mut s)?;
                    for i in 0..4 {
                        x[i][l] = s[i];
                    }
                }
            }
            observe(BatchView {
                index,
                recording: index >= n_eq,
                records: &records,
                states: &x,
            });
        }
        Ok(())
    }

    /// Step records of the window.
    pub fn records(&self, traj_index: u64) -> Result<Vec<StepRecord>> {
        let mut out = Vec::with_capacity(self.cfg.window_steps());
        self.run_with(traj_index, |v| {
            if v.recording {
                out.push(v.record);
            }
        })?;
        Ok(out)
    }
}

/// Step records over the window of trajectory `traj_index`.
pub fn run_trajectory(cfg: &TrajectoryConfig, traj_index: u64, system: &System) -> Result<Vec<StepRecord>> {
    TrajectoryRunner::new(cfg, system)?.records(traj_index)
}

/// Running mean and spread of conditional states at fixed checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct StateAccumulator {
    pub count: usize,
    sum: Vec<[f64; 4]>,
    sum_sq: Vec<[f64; 4]>,
}

impl StateAccumulator {
    pub fn new(checkpoints: usize) -> Self {
        StateAccumulator {
            count: 0,
            sum: alloc::vec![[0.0; 4]; checkpoints],
            sum_sq: alloc::vec![[0.0; 4]; checkpoints],
        }
    }

    pub fn add(&mut self, samples: &[[f64; 4]]) {
        for ((s, sq), x) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(samples) {
            for i in 0..4 {
                s[i] += x[i];
                sq[i] += x[i] * x[i];
            }
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &StateAccumulator) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            for i in 0..4 {
                a[i] += b[i];
            }
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            for i in 0..4 {
                a[i] += b[i];
            }
        }
        self.count += other.count;
    }

    pub fn finish(&self, times: Vec<f64>) -> EnsemblePath {
        let n = self.count as f64;
        let mut mean = Vec::with_capacity(self.sum.len());
        let mut stderr = Vec::with_capacity(self.sum.len());
        for (s, sq) in self.sum.iter().zip(&self.sum_sq) {
            let m = [s[0] / n, s[1] / n, s[2] / n, s[3] / n];
            let mut e = [0.0; 4];
            for i in 0..4 {
                let var = (sq[i] / n - m[i] * m[i]).max(0.0) * n / (n - 1.0).max(1.0);
                e[i] = libm::sqrt(var / n);
            }
            mean.push(DensityMatrix::from_coords(m));
            stderr.push(e);
        }
        EnsemblePath { times, mean, stderr }
    }
}

/// Ensemble-averaged conditional state at checkpoint times.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsemblePath {
    pub times: Vec<f64>,
    pub mean: Vec<DensityMatrix>,
    /// Standard error of each real coordinate `(ρ_gg, ρ_ee, Re ρ_ge, Im ρ_ge)`.
    pub stderr: Vec<[f64; 4]>,
}

/// Step indices whose post-step state lands on each checkpoint time;
/// `None` marks `t = 0` (the initial state).
pub fn checkpoint_steps(cfg: &TrajectoryConfig, times: &[f64]) -> Vec<Option<usize>> {
    times
        .iter()
        .map(|&t| {
            let k = libm::round(t / cfg.dt) as usize;
            (k > 0).then(|| (k - 1).min(cfg.total_steps().saturating_sub(1)))
        })
        .collect()
}

/// Conditional states of one trajectory at the checkpoints.
pub fn sample_trajectory(runner: &TrajectoryRunner, traj_index: u64, steps: &[Option<usize>]) -> Result<Vec<[f64; 4]>> {
    let initial = runner.initial_state().coords();
    let mut samples: Vec<[f64; 4]> = steps.iter().map(|_| initial).collect();
    let last = steps.iter().flatten().copied().max();
    if let Some(last) = last {
        runner.run_steps(traj_index, last + 1, |v| {
            for (slot, s) in samples.iter_mut().zip(steps) {
                if *s == Some(v.index) {
                    *slot = *v.state;
                }
            }
        })?;
    }
    Ok(samples)
}

/// Checkpoint samples of trajectories `range`, accumulated in index order.
pub fn state_chunk(runner: &TrajectoryRunner, steps: &[Option<usize>], range: Range<u64>) -> Result<StateAccumulator> {
    let mut acc = StateAccumulator::new(steps.len());
    let initial = runner.initial_state().coords();
    let last = steps.iter().flatten().copied().max();
    let mut first = range.start;
    while first < range.end {
        let mut samples = [(); LANES].map(|_| steps.iter().map(|_| initial).collect::<Vec<_>>());
        if let Some(last) = last {
            runner.run_batch_steps(first, last + 1, |v| {
                for (k, s) in steps.iter().enumerate() {
                    if *s == Some(v.index) {
                        for (l, lane) in samples.iter_mut().enumerate() {
                            lane[k] = v.state(l);
                        }
                    }
                }
            })?;
        }
        for (l, lane) in samples.iter().enumerate() {
            if first + (l as u64) < range.end {
                acc.add(lane);
            }
        }
        first += LANES as u64;
    }
    Ok(acc)
}

/// Serial ensemble average of the conditional state at `times`.
pub fn ensemble_mean_state(cfg: &TrajectoryConfig, system: &System, times: &[f64]) -> Result<EnsemblePath> {
    check_ensemble_size(cfg.n_traj)?;
    let runner = TrajectoryRunner::new(cfg, system)?;
    let steps = checkpoint_steps(cfg, times);
    let acc = state_chunk(&runner, &steps, 0..cfg.n_traj as u64)?;
    Ok(acc.finish(times.to_vec()))
}

/// Ensemble averages need at least 100 trajectories.
pub fn check_ensemble_size(n_traj: usize) -> Result<()> {
    if n_traj < 100 {
        return Err(Error::InvalidParameter {
            name: "n_traj",
            value: n_traj as f64,
            reason: "ensemble averages need at least 100 trajectories",
        });
    }
    Ok(())
}
