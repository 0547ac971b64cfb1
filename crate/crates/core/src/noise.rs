//! Fluctuations of the monitor energy flow.
//!
//! Analytic side: jump energy `Q_jump`, excess energy `Q_ex` from the
//! post-jump transient, and the rare-jump forms
//!
//! ```text
//! S₀ = 2 Q_jump J⁽²⁾ = 2γρ_mm Q_jump²
//! S₁ = 4γρ_mm (Q_jump + Q_ex/2) Q_ex
//! ℱ  = (S₀ + S₁)/S₀ = (1 + Q_ex/Q_jump)²
//! ```
//!
//! Monte Carlo side: per-trajectory estimators built from the step energies
//! `δQ = q1 + q2 − J dt`, reduced over the ensemble in trajectory order.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::energetics::monitor_flow;
use crate::error::{Error, Result};
use crate::lindblad::{meas_dissipator, DEFAULT_EVOLVE_STEP};
use crate::qubit::{density, DensityMatrix, QubitParams, Rates};
use crate::real;
use crate::system::System;
use crate::trajectory::{StepRecord, TrajectoryRunner, LANES};
use core::ops::Range;

/// Relative tolerance on `|J(t) − J|` that ends the transient integration.
pub const EXCESS_TOLERANCE: f64 = 1e-10;
/// Integration horizon in units of `1/γ₊`.
pub const EXCESS_HORIZON: f64 = 50.0;
/// Default lag-bin width for correlation estimates, in units of `1/Δ`.
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
/// Default maximal correlation lag in units of `1/γ₊`.
pub const DEFAULT_MAX_LAG: f64 = 10.0;

/// dc noise summary. Analytic estimates carry zero standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseEstimate {
    pub s0: f64,
    pub s0_stderr: f64,
    pub s1_dc: f64,
    pub s1_stderr: f64,
    pub fano: f64,
    pub fano_stderr: f64,
    pub q_jump: Option<f64>,
    pub q_ex: Option<f64>,
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

/// `tr[H₀(P_n − ρ)] = −(Δ/2)(cos θ_n + ⟨σ_z⟩)`.
pub fn q_jump(rho_ss: &DensityMatrix, q: &QubitParams, theta_n: f64) -> f64 {
    -0.5 * q.delta() * (libm::cos(theta_n) + rho_ss.sigma_z())
}

/// Integration controls for [`excess_energy_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcessSettings {
    /// RK4 step, in units of `1/Δ`.
    pub dt: f64,
    /// Horizon in units of `1/γ₊`.
    pub horizon: f64,
    pub tolerance: f64,
}

impl Default for ExcessSettings {
    fn default() -> Self {
        ExcessSettings {
            dt: DEFAULT_EVOLVE_STEP,
            horizon: EXCESS_HORIZON,
            tolerance: EXCESS_TOLERANCE,
        }
    }
}

/// Result of the transient integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcessEnergy {
    pub value: f64,
    /// Time at which the integration stopped.
    pub t_end: f64,
    /// Estimate of the neglected remainder `∫_{t_end}^∞ (J(t) − J) dt`.
    pub tail: f64,
    pub converged: bool,
}

/// `Q_ex = ∫₀^∞ [J(t) − J] dt` with `ρ(0) = |n⟩⟨n|`, evolving under the
/// unconditional master equation.
///
/// Stops once `|J(t) − J| ≤ tol · max(|J|, γΔ)` has held for a full
/// oscillation period `2π/Δ`.
pub fn excess_energy_with(system: &System, settings: &ExcessSettings) -> Result<ExcessEnergy> {
    let q = system.qubit;
    let mc = system.monitor;
    let delta = q.delta();
    let dt = settings.dt / delta;
    let steady = system.steady_state()?;
    let j_ss = monitor_flow(&steady, &q, &mc).j_total;
    let w = real::functional(|r| q.energy_of(&meas_dissipator(r, &mc)));
    let generator = system.liouvillian().real_form();
    let threshold = settings.tolerance * j_ss.abs().max(mc.gamma() * delta);
    let quiet_needed = libm::ceil(2.0 * PI / delta / dt) as usize;
    let t_max = settings.horizon / system.rates().gp();
    let steps = libm::ceil(t_max / dt) as usize;

    let mut x = density(&mc.feedback).coords();
    let mut prev = real::dot(&w, &x) - j_ss;
    let mut total = 0.0;
    let mut quiet = 0usize;
    let mut peak = prev.abs();
    for k in 1..=steps {
        x = generator.rk4_step(&x, dt);
        let dev = real::dot(&w, &x) - j_ss;
        total += 0.5 * dt * (prev + dev);
        prev = dev;
        if dev.abs() <= threshold {
            quiet += 1;
        } else {
            quiet = 0;
        }
        peak = if k + quiet_needed > steps { peak.max(dev.abs()) } else { dev.abs() };
        if quiet >= quiet_needed {
            return Ok(ExcessEnergy {
                value: total,
                t_end: k as f64 * dt,
                tail: threshold * 2.0 / system.rates().gp(),
                converged: true,
            });
        }
    }
    Ok(ExcessEnergy {
        value: total,
        t_end: steps as f64 * dt,
        tail: peak * 2.0 / system.rates().gp(),
        converged: false,
    })
}

/// [`excess_energy_with`] at default settings; errors if the transient has
/// not died out within `50/γ₊`.
pub fn excess_energy(system: &System) -> Result<f64> {
    let e = excess_energy_with(system, &ExcessSettings::default())?;
    if !e.converged {
        return Err(Error::NotConverged {
            t_max: e.t_end,
            tail: e.tail,
        });
    }
    Ok(e.value)
}

/// Weak-coupling `⟨σ_z⟩` of the steady state (coherences neglected).
pub fn weak_coupling_sigma_z(r: &Rates, gamma: f64, theta_m: f64, theta_n: f64) -> f64 {
    let (cm, cn) = (libm::cos(theta_m), libm::cos(theta_n));
    -(2.0 * r.gm() - gamma * (cm - cn)) / (2.0 * r.gp() + gamma * (1.0 - cm * cn))
}

/// `2 Q_jump J⁽²⁾` evaluated at the given state.
pub fn s0_exact(rho_ss: &DensityMatrix, system: &System) -> f64 {
    let j2 = monitor_flow(rho_ss, &system.qubit, &system.monitor).j2;
    2.0 * q_jump(rho_ss, &system.qubit, system.monitor.feedback.theta()) * j2
}

/// `(γΔ²/4)(⟨σ_z⟩ + cos θ_n)²(1 − ⟨σ_z⟩ cos θ_m)` with the weak-coupling `⟨σ_z⟩`.
pub fn s0_weak_coupling(system: &System) -> f64 {
    let mc = system.monitor;
    let (tm, tn) = (mc.measure.theta(), mc.feedback.theta());
    let sz = weak_coupling_sigma_z(&system.rates(), mc.gamma(), tm, tn);
    let d = system.qubit.delta();
    0.25 * mc.gamma() * d * d * sq(sz + libm::cos(tn)) * (1.0 - sz * libm::cos(tm))
}

/// `4γρ_mm(Q_jump + Q_ex/2)Q_ex` given `Q_ex`.
pub fn s1_from_parts(rho_ss: &DensityMatrix, system: &System, q_ex: f64) -> f64 {
    let mc = system.monitor;
    let qj = q_jump(rho_ss, &system.qubit, mc.feedback.theta());
    4.0 * mc.gamma() * rho_ss.population(&mc.measure) * (qj + 0.5 * q_ex) * q_ex
}

/// Rare-jump dc backaction noise.
pub fn s1_analytic(system: &System) -> Result<f64> {
    let rho = system.steady_state()?;
    Ok(s1_from_parts(&rho, system, excess_energy(system)?))
}

/// `(1 + Q_ex/Q_jump)²`.
pub fn fano_closed_form(q_jump: f64, q_ex: f64) -> Result<f64> {
    if q_jump == 0.0 {
        return Err(Error::FanoDivergent);
    }
    Ok(sq(1.0 + q_ex / q_jump))
}

/// `(S₀ + S₁)/S₀`.
pub fn fano_ratio(s0: f64, s1: f64) -> Result<f64> {
    if s0 == 0.0 {
        return Err(Error::FanoDivergent);
    }
    Ok((s0 + s1) / s0)
}

pub fn fano(system: &System) -> Result<f64> {
    let rho = system.steady_state()?;
    let qj = q_jump(&rho, &system.qubit, system.monitor.feedback.theta());
    fano_closed_form(qj, excess_energy(system)?)
}

/// All analytic dc quantities with `S₀` in its exact-state form. `fano` is
/// NaN where `Q_jump = 0`.
pub fn analytic_noise(system: &System) -> Result<NoiseEstimate> {
    let rho = system.steady_state()?;
    let qj = q_jump(&rho, &system.qubit, system.monitor.feedback.theta());
    let qe = excess_energy(system)?;
    let s0 = s0_exact(&rho, system);
    let s1 = s1_from_parts(&rho, system, qe);
    Ok(NoiseEstimate {
        s0,
        s0_stderr: 0.0,
        s1_dc: s1,
        s1_stderr: 0.0,
        fano: fano_closed_form(qj, qe).unwrap_or(f64::NAN),
        fano_stderr: 0.0,
        q_jump: Some(qj),
        q_ex: Some(qe),
    })
}

/// Estimator controls for the Monte Carlo noise.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSettings {
    /// Steps merged into one bin of the energy record.
    pub steps_per_bin: usize,
    /// Largest lag in bins; zero restricts the estimate to `S₀`.
    pub max_lag_bins: usize,
    /// Angular frequencies at which `S₁(ω)` is estimated.
    pub omegas: Vec<f64>,
}

impl NoiseSettings {
    /// `S₀` only.
    pub fn poisson_only() -> Self {
        NoiseSettings {
            steps_per_bin: 1,
            max_lag_bins: 0,
            omegas: Vec::new(),
        }
    }

    /// Bins of width `0.1/Δ` and lags up to `10/γ₊`.
    pub fn standard(system: &System, dt: f64, omegas: Vec<f64>) -> Self {
        let bin = DEFAULT_BIN_WIDTH / system.qubit.delta();
        let steps_per_bin = (libm::round(bin / dt) as usize).max(1);
        let width = steps_per_bin as f64 * dt;
        let max_lag_bins = libm::ceil(DEFAULT_MAX_LAG / system.rates().gp() / width) as usize;
        NoiseSettings {
            steps_per_bin,
            max_lag_bins,
            omegas,
        }
    }

    pub fn correlations(&self) -> bool {
        self.max_lag_bins > 0
    }
}

/// Per-trajectory estimator state fed one step at a time.
#[derive(Clone, Debug)]
pub struct TrajectoryNoise<'a> {
    settings: &'a NoiseSettings,
    offset: f64,
    steps: usize,
    sum: f64,
    sum_sq: f64,
    jumps: usize,
    in_bin: usize,
    bin: f64,
    bins: Vec<f64>,
}

impl<'a> TrajectoryNoise<'a> {
    /// `reference_flow` is the flow subtracted from every step energy.
    pub fn new(settings: &'a NoiseSettings, reference_flow: f64, dt: f64, window_steps: usize) -> Self {
        let capacity = if settings.correlations() {
            window_steps / settings.steps_per_bin
        } else {
            0
        };
        TrajectoryNoise {
            settings,
            offset: reference_flow * dt,
            steps: 0,
            sum: 0.0,
            sum_sq: 0.0,
            jumps: 0,
            in_bin: 0,
            bin: 0.0,
            bins: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, r: &StepRecord) {
        let dq = r.q1 + r.q2 - self.offset;
        self.steps += 1;
        self.sum += dq;
        self.sum_sq += dq * dq;
        self.jumps += r.jumped as usize;
        if self.settings.correlations() {
            self.bin += dq;
            self.in_bin += 1;
            if self.in_bin == self.settings.steps_per_bin {
                self.bins.push(self.bin);
                self.bin = 0.0;
                self.in_bin = 0;
            }
        }
    }

    pub fn finish(self, dt: f64) -> Result<TrajectorySummary> {
        if self.steps == 0 {
            return Err(Error::WindowTooShort {
                available: 0,
                requested: 1,
            });
        }
        let t = self.steps as f64 * dt;
        let mut summary = TrajectorySummary {
            flow: self.sum / t + self.offset / dt,
            s0: 2.0 * self.sum_sq / t,
            jumps: self.jumps,
            s_dc: None,
            correlation: Vec::new(),
            spectrum: Vec::new(),
        };
        let lags = self.settings.max_lag_bins;
        if lags == 0 {
            return Ok(summary);
        }
        let n = self.bins.len();
        if n <= lags {
            return Err(Error::WindowTooShort {
                available: n,
                requested: lags + 1,
            });
        }
        let b = self.settings.steps_per_bin as f64 * dt;
        // Lag-averaged products of binned energies, per unit time squared.
        let mut corr = vec![0.0; lags + 1];
        for (l, c) in corr.iter_mut().enumerate() {
            let s: f64 = self.bins[..n - l].iter().zip(&self.bins[l..]).map(|(a, c)| a * c).sum();
            *c = s / ((n - l) as f64 * b * b);
        }
        let dc = 2.0 * b * (corr[0] + 2.0 * corr[1..].iter().sum::<f64>());
        summary.s_dc = Some(dc);
        summary.spectrum = self
            .settings
            .omegas
            .iter()
            .map(|&w| binned_spectrum(&corr, b, w))
            .collect();
        summary.correlation = corr;
        Ok(summary)
    }
}

/// Cosine transform of a binned correlation series, `S_B(ω)`.
///
/// Binning leaves the white part `S₀` untouched and multiplies the smooth
/// part by `sinc²(ωb/2)`; see [`binning_response`].
pub fn binned_spectrum(corr: &[f64], bin: f64, omega: f64) -> f64 {
    let mut s = corr[0];
    for (l, c) in corr.iter().enumerate().skip(1) {
        s += 2.0 * c * libm::cos(omega * l as f64 * bin);
    }
    2.0 * bin * s
}

/// `sinc²(ωb/2)`.
pub fn binning_response(bin: f64, omega: f64) -> f64 {
    let x = 0.5 * omega * bin;
    let sinc = if x == 0.0 { 1.0 } else { libm::sin(x) / x };
    sinc * sinc
}

/// Estimates from one trajectory window.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySummary {
    /// Time-averaged monitor flow.
    pub flow: f64,
    pub s0: f64,
    pub jumps: usize,
    /// Total dc noise `S₀ + S₁(0)`.
    pub s_dc: Option<f64>,
    /// Binned correlation at lags `0, b, 2b, …`.
    pub correlation: Vec<f64>,
    /// Binned spectrum `S_B(ω)` at the configured frequencies.
    pub spectrum: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn mean(&self, n: f64) -> f64 {
        self.sum / n
    }

    fn stderr(&self, n: f64) -> f64 {
        if n < 2.0 {
            return f64::NAN;
        }
        let m = self.sum / n;
        let var = ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0);
        libm::sqrt(var / n)
    }
}

/// Ensemble reduction of [`TrajectorySummary`] values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoiseAccumulator {
    count: usize,
    jumps: usize,
    flow: Moments,
    s0: Moments,
    s_dc: Moments,
    cross: f64,
    correlation: Vec<Moments>,
    spectrum: Vec<Moments>,
}

impl NoiseAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, t: &TrajectorySummary) {
        self.count += 1;
        self.jumps += t.jumps;
        self.flow.add(t.flow);
        self.s0.add(t.s0);
        if let Some(s) = t.s_dc {
            self.s_dc.add(s);
            self.cross += s * t.s0;
        }
        if self.correlation.len() < t.correlation.len() {
            self.correlation.resize(t.correlation.len(), Moments::default());
        }
        for (m, &c) in self.correlation.iter_mut().zip(&t.correlation) {
            m.add(c);
        }
        if self.spectrum.len() < t.spectrum.len() {
            self.spectrum.resize(t.spectrum.len(), Moments::default());
        }
        for (m, &c) in self.spectrum.iter_mut().zip(&t.spectrum) {
            m.add(c - t.s0);
        }
    }

    pub fn merge(&mut self, o: &NoiseAccumulator) {
        self.count += o.count;
        self.jumps += o.jumps;
        self.flow.merge(&o.flow);
        self.s0.merge(&o.s0);
        self.s_dc.merge(&o.s_dc);
        self.cross += o.cross;
        if self.correlation.len() < o.correlation.len() {
            self.correlation.resize(o.correlation.len(), Moments::default());
        }
        for (a, b) in self.correlation.iter_mut().zip(&o.correlation) {
            a.merge(b);
        }
        if self.spectrum.len() < o.spectrum.len() {
            self.spectrum.resize(o.spectrum.len(), Moments::default());
        }
        for (a, b) in self.spectrum.iter_mut().zip(&o.spectrum) {
            a.merge(b);
        }
    }

    pub fn finish(&self, settings: &NoiseSettings, dt: f64) -> NoiseMc {
        let n = self.count as f64;
        let s0 = self.s0.mean(n);
        let s0_stderr = self.s0.stderr(n);
        let bin = settings.steps_per_bin as f64 * dt;
        let mut out = NoiseMc {
            n_traj: self.count,
            jumps: self.jumps,
            flow: self.flow.mean(n),
            flow_stderr: self.flow.stderr(n),
            estimate: NoiseEstimate {
                s0,
                s0_stderr,
                s1_dc: f64::NAN,
                s1_stderr: f64::NAN,
                fano: f64::NAN,
                fano_stderr: f64::NAN,
                q_jump: None,
                q_ex: None,
            },
            bin_width: bin,
            correlation: self.correlation.iter().map(|m| m.mean(n)).collect(),
            correlation_stderr: self.correlation.iter().map(|m| m.stderr(n)).collect(),
            omegas: settings.omegas.clone(),
            s1_omega: Vec::new(),
            s1_omega_stderr: Vec::new(),
        };
        if settings.correlations() && self.count > 0 {
            let total = self.s_dc.mean(n);
            // S₁ = S − S₀ per trajectory, so its spread needs the cross moment.
            let var_diff = (self.s_dc.sum_sq - 2.0 * self.cross + self.s0.sum_sq) / n - sq(total - s0);
            let s1_stderr = libm::sqrt((var_diff * n / (n - 1.0)).max(0.0) / n);
            let fano = total / s0;
            let var_ratio =
                (self.s_dc.sum_sq - 2.0 * fano * self.cross + fano * fano * self.s0.sum_sq) / n - sq(total - fano * s0);
            let fano_stderr = libm::sqrt((var_ratio * n / (n - 1.0)).max(0.0) / n) / s0.abs();
            out.estimate.s1_dc = total - s0;
            out.estimate.s1_stderr = s1_stderr;
            out.estimate.fano = fano;
            out.estimate.fano_stderr = fano_stderr;
            let response: Vec<f64> = settings.omegas.iter().map(|&w| binning_response(bin, w)).collect();
            out.s1_omega = self.spectrum.iter().zip(&response).map(|(m, r)| m.mean(n) / r).collect();
            out.s1_omega_stderr = self.spectrum.iter().zip(&response).map(|(m, r)| m.stderr(n) / r).collect();
        }
        out
    }
}

/// Ensemble Monte Carlo noise estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseMc {
    pub n_traj: usize,
    pub jumps: usize,
    pub flow: f64,
    pub flow_stderr: f64,
    pub estimate: NoiseEstimate,
    pub bin_width: f64,
    /// Mean binned correlation at lags `ℓ·bin_width`, `ℓ ≥ 0`.
    pub correlation: Vec<f64>,
    pub correlation_stderr: Vec<f64>,
    pub omegas: Vec<f64>,
    pub s1_omega: Vec<f64>,
    pub s1_omega_stderr: Vec<f64>,
}

impl NoiseMc {
    /// `c₀ = S₀/2`, the local part of the correlation per unit time.
    pub fn c0(&self) -> f64 {
        0.5 * self.estimate.s0
    }

    /// Non-local correlation at signed lag `lag` (in bins); even in the lag.
    pub fn c1(&self, lag: i64) -> Option<f64> {
        if lag == 0 {
            return None;
        }
        self.correlation.get(lag.unsigned_abs() as usize).copied()
    }
}

/// Noise estimates from stored step records of a steady-state window.
pub fn correlation_mc(records: &[Vec<StepRecord>], reference_flow: f64, dt: f64, settings: &NoiseSettings) -> Result<NoiseMc> {
    let mut acc = NoiseAccumulator::new();
    for rec in records {
        let mut t = TrajectoryNoise::new(settings, reference_flow, dt, rec.len());
        for r in rec {
            t.push(r);
        }
        acc.add(&t.finish(dt)?);
    }
    Ok(acc.finish(settings, dt))
}

/// Runs trajectories `range` and accumulates their noise estimates in index order.
pub fn noise_chunk(
    runner: &TrajectoryRunner,
    settings: &NoiseSettings,
    reference_flow: f64,
    range: Range<u64>,
) -> Result<NoiseAccumulator> {
    let dt = runner.config().dt;
    let window = runner.config().window_steps();
    let mut acc = NoiseAccumulator::new();
    let mut first = range.start;
    while first < range.end {
        let mut lanes = [(); LANES].map(|_| TrajectoryNoise::new(settings, reference_flow, dt, window));
        runner.run_batch(first, |v| {
            if v.recording {
                for (t, r) in lanes.iter_mut().zip(v.records) {
                    t.push(r);
                }
            }
        })?;
        for (l, t) in lanes.into_iter().enumerate() {
            if first + (l as u64) < range.end {
                acc.add(&t.finish(dt)?);
            }
        }
        first += LANES as u64;
    }
    Ok(acc)
}

/// `S₁(ω)` from the local part and a binned correlation series.
pub fn spectrum_mc(s0: f64, correlation: &[f64], bin: f64, omegas: &[f64]) -> Vec<f64> {
    omegas
        .iter()
        .map(|&w| (binned_spectrum(correlation, bin, w) - s0) / binning_response(bin, w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::MonitorConfig;

    fn fig4(theta_m: f64, theta_n: f64) -> System {
        System::from_rates(
            QubitParams::default(),
            Rates::new(0.3, 0.15).unwrap(),
            MonitorConfig::polar(0.01, theta_m, theta_n).unwrap(),
        )
    }

    #[test]
    fn q_jump_vanishes_at_matching_energy() {
        let rho = DensityMatrix::diagonal(0.3).unwrap();
        let theta_n = libm::acos(-rho.sigma_z());
        assert!(q_jump(&rho, &QubitParams::default(), theta_n).abs() < 1e-15);
    }

    #[test]
    fn commuting_measurement_has_no_excess() {
        for t in [0.0, PI] {
            let sys = fig4(t, t);
            assert!(excess_energy(&sys).unwrap().abs() < 1e-12);
            assert!(s1_analytic(&sys).unwrap().abs() < 1e-14);
            assert!((fano(&sys).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_forms_are_consistent() {
        let sys = fig4(0.7, 2.1);
        let a = analytic_noise(&sys).unwrap();
        let ratio = fano_ratio(a.s0, a.s1_dc).unwrap();
        assert!((ratio - a.fano).abs() < 1e-10);
    }

    #[test]
    fn weak_coupling_s0_example() {
        let sys = fig4(0.0, 0.0);
        let expected = 4.0 / 27.0 * 0.01;
        assert!((s0_weak_coupling(&sys) - expected).abs() < 1e-15);
    }

    #[test]
    fn fano_diverges_without_jump_energy() {
        assert_eq!(fano_closed_form(0.0, 0.1), Err(Error::FanoDivergent));
        assert_eq!(fano_ratio(0.0, 0.1), Err(Error::FanoDivergent));
    }

    #[test]
    fn spectrum_of_white_noise_is_flat() {
        let corr = [3.0, 0.0, 0.0];
        let s = binned_spectrum(&corr, 0.1, 0.0);
        assert!((s - 0.6).abs() < 1e-15);
    }

    #[test]
    fn records_without_energy_give_zero_noise() {
        let settings = NoiseSettings {
            steps_per_bin: 2,
            max_lag_bins: 3,
            omegas: vec![0.0, 1.0],
        };
        let recs = vec![vec![StepRecord::default(); 40]; 3];
        let mc = correlation_mc(&recs, 0.0, 0.01, &settings).unwrap();
        assert_eq!(mc.estimate.s0, 0.0);
        assert_eq!(mc.estimate.s1_dc, 0.0);
        assert!(mc.correlation.iter().all(|&c| c == 0.0));
        assert_eq!(mc.c1(2), mc.c1(-2));
    }

    #[test]
    fn short_window_is_rejected() {
        let settings = NoiseSettings {
            steps_per_bin: 10,
            max_lag_bins: 5,
            omegas: vec![],
        };
        let recs = vec![vec![StepRecord::default(); 30]];
        assert!(matches!(
            correlation_mc(&recs, 0.0, 0.01, &settings),
            Err(Error::WindowTooShort { .. })
        ));
    }
}
