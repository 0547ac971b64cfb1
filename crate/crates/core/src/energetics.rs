//! Energy flow from the monitor into the qubit, bath heat currents, and the
//! weak-coupling closed forms for the steady-state flow.
//!
//! The closed forms take the measurement and feedback polar angles only; the
//! azimuthal angles enter the exact solver but are a minor correction at weak
//! coupling.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lindblad::{bath_dissipator, meas_dissipator};
use crate::qubit::{DensityMatrix, MonitorConfig, QubitParams, Rates};
use crate::system::System;

/// Edge distance (radians) within which [`zero_flow_curve`] accepts `θ_m`.
pub const EDGE_REGIME: f64 = 0.25;

/// Monitor energy flow split into the no-detection (`j1`) and jump (`j2`) parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorFlow {
    pub j_total: f64,
    pub j1: f64,
    pub j2: f64,
}

/// Monitor flow together with the heat current from each bath into the qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowBreakdown {
    pub j_total: f64,
    pub j1: f64,
    pub j2: f64,
    pub bath_currents: Vec<f64>,
}

impl FlowBreakdown {
    /// `J + Σ_r J_r`; vanishes in the steady state.
    pub fn first_law_residual(&self) -> f64 {
        self.j_total + self.bath_currents.iter().sum::<f64>()
    }
}

/// `J = tr[H₀ D_M[ρ]]` with its decomposition
/// `J⁽²⁾ = γρ_mm tr[H₀(P_n − ρ)]`, `J⁽¹⁾ = γρ_mm tr[H₀ρ] − (γ/2) tr[H₀{P_m, ρ}]`.
pub fn monitor_flow(rho: &DensityMatrix, q: &QubitParams, mc: &MonitorConfig) -> MonitorFlow {
    let gamma = mc.gamma();
    let rho_m = rho.to_mat2();
    let j_total = q.energy_of(&meas_dissipator(&rho_m, mc));
    let rho_mm = rho.population(&mc.measure);
    let energy = q.energy(rho);
    let j2 = gamma * rho_mm * (q.state_energy(&mc.feedback) - energy);
    let anti = q.energy_of(&mc.measure.projector().anticommutator(&rho_m));
    let j1 = gamma * rho_mm * energy - 0.5 * gamma * anti;
    MonitorFlow { j_total, j1, j2 }
}

/// `J_r = tr[H₀ D_{B,r}[ρ]]` for bath `index` of `baths`.
pub fn bath_flow(rho: &DensityMatrix, q: &QubitParams, baths: &[Rates], index: usize) -> Result<f64> {
    let r = baths.get(index).ok_or(Error::UnknownBath {
        index,
        count: baths.len(),
    })?;
    Ok(q.energy_of(&bath_dissipator(&rho.to_mat2(), r)))
}

/// All flows evaluated at `rho`.
pub fn flow_breakdown(rho: &DensityMatrix, system: &System) -> FlowBreakdown {
    let m = monitor_flow(rho, &system.qubit, &system.monitor);
    let bath_currents = (0..system.bath_rates().len())
        .map(|i| bath_flow(rho, &system.qubit, system.bath_rates(), i).expect("index in range"))
        .collect();
    FlowBreakdown {
        j_total: m.j_total,
        j1: m.j1,
        j2: m.j2,
        bath_currents,
    }
}

/// Steady state and the flows evaluated there.
pub fn steady_flows(system: &System) -> Result<(DensityMatrix, FlowBreakdown)> {
    let rho = system.steady_state()?;
    Ok((rho, flow_breakdown(&rho, system)))
}

/// Refrigeration coefficient of performance `|J_c / (J_h + J_c)|`.
pub fn cop(jc: f64, jh: f64) -> Result<f64> {
    let denom = jh + jc;
    if denom == 0.0 {
        return Err(Error::UndefinedCop);
    }
    Ok((jc / denom).abs())
}

/// Weak-coupling steady-state monitor flow.
pub fn analytic_flow(theta_m: f64, theta_n: f64, r: &Rates, gamma: f64, q: &QubitParams) -> f64 {
    let (cm, cn) = (libm::cos(theta_m), libm::cos(theta_n));
    let num = r.gp() * (cn - cm) - r.gm() * (1.0 - cm * cn);
    let den = gamma * (cn * cm - 1.0) - 2.0 * r.gp();
    0.5 * gamma * q.delta() * num / den
}

/// `(J_min, J_max) = (−γΔΓ₋/(γ₊+γ), γΔΓ₊/(γ₊+γ))`.
pub fn flow_bounds(r: &Rates, gamma: f64, q: &QubitParams) -> (f64, f64) {
    let scale = gamma * q.delta() / (r.gp() + gamma);
    (-scale * r.gamma_minus_rate, scale * r.gamma_plus_rate)
}

/// Weak-coupling flow on the mirror axis `θ_m + θ_n = π`.
pub fn symmetric_axis_flow(theta_m: f64, r: &Rates, gamma: f64, q: &QubitParams) -> f64 {
    let c = libm::cos(theta_m);
    let num = r.gm() * (1.0 + c * c) + 2.0 * r.gp() * c;
    let den = gamma * (1.0 + c * c) + 2.0 * r.gp();
    0.5 * gamma * q.delta() * num / den
}

/// Where the mirror-axis flow changes sign: `θ_m = π − arccos(tanh(Δ/4T))`.
pub fn mirror_axis_sign_change(temperature: f64, q: &QubitParams) -> f64 {
    PI - libm::acos(libm::tanh(q.delta() / (4.0 * temperature)))
}

/// Quadratic fall-off of the mirror-axis flow near its extrema:
/// `1 − [γ₊/(γ₊+γ)] ε²/2`.
pub fn quadratic_deviation(epsilon: f64, r: &Rates, gamma: f64) -> f64 {
    1.0 - r.gp() / (r.gp() + gamma) * epsilon * epsilon / 2.0
}

/// Near-edge closed form of the `J = 0` curve, returning `θ_n`.
///
/// Lower-left edge: `θ_n = e^{−Δ/2T} θ_m`. Upper-right edge:
/// `π − θ_n = e^{Δ/2T} (π − θ_m)`.
pub fn zero_flow_curve(theta_m: f64, temperature: f64, q: &QubitParams) -> Result<f64> {
    let x = q.delta() / (2.0 * temperature);
    if (0.0..EDGE_REGIME).contains(&theta_m) {
        Ok(libm::exp(-x) * theta_m)
    } else if theta_m <= PI && PI - theta_m < EDGE_REGIME {
        Ok((PI - libm::exp(x) * (PI - theta_m)).max(0.0))
    } else {
        Err(Error::OutsideEdgeRegime { theta_m })
    }
}

/// Zero-flow feedback angle at fixed `θ_m`, by bisection on the exact
/// steady-state flow over `θ_n ∈ [0, θ_m]`. Azimuthal angles are taken from
/// `template.monitor`.
pub fn zero_flow_root(template: &System, theta_m: f64) -> Result<f64> {
    const FLOW_TOL: f64 = 1e-10;
    let mc = template.monitor;
    let flow_at = |theta_n: f64| -> Result<f64> {
        let monitor = MonitorConfig::new(
            mc.gamma(),
            crate::qubit::BlochState::new(theta_m, mc.measure.phi())?,
            crate::qubit::BlochState::new(theta_n, mc.feedback.phi())?,
        )?;
        let sys = template.with_monitor(monitor);
        let rho = sys.steady_state()?;
        Ok(monitor_flow(&rho, &sys.qubit, &sys.monitor).j_total)
    };
    let tol = FLOW_TOL * template.qubit.delta() * template.qubit.delta();
    let (mut lo, mut hi) = (0.0, theta_m);
    let (f_lo, f_hi) = (flow_at(lo)?, flow_at(hi)?);
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange);
    }
    let lo_sign = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = flow_at(mid)?;
        if f.abs() <= tol || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if f.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Balance between the detection and no-detection flows,
/// `ρ_mm (cos θ_m − cos θ_n) + sin θ_m Re⟨m|ρ|m̄⟩`, which equals `2J/(γΔ)`
/// with the `|m̄⟩` phase convention of [`crate::qubit::BlochState::orthogonal_ket`].
pub fn balance_check(rho: &DensityMatrix, mc: &MonitorConfig) -> f64 {
    let m = &mc.measure;
    let rho_mm = rho.population(m);
    let rho_m_mbar = rho.matrix_element(&m.ket(), &m.orthogonal_ket());
    rho_mm * (m.cos_theta() - mc.feedback.cos_theta()) + m.sin_theta() * rho_m_mbar.re
}
