//! Qubit, bath and monitor parameters, pure and mixed qubit states, and the
//! conversion from Ohmic bath parameters to Lindblad rates.
//!
//! Units: `ħ = k_B = 1`; energies are usually quoted in units of the qubit
//! splitting `Δ`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::Add;

use crate::error::{Error, Result};
use crate::mat2::{phase, Mat2, C64, ZERO};

/// Default Ohmic cutoff, effectively infinite compared to `Δ = 1`.
pub const DEFAULT_OMEGA_C: f64 = 1000.0;

/// Pure qubit state `cos(θ/2)|g⟩ + e^{iφ} sin(θ/2)|e⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState {
    theta: f64,
    phi: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState { theta: 0.0, phi: 0.0 };
    pub const EXCITED: BlochState = BlochState { theta: PI, phi: 0.0 };

    /// `theta` must lie in `[0, π]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "polar angle must lie in [0, π]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                reason: "azimuthal angle must be finite",
            });
        }
        let mut phi = libm::fmod(phi, TAU);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(BlochState {
            theta: theta.clamp(0.0, PI),
            phi,
        })
    }

    /// Polar-only state, `φ = 0`.
    pub fn polar(theta: f64) -> Result<Self> {
        Self::new(theta, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cos_theta(&self) -> f64 {
        libm::cos(self.theta)
    }

    pub fn sin_theta(&self) -> f64 {
        libm::sin(self.theta)
    }

    /// Amplitudes `(⟨g|s⟩, ⟨e|s⟩)`.
    pub fn ket(&self) -> [C64; 2] {
        let (c, s) = (libm::cos(self.theta / 2.0), libm::sin(self.theta / 2.0));
        [C64::new(c, 0.0), phase(self.phi) * s]
    }

    /// The orthogonal complement `sin(θ/2)|g⟩ − e^{iφ} cos(θ/2)|e⟩`.
    pub fn orthogonal_ket(&self) -> [C64; 2] {
        let (c, s) = (libm::cos(self.theta / 2.0), libm::sin(self.theta / 2.0));
        [C64::new(s, 0.0), -phase(self.phi) * c]
    }

    /// Projector `|s⟩⟨s|` as a general matrix.
    pub fn projector(&self) -> Mat2 {
        let k = self.ket();
        Mat2::outer(k, k)
    }
}

/// `|s⟩⟨s|` for a pure Bloch-sphere state.
pub fn density(state: &BlochState) -> DensityMatrix {
    let half = state.theta / 2.0;
    let (c, s) = (libm::cos(half), libm::sin(half));
    DensityMatrix {
        gg: c * c,
        ee: s * s,
        ge: phase(-state.phi) * (c * s),
    }
}

/// `U_nm = |n⟩⟨m| + |n̄⟩⟨m̄|`, mapping the measured state onto the feedback state.
pub fn feedback_unitary(m: &BlochState, n: &BlochState) -> Mat2 {
    Mat2::outer(n.ket(), m.ket()) + Mat2::outer(n.orthogonal_ket(), m.orthogonal_ket())
}

/// Qubit density matrix in the `{|g⟩, |e⟩}` basis.
///
/// Only `ρ_gg`, `ρ_ee` and `ρ_ge` are stored; `ρ_eg = conj(ρ_ge)` so the
/// matrix is Hermitian by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    gg: f64,
    ee: f64,
    ge: C64,
}

impl DensityMatrix {
    /// Trace tolerance accepted by [`DensityMatrix::try_new`].
    pub const TRACE_TOL: f64 = 1e-10;
    /// Most negative eigenvalue accepted by [`DensityMatrix::try_new`].
    pub const POSITIVITY_TOL: f64 = 1e-9;

    pub fn try_new(gg: f64, ee: f64, ge: C64) -> Result<Self> {
        let rho = DensityMatrix { gg, ee, ge };
        rho.check()?;
        Ok(rho)
    }

    /// Builds without validation. Callers are responsible for the invariants.
    pub fn from_parts_unchecked(gg: f64, ee: f64, ge: C64) -> Self {
        DensityMatrix { gg, ee, ge }
    }

    /// Reads the Hermitian part of a general matrix and validates it.
    pub fn from_mat2(m: &Mat2, hermitian_tol: f64) -> Result<Self> {
        if !m.is_hermitian(hermitian_tol) {
            return Err(Error::InvalidState("matrix is not Hermitian"));
        }
        let ge = (m.get(0, 1) + m.get(1, 0).conj()) * 0.5;
        Self::try_new(m.get(0, 0).re, m.get(1, 1).re, ge)
    }

    pub fn ground() -> Self {
        DensityMatrix { gg: 1.0, ee: 0.0, ge: ZERO }
    }

    pub fn excited() -> Self {
        DensityMatrix { gg: 0.0, ee: 1.0, ge: ZERO }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix { gg: 0.5, ee: 0.5, ge: ZERO }
    }

    /// Diagonal state with the given excited-state population.
    pub fn diagonal(excited_population: f64) -> Result<Self> {
        Self::try_new(1.0 - excited_population, excited_population, ZERO)
    }

    /// Trace, positivity and finiteness.
    pub fn check(&self) -> Result<()> {
        if !(self.gg.is_finite() && self.ee.is_finite() && self.ge.re.is_finite() && self.ge.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries"));
        }
        if (self.trace() - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState("trace differs from one"));
        }
        if self.min_eigenvalue() < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidState("negative eigenvalue"));
        }
        Ok(())
    }

    pub fn rho_gg(&self) -> f64 {
        self.gg
    }

    pub fn rho_ee(&self) -> f64 {
        self.ee
    }

    pub fn rho_ge(&self) -> C64 {
        self.ge
    }

    pub fn rho_eg(&self) -> C64 {
        self.ge.conj()
    }

    pub fn trace(&self) -> f64 {
        self.gg + self.ee
    }

    /// `⟨σ_z⟩ = ρ_ee − ρ_gg`.
    pub fn sigma_z(&self) -> f64 {
        self.ee - self.gg
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let diff = self.gg - self.ee;
        let r = libm::sqrt(diff * diff + 4.0 * self.ge.norm_sqr());
        0.5 * (self.trace() - r)
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::new(C64::new(self.gg, 0.0), self.ge, self.ge.conj(), C64::new(self.ee, 0.0))
    }

    /// `tr[A ρ]`.
    pub fn expect(&self, op: &Mat2) -> C64 {
        (*op * self.to_mat2()).trace()
    }

    /// `⟨s|ρ|s⟩`.
    pub fn population(&self, s: &BlochState) -> f64 {
        self.matrix_element(&s.ket(), &s.ket()).re
    }

    /// `⟨a|ρ|b⟩`.
    pub fn matrix_element(&self, a: &[C64; 2], b: &[C64; 2]) -> C64 {
        let rb = self.to_mat2().apply(*b);
        a[0].conj() * rb[0] + a[1].conj() * rb[1]
    }

    /// Divides by the trace.
    pub fn normalized(&self) -> Self {
        let t = self.trace();
        DensityMatrix {
            gg: self.gg / t,
            ee: self.ee / t,
            ge: self.ge / t,
        }
    }

    /// Real coordinates `(ρ_gg, ρ_ee, Re ρ_ge, Im ρ_ge)`.
    pub fn coords(&self) -> [f64; 4] {
        [self.gg, self.ee, self.ge.re, self.ge.im]
    }

    pub fn from_coords(x: [f64; 4]) -> Self {
        DensityMatrix {
            gg: x[0],
            ee: x[1],
            ge: C64::new(x[2], x[3]),
        }
    }

    /// Largest entrywise deviation from another state.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (self.to_mat2() - other.to_mat2()).max_abs()
    }
}

/// Qubit Hamiltonian `H₀ = (Δ/2)σ_z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitParams {
    delta: f64,
}

impl QubitParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "qubit splitting must be positive",
            });
        }
        Ok(QubitParams { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn hamiltonian(&self) -> Mat2 {
        Mat2::diag(-0.5 * self.delta, 0.5 * self.delta)
    }

    /// `tr[H₀ X]` for any 2×2 matrix `X` (real part).
    pub fn energy_of(&self, x: &Mat2) -> f64 {
        0.5 * self.delta * (x.get(1, 1).re - x.get(0, 0).re)
    }

    /// `tr[H₀ ρ]`.
    pub fn energy(&self, rho: &DensityMatrix) -> f64 {
        0.5 * self.delta * rho.sigma_z()
    }

    /// `tr[H₀ P_s] = −(Δ/2) cos θ_s`.
    pub fn state_energy(&self, s: &BlochState) -> f64 {
        -0.5 * self.delta * s.cos_theta()
    }
}

impl Default for QubitParams {
    fn default() -> Self {
        QubitParams { delta: 1.0 }
    }
}

/// One Ohmic heat bath, `I(ω) = 2αω e^{−ω/ω_c}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bath {
    pub temperature: f64,
    pub alpha: f64,
}

impl Bath {
    /// Bose-Einstein occupation at energy `omega`; underflows to zero at low temperature.
    pub fn occupation(&self, omega: f64) -> f64 {
        let x = omega / self.temperature;
        if x > 700.0 {
            0.0
        } else {
            1.0 / libm::expm1(x)
        }
    }

    pub fn spectral_density(&self, omega: f64, omega_c: f64) -> f64 {
        2.0 * self.alpha * omega * libm::exp(-omega / omega_c)
    }

    /// Born–Markov emission and absorption rates at the qubit frequency.
    pub fn rates(&self, q: &QubitParams, omega_c: f64) -> Rates {
        let strength = 0.5 * PI * self.spectral_density(q.delta(), omega_c);
        let n = self.occupation(q.delta());
        Rates {
            gamma_plus_rate: strength * (1.0 + n),
            gamma_minus_rate: strength * n,
        }
    }
}

/// Collection of Ohmic baths sharing one cutoff frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    baths: Vec<Bath>,
    omega_c: f64,
}

impl BathSpec {
    pub fn new(baths: Vec<Bath>, omega_c: f64) -> Result<Self> {
        if baths.is_empty() {
            return Err(Error::NoBaths);
        }
        for b in &baths {
            if !(b.temperature.is_finite() && b.temperature > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "temperature",
                    value: b.temperature,
                    reason: "bath temperature must be positive",
                });
            }
            if !(b.alpha.is_finite() && b.alpha >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    value: b.alpha,
                    reason: "coupling must be non-negative",
                });
            }
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega_c",
                value: omega_c,
                reason: "cutoff must be positive",
            });
        }
        Ok(BathSpec { baths, omega_c })
    }

    pub fn baths(&self) -> &[Bath] {
        &self.baths
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    /// Rates of each bath, in order.
    pub fn per_bath_rates(&self, q: &QubitParams) -> Vec<Rates> {
        self.baths.iter().map(|b| b.rates(q, self.omega_c)).collect()
    }
}

/// Total emission `Γ₊` and absorption `Γ₋` rates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Rates {
    pub gamma_plus_rate: f64,
    pub gamma_minus_rate: f64,
}

impl Rates {
    pub fn new(gamma_plus_rate: f64, gamma_minus_rate: f64) -> Result<Self> {
        for (name, v) in [("gamma_plus", gamma_plus_rate), ("gamma_minus", gamma_minus_rate)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "rates must be non-negative",
                });
            }
        }
        Ok(Rates {
            gamma_plus_rate,
            gamma_minus_rate,
        })
    }

    /// `γ₊ = Γ₊ + Γ₋`.
    pub fn gp(&self) -> f64 {
        self.gamma_plus_rate + self.gamma_minus_rate
    }

    /// `γ₋ = Γ₊ − Γ₋`.
    pub fn gm(&self) -> f64 {
        self.gamma_plus_rate - self.gamma_minus_rate
    }
}

impl Add for Rates {
    type Output = Rates;
    fn add(self, rhs: Rates) -> Rates {
        Rates {
            gamma_plus_rate: self.gamma_plus_rate + rhs.gamma_plus_rate,
            gamma_minus_rate: self.gamma_minus_rate + rhs.gamma_minus_rate,
        }
    }
}

/// Sum of the Born–Markov rates of all baths.
pub fn rates_from_baths(baths: &BathSpec, q: &QubitParams) -> Rates {
    baths
        .per_bath_rates(q)
        .into_iter()
        .fold(Rates::default(), |acc, r| acc + r)
}

/// Single Ohmic bath reproducing given total rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveBath {
    pub alpha: f64,
    pub temperature: f64,
}

/// Inverts the Ohmic rate formula: `T = Δ/ln(Γ₊/Γ₋)` and
/// `π α Δ e^{−Δ/ω_c} = Γ₊ − Γ₋`. A vanishing `Γ₋` maps to `T = 0`.
pub fn effective_bath(r: &Rates, q: &QubitParams, omega_c: f64) -> Result<EffectiveBath> {
    if !(r.gamma_plus_rate > r.gamma_minus_rate) || r.gamma_minus_rate < 0.0 {
        return Err(Error::NoPositiveTemperature {
            gamma_plus: r.gamma_plus_rate,
            gamma_minus: r.gamma_minus_rate,
        });
    }
    let delta = q.delta();
    let temperature = if r.gamma_minus_rate == 0.0 {
        0.0
    } else {
        delta / libm::log(r.gamma_plus_rate / r.gamma_minus_rate)
    };
    let alpha = r.gm() / (PI * delta * libm::exp(-delta / omega_c));
    Ok(EffectiveBath { alpha, temperature })
}

/// Measurement strength and the measured / feedback states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorConfig {
    gamma: f64,
    pub measure: BlochState,
    pub feedback: BlochState,
}

impl MonitorConfig {
    pub fn new(gamma: f64, measure: BlochState, feedback: BlochState) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "measurement strength must be non-negative",
            });
        }
        Ok(MonitorConfig {
            gamma,
            measure,
            feedback,
        })
    }

    /// Polar-angle shorthand with `φ_m = φ_n = 0`.
    pub fn polar(gamma: f64, theta_m: f64, theta_n: f64) -> Result<Self> {
        Self::new(gamma, BlochState::polar(theta_m)?, BlochState::polar(theta_n)?)
    }

    /// No feedback: `|n⟩ = |m⟩`.
    pub fn measurement_only(gamma: f64, theta: f64) -> Result<Self> {
        Self::polar(gamma, theta, theta)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn unitary(&self) -> Mat2 {
        feedback_unitary(&self.measure, &self.feedback)
    }
}
