//! Master-equation generator, steady state and deterministic evolution.
//!
//! `ρ̇ = −i[H₀, ρ] + D_B[ρ] + D_M[ρ]` with
//!
//! ```text
//! D_B[ρ] = Σ_{s=±} Γ_s (σ_{−s} ρ σ_s − ½{σ_s σ_{−s}, ρ})
//! D_M[ρ] = γ (U_nm P_m ρ P_m U_nm† − ½{P_m, ρ})
//! ```
//!
//! The superoperator is stored as a 4×4 matrix acting on the column-stacked
//! density matrix `vec(ρ) = (ρ_gg, ρ_eg, ρ_ge, ρ_ee)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat2::{Mat2, C64, I, ONE, ZERO};
use crate::qubit::{DensityMatrix, MonitorConfig, QubitParams, Rates};
use crate::real::{self, RealGenerator};

/// Largest integrator step accepted by [`evolve`], in units of `1/Δ`.
pub const MAX_EVOLVE_STEP: f64 = 0.05;
/// Default integrator step, in units of `1/Δ`.
pub const DEFAULT_EVOLVE_STEP: f64 = 0.01;

const SINGULAR_CONDITION: f64 = 1e13;

/// Bath dissipator on a general matrix.
pub fn bath_dissipator(rho: &Mat2, r: &Rates) -> Mat2 {
    let sp = Mat2::sigma_plus();
    let sm = Mat2::sigma_minus();
    let emission = sm * *rho * sp - (sp * sm).anticommutator(rho).scale_re(0.5);
    let absorption = sp * *rho * sm - (sm * sp).anticommutator(rho).scale_re(0.5);
    emission.scale_re(r.gamma_plus_rate) + absorption.scale_re(r.gamma_minus_rate)
}

/// `D_B[ρ]`. Pass the rates of a single bath to get `D_{B,r}[ρ]`.
pub fn dissipator_bath(rho: &DensityMatrix, r: &Rates) -> Mat2 {
    bath_dissipator(&rho.to_mat2(), r)
}

/// Measurement-and-feedback dissipator on a general matrix.
pub fn meas_dissipator(rho: &Mat2, mc: &MonitorConfig) -> Mat2 {
    let p = mc.measure.projector();
    let u = mc.unitary();
    let jump = u * p * *rho * p * u.dagger();
    (jump - p.anticommutator(rho).scale_re(0.5)).scale_re(mc.gamma())
}

/// `D_M[ρ]`.
pub fn dissipator_meas(rho: &DensityMatrix, mc: &MonitorConfig) -> Mat2 {
    meas_dissipator(&rho.to_mat2(), mc)
}

/// Full right-hand side of the master equation applied to a general matrix.
pub fn master_rhs(q: &QubitParams, r: &Rates, mc: &MonitorConfig, rho: &Mat2) -> Mat2 {
    let coherent = q.hamiltonian().commutator(rho).scale(-I);
    coherent + bath_dissipator(rho, r) + meas_dissipator(rho, mc)
}

/// Column-stacking index of `ρ_ij`.
#[inline]
fn vec_index(i: usize, j: usize) -> usize {
    i + 2 * j
}

/// Matrix form of the master-equation generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Liouvillian {
    matrix: [[C64; 4]; 4],
    delta: f64,
}

impl Liouvillian {
    /// Builds the matrix of an arbitrary linear superoperator column by column.
    pub fn from_superoperator(delta: f64, f: impl Fn(&Mat2) -> Mat2) -> Self {
        let mut matrix = [[ZERO; 4]; 4];
        for j in 0..2 {
            for i in 0..2 {
                let mut basis = Mat2::zero();
                basis.0[i][j] = ONE;
                let image = f(&basis);
                let col = vec_index(i, j);
                for b in 0..2 {
                    for a in 0..2 {
                        matrix[vec_index(a, b)][col] = image.0[a][b];
                    }
                }
            }
        }
        Liouvillian { matrix, delta }
    }

    pub fn matrix(&self) -> &[[C64; 4]; 4] {
        &self.matrix
    }

    /// Qubit splitting the generator was built with.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let v = [rho.0[0][0], rho.0[1][0], rho.0[0][1], rho.0[1][1]];
        let mut out = [ZERO; 4];
        for (o, row) in out.iter_mut().zip(self.matrix.iter()) {
            *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        Mat2::new(out[0], out[2], out[1], out[3])
    }

    /// The same generator as a real 4×4 matrix on `(ρ_gg, ρ_ee, Re ρ_ge, Im ρ_ge)`.
    pub fn real_form(&self) -> RealGenerator {
        RealGenerator(real::superop(|m| self.apply(m)))
    }
}

/// Generator of the master equation for the given qubit, total rates and monitor.
pub fn build_liouvillian(q: &QubitParams, r: &Rates, mc: &MonitorConfig) -> Liouvillian {
    Liouvillian::from_superoperator(q.delta(), |rho| master_rhs(q, r, mc, rho))
}

fn solve4(a: &[[C64; 4]; 4], b: &[C64; 4]) -> Option<[C64; 4]> {
    let mut m = *a;
    let mut x = *b;
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[pivot][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..4 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                let sub = factor * m[col][k];
                m[row][k] -= sub;
            }
            let sub = factor * x[col];
            x[row] -= sub;
        }
    }
    for col in (0..4).rev() {
        let mut acc = x[col];
        for k in col + 1..4 {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
}

fn norm1(a: &[[C64; 4]; 4]) -> f64 {
    (0..4)
        .map(|j| (0..4).map(|i| a[i][j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number of the trace-augmented system used by [`steady_state`].
pub fn augmented_condition(l: &Liouvillian) -> f64 {
    let a = augmented(l);
    let mut inv = [[ZERO; 4]; 4];
    for j in 0..4 {
        let mut e = [ZERO; 4];
        e[j] = ONE;
        match solve4(&a, &e) {
            Some(col) => {
                for i in 0..4 {
                    inv[i][j] = col[i];
                }
            }
            None => return f64::INFINITY,
        }
    }
    norm1(&a) * norm1(&inv)
}

fn augmented(l: &Liouvillian) -> [[C64; 4]; 4] {
    let mut a = l.matrix;
    // d(ρ_gg)/dt is minus d(ρ_ee)/dt, so its row carries no information.
    a[0] = [ONE, ZERO, ZERO, ONE];
    a
}

/// Unique stationary state, solved with the trace constraint replacing the
/// redundant population row.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let condition = augmented_condition(l);
    if !(condition < SINGULAR_CONDITION) {
        return Err(Error::DegenerateSteadyState { condition });
    }
    let a = augmented(l);
    let x = solve4(&a, &[ONE, ZERO, ZERO, ZERO]).ok_or(Error::DegenerateSteadyState { condition })?;
    let ge = (x[2] + x[1].conj()) * 0.5;
    let rho = DensityMatrix::from_parts_unchecked(x[0].re, x[3].re, ge).normalized();
    rho.check()?;
    Ok(rho)
}

/// Density matrices sampled at every integrator step, starting at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub dt: f64,
    pub states: Vec<DensityMatrix>,
}

impl Path {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(move |k| k as f64 * self.dt)
    }

    /// State at the sample nearest to `t`.
    pub fn at(&self, t: f64) -> &DensityMatrix {
        let k = libm::round(t / self.dt) as usize;
        &self.states[k.min(self.states.len() - 1)]
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("path has at least the initial state")
    }
}

/// Checks the step against the coherent oscillation period.
pub fn check_evolve_step(dt: f64, delta: f64) -> Result<()> {
    let limit = MAX_EVOLVE_STEP / delta;
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    Ok(())
}

/// Classical fixed-step RK4 integration of the linear master equation.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t_end: f64, dt: f64) -> Result<Path> {
    check_evolve_step(dt, l.delta())?;
    let generator = l.real_form();
    let steps = libm::round(t_end / dt).max(0.0) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = rho0.coords();
    states.push(*rho0);
    for _ in 0..steps {
        x = generator.rk4_step(&x, dt);
        states.push(DensityMatrix::from_coords(x));
    }
    Ok(Path { dt, states })
}
