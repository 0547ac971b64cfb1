//! Dense-matrix oracle built directly from the operator definitions with
//! nalgebra; shares no code with the crate under test.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Matrix4, Vector4};

pub type C = Complex<f64>;

pub fn c(re: f64) -> C {
    Complex::new(re, 0.0)
}

/// `cos(θ/2)|g⟩ + e^{iφ} sin(θ/2)|e⟩`.
pub fn ket(theta: f64, phi: f64) -> [C; 2] {
    [c((theta / 2.0).cos()), Complex::from_polar((theta / 2.0).sin(), phi)]
}

pub fn outer(a: [C; 2], b: [C; 2]) -> Matrix2<C> {
    Matrix2::new(a[0] * b[0].conj(), a[0] * b[1].conj(), a[1] * b[0].conj(), a[1] * b[1].conj())
}

pub struct Model {
    pub delta: f64,
    pub emission: f64,
    pub absorption: f64,
    pub gamma: f64,
    pub theta_m: f64,
    pub phi_m: f64,
    pub theta_n: f64,
    pub phi_n: f64,
}

impl Model {
    pub fn polar(emission: f64, absorption: f64, gamma: f64, theta_m: f64, theta_n: f64) -> Self {
        Model {
            delta: 1.0,
            emission,
            absorption,
            gamma,
            theta_m,
            phi_m: 0.0,
            theta_n,
            phi_n: 0.0,
        }
    }

    pub fn h0(&self) -> Matrix2<C> {
        Matrix2::new(c(-self.delta / 2.0), c(0.0), c(0.0), c(self.delta / 2.0))
    }

    fn lowering() -> Matrix2<C> {
        Matrix2::new(c(0.0), c(1.0), c(0.0), c(0.0))
    }

    pub fn pm(&self) -> Matrix2<C> {
        let m = ket(self.theta_m, self.phi_m);
        outer(m, m)
    }

    pub fn pn(&self) -> Matrix2<C> {
        let n = ket(self.theta_n, self.phi_n);
        outer(n, n)
    }

    /// Jump operator `|n⟩⟨m|`.
    pub fn jump(&self) -> Matrix2<C> {
        outer(ket(self.theta_n, self.phi_n), ket(self.theta_m, self.phi_m))
    }

    /// Measurement and feedback dissipator.
    pub fn d_m(&self, rho: &Matrix2<C>) -> Matrix2<C> {
        let k = self.jump();
        let pm = self.pm();
        (k * rho * k.adjoint() - (pm * rho + rho * pm) * c(0.5)) * c(self.gamma)
    }

    /// Dissipator of a bath with the given rates.
    pub fn d_b(emission: f64, absorption: f64, rho: &Matrix2<C>) -> Matrix2<C> {
        let lo = Self::lowering();
        let hi = lo.adjoint();
        let emit = (lo * rho * hi - (hi * lo * rho + rho * hi * lo) * c(0.5)) * c(emission);
        let absorb = (hi * rho * lo - (lo * hi * rho + rho * lo * hi) * c(0.5)) * c(absorption);
        emit + absorb
    }

    /// Column-major superoperator: `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
    pub fn liouvillian(&self) -> Matrix4<C> {
        let id = Matrix2::<C>::identity();
        let h = self.h0();
        let i = Complex::new(0.0, 1.0);
        let lo = Self::lowering();
        let hi = lo.adjoint();
        let sandwich = |a: &Matrix2<C>, b: &Matrix2<C>| b.transpose().kronecker(a);
        let anti = |a: &Matrix2<C>| id.kronecker(a) + a.transpose().kronecker(&id);
        let k = self.jump();
        let pm = self.pm();
        let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * (-i);
        l += (sandwich(&lo, &hi) - anti(&(hi * lo)) * c(0.5)) * c(self.emission);
        l += (sandwich(&hi, &lo) - anti(&(lo * hi)) * c(0.5)) * c(self.absorption);
        l += (sandwich(&k, &k.adjoint()) - anti(&pm) * c(0.5)) * c(self.gamma);
        l
    }

    pub fn steady_state(&self) -> Matrix2<C> {
        let l = self.liouvillian();
        let mut a = DMatrix::<C>::zeros(5, 4);
        for r in 0..4 {
            for col in 0..4 {
                a[(r, col)] = l[(r, col)];
            }
        }
        a[(4, 0)] = c(1.0);
        a[(4, 3)] = c(1.0);
        let mut b = DVector::<C>::zeros(5);
        b[4] = c(1.0);
        let x = a.svd(true, true).solve(&b, 1e-14).expect("solvable");
        unvec(&Vector4::new(x[0], x[1], x[2], x[3]))
    }

    /// `tr[H₀ D_M(ρ)]`.
    pub fn monitor_flow(&self, rho: &Matrix2<C>) -> f64 {
        (self.h0() * self.d_m(rho)).trace().re
    }

    /// `∫₀^∞ [J(t) − J_ss] dt` from `ρ(0) = P_n`, as a linear solve on the
    /// trace-free subspace.
    pub fn excess_energy(&self) -> f64 {
        let l = self.liouvillian();
        let x = vec(&(self.pn() - self.steady_state()));
        let mut a = DMatrix::<C>::zeros(5, 4);
        let mut b = DVector::<C>::zeros(5);
        for r in 0..4 {
            for col in 0..4 {
                a[(r, col)] = l[(r, col)];
            }
            b[r] = -x[r];
        }
        a[(4, 0)] = c(1.0);
        a[(4, 3)] = c(1.0);
        let y = a.svd(true, true).solve(&b, 1e-14).expect("solvable");
        self.monitor_flow(&unvec(&Vector4::new(y[0], y[1], y[2], y[3])))
    }

    /// `e^{Lt} ρ₀`.
    pub fn propagate(&self, rho0: &Matrix2<C>, t: f64) -> Matrix2<C> {
        let e = (self.liouvillian() * c(t)).exp();
        unvec(&(e * vec(rho0)))
    }
}

pub fn vec(m: &Matrix2<C>) -> Vector4<C> {
    Vector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
}

pub fn unvec(v: &Vector4<C>) -> Matrix2<C> {
    Matrix2::new(v[0], v[2], v[1], v[3])
}

/// Eigenvalues of the Liouvillian.
pub fn spectrum(l: &Matrix4<C>) -> Vec<C> {
    l.clone_owned().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_else(|| {
        let s = nalgebra::Schur::new(*l);
        s.eigenvalues().expect("triangular").iter().copied().collect()
    })
}
