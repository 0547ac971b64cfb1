//! Hermiticity-preserving maps in real coordinates `(ρ_gg, ρ_ee, Re ρ_ge, Im ρ_ge)`.

use crate::mat2::{Mat2, C64, I, ONE, ZERO};

pub type Real4 = [[f64; 4]; 4];

/// Hermitian basis dual to the real coordinates.
fn basis(k: usize) -> Mat2 {
    match k {
        0 => Mat2::diag(1.0, 0.0),
        1 => Mat2::diag(0.0, 1.0),
        2 => Mat2::new(ZERO, ONE, ONE, ZERO),
        _ => Mat2::new(ZERO, I, -I, ZERO),
    }
}

pub fn coords_of(m: &Mat2) -> [f64; 4] {
    let ge: C64 = m.get(0, 1);
    [m.get(0, 0).re, m.get(1, 1).re, ge.re, ge.im]
}

/// Matrix of a linear Hermiticity-preserving superoperator.
pub fn superop(f: impl Fn(&Mat2) -> Mat2) -> Real4 {
    let mut out = [[0.0; 4]; 4];
    for k in 0..4 {
        let col = coords_of(&f(&basis(k)));
        for i in 0..4 {
            out[i][k] = col[i];
        }
    }
    out
}

/// Coefficients `w` with `f(ρ) = w · x` for a real linear functional.
pub fn functional(f: impl Fn(&Mat2) -> f64) -> [f64; 4] {
    let mut w = [0.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        *wk = f(&basis(k));
    }
    w
}

#[inline]
pub fn dot(w: &[f64; 4], x: &[f64; 4]) -> f64 {
    (w[0] * x[0] + w[1] * x[1]) + (w[2] * x[2] + w[3] * x[3])
}

#[inline]
pub fn matvec(a: &Real4, x: &[f64; 4]) -> [f64; 4] {
    [dot(&a[0], x), dot(&a[1], x), dot(&a[2], x), dot(&a[3], x)]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealGenerator(pub Real4);

impl RealGenerator {
    #[inline]
    pub fn apply(&self, x: &[f64; 4]) -> [f64; 4] {
        matvec(&self.0, x)
    }

    pub fn rk4_step(&self, x: &[f64; 4], dt: f64) -> [f64; 4] {
        let axpy = |a: &[f64; 4], s: f64, b: &[f64; 4]| -> [f64; 4] {
            [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]]
        };
        let k1 = self.apply(x);
        let k2 = self.apply(&axpy(x, 0.5 * dt, &k1));
        let k3 = self.apply(&axpy(x, 0.5 * dt, &k2));
        let k4 = self.apply(&axpy(x, dt, &k3));
        let mut out = *x;
        for i in 0..4 {
            out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }
}
