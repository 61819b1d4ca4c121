//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product `a ⊗ b` (b is the fast index).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * c(0.5, 0.0)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix: `V f(Λ) V†`.
pub fn hermitian_map(h: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let eig = hermitian_part(h).symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let fj = f(lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= fj;
        }
    }
    scaled * v.adjoint()
}

/// `exp(-i t H)` for Hermitian `H`, by eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_map(h, |lambda| C64::from_polar(1.0, -lambda * t))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(h).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Square root of a positive semidefinite matrix; small negative eigenvalues
/// from roundoff are clipped.
pub fn psd_sqrt(h: &CMatrix) -> CMatrix {
    hermitian_map(h, |lambda| c(lambda.max(0.0).sqrt(), 0.0))
}

/// Finite Taylor series of `exp(m)` for a nilpotent `m`. Terminates exactly
/// once the power vanishes.
pub fn expm_nilpotent(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut acc = identity(n);
    let mut term = identity(n);
    for k in 1..=n {
        term = &term * m * c(1.0 / k as f64, 0.0);
        if max_abs(&term) == 0.0 {
            break;
        }
        acc += &term;
    }
    acc
}
