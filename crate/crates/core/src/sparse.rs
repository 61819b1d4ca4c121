//! Compressed-row complex matrices and the Taylor action of `exp(−i dt H)`.
//!
//! The coupled Hamiltonians are banded in the Fock index, so the integrators
//! apply them in CSR form to dense blocks of columns.

use num_complex::Complex64 as C64;

use crate::linalg::{CMatrix, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Drops entries with modulus `≤ drop_rel · max|m_ij|`.
    pub fn from_dense(m: &CMatrix, drop_rel: f64) -> Self {
        let max = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let cut = drop_rel * max;
        let (nrows, ncols) = m.shape();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..nrows {
            for j in 0..ncols {
                let z = m[(i, j)];
                if z.norm() > cut {
                    indices.push(j);
                    values.push(z);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `self · b`.
    pub fn mul_dense(&self, b: &CMatrix) -> CMatrix {
        assert_eq!(self.ncols, b.nrows(), "inner dimensions differ");
        let k = b.ncols();
        let mut out = CMatrix::zeros(self.nrows, k);
        for col in 0..k {
            let bc = b.column(col);
            let mut oc = out.column_mut(col);
            for i in 0..self.nrows {
                let mut acc = ZERO;
                for p in self.indptr[i]..self.indptr[i + 1] {
                    acc += self.values[p] * bc[self.indices[p]];
                }
                oc[i] = acc;
            }
        }
        out
    }

    /// Largest absolute row sum, `‖·‖_∞`. Equals `‖·‖₁` for Hermitian input.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| {
                self.values[self.indptr[i]..self.indptr[i + 1]]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Something that can multiply a dense block and bound its own norm.
pub trait LinearAction {
    fn apply(&self, v: &CMatrix) -> CMatrix;
    /// Upper bound on `‖·‖_∞`.
    fn norm_bound(&self) -> f64;
}

impl LinearAction for CsrMatrix {
    fn apply(&self, v: &CMatrix) -> CMatrix {
        self.mul_dense(v)
    }

    fn norm_bound(&self) -> f64 {
        self.norm_inf()
    }
}

/// `Σ_j c_j M_j` applied term by term.
#[derive(Clone, Debug)]
pub struct Combination<'a> {
    pub terms: Vec<(C64, &'a CsrMatrix)>,
}

impl LinearAction for Combination<'_> {
    fn apply(&self, v: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(v.nrows(), v.ncols());
        for (c, m) in &self.terms {
            if *c != ZERO {
                out += m.mul_dense(v) * *c;
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, m)| c.norm() * m.norm_inf()).sum()
    }
}

/// `exp(−i dt H) v` for Hermitian `H` by truncated Taylor series on
/// substeps with `‖dt H‖ / s ≤ 1`.
pub fn expm_action(h: &impl LinearAction, dt: f64, v: &CMatrix) -> CMatrix {
    let norm = h.norm_bound() * dt.abs();
    let substeps = norm.ceil().max(1.0) as usize;
    let h_step = dt / substeps as f64;
    let scale = C64::new(0.0, -h_step);
    let mut out = v.clone();
    for _ in 0..substeps {
        let base = out.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let mut term = out.clone();
        for j in 1..=60 {
            term = h.apply(&term) * (scale / j as f64);
            out += &term;
            let size = term.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            if size <= 1e-17 * base {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, expm_hermitian, hermitian_part, max_abs};

    fn sample(n: usize) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) <= 2 {
                c(((i + 2 * j) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3)
            } else {
                ZERO
            }
        });
        hermitian_part(&m)
    }

    #[test]
    fn csr_product_matches_dense() {
        let m = sample(9);
        let b = CMatrix::from_fn(9, 3, |i, j| c(i as f64 * 0.1, j as f64 - 1.0));
        let s = CsrMatrix::from_dense(&m, 0.0);
        assert!(s.nnz() < 81);
        assert!(max_abs(&(s.mul_dense(&b) - &m * &b)) < 1e-13);
    }

    #[test]
    fn combination_matches_dense_sum() {
        let m = sample(6);
        let s = CsrMatrix::from_dense(&m, 0.0);
        let comb = Combination { terms: vec![(c(0.5, 0.0), &s), (c(0.0, 2.0), &s)] };
        let v = CMatrix::identity(6, 6);
        assert!(max_abs(&(comb.apply(&v) - &m * c(0.5, 2.0))) < 1e-13);
    }

    #[test]
    fn taylor_action_matches_eigen_exponential() {
        let m = sample(12);
        let v = CMatrix::identity(12, 12);
        let s = CsrMatrix::from_dense(&m, 0.0);
        for dt in [0.01, 0.7, 3.5] {
            let got = expm_action(&s, dt, &v);
            assert!(max_abs(&(got - expm_hermitian(&m, dt))) < 1e-12);
        }
    }
}
