//! Operators on a [`HilbertSpace`]: embedding of single-factor operators,
//! ladder and Pauli matrices, the collective spin `Jx`, displacements, and
//! phase-blind operator comparison.
//!
//! Pauli convention: `σz|0⟩ = +|0⟩`, `σx|0⟩ = |1⟩`, `σ⁺ = |0⟩⟨1|`.

use std::ops::Mul;

use log::warn;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::space::HilbertSpace;

/// Structural tag carried alongside an operator's matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Unitary,
    Hermitian,
    General,
}

#[derive(Clone, Debug)]
pub struct LinearOperator {
    space: HilbertSpace,
    matrix: CMatrix,
    structure: Structure,
}

impl LinearOperator {
    pub fn new(space: HilbertSpace, matrix: CMatrix, structure: Structure) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, space dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix, structure })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Self {
            space,
            matrix: linalg::identity(space.dim()),
            structure: Structure::Unitary,
        }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::zeros(d, d),
            structure: Structure::Hermitian,
        }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
            structure: self.structure,
        }
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let structure = match (self.structure, other.structure) {
            (Structure::Unitary, Structure::Unitary) => Structure::Unitary,
            _ => Structure::General,
        };
        Ok(Self {
            space: self.space,
            matrix: &self.matrix * &other.matrix,
            structure,
        })
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let structure = match (self.structure, other.structure) {
            (Structure::Hermitian, Structure::Hermitian) => Structure::Hermitian,
            _ => Structure::General,
        };
        Ok(Self {
            space: self.space,
            matrix: &self.matrix + &other.matrix,
            structure,
        })
    }

    pub fn scale(&self, z: C64) -> Self {
        let structure = match self.structure {
            Structure::Hermitian if z.im == 0.0 => Structure::Hermitian,
            Structure::Unitary if (z.norm() - 1.0).abs() < 1e-15 => Structure::Unitary,
            _ => Structure::General,
        };
        Self {
            space: self.space,
            matrix: &self.matrix * z,
            structure,
        }
    }

    pub fn commutator(&self, other: &LinearOperator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self {
            space: self.space,
            matrix: linalg::commutator(&self.matrix, &other.matrix),
            structure: Structure::General,
        })
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        linalg::max_abs(&(self.matrix.adjoint() * &self.matrix - linalg::identity(d)))
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    /// Checks the structural tag against the matrix.
    pub fn check_structure(&self) -> Result<()> {
        match self.structure {
            Structure::Unitary if self.unitarity_error() >= 1e-10 => Err(Error::Domain(format!(
                "operator tagged unitary has ‖U†U−I‖ = {:.3e}",
                self.unitarity_error()
            ))),
            Structure::Hermitian if self.hermiticity_error() >= 1e-12 => Err(Error::Domain(format!(
                "operator tagged Hermitian has ‖A−A†‖ = {:.3e}",
                self.hermiticity_error()
            ))),
            _ => Ok(()),
        }
    }

    /// `exp(-i t A)` for a Hermitian operator.
    pub fn exp_hermitian(&self, t: f64) -> Self {
        Self {
            space: self.space,
            matrix: linalg::expm_hermitian(&self.matrix, t),
            structure: Structure::Unitary,
        }
    }

    /// Extends a qubit-only operator to `space` as `I_cavity ⊗ self`.
    pub fn extend_to(&self, space: HilbertSpace) -> Result<Self> {
        if self.space.has_cavity() || space.num_qubits() != self.space.num_qubits() {
            return Err(Error::Shape(format!(
                "cannot extend {:?} to {:?}",
                self.space, space
            )));
        }
        Ok(Self {
            space,
            matrix: linalg::kron(&linalg::identity(space.cavity_levels()), &self.matrix),
            structure: self.structure,
        })
    }
}

impl Mul for &LinearOperator {
    type Output = LinearOperator;

    /// Panics on space mismatch; use [`LinearOperator::compose`] for a fallible product.
    fn mul(self, rhs: &LinearOperator) -> LinearOperator {
        self.compose(rhs).expect("operator spaces differ")
    }
}

pub mod pauli {
    use super::*;

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)])
    }

    /// `σ⁺ = (σx + iσy)/2 = |0⟩⟨1|`.
    pub fn plus() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
    }

    /// `σ⁻ = |1⟩⟨0|`.
    pub fn minus() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
    }
}

pub mod ladder {
    use super::*;

    /// Truncated annihilation operator on levels `0..=n_max`.
    pub fn annihilation(n_max: usize) -> CMatrix {
        CMatrix::from_fn(n_max + 1, n_max + 1, |i, j| {
            if j == i + 1 {
                c((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn creation(n_max: usize) -> CMatrix {
        annihilation(n_max).adjoint()
    }

    pub fn number(n_max: usize) -> CMatrix {
        CMatrix::from_fn(n_max + 1, n_max + 1, |i, j| {
            if i == j {
                c(i as f64, 0.0)
            } else {
                ZERO
            }
        })
    }
}

/// Embeds a 2×2 matrix acting on one qubit into the full space.
pub fn embed_qubit_operator(
    space: HilbertSpace,
    qubit: usize,
    op: &CMatrix,
) -> Result<LinearOperator> {
    if qubit >= space.num_qubits() {
        return Err(Error::Range(format!(
            "qubit {qubit} outside 0..{}",
            space.num_qubits()
        )));
    }
    if op.nrows() != 2 || op.ncols() != 2 {
        return Err(Error::Shape(format!(
            "qubit operator must be 2x2, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let d = space.dim();
    let qd = space.qubit_dim();
    let mask = 1usize << qubit;
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let bit = ((col % qd) >> qubit) & 1;
        for out in 0..2 {
            let z = op[(out, bit)];
            if z != ZERO {
                let row = if out == bit { col } else { col ^ mask };
                m[(row, col)] = z;
            }
        }
    }
    LinearOperator::new(space, m, Structure::General)
}

/// Embeds a `(n_max+1)×(n_max+1)` matrix acting on the cavity.
pub fn embed_cavity_operator(space: HilbertSpace, op: &CMatrix) -> Result<LinearOperator> {
    let levels = space.cavity_levels();
    if !space.has_cavity() || op.nrows() != levels || op.ncols() != levels {
        return Err(Error::Shape(format!(
            "cavity operator is {}x{}, space has {} cavity levels",
            op.nrows(),
            op.ncols(),
            if space.has_cavity() { levels } else { 0 }
        )));
    }
    let m = linalg::kron(op, &linalg::identity(space.qubit_dim()));
    LinearOperator::new(space, m, Structure::General)
}

/// Qubit-register operator (`2^N × 2^N`) lifted to the full space.
pub fn embed_register_operator(space: HilbertSpace, op: &CMatrix) -> Result<LinearOperator> {
    let qd = space.qubit_dim();
    if op.nrows() != qd || op.ncols() != qd {
        return Err(Error::Shape(format!(
            "register operator is {}x{}, expected {qd}x{qd}",
            op.nrows(),
            op.ncols()
        )));
    }
    let m = linalg::kron(&linalg::identity(space.cavity_levels()), op);
    LinearOperator::new(space, m, Structure::General)
}

/// `Jx = Σ_j σx_j` on the full space.
pub fn collective_jx(space: HilbertSpace) -> Result<LinearOperator> {
    if space.num_qubits() == 0 {
        return Err(Error::Range("collective spin needs at least one qubit".into()));
    }
    let mut acc = LinearOperator::zeros(space).into_matrix();
    for j in 0..space.num_qubits() {
        acc += embed_qubit_operator(space, j, &pauli::x())?.matrix();
    }
    LinearOperator::new(space, acc, Structure::Hermitian)
}

/// Builds an operator that is a function of `Jx`, given the cavity block
/// `block(m)` for each `Jx` eigenvalue `m`.
///
/// In the basis `H^{⊗N} ⊗ I` the operator is block diagonal with the register
/// index fixing `m`; this rotates it back to the computational basis.
pub(crate) fn jx_block_operator(
    space: HilbertSpace,
    structure: Structure,
    mut block: impl FnMut(i64) -> CMatrix,
) -> Result<LinearOperator> {
    let n = space.num_qubits();
    let qd = space.qubit_dim();
    let levels = space.cavity_levels();
    let blocks: Vec<CMatrix> = (0..=n)
        .map(|k| block(n as i64 - 2 * k as i64))
        .collect();
    for b in &blocks {
        if b.nrows() != levels || b.ncols() != levels {
            return Err(Error::Shape("cavity block has wrong size".into()));
        }
    }
    let norm = 1.0 / qd as f64;
    let sign = |a: usize, b: usize| if (a & b).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    // H[q,r] H[r,q'] summed over r, for each (q, q') and eigenvalue class
    let mut weights = vec![vec![vec![0.0f64; n + 1]; qd]; qd];
    for q in 0..qd {
        for qp in 0..qd {
            for r in 0..qd {
                weights[q][qp][r.count_ones() as usize] += sign(q, r) * sign(r, qp) * norm;
            }
        }
    }
    let d = space.dim();
    let mut m = CMatrix::zeros(d, d);
    for nc in 0..levels {
        for np in 0..levels {
            for q in 0..qd {
                for qp in 0..qd {
                    let mut z = ZERO;
                    for (k, b) in blocks.iter().enumerate() {
                        let w = weights[q][qp][k];
                        if w != 0.0 {
                            z += b[(nc, np)] * w;
                        }
                    }
                    m[(nc * qd + q, np * qd + qp)] = z;
                }
            }
        }
    }
    LinearOperator::new(space, m, structure)
}

/// When cavity-displacing operations fail instead of warning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    /// Maximum tolerated population above level `n_max - 2`.
    pub threshold: f64,
    /// Return [`Error::Truncation`] rather than logging a warning.
    pub enforce: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { threshold: 1e-8, enforce: true }
    }
}

impl TruncationPolicy {
    pub fn lenient() -> Self {
        Self { threshold: 1e-8, enforce: false }
    }

    /// Applies the policy to a measured leak.
    pub fn check(&self, leaked: f64, n_max: usize) -> Result<()> {
        if leaked > self.threshold {
            if self.enforce {
                return Err(Error::Truncation {
                    leaked,
                    threshold: self.threshold,
                    level: n_max.saturating_sub(2),
                    n_max,
                });
            }
            warn!(
                "truncation: leaked population {leaked:.3e} above level {} (n_max = {n_max})",
                n_max.saturating_sub(2)
            );
        }
        Ok(())
    }
}

/// Population of the untruncated coherent state `|α⟩` on levels above `n_max - 2`.
pub fn coherent_leak(alpha_abs: f64, n_max: usize) -> f64 {
    let x = alpha_abs * alpha_abs;
    let start = n_max.saturating_sub(1);
    if x == 0.0 {
        return if start == 0 { 1.0 } else { 0.0 };
    }
    // log of the Poisson weight at `start`, then the tail by recurrence
    let mut log_p = -x + start as f64 * x.ln();
    for k in 1..=start {
        log_p -= (k as f64).ln();
    }
    let mut p = log_p.exp();
    let mut total = 0.0;
    let mut k = start;
    loop {
        total += p;
        k += 1;
        p *= x / k as f64;
        if p < 1e-300 || (p < total * 1e-17 && k as f64 > x) {
            break;
        }
    }
    total.min(1.0)
}

/// A displacement operator together with its truncation diagnostics.
#[derive(Clone, Debug)]
pub struct Displacement {
    pub operator: LinearOperator,
    /// Population of `D(α)|0⟩` above level `n_max - 2`.
    pub leaked: f64,
}

/// `D(α) = exp(α a† − α* a)` on the cavity factor.
pub fn displacement_operator(
    space: HilbertSpace,
    alpha: C64,
    policy: &TruncationPolicy,
) -> Result<Displacement> {
    let n_max = space
        .fock_cutoff()
        .ok_or_else(|| Error::Shape("displacement needs a cavity".into()))?;
    let leaked = coherent_leak(alpha.norm(), n_max);
    policy.check(leaked, n_max)?;
    let d = cavity_displacement(n_max, alpha);
    let operator = embed_cavity_operator(space, &d)?.with_structure(Structure::Unitary);
    Ok(Displacement { operator, leaked })
}

/// Cavity-only matrix of `D(α)` in the truncated space (unitary there).
pub fn cavity_displacement(n_max: usize, alpha: C64) -> CMatrix {
    let a = ladder::annihilation(n_max);
    // D = exp(-i K) with K = i(α a† − α* a), Hermitian
    let gen = (a.adjoint() * alpha - &a * alpha.conj()) * c(0.0, 1.0);
    linalg::expm_hermitian(&gen, 1.0)
}

/// Phase-blind distance `1 − |Tr(U†V)|/D`; zero iff `U = e^{iφ}V`.
pub fn operator_distance(u: &LinearOperator, v: &LinearOperator) -> Result<f64> {
    u.space().check_same(&v.space())?;
    let d = u.dim() as f64;
    let tr: C64 = u
        .matrix()
        .iter()
        .zip(v.matrix().iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((1.0 - tr.norm() / d).max(0.0))
}

/// [`operator_distance`] restricted to input states with cavity level
/// `≤ n_keep`: `1 − |Σ_{i∈W} ⟨i|U†V|i⟩| / |W|`.
///
/// Truncated propagators are only meaningful on the low Fock levels; this
/// compares them where the truncation is controlled.
pub fn operator_distance_on_window(
    u: &LinearOperator,
    v: &LinearOperator,
    n_keep: usize,
) -> Result<f64> {
    u.space().check_same(&v.space())?;
    let space = u.space();
    if n_keep >= space.cavity_levels() {
        return Err(Error::Range(format!(
            "window {n_keep} outside the cavity cutoff"
        )));
    }
    let cols = (n_keep + 1) * space.qubit_dim();
    let um = u.matrix().columns(0, cols);
    let vm = v.matrix().columns(0, cols);
    let tr: C64 = um.iter().zip(vm.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok((1.0 - tr.norm() / cols as f64).max(0.0))
}

/// Largest Fock level `n` such that `D(β)|n⟩` keeps less than `threshold`
/// population above `n_max - 2` for every `|β| ≤ alpha_max`. Measured on an
/// enlarged cutoff so the reference is itself converged.
pub fn reliable_fock_window(n_max: usize, alpha_max: f64, threshold: f64) -> Option<usize> {
    let big = n_max + 40 + (4.0 * alpha_max * alpha_max) as usize;
    let limit = n_max.saturating_sub(2);
    // a few magnitudes along the radius; the leak is monotone in practice
    let samples = [alpha_max, 0.75 * alpha_max, 0.5 * alpha_max];
    let mats: Vec<CMatrix> = samples
        .iter()
        .flat_map(|&r| {
            [c(r, 0.0), c(0.0, r)]
                .into_iter()
                .map(move |a| cavity_displacement(big, a))
        })
        .collect();
    let leak_of = |n: usize| -> f64 {
        mats.iter()
            .map(|d| (limit + 1..=big).map(|j| d[(j, n)].norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    (0..=limit).rev().find(|&n| leak_of(n) < threshold)
}
