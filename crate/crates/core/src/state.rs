//! Pure and mixed states, expectation values, partial traces and fidelities.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::operator::LinearOperator;
use crate::space::{HilbertSpace, Subsystem};

#[derive(Clone, Debug)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps amplitudes as given (no normalization).
    pub fn new(space: HilbertSpace, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::Shape(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        Ok(Self { space, amplitudes })
    }

    /// Wraps and normalizes; errors on the zero vector.
    pub fn normalized(space: HilbertSpace, amplitudes: CVector) -> Result<Self> {
        let mut s = Self::new(space, amplitudes)?;
        s.normalize()?;
        Ok(s)
    }

    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::Range(format!("basis index {index} outside 0..{}", space.dim())));
        }
        let mut v = CVector::zeros(space.dim());
        v[index] = c(1.0, 0.0);
        Ok(Self { space, amplitudes: v })
    }

    /// Product state `|qubits⟩ ⊗ |cavity⟩` on the joint space.
    pub fn product(qubits: &StateVector, cavity: &CVector, space: HilbertSpace) -> Result<Self> {
        if qubits.space.has_cavity()
            || qubits.space.num_qubits() != space.num_qubits()
            || cavity.len() != space.cavity_levels()
        {
            return Err(Error::Shape("product factors do not match the joint space".into()));
        }
        let v = cavity.kronecker(&qubits.amplitudes);
        Self::new(space, v)
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a zero or non-finite state".into()));
        }
        self.amplitudes.unscale_mut(n);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.check_same(&other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            space: self.space,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DensityOperator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "density matrix is {}x{}, dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    /// Probability-weighted mixture of density operators on the same space.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Domain("empty mixture".into()))?;
        let mut m = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (p, rho) in parts {
            first.1.space.check_same(&rho.space)?;
            m += &rho.matrix * c(*p, 0.0);
        }
        Self::new(first.1.space, m)
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

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix)[0]
    }

    /// Checks Hermiticity, unit trace, and positivity at the given tolerances.
    pub fn validate(&self, tol: f64, eig_floor: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        let tr = self.trace();
        let min_ev = self.min_eigenvalue();
        if herm > tol || (tr - c(1.0, 0.0)).norm() > tol || min_ev < eig_floor {
            return Err(Error::Domain(format!(
                "invalid density operator: hermiticity {herm:.2e}, trace {tr}, min eigenvalue {min_ev:.2e}"
            )));
        }
        Ok(())
    }

    /// `UρU†`.
    pub fn evolve(&self, u: &LinearOperator) -> Result<Self> {
        self.space.check_same(&u.space())?;
        Ok(Self {
            space: self.space,
            matrix: u.matrix() * &self.matrix * u.matrix().adjoint(),
        })
    }
}

/// Borrowed view of either kind of state.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityOperator),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityOperator> for StateRef<'a> {
    fn from(s: &'a DensityOperator) -> Self {
        StateRef::Mixed(s)
    }
}

impl StateRef<'_> {
    pub fn space(&self) -> HilbertSpace {
        match self {
            StateRef::Pure(s) => s.space(),
            StateRef::Mixed(r) => r.space(),
        }
    }
}

pub fn apply(op: &LinearOperator, state: &StateVector) -> Result<StateVector> {
    op.space().check_same(&state.space())?;
    StateVector::new(state.space(), op.matrix() * state.amplitudes())
}

pub fn expectation<'a>(op: &LinearOperator, state: impl Into<StateRef<'a>>) -> Result<C64> {
    let state = state.into();
    op.space().check_same(&state.space())?;
    Ok(match state {
        StateRef::Pure(s) => s.amplitudes().dotc(&(op.matrix() * s.amplitudes())),
        StateRef::Mixed(r) => (op.matrix() * r.matrix()).trace(),
    })
}

/// Splits each basis index into (kept index, traced index).
fn factor_maps(space: HilbertSpace, keep: &[Subsystem]) -> Result<(HilbertSpace, Vec<(usize, usize)>)> {
    let n = space.num_qubits();
    let mut kept_qubits: Vec<usize> = Vec::new();
    let mut keep_cavity = false;
    for &s in keep {
        space.factor_dim(s)?;
        match s {
            Subsystem::Qubit(i) => {
                if kept_qubits.contains(&i) {
                    return Err(Error::Shape(format!("qubit {i} listed twice")));
                }
                kept_qubits.push(i)
            }
            Subsystem::Cavity => keep_cavity = true,
        }
    }
    kept_qubits.sort_unstable();
    if kept_qubits.is_empty() && !keep_cavity {
        return Err(Error::Shape("partial trace must keep at least one subsystem".into()));
    }
    let traced_qubits: Vec<usize> = (0..n).filter(|i| !kept_qubits.contains(i)).collect();
    let out_space = if keep_cavity {
        HilbertSpace::with_cavity(kept_qubits.len(), space.fock_cutoff().unwrap_or(1))?
    } else {
        HilbertSpace::qubits(kept_qubits.len())?
    };
    let qd = space.qubit_dim();
    let maps = (0..space.dim())
        .map(|idx| {
            let q = idx % qd;
            let fock = idx / qd;
            let mut k = 0usize;
            for (pos, &i) in kept_qubits.iter().enumerate() {
                k |= ((q >> i) & 1) << pos;
            }
            let mut t = 0usize;
            for (pos, &i) in traced_qubits.iter().enumerate() {
                t |= ((q >> i) & 1) << pos;
            }
            if keep_cavity {
                k += fock << kept_qubits.len();
            } else {
                t += fock << traced_qubits.len();
            }
            (k, t)
        })
        .collect();
    Ok((out_space, maps))
}

/// Reduced density operator on the kept subsystems, in their original order.
pub fn partial_trace<'a>(state: impl Into<StateRef<'a>>, keep: &[Subsystem]) -> Result<DensityOperator> {
    let state = state.into();
    let (out, maps) = factor_maps(state.space(), keep)?;
    let dk = out.dim();
    let dt = state.space().dim() / dk;
    // index table: full[k][t]
    let mut table = vec![0usize; dk * dt];
    for (full, &(k, t)) in maps.iter().enumerate() {
        table[k * dt + t] = full;
    }
    let mut m = CMatrix::zeros(dk, dk);
    match state {
        StateRef::Pure(s) => {
            let a = s.amplitudes();
            for k1 in 0..dk {
                for k2 in 0..dk {
                    let mut z = ZERO;
                    for t in 0..dt {
                        z += a[table[k1 * dt + t]] * a[table[k2 * dt + t]].conj();
                    }
                    m[(k1, k2)] = z;
                }
            }
        }
        StateRef::Mixed(r) => {
            let rm = r.matrix();
            for k1 in 0..dk {
                for k2 in 0..dk {
                    let mut z = ZERO;
                    for t in 0..dt {
                        z += rm[(table[k1 * dt + t], table[k2 * dt + t])];
                    }
                    m[(k1, k2)] = z;
                }
            }
        }
    }
    DensityOperator::new(out, m)
}

/// Fidelity in `[0, 1]`: `|⟨x|y⟩|²` for pure states, `⟨x|ρ|x⟩` for pure
/// against mixed, and the squared Uhlmann fidelity `(Tr√(√ρ σ √ρ))²` for two
/// mixed states.
pub fn fidelity<'a, 'b>(x: impl Into<StateRef<'a>>, y: impl Into<StateRef<'b>>) -> Result<f64> {
    let (x, y) = (x.into(), y.into());
    x.space().check_same(&y.space())?;
    let f = match (x, y) {
        (StateRef::Pure(a), StateRef::Pure(b)) => {
            let ov = a.inner(b)?;
            ov.norm_sqr() / (a.norm().powi(2) * b.norm().powi(2))
        }
        (StateRef::Pure(a), StateRef::Mixed(r)) | (StateRef::Mixed(r), StateRef::Pure(a)) => {
            let v = a.amplitudes();
            v.dotc(&(r.matrix() * v)).re / a.norm().powi(2)
        }
        (StateRef::Mixed(r), StateRef::Mixed(s)) => {
            let sr = linalg::psd_sqrt(r.matrix());
            let inner = &sr * s.matrix() * &sr;
            let ev = linalg::hermitian_eigenvalues(&inner);
            let t: f64 = ev.iter().map(|l| l.max(0.0).sqrt()).sum();
            t * t
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// JSON form: amplitudes as `[re, im]` pairs in basis-index order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateJson {
    pub num_qubits: usize,
    pub fock_cutoff: Option<usize>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&StateVector> for StateJson {
    fn from(s: &StateVector) -> Self {
        Self {
            num_qubits: s.space.num_qubits(),
            fock_cutoff: s.space.fock_cutoff(),
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&StateJson> for StateVector {
    type Error = Error;

    fn try_from(j: &StateJson) -> Result<Self> {
        let space = match j.fock_cutoff {
            Some(n) => HilbertSpace::with_cavity(j.num_qubits, n)?,
            None => HilbertSpace::qubits(j.num_qubits)?,
        };
        let v = CVector::from_iterator(j.amplitudes.len(), j.amplitudes.iter().map(|p| c(p[0], p[1])));
        StateVector::new(space, v)
    }
}

/// JSON form of a density matrix: row-major `[re, im]` entries.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DensityJson {
    pub num_qubits: usize,
    pub fock_cutoff: Option<usize>,
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&DensityOperator> for DensityJson {
    fn from(r: &DensityOperator) -> Self {
        let d = r.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = r.matrix[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self {
            num_qubits: r.space.num_qubits(),
            fock_cutoff: r.space.fock_cutoff(),
            dim: d,
            entries,
        }
    }
}
