//! Joint Hilbert space of N qubits and one truncated cavity mode.
//!
//! Basis ordering: `index = fock_n * 2^N + Σ_i bit_i * 2^i`. Qubit 0 is the
//! least significant bit and the cavity is the slowest index. Every
//! serialized state and operator uses this convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    num_qubits: usize,
    fock_cutoff: Option<usize>,
}

/// A tensor factor of a [`HilbertSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Qubit(usize),
    Cavity,
}

/// Upper bound on the qubit count; dense matrices beyond this are not useful.
pub const MAX_QUBITS: usize = 12;

impl HilbertSpace {
    /// Qubits only, no cavity factor.
    pub fn qubits(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Range(format!(
                "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self { num_qubits, fock_cutoff: None })
    }

    /// N qubits plus a cavity with levels `0..=fock_cutoff`.
    ///
    /// `num_qubits == 0` gives a cavity-only space.
    pub fn with_cavity(num_qubits: usize, fock_cutoff: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::Range(format!(
                "qubit count {num_qubits} above {MAX_QUBITS}"
            )));
        }
        if fock_cutoff < 1 {
            return Err(Error::Range("fock cutoff must be at least 1".into()));
        }
        Ok(Self { num_qubits, fock_cutoff: Some(fock_cutoff) })
    }

    pub fn cavity_only(fock_cutoff: usize) -> Result<Self> {
        Self::with_cavity(0, fock_cutoff)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn fock_cutoff(&self) -> Option<usize> {
        self.fock_cutoff
    }

    pub fn has_cavity(&self) -> bool {
        self.fock_cutoff.is_some()
    }

    /// Number of cavity levels, 1 when there is no cavity factor.
    pub fn cavity_levels(&self) -> usize {
        self.fock_cutoff.map_or(1, |n| n + 1)
    }

    pub fn qubit_dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.qubit_dim() * self.cavity_levels()
    }

    /// The same qubits without the cavity.
    pub fn qubit_space(&self) -> Result<Self> {
        Self::qubits(self.num_qubits)
    }

    pub fn basis_index(&self, qubit_bits: &[u8], fock_n: usize) -> Result<usize> {
        if qubit_bits.len() != self.num_qubits {
            return Err(Error::Shape(format!(
                "expected {} qubit bits, got {}",
                self.num_qubits,
                qubit_bits.len()
            )));
        }
        let levels = self.cavity_levels();
        if fock_n >= levels {
            return Err(Error::Range(format!(
                "fock level {fock_n} outside 0..{levels}"
            )));
        }
        let mut q = 0usize;
        for (i, &b) in qubit_bits.iter().enumerate() {
            match b {
                0 => {}
                1 => q |= 1 << i,
                other => return Err(Error::Range(format!("qubit bit {other} is not 0 or 1"))),
            }
        }
        Ok(fock_n * self.qubit_dim() + q)
    }

    /// Inverse of [`Self::basis_index`]: (qubit bits, fock level).
    pub fn decompose(&self, index: usize) -> Result<(Vec<u8>, usize)> {
        if index >= self.dim() {
            return Err(Error::Range(format!("index {index} outside 0..{}", self.dim())));
        }
        let q = index % self.qubit_dim();
        let bits = (0..self.num_qubits).map(|i| ((q >> i) & 1) as u8).collect();
        Ok((bits, index / self.qubit_dim()))
    }

    /// Dimension of one tensor factor.
    pub fn factor_dim(&self, sub: Subsystem) -> Result<usize> {
        match sub {
            Subsystem::Qubit(i) if i < self.num_qubits => Ok(2),
            Subsystem::Qubit(i) => Err(Error::Range(format!(
                "qubit {i} outside 0..{}",
                self.num_qubits
            ))),
            Subsystem::Cavity if self.has_cavity() => Ok(self.cavity_levels()),
            Subsystem::Cavity => Err(Error::Range("space has no cavity".into())),
        }
    }

    pub fn check_same(&self, other: &HilbertSpace) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!("space mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_index_examples() {
        let s = HilbertSpace::with_cavity(2, 3).unwrap();
        assert_eq!(s.basis_index(&[0, 0], 0).unwrap(), 0);
        assert_eq!(s.basis_index(&[1, 0], 0).unwrap(), 1);
        assert_eq!(s.basis_index(&[0, 0], 1).unwrap(), 4);
        assert!(s.basis_index(&[0, 2], 0).is_err());
        assert!(s.basis_index(&[0, 0], 4).is_err());
        assert!(s.basis_index(&[0], 0).is_err());
    }

    #[test]
    fn bijection_exhaustive() {
        for n in 1..=4 {
            for n_max in 1..=8 {
                let s = HilbertSpace::with_cavity(n, n_max).unwrap();
                assert_eq!(s.dim(), (1 << n) * (n_max + 1));
                let mut seen = vec![false; s.dim()];
                for fock in 0..=n_max {
                    for q in 0..(1usize << n) {
                        let bits: Vec<u8> = (0..n).map(|i| ((q >> i) & 1) as u8).collect();
                        let idx = s.basis_index(&bits, fock).unwrap();
                        assert!(!seen[idx]);
                        seen[idx] = true;
                        assert_eq!(s.decompose(idx).unwrap(), (bits, fock));
                    }
                }
                assert!(seen.iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn qubit_only_space() {
        let s = HilbertSpace::qubits(3).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(s.cavity_levels(), 1);
        assert!(s.basis_index(&[1, 1, 1], 1).is_err());
        assert!(HilbertSpace::qubits(0).is_err());
        assert!(HilbertSpace::with_cavity(1, 0).is_err());
    }
}
