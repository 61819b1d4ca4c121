//! Ideal gate constructions and the control-parameter solver.
//!
//! All gates here act on the qubit register only; the cavity-inclusive
//! realizations live in [`crate::propagator`] and [`crate::cluster`].
//!
//! The composite target `exp[i8γ Σ_{j>i} P_i P_j]` with `P = (1+σx)/2`
//! expands to `exp[i2γ(N−1)Jx] · exp(iγJx²)` up to a global phase. The
//! single-qubit stage therefore needs `E(Φ) t₁ ≡ 2γ(N−1) (mod 2π)`; the
//! [`T1Mode::Corrected`] schedule solves exactly that, while
//! [`T1Mode::Paper`] uses `t₁ = (N−1)(2n+1)π/(16E(Φ))`, which is four times
//! shorter and does not reproduce the composite target.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::model::{josephson_energy, SystemParams};
use crate::operator::{embed_qubit_operator, jx_block_operator, pauli, LinearOperator, Structure};
use crate::space::HilbertSpace;
use crate::units::Quantity;

/// `exp(iγJx²)` on N qubits, from the `Jx` eigenbasis.
pub fn ideal_collective_gate(num_qubits: usize, gamma: f64) -> Result<LinearOperator> {
    let space = HilbertSpace::qubits(num_qubits)?;
    jx_block_operator(space, Structure::Unitary, |m| {
        CMatrix::from_element(1, 1, C64::from_polar(1.0, gamma * (m * m) as f64))
    })
}

/// `⊗_j exp(iθσx_j)` with `θ = E(Φ) t`, as an explicit product of
/// single-qubit rotations.
pub fn single_qubit_layer(num_qubits: usize, e_phi: f64, t: f64) -> Result<LinearOperator> {
    rotation_layer(num_qubits, e_phi * t)
}

/// `⊗_j exp(iθσx_j)`.
pub fn rotation_layer(num_qubits: usize, theta: f64) -> Result<LinearOperator> {
    let space = HilbertSpace::qubits(num_qubits)?;
    let rot = linalg::identity(2) * c(theta.cos(), 0.0) + pauli::x() * c(0.0, theta.sin());
    let mut acc = LinearOperator::identity(space);
    for j in 0..num_qubits {
        let r = embed_qubit_operator(space, j, &rot)?.with_structure(Structure::Unitary);
        acc = acc.compose(&r)?;
    }
    Ok(acc)
}

/// `Σ_{j>i} σx_i σx_j` on the register.
pub fn pairwise_xx_sum(space: HilbertSpace) -> Result<CMatrix> {
    let n = space.num_qubits();
    let xs: Vec<LinearOperator> = (0..n)
        .map(|j| embed_qubit_operator(space, j, &pauli::x()))
        .collect::<Result<_>>()?;
    let mut acc = CMatrix::zeros(space.dim(), space.dim());
    for i in 0..n {
        for j in i + 1..n {
            acc += xs[i].matrix() * xs[j].matrix();
        }
    }
    Ok(acc)
}

/// `exp(i2γ Σ_{j>i} σx_i σx_j)`, exponentiated directly from the pair sum.
pub fn pairwise_form(num_qubits: usize, gamma: f64) -> Result<LinearOperator> {
    let space = HilbertSpace::qubits(num_qubits)?;
    let h = pairwise_xx_sum(space)?;
    // exp(i 2γ S) = exp(−i t S) with t = −2γ
    LinearOperator::new(space, linalg::expm_hermitian(&h, -2.0 * gamma), Structure::Unitary)
}

/// Hermitian generator `8γ Σ_{j>i} P_i P_j`, `P = (1+σx)/2`.
pub fn cluster_generator(num_qubits: usize, gamma: f64) -> Result<CMatrix> {
    let space = HilbertSpace::qubits(num_qubits)?;
    let d = space.dim();
    let proj: Vec<CMatrix> = (0..num_qubits)
        .map(|j| {
            let p = (linalg::identity(2) + pauli::x()) * c(0.5, 0.0);
            embed_qubit_operator(space, j, &p).map(LinearOperator::into_matrix)
        })
        .collect::<Result<_>>()?;
    let mut acc = CMatrix::zeros(d, d);
    for i in 0..num_qubits {
        for j in i + 1..num_qubits {
            acc += &proj[i] * &proj[j];
        }
    }
    Ok(acc * c(8.0 * gamma, 0.0))
}

/// The composite target `exp[i8γ Σ_{j>i} ((1+σx_i)/2)((1+σx_j)/2)]`.
pub fn cluster_phase_operator(num_qubits: usize, gamma: f64) -> Result<LinearOperator> {
    let space = HilbertSpace::qubits(num_qubits)?;
    let h = cluster_generator(num_qubits, gamma)?;
    LinearOperator::new(space, linalg::expm_hermitian(&h, -1.0), Structure::Unitary)
}

/// `δ = g E_J √(k/(2n+1))`, the detuning that makes `γ = (2n+1)π/8` after k loops.
pub fn detuning_for(g: f64, e_j: f64, k: u32, n_odd_index: u32) -> f64 {
    g * e_j * (k as f64 / (2 * n_odd_index + 1) as f64).sqrt()
}

/// `γ = (g E_J / 4δ)² δT`.
pub fn gamma_from_loop(g: f64, e_j: f64, delta: f64, period: f64) -> f64 {
    let r = g * e_j / (4.0 * delta);
    r * r * delta * period
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum T1Mode {
    /// `t₁ = (N−1)(2n+1)π/(16E(Φ))`.
    Paper,
    /// Smallest `t₁ ≥ 0` with `E(Φ)t₁ ≡ 2γ(N−1) (mod 2π)`.
    #[default]
    Corrected,
}


impl std::str::FromStr for T1Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(T1Mode::Paper),
            "corrected" => Ok(T1Mode::Corrected),
            other => Err(Error::InvalidParameter(format!("unknown t1 mode '{other}'"))),
        }
    }
}

/// Solved control parameters for one collective gate plus single-qubit stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateSchedule {
    pub num_qubits: usize,
    pub gamma: f64,
    pub k: u32,
    pub n_odd_index: u32,
    /// Detuning δ (rad/ns).
    pub delta: f64,
    /// Coupled-stage duration T (ns), `δT = 2kπ`.
    pub period: f64,
    /// Single-qubit-stage duration (ns).
    pub t1: f64,
    pub t1_mode: T1Mode,
    /// E(Φ) during the single-qubit stage (rad/ns).
    pub e_phi: f64,
}

impl GateSchedule {
    /// Single-qubit angle `E(Φ) t₁` applied by the first stage.
    pub fn single_qubit_angle(&self) -> f64 {
        self.e_phi * self.t1
    }

    /// Angle the composite target requires: `2γ(N−1)`.
    pub fn required_single_qubit_angle(&self) -> f64 {
        2.0 * self.gamma * (self.num_qubits as f64 - 1.0)
    }

    /// Total manipulation time `t₁ + T`.
    pub fn total_time(&self) -> f64 {
        self.t1 + self.period
    }

    pub fn to_json(&self) -> ScheduleJson {
        ScheduleJson {
            num_qubits: self.num_qubits,
            gamma: Quantity::dimensionless(self.gamma),
            k: self.k,
            n: self.n_odd_index,
            delta: Quantity::rad_per_ns(self.delta),
            period: Quantity::ns(self.period),
            t1: Quantity::ns(self.t1),
            t1_mode: self.t1_mode,
            e_phi: Quantity::rad_per_ns(self.e_phi),
        }
    }
}

/// JSON form of a [`GateSchedule`], every dimensional field unit-tagged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleJson {
    #[serde(rename = "N")]
    pub num_qubits: usize,
    pub gamma: Quantity,
    pub k: u32,
    pub n: u32,
    pub delta: Quantity,
    #[serde(rename = "T")]
    pub period: Quantity,
    pub t1: Quantity,
    pub t1_mode: T1Mode,
    #[serde(rename = "E_phi")]
    pub e_phi: Quantity,
}

impl TryFrom<&ScheduleJson> for GateSchedule {
    type Error = Error;

    fn try_from(j: &ScheduleJson) -> Result<Self> {
        use crate::units::Dimension;
        Ok(GateSchedule {
            num_qubits: j.num_qubits,
            gamma: j.gamma.canonical(Dimension::Dimensionless)?,
            k: j.k,
            n_odd_index: j.n,
            delta: j.delta.canonical(Dimension::Frequency)?,
            period: j.period.canonical(Dimension::Time)?,
            t1: j.t1.canonical(Dimension::Time)?,
            t1_mode: j.t1_mode,
            e_phi: j.e_phi.canonical(Dimension::Frequency)?,
        })
    }
}

/// Solves for the detuning, loop time and single-qubit time that realize the
/// cluster-generating gate with `γ = (2n+1)π/8`.
pub fn solve_schedule(
    sp: &SystemParams,
    num_qubits: usize,
    k: u32,
    n_odd_index: u32,
    t1_mode: T1Mode,
) -> Result<GateSchedule> {
    let g = sp.cavity.g;
    let e_j = sp.qubit.e_j;
    if !(g > 0.0 && e_j > 0.0) {
        return Err(Error::InvalidParameter("g and E_J must be positive".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("loop count k must be at least 1".into()));
    }
    if num_qubits == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    let e_phi = josephson_energy(&sp.qubit);
    if e_phi.abs() < 1e-12 * e_j {
        return Err(Error::Domain(
            "E(Φ) = 0: the single-qubit stage cannot be realized at this flux".into(),
        ));
    }
    if e_phi < 0.0 {
        return Err(Error::Domain(format!(
            "E(Φ) = {e_phi:.4} is negative; choose |Φ/φ₀| < 1/2 for the single-qubit stage"
        )));
    }
    let delta = detuning_for(g, e_j, k, n_odd_index);
    let period = 2.0 * PI * k as f64 / delta;
    let gamma = (2 * n_odd_index + 1) as f64 * PI / 8.0;
    let t1 = match t1_mode {
        T1Mode::Paper => (num_qubits as f64 - 1.0) * (2 * n_odd_index + 1) as f64 * PI / (16.0 * e_phi),
        T1Mode::Corrected => {
            let angle = (2.0 * gamma * (num_qubits as f64 - 1.0)).rem_euclid(2.0 * PI);
            // angles within roundoff of 2π are the identity rotation
            let angle = if (2.0 * PI - angle) < 1e-12 { 0.0 } else { angle };
            angle / e_phi
        }
    };
    Ok(GateSchedule {
        num_qubits,
        gamma,
        k,
        n_odd_index,
        delta,
        period,
        t1,
        t1_mode,
        e_phi,
    })
}

/// `U(t₁+T) = U₁(t₁) · U(γ)` on the register.
pub fn composite_cluster_unitary(schedule: &GateSchedule) -> Result<LinearOperator> {
    let layer = single_qubit_layer(schedule.num_qubits, schedule.e_phi, schedule.t1)?;
    let gate = ideal_collective_gate(schedule.num_qubits, schedule.gamma)?;
    layer.compose(&gate)
}
