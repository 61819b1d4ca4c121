//! Physical parameters and Hamiltonian builders.
//!
//! Three descriptions of the same device are provided:
//!
//! * the single charge qubit at fixed flux, `−E_ce σz − E(Φ) σx`;
//! * the lab-frame coupled system with the cavity displacement factor kept
//!   exactly, [`LabFrameHamiltonian`];
//! * the first-order Lamb–Dicke, rotating-wave interaction Hamiltonian in the
//!   frame of the free cavity, [`LambDickeHamiltonian`].
//!
//! The coupled stages assume the qubits sit at their degeneracy point
//! `n̄ = 1/2`, where the charging term vanishes.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::operator::{
    cavity_displacement, coherent_leak, collective_jx, embed_cavity_operator, ladder, pauli, LinearOperator, Structure, TruncationPolicy,
};
use crate::propagator::SeparableHamiltonian;
use crate::space::HilbertSpace;
use crate::sparse::CsrMatrix;

/// Relative cutoff when converting the fixed Hamiltonian parts to sparse form.
const SPARSE_DROP: f64 = 1e-15;
use crate::units::{uev_to_rad_per_ns, Dimension, QuantityField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Charging energy (rad/ns).
    pub e_c: f64,
    /// Josephson energy (rad/ns).
    pub e_j: f64,
    /// Induced gate charge n̄, in `[0, 1]`.
    pub gate_charge: f64,
    /// Static flux for the single-qubit stage, as Φ/φ₀.
    pub flux: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Cavity angular frequency (rad/ns).
    pub omega_c: f64,
    /// Dimensionless junction–cavity coupling.
    pub g: f64,
    pub n_max: usize,
}

/// Flux-drive frequency and detuning; `delta = omega_c − omega` always.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    omega: f64,
    delta: f64,
}

impl DriveParams {
    pub fn from_detuning(omega_c: f64, delta: f64) -> Self {
        Self { omega: omega_c - delta, delta }
    }

    pub fn from_frequency(omega_c: f64, omega: f64) -> Self {
        Self { omega, delta: omega_c - omega }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub num_qubits: usize,
    pub qubit: QubitParams,
    pub cavity: CavityParams,
    pub drive: DriveParams,
}

impl SystemParams {
    /// Device numbers from the feasibility estimate: E_J = 40 μeV, g = 10⁻²,
    /// ω_c = 30 rad/ns, two qubits, δ set for k = 1, n = 0.
    ///
    /// E_c is not quoted there; 400 μeV keeps the charging regime E_c ≫ E_J.
    pub fn paper_defaults() -> Self {
        let e_j = uev_to_rad_per_ns(40.0);
        let g = 1e-2;
        let omega_c = 30.0;
        Self {
            num_qubits: 2,
            qubit: QubitParams {
                e_c: uev_to_rad_per_ns(400.0),
                e_j,
                gate_charge: 0.5,
                flux: 0.0,
            },
            cavity: CavityParams { omega_c, g, n_max: 25 },
            drive: DriveParams::from_detuning(omega_c, g * e_j),
        }
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.drive = DriveParams::from_detuning(self.cavity.omega_c, delta);
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.cavity.g = g;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.cavity.n_max = n_max;
        self
    }

    pub fn with_num_qubits(mut self, n: usize) -> Self {
        self.num_qubits = n;
        self
    }

    pub fn qubit_space(&self) -> Result<HilbertSpace> {
        HilbertSpace::qubits(self.num_qubits)
    }

    pub fn joint_space(&self) -> Result<HilbertSpace> {
        HilbertSpace::with_cavity(self.num_qubits, self.cavity.n_max)
    }

    /// Hard checks; returns the list of advisory warnings that passed through.
    pub fn validate(&self) -> Result<Vec<String>> {
        let q = &self.qubit;
        let cav = &self.cavity;
        if !(q.e_c > 0.0 && q.e_j > 0.0) {
            return Err(Error::InvalidParameter("E_c and E_J must be positive".into()));
        }
        if !(0.0..=1.0).contains(&q.gate_charge) {
            return Err(Error::InvalidParameter("gate charge must lie in [0, 1]".into()));
        }
        if !(cav.omega_c > 0.0) || !(cav.g > 0.0) {
            return Err(Error::InvalidParameter("omega_c and g must be positive".into()));
        }
        if self.num_qubits == 0 {
            return Err(Error::InvalidParameter("need at least one qubit".into()));
        }
        let mut notes = Vec::new();
        if q.e_c < 5.0 * q.e_j {
            notes.push(format!(
                "E_c = {:.3} is not much larger than E_J = {:.3}; charging regime is marginal",
                q.e_c, q.e_j
            ));
        }
        if cav.g > 0.1 {
            notes.push(format!("g = {} is outside the Lamb-Dicke regime", cav.g));
        }
        if self.drive.delta.abs() > 0.1 * self.drive.omega.abs() {
            notes.push(format!(
                "detuning {:.3} is not small against the drive frequency {:.3}",
                self.drive.delta, self.drive.omega
            ));
        }
        for n in &notes {
            warn!("{n}");
        }
        Ok(notes)
    }
}

/// `E(Φ) = E_J cos(πΦ/φ₀)`.
pub fn josephson_energy(qp: &QubitParams) -> f64 {
    qp.e_j * (PI * qp.flux).cos()
}

/// `H = −2E_c(1−2n̄) σz − E(Φ) σx` on one qubit.
pub fn single_qubit_hamiltonian(qp: &QubitParams) -> LinearOperator {
    let e_ce = 2.0 * qp.e_c * (1.0 - 2.0 * qp.gate_charge);
    let m = pauli::z() * c(-e_ce, 0.0) - pauli::x() * c(josephson_energy(qp), 0.0);
    let space = HilbertSpace::qubits(1).expect("one qubit");
    LinearOperator::new(space, m, Structure::Hermitian).expect("2x2")
}

fn require_degeneracy(sp: &SystemParams) -> Result<()> {
    if (sp.qubit.gate_charge - 0.5).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "coupled stage needs the degeneracy point n̄ = 1/2, got {}",
            sp.qubit.gate_charge
        )));
    }
    Ok(())
}

fn require_cavity(space: HilbertSpace, sp: &SystemParams) -> Result<usize> {
    let n_max = space
        .fock_cutoff()
        .ok_or_else(|| Error::Shape("coupled Hamiltonian needs a cavity".into()))?;
    if space.num_qubits() != sp.num_qubits {
        return Err(Error::Shape(format!(
            "space has {} qubits, parameters have {}",
            space.num_qubits(),
            sp.num_qubits
        )));
    }
    Ok(n_max)
}

/// Lab-frame Hamiltonian with the swept flux `πΦ/φ₀ = ωt`:
///
/// `H(t) = ω_c(a†a + 1/2) − (E_J/2) Jx ⊗ [D(−ig/2) e^{−iωt} + h.c.]`
///
/// i.e. each qubit sees `−E_J cos(ωt + (g/2)(a+a†)) σx`. At `g = 0` this is
/// the single-qubit term `−E(Φ(t)) σx` with the flux swept linearly; its first
/// order in `g` after the rotating-wave approximation in the free-cavity frame
/// is [`LambDickeHamiltonian`]. The constant parts are built once.
#[derive(Clone, Debug)]
pub struct LabFrameHamiltonian {
    space: HilbertSpace,
    omega: f64,
    free: CMatrix,
    coupling: CMatrix,
    leaked: f64,
    /// `[free, K, K†]` in sparse form.
    terms: Vec<CsrMatrix>,
}

impl LabFrameHamiltonian {
    pub fn new(sp: &SystemParams, space: HilbertSpace, policy: &TruncationPolicy) -> Result<Self> {
        require_degeneracy(sp)?;
        let n_max = require_cavity(space, sp)?;
        let alpha = c(0.0, -sp.cavity.g / 2.0);
        let leaked = coherent_leak(alpha.norm(), n_max);
        policy.check(leaked, n_max)?;
        let disp = embed_cavity_operator(space, &cavity_displacement(n_max, alpha))?;
        let jx = collective_jx(space)?;
        let coupling = jx.matrix() * disp.matrix() * c(-sp.qubit.e_j / 2.0, 0.0);
        let number = ladder::number(n_max) + linalg::identity(n_max + 1) * c(0.5, 0.0);
        let free = embed_cavity_operator(space, &(number * c(sp.cavity.omega_c, 0.0)))?.into_matrix();
        let terms = vec![
            CsrMatrix::from_dense(&free, SPARSE_DROP),
            CsrMatrix::from_dense(&coupling, SPARSE_DROP),
            CsrMatrix::from_dense(&coupling.adjoint(), SPARSE_DROP),
        ];
        Ok(Self {
            space,
            omega: sp.drive.omega(),
            free,
            coupling,
            leaked,
            terms,
        })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    /// Population leaked by the displacement factor on the vacuum.
    pub fn leaked(&self) -> f64 {
        self.leaked
    }

    pub fn at(&self, t: f64) -> LinearOperator {
        let ph = C64::from_polar(1.0, -self.omega * t);
        let k = &self.coupling * ph;
        let m = &self.free + &k + k.adjoint();
        LinearOperator::new(self.space, m, Structure::Hermitian).expect("built on this space")
    }
}

impl SeparableHamiltonian for LabFrameHamiltonian {
    fn space(&self) -> HilbertSpace {
        self.space
    }

    fn terms(&self) -> &[CsrMatrix] {
        &self.terms
    }

    fn coefficients(&self, t: f64) -> Vec<C64> {
        let ph = C64::from_polar(1.0, -self.omega * t);
        vec![c(1.0, 0.0), ph, ph.conj()]
    }
}

pub fn lab_frame_hamiltonian(sp: &SystemParams, space: HilbertSpace, t: f64) -> Result<LinearOperator> {
    Ok(LabFrameHamiltonian::new(sp, space, &TruncationPolicy::default())?.at(t))
}

/// Net single-qubit angle `θ` accumulated by the flux sweep over `[0, t]`:
/// the lab-frame propagator carries an extra `exp(iθ Jx)` with
/// `θ = (E_J/ω) sin(ωt)` relative to the interaction picture.
pub fn flux_sweep_angle(sp: &SystemParams, t: f64) -> f64 {
    let w = sp.drive.omega();
    sp.qubit.e_j / w * (w * t).sin()
}

/// `H_int(t) = (i g E_J / 4)(a† e^{iδt} − a e^{−iδt}) Jx`.
#[derive(Clone, Debug)]
pub struct LambDickeHamiltonian {
    space: HilbertSpace,
    delta: f64,
    raising: CMatrix,
    terms: Vec<CsrMatrix>,
}

impl LambDickeHamiltonian {
    pub fn new(sp: &SystemParams, space: HilbertSpace) -> Result<Self> {
        let n_max = require_cavity(space, sp)?;
        let jx = collective_jx(space)?;
        let adag = embed_cavity_operator(space, &ladder::creation(n_max))?;
        let coeff = c(0.0, sp.cavity.g * sp.qubit.e_j / 4.0);
        let raising = adag.matrix() * jx.matrix() * coeff;
        let terms = vec![
            CsrMatrix::from_dense(&raising, SPARSE_DROP),
            CsrMatrix::from_dense(&raising.adjoint(), SPARSE_DROP),
        ];
        Ok(Self { space, delta: sp.drive.delta(), raising, terms })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn at(&self, t: f64) -> LinearOperator {
        // (ic a† e^{iδt}) Jx + h.c.; the h.c. is −ic a e^{−iδt} Jx
        let k = &self.raising * C64::from_polar(1.0, self.delta * t);
        let m = &k + k.adjoint();
        LinearOperator::new(self.space, m, Structure::Hermitian).expect("built on this space")
    }
}

impl SeparableHamiltonian for LambDickeHamiltonian {
    fn space(&self) -> HilbertSpace {
        self.space
    }

    fn terms(&self) -> &[CsrMatrix] {
        &self.terms
    }

    fn coefficients(&self, t: f64) -> Vec<C64> {
        let ph = C64::from_polar(1.0, self.delta * t);
        vec![ph, ph.conj()]
    }
}

pub fn lamb_dicke_hamiltonian(sp: &SystemParams, space: HilbertSpace, t: f64) -> Result<LinearOperator> {
    Ok(LambDickeHamiltonian::new(sp, space)?.at(t))
}

/// `U₀(t) = exp(−i ω_c (a†a + 1/2) t)` on the cavity factor.
pub fn interaction_frame(space: HilbertSpace, omega_c: f64, t: f64) -> Result<LinearOperator> {
    let n_max = space
        .fock_cutoff()
        .ok_or_else(|| Error::Shape("interaction frame needs a cavity".into()))?;
    let diag = CMatrix::from_fn(n_max + 1, n_max + 1, |i, j| {
        if i == j {
            C64::from_polar(1.0, -omega_c * (i as f64 + 0.5) * t)
        } else {
            c(0.0, 0.0)
        }
    });
    Ok(embed_cavity_operator(space, &diag)?.with_structure(Structure::Unitary))
}

/// Transforms a lab-frame propagator into the free-cavity frame:
/// `U_I(t) = U₀(t)† U_lab(t)`.
pub fn to_interaction_picture(u_lab: &LinearOperator, omega_c: f64, t: f64) -> Result<LinearOperator> {
    interaction_frame(u_lab.space(), omega_c, t)?.adjoint().compose(u_lab)
}

/// Flat parameter file with explicit unit tags.
///
/// ```json
/// {
///   "N": 2,
///   "E_c": {"value": 400, "unit": "ueV"},
///   "E_J": {"value": 40, "unit": "ueV"},
///   "gate_charge": 0.5,
///   "flux": 0.0,
///   "g": 0.01,
///   "omega_c": {"value": 30, "unit": "rad/ns"},
///   "n_max": 25,
///   "k": 1,
///   "n": 0
/// }
/// ```
///
/// Every field is optional and falls back to [`SystemParams::paper_defaults`]
/// (and, for the open-system fields, [`crate::open_system::NoiseParams::paper_defaults`]).
/// Bare numbers are read in the canonical unit (rad/ns, ns, dimensionless).
/// `delta` or `omega` may be given to fix the drive; otherwise the detuning is
/// solved from `k` and `n`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub num_qubits: Option<usize>,
    #[serde(rename = "E_c", default, skip_serializing_if = "Option::is_none")]
    pub e_c: Option<QuantityField>,
    #[serde(rename = "E_J", default, skip_serializing_if = "Option::is_none")]
    pub e_j: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_charge: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub quality_factor: Option<QuantityField>,
    #[serde(rename = "T_d", default, skip_serializing_if = "Option::is_none")]
    pub qubit_t_d: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity_nbar: Option<QuantityField>,
    #[serde(rename = "Omega", default, skip_serializing_if = "Option::is_none")]
    pub vacuum_rabi: Option<QuantityField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_q: Option<QuantityField>,
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Sets one field from a `key=value` override such as `E_J=40ueV`. As in
    /// the file, a bare number is read in the canonical unit.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let quantity = || -> Result<QuantityField> {
            match value.trim().parse::<f64>() {
                Ok(v) => Ok(QuantityField::Bare(v)),
                Err(_) => Ok(QuantityField::Tagged(value.parse()?)),
            }
        };
        let integer = || -> Result<u64> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("'{key}' needs an integer, got '{value}'")))
        };
        match key {
            "N" => self.num_qubits = Some(integer()? as usize),
            "n_max" => self.n_max = Some(integer()? as usize),
            "k" => self.k = Some(integer()? as u32),
            "n" => self.n = Some(integer()? as u32),
            "E_c" => self.e_c = Some(quantity()?),
            "E_J" => self.e_j = Some(quantity()?),
            "gate_charge" => self.gate_charge = Some(quantity()?),
            "flux" => self.flux = Some(quantity()?),
            "g" => self.g = Some(quantity()?),
            "omega_c" => self.omega_c = Some(quantity()?),
            "delta" => self.delta = Some(quantity()?),
            "omega" => self.omega = Some(quantity()?),
            "Q" => self.quality_factor = Some(quantity()?),
            "T_d" => self.qubit_t_d = Some(quantity()?),
            "cavity_nbar" => self.cavity_nbar = Some(quantity()?),
            "Omega" => self.vacuum_rabi = Some(quantity()?),
            "gamma_q" => self.gamma_q = Some(quantity()?),
            other => return Err(Error::InvalidParameter(format!("unknown parameter '{other}'"))),
        }
        Ok(())
    }

    /// Loop count and odd index for the schedule (defaults 1 and 0).
    pub fn loop_indices(&self) -> (u32, u32) {
        (self.k.unwrap_or(1), self.n.unwrap_or(0))
    }

    /// Resolves to system parameters. Without an explicit drive, the detuning
    /// comes from `δ = g E_J √(k/(2n+1))`.
    pub fn to_system(&self) -> Result<SystemParams> {
        let mut sp = SystemParams::paper_defaults();
        let f = |field: &Option<QuantityField>, dim: Dimension, default: f64| -> Result<f64> {
            field.as_ref().map_or(Ok(default), |q| q.canonical(dim))
        };
        if let Some(n) = self.num_qubits {
            sp.num_qubits = n;
        }
        if let Some(n) = self.n_max {
            sp.cavity.n_max = n;
        }
        sp.qubit.e_c = f(&self.e_c, Dimension::Frequency, sp.qubit.e_c)?;
        sp.qubit.e_j = f(&self.e_j, Dimension::Frequency, sp.qubit.e_j)?;
        sp.qubit.gate_charge = f(&self.gate_charge, Dimension::Dimensionless, sp.qubit.gate_charge)?;
        sp.qubit.flux = f(&self.flux, Dimension::Dimensionless, sp.qubit.flux)?;
        sp.cavity.g = f(&self.g, Dimension::Dimensionless, sp.cavity.g)?;
        sp.cavity.omega_c = f(&self.omega_c, Dimension::Frequency, sp.cavity.omega_c)?;
        let (k, n) = self.loop_indices();
        sp.drive = match (&self.delta, &self.omega) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "give either delta or omega, not both; one fixes the other".into(),
                ))
            }
            (Some(d), None) => DriveParams::from_detuning(sp.cavity.omega_c, d.canonical(Dimension::Frequency)?),
            (None, Some(w)) => DriveParams::from_frequency(sp.cavity.omega_c, w.canonical(Dimension::Frequency)?),
            (None, None) => DriveParams::from_detuning(
                sp.cavity.omega_c,
                crate::gates::detuning_for(sp.cavity.g, sp.qubit.e_j, k, n),
            ),
        };
        sp.validate()?;
        Ok(sp)
    }
}
