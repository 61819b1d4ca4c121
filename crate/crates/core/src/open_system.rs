//! Thermal cavity states, Lindblad evolution, thermal-insensitivity scans and
//! feasibility numbers.
//!
//! Master equation: `dρ/dt = −i[H,ρ] + Σ_j κ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})`.
//! Qubit dephasing is `L = σz` at `κ = 1/(2T_d)`, so coherences decay as
//! `e^{−t/T_d}`. Cavity loss is `L = a` at `κ = ω_c/Q`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{
    cavity_components, cluster_target, generate_cluster_with, initial_product_state, stage_params, CavityInit,
    Construction, GenerateOptions, Tier,
};
use crate::error::{Error, Result};
use crate::gates::{rotation_layer, solve_schedule, GateSchedule, T1Mode};
use crate::linalg::{self, c, CMatrix};
use crate::model::{LambDickeHamiltonian, ParamsFile, SystemParams};
use crate::operator::{embed_cavity_operator, embed_qubit_operator, ladder, pauli, LinearOperator};
use crate::space::{HilbertSpace, Subsystem};
use crate::sparse::CsrMatrix;
use crate::state::{apply, fidelity, partial_trace, DensityOperator};
use crate::units::Dimension;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Cavity quality factor.
    pub q: f64,
    /// Cavity decay rate `ω_c/Q` (rad/ns).
    pub kappa: f64,
    /// Qubit dephasing time (ns).
    pub qubit_t_d: f64,
    /// Thermal occupation of the cavity and its bath.
    pub cavity_nbar: f64,
    /// Qubit lifetime (ns) for the optional relaxation channel.
    pub gamma_q: Option<f64>,
}

impl NoiseParams {
    pub fn new(omega_c: f64, q: f64, qubit_t_d: f64, cavity_nbar: f64) -> Result<Self> {
        let n = Self { q, kappa: omega_c / q, qubit_t_d, cavity_nbar, gamma_q: None };
        n.validate()?;
        Ok(n)
    }

    /// `Q = 10⁶`, `T_d = 0.5 μs`, cold cavity, no relaxation.
    pub fn paper_defaults(omega_c: f64) -> Self {
        Self::new(omega_c, 1e6, 500.0, 0.0).expect("defaults are valid")
    }

    pub fn with_relaxation(mut self, gamma_q: f64) -> Self {
        self.gamma_q = Some(gamma_q);
        self
    }

    /// Cavity decay time `τ = Q/ω_c = 1/κ` (ns).
    pub fn tau(&self) -> f64 {
        1.0 / self.kappa
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.q > 0.0
            && self.kappa >= 0.0
            && self.qubit_t_d > 0.0
            && self.cavity_nbar >= 0.0
            && self.gamma_q.is_none_or(|g| g > 0.0);
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid noise parameters {self:?}")));
        }
        Ok(())
    }

    /// Reads `Q`, `T_d`, `cavity_nbar` and `gamma_q` from a parameter file.
    pub fn from_file(pf: &ParamsFile, omega_c: f64) -> Result<Self> {
        let d = Self::paper_defaults(omega_c);
        let get = |f: &Option<crate::units::QuantityField>, dim, default| -> Result<f64> {
            f.as_ref().map_or(Ok(default), |q| q.canonical(dim))
        };
        let mut n = Self::new(
            omega_c,
            get(&pf.quality_factor, Dimension::Dimensionless, d.q)?,
            get(&pf.qubit_t_d, Dimension::Time, d.qubit_t_d)?,
            get(&pf.cavity_nbar, Dimension::Dimensionless, d.cavity_nbar)?,
        )?;
        if let Some(g) = &pf.gamma_q {
            n.gamma_q = Some(g.canonical(Dimension::Time)?);
        }
        n.validate()?;
        Ok(n)
    }
}

/// Boltzmann weights `n̄ⁿ/(1+n̄)ⁿ⁺¹` on `0..=n_max`, renormalized. Fails if
/// the population beyond `n_max − 2` reaches `1e-8`.
pub fn thermal_weights(n_max: usize, nbar: f64) -> Result<Vec<f64>> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("thermal occupation must be ≥ 0, got {nbar}")));
    }
    if nbar == 0.0 {
        let mut w = vec![0.0; n_max + 1];
        w[0] = 1.0;
        return Ok(w);
    }
    let ratio = nbar / (1.0 + nbar);
    let tail = ratio.powi(n_max as i32 - 1);
    if tail >= 1e-8 {
        return Err(Error::Truncation {
            leaked: tail,
            threshold: 1e-8,
            level: n_max.saturating_sub(2),
            n_max,
        });
    }
    let raw: Vec<f64> = (0..=n_max).map(|n| ratio.powi(n as i32) / (1.0 + nbar)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// Thermal cavity state on the cavity-only space with `space`'s cutoff.
pub fn thermal_state(space: HilbertSpace, nbar: f64) -> Result<DensityOperator> {
    let n_max = space
        .fock_cutoff()
        .ok_or_else(|| Error::Shape("thermal state needs a cavity".into()))?;
    let w = thermal_weights(n_max, nbar)?;
    let m = CMatrix::from_fn(n_max + 1, n_max + 1, |i, j| if i == j { c(w[i], 0.0) } else { c(0.0, 0.0) });
    DensityOperator::new(HilbertSpace::cavity_only(n_max)?, m)
}

/// One collapse channel `√κ L`.
#[derive(Clone, Debug)]
pub struct Collapse {
    pub rate: f64,
    pub op: LinearOperator,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladConfig {
    /// Fixed RK4 step (ns).
    pub dt: f64,
    /// Steps between positivity checks; 0 disables them.
    pub positivity_every: usize,
    /// Allow runs beyond `N ≤ 3`, `n_max ≤ 15`.
    pub force: bool,
}

impl LindbladConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, positivity_every: 50, force: false }
    }
}

/// Size guard for dense master-equation runs.
pub const MAX_LINDBLAD_QUBITS: usize = 3;
pub const MAX_LINDBLAD_FOCK: usize = 15;

fn guard(space: HilbertSpace, force: bool) -> Result<()> {
    let n_max = space.fock_cutoff().unwrap_or(0);
    if !force && (space.num_qubits() > MAX_LINDBLAD_QUBITS || n_max > MAX_LINDBLAD_FOCK) {
        return Err(Error::TooLarge(format!(
            "master equation limited to N ≤ {MAX_LINDBLAD_QUBITS}, n_max ≤ {MAX_LINDBLAD_FOCK} \
             (got N = {}, n_max = {n_max}); pass force to override",
            space.num_qubits()
        )));
    }
    Ok(())
}

struct Dissipator {
    rate: f64,
    l: CsrMatrix,
    ldag_l: CsrMatrix,
}

fn adjoint_of(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

fn lindblad_rhs(h: &CsrMatrix, diss: &[Dissipator], rho: &CMatrix) -> CMatrix {
    let h_rho = h.mul_dense(rho);
    // −i(Hρ − ρH) with ρH = (Hρ)† for Hermitian ρ
    let mut out = (&h_rho - adjoint_of(&h_rho)) * c(0.0, -1.0);
    for d in diss {
        let l_rho = d.l.mul_dense(rho);
        let jump = d.l.mul_dense(&adjoint_of(&l_rho));
        let m_rho = d.ldag_l.mul_dense(rho);
        let anti = &m_rho + adjoint_of(&m_rho);
        out += (jump - anti * c(0.5, 0.0)) * c(d.rate, 0.0);
    }
    out
}

/// Fixed-step RK4 integration of the master equation.
pub fn lindblad_evolve<F>(
    h: F,
    collapse: &[Collapse],
    rho0: &DensityOperator,
    t_span: (f64, f64),
    cfg: &LindbladConfig,
) -> Result<DensityOperator>
where
    F: Fn(f64) -> LinearOperator,
{
    let space = rho0.space();
    guard(space, cfg.force)?;
    if !(cfg.dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let mut diss = Vec::with_capacity(collapse.len());
    for col in collapse {
        col.op.space().check_same(&space)?;
        if !(col.rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative rate {}", col.rate)));
        }
        if col.rate == 0.0 {
            continue;
        }
        let l = col.op.matrix();
        diss.push(Dissipator {
            rate: col.rate,
            l: CsrMatrix::from_dense(l, 1e-15),
            ldag_l: CsrMatrix::from_dense(&(l.adjoint() * l), 1e-15),
        });
    }
    let (t0, t1) = t_span;
    let steps = ((t1 - t0).abs() / cfg.dt).ceil().max(1.0) as usize;
    let dt = (t1 - t0) / steps as f64;
    let sparse_h = |t: f64| -> Result<CsrMatrix> {
        let op = h(t);
        op.space().check_same(&space)?;
        Ok(CsrMatrix::from_dense(op.matrix(), 1e-15))
    };
    let mut rho = rho0.matrix().clone();
    for i in 0..steps {
        let t = t0 + dt * i as f64;
        let h0 = sparse_h(t)?;
        let hm = sparse_h(t + 0.5 * dt)?;
        let h1 = sparse_h(t + dt)?;
        let k1 = lindblad_rhs(&h0, &diss, &rho);
        let k2 = lindblad_rhs(&hm, &diss, &(&rho + &k1 * c(0.5 * dt, 0.0)));
        let k3 = lindblad_rhs(&hm, &diss, &(&rho + &k2 * c(0.5 * dt, 0.0)));
        let k4 = lindblad_rhs(&h1, &diss, &(&rho + &k3 * c(dt, 0.0)));
        rho += (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
        // restore exact Hermiticity lost to roundoff
        rho = linalg::hermitian_part(&rho);
        if cfg.positivity_every > 0 && (i + 1) % cfg.positivity_every == 0 {
            let min = linalg::hermitian_eigenvalues(&rho)[0];
            if min < -1e-6 {
                return Err(Error::Integration(format!(
                    "density matrix lost positivity (λ_min = {min:.3e}) at t = {:.4}",
                    t + dt
                )));
            }
        }
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integration(format!("non-finite density matrix at t = {t}")));
        }
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::Integration(format!("trace drifted to {tr}")));
    }
    DensityOperator::new(space, rho)
}

/// Collapse channels for the joint space: cavity loss and thermal gain,
/// qubit dephasing, and optional relaxation into `|−⟩`, the ground state of
/// `−E(Φ)σx`.
pub fn collapse_operators(space: HilbertSpace, noise: &NoiseParams) -> Result<Vec<Collapse>> {
    let n_max = space
        .fock_cutoff()
        .ok_or_else(|| Error::Shape("collapse operators need a cavity".into()))?;
    let mut out = vec![Collapse {
        rate: noise.kappa * (noise.cavity_nbar + 1.0),
        op: embed_cavity_operator(space, &ladder::annihilation(n_max))?,
    }];
    if noise.cavity_nbar > 0.0 {
        out.push(Collapse {
            rate: noise.kappa * noise.cavity_nbar,
            op: embed_cavity_operator(space, &ladder::creation(n_max))?,
        });
    }
    for j in 0..space.num_qubits() {
        out.push(Collapse {
            rate: 1.0 / (2.0 * noise.qubit_t_d),
            op: embed_qubit_operator(space, j, &pauli::z())?,
        });
        if let Some(gq) = noise.gamma_q {
            // |−⟩⟨+| with |∓⟩ = (|0⟩ ± |1⟩)/√2
            let lower = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)]);
            out.push(Collapse { rate: 1.0 / (2.0 * gq), op: embed_qubit_operator(space, j, &lower)? });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct OpenOutcome {
    pub state: DensityOperator,
    pub fidelity: f64,
    /// `t_k/τ + N t_k/T_d`, a rough infidelity scale.
    pub infidelity_estimate: f64,
}

/// Cluster generation under the Lamb–Dicke Hamiltonian with noise, starting
/// from the thermal cavity state of `noise.cavity_nbar`. The picosecond
/// single-qubit stage is applied as an ideal rotation.
pub fn generate_cluster_open(
    sp: &SystemParams,
    schedule: &GateSchedule,
    noise: &NoiseParams,
    cfg: &LindbladConfig,
) -> Result<OpenOutcome> {
    noise.validate()?;
    let n = schedule.num_qubits;
    let p = stage_params(sp, schedule);
    let space = p.joint_space()?;
    guard(space, cfg.force)?;
    let psi1 = apply(&rotation_layer(n, schedule.single_qubit_angle())?, &initial_product_state(n)?)?;
    let cav = thermal_state(space, noise.cavity_nbar)?;
    let rho0 = DensityOperator::new(space, linalg::kron(cav.matrix(), psi1.to_density().matrix()))?;
    let ham = LambDickeHamiltonian::new(&p, space)?;
    let collapse = collapse_operators(space, noise)?;
    let rho = lindblad_evolve(|t| ham.at(t), &collapse, &rho0, (0.0, schedule.period), cfg)?;
    let keep: Vec<Subsystem> = (0..n).map(Subsystem::Qubit).collect();
    let reduced = partial_trace(&rho, &keep)?;
    let target = cluster_target(n, schedule.gamma, Construction::Composite)?;
    let f = fidelity(&reduced, &target.state)?;
    let t_k = schedule.total_time();
    Ok(OpenOutcome {
        state: reduced,
        fidelity: f,
        infidelity_estimate: t_k / noise.tau() + n as f64 * t_k / noise.qubit_t_d,
    })
}

/// Initial cavity states scanned for thermal insensitivity.
#[derive(Clone, Debug, PartialEq)]
pub enum ScanInputs {
    Fock(Vec<usize>),
    Thermal(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub label: String,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub tier: Tier,
    pub rows: Vec<ScanRow>,
    /// `max − min` fidelity over the rows.
    pub spread: f64,
}

impl ScanTable {
    /// Columns `label,fidelity`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,fidelity\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:.16e}", r.label, r.fidelity);
        }
        s
    }
}

/// Cluster fidelity for each initial cavity state; entries run in parallel.
pub fn thermal_insensitivity_scan(
    sp: &SystemParams,
    schedule: &GateSchedule,
    inputs: &ScanInputs,
    tier: Tier,
    opts: &GenerateOptions,
) -> Result<ScanTable> {
    let entries: Vec<(String, CavityInit)> = match inputs {
        ScanInputs::Fock(list) => list.iter().map(|&n| (format!("fock_{n}"), CavityInit::Fock(n))).collect(),
        ScanInputs::Thermal(list) => list.iter().map(|&x| (format!("nbar_{x}"), CavityInit::Thermal(x))).collect(),
    };
    if entries.is_empty() {
        return Err(Error::InvalidParameter("scan needs at least one entry".into()));
    }
    let n_max = sp.cavity.n_max;
    for (_, init) in &entries {
        cavity_components(*init, n_max, 0.0)?;
    }
    let rows = entries
        .par_iter()
        .map(|(label, init)| {
            generate_cluster_with(sp, schedule, tier, *init, opts).map(|o| ScanRow { label: label.clone(), fidelity: o.fidelity })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.fidelity), hi.max(r.fidelity)));
    Ok(ScanTable { tier, rows, spread: hi - lo })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Cavity decay time (μs).
    pub tau_us: f64,
    /// rad/ns.
    pub delta: f64,
    /// ns.
    pub period: f64,
    pub t1_paper: f64,
    pub t1_corrected: f64,
    /// `t₁ + T` with the corrected `t₁` (ns).
    pub t_k: f64,
    /// `Ω² τ γ_q`.
    pub strong_coupling_figure: f64,
    pub t_k_much_less_than_tau: bool,
    pub t_k_much_less_than_t_d: bool,
    pub figure_much_greater_than_one: bool,
}

/// "≪" and "≫" are read as a factor of ten.
pub const MUCH: f64 = 10.0;

/// Timescales for the schedule `(k, n)` on `sp.num_qubits` qubits. `omega_vac`
/// in rad/ns, `gamma_q` in ns.
pub fn feasibility_report(
    sp: &SystemParams,
    noise: &NoiseParams,
    omega_vac: f64,
    gamma_q: f64,
    k: u32,
    n: u32,
) -> Result<FeasibilityReport> {
    noise.validate()?;
    if !(omega_vac > 0.0 && gamma_q > 0.0) {
        return Err(Error::InvalidParameter("Ω and gamma_q must be positive".into()));
    }
    let paper = solve_schedule(sp, sp.num_qubits, k, n, T1Mode::Paper)?;
    let corrected = solve_schedule(sp, sp.num_qubits, k, n, T1Mode::Corrected)?;
    let tau = noise.q / sp.cavity.omega_c;
    let t_k = corrected.t1 + corrected.period;
    let figure = omega_vac * omega_vac * tau * gamma_q;
    Ok(FeasibilityReport {
        tau_us: tau / 1000.0,
        delta: paper.delta,
        period: paper.period,
        t1_paper: paper.t1,
        t1_corrected: corrected.t1,
        t_k,
        strong_coupling_figure: figure,
        t_k_much_less_than_tau: MUCH * t_k < tau,
        t_k_much_less_than_t_d: MUCH * t_k < noise.qubit_t_d,
        figure_much_greater_than_one: figure > MUCH,
    })
}

/// Loop period `2kπ/δ` helper for callers without a schedule.
pub fn loop_period(delta: f64, k: u32) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::SingularDetuning);
    }
    Ok(2.0 * PI * k as f64 / delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Structure;
    use crate::propagator::{integrate_unitary, IntegratorConfig, Method};
    use crate::state::StateVector;

    #[test]
    fn thermal_examples() {
        let s = HilbertSpace::with_cavity(1, 40).unwrap();
        let vac = thermal_state(s, 0.0).unwrap();
        assert_eq!(vac.matrix()[(0, 0)], c(1.0, 0.0));
        assert!((vac.purity() - 1.0).abs() < 1e-15);
        let th = thermal_state(s, 1.0).unwrap();
        let num = ladder::number(40);
        let mean = (num * th.matrix()).trace().re;
        // geometric series Σ n 2^{−n−1} truncated at 40, renormalized
        let w: Vec<f64> = (0..=40).map(|n| 0.5f64.powi(n + 1)).collect();
        let z: f64 = w.iter().sum();
        let want: f64 = w.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / z;
        assert!((mean - want).abs() < 1e-12 && (mean - 1.0).abs() < 1e-9);
        assert!(th.purity() < 1.0);
        assert!(matches!(thermal_state(HilbertSpace::with_cavity(1, 10).unwrap(), 2.0), Err(Error::Truncation { .. })));
    }

    #[test]
    fn zero_rate_lindblad_matches_unitary() {
        let sp = SystemParams::paper_defaults().with_n_max(8);
        let space = sp.joint_space().unwrap();
        let ham = LambDickeHamiltonian::new(&sp, space).unwrap();
        let t = 3.0;
        let psi = StateVector::basis(space, 6).unwrap();
        let rho = lindblad_evolve(|s| ham.at(s), &[], &psi.to_density(), (0.0, t), &LindbladConfig::new(t / 300.0)).unwrap();
        let u = integrate_unitary(|s| ham.at(s), space, (0.0, t), &IntegratorConfig::new(Method::CommutatorFree4, t / 300.0)).unwrap();
        let out = apply(&u, &psi).unwrap();
        assert!(fidelity(&out, &rho).unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn cavity_decay_from_one_photon() {
        let space = HilbertSpace::with_cavity(1, 4).unwrap();
        let kappa = 0.3;
        let a = embed_cavity_operator(space, &ladder::annihilation(4)).unwrap();
        let zero = LinearOperator::zeros(space).with_structure(Structure::Hermitian);
        let psi = StateVector::basis(space, 2).unwrap();
        let t = 2.0;
        let rho = lindblad_evolve(|_| zero.clone(), &[Collapse { rate: kappa, op: a }], &psi.to_density(), (0.0, t), &LindbladConfig::new(0.01)).unwrap();
        let p1 = rho.matrix()[(2, 2)].re;
        assert!((p1 - (-kappa * t).exp()).abs() < 1e-6);
    }

    #[test]
    fn dephasing_decays_coherence_at_one_over_t_d() {
        let space = HilbertSpace::with_cavity(1, 1).unwrap();
        let noise = NoiseParams::new(30.0, 1e30, 4.0, 0.0).unwrap();
        let zero = LinearOperator::zeros(space);
        let plus = StateVector::normalized(space, crate::linalg::CVector::from_fn(4, |i, _| if i < 2 { c(1.0, 0.0) } else { c(0.0, 0.0) })).unwrap();
        let ops = collapse_operators(space, &noise).unwrap();
        let rho = lindblad_evolve(|_| zero.clone(), &ops, &plus.to_density(), (0.0, 2.0), &LindbladConfig::new(0.01)).unwrap();
        assert!((rho.matrix()[(0, 1)].re - 0.5 * (-0.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn guard_refuses_large_runs() {
        let sp = SystemParams::paper_defaults().with_num_qubits(4).with_n_max(4);
        let space = sp.joint_space().unwrap();
        let rho = StateVector::basis(space, 0).unwrap().to_density();
        let zero = LinearOperator::zeros(space);
        assert!(matches!(
            lindblad_evolve(|_| zero.clone(), &[], &rho, (0.0, 1.0), &LindbladConfig::new(0.1)),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn feasibility_numbers() {
        let sp = SystemParams::paper_defaults();
        let noise = NoiseParams::paper_defaults(sp.cavity.omega_c);
        let r = feasibility_report(&sp, &noise, 0.015, 2000.0, 1, 0).unwrap();
        assert!((r.tau_us - 33.3).abs() < 0.5);
        assert!((r.t_k - 10.3).abs() < 0.3);
        assert!((r.strong_coupling_figure / 1.5e4 - 1.0).abs() < 0.2);
        assert!(r.t_k_much_less_than_tau && r.figure_much_greater_than_one);
        assert!(r.t_k_much_less_than_t_d);
        assert!((noise.kappa * noise.q - sp.cavity.omega_c).abs() < 1e-12);
    }

    #[test]
    fn scan_vacuum_entry_matches_pipeline() {
        let sp = SystemParams::paper_defaults().with_n_max(22);
        let s = solve_schedule(&sp, 2, 1, 0, T1Mode::Corrected).unwrap();
        let opts = GenerateOptions::default();
        let table = thermal_insensitivity_scan(&sp, &s, &ScanInputs::Thermal(vec![0.0, 0.3]), Tier::LambDicke, &opts).unwrap();
        let direct = generate_cluster_with(&sp, &s, Tier::LambDicke, CavityInit::Fock(0), &opts).unwrap();
        assert!((table.rows[0].fidelity - direct.fidelity).abs() < 1e-10);
        assert!(table.spread < 1e-6);
        assert!(table.to_csv().starts_with("label,fidelity\n"));
    }
}
