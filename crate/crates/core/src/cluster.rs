//! Cluster-state targets, end-to-end generation and σz measurements.
//!
//! Qubit `i` of the 1-based product convention is qubit `i − 1` here. With
//! `|∓⟩ = (|0⟩ ± |1⟩)/√2`, `σx|−⟩ = +|−⟩` and `σx|+⟩ = −|+⟩`; the target is a
//! complete-graph state written in the `σx` eigenbasis.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{cluster_phase_operator, composite_cluster_unitary, rotation_layer, GateSchedule};
use crate::linalg::{c, CMatrix, CVector, ZERO};
use crate::model::{flux_sweep_angle, LabFrameHamiltonian, LambDickeHamiltonian, SystemParams};
use crate::open_system::thermal_weights;
use crate::operator::{embed_qubit_operator, pauli, LinearOperator, TruncationPolicy};
use crate::propagator::{closed_form_propagator_with, integrate_separable_block, IntegratorConfig};
use crate::space::{HilbertSpace, Subsystem};
use crate::state::{apply, fidelity, partial_trace, DensityOperator, StateRef, StateVector};

/// `⊗|0⟩`, equal to `⊗(|−⟩ + |+⟩)/√2`.
pub fn initial_product_state(num_qubits: usize) -> Result<StateVector> {
    StateVector::basis(HilbertSpace::qubits(num_qubits)?, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// The exponentiated composite operator applied to `⊗|0⟩`.
    Composite,
    /// The operator-valued tensor product expanded factor by factor.
    Literal,
}

#[derive(Clone, Debug)]
pub struct ClusterTarget {
    pub num_qubits: usize,
    pub state: StateVector,
    pub construction: Construction,
}

/// Odd index `n` with `γ = (2n+1)π/8`, if `γ` has that form.
pub fn odd_index_of(gamma: f64) -> Option<u32> {
    let x = (8.0 * gamma / PI - 1.0) / 2.0;
    let n = x.round();
    ((x - n).abs() < 1e-9 && n >= 0.0).then_some(n as u32)
}

pub fn cluster_target(num_qubits: usize, gamma: f64, construction: Construction) -> Result<ClusterTarget> {
    if odd_index_of(gamma).is_none() {
        return Err(Error::Domain(format!("γ = {gamma} is not of the form (2n+1)π/8")));
    }
    let state = match construction {
        Construction::Composite => {
            let u = cluster_phase_operator(num_qubits, gamma)?;
            apply(&u, &initial_product_state(num_qubits)?)?
        }
        Construction::Literal => literal_cluster(num_qubits)?,
    };
    Ok(ClusterTarget { num_qubits, state, construction })
}

// |−⟩ and |+⟩ in the computational basis
fn x_minus() -> CVector {
    CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)])
}

fn x_plus() -> CVector {
    CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)])
}

/// Builds `2^{−N/2} ⊗_i (|−⟩_i (−1)^{N−i} ∏_{j>i} σx_j + |+⟩_i)` from the last
/// factor backwards: each factor's operator acts on the ket of the factors
/// to its right.
fn literal_cluster(num_qubits: usize) -> Result<StateVector> {
    if num_qubits == 0 {
        return Err(Error::Range("need at least one qubit".into()));
    }
    // the last factor has an empty product
    let mut tail = (x_minus() + x_plus()) * c(FRAC_1_SQRT_2, 0.0);
    for i in (0..num_qubits - 1).rev() {
        let rest = num_qubits - 1 - i;
        let rest_space = HilbertSpace::qubits(rest)?;
        let mut flipped = tail.clone();
        for j in 0..rest {
            flipped = embed_qubit_operator(rest_space, j, &pauli::x())?.matrix() * flipped;
        }
        let sign = if rest.is_multiple_of(2) { 1.0 } else { -1.0 };
        // qubit i is the least significant factor of the new ket
        let with_minus = (flipped * c(sign, 0.0)).kronecker(&x_minus());
        let with_plus = tail.kronecker(&x_plus());
        tail = (with_minus + with_plus) * c(FRAC_1_SQRT_2, 0.0);
    }
    StateVector::new(HilbertSpace::qubits(num_qubits)?, tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Ideal composite unitary on the register.
    Ideal,
    /// Closed-form interaction-picture propagator with a cavity.
    ClosedForm,
    /// Numerical integration of the Lamb–Dicke Hamiltonian.
    LambDicke,
    /// Numerical integration of the lab-frame Hamiltonian.
    LabFrame,
}

impl std::str::FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Tier::Ideal),
            "closed_form" => Ok(Tier::ClosedForm),
            "lamb_dicke" => Ok(Tier::LambDicke),
            "lab_frame" => Ok(Tier::LabFrame),
            other => Err(Error::InvalidParameter(format!("unknown tier '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CavityInit {
    Fock(usize),
    Thermal(f64),
}

/// Final register state.
#[derive(Clone, Debug)]
pub enum QubitState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl QubitState {
    pub fn as_ref(&self) -> StateRef<'_> {
        match self {
            QubitState::Pure(s) => StateRef::Pure(s),
            QubitState::Mixed(r) => StateRef::Mixed(r),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            QubitState::Pure(s) => s.to_density(),
            QubitState::Mixed(r) => r.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClusterOutcome {
    pub state: QubitState,
    pub fidelity: f64,
}

/// Numerical and truncation settings for [`generate_cluster_with`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GenerateOptions {
    /// Overrides the tier's default integrator.
    pub integrator: Option<IntegratorConfig>,
    pub policy: TruncationPolicy,
    /// Thermal components with smaller weight are skipped.
    pub weight_floor: f64,
}

pub fn generate_cluster(sp: &SystemParams, schedule: &GateSchedule, tier: Tier, init: CavityInit) -> Result<ClusterOutcome> {
    generate_cluster_with(sp, schedule, tier, init, &GenerateOptions::default())
}

/// Parameters of the coupled stage: the schedule's detuning and qubit count.
pub(crate) fn stage_params(sp: &SystemParams, schedule: &GateSchedule) -> SystemParams {
    let mut p = sp.with_detuning(schedule.delta).with_num_qubits(schedule.num_qubits);
    p.qubit.gate_charge = 0.5;
    p
}

/// Fock components `(weight, n)` of the initial cavity state.
pub(crate) fn cavity_components(init: CavityInit, n_max: usize, floor: f64) -> Result<Vec<(f64, usize)>> {
    match init {
        CavityInit::Fock(n) => {
            if n > n_max {
                return Err(Error::Range(format!("Fock level {n} above cutoff {n_max}")));
            }
            Ok(vec![(1.0, n)])
        }
        CavityInit::Thermal(nbar) => Ok(thermal_weights(n_max, nbar)?
            .into_iter()
            .enumerate()
            .filter(|&(_, w)| w > floor)
            .map(|(n, w)| (w, n))
            .collect()),
    }
}

/// Single-qubit stage angle, with the lab-frame flux-sweep rotation removed.
fn stage_one_angle(sp: &SystemParams, schedule: &GateSchedule, tier: Tier) -> f64 {
    match tier {
        Tier::LabFrame => (schedule.single_qubit_angle() - flux_sweep_angle(sp, schedule.period)).rem_euclid(2.0 * PI),
        _ => schedule.single_qubit_angle(),
    }
}

/// Runs the single-qubit stage and then the coupled stage for every cavity
/// component, traces out the cavity and scores against the target.
pub fn generate_cluster_with(
    sp: &SystemParams,
    schedule: &GateSchedule,
    tier: Tier,
    init: CavityInit,
    opts: &GenerateOptions,
) -> Result<ClusterOutcome> {
    let n = schedule.num_qubits;
    let target = cluster_target(n, schedule.gamma, Construction::Composite)?;
    let psi0 = initial_product_state(n)?;
    if tier == Tier::Ideal {
        let out = apply(&composite_cluster_unitary(schedule)?, &psi0)?;
        let f = fidelity(&out, &target.state)?;
        return Ok(ClusterOutcome { state: QubitState::Pure(out), fidelity: f });
    }
    let p = stage_params(sp, schedule);
    let space = p.joint_space()?;
    let n_max = space.fock_cutoff().expect("joint space has a cavity");
    let layer = rotation_layer(n, stage_one_angle(&p, schedule, tier))?;
    let after_one = apply(&layer, &psi0)?;

    let comps = cavity_components(init, n_max, opts.weight_floor)?;
    let qd = space.qubit_dim();
    let mut block = CMatrix::zeros(space.dim(), comps.len());
    for (col, &(_, fock)) in comps.iter().enumerate() {
        for q in 0..qd {
            block[(fock * qd + q, col)] = after_one.amplitudes()[q];
        }
    }

    let evolved = match tier {
        Tier::ClosedForm => {
            let u = closed_form_propagator_with(&p, space, schedule.period, &opts.policy)?;
            u.matrix() * &block
        }
        Tier::LambDicke => {
            let ham = LambDickeHamiltonian::new(&p, space)?;
            let cfg = match opts.integrator {
                Some(cfg) => cfg,
                None => IntegratorConfig::lamb_dicke_default(&p)?,
            };
            integrate_separable_block(&ham, (0.0, schedule.period), &cfg, &block)?
        }
        Tier::LabFrame => {
            let ham = LabFrameHamiltonian::new(&p, space, &opts.policy)?;
            let cfg = match opts.integrator {
                Some(cfg) => cfg,
                None => IntegratorConfig::lab_frame_default(&p)?,
            };
            integrate_separable_block(&ham, (0.0, schedule.period), &cfg, &block)?
        }
        Tier::Ideal => unreachable!("handled above"),
    };

    let keep: Vec<Subsystem> = (0..n).map(Subsystem::Qubit).collect();
    let total: f64 = comps.iter().map(|&(w, _)| w).sum();
    let mut rho = CMatrix::zeros(qd, qd);
    let mut leak = 0.0;
    for (col, &(w, _)) in comps.iter().enumerate() {
        let v = CVector::from_column_slice(evolved.column(col).as_slice());
        leak += w / total
            * (n_max.saturating_sub(1)..=n_max)
                .flat_map(|f| (0..qd).map(move |q| f * qd + q))
                .map(|i| v[i].norm_sqr())
                .sum::<f64>();
        let psi = StateVector::normalized(space, v)?;
        rho += partial_trace(&psi, &keep)?.into_matrix() * c(w, 0.0);
    }
    opts.policy.check(leak, n_max)?;
    let rho = DensityOperator::new(HilbertSpace::qubits(n)?, rho * c(1.0 / total, 0.0))?;
    let f = fidelity(&rho, &target.state)?;
    Ok(ClusterOutcome { state: QubitState::Mixed(rho), fidelity: f })
}

/// σz-basis measurement of one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub qubit: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    pub probability: f64,
    /// `None` only for a branch of zero probability.
    pub post_state: Option<StateVector>,
}

fn project(state: &StateVector, qubit: usize, outcome: u8) -> Result<(f64, Option<StateVector>)> {
    let space = state.space();
    if qubit >= space.num_qubits() {
        return Err(Error::Range(format!("qubit {qubit} outside 0..{}", space.num_qubits())));
    }
    let qd = space.qubit_dim();
    let mut v = state.amplitudes().clone();
    for (i, z) in v.iter_mut().enumerate() {
        if (((i % qd) >> qubit) & 1) as u8 != outcome {
            *z = ZERO;
        }
    }
    let p = v.norm_squared() / state.norm().powi(2);
    if p <= 1e-300 {
        return Ok((0.0, None));
    }
    Ok((p, Some(StateVector::normalized(space, v)?)))
}

/// Both σz outcomes with their exact probabilities and post-measurement states.
pub fn measurement_branches(state: &StateVector, qubit: usize) -> Result<[MeasurementRecord; 2]> {
    let mk = |outcome: u8| -> Result<MeasurementRecord> {
        let (probability, post_state) = project(state, qubit, outcome)?;
        Ok(MeasurementRecord { qubit, outcome, probability, post_state })
    };
    Ok([mk(0)?, mk(1)?])
}

/// Samples one outcome with a generator seeded from `spec.seed`.
pub fn measure_qubit(state: &StateVector, spec: &MeasurementSpec) -> Result<MeasurementRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    measure_with(state, spec.qubit, &mut rng)
}

fn measure_with(state: &StateVector, qubit: usize, rng: &mut impl Rng) -> Result<MeasurementRecord> {
    let [zero, one] = measurement_branches(state, qubit)?;
    let u: f64 = rng.random();
    Ok(if u < zero.probability { zero } else { one })
}

/// Measures `qubits` in order, drawing every outcome from one seeded stream.
pub fn measure_sequence(state: &StateVector, qubits: &[usize], seed: u64) -> Result<Vec<MeasurementRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = state.clone();
    let mut records = Vec::with_capacity(qubits.len());
    for &q in qubits {
        let rec = measure_with(&current, q, &mut rng)?;
        current = rec.post_state.clone().expect("sampled branch has positive probability");
        records.push(rec);
    }
    Ok(records)
}

/// `Tr ρ_q²` of one qubit's reduced state.
pub fn reduced_purity<'a>(state: impl Into<StateRef<'a>>, qubit: usize) -> Result<f64> {
    Ok(partial_trace(state, &[Subsystem::Qubit(qubit)])?.purity())
}

/// `⊗|−⟩` on N qubits.
pub fn all_minus(num_qubits: usize) -> Result<StateVector> {
    let mut v = CVector::from_element(1, c(1.0, 0.0));
    for _ in 0..num_qubits {
        v = x_minus().kronecker(&v);
    }
    StateVector::new(HilbertSpace::qubits(num_qubits)?, v)
}

/// Register operator applied to the joint space, for callers holding
/// qubit-only gates.
pub fn lift(op: &LinearOperator, space: HilbertSpace) -> Result<LinearOperator> {
    if space.has_cavity() {
        op.extend_to(space)
    } else {
        Ok(op.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{solve_schedule, T1Mode};
    use crate::linalg::max_abs;

    #[test]
    fn initial_state_examples() {
        let s = initial_product_state(1).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert_eq!(s.amplitudes()[1], ZERO);
        for n in 1..=4 {
            let s = initial_product_state(n).unwrap();
            let ov = s.inner(&all_minus(n).unwrap()).unwrap().norm();
            assert!((ov - 2f64.powf(-(n as f64) / 2.0)).abs() < 1e-14);
            assert!((s.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_qubit_target_in_x_basis() {
        let t = cluster_target(2, PI / 8.0, Construction::Composite).unwrap();
        // (−|−−⟩ + |−+⟩ + |+−⟩ + |++⟩)/2
        let (m, p) = (x_minus(), x_plus());
        let expect = (m.kronecker(&m) * c(-1.0, 0.0) + m.kronecker(&p) + p.kronecker(&m) + p.kronecker(&p)) * c(0.5, 0.0);
        let expect = StateVector::new(HilbertSpace::qubits(2).unwrap(), expect).unwrap();
        assert!(fidelity(&t.state, &expect).unwrap() > 1.0 - 1e-12);
        let lit = cluster_target(2, PI / 8.0, Construction::Literal).unwrap();
        assert!(fidelity(&lit.state, &expect).unwrap() > 1.0 - 1e-12);
        for q in 0..2 {
            let r = partial_trace(&t.state, &[Subsystem::Qubit(q)]).unwrap();
            assert!(max_abs(&(r.matrix() - CMatrix::identity(2, 2) * c(0.5, 0.0))) < 1e-12);
        }
    }

    #[test]
    fn constructions_agree() {
        for n in 2..=5 {
            for k in [0u32, 1, 3] {
                let g = (2 * k + 1) as f64 * PI / 8.0;
                let a = cluster_target(n, g, Construction::Composite).unwrap();
                let b = cluster_target(n, g, Construction::Literal).unwrap();
                assert!(fidelity(&a.state, &b.state).unwrap() > 1.0 - 1e-10, "N={n}");
            }
        }
    }

    #[test]
    fn target_rejects_other_angles() {
        assert!(matches!(cluster_target(2, 0.3, Construction::Composite), Err(Error::Domain(_))));
        assert_eq!(odd_index_of(3.0 * PI / 8.0), Some(1));
        assert_eq!(odd_index_of(-PI / 8.0), None);
    }

    #[test]
    fn cluster_reduced_states_are_maximally_mixed() {
        let t = cluster_target(3, PI / 8.0, Construction::Composite).unwrap();
        for q in 0..3 {
            assert!((reduced_purity(&t.state, q).unwrap() - 0.5).abs() < 1e-12);
        }
        assert!((reduced_purity(&initial_product_state(3).unwrap(), 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn measurement_examples() {
        let plus = StateVector::new(HilbertSpace::qubits(1).unwrap(), x_plus()).unwrap();
        let [a, b] = measurement_branches(&plus, 0).unwrap();
        assert!((a.probability - 0.5).abs() < 1e-15 && (b.probability - 0.5).abs() < 1e-15);

        let s = HilbertSpace::qubits(2).unwrap();
        let mut v = CVector::zeros(4);
        v[0] = c(FRAC_1_SQRT_2, 0.0);
        v[3] = c(FRAC_1_SQRT_2, 0.0);
        let epr = StateVector::new(s, v).unwrap();
        for seed in 0..20 {
            let rec = measure_sequence(&epr, &[0, 1], seed).unwrap();
            assert_eq!(rec[0].outcome, rec[1].outcome);
            assert!((rec[1].probability - 1.0).abs() < 1e-12);
        }

        let t = cluster_target(3, PI / 8.0, Construction::Composite).unwrap();
        for rec in measurement_branches(&t.state, 0).unwrap() {
            let post = rec.post_state.unwrap();
            assert!(reduced_purity(&post, 1).unwrap() < 1.0 - 1e-6);
            // collapsing again is idempotent
            let [again, _] = measurement_branches(&post, 0).unwrap();
            let again = if rec.outcome == 0 { again } else { measurement_branches(&post, 0).unwrap()[1].clone() };
            assert!((again.probability - 1.0).abs() < 1e-12);
            assert!(fidelity(again.post_state.as_ref().unwrap(), &post).unwrap() > 1.0 - 1e-14);
        }
    }

    #[test]
    fn seeded_measurement_is_reproducible() {
        let t = cluster_target(3, PI / 8.0, Construction::Composite).unwrap();
        let spec = MeasurementSpec { qubit: 2, seed: 42 };
        let a = measure_qubit(&t.state, &spec).unwrap();
        let b = measure_qubit(&t.state, &spec).unwrap();
        assert_eq!(a.outcome, b.outcome);
    }

    fn sched(n: usize, n_max: usize) -> (SystemParams, GateSchedule) {
        let sp = SystemParams::paper_defaults().with_num_qubits(n).with_n_max(n_max);
        let s = solve_schedule(&sp, n, 1, 0, T1Mode::Corrected).unwrap();
        (sp, s)
    }

    #[test]
    fn ideal_and_closed_form_tiers() {
        let (sp, s) = sched(3, 20);
        let out = generate_cluster(&sp, &s, Tier::Ideal, CavityInit::Fock(0)).unwrap();
        assert!(out.fidelity > 1.0 - 1e-10);
        let (sp, s) = sched(2, 20);
        let out = generate_cluster(&sp, &s, Tier::ClosedForm, CavityInit::Fock(0)).unwrap();
        assert!(out.fidelity > 1.0 - 1e-8);
        let paper = solve_schedule(&sp, 2, 1, 0, T1Mode::Paper).unwrap();
        let out = generate_cluster(&sp, &paper, Tier::Ideal, CavityInit::Fock(0)).unwrap();
        assert!(out.fidelity < 0.99);
    }

    #[test]
    fn lamb_dicke_tier_is_fock_independent() {
        let (sp, s) = sched(2, 20);
        let f0 = generate_cluster(&sp, &s, Tier::LambDicke, CavityInit::Fock(0)).unwrap().fidelity;
        let f2 = generate_cluster(&sp, &s, Tier::LambDicke, CavityInit::Fock(2)).unwrap().fidelity;
        assert!(f0 > 1.0 - 1e-6);
        assert!((f0 - f2).abs() < 1e-6);
    }
}
