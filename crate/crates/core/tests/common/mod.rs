//! Property checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use cavgate::gates::{composite_cluster_unitary, detuning_for, ideal_collective_gate, solve_schedule, T1Mode};
use cavgate::linalg::{c, CVector};
use cavgate::model::{LabFrameHamiltonian, LambDickeHamiltonian, SystemParams};
use cavgate::open_system::{lindblad_evolve, thermal_state, LindbladConfig};
use cavgate::operator::TruncationPolicy;
use cavgate::propagator::{integrate_separable_unitary, IntegratorConfig, Method};
use cavgate::space::{HilbertSpace, Subsystem};
use cavgate::state::{apply, fidelity, partial_trace, StateVector};
use proptest::prelude::*;

/// One randomized parameter draw.
#[derive(Clone, Debug)]
pub struct Draw {
    pub g: f64,
    pub e_j: f64,
    pub k: u32,
    pub n: u32,
    pub num_qubits: usize,
    pub n_max: usize,
    /// Evaluation time as a fraction of the loop period.
    pub frac: f64,
    pub gamma: f64,
    pub nbar: f64,
    /// Raw amplitudes; the first `dim` pairs make the random state.
    pub amps: Vec<(f64, f64)>,
}

pub fn draws() -> impl Strategy<Value = Draw> {
    (
        (0.002f64..0.02, 0.02f64..0.12, 1u32..=2, 0u32..=1),
        (1usize..=3, 3usize..=8, 0.0f64..1.0, -PI..PI, 0.0f64..0.5),
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 72),
    )
        .prop_map(|((g, e_j, k, n), (num_qubits, n_max, frac, gamma, nbar), amps)| Draw {
            g,
            e_j,
            k,
            n,
            num_qubits,
            n_max,
            frac,
            gamma,
            nbar,
            amps,
        })
}

impl Draw {
    pub fn system(&self) -> SystemParams {
        let mut sp = SystemParams::paper_defaults()
            .with_g(self.g)
            .with_num_qubits(self.num_qubits)
            .with_n_max(self.n_max);
        sp.qubit.e_j = self.e_j;
        sp.qubit.gate_charge = 0.5;
        sp.with_detuning(detuning_for(self.g, self.e_j, self.k, self.n))
    }

    fn random_state(&self, space: HilbertSpace) -> Result<StateVector, String> {
        let d = space.dim();
        let v = CVector::from_iterator(d, self.amps.iter().cycle().take(d).map(|&(re, im)| c(re, im)));
        let v = if v.norm() < 1e-6 { CVector::from_element(d, c(1.0, 0.0)) } else { v };
        StateVector::normalized(space, v).map_err(|e| e.to_string())
    }
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Unitarity of the gates and propagators, Hermiticity of both coupled
/// Hamiltonians, and unit trace of reduced and thermal states.
pub fn check_invariants(d: &Draw) -> Result<(), String> {
    let e = |e: cavgate::Error| e.to_string();
    let sp = d.system();
    let space = sp.joint_space().map_err(e)?;

    let u = ideal_collective_gate(d.num_qubits, d.gamma).map_err(e)?;
    ensure(u.unitarity_error() < 1e-12, || format!("collective gate unitarity {:e}", u.unitarity_error()))?;

    let s = solve_schedule(&sp, d.num_qubits, d.k, d.n, T1Mode::Corrected).map_err(e)?;
    let comp = composite_cluster_unitary(&s).map_err(e)?;
    ensure(comp.unitarity_error() < 1e-12, || format!("composite unitarity {:e}", comp.unitarity_error()))?;

    let t = d.frac * s.period;
    let ld = LambDickeHamiltonian::new(&sp, space).map_err(e)?;
    let h = ld.at(t);
    ensure(h.hermiticity_error() <= 1e-14 * h.max_abs().max(1e-300), || {
        format!("Lamb-Dicke Hermiticity {:e}", h.hermiticity_error())
    })?;
    let lab = LabFrameHamiltonian::new(&sp, space, &TruncationPolicy::lenient()).map_err(e)?;
    let h = lab.at(t);
    ensure(h.hermiticity_error() <= 1e-14 * h.max_abs(), || format!("lab-frame Hermiticity {:e}", h.hermiticity_error()))?;

    let span = t.max(1e-3);
    let cfg = IntegratorConfig::new(Method::CommutatorFree4, span / 100.0);
    let uint = integrate_separable_unitary(&ld, (0.0, span), &cfg).map_err(e)?;
    ensure(uint.unitarity_error() < 1e-10, || format!("integrated unitarity {:e}", uint.unitarity_error()))?;

    let psi = d.random_state(space)?;
    let keep: Vec<Subsystem> = (0..d.num_qubits).map(Subsystem::Qubit).collect();
    let rho = partial_trace(&psi, &keep).map_err(e)?;
    ensure((rho.trace() - c(1.0, 0.0)).norm() < 1e-12, || format!("reduced trace {}", rho.trace()))?;
    ensure(rho.hermiticity_error() < 1e-14, || format!("reduced Hermiticity {:e}", rho.hermiticity_error()))?;
    let evolved = psi.to_density().evolve(&uint).map_err(e)?;
    ensure((evolved.trace() - c(1.0, 0.0)).norm() < 1e-10, || format!("evolved trace {}", evolved.trace()))?;

    let th = thermal_state(HilbertSpace::cavity_only(30).map_err(e)?, d.nbar).map_err(e)?;
    ensure((th.trace() - c(1.0, 0.0)).norm() < 1e-12, || format!("thermal trace {}", th.trace()))?;
    Ok(())
}

/// `basis_index` and `decompose` are inverse bijections for every `N ≤ 4`,
/// `n_max ≤ 8`, with and without a cavity.
pub fn check_basis_bijection() -> Result<usize, String> {
    let mut checked = 0;
    for n in 0..=4usize {
        let mut spaces = vec![];
        if n > 0 {
            spaces.push(HilbertSpace::qubits(n).map_err(|e| e.to_string())?);
        }
        for n_max in 0..=8 {
            if let Ok(s) = HilbertSpace::with_cavity(n, n_max) {
                spaces.push(s);
            }
        }
        for space in spaces {
            let mut seen = vec![false; space.dim()];
            for fock in 0..space.cavity_levels() {
                for q in 0..(1usize << n) {
                    let bits: Vec<u8> = (0..n).map(|i| ((q >> i) & 1) as u8).collect();
                    let idx = space.basis_index(&bits, fock).map_err(|e| e.to_string())?;
                    ensure(idx < space.dim() && !seen[idx], || format!("index {idx} repeated in {space:?}"))?;
                    seen[idx] = true;
                    let (b2, f2) = space.decompose(idx).map_err(|e| e.to_string())?;
                    ensure(b2 == bits && f2 == fock, || format!("decompose({idx}) is not the inverse"))?;
                    checked += 1;
                }
            }
            ensure(seen.iter().all(|&s| s), || format!("indices of {space:?} not onto"))?;
        }
    }
    Ok(checked)
}

/// Largest `1 − F` between a zero-rate master-equation run and the unitary
/// evolution of the same initial states.
pub fn zero_rate_lindblad_gap() -> Result<f64, String> {
    let e = |e: cavgate::Error| e.to_string();
    let sp = SystemParams::paper_defaults().with_n_max(8);
    let space = sp.joint_space().map_err(e)?;
    let ld = LambDickeHamiltonian::new(&sp, space).map_err(e)?;
    let t = 2.0 * PI / sp.drive.delta() * 0.4;
    let u = integrate_separable_unitary(&ld, (0.0, t), &IntegratorConfig::new(Method::CommutatorFree4, t / 300.0))
        .map_err(e)?;
    let mut worst = 0.0f64;
    for idx in [0usize, 6, 13] {
        let psi = StateVector::basis(space, idx).map_err(e)?;
        let rho = lindblad_evolve(|s| ld.at(s), &[], &psi.to_density(), (0.0, t), &LindbladConfig::new(t / 400.0))
            .map_err(e)?;
        let out = apply(&u, &psi).map_err(e)?;
        worst = worst.max(1.0 - fidelity(&out, &rho).map_err(e)?);
    }
    Ok(worst)
}
