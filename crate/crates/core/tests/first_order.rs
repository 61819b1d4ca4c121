//! The lab-frame propagator, moved to the free-cavity frame and stripped of
//! the flux-sweep rotation, agrees with the Lamb–Dicke propagator up to
//! corrections linear in `g`.

use std::f64::consts::PI;

use cavgate::cluster::lift;
use cavgate::gates::rotation_layer;
use cavgate::linalg::CMatrix;
use cavgate::model::{flux_sweep_angle, interaction_frame, LabFrameHamiltonian, LambDickeHamiltonian, SystemParams};
use cavgate::operator::TruncationPolicy;
use cavgate::propagator::{integrate_separable_block, IntegratorConfig, Method};

/// Fock levels `0..=WINDOW` are compared; `N_MAX` leaves ample headroom.
const WINDOW: usize = 2;
const N_MAX: usize = 14;

/// `1 − |Σ⟨u_j, v_j⟩| / k` over the `k` window columns. This is quadratic in
/// the operator error, so its square root is what scales with `g`.
fn window_distance(g: f64) -> f64 {
    let mut sp = SystemParams::paper_defaults().with_g(g).with_n_max(N_MAX);
    sp.qubit.gate_charge = 0.5;
    let sp = sp.with_detuning(g * sp.qubit.e_j);
    let space = sp.joint_space().unwrap();
    let t = 2.0 * PI / sp.drive.delta();
    let cols = (WINDOW + 1) * space.qubit_dim();
    let block = CMatrix::identity(space.dim(), cols);

    let lab = LabFrameHamiltonian::new(&sp, space, &TruncationPolicy::default()).unwrap();
    let lab_cfg = IntegratorConfig::lab_frame_default(&sp).unwrap();
    let u_lab = integrate_separable_block(&lab, (0.0, t), &lab_cfg, &block).unwrap();
    // U₀(T)† U_lab, then remove exp(iθJx) from the swept flux
    let u_i = interaction_frame(space, sp.cavity.omega_c, t).unwrap().adjoint().matrix() * u_lab;
    let sweep = lift(&rotation_layer(2, flux_sweep_angle(&sp, t)).unwrap(), space).unwrap();
    let u_i = sweep.adjoint().matrix() * u_i;

    let ld = LambDickeHamiltonian::new(&sp, space).unwrap();
    let u_ld = integrate_separable_block(&ld, (0.0, t), &IntegratorConfig::new(Method::CommutatorFree4, t / 400.0), &block)
        .unwrap();

    let overlap: num_complex::Complex64 = u_ld.iter().zip(u_i.iter()).map(|(a, b)| a.conj() * b).sum();
    (1.0 - overlap.norm() / cols as f64).max(0.0)
}

#[test]
fn lab_frame_matches_lamb_dicke_to_first_order() {
    let full = window_distance(1e-2);
    let half = window_distance(5e-3);
    let slope = (full / half).sqrt();
    println!("distance g=1e-2 {full:.3e}, g=5e-3 {half:.3e}, sqrt ratio {slope:.3}");
    assert!(full > 0.0 && half > 0.0);
    assert!((1.0..=4.0).contains(&slope), "sqrt-distance ratio {slope}");
}
