//! Closed-form and numerical time evolution.
//!
//! With `B(t) = r(1 − e^{iδt})`, `r = gE_J/(4δ)`, the interaction-picture
//! propagator of the Lamb–Dicke Hamiltonian is
//!
//! `U(t) = exp[Φ(t) Jx²] · exp[iB*(t) a Jx] · exp[iB(t) a† Jx]`,
//! `Φ(t) = ∫₀ᵗ B* dB = r²(1 − e^{iδt}) + i r² δt`.
//!
//! `Re Φ = |B|²/2` cancels the normal-ordering factor of the two cavity
//! exponentials, so the product is unitary and at `δT = 2kπ` reduces to
//! `exp(iγJx²) ⊗ I` with `γ = r²δT`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::model::SystemParams;
use crate::operator::{coherent_leak, jx_block_operator, ladder, LinearOperator, Structure, TruncationPolicy};
use crate::space::HilbertSpace;
use crate::sparse::{expm_action, Combination, CsrMatrix};
use crate::state::StateVector;

/// `r = gE_J/(4δ)`.
pub fn loop_radius(sp: &SystemParams) -> Result<f64> {
    let delta = sp.drive.delta();
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::SingularDetuning);
    }
    Ok(sp.cavity.g * sp.qubit.e_j / (4.0 * delta))
}

/// `B(t) = r(1 − e^{iδt})`.
pub fn b_of_t(sp: &SystemParams, t: f64) -> Result<C64> {
    let r = loop_radius(sp)?;
    Ok((c(1.0, 0.0) - C64::from_polar(1.0, sp.drive.delta() * t)) * r)
}

/// Sampled `B(t)` with the parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct BTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    pub g: f64,
    pub e_j: f64,
    pub delta: f64,
}

impl BTrajectory {
    pub fn sample(sp: &SystemParams, times: &[f64]) -> Result<Self> {
        let values = times.iter().map(|&t| b_of_t(sp, t)).collect::<Result<_>>()?;
        Ok(Self {
            times: times.to_vec(),
            values,
            g: sp.cavity.g,
            e_j: sp.qubit.e_j,
            delta: sp.drive.delta(),
        })
    }

    /// `n + 1` equally spaced samples over `[0, t_end]`.
    pub fn uniform(sp: &SystemParams, t_end: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        Self::sample(sp, &times)
    }

    /// Columns `t,re_B,im_B`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,re_B,im_B\n");
        for (t, b) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t:.16e},{:.16e},{:.16e}", b.re, b.im);
        }
        s
    }
}

/// `∫₀ᵗ B* dB` from the antiderivative and from Simpson quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseExponent {
    pub analytic: C64,
    pub quadrature: C64,
}

impl PhaseExponent {
    pub fn value(&self) -> C64 {
        self.analytic
    }
}

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub(crate) fn simpson<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, n: usize) -> C64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + h * i as f64) * w;
    }
    acc * (h / 3.0)
}

/// Simpson panels per loop used by the phase quadratures.
pub(crate) const PANELS_PER_LOOP: usize = 4000;

pub(crate) fn panels_for(delta: f64, t: f64) -> usize {
    let loops = (delta * t).abs() / (2.0 * PI);
    PANELS_PER_LOOP * (loops.ceil() as usize).max(1)
}

/// `Φ(t) = ∫₀ᵗ B*(s) B'(s) ds`, evaluated analytically and by quadrature;
/// fails if the two differ by more than `1e-10` relative to `r²`.
pub fn phase_exponent(sp: &SystemParams, t: f64) -> Result<PhaseExponent> {
    let r = loop_radius(sp)?;
    let delta = sp.drive.delta();
    let r2 = r * r;
    let analytic = (c(1.0, 0.0) - C64::from_polar(1.0, delta * t)) * r2 + c(0.0, r2 * delta * t);
    let integrand = |s: f64| {
        let b = (c(1.0, 0.0) - C64::from_polar(1.0, delta * s)) * r;
        let db = C64::from_polar(1.0, delta * s) * c(0.0, -delta * r);
        b.conj() * db
    };
    let quadrature = simpson(integrand, 0.0, t, panels_for(delta, t));
    let err = (analytic - quadrature).norm();
    if err > 1e-10 * r2.max(f64::MIN_POSITIVE) {
        return Err(Error::Integration(format!(
            "phase quadrature disagrees with the antiderivative by {err:.3e}"
        )));
    }
    Ok(PhaseExponent { analytic, quadrature })
}

fn cavity_cutoff(space: HilbertSpace) -> Result<usize> {
    space
        .fock_cutoff()
        .ok_or_else(|| Error::Shape("closed-form propagator needs a cavity".into()))
}

/// The three-factor product above, with the cavity exponentials summed as
/// finite series of the truncated ladder operators.
pub fn closed_form_propagator(sp: &SystemParams, space: HilbertSpace, t: f64) -> Result<LinearOperator> {
    closed_form_propagator_with(sp, space, t, &TruncationPolicy::default())
}

pub fn closed_form_propagator_with(
    sp: &SystemParams,
    space: HilbertSpace,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<LinearOperator> {
    let n_max = cavity_cutoff(space)?;
    let n = space.num_qubits();
    if n == 0 {
        return Err(Error::Range("closed-form propagator needs at least one qubit".into()));
    }
    let phi = phase_exponent(sp, t)?.analytic;
    let b = b_of_t(sp, t)?;
    policy.check(coherent_leak(n as f64 * b.norm(), n_max), n_max)?;
    let a = ladder::annihilation(n_max);
    let adag = ladder::creation(n_max);
    let u = jx_block_operator(space, Structure::General, |m| {
        let mf = m as f64;
        let left = linalg::expm_nilpotent(&(&a * (c(0.0, mf) * b.conj())));
        let right = linalg::expm_nilpotent(&(&adag * (c(0.0, mf) * b)));
        left * right * (phi * (mf * mf)).exp()
    })?;
    let structure = if u.unitarity_error() < 1e-10 {
        Structure::Unitary
    } else {
        Structure::General
    };
    Ok(u.with_structure(structure))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// `exp(−i dt H(t_n))`, first order.
    PiecewiseConstant,
    /// `exp(−i dt H(t_n + dt/2))`, second order.
    Midpoint,
    /// Two-exponential commutator-free scheme on Gauss nodes, fourth order.
    CommutatorFree4,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "piecewise" | "piecewise_constant" => Ok(Method::PiecewiseConstant),
            "midpoint" => Ok(Method::Midpoint),
            "cf4" | "commutator_free_4" => Ok(Method::CommutatorFree4),
            other => Err(Error::InvalidParameter(format!("unknown integrator '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size (ns); rounded down so an integer number of steps spans the interval.
    pub dt: f64,
    /// Bound on the half-step difference and on the norm/unitarity drift.
    pub tolerance: f64,
    /// Repeat with halved steps until two successive results agree.
    pub check_convergence: bool,
    /// Smallest step tried by the convergence check.
    pub min_dt: f64,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64) -> Self {
        Self {
            method,
            dt,
            tolerance: 1e-8,
            check_convergence: false,
            min_dt: dt / 64.0,
        }
    }

    /// Midpoint with `dt = T/500`, the default for the Lamb–Dicke tier.
    pub fn lamb_dicke_default(sp: &SystemParams) -> Result<Self> {
        let delta = sp.drive.delta();
        if delta == 0.0 {
            return Err(Error::SingularDetuning);
        }
        Ok(Self::new(Method::Midpoint, 2.0 * PI / delta.abs() / 500.0))
    }

    /// Midpoint with `dt = min(2π/ω, 2π/δ)/200`, the default for the lab frame.
    pub fn lab_frame_default(sp: &SystemParams) -> Result<Self> {
        let delta = sp.drive.delta();
        if delta == 0.0 {
            return Err(Error::SingularDetuning);
        }
        let fastest = (2.0 * PI / sp.drive.omega().abs()).min(2.0 * PI / delta.abs());
        Ok(Self::new(Method::Midpoint, fastest / 200.0))
    }

    pub fn with_convergence_check(mut self, tolerance: f64) -> Self {
        self.check_convergence = true;
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// What is carried through the integration.
#[derive(Clone, Debug)]
pub enum Propagand {
    State(StateVector),
    Unitary(LinearOperator),
}

const DROP_REL: f64 = 1e-15;

/// `H(t) = Σ_j c_j(t) M_j` with fixed sparse `M_j`.
pub trait SeparableHamiltonian {
    fn space(&self) -> HilbertSpace;
    fn terms(&self) -> &[CsrMatrix];
    fn coefficients(&self, t: f64) -> Vec<C64>;
}

/// Applies `exp(−i dt Σ_s w_s H(t_s))` for the `(w_s, t_s)` samples of one step.
type StepFn<'a> = dyn Fn(&[(f64, f64)], f64, &CMatrix) -> Result<CMatrix> + 'a;

fn integrate_fixed(step: &StepFn<'_>, t0: f64, t1: f64, cfg: &IntegratorConfig, block: &CMatrix) -> Result<CMatrix> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(block.clone());
    }
    let steps = (span.abs() / cfg.dt).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let mut v = block.clone();
    // Gauss nodes and weights of the fourth-order commutator-free scheme
    let s3 = 3f64.sqrt();
    let (c1, c2) = (0.5 - s3 / 6.0, 0.5 + s3 / 6.0);
    let (a1, a2) = (0.25 - s3 / 6.0, 0.25 + s3 / 6.0);
    for i in 0..steps {
        let t = t0 + dt * i as f64;
        v = match cfg.method {
            Method::PiecewiseConstant => step(&[(1.0, t)], dt, &v)?,
            Method::Midpoint => step(&[(1.0, t + 0.5 * dt)], dt, &v)?,
            Method::CommutatorFree4 => {
                let (ta, tb) = (t + c1 * dt, t + c2 * dt);
                let v = step(&[(a2, ta), (a1, tb)], dt, &v)?;
                step(&[(a1, ta), (a2, tb)], dt, &v)?
            }
        };
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integration(format!("non-finite amplitudes at t = {t}")));
        }
    }
    Ok(v)
}

fn integrate_with(step: &StepFn<'_>, t_span: (f64, f64), cfg: &IntegratorConfig, block: &CMatrix) -> Result<CMatrix> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    let mut current = *cfg;
    let mut result = integrate_fixed(step, t0, t1, &current, block)?;
    if cfg.check_convergence {
        loop {
            let half = IntegratorConfig { dt: current.dt / 2.0, ..current };
            if half.dt < cfg.min_dt {
                return Err(Error::Integration(format!(
                    "no convergence to {:.1e} above dt = {:.3e}",
                    cfg.tolerance, cfg.min_dt
                )));
            }
            let refined = integrate_fixed(step, t0, t1, &half, block)?;
            let diff = linalg::max_abs(&(&refined - &result));
            log::debug!("half-step difference {diff:.3e} at dt = {:.3e}", half.dt);
            result = refined;
            current = half;
            if diff < cfg.tolerance {
                break;
            }
        }
    }
    Ok(result)
}

fn check_rows(space: HilbertSpace, block: &CMatrix) -> Result<()> {
    if block.nrows() != space.dim() {
        return Err(Error::Shape(format!(
            "block has {} rows, space dimension is {}",
            block.nrows(),
            space.dim()
        )));
    }
    Ok(())
}

/// Propagates a `D × k` block of columns under `H(t)` over `t_span`.
pub fn integrate_block<F>(
    h: F,
    space: HilbertSpace,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    block: &CMatrix,
) -> Result<CMatrix>
where
    F: Fn(f64) -> LinearOperator,
{
    check_rows(space, block)?;
    let step = |samples: &[(f64, f64)], dt: f64, v: &CMatrix| -> Result<CMatrix> {
        let d = space.dim();
        let mut sum = CMatrix::zeros(d, d);
        for &(w, t) in samples {
            let op = h(t);
            op.space().check_same(&space)?;
            sum += op.matrix() * c(w, 0.0);
        }
        Ok(expm_action(&CsrMatrix::from_dense(&sum, DROP_REL), dt, v))
    };
    integrate_with(&step, t_span, cfg, block)
}

/// [`integrate_block`] for a Hamiltonian given as fixed sparse terms.
pub fn integrate_separable_block(
    h: &impl SeparableHamiltonian,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    block: &CMatrix,
) -> Result<CMatrix> {
    check_rows(h.space(), block)?;
    let terms = h.terms();
    let step = |samples: &[(f64, f64)], dt: f64, v: &CMatrix| -> Result<CMatrix> {
        let mut coeffs = vec![c(0.0, 0.0); terms.len()];
        for &(w, t) in samples {
            for (acc, z) in coeffs.iter_mut().zip(h.coefficients(t)) {
                *acc += z * w;
            }
        }
        let comb = Combination { terms: coeffs.into_iter().zip(terms.iter()).collect() };
        Ok(expm_action(&comb, dt, v))
    };
    integrate_with(&step, t_span, cfg, block)
}

/// Propagator of a separable Hamiltonian from the identity.
pub fn integrate_separable_unitary(
    h: &impl SeparableHamiltonian,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<LinearOperator> {
    let space = h.space();
    let out = integrate_separable_block(h, t_span, cfg, &linalg::identity(space.dim()))?;
    let u = LinearOperator::new(space, out, Structure::Unitary)?;
    let err = u.unitarity_error();
    if err > cfg.tolerance.max(1e-10) {
        return Err(Error::Integration(format!("unitarity drifted to {err:.3e}")));
    }
    Ok(u)
}

/// Time-ordered evolution of a state or of a unitary (`U(t₁) = 𝒯 exp(−i∫H) U₀`).
pub fn integrate_time_ordered<F>(
    h: F,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    initial: &Propagand,
) -> Result<Propagand>
where
    F: Fn(f64) -> LinearOperator,
{
    match initial {
        Propagand::State(psi) => {
            let space = psi.space();
            let block = CMatrix::from_column_slice(space.dim(), 1, psi.amplitudes().as_slice());
            let out = integrate_block(h, space, t_span, cfg, &block)?;
            let v = crate::linalg::CVector::from_column_slice(out.as_slice());
            let state = StateVector::new(space, v).map_err(|_| {
                Error::Integration("norm drifted beyond tolerance".into())
            })?;
            if (state.norm() - 1.0).abs() > cfg.tolerance.max(1e-12) {
                return Err(Error::Integration(format!("norm drifted to {}", state.norm())));
            }
            Ok(Propagand::State(state))
        }
        Propagand::Unitary(u0) => {
            let space = u0.space();
            let out = integrate_block(h, space, t_span, cfg, u0.matrix())?;
            let u = LinearOperator::new(space, out, Structure::Unitary)?;
            let err = u.unitarity_error();
            if err > cfg.tolerance.max(1e-10) {
                return Err(Error::Integration(format!("unitarity drifted to {err:.3e}")));
            }
            Ok(Propagand::Unitary(u))
        }
    }
}

/// Propagator from `t_span.0` to `t_span.1`, starting from the identity.
pub fn integrate_unitary<F>(h: F, space: HilbertSpace, t_span: (f64, f64), cfg: &IntegratorConfig) -> Result<LinearOperator>
where
    F: Fn(f64) -> LinearOperator,
{
    match integrate_time_ordered(h, t_span, cfg, &Propagand::Unitary(LinearOperator::identity(space)))? {
        Propagand::Unitary(u) => Ok(u),
        Propagand::State(_) => unreachable!("unitary in, unitary out"),
    }
}

pub fn integrate_state<F>(h: F, psi: &StateVector, t_span: (f64, f64), cfg: &IntegratorConfig) -> Result<StateVector>
where
    F: Fn(f64) -> LinearOperator,
{
    match integrate_time_ordered(h, t_span, cfg, &Propagand::State(psi.clone()))? {
        Propagand::State(s) => Ok(s),
        Propagand::Unitary(_) => unreachable!("state in, state out"),
    }
}

/// Keeps the cavity levels `0..=n_keep` of an operator on a larger cutoff.
pub fn compress_cavity(op: &LinearOperator, n_keep: usize) -> Result<LinearOperator> {
    let space = op.space();
    let n_max = cavity_cutoff(space)?;
    if n_keep > n_max {
        return Err(Error::Range(format!("cannot keep {n_keep} of {n_max} cavity levels")));
    }
    let target = HilbertSpace::with_cavity(space.num_qubits(), n_keep)?;
    let d = target.dim();
    let m = op.matrix().view((0, 0), (d, d)).into_owned();
    LinearOperator::new(target, m, Structure::General)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::ideal_collective_gate;
    use crate::linalg::max_abs;
    use crate::model::LambDickeHamiltonian;
    use crate::operator::{operator_distance, operator_distance_on_window, reliable_fock_window};

    fn sp(n: usize, n_max: usize) -> SystemParams {
        SystemParams::paper_defaults().with_num_qubits(n).with_n_max(n_max)
    }

    #[test]
    fn b_of_t_examples() {
        let p = sp(2, 25);
        let delta = p.drive.delta();
        let r = loop_radius(&p).unwrap();
        assert!(b_of_t(&p, 0.0).unwrap().norm() < 1e-15);
        for k in 1..=3 {
            assert!(b_of_t(&p, 2.0 * PI * k as f64 / delta).unwrap().norm() < 1e-12);
        }
        let mid = b_of_t(&p, PI / delta).unwrap();
        assert!((mid - c(2.0 * r, 0.0)).norm() < 1e-12);
        assert!((2.0 * r - p.cavity.g * p.qubit.e_j / (2.0 * delta)).abs() < 1e-15);
        let zero = p.with_detuning(0.0);
        assert!(matches!(b_of_t(&zero, 1.0), Err(Error::SingularDetuning)));
    }

    #[test]
    fn phase_exponent_at_loop_closure() {
        for k in 1..=3u32 {
            let p = sp(2, 25);
            let delta = p.drive.delta();
            let t = 2.0 * PI * k as f64 / delta;
            let pe = phase_exponent(&p, t).unwrap();
            let r = loop_radius(&p).unwrap();
            assert!(pe.analytic.re.abs() < 1e-12);
            assert!((pe.analytic.im - r * r * 2.0 * PI * k as f64).abs() < 1e-12);
            assert!((pe.analytic - pe.quadrature).norm() < 1e-10);
        }
        assert_eq!(phase_exponent(&sp(2, 25), 0.0).unwrap().analytic, c(0.0, 0.0));
    }

    #[test]
    fn closed_form_is_identity_at_zero_and_gate_at_period() {
        let p = sp(2, 20);
        let space = p.joint_space().unwrap();
        let u0 = closed_form_propagator(&p, space, 0.0).unwrap();
        assert!(max_abs(&(u0.matrix() - linalg::identity(space.dim()))) < 1e-14);
        let period = 2.0 * PI / p.drive.delta();
        let gamma = loop_radius(&p).unwrap().powi(2) * 2.0 * PI;
        let u = closed_form_propagator(&p, space, period).unwrap();
        let target = ideal_collective_gate(2, gamma).unwrap().extend_to(space).unwrap();
        assert!(operator_distance(&u, &target).unwrap() < 1e-8);
    }

    #[test]
    fn closed_form_is_unitary_on_reliable_levels() {
        let p = sp(2, 30);
        let space = p.joint_space().unwrap();
        let t = 0.37 * 2.0 * PI / p.drive.delta();
        let u = closed_form_propagator(&p, space, t).unwrap();
        let w = reliable_fock_window(30, 4.0 * loop_radius(&p).unwrap(), 1e-12).unwrap();
        let cols = (w + 1) * space.qubit_dim();
        let block = u.matrix().columns(0, cols);
        let gram = block.adjoint() * block;
        assert!(max_abs(&(gram - linalg::identity(cols))) < 1e-10);
    }

    #[test]
    fn constant_hamiltonian_matches_exponential() {
        let space = HilbertSpace::with_cavity(1, 4).unwrap();
        let h = CMatrix::from_fn(space.dim(), space.dim(), |i, j| {
            c((i + j) as f64 * 0.1, if i == j { 0.0 } else { 0.05 * (i as f64 - j as f64) })
        });
        let h = LinearOperator::new(space, linalg::hermitian_part(&h), Structure::Hermitian).unwrap();
        for method in [Method::PiecewiseConstant, Method::Midpoint, Method::CommutatorFree4] {
            let cfg = IntegratorConfig::new(method, 0.1);
            let u = integrate_unitary(|_| h.clone(), space, (0.0, 1.3), &cfg).unwrap();
            assert!(max_abs(&(u.matrix() - h.exp_hermitian(1.3).matrix())) < 1e-10);
        }
    }

    #[test]
    fn lamb_dicke_integration_matches_closed_form() {
        let p = sp(1, 25);
        let space = p.joint_space().unwrap();
        let ham = LambDickeHamiltonian::new(&p, space).unwrap();
        let t = 0.61 * 2.0 * PI / p.drive.delta();
        let cfg = IntegratorConfig::new(Method::CommutatorFree4, t / 400.0);
        let u = integrate_unitary(|s| ham.at(s), space, (0.0, t), &cfg).unwrap();
        let closed = closed_form_propagator(&p, space, t).unwrap();
        let w = reliable_fock_window(25, 2.0 * loop_radius(&p).unwrap(), 1e-8).unwrap();
        assert!(operator_distance_on_window(&u, &closed, w).unwrap() < 1e-6);
    }

    #[test]
    fn midpoint_converges_at_second_order() {
        let p = sp(1, 12);
        let space = p.joint_space().unwrap();
        let ham = LambDickeHamiltonian::new(&p, space).unwrap();
        let t = 2.0 * PI / p.drive.delta();
        let reference = integrate_unitary(|s| ham.at(s), space, (0.0, t), &IntegratorConfig::new(Method::CommutatorFree4, t / 2000.0)).unwrap();
        let err = |n: f64| {
            let u = integrate_unitary(|s| ham.at(s), space, (0.0, t), &IntegratorConfig::new(Method::Midpoint, t / n)).unwrap();
            max_abs(&(u.matrix() - reference.matrix()))
        };
        let ratio = err(100.0) / err(200.0);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn state_norm_is_preserved() {
        let p = sp(2, 15);
        let space = p.joint_space().unwrap();
        let ham = LambDickeHamiltonian::new(&p, space).unwrap();
        let psi = StateVector::basis(space, 5).unwrap();
        let t = 2.0 * PI / p.drive.delta();
        let cfg = IntegratorConfig::lamb_dicke_default(&p).unwrap();
        let out = integrate_state(|s| ham.at(s), &psi, (0.0, t), &cfg).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn convergence_check_fails_at_the_floor() {
        let p = sp(1, 8);
        let space = p.joint_space().unwrap();
        let ham = LambDickeHamiltonian::new(&p, space).unwrap();
        let t = 2.0 * PI / p.drive.delta();
        let mut cfg = IntegratorConfig::new(Method::PiecewiseConstant, t / 10.0).with_convergence_check(1e-14);
        cfg.min_dt = t / 40.0;
        assert!(matches!(
            integrate_unitary(|s| ham.at(s), space, (0.0, t), &cfg),
            Err(Error::Integration(_))
        ));
    }

    #[test]
    fn trajectory_csv_has_header_and_rows() {
        let tr = BTrajectory::uniform(&sp(2, 25), 1.0, 4).unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,re_B,im_B\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
