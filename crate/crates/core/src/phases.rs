//! Geometric and dynamical parts of the collective phase.
//!
//! For a `Jx` eigenvalue `m` the cavity follows the coherent path
//! `α_m(t) = i m B(t)`. Per unit `m²`, the total phase is `Im Φ(T)`, the
//! dynamical phase is `−∫⟨α_m|H_m|α_m⟩dt`, and the geometric phase is the
//! remainder. The loop closes at `δT = 2kπ`, where `γ_d = −2γ_g`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::c;
use crate::model::SystemParams;
use crate::propagator::{b_of_t, loop_radius, panels_for, phase_exponent, simpson};

/// Phases per unit `m²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDecomposition {
    pub k: u32,
    pub gamma_total: f64,
    pub gamma_g: f64,
    pub gamma_d: f64,
    /// Enclosed phase-space area, counted `k` times.
    pub loop_area: f64,
}

/// `α_m(t) = i m B(t)`, the cavity amplitude conditioned on `Jx = m`.
pub fn phase_space_trajectory(sp: &SystemParams, m: i64, times: &[f64]) -> Result<Vec<C64>> {
    times
        .iter()
        .map(|&t| b_of_t(sp, t).map(|b| c(0.0, m as f64) * b))
        .collect()
}

fn alpha_and_velocity(r: f64, delta: f64, m: f64, t: f64) -> (C64, C64) {
    let e = C64::from_polar(1.0, delta * t);
    let alpha = c(0.0, m * r) * (c(1.0, 0.0) - e);
    let velocity = c(m * r * delta, 0.0) * e;
    (alpha, velocity)
}

fn decompose_at(sp: &SystemParams, k: u32, m: i64) -> Result<PhaseDecomposition> {
    let r = loop_radius(sp)?;
    let delta = sp.drive.delta();
    let period = 2.0 * PI * k as f64 / delta;
    let m2 = (m * m) as f64;
    let mf = m as f64;
    let coupling = sp.cavity.g * sp.qubit.e_j / 4.0;
    let n = panels_for(delta, period).max(2000 * k as usize);

    // Jx² coefficient of the propagator
    let gamma_total = phase_exponent(sp, period)?.analytic.im;

    // ⟨α|H_m(t)|α⟩ with H_m = i c (a† e^{iδt} − a e^{−iδt}) m and ⟨a⟩ = α
    let energy = |t: f64| {
        let (alpha, _) = alpha_and_velocity(r, delta, mf, t);
        let e = C64::from_polar(1.0, delta * t);
        c(0.0, coupling * mf) * (alpha.conj() * e - alpha * e.conj())
    };
    let integrated = simpson(energy, 0.0, period, n);
    if integrated.im.abs() > 1e-9 * integrated.re.abs().max(1e-300) + 1e-14 {
        return Err(Error::Integration(format!(
            "energy expectation has imaginary part {:.3e}",
            integrated.im
        )));
    }
    let gamma_d = -integrated.re / m2;
    let gamma_g = gamma_total - gamma_d;

    let circulation = simpson(
        |t| {
            let (alpha, v) = alpha_and_velocity(r, delta, mf, t);
            alpha.conj() * v
        },
        0.0,
        period,
        n,
    );
    let loop_area = circulation.im.abs() / 2.0 / m2;

    Ok(PhaseDecomposition {
        k,
        gamma_total,
        gamma_g,
        gamma_d,
        loop_area,
    })
}

/// Decomposition over `k` loops (`T = 2kπ/δ`), computed at `m = 1` and
/// `m = 2` and required to agree within `1e-8`.
pub fn decompose_phases(sp: &SystemParams, k: u32) -> Result<PhaseDecomposition> {
    if k == 0 {
        return Err(Error::InvalidParameter("loop count k must be at least 1".into()));
    }
    let one = decompose_at(sp, k, 1)?;
    let two = decompose_at(sp, k, 2)?;
    let scale = one.gamma_total.abs().max(1e-300);
    let spread = [
        one.gamma_total - two.gamma_total,
        one.gamma_d - two.gamma_d,
        one.gamma_g - two.gamma_g,
        one.loop_area - two.loop_area,
    ]
    .iter()
    .fold(0.0f64, |a, x| a.max(x.abs()));
    if spread > 1e-8 * scale.max(1.0) {
        return Err(Error::Integration(format!(
            "phase decomposition depends on m: spread {spread:.3e}"
        )));
    }
    Ok(one)
}

/// `kπr²`, the analytic enclosed area per unit `m²`.
pub fn loop_area(sp: &SystemParams, k: u32) -> Result<f64> {
    let r = loop_radius(sp)?;
    Ok(k as f64 * PI * r * r)
}
