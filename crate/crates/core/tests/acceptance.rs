//! Acceptance run: one PASS/FAIL line per criterion, then a non-zero exit if
//! any failed. Runs without the libtest harness so the lines always print.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cavgate::cluster::{cluster_target, lift, reduced_purity, Construction, GenerateOptions, Tier};
use cavgate::gates::{cluster_phase_operator, gamma_from_loop, composite_cluster_unitary, ideal_collective_gate, solve_schedule, T1Mode};
use cavgate::linalg::{c, CVector};
use cavgate::model::{LambDickeHamiltonian, SystemParams};
use cavgate::open_system::{feasibility_report, thermal_insensitivity_scan, NoiseParams, ScanInputs};
use cavgate::operator::{operator_distance, operator_distance_on_window, reliable_fock_window};
use cavgate::phases::decompose_phases;
use cavgate::propagator::{closed_form_propagator, compress_cavity, integrate_separable_unitary, IntegratorConfig, Method};
use cavgate::space::HilbertSpace;
use cavgate::state::{apply, fidelity, StateVector};
use proptest::test_runner::{Config, TestCaseError, TestRunner};

type Check = Result<(bool, String), String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn epr() -> Check {
    let u = ideal_collective_gate(2, PI / 8.0).map_err(|e| e.to_string())?;
    let space = HilbertSpace::qubits(2).map_err(|e| e.to_string())?;
    let out = apply(&u, &StateVector::basis(space, 0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut v = CVector::zeros(4);
    v[0] = c(FRAC_1_SQRT_2, 0.0);
    v[3] = c(0.0, FRAC_1_SQRT_2);
    let f = fidelity(&out, &StateVector::new(space, v).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok((f >= 1.0 - 1e-10, format!("fidelity 1 - {:.2e} (need >= 1 - 1e-10)", 1.0 - f)))
}

fn closed_form_vs_integration() -> Check {
    let e = |e: cavgate::Error| e.to_string();
    let sp = SystemParams::paper_defaults().with_n_max(25);
    let space = sp.joint_space().map_err(e)?;
    let t = 2.0 * PI / sp.drive.delta();
    let closed = closed_form_propagator(&sp, space, t).map_err(e)?;

    // The truncated ladder algebra spoils the top Fock levels of any finite
    // integration, so the reference is integrated on a larger cutoff and
    // compressed back to 25 levels.
    let big = sp.with_n_max(50);
    let ld_big = LambDickeHamiltonian::new(&big, big.joint_space().map_err(e)?).map_err(e)?;
    let cfg = IntegratorConfig::new(Method::CommutatorFree4, t / 250.0);
    let u_big = integrate_separable_unitary(&ld_big, (0.0, t), &cfg).map_err(e)?;
    let compressed = compress_cavity(&u_big, 25).map_err(e)?;
    let d = operator_distance(&closed, &compressed).map_err(e)?;

    // Same cutoff on both sides: full distance and distance on the reliable window.
    let ld = LambDickeHamiltonian::new(&sp, space).map_err(e)?;
    let u = integrate_separable_unitary(&ld, (0.0, t), &cfg).map_err(e)?;
    let raw = operator_distance(&closed, &u).map_err(e)?;
    let w = reliable_fock_window(25, 1.0, 1e-8).ok_or("no reliable window")?;
    let win = operator_distance_on_window(&closed, &u, w).map_err(e)?;

    // exp(−iγJx²) in place of exp(+iγJx²) must be far from the integration.
    let gamma = gamma_from_loop(sp.cavity.g, sp.qubit.e_j, sp.drive.delta(), t);
    let flip = lift(&ideal_collective_gate(2, -2.0 * gamma).map_err(e)?, big.joint_space().map_err(e)?).map_err(e)?;
    let closed_big = closed_form_propagator(&big, big.joint_space().map_err(e)?, t).map_err(e)?;
    let flipped = compress_cavity(&closed_big.compose(&flip).map_err(e)?, 25).map_err(e)?;
    let d_flip = operator_distance(&flipped, &compressed).map_err(e)?;

    Ok((
        d < 1e-6 && d_flip > 1e-3,
        format!(
            "distance {d:.2e} (need < 1e-6); opposite-sign exponent {d_flip:.3} (need > 1e-3); \
             same-cutoff full {raw:.3e}, window n<={w} {win:.2e}"
        ),
    ))
}

fn schedule_numbers() -> Check {
    let e = |e: cavgate::Error| e.to_string();
    let sp = SystemParams::paper_defaults();
    let noise = NoiseParams::paper_defaults(sp.cavity.omega_c);
    let r = feasibility_report(&sp, &noise, 0.015, 2000.0, 1, 0).map_err(e)?;
    let mut per = Vec::new();
    for n in 2..=4 {
        let s = solve_schedule(&sp, n, 1, 0, T1Mode::Paper).map_err(e)?;
        per.push(s.t1 / (n - 1) as f64 * 1e3);
    }
    let ok = (r.delta - 0.608).abs() <= 0.01
        && (r.period - 10.3).abs() <= 0.2
        && (r.tau_us - 33.3).abs() <= 0.5
        && per.iter().all(|p| (p - 3.23).abs() <= 0.1)
        && (r.strong_coupling_figure / 1.5e4 - 1.0).abs() <= 0.2;
    Ok((
        ok,
        format!(
            "delta {:.4} rad/ns, T {:.3} ns, tau {:.2} us, t1/(N-1) {:.4} ps, Omega^2 tau gamma_q {:.3e}",
            r.delta, r.period, r.tau_us, per[0], r.strong_coupling_figure
        ),
    ))
}

fn composite_identity() -> Check {
    let e = |e: cavgate::Error| e.to_string();
    let sp = SystemParams::paper_defaults();
    let mut worst = 0.0f64;
    let mut paper = Vec::new();
    for n in 2..=4 {
        let s = solve_schedule(&sp, n, 1, 0, T1Mode::Corrected).map_err(e)?;
        let target = cluster_phase_operator(n, s.gamma).map_err(e)?;
        worst = worst.max(operator_distance(&composite_cluster_unitary(&s).map_err(e)?, &target).map_err(e)?);
        let p = solve_schedule(&sp, n, 1, 0, T1Mode::Paper).map_err(e)?;
        paper.push(operator_distance(&composite_cluster_unitary(&p).map_err(e)?, &target).map_err(e)?);
    }
    Ok((
        worst < 1e-10 && paper.iter().all(|&d| d > 1e-6),
        format!(
            "corrected-mode distance {worst:.2e} (need < 1e-10); paper-mode distance N=2,3,4: {:.4}, {:.4}, {:.4}",
            paper[0], paper[1], paper[2]
        ),
    ))
}

fn cluster_targets() -> Check {
    let e = |e: cavgate::Error| e.to_string();
    let mut worst = 0.0f64;
    for n in 2..=3 {
        let a = cluster_target(n, PI / 8.0, Construction::Composite).map_err(e)?;
        let b = cluster_target(n, PI / 8.0, Construction::Literal).map_err(e)?;
        worst = worst.max(1.0 - fidelity(&a.state, &b.state).map_err(e)?);
    }
    let t = cluster_target(3, PI / 8.0, Construction::Composite).map_err(e)?;
    let mut purity_err = 0.0f64;
    for q in 0..3 {
        purity_err = purity_err.max((reduced_purity(&t.state, q).map_err(e)? - 0.5).abs());
    }
    Ok((
        worst <= 1e-10 && purity_err <= 1e-10,
        format!("1 - F(composite, literal) {worst:.2e}; max |purity - 1/2| {purity_err:.2e}"),
    ))
}

fn thermal_insensitivity() -> Check {
    let e = |e: cavgate::Error| e.to_string();
    let fock = ScanInputs::Fock(vec![0, 1, 2, 5]);
    let opts = GenerateOptions::default();
    let sp = SystemParams::paper_defaults().with_n_max(40);
    let s = solve_schedule(&sp, 2, 1, 0, T1Mode::Corrected).map_err(e)?;
    let ld = thermal_insensitivity_scan(&sp, &s, &fock, Tier::LambDicke, &opts).map_err(e)?;

    let mut lab = Vec::new();
    for g in [0.01, 0.005] {
        let spg = sp.with_g(g);
        let sg = solve_schedule(&spg, 2, 1, 0, T1Mode::Corrected).map_err(e)?;
        lab.push(thermal_insensitivity_scan(&spg, &sg, &fock, Tier::LabFrame, &opts).map_err(e)?);
    }
    let ratio = lab[0].spread / lab[1].spread;
    let deficit = |t: &cavgate::open_system::ScanTable| 1.0 - t.rows[0].fidelity;
    let deficit_ratio = deficit(&lab[0]) / deficit(&lab[1]);
    let ok = ld.spread < 1e-6 && lab[0].spread > 0.0 && lab[1].spread > 0.0 && (2.0..=8.0).contains(&ratio);
    Ok((
        ok,
        format!(
            "Lamb-Dicke spread {:.2e} (need < 1e-6); lab-frame spread g=0.01 {:.3e}, g=0.005 {:.3e}, ratio {ratio:.2} (need in [2, 8]); \
             vacuum-start infidelity ratio {deficit_ratio:.2}",
            ld.spread, lab[0].spread, lab[1].spread
        ),
    ))
}

fn phase_relation() -> Check {
    let sp = SystemParams::paper_defaults();
    let (mut rel, mut tot) = (0.0f64, 0.0f64);
    for k in 1..=2 {
        for n in 0..=1u32 {
            let spk = sp.with_detuning(cavgate::gates::detuning_for(sp.cavity.g, sp.qubit.e_j, k, n));
            let d = decompose_phases(&spk, k).map_err(|e| e.to_string())?;
            rel = rel.max((d.gamma_d + 2.0 * d.gamma_g).abs());
            tot = tot.max((d.gamma_total.abs() - (2 * n + 1) as f64 * PI / 8.0).abs());
        }
    }
    Ok((
        rel <= 1e-6 && tot <= 1e-8,
        format!("max |gamma_d + 2 gamma_g| {rel:.2e} (need <= 1e-6); max ||gamma| - (2n+1)pi/8| {tot:.2e} (need <= 1e-8)"),
    ))
}

fn property_suites() -> Check {
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    let draws = runner.run(&common::draws(), |d| common::check_invariants(&d).map_err(TestCaseError::fail));
    let bijection = common::check_basis_bijection();
    let gap = common::zero_rate_lindblad_gap()?;
    let mut detail = vec![];
    detail.push(match &draws {
        Ok(()) => "100 randomized draws ok".to_string(),
        Err(e) => format!("randomized draws failed: {e}"),
    });
    detail.push(match &bijection {
        Ok(n) => format!("basis bijection over {n} labels"),
        Err(e) => format!("basis bijection failed: {e}"),
    });
    detail.push(format!("zero-rate Lindblad 1 - F {gap:.2e} (need < 1e-8)"));
    Ok((draws.is_ok() && bijection.is_ok() && gap < 1e-8, detail.join("; ")))
}

fn run_cli(bin: &str, out: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let status = Command::new(bin)
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("cavgate {args:?} exited with {status}"));
    }
    std::fs::read(out.join("result.json")).map_err(|e| e.to_string())
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_cavgate");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs: [&[&str]; 3] = [
        &["mbqc", "--N", "3", "--measure", "0,1", "--seed", "1234"],
        &["thermal", "--tier", "lamb_dicke", "--fock", "0,1,2", "--seed", "7"],
        &["sweep", "--sweep", "g=0.01,0.02", "--inner", "cluster", "--tier", "closed_form"],
    ];
    let mut same = true;
    for (i, args) in configs.iter().enumerate() {
        let a = run_cli(bin, &dir.path().join(format!("{i}a")), args)?;
        let b = run_cli(bin, &dir.path().join(format!("{i}b")), args)?;
        same &= a == b;
    }
    Ok((same, format!("{} configurations, result.json byte-identical across repeated runs", configs.len())))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "EPR generation", budget: Some(Duration::from_millis(1)), run: epr },
        Criterion {
            id: 2,
            name: "closed form vs time-ordered integration",
            budget: Some(Duration::from_secs(30)),
            run: closed_form_vs_integration,
        },
        Criterion { id: 3, name: "schedule numbers", budget: Some(Duration::from_millis(1)), run: schedule_numbers },
        Criterion { id: 4, name: "composite identity", budget: Some(Duration::from_secs(1)), run: composite_identity },
        Criterion { id: 5, name: "cluster target", budget: Some(Duration::from_secs(1)), run: cluster_targets },
        Criterion {
            id: 6,
            name: "thermal insensitivity",
            budget: Some(Duration::from_secs(300)),
            run: thermal_insensitivity,
        },
        Criterion { id: 7, name: "unconventional phase relation", budget: Some(Duration::from_secs(1)), run: phase_relation },
        Criterion { id: 8, name: "property suites", budget: Some(Duration::from_secs(120)), run: property_suites },
        Criterion { id: 9, name: "CLI determinism", budget: None, run: determinism },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = (c.run)();
        let elapsed = t0.elapsed();
        let (pass, detail) = match outcome {
            Ok((ok, d)) => (ok, d),
            Err(msg) => (false, format!("error: {msg}")),
        };
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let timing = match c.budget {
            Some(b) => format!("{:.3?} (budget {:?})", elapsed, b),
            None => format!("{elapsed:.3?}"),
        };
        let ok = pass && in_budget;
        if !ok {
            failed += 1;
        }
        println!("{} criterion {}: {}: {detail}; {timing}", if ok { "PASS" } else { "FAIL" }, c.id, c.name);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
