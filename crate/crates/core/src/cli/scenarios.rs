//! Scenario dispatch. Each scenario returns the JSON result and any CSV
//! tables; [`execute`] writes them.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{error_json, exit_code, OutputDir, RunConfig, Scenario, EXIT_OK};
use crate::cluster::{generate_cluster_with, measure_sequence, CavityInit, GenerateOptions, QubitState, Tier};
use crate::error::{Error, Result};
use crate::gates::{
    cluster_phase_operator, composite_cluster_unitary, detuning_for, ideal_collective_gate, solve_schedule, GateSchedule,
    T1Mode,
};
use crate::linalg::{c, CVector};
use crate::model::{ParamsFile, SystemParams};
use crate::open_system::{
    feasibility_report, generate_cluster_open, thermal_insensitivity_scan, LindbladConfig, NoiseParams, ScanInputs,
};
use crate::operator::operator_distance;
use crate::phases::decompose_phases;
use crate::propagator::{IntegratorConfig, Method};
use crate::space::HilbertSpace;
use crate::state::{apply, fidelity, DensityJson, StateJson, StateVector};
use crate::units::{parse_angle, Dimension};

/// Default Ω (rad/ns) and qubit lifetime (ns) for the feasibility report.
const DEFAULT_OMEGA_VAC: f64 = 0.015;
const DEFAULT_GAMMA_Q: f64 = 2000.0;

struct Outcome {
    result: Value,
    tables: Vec<(String, String)>,
}

impl Outcome {
    fn json(result: Value) -> Self {
        Self { result, tables: Vec::new() }
    }
}

/// Resolved inputs shared by the scenarios.
struct Context<'a> {
    cfg: &'a RunConfig,
    file: ParamsFile,
    sp: SystemParams,
}

fn single<T: Copy>(name: &str, list: &[T]) -> Result<Option<T>> {
    match list {
        [] => Ok(None),
        [x] => Ok(Some(*x)),
        _ => Err(Error::InvalidParameter(format!("--{name} takes one value in this scenario"))),
    }
}

fn split_override(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::InvalidParameter(format!("override '{s}' is not KEY=VALUE")))
}

fn resolve(cfg: &RunConfig, list_valued_loops: bool) -> Result<Context<'_>> {
    let mut file = match &cfg.params {
        Some(path) => ParamsFile::from_json(&std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read params file {}: {e}", path.display()))
        })?)?,
        None => ParamsFile::default(),
    };
    for o in &cfg.overrides {
        let (k, v) = split_override(o)?;
        file.set(k, v)?;
    }
    if let Some(n) = cfg.num_qubits {
        file.num_qubits = Some(n);
    }
    if !list_valued_loops {
        if let Some(k) = single("k", &cfg.k)? {
            file.k = Some(k);
        }
        if let Some(n) = single("n", &cfg.n)? {
            file.n = Some(n);
        }
    }
    let sp = file.to_system()?;
    for w in sp.validate()? {
        log::warn!("{w}");
    }
    Ok(Context { cfg, file, sp })
}

fn tier(cfg: &RunConfig, default: Tier) -> Result<Tier> {
    cfg.tier.as_deref().map_or(Ok(default), str::parse)
}

fn t1_mode(cfg: &RunConfig) -> Result<T1Mode> {
    cfg.t1_mode.as_deref().map_or(Ok(T1Mode::default()), str::parse)
}

fn schedule_of(ctx: &Context) -> Result<GateSchedule> {
    let (k, n) = ctx.file.loop_indices();
    solve_schedule(&ctx.sp, ctx.sp.num_qubits, k, n, t1_mode(ctx.cfg)?)
}

fn options(ctx: &Context, sched: &GateSchedule) -> Result<GenerateOptions> {
    let integrator = match (&ctx.cfg.integrator, ctx.cfg.dt) {
        (None, None) => None,
        (m, dt) => {
            let method = m.as_deref().map_or(Ok(Method::Midpoint), str::parse::<Method>)?;
            Some(IntegratorConfig::new(method, dt.unwrap_or(sched.period / 500.0)))
        }
    };
    Ok(GenerateOptions { integrator, ..GenerateOptions::default() })
}

fn cavity_init(cfg: &RunConfig) -> Result<CavityInit> {
    match (single("nbar", &cfg.nbar)?, single("fock", &cfg.fock)?) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter("give --fock or --nbar, not both".into())),
        (Some(x), None) => Ok(CavityInit::Thermal(x)),
        (None, Some(n)) => Ok(CavityInit::Fock(n)),
        (None, None) => Ok(CavityInit::Fock(0)),
    }
}

fn gate(ctx: &Context) -> Result<Outcome> {
    let gamma = parse_angle(ctx.cfg.gamma.as_deref().unwrap_or("pi/8"))?;
    let n = ctx.sp.num_qubits;
    let u = ideal_collective_gate(n, gamma)?;
    let space = HilbertSpace::qubits(n)?;
    let out = apply(&u, &StateVector::basis(space, 0)?)?;
    let epr = if n == 2 {
        let mut v = CVector::zeros(4);
        v[0] = c(FRAC_1_SQRT_2, 0.0);
        v[3] = c(0.0, FRAC_1_SQRT_2);
        Some(fidelity(&out, &StateVector::new(space, v)?)?)
    } else {
        None
    };
    Ok(Outcome::json(json!({
        "scenario": "gate",
        "N": n,
        "gamma": gamma,
        "unitarity_error": u.unitarity_error(),
        "epr_fidelity": epr,
        "output_state": StateJson::from(&out),
    })))
}

fn schedule(ctx: &Context) -> Result<Outcome> {
    let (k, n_odd) = ctx.file.loop_indices();
    let n = ctx.sp.num_qubits;
    let mut modes = Vec::new();
    let mut solved = Vec::new();
    for mode in [T1Mode::Paper, T1Mode::Corrected] {
        let s = solve_schedule(&ctx.sp, n, k, n_odd, mode)?;
        let dist = operator_distance(&composite_cluster_unitary(&s)?, &cluster_phase_operator(n, s.gamma)?)?;
        modes.push(json!({ "schedule": s.to_json(), "composite_distance": dist }));
        solved.push(s);
    }
    Ok(Outcome::json(json!({
        "scenario": "schedule",
        "N": n,
        "delta": solved[0].delta,
        "T": solved[0].period,
        "gamma": solved[0].gamma,
        "t1_paper": solved[0].t1,
        "t1_corrected": solved[1].t1,
        "paper": modes[0],
        "corrected": modes[1],
    })))
}

fn cluster(ctx: &Context) -> Result<Outcome> {
    let sched = schedule_of(ctx)?;
    if ctx.cfg.noise {
        let t = tier(ctx.cfg, Tier::LambDicke)?;
        if t != Tier::LambDicke {
            return Err(Error::InvalidParameter("--noise runs the lamb_dicke tier only".into()));
        }
        if !ctx.cfg.fock.is_empty() || !ctx.cfg.nbar.is_empty() {
            return Err(Error::InvalidParameter("with --noise the cavity starts thermal at cavity_nbar; use --set".into()));
        }
        let noise = NoiseParams::from_file(&ctx.file, ctx.sp.cavity.omega_c)?;
        let lcfg = LindbladConfig {
            force: ctx.cfg.force_large,
            ..LindbladConfig::new(ctx.cfg.dt.unwrap_or(sched.period / 1000.0))
        };
        let o = generate_cluster_open(&ctx.sp, &sched, &noise, &lcfg)?;
        return Ok(Outcome::json(json!({
            "scenario": "cluster",
            "tier": t,
            "noise": {
                "Q": noise.q, "kappa": noise.kappa, "T_d": noise.qubit_t_d,
                "cavity_nbar": noise.cavity_nbar, "gamma_q": noise.gamma_q,
            },
            "schedule": sched.to_json(),
            "fidelity": o.fidelity,
            "infidelity_estimate": o.infidelity_estimate,
            "state": DensityJson::from(&o.state),
        })));
    }
    let t = tier(ctx.cfg, Tier::ClosedForm)?;
    let init = cavity_init(ctx.cfg)?;
    let o = generate_cluster_with(&ctx.sp, &sched, t, init, &options(ctx, &sched)?)?;
    let state = match &o.state {
        QubitState::Pure(s) => json!({ "pure": StateJson::from(s) }),
        QubitState::Mixed(r) => json!({ "mixed": DensityJson::from(r) }),
    };
    Ok(Outcome::json(json!({
        "scenario": "cluster",
        "tier": t,
        "cavity_init": init,
        "schedule": sched.to_json(),
        "fidelity": o.fidelity,
        "state": state,
    })))
}

fn phases(ctx: &Context) -> Result<Outcome> {
    let ks = if ctx.cfg.k.is_empty() { vec![ctx.file.k.unwrap_or(1)] } else { ctx.cfg.k.clone() };
    let ns = if ctx.cfg.n.is_empty() { vec![ctx.file.n.unwrap_or(0)] } else { ctx.cfg.n.clone() };
    let mut csv = String::from("k,n,gamma_total,gamma_g,gamma_d,loop_area\n");
    let mut rows = Vec::new();
    for &k in &ks {
        for &n in &ns {
            let sp = ctx.sp.with_detuning(detuning_for(ctx.sp.cavity.g, ctx.sp.qubit.e_j, k, n));
            let d = decompose_phases(&sp, k)?;
            let _ = writeln!(
                csv,
                "{k},{n},{:.16e},{:.16e},{:.16e},{:.16e}",
                d.gamma_total, d.gamma_g, d.gamma_d, d.loop_area
            );
            rows.push(json!({
                "k": k, "n": n, "delta": sp.drive.delta(),
                "expected_gamma": (2 * n + 1) as f64 * PI / 8.0,
                "decomposition": d,
            }));
        }
    }
    Ok(Outcome { result: json!({ "scenario": "phases", "rows": rows }), tables: vec![("phases.csv".into(), csv)] })
}

fn thermal(ctx: &Context) -> Result<Outcome> {
    let sched = schedule_of(ctx)?;
    let t = tier(ctx.cfg, Tier::LambDicke)?;
    let inputs = match (ctx.cfg.fock.is_empty(), ctx.cfg.nbar.is_empty()) {
        (false, false) => return Err(Error::InvalidParameter("give --fock or --nbar, not both".into())),
        (true, false) => ScanInputs::Thermal(ctx.cfg.nbar.clone()),
        (false, true) => ScanInputs::Fock(ctx.cfg.fock.clone()),
        (true, true) => ScanInputs::Fock(vec![0, 1, 2, 5]),
    };
    let table = thermal_insensitivity_scan(&ctx.sp, &sched, &inputs, t, &options(ctx, &sched)?)?;
    Ok(Outcome {
        result: json!({ "scenario": "thermal", "schedule": sched.to_json(), "scan": table }),
        tables: vec![("thermal.csv".into(), table.to_csv())],
    })
}

fn feasibility(ctx: &Context) -> Result<Outcome> {
    let (k, n) = ctx.file.loop_indices();
    let noise = NoiseParams::from_file(&ctx.file, ctx.sp.cavity.omega_c)?;
    let omega_vac = ctx
        .file
        .vacuum_rabi
        .as_ref()
        .map_or(Ok(DEFAULT_OMEGA_VAC), |q| q.canonical(Dimension::Frequency))?;
    let gamma_q = ctx.file.gamma_q.as_ref().map_or(Ok(DEFAULT_GAMMA_Q), |q| q.canonical(Dimension::Time))?;
    let r = feasibility_report(&ctx.sp, &noise, omega_vac, gamma_q, k, n)?;
    Ok(Outcome::json(json!({
        "scenario": "feasibility",
        "N": ctx.sp.num_qubits,
        "Omega": omega_vac,
        "gamma_q": gamma_q,
        "report": r,
    })))
}

fn mbqc(ctx: &Context) -> Result<Outcome> {
    let sched = schedule_of(ctx)?;
    let t = tier(ctx.cfg, Tier::Ideal)?;
    let o = generate_cluster_with(&ctx.sp, &sched, t, cavity_init(ctx.cfg)?, &options(ctx, &sched)?)?;
    let QubitState::Pure(state) = o.state else {
        return Err(Error::InvalidParameter(
            "measurements need a pure register state; use --tier ideal".into(),
        ));
    };
    let qubits = if ctx.cfg.measure.is_empty() { vec![0] } else { ctx.cfg.measure.clone() };
    let records = measure_sequence(&state, &qubits, ctx.cfg.seed)?;
    let rows: Vec<Value> = records
        .iter()
        .map(|r| json!({ "qubit": r.qubit, "outcome": r.outcome, "probability": r.probability }))
        .collect();
    let last = records.last().and_then(|r| r.post_state.as_ref()).unwrap_or(&state);
    Ok(Outcome::json(json!({
        "scenario": "mbqc",
        "tier": t,
        "seed": ctx.cfg.seed,
        "schedule": sched.to_json(),
        "cluster_fidelity": o.fidelity,
        "measurements": rows,
        "post_state": StateJson::from(last),
    })))
}

fn run_single(cfg: &RunConfig, scenario: Scenario) -> Result<Outcome> {
    let ctx = resolve(cfg, scenario == Scenario::Phases)?;
    match scenario {
        Scenario::Gate => gate(&ctx),
        Scenario::Schedule => schedule(&ctx),
        Scenario::Cluster => cluster(&ctx),
        Scenario::Phases => phases(&ctx),
        Scenario::Thermal => thermal(&ctx),
        Scenario::Feasibility => feasibility(&ctx),
        Scenario::Mbqc => mbqc(&ctx),
        Scenario::Sweep => unreachable!("sweeps are expanded by the caller"),
    }
}

fn write_outcome(out: &OutputDir, o: &Outcome) -> Result<()> {
    out.write_json("result.json", &o.result)?;
    for (name, body) in &o.tables {
        out.write(name, body.as_bytes())?;
    }
    Ok(())
}

/// `KEY=V1,V2,...` axes expanded to their cartesian product, first axis slowest.
fn sweep_points(axes: &[String]) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    if axes.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one --sweep KEY=V1,V2".into()));
    }
    let mut keys = Vec::new();
    let mut points: Vec<Vec<String>> = vec![Vec::new()];
    for a in axes {
        let (k, vs) = split_override(a)?;
        let values: Vec<&str> = vs.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(Error::InvalidParameter(format!("sweep axis '{k}' has no values")));
        }
        keys.push(k.to_string());
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.to_string());
                    q
                })
            })
            .collect();
    }
    Ok((keys, points))
}

fn sweep(cfg: &RunConfig, out: &OutputDir) -> Result<i32> {
    if cfg.inner == Scenario::Sweep {
        return Err(Error::InvalidParameter("sweeps do not nest".into()));
    }
    let (keys, points) = sweep_points(&cfg.sweep)?;
    // Every point is validated before any work starts.
    for values in &points {
        let mut file = ParamsFile::default();
        for (k, v) in keys.iter().zip(values) {
            file.set(k, v)?;
        }
    }
    let width = points.len().saturating_sub(1).to_string().len().max(3);
    let results: Vec<(String, OutputDir, Value, i32)> = points
        .par_iter()
        .enumerate()
        .map(|(i, values)| -> Result<_> {
            let name = format!("point_{i:0width$}");
            let child = out.child(&name)?;
            let mut point_cfg = cfg.with_scenario(cfg.inner);
            point_cfg.overrides.extend(keys.iter().zip(values).map(|(k, v)| format!("{k}={v}")));
            let (summary, code) = match run_single(&point_cfg, cfg.inner).and_then(|o| {
                write_outcome(&child, &o)?;
                Ok(o)
            }) {
                Ok(o) => (o.result.get("fidelity").cloned().unwrap_or(Value::Null), EXIT_OK),
                Err(e) => {
                    let code = exit_code(&e);
                    log::warn!("{name}: {e}");
                    child.write_json("error.json", &error_json(&e, code))?;
                    (Value::Null, code)
                }
            };
            let overrides: serde_json::Map<String, Value> =
                keys.iter().zip(values).map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            let row = json!({ "dir": name, "overrides": overrides, "exit_code": code, "fidelity": summary });
            Ok((name, child, row, code))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(results.len());
    let mut worst = EXIT_OK;
    for (name, child, row, code) in results {
        out.absorb(&name, child);
        rows.push(row);
        worst = worst.max(code);
    }
    out.write_json(
        "result.json",
        &json!({ "scenario": "sweep", "inner": cfg.inner, "axes": keys, "points": rows }),
    )?;
    Ok(worst)
}

/// Runs the configured scenario into `out` and returns the exit code.
pub(super) fn execute(cfg: &RunConfig, out: &OutputDir) -> Result<i32> {
    let scenario = cfg.scenario()?;
    if scenario == Scenario::Sweep {
        return sweep(cfg, out);
    }
    let o = run_single(cfg, scenario)?;
    write_outcome(out, &o)?;
    Ok(EXIT_OK)
}
