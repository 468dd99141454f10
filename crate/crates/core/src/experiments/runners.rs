use rand::Rng;
use serde_json::{json, Value};
use std::f64::consts::PI;

use super::format::fmt_f64;
use super::params::*;
use super::{ExperimentParams, Series};
use crate::baselines::{classify_distributed, gen_margin_instance};
use crate::circuits::presets::{preset_cos, preset_hadamard_ladder, preset_smooth, FourierCoeffs};
use crate::circuits::{DataEncoderSpec, ModelSpec};
use crate::error::{validation, Result};
use crate::expressivity::{
    enumerate_spectrum, hierarchical_phase_deviation, loglog_slope, predicted_frequency_count, predicted_separation_rank,
    separation_rank, spectrum_vs_grid, triangle_wave, universal_error_curve,
};
use crate::gradients::{calibrate, grad_expectation_e, grad_finite_diff, grad_param_shift, GradObservableKind, C_E};
use crate::linalg::{gaussian_vector, real_norm};
use crate::protocol::{dataparallel_prepare, run_inference, CommLedger, InferenceOptions, Partition};
use crate::rng::{SeedStream, SimRng};
use crate::training::{
    convergence_bounds, dpcd, stdft, stdgd, BoundMode, ConvexRegion, DpcdConfig, Schedule, StdftConfig, StdgdConfig, TrainRun,
};

pub(super) struct RunOutcome {
    pub results: Value,
    pub ledger: CommLedger,
    pub series: Option<Series>,
    pub events: String,
}

pub(super) fn run(params: &ExperimentParams, seed: u64) -> Result<RunOutcome> {
    let ss = SeedStream::new(seed);
    match params {
        ExperimentParams::Inference(p) => inference(p, ss),
        ExperimentParams::Gradcheck(p) => gradcheck(p, ss),
        ExperimentParams::Dpcd(p) => run_dpcd(p, ss),
        ExperimentParams::Stdgd(p) => run_stdgd(p, ss),
        ExperimentParams::Stdft(p) => run_stdft(p, ss),
        ExperimentParams::Linclass(p) => linclass(p, ss),
        ExperimentParams::Spectrum(p) => spectrum(p, ss),
        ExperimentParams::Seprank(p) => seprank(p, ss),
        ExperimentParams::Universal(p) => universal(p),
        ExperimentParams::Dataparallel(p) => dataparallel(p, ss),
    }
}

fn unit_vector(rng: &mut SimRng, len: usize) -> Vec<f64> {
    let v = gaussian_vector(rng, len);
    let n = real_norm(&v);
    v.into_iter().map(|a| a / n).collect()
}

fn random_angles(rng: &mut SimRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-PI..PI)).collect()
}

/// Random smooth model with amplitude-encoded random input and random angles.
fn smooth_instance(rng: &mut SimRng, n: usize, layers: usize, rotations: usize) -> Result<(ModelSpec, Vec<f64>, Vec<f64>)> {
    let (model, _) = preset_smooth(n, layers, rotations, rng)?;
    let x = unit_vector(rng, 1 << n);
    let params = random_angles(rng, model.n_params());
    Ok((model, x, params))
}

fn inference(p: &InferenceParams, ss: SeedStream) -> Result<RunOutcome> {
    let (model, x, params) = smooth_instance(&mut ss.stream(0), p.n_qubits, p.layers, p.rotations)?;
    let partition = Partition::standard(&model)?;
    let opts = InferenceOptions { shots: p.shots, share_result: p.share_result, traced: p.traced };
    let r = run_inference(&model, &partition, &params, &x, opts, &mut ss.stream(1))?;
    let events = r.ledger.trace_log();
    Ok(RunOutcome {
        results: json!({
            "estimate": r.estimate,
            "exact": r.exact,
            "abs_error": (r.estimate - r.exact).abs(),
            "shots": r.shots,
            "n_params": model.n_params(),
        }),
        ledger: r.ledger,
        series: None,
        events,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn gradcheck(p: &GradcheckParams, ss: SeedStream) -> Result<RunOutcome> {
    if p.max_qubits == 0 || p.max_layers == 0 || p.max_rotations == 0 {
        return Err(validation("instance size bounds must be positive"));
    }
    let c = calibrate(GradObservableKind::E)?;
    let mut series = Series::new(&["instance", "n_qubits", "layers", "rotations", "fd_vs_shift", "e_vs_shift"]);
    let mut ledger = CommLedger::new();
    let (mut worst_fd, mut worst_e): (f64, f64) = (0.0, 0.0);
    for i in 0..p.instances {
        let mut rng = ss.split(i as u64).stream(0);
        let n = rng.random_range(1..=p.max_qubits);
        let l = rng.random_range(1..=p.max_layers);
        let r = rng.random_range(1..=p.max_rotations);
        let (model, x, params) = smooth_instance(&mut rng, n, l, r)?;
        let shift = grad_param_shift(&model, &params, &x)?.dense();
        let fd = grad_finite_diff(&model, &params, &x, p.h)?.dense();
        let e = grad_expectation_e(&model, &params, &x)?;
        ledger.merge(&e.ledger);
        // grad_expectation_e divides by C_E; undo it and apply the fitted constant
        let e_fit: Vec<f64> = e.dense().iter().map(|v| v * C_E / c).collect();
        let (dfd, de) = (max_abs_diff(&fd, &shift), max_abs_diff(&e_fit, &shift));
        worst_fd = worst_fd.max(dfd);
        worst_e = worst_e.max(de);
        series.push(vec![i.to_string(), n.to_string(), l.to_string(), r.to_string(), fmt_f64(dfd), fmt_f64(de)]);
    }
    Ok(RunOutcome {
        results: json!({
            "instances": p.instances,
            "calibration_constant": c,
            "max_fd_vs_shift": worst_fd,
            "max_e_vs_shift": worst_e,
        }),
        ledger,
        series: Some(series),
        events: String::new(),
    })
}

fn trajectory_series(run: &TrainRun) -> Series {
    let mut s = Series::new(&["iteration", "loss", "cumulative_qubits", "cumulative_bits"]);
    for r in &run.trajectory {
        s.push(vec![r.iteration.to_string(), fmt_f64(r.loss), r.cumulative_qubits.to_string(), r.cumulative_bits.to_string()]);
    }
    s
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn run_dpcd(p: &DpcdParams, ss: SeedStream) -> Result<RunOutcome> {
    if p.repeats == 0 {
        return Err(validation("repeats must be at least 1"));
    }
    let model = preset_cos(p.layers)?;
    let partition = Partition::standard(&model)?;
    let g = model.beta().norm1;
    let t = match p.iterations {
        Some(t) => t,
        None => convergence_bounds(p.radius, g, p.eps0, BoundMode::Convex)? as usize,
    };
    let schedule = match p.eta {
        Some(eta) => Schedule::Constant { eta },
        None => Schedule::convex_default(p.radius, g, t),
    };
    let region = ConvexRegion { low: vec![PI - p.radius], high: vec![PI + p.radius] };
    let config = DpcdConfig { schedule: schedule.clone(), iterations: t, region: Some(region) };
    let mut ledger = CommLedger::new();
    let mut subopt = Vec::with_capacity(p.repeats);
    let mut exits = 0;
    let mut first = None;
    for r in 0..p.repeats {
        let run = dpcd(&model, &partition, &[p.theta0], &[], &config, ss.split(r as u64).seed())?;
        subopt.push(model.loss(&run.uniform_average(), &[])? + 1.0);
        exits += run.region_exits;
        ledger.merge(&run.ledger);
        first.get_or_insert(run);
    }
    let first = first.expect("at least one repeat");
    Ok(RunOutcome {
        results: json!({
            "iterations": t,
            "schedule": schedule,
            "beta_norm1": g,
            "suboptimality": subopt,
            "mean_suboptimality": mean(&subopt),
            "target": p.eps0,
            "region_exits": exits,
            "final_params": first.final_params(),
        }),
        ledger,
        series: Some(trajectory_series(&first)),
        events: first.to_json_lines()?,
    })
}

fn run_stdgd(p: &StdgdParams, ss: SeedStream) -> Result<RunOutcome> {
    let (model, x, params0) = match p.model {
        ModelChoice::Cos => (preset_cos(p.layers)?, vec![], vec![p.theta0]),
        ModelChoice::Smooth => smooth_instance(&mut ss.stream(0), p.n_qubits, p.layers, p.rotations)?,
    };
    let partition = Partition::standard(&model)?;
    let config = StdgdConfig { schedule: Schedule::Constant { eta: p.eta }, iterations: p.iterations, eps: p.eps, delta: p.delta };
    let run = stdgd(&model, &partition, &params0, &x, &config, ss.split(1).seed())?;
    let losses: Vec<f64> = run.trajectory.iter().map(|r| r.loss).collect();
    let decreasing = losses.windows(2).filter(|w| w[1] < w[0]).count();
    Ok(RunOutcome {
        results: json!({
            "initial_loss": losses[0],
            "final_loss": losses[losses.len() - 1],
            "decreasing_steps": decreasing,
            "iterations": p.iterations,
            "final_params": run.final_params(),
        }),
        ledger: run.ledger.clone(),
        series: Some(trajectory_series(&run)),
        events: run.to_json_lines()?,
    })
}

fn run_stdft(p: &StdftParams, ss: SeedStream) -> Result<RunOutcome> {
    if p.repeats == 0 {
        return Err(validation("repeats must be at least 1"));
    }
    let model = preset_cos(p.layers)?;
    let partition = Partition::standard(&model)?;
    let t = match p.iterations {
        Some(t) => t,
        None => convergence_bounds(0.0, p.g, p.eps0, BoundMode::StronglyConvex { lambda: p.lambda })? as usize,
    };
    let config = StdftConfig {
        schedule: Schedule::StronglyConvex { lambda: p.lambda },
        iterations: t,
        eps: p.eps.unwrap_or(p.eps0),
        delta: p.delta,
        pool_size: p.pool_size,
    };
    let mut ledger = CommLedger::new();
    let mut subopt = Vec::with_capacity(p.repeats);
    let mut first = None;
    for r in 0..p.repeats {
        let run = stdft(&model, &partition, &[p.theta0], &[], &config, ss.split(r as u64).seed())?;
        subopt.push(model.loss(&run.strongly_convex_average(), &[])? + 1.0);
        ledger.merge(&run.ledger);
        first.get_or_insert(run);
    }
    let first = first.expect("at least one repeat");
    Ok(RunOutcome {
        results: json!({
            "iterations": t,
            "suboptimality": subopt,
            "mean_suboptimality": mean(&subopt),
            "target": p.eps0,
            "pool_size": first.ledger.theoretical_counters.get("pool_size"),
            "final_params": first.final_params(),
        }),
        ledger,
        series: Some(trajectory_series(&first)),
        events: first.to_json_lines()?,
    })
}

fn linclass(p: &LinclassParams, ss: SeedStream) -> Result<RunOutcome> {
    if p.trials == 0 {
        return Err(validation("trials must be at least 1"));
    }
    let mut successes = 0;
    let mut half_margin = 0;
    let mut first_ledger = None;
    let mut k = 0;
    for t in 0..p.trials {
        let mut rng = ss.split(t as u64).stream(0);
        let label = if t % 2 == 0 { 1 } else { -1 };
        let inst = gen_margin_instance(p.n, p.gamma, label, &mut rng)?;
        let out = classify_distributed(&inst, p.gamma, p.c, p.bits_per_coord, &mut rng)?;
        if out.predicted == inst.label {
            successes += 1;
            if out.sketch_product.abs() >= p.gamma / 2.0 {
                half_margin += 1;
            }
        }
        k = out.k;
        first_ledger.get_or_insert(out.ledger);
    }
    let ledger = first_ledger.unwrap_or_default();
    let rate = successes as f64 / p.trials as f64;
    let mut series = Series::new(&["n", "gamma", "k", "bits", "trials", "success_rate"]);
    series.push(vec![
        p.n.to_string(),
        fmt_f64(p.gamma),
        k.to_string(),
        ledger.classical_bits.to_string(),
        p.trials.to_string(),
        fmt_f64(rate),
    ]);
    Ok(RunOutcome {
        results: json!({
            "n": p.n,
            "gamma": p.gamma,
            "k": k,
            "bits_per_run": ledger.classical_bits,
            "trials": p.trials,
            "successes": successes,
            "success_rate": rate,
            "successes_beyond_half_margin": half_margin,
        }),
        ledger,
        series: Some(series),
        events: String::new(),
    })
}

fn uniform_lambdas(rng: &mut SimRng, n_prime: usize, layers: usize) -> Vec<Vec<f64>> {
    (0..layers).map(|_| (0..n_prime).map(|_| rng.random::<f64>()).collect()).collect()
}

fn spectrum(p: &SpectrumParams, ss: SeedStream) -> Result<RunOutcome> {
    let lam = uniform_lambdas(&mut ss.stream(0), p.n_prime, p.layers);
    let table = enumerate_spectrum(p.n_prime, &lam)?;
    let model = preset_hadamard_ladder(p.n_prime, &lam, false)?;
    let deviation = spectrum_vs_grid(&model, &table, p.grid_points)?;
    let predicted = predicted_frequency_count(p.n_prime, p.layers);
    let mags: Vec<f64> = table.entries.iter().map(|e| e.cos.abs()).collect();
    let mut series = Series::new(&["n_prime", "layers", "predicted_count", "measured_count"]);
    series.push(vec![p.n_prime.to_string(), p.layers.to_string(), predicted.to_string(), table.len().to_string()]);
    Ok(RunOutcome {
        results: json!({
            "lambdas": lam,
            "predicted_count": predicted,
            "measured_count": table.len(),
            "matches_prediction": predicted == table.len() as u64,
            "max_grid_deviation": deviation,
            "min_abs_coefficient": mags.iter().copied().fold(f64::INFINITY, f64::min),
            "max_abs_coefficient": mags.iter().copied().fold(0.0, f64::max),
            "table": table,
        }),
        ledger: CommLedger::new(),
        series: Some(series),
        events: String::new(),
    })
}

fn seprank(p: &SeprankParams, ss: SeedStream) -> Result<RunOutcome> {
    let lam = uniform_lambdas(&mut ss.stream(0), p.n_prime, p.layers);
    let model = preset_hadamard_ladder(p.n_prime, &lam, true)?;
    let coarse = separation_rank(&model, p.grid, p.grid, p.threshold)?;
    let fine = separation_rank(&model, p.refined_grid, p.refined_grid, p.threshold)?;
    let predicted = predicted_separation_rank(p.n_prime, p.layers);
    let mut series = Series::new(&["grid", "rank", "predicted_rank"]);
    for r in [&coarse, &fine] {
        series.push(vec![r.grid_y.to_string(), r.rank.to_string(), predicted.to_string()]);
    }
    Ok(RunOutcome {
        results: json!({
            "lambdas": lam,
            "predicted_rank": predicted,
            "rank": coarse.rank,
            "refined_rank": fine.rank,
            "stable": coarse.rank == fine.rank,
            "singular_values": coarse.singular_values,
        }),
        ledger: CommLedger::new(),
        series: Some(series),
        events: String::new(),
    })
}

fn universal(p: &UniversalParams) -> Result<RunOutcome> {
    let points = match &p.function {
        TargetFunction::Triangle => universal_error_curve(&triangle_wave, &p.ms, p.grid, p.quadrature)?,
        TargetFunction::TrigPoly { cos, sin } => {
            if cos.len() != sin.len() {
                return Err(validation("cos and sin coefficient lists differ in length"));
            }
            let f = FourierCoeffs { cos: cos.clone(), sin: sin.clone() };
            universal_error_curve(&|x| f.eval(x), &p.ms, p.grid, p.quadrature)?
        }
    };
    let mut series = Series::new(&["m", "sup_error"]);
    let mut hier = Vec::with_capacity(p.ms.len());
    for pt in &points {
        series.push(vec![pt.m.to_string(), fmt_f64(pt.sup_error)]);
        if pt.m >= 2 {
            hier.push(hierarchical_phase_deviation(pt.m, &[0.0, 0.13, 0.5, 0.77])?);
        }
    }
    let slope = if points.len() >= 2 { Some(loglog_slope(&points)) } else { None };
    let decreasing = points.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    Ok(RunOutcome {
        results: json!({
            "points": points,
            "loglog_slope": slope,
            "strictly_decreasing": decreasing,
            "max_hierarchical_deviation": hier.iter().copied().fold(0.0, f64::max),
        }),
        ledger: CommLedger::new(),
        series: Some(series),
        events: String::new(),
    })
}

fn dataparallel(p: &DataparallelParams, ss: SeedStream) -> Result<RunOutcome> {
    if p.rows < 2 || !p.rows.is_multiple_of(2) {
        return Err(validation("need an even number of rows"));
    }
    let x = unit_vector(&mut ss.stream(0), p.rows * p.cols);
    let (x_a, x_b) = x.split_at(x.len() / 2);
    let (state, ledger) = dataparallel_prepare(x_a, x_b, p.cols)?;
    let n = (p.rows * p.cols).trailing_zeros() as usize;
    let direct = DataEncoderSpec::Amplitude.encode(n, &x)?;
    Ok(RunOutcome {
        results: json!({
            "rows": p.rows,
            "cols": p.cols,
            "register_qubits": n,
            "fidelity_to_direct_encoding": state.fidelity(&direct),
        }),
        ledger,
        series: None,
        events: String::new(),
    })
}
