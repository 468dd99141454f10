use serde::{Deserialize, Serialize};

use super::dpcd::record;
use super::{Schedule, TrainRun, UpdateRecord};
use crate::circuits::ModelSpec;
use crate::error::{validation, Result};
use crate::gradients::{estimate_grad_budget, grad_param_shift};
use crate::protocol::{CommLedger, Partition};
use crate::rng::SeedStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdgdConfig {
    pub schedule: Schedule,
    pub iterations: usize,
    /// L∞ accuracy per gradient; `0` switches to exact parameter-shift
    /// gradients with no communication charged.
    pub eps: f64,
    pub delta: f64,
}

/// Gradient descent where every iteration estimates the full gradient with
/// [`estimate_grad_budget`] and applies `Θ ← Θ − η_t g`.
pub fn stdgd(model: &ModelSpec, partition: &Partition, params0: &[f64], x: &[f64], config: &StdgdConfig, seed: u64) -> Result<TrainRun> {
    let _ = partition;
    config.schedule.check(config.iterations)?;
    model.validate()?;
    if params0.len() != model.n_params() {
        return Err(validation("parameter count does not match the model"));
    }
    if config.eps < 0.0 {
        return Err(validation("ε must be non-negative"));
    }
    let mut rng = SeedStream::new(seed).stream(0);
    let mut ledger = CommLedger::new();
    let mut params = params0.to_vec();
    let mut trajectory = vec![record(model, 0, &params, x, UpdateRecord::Initial, &ledger)?];
    for t in 1..=config.iterations {
        let eta = config.schedule.eta(t);
        let g = if config.eps == 0.0 {
            grad_param_shift(model, &params, x)?.dense()
        } else {
            let b = estimate_grad_budget(model, &params, x, config.eps, config.delta, &mut rng)?;
            ledger.merge(&b.estimate.ledger);
            b.estimate.dense()
        };
        for (p, gi) in params.iter_mut().zip(&g) {
            *p -= eta * gi;
        }
        trajectory.push(record(model, t, &params, x, UpdateRecord::Dense { gradient: g, eta }, &ledger)?);
    }
    Ok(TrainRun { trajectory, ledger, seed, schedule: config.schedule.steps(config.iterations), region_exits: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::presets::{preset_cos, preset_smooth};
    use crate::gradients::hoeffding_shots;
    use crate::rng::seeded;

    #[test]
    fn zero_iterations_is_a_no_op() {
        let m = preset_cos(1).unwrap();
        let p = Partition::standard(&m).unwrap();
        let cfg = StdgdConfig { schedule: Schedule::Constant { eta: 0.1 }, iterations: 0, eps: 0.1, delta: 0.05 };
        let run = stdgd(&m, &p, &[2.0], &[], &cfg, 1).unwrap();
        assert_eq!(run.trajectory.len(), 1);
        assert_eq!(run.final_params(), [2.0]);
        assert!(run.ledger.is_empty());
    }

    #[test]
    fn exact_mode_matches_reference_descent_bitwise() {
        let mut rng = seeded(17);
        let (m, _) = preset_smooth(3, 2, 3, &mut rng).unwrap();
        let p = Partition::standard(&m).unwrap();
        let x = [0.5, 0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0];
        let p0: Vec<f64> = (0..m.n_params()).map(|i| 0.1 * i as f64).collect();
        let cfg = StdgdConfig { schedule: Schedule::Constant { eta: 0.2 }, iterations: 15, eps: 0.0, delta: 0.05 };
        let run = stdgd(&m, &p, &p0, &x, &cfg, 1).unwrap();
        let mut reference = p0.clone();
        for t in 1..=15 {
            let g = grad_param_shift(&m, &reference, &x).unwrap().dense();
            for (r, gi) in reference.iter_mut().zip(&g) {
                *r -= 0.2 * gi;
            }
            assert_eq!(run.trajectory[t].params, reference);
        }
    }

    #[test]
    fn ledger_is_iterations_times_closed_form() {
        let mut rng = seeded(18);
        let (m, _) = preset_smooth(2, 2, 2, &mut rng).unwrap();
        let p = Partition::standard(&m).unwrap();
        let cfg = StdgdConfig { schedule: Schedule::Constant { eta: 0.1 }, iterations: 3, eps: 0.2, delta: 0.1 };
        let run = stdgd(&m, &p, &[0.0; 8], &[0.5; 4], &cfg, 2).unwrap();
        let shots = hoeffding_shots(8, 0.2, 0.1).unwrap();
        assert_eq!(run.ledger.qubits_sent, 3 * shots * 8 * 4 * 3);
    }
}
