use serde::{Deserialize, Serialize};

use super::dpcd::record;
use super::{Schedule, TrainRun, UpdateRecord};
use crate::circuits::{ModelSpec, Side};
use crate::error::{validation, Error, Result};
use crate::gradients::{fine_tune_observable, hoeffding_shots, shadow_copies_theory};
use crate::protocol::{prepare_last_layer_state, Partition};
use crate::rng::SeedStream;
use crate::statevec::draw_pm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdftConfig {
    pub schedule: Schedule,
    pub iterations: usize,
    pub eps: f64,
    pub delta: f64,
    /// Overrides the computed pool size (for exhaustion tests).
    #[serde(default)]
    pub pool_size: Option<u64>,
}

/// Copies of `|+⟩|μ_L⟩` shipped to Alice before training starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyPool {
    pub size: u64,
    pub remaining: u64,
}

impl CopyPool {
    pub fn new(size: u64) -> Self {
        Self { size, remaining: size }
    }

    pub fn take(&mut self, k: u64) -> Result<()> {
        if k > self.remaining {
            return Err(Error::PoolExhausted { requested: k as usize, remaining: self.remaining as usize });
        }
        self.remaining -= k;
        Ok(())
    }
}

/// Fine-tunes the last `A` layer with every other parameter frozen.
///
/// `μ_L` does not depend on the trainable parameters, so one pool of
/// `⌈2 ln(4PT/δ)/ε²⌉ · P · T` copies, prepared before iteration 1, serves all
/// `P·T` observable estimates; no quantum communication happens afterwards.
/// Each iteration spends `⌈2 ln(4PT/δ)/ε²⌉` copies per trainable slot on the
/// normalized `Ẽ` observable at the current parameters.
pub fn stdft(model: &ModelSpec, partition: &Partition, params0: &[f64], x: &[f64], config: &StdftConfig, seed: u64) -> Result<TrainRun> {
    let _ = partition;
    config.schedule.check(config.iterations)?;
    model.validate()?;
    if params0.len() != model.n_params() {
        return Err(validation("parameter count does not match the model"));
    }
    let last = model.n_layers() - 1;
    let trainable: Vec<usize> = model
        .slots_of(Side::A)
        .into_iter()
        .filter(|&s| model.param_layout[s].layer == last)
        .collect();
    if trainable.is_empty() {
        return Err(validation("fine-tuning needs rotation slots in the last A layer"));
    }
    let p = trainable.len();
    let t_total = config.iterations;
    let shots = if t_total == 0 { 0 } else { hoeffding_shots(2 * p * t_total, config.eps, config.delta)? };
    let mut pool = CopyPool::new(config.pool_size.unwrap_or(shots * (p * t_total) as u64));
    let (state, mut ledger) = prepare_last_layer_state(model, params0, x, pool.size)?;
    if t_total > 0 {
        ledger.set_counter("k_theory", shadow_copies_theory(p * t_total, model.dim(), 1, config.eps, config.delta));
    }
    ledger.set_counter("pool_size", pool.size as f64);

    let mut rng = SeedStream::new(seed).stream(0);
    let mut params = params0.to_vec();
    let mut trajectory = vec![record(model, 0, &params, x, UpdateRecord::Initial, &ledger)?];
    for t in 1..=t_total {
        let eta = config.schedule.eta(t);
        let mut g = vec![0.0; params.len()];
        for &slot in &trainable {
            pool.take(shots)?;
            let beta = model.param_layout[slot].coefficient;
            if beta == 0.0 {
                continue;
            }
            let obs = fine_tune_observable(model, &params, x, slot)?.normalized()?;
            let e = obs.expectation(&state)?;
            let mean = draw_pm(e, shots as usize, &mut rng).iter().map(|&m| f64::from(m)).sum::<f64>() / shots as f64;
            g[slot] = beta.abs() * mean;
        }
        for (pp, gi) in params.iter_mut().zip(&g) {
            *pp -= eta * gi;
        }
        trajectory.push(record(model, t, &params, x, UpdateRecord::Dense { gradient: g, eta }, &ledger)?);
    }
    ledger.set_counter("pool_remaining", pool.remaining as f64);
    Ok(TrainRun { trajectory, ledger, seed, schedule: config.schedule.steps(t_total), region_exits: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::presets::preset_cos;

    fn cfg(iterations: usize, pool_size: Option<u64>) -> StdftConfig {
        StdftConfig { schedule: Schedule::StronglyConvex { lambda: 0.8 }, iterations, eps: 0.1, delta: 0.05, pool_size }
    }

    #[test]
    fn zero_iterations_consume_nothing() {
        let m = preset_cos(2).unwrap();
        let p = Partition::standard(&m).unwrap();
        let run = stdft(&m, &p, &[3.0], &[], &cfg(0, None), 1).unwrap();
        assert_eq!(run.ledger.quantum_messages, 0);
        assert_eq!(run.ledger.theoretical_counters["pool_size"], 0.0);
    }

    #[test]
    fn communication_only_before_first_iteration() {
        let m = preset_cos(3).unwrap();
        let p = Partition::standard(&m).unwrap();
        let run = stdft(&m, &p, &[3.0], &[], &cfg(5, None), 1).unwrap();
        let q0 = run.trajectory[0].cumulative_qubits;
        assert!(q0 > 0);
        assert!(run.trajectory.iter().all(|r| r.cumulative_qubits == q0));
        assert_eq!(run.ledger.qubits_sent, q0);
        assert_eq!(run.ledger.theoretical_counters["pool_remaining"], 0.0);
    }

    #[test]
    fn exhausted_pool_is_an_error() {
        let m = preset_cos(1).unwrap();
        let p = Partition::standard(&m).unwrap();
        let err = stdft(&m, &p, &[3.0], &[], &cfg(3, Some(10)), 1).unwrap_err();
        assert_eq!(err.code(), "pool_exhausted");
    }

    #[test]
    fn needs_last_layer_slots() {
        let mut m = preset_cos(1).unwrap();
        m.layers[0].b_unitary = m.layers[0].a_unitary.clone();
        m.layers[0].a_unitary = crate::statevec::UnitarySpec::identity();
        m.param_layout[0].side = Side::B;
        let p = Partition::standard(&m).unwrap();
        assert!(stdft(&m, &p, &[3.0], &[], &cfg(3, None), 1).is_err());
    }
}
