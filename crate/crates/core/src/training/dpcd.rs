use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AliasSampler, ConvexRegion, Schedule, TrainRecord, TrainRun, UpdateRecord};
use crate::circuits::{ModelSpec, Side};
use crate::error::{validation, Result};
use crate::gradients::{GradObservable, C_E_HAT};
use crate::protocol::{self, charge_passes, CommLedger, Partition, Party};
use crate::rng::SeedStream;
use crate::statevec::draw_pm;

/// Bits used to send `‖β_A‖₁` once at setup (64-bit fixed point).
pub const NORM_EXCHANGE_BITS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpcdConfig {
    pub schedule: Schedule,
    pub iterations: usize,
    #[serde(default)]
    pub region: Option<ConvexRegion>,
}

/// One coordinate-descent draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcdDraw {
    pub side: Side,
    pub slot: usize,
    pub outcome: i8,
    /// Value of the one-hot gradient estimate at `slot`:
    /// `sign(β)·‖β‖₁·m / C_Ê`.
    pub value: f64,
}

/// Sampling machinery for one parameter point: Bob's side coin, each
/// owner's alias table over `|β|`, and lazily computed `⟨Ê⟩` per slot.
pub struct DpcdSampler<'a> {
    model: &'a ModelSpec,
    params: &'a [f64],
    x: &'a [f64],
    beta: Vec<f64>,
    norm1: f64,
    p_side_a: f64,
    side_slots: [(Vec<usize>, Option<AliasSampler>); 2],
    e_hat: Vec<Option<f64>>,
}

impl<'a> DpcdSampler<'a> {
    pub fn new(model: &'a ModelSpec, params: &'a [f64], x: &'a [f64]) -> Result<Self> {
        model.validate()?;
        if params.len() != model.n_params() {
            return Err(validation("parameter count does not match the model"));
        }
        let beta = model.beta();
        if beta.is_empty() || !(beta.norm1 > 0.0) {
            return Err(validation("coordinate descent needs rotation slots with nonzero coefficients"));
        }
        let table = |side: Side| -> Result<(Vec<usize>, Option<AliasSampler>)> {
            let slots = model.slots_of(side);
            let w: Vec<f64> = slots.iter().map(|&s| beta.entries[s].abs()).collect();
            let sampler = if w.iter().sum::<f64>() > 0.0 { Some(AliasSampler::new(&w)?) } else { None };
            Ok((slots, sampler))
        };
        let side_a = table(Side::A)?;
        let side_b = table(Side::B)?;
        let norm_a: f64 = side_a.0.iter().map(|&s| beta.entries[s].abs()).sum();
        Ok(Self {
            model,
            params,
            x,
            p_side_a: norm_a / beta.norm1,
            norm1: beta.norm1,
            e_hat: vec![None; beta.len()],
            beta: beta.entries,
            side_slots: [side_a, side_b],
        })
    }

    pub fn norm1(&self) -> f64 {
        self.norm1
    }

    /// Exact `⟨Ê⟩` of `slot` on its feature state.
    pub fn e_hat_expectation(&mut self, slot: usize) -> Result<f64> {
        if let Some(v) = self.e_hat[slot] {
            return Ok(v);
        }
        let obs = GradObservable::e_hat(self.model, slot)?;
        let cut = self.model.gate_position(obs.target.side, obs.target.layer, obs.target.gate_cut)?;
        let state = protocol::feature_state_at(self.model, self.params, self.x, cut)?;
        let v = obs.expectation(&state)?;
        self.e_hat[slot] = Some(v);
        Ok(v)
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<DpcdDraw> {
        let side = if rng.random::<f64>() < self.p_side_a { Side::A } else { Side::B };
        let (slots, sampler) = &self.side_slots[usize::from(side == Side::B)];
        let sampler = sampler.as_ref().expect("a side with zero weight is never drawn");
        let slot = slots[sampler.sample(rng)];
        let e = self.e_hat_expectation(slot)?;
        let outcome = draw_pm(e, 1, rng)[0];
        let value = self.beta[slot].signum() * self.norm1 * f64::from(outcome) / C_E_HAT;
        Ok(DpcdDraw { side, slot, outcome, value })
    }
}

/// Distributed probabilistic coordinate descent.
///
/// Setup: Alice sends `‖β_A‖₁` to Bob (64 bits). Each iteration Bob draws
/// the side with probability `‖β_Q‖₁/‖β‖₁` and announces it (1 bit), the
/// owner draws a slot with probability `∝ |β|`, a feature-state copy is
/// prepared (`2L` messages of `n + 1` qubits), `Ê` is measured once and
/// `θ_slot ← θ_slot − η_t·sign(β)‖β‖₁·m/C_Ê`. The update is an unbiased
/// estimate of `−η_t∇ℒ` with norm `η_t‖β‖₁`.
pub fn dpcd(model: &ModelSpec, partition: &Partition, params0: &[f64], x: &[f64], config: &DpcdConfig, seed: u64) -> Result<TrainRun> {
    let _ = partition;
    config.schedule.check(config.iterations)?;
    // Validates the model and the coefficient vector.
    DpcdSampler::new(model, params0, x)?;
    let mut rng = SeedStream::new(seed).stream(0);
    let mut ledger = CommLedger::new();
    ledger.send_bits(Party::Alice, NORM_EXCHANGE_BITS);

    let mut params = params0.to_vec();
    let mut trajectory = Vec::with_capacity(config.iterations + 1);
    trajectory.push(record(model, 0, &params, x, UpdateRecord::Initial, &ledger)?);
    let mut region_exits = 0;
    for t in 1..=config.iterations {
        let eta = config.schedule.eta(t);
        ledger.send_bits(Party::Bob, 1);
        charge_passes(&mut ledger, model.n_layers(), model.n_qubits + 1, 1);
        let d = DpcdSampler::new(model, &params, x)?.draw(&mut rng)?;
        let delta = -eta * d.value;
        params[d.slot] += delta;
        if let Some(region) = &config.region {
            if !region.contains(&params) {
                region_exits += 1;
            }
        }
        let upd = UpdateRecord::Sparse { side: d.side, slot: d.slot, outcome: d.outcome, delta };
        trajectory.push(record(model, t, &params, x, upd, &ledger)?);
    }
    Ok(TrainRun { trajectory, ledger, seed, schedule: config.schedule.steps(config.iterations), region_exits })
}

pub(super) fn record(model: &ModelSpec, t: usize, params: &[f64], x: &[f64], update: UpdateRecord, ledger: &CommLedger) -> Result<TrainRecord> {
    Ok(TrainRecord {
        iteration: t,
        params: params.to_vec(),
        loss: model.loss_unchecked(params, x)?,
        update,
        cumulative_qubits: ledger.qubits_sent,
        cumulative_bits: ledger.classical_bits,
    })
}
