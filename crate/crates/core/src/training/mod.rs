//! Distributed training loops and their convergence-bound calculators.
//!
//! * [`dpcd`]: coordinate descent driven by one ±1 measurement per step.
//! * [`stdgd`]: gradient descent with full shot-budget gradient estimates.
//! * [`stdft`]: fine-tuning of the last `A` layer from a pre-shared pool of
//!   state copies.

mod alias;
mod dpcd;
mod stdft;
mod stdgd;

pub use alias::AliasSampler;
pub use dpcd::{dpcd, DpcdConfig, DpcdDraw, DpcdSampler};
pub use stdft::{stdft, CopyPool, StdftConfig};
pub use stdgd::{stdgd, StdgdConfig};

use serde::{Deserialize, Serialize};

use crate::circuits::Side;
use crate::error::{validation, Result};
use crate::protocol::CommLedger;
use crate::tolerance::ceil_robust;

/// Step-size rule, indexed by iteration `t = 1, …, T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant { eta: f64 },
    /// `η_t = 2/(λ(t+1))`.
    StronglyConvex { lambda: f64 },
    Explicit { steps: Vec<f64> },
}

impl Schedule {
    /// `η = (R/G)√(2/T)`, the fixed step for convex objectives.
    pub fn convex_default(r: f64, g: f64, iterations: usize) -> Schedule {
        Schedule::Constant { eta: r / g * (2.0 / iterations.max(1) as f64).sqrt() }
    }

    pub fn eta(&self, t: usize) -> f64 {
        match self {
            Schedule::Constant { eta } => *eta,
            Schedule::StronglyConvex { lambda } => 2.0 / (lambda * (t as f64 + 1.0)),
            Schedule::Explicit { steps } => steps.get(t - 1).copied().unwrap_or(0.0),
        }
    }

    pub fn steps(&self, iterations: usize) -> Vec<f64> {
        (1..=iterations).map(|t| self.eta(t)).collect()
    }

    fn check(&self, iterations: usize) -> Result<()> {
        match self {
            Schedule::StronglyConvex { lambda } if !(*lambda > 0.0) => Err(validation("λ must be positive")),
            Schedule::Explicit { steps } if steps.len() < iterations => {
                Err(validation("explicit schedule is shorter than the iteration count"))
            }
            _ => Ok(()),
        }
    }
}

/// What happened in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpdateRecord {
    Initial,
    Sparse { side: Side, slot: usize, outcome: i8, delta: f64 },
    Dense { gradient: Vec<f64>, eta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub loss: f64,
    pub update: UpdateRecord,
    pub cumulative_qubits: u64,
    pub cumulative_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    /// `T + 1` records; record 0 holds the initial parameters.
    pub trajectory: Vec<TrainRecord>,
    pub ledger: CommLedger,
    pub seed: u64,
    pub schedule: Vec<f64>,
    /// Iterations whose parameters left the declared convex region.
    pub region_exits: usize,
}

impl TrainRun {
    pub fn final_params(&self) -> &[f64] {
        &self.trajectory.last().expect("trajectory holds the initial record").params
    }

    /// Uniform average of `Θ⁽¹⁾, …, Θ⁽ᵀ⁾` (the initial point when `T = 0`).
    pub fn uniform_average(&self) -> Vec<f64> {
        self.weighted_average(|_, _| 1.0)
    }

    /// `Σ_t 2t/(T(T+1)) Θ⁽ᵗ⁾`, the strongly-convex averaging.
    pub fn strongly_convex_average(&self) -> Vec<f64> {
        self.weighted_average(|t, _| t as f64)
    }

    fn weighted_average(&self, w: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let t_max = self.trajectory.len() - 1;
        if t_max == 0 {
            return self.trajectory[0].params.clone();
        }
        let mut acc = vec![0.0; self.trajectory[0].params.len()];
        let mut total = 0.0;
        for rec in &self.trajectory[1..] {
            let wt = w(rec.iteration, t_max);
            total += wt;
            acc.iter_mut().zip(&rec.params).for_each(|(a, p)| *a += wt * p);
        }
        acc.iter().map(|a| a / total).collect()
    }

    /// `(iteration, loss, cumulative qubits)` rows.
    pub fn series(&self) -> Vec<(usize, f64, u64)> {
        self.trajectory.iter().map(|r| (r.iteration, r.loss, r.cumulative_qubits)).collect()
    }

    /// One JSON object per iteration.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.trajectory {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Axis-aligned box of parameters on which the toy loss is convex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexRegion {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl ConvexRegion {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(&self.low).zip(&self.high).all(|((v, lo), hi)| lo <= v && v <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundMode {
    Convex,
    StronglyConvex { lambda: f64 },
}

/// Iterations after which projected SGD with gradient bound `G` reaches
/// suboptimality `ε₀`: `⌈2R²G²/ε₀²⌉` (convex) or `⌈2G²/(λε₀)⌉ + 1`
/// (λ-strongly convex; `R` unused). For coordinate descent `G = ‖β‖₁`.
pub fn convergence_bounds(r: f64, g: f64, eps0: f64, mode: BoundMode) -> Result<u64> {
    if !(g > 0.0) || !(eps0 > 0.0) {
        return Err(validation("G and ε₀ must be positive"));
    }
    match mode {
        BoundMode::Convex => {
            if !(r > 0.0) {
                return Err(validation("R must be positive"));
            }
            Ok(ceil_robust(2.0 * r * r * g * g / (eps0 * eps0)) as u64)
        }
        BoundMode::StronglyConvex { lambda } => {
            if !(lambda > 0.0) {
                return Err(validation("λ must be positive"));
            }
            Ok(ceil_robust(2.0 * g * g / (lambda * eps0)) as u64 + 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexInstanceReport {
    pub r: f64,
    pub beta_norm1: f64,
    pub eps0: f64,
    pub t_bound: u64,
}

impl ConvexInstanceReport {
    pub fn new(r: f64, beta_norm1: f64, eps0: f64) -> Result<Self> {
        let t_bound = convergence_bounds(r, beta_norm1, eps0, BoundMode::Convex)?;
        Ok(Self { r, beta_norm1, eps0, t_bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        assert_eq!(convergence_bounds(1.0, 2.0, 0.1, BoundMode::Convex).unwrap(), 800);
        assert_eq!(convergence_bounds(0.0, 1.0, 0.5, BoundMode::StronglyConvex { lambda: 1.0 }).unwrap(), 5);
        assert_eq!(convergence_bounds(1.0, 2.0, 0.05, BoundMode::Convex).unwrap(), 3200);
        assert!(convergence_bounds(-1.0, 2.0, 0.1, BoundMode::Convex).is_err());
        assert!(convergence_bounds(1.0, 2.0, 0.0, BoundMode::Convex).is_err());
        assert!(convergence_bounds(1.0, 1.0, 0.1, BoundMode::StronglyConvex { lambda: 0.0 }).is_err());
    }

    #[test]
    fn report_bound() {
        let r = ConvexInstanceReport::new(0.5, 1.0, 0.1).unwrap();
        assert_eq!(r.t_bound, 50);
    }

    #[test]
    fn schedules() {
        assert_eq!(Schedule::StronglyConvex { lambda: 1.0 }.eta(1), 1.0);
        assert!((Schedule::convex_default(0.5, 1.0, 50).eta(3) - 0.1).abs() < 1e-15);
        assert!(Schedule::Explicit { steps: vec![0.1] }.check(2).is_err());
    }
}
