//! Exhaust reductions of executed distillation plans.

use serde::{Deserialize, Serialize};

use crate::distill::DistillationPlan;
use crate::error::{Error, Result};
use crate::state::DensityMatrix;

use super::channel::distillation_permutation;
use super::distribution::StringDistribution;
use super::execute::distillation_input;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustReport {
    pub block_size: u32,
    pub exhaust_len: u32,
    /// Consecutive blocks of `block_size` exhaust qubits; a shorter last block is dropped.
    pub reduced_states: Vec<DensityMatrix<f64>>,
    /// `D(pi_{k,L} || gamma^{(x)L})` in nats.
    pub rel_entropies: Vec<f64>,
    /// `sqrt(2 D)`, bounding the full trace norm.
    pub pinsker_bounds: Vec<f64>,
    /// `|| pi_{k,L} - gamma^{(x)L} ||_1`.
    pub measured_trace_norms: Vec<f64>,
    /// `D(pi_k || gamma^{(x)k})`.
    pub total_rel_entropy: f64,
    pub per_system_rel_entropy: f64,
    /// `sum_blocks D <= D(pi_k || gamma^{(x)k})`.
    pub subadditivity_holds: bool,
    pub pinsker_holds: bool,
}

/// Largest block whose reduced state is materialized.
pub const MAX_BLOCK: u32 = 8;

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
        .sum()
}

/// Runs the plan on `gamma^{(x)ell} (x) rho^{(x)n}` and compares the exhaust
/// with Gibbs qubits, block by block.
pub fn exhaust_analysis(plan: &DistillationPlan, block_size: u32) -> Result<ExhaustReport> {
    if block_size == 0 || block_size > MAX_BLOCK {
        return Err(Error::param(format!("block size must be in 1..={MAX_BLOCK}")));
    }
    let perm = distillation_permutation(plan)?;
    let output = distillation_input(plan)?.push_forward(|i| perm.table[i] as usize);
    let k = plan.k as u32;
    let exhaust = output.marginal(0, k)?;
    let gibbs_k = StringDistribution::iid(k, plan.q)?;
    let total_rel_entropy = kl(exhaust.probs(), gibbs_k.probs()).max(0.0);
    let gibbs_block = StringDistribution::iid(block_size, plan.q)?;
    let mut report = ExhaustReport {
        block_size,
        exhaust_len: k,
        reduced_states: Vec::new(),
        rel_entropies: Vec::new(),
        pinsker_bounds: Vec::new(),
        measured_trace_norms: Vec::new(),
        total_rel_entropy,
        per_system_rel_entropy: if k > 0 { total_rel_entropy / k as f64 } else { 0.0 },
        subadditivity_holds: true,
        pinsker_holds: true,
    };
    let mut start = 0;
    while start + block_size <= k {
        let block = exhaust.marginal(start, block_size)?;
        // round-off can leave a tiny negative value for blocks that are exactly Gibbs
        let d = kl(block.probs(), gibbs_block.probs()).max(0.0);
        let tn: f64 = block.probs().iter().zip(gibbs_block.probs()).map(|(a, b)| (a - b).abs()).sum();
        let bound = (2.0 * d).sqrt();
        report.pinsker_holds &= tn <= bound + 1e-12;
        let mass: f64 = block.probs().iter().sum();
        let diag: Vec<f64> = block.probs().iter().map(|x| x / mass).collect();
        report.reduced_states.push(DensityMatrix::from_diagonal(&diag)?);
        report.rel_entropies.push(d);
        report.pinsker_bounds.push(bound);
        report.measured_trace_norms.push(tn);
        start += block_size;
    }
    let sum: f64 = report.rel_entropies.iter().sum();
    report.subadditivity_holds = sum <= total_rel_entropy + 1e-12 * total_rel_entropy.max(1.0);
    Ok(report)
}
