//! Exact execution of plans on string distributions and diagonal states.

use serde::{Deserialize, Serialize};

use crate::distill::DistillationPlan;
use crate::error::{Error, Result};
use crate::form::FormationPlan;
use crate::scalar::Probability;
use crate::strings::BitString;

use super::channel::{distillation_permutation, formation_channel, Channel, Permutation};
use super::distribution::StringDistribution;

/// What to run.
#[derive(Clone, Copy, Debug)]
pub enum PlanRef<'a> {
    Distillation(&'a DistillationPlan),
    Formation(&'a FormationPlan),
    /// Identity on `len` bits whose last `work_bits` form the work register.
    Identity { len: u32, work_bits: u32 },
}

impl<'a> PlanRef<'a> {
    pub fn channel(&self) -> Result<Channel> {
        match self {
            PlanRef::Distillation(p) => {
                let perm = distillation_permutation(p)?;
                Ok(Channel { len: perm.len, branches: vec![(1.0, perm)] })
            }
            PlanRef::Formation(p) => formation_channel(p),
            PlanRef::Identity { len, .. } => Ok(Channel { len: *len, branches: vec![(1.0, Permutation::identity(*len)?)] }),
        }
    }

    /// Number of trailing output bits that form the work register.
    pub fn work_bits(&self) -> u32 {
        match self {
            PlanRef::Distillation(p) => p.m as u32,
            PlanRef::Formation(_) => 0,
            PlanRef::Identity { work_bits, .. } => *work_bits,
        }
    }

    /// Declared failure mass; zero where the plan makes no claim.
    pub fn failure_mass(&self) -> f64 {
        match self {
            PlanRef::Distillation(p) => p.failure_mass,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalExecution<P = f64> {
    pub input: StringDistribution<P>,
    pub output: StringDistribution<P>,
    /// Distribution of the last `work_bits` output positions.
    pub work_marginal: StringDistribution<P>,
    /// Probability of `1^m` in the work register.
    pub success_probability: P,
    pub failure_mass: f64,
    /// First `n` output bits of a formation run.
    pub target_marginal: Option<StringDistribution<P>>,
    pub channel: Channel,
}

/// Pushes `input` through the plan's permutations.
pub fn execute_plan_classical<P: Probability>(plan: PlanRef, input: &StringDistribution<P>) -> Result<ClassicalExecution<P>> {
    let channel = plan.channel()?;
    if input.len() != channel.len {
        return Err(Error::DimensionMismatch(input.len() as usize, channel.len as usize));
    }
    let parts: Vec<(P, StringDistribution<P>)> = if channel.branches.len() == 1 {
        let perm = &channel.branches[0].1;
        vec![(P::one(), input.push_forward(|i| perm.table[i] as usize))]
    } else {
        let weights: Vec<P> = channel.branches.iter().map(|(w, _)| P::from_f64(*w)).collect();
        let total = weights.iter().cloned().fold(P::zero(), |a, b| a + b);
        channel
            .branches
            .iter()
            .zip(weights)
            .map(|((_, perm), w)| (w / total.clone(), input.push_forward(|i| perm.table[i] as usize)))
            .collect()
    };
    let output = StringDistribution::mixture(&parts)?;
    let m = plan.work_bits();
    let work_marginal = output.marginal(channel.len - m, m)?;
    let success_probability = work_marginal.prob(&BitString::ones(m));
    let target_marginal = match plan {
        PlanRef::Formation(f) => Some(output.marginal(0, f.n as u32)?),
        _ => None,
    };
    Ok(ClassicalExecution {
        input: input.clone(),
        output,
        work_marginal,
        success_probability,
        failure_mass: plan.failure_mass(),
        target_marginal,
        channel,
    })
}

/// `gamma^{(x)ell} (x) rho^{(x)n}` for a two-level distillation plan.
pub fn distillation_input(plan: &DistillationPlan) -> Result<StringDistribution<f64>> {
    StringDistribution::iid(plan.ell as u32, plan.q)?.concat(&StringDistribution::iid(plan.n as u32, plan.p)?)
}

/// `gamma^{(x)ell} (x) |1><1|^{(x)m}` for a formation plan.
pub fn formation_input(plan: &FormationPlan) -> Result<StringDistribution<f64>> {
    StringDistribution::iid(plan.ell as u32, plan.q)?.concat(&StringDistribution::point(BitString::ones(plan.m as u32))?)
}

/// Largest register the quantum execution accepts.
pub const MAX_QUANTUM_QUBITS: u32 = 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumReport {
    pub qubits: u32,
    /// `[V, H_tot] = 0` checked entry by entry in integers.
    pub commutes: bool,
    pub trace_preserving: bool,
    /// Output trace minus one.
    pub trace_defect: f64,
    /// `(1/2) || rho_work - |1..1><1..1| ||_1`.
    pub work_trace_distance: f64,
    pub failure_mass: f64,
    /// Work register diagonal (the reduced state is diagonal for these inputs).
    pub work_populations: Vec<f64>,
    /// With `m = 0`: the channel maps the maximally mixed state of each
    /// energy shell to itself.
    pub unital_on_shells: bool,
}

/// Builds the permutation unitary of the plan, applies it to the product
/// input state and reduces to the work register.
pub fn execute_plan_quantum(plan: &DistillationPlan) -> Result<QuantumReport> {
    let qubits = plan.total_len() as u32;
    if qubits > MAX_QUANTUM_QUBITS {
        return Err(Error::UnsupportedSize(format!("quantum execution needs at most {MAX_QUANTUM_QUBITS} qubits")));
    }
    let perm = distillation_permutation(plan)?;
    let h_tot: Vec<i64> = (0..1u64 << qubits).map(|x| x.count_ones() as i64).collect();
    // V has a single one per column at row perm(x): [V, H] = 0 iff H(perm(x)) = H(x)
    let commutes = perm.table.iter().enumerate().all(|(x, &y)| h_tot[y as usize] == h_tot[x]);
    let input = distillation_input(plan)?;
    // input is diagonal, so V rho V^dag is the permuted diagonal
    let output = input.push_forward(|i| perm.table[i] as usize);
    let trace_defect = output.total() - 1.0;
    let m = plan.m as u32;
    let work = output.marginal(qubits - m, m)?;
    let success = work.prob(&BitString::ones(m));
    // a weight-preserving bijection maps each shell onto itself
    let unital_on_shells = perm.is_bijection() && perm.conserves_weight();
    Ok(QuantumReport {
        qubits,
        commutes,
        trace_preserving: perm.is_bijection() && trace_defect.abs() < 1e-12,
        trace_defect,
        work_trace_distance: (1.0 - success).max(0.0),
        failure_mass: plan.failure_mass,
        work_populations: work.probs().to_vec(),
        unital_on_shells,
    })
}
