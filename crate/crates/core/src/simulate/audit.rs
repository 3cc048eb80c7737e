//! Energy bookkeeping on executed plans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Probability;

use super::execute::ClassicalExecution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditLedger {
    /// Input strings with nonzero probability, times branches.
    pub trajectories: u64,
    pub balanced: bool,
    pub injective: bool,
    /// Expected ones in the work register at the output.
    pub work_register_ones: f64,
    /// What the same register holds in the thermal state, `work_bits * q`.
    pub thermal_reference: f64,
    /// `work_register_ones - thermal_reference`.
    pub net_work: f64,
    pub mean_energy_in: f64,
    pub mean_energy_out: f64,
}

/// Checks that every trajectory conserves the number of ones and that every
/// branch is injective; fails with `AuditFailure` otherwise.
pub fn work_balance_audit<P: Probability>(run: &ClassicalExecution<P>, work_bits: u32, q: f64) -> Result<AuditLedger> {
    let len = run.channel.len;
    let mut trajectories = 0u64;
    for (b, (_, perm)) in run.channel.branches.iter().enumerate() {
        if !perm.is_bijection() {
            return Err(Error::AuditFailure(format!("branch {b} is not injective")));
        }
        for (s, _) in run.input.support() {
            trajectories += 1;
            let out = perm.apply(s);
            if out.weight() != s.weight() {
                return Err(Error::AuditFailure(format!("branch {b} maps {s} to {out}: energy {} -> {}", s.weight(), out.weight())));
            }
        }
    }
    let energy = |d: &super::distribution::StringDistribution<P>, start: u32, n: u32| -> f64 {
        d.support().map(|(s, p)| p.to_f64() * s.slice(start, n).weight() as f64).sum()
    };
    let work_register_ones = energy(&run.output, len - work_bits, work_bits);
    let thermal_reference = work_bits as f64 * q;
    Ok(AuditLedger {
        trajectories,
        balanced: true,
        injective: true,
        work_register_ones,
        thermal_reference,
        net_work: work_register_ones - thermal_reference,
        mean_energy_in: energy(&run.input, 0, len),
        mean_energy_out: energy(&run.output, 0, len),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::{plan_distillation, DistillConfig};
    use crate::simulate::{distillation_input, execute_plan_classical, PlanRef, StringDistribution};
    use crate::state::two_level_excited_population;
    use crate::typeclass::Window;

    fn plan() -> crate::distill::DistillationPlan {
        let cfg = DistillConfig { ell: Some(6), window: Window::binomial(1.0), ..DistillConfig::default() };
        plan_distillation(4, 0.75, 1.0, &cfg).unwrap()
    }

    #[test]
    fn valid_plan_balances() {
        let p = plan();
        let run = execute_plan_classical(PlanRef::Distillation(&p), &distillation_input(&p).unwrap()).unwrap();
        let a = work_balance_audit(&run, p.m as u32, p.q).unwrap();
        assert!(a.balanced && a.injective);
        assert!((a.mean_energy_in - a.mean_energy_out).abs() < 1e-12);
        assert!(a.net_work > 0.0);
    }

    #[test]
    fn broken_injection_is_caught() {
        let p = plan();
        let mut run = execute_plan_classical(PlanRef::Distillation(&p), &distillation_input(&p).unwrap()).unwrap();
        let t = &mut run.channel.branches[0].1.table;
        // send the all-zero string where the all-one string goes
        let last = t.len() - 1;
        t[0] = t[last];
        assert!(matches!(work_balance_audit(&run, p.m as u32, p.q), Err(Error::AuditFailure(_))));
    }

    #[test]
    fn energy_changing_swap_is_caught() {
        let p = plan();
        let mut run = execute_plan_classical(PlanRef::Distillation(&p), &distillation_input(&p).unwrap()).unwrap();
        let t = &mut run.channel.branches[0].1.table;
        t.swap(0, 1);
        assert!(matches!(work_balance_audit(&run, p.m as u32, p.q), Err(Error::AuditFailure(_))));
    }

    #[test]
    fn gibbs_only_input_gives_no_work() {
        let p = plan();
        let q = two_level_excited_population(1.0, 1.0);
        let input = StringDistribution::iid(p.total_len() as u32, q).unwrap();
        let run = execute_plan_classical(PlanRef::Distillation(&p), &input).unwrap();
        let a = work_balance_audit(&run, p.m as u32, p.q).unwrap();
        assert!(a.net_work.abs() < 1e-12, "{}", a.net_work);
    }
}
