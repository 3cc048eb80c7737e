//! End-to-end runs: plan, execute exactly, audit.

use std::collections::BTreeSet;

use athermal::distill::{plan_distillation, DistillConfig};
use athermal::form::{plan_formation, FormConfig};
use athermal::simulate::{
    distillation_input, execute_plan_classical, execute_plan_quantum, formation_input, work_balance_audit, PlanRef,
    StringDistribution,
};
use athermal::typeclass::Window;
use athermal::{ExactProbability, Probability};
use num_bigint::BigInt;
use num_traits::One;

fn distill_cfg(ell: u64, width: f64) -> DistillConfig {
    DistillConfig { ell: Some(ell), window: Window::binomial(width), ..DistillConfig::default() }
}

#[test]
fn distillation_success_meets_declared_failure_mass() {
    for (ell, n) in [(3u64, 7u64), (6, 4), (8, 6), (10, 8), (12, 10)] {
        let plan = plan_distillation(n, 0.75, 1.0, &distill_cfg(ell, 1.0)).unwrap();
        let run = execute_plan_classical(PlanRef::Distillation(&plan), &distillation_input(&plan).unwrap()).unwrap();
        assert!(
            run.success_probability >= 1.0 - plan.failure_mass - 1e-12,
            "ell={ell} n={n}: success {} vs failure mass {}",
            run.success_probability,
            plan.failure_mass
        );
        let audit = work_balance_audit(&run, plan.m as u32, plan.q).unwrap();
        assert!((audit.mean_energy_in - audit.mean_energy_out).abs() < 1e-9);
    }
}

#[test]
fn classical_and_quantum_agree_on_work_register() {
    let plan = plan_distillation(7, 0.75, 1.0, &distill_cfg(5, 1.0)).unwrap();
    let run = execute_plan_classical(PlanRef::Distillation(&plan), &distillation_input(&plan).unwrap()).unwrap();
    let q = execute_plan_quantum(&plan).unwrap();
    for (a, b) in run.work_marginal.probs().iter().zip(&q.work_populations) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((q.work_trace_distance - (1.0 - run.success_probability)).abs() < 1e-12);
}

#[test]
fn rational_run_is_exact() {
    let plan = plan_distillation(4, 0.75, 1.0, &distill_cfg(6, 1.0)).unwrap();
    // exact Gibbs weight is irrational, so use a rational stand-in bath
    let q = ExactProbability::new(BigInt::from(1), BigInt::from(4));
    let p = ExactProbability::new(BigInt::from(3), BigInt::from(4));
    let input = StringDistribution::iid(6, q).unwrap().concat(&StringDistribution::iid(4, p).unwrap()).unwrap();
    let run = execute_plan_classical(PlanRef::Distillation(&plan), &input).unwrap();
    assert!(run.output.total().is_one());
    let weight = |d: &StringDistribution<ExactProbability>| {
        d.support().fold(ExactProbability::from_integer(BigInt::from(0)), |acc, (s, p)| {
            acc + p.clone() * ExactProbability::from_integer(BigInt::from(s.weight()))
        })
    };
    assert_eq!(weight(&run.input), weight(&run.output));
    let csv = run.work_marginal.to_csv();
    assert!(csv.lines().count() >= 2);
}

#[test]
fn formation_reaches_target_within_accounted_error() {
    for (n, ell) in [(4u64, 8u64), (5, 10), (6, 12), (8, 12)] {
        let cfg = FormConfig { ell: Some(ell), window: Window::binomial(1.0), ..FormConfig::default() };
        let plan = plan_formation(n, 0.75, 1.0, &cfg).unwrap();
        plan.check_invariants().unwrap();
        let run = execute_plan_classical(PlanRef::Formation(&plan), &formation_input(&plan).unwrap()).unwrap();
        let target = StringDistribution::iid(n as u32, 0.75).unwrap();
        let tv = run.target_marginal.as_ref().unwrap().total_variation(&target).unwrap();

        let f = [0.25, 0.75];
        let target_window: f64 = plan.target_types.iter().map(|t| f64::type_probability(t.counts(), &f)).sum();
        let gibbs_types: BTreeSet<Vec<u64>> = plan.per_type_maps.iter().map(|r| r.gibbs.counts().to_vec()).collect();
        let g = [1.0 - plan.q, plan.q];
        let gibbs_window: f64 = gibbs_types.iter().map(|c| f64::type_probability(c, &g)).sum();
        let birkhoff: f64 = plan
            .birkhoff
            .achieved_weights
            .iter()
            .zip(&plan.birkhoff.target_weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        let balance = plan
            .per_type_maps
            .iter()
            .filter_map(|r| r.assignment_balance())
            .map(|b| b.total_variation)
            .fold(0.0, f64::max);
        let budget = (1.0 - target_window) + (1.0 - gibbs_window) + birkhoff + balance;
        assert!(tv <= budget + 1e-9, "n={n} ell={ell}: tv {tv} > {budget}");
    }
}

#[test]
fn plans_round_trip_through_json() {
    let plan = plan_distillation(6, 0.75, 1.0, &distill_cfg(8, 1.0)).unwrap();
    let text = serde_json::to_string(&plan).unwrap();
    let back: athermal::distill::DistillationPlan = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
    let cfg = FormConfig { ell: Some(8), window: Window::binomial(1.0), ..FormConfig::default() };
    let form = plan_formation(4, 0.75, 1.0, &cfg).unwrap();
    let text = serde_json::to_string(&form).unwrap();
    let back: athermal::form::FormationPlan = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
