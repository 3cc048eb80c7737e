//! Acceptance suite. Every test writes one `criterion N: PASS|FAIL ...` line
//! straight to stdout so the summary survives output capture.

use std::io::Write;
use std::time::{Duration, Instant};

use athermal::coherent::{coherent_formation_error, shift_overlap, CoherentTarget, ReferenceFrame};
use athermal::distill::{distillation_yield, plan_distillation, rate_limit, solve_single_type, DistillConfig};
use athermal::form::{formation_cost, FormConfig};
use athermal::monotone::{
    affinity_gap, binary_entropy, continuity_bound_check, continuity_constant, interconversion_rate, relative_entropy,
};
use athermal::multilevel::{max_work, MultilevelConfig};
use athermal::random::{random_density_matrix, random_hamiltonian, random_probabilities};
use athermal::simulate::{execute_plan_quantum, exhaust_analysis, oracle_max_m};
use athermal::typeclass::{FrequencyVector, Window};
use athermal::{gibbs_state, DensityMatrix, Hamiltonian};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE_IDENTITY_TOL: f64 = 1e-12;
const RATE_LIMIT_075_1: f64 = 0.3814369578130738;
const DEFICIT_FRACTION_AT_1E5: f64 = 0.05;
const REVERSIBILITY_BAND: (f64, f64) = (0.85, 1.0);
const WORK_PER_COPY_LIMIT: f64 = 2.4076059644443806;
const WORK_RELATIVE_GAP: f64 = 0.05;
const ADDITIVITY_TOL: f64 = 1e-10;
const PROPERTY_SLACK: f64 = 1e-9;

fn report(criterion: u32, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {criterion}: {verdict} {detail}").unwrap();
    out.flush().unwrap();
}

fn within(budget: Duration, start: Instant) -> (bool, f64) {
    let s = start.elapsed().as_secs_f64();
    (s <= budget.as_secs_f64(), s)
}

#[test]
fn criterion_1_rate_formula_identity() {
    let start = Instant::now();
    let top = DensityMatrix::<f64>::basis(2, 1).unwrap();
    let h = Hamiltonian::<f64>::qubit();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let p = 0.05 + 0.9 * i as f64 / 19.0;
        for j in 0..20 {
            let beta = 0.1 + 4.9 * j as f64 / 19.0;
            let gamma = gibbs_state(&h, beta).unwrap();
            let rho = DensityMatrix::from_diagonal(&[1.0 - p, p]).unwrap();
            let closed = rate_limit(p, beta).unwrap();
            let ratio = interconversion_rate(&rho, &top, &gamma).unwrap();
            worst = worst.max((closed - ratio).abs());
        }
    }
    let (fast, secs) = within(Duration::from_secs(1), start);
    let pass = worst <= RATE_IDENTITY_TOL && fast;
    report(1, pass, format!("max |closed - ratio| = {worst:.3e} over 400 points in {secs:.3} s"));
    assert!(pass);
}

#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let mut cases = 0u64;
    let mut mismatches = Vec::new();
    for ell in 0..=12u64 {
        for n in 0..=12u64 {
            for g in 0..=ell {
                for t in 0..=n {
                    cases += 1;
                    let fast = solve_single_type(ell, g, n, t).unwrap();
                    let oracle = oracle_max_m(ell, g, n, t).unwrap();
                    if fast != oracle {
                        mismatches.push((ell, g, n, t, fast, oracle));
                    }
                }
            }
        }
    }
    let (fast, secs) = within(Duration::from_secs(60), start);
    let pass = mismatches.is_empty() && fast;
    report(2, pass, format!("{cases} cases, {} mismatches, {secs:.2} s", mismatches.len()));
    assert!(mismatches.is_empty(), "first mismatches: {:?}", &mismatches[..mismatches.len().min(5)]);
    assert!(fast);
}

#[test]
fn criterion_3_finite_size_convergence() {
    let start = Instant::now();
    let cfg = DistillConfig::default();
    let r = rate_limit(0.75, 1.0).unwrap();
    let deficits: Vec<f64> = [100u64, 1_000, 10_000, 100_000]
        .iter()
        .map(|&n| distillation_yield(n, 0.75, 1.0, &cfg).unwrap().deficit)
        .collect();
    let positive = deficits.iter().all(|&d| d > 0.0);
    let decreasing = deficits.windows(2).all(|w| w[1] < w[0]);
    let small = deficits[3] < DEFICIT_FRACTION_AT_1E5 * r;
    let (fast, secs) = within(Duration::from_secs(300), start);
    let pass = (r - RATE_LIMIT_075_1).abs() < 1e-12 && positive && decreasing && small && fast;
    report(
        3,
        pass,
        format!("R = {r:.10}, deficit/R = {:?}, {secs:.1} s", deficits.iter().map(|d| d / r).collect::<Vec<_>>()),
    );
    assert!(pass);
}

#[test]
fn criterion_4_reversibility() {
    let dcfg = DistillConfig::default();
    let fcfg = FormConfig::default();
    let products: Vec<f64> = [100u64, 1_000, 10_000]
        .iter()
        .map(|&n| {
            let distilled = distillation_yield(n, 0.75, 1.0, &dcfg).unwrap().m as f64;
            let spent = formation_cost(n, 0.75, 1.0, &fcfg).unwrap().m as f64;
            distilled / spent
        })
        .collect();
    let last = products[2];
    let in_band = last >= REVERSIBILITY_BAND.0 && last <= REVERSIBILITY_BAND.1;
    let increasing = products.windows(2).all(|w| w[1] > w[0]);
    let pass = in_band && increasing;
    report(4, pass, format!("round-trip products at n = 1e2, 1e3, 1e4: {products:?}"));
    assert!(pass);
}

#[test]
fn criterion_5_exact_quantum_legality() {
    let mut plans = 0;
    let mut failures = Vec::new();
    let mut slowest = 0.0f64;
    let windows = [Window::default(), Window::binomial(1.0), Window::binomial(0.5)];
    for window in windows {
        for total in 2..=14u64 {
            for n in 1..total {
                let ell = total - n;
                let cfg = DistillConfig { ell: Some(ell), window, ..DistillConfig::default() };
                let plan = plan_distillation(n, 0.75, 1.0, &cfg).unwrap();
                let start = Instant::now();
                let q = execute_plan_quantum(&plan).unwrap();
                slowest = slowest.max(start.elapsed().as_secs_f64());
                plans += 1;
                let ok = q.commutes && q.trace_preserving && q.work_trace_distance <= plan.failure_mass + 1e-12;
                if !ok {
                    failures.push((ell, n, plan.m, q.work_trace_distance, plan.failure_mass));
                }
            }
        }
    }
    let pass = failures.is_empty() && slowest <= 120.0;
    report(5, pass, format!("{plans} plans up to 14 qubits, {} failures, slowest {slowest:.2} s", failures.len()));
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_6_exhaust_structure() {
    let r = rate_limit(0.75, 1.0).unwrap();
    let grid = [4u64, 6, 8, 10, 12];
    let mut per_system = Vec::new();
    let mut pinsker = true;
    let mut subadditive = true;
    let mut extracting = true;
    for &n in &grid {
        let cfg = DistillConfig { window: Window::binomial(1.0), ..DistillConfig::default() };
        let plan = plan_distillation(n, 0.75, 1.0, &cfg).unwrap();
        assert_eq!(plan.ell, athermal::distill::default_bath_size(r, n));
        extracting &= plan.m > 0;
        let e = exhaust_analysis(&plan, 1).unwrap();
        pinsker &= e.pinsker_holds;
        subadditive &= e.subadditivity_holds;
        per_system.push(e.per_system_rel_entropy);
    }
    let decreasing = per_system.windows(2).all(|w| w[1] < w[0]);
    let pass = pinsker && subadditive && extracting && decreasing;
    report(
        6,
        pass,
        format!("n = {grid:?}: D/k = {per_system:.4?}, pinsker {pinsker}, subadditivity {subadditive}"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_coherent_formation() {
    let mut overlap_ok = true;
    for size in 1..=64u64 {
        let frame = ReferenceFrame::new(size, size as i64, size, 4 * size as i64).unwrap();
        let base = frame.vector();
        for delta in 0..=size {
            let shifted = frame.shifted_vector(delta as i64).unwrap();
            let dot: f64 = base.iter().zip(&shifted).map(|(a, b)| a * b).sum();
            overlap_ok &= (dot - shift_overlap(size, delta).unwrap()).abs() < 1e-12;
        }
    }
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut exact = Vec::new();
    let mut bounded = true;
    for n in [4u64, 6, 8, 10] {
        let target = CoherentTarget::new(amp, amp, 1.0, n).unwrap();
        let rep = coherent_formation_error(&target, true).unwrap();
        let td = rep.exact.as_ref().unwrap().trace_distance;
        bounded &= td <= rep.analytic_bound + 1e-12;
        exact.push(td);
    }
    let decreasing = exact.windows(2).all(|w| w[1] < w[0]);
    let pass = overlap_ok && bounded && decreasing;
    report(
        7,
        pass,
        format!(
            "overlaps {overlap_ok}, exact <= bound {bounded}, decreasing {decreasing}, exact TD at n = 4, 6, 8, 10: {exact:.4?}"
        ),
    );
    assert!(overlap_ok && bounded);
    assert!(decreasing, "exact trace distance not decreasing: {exact:?}");
}

#[test]
fn criterion_8_continuity_and_monotones() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let instances = 10_000;
    let mut violations = [0u32; 4];
    let ln2 = std::f64::consts::LN_2;
    for _ in 0..instances {
        let d = rng.gen_range(2..=16usize);
        let beta = rng.gen_range(0.1..5.0);
        let h = random_hamiltonian::<f64, _>(d, rng.gen_range(0.5..4.0), &mut rng);
        let gamma = gibbs_state(&h, beta).unwrap();
        let g = gamma.density_matrix();
        let rho = random_density_matrix::<f64, _>(d, rng.gen_range(1..=d), &mut rng);
        let sigma = random_density_matrix::<f64, _>(d, rng.gen_range(1..=d), &mut rng);

        let p = rng.gen_range(0.0..=1.0);
        let gap = affinity_gap(&rho, &sigma, p, &gamma).unwrap();
        if gap < -PROPERTY_SLACK || gap > binary_entropy(p).unwrap() + PROPERTY_SLACK {
            violations[0] += 1;
        }

        let top = DensityMatrix::basis(d, h.index_of_max()).unwrap();
        let grounded_max = h.max_energy() - h.min_energy();
        let d_top = relative_entropy(&top, &g).unwrap();
        if d_top > beta * grounded_max + (d as f64).ln() + PROPERTY_SLACK {
            violations[1] += 1;
        }

        let d2 = rng.gen_range(1..=16 / d).max(1);
        if d2 >= 2 {
            let h2 = random_hamiltonian::<f64, _>(d2, 2.0, &mut rng);
            let gamma2 = gibbs_state(&h2, beta).unwrap();
            let tau = random_density_matrix::<f64, _>(d2, d2, &mut rng);
            let joint_h = Hamiltonian::new(
                h.energies().iter().flat_map(|a| h2.energies().iter().map(move |b| a + b)).collect(),
            )
            .unwrap();
            let joint_g = gibbs_state(&joint_h, beta).unwrap().density_matrix();
            let lhs = relative_entropy(&rho.tensor(&tau), &joint_g).unwrap();
            let rhs = relative_entropy(&rho, &g).unwrap() + relative_entropy(&tau, &gamma2.density_matrix()).unwrap();
            if (lhs - rhs).abs() > ADDITIVITY_TOL * rhs.abs().max(1.0) {
                violations[2] += 1;
            }
        }

        let m = continuity_constant(&h, beta);
        let c = continuity_bound_check(&rho, &sigma, &gamma, m, ln2).unwrap();
        if !c.holds {
            violations[3] += 1;
        }
    }
    // a quasiclassical spot check keeps the diagonal code path covered
    let probs = random_probabilities::<f64, _>(5, &mut rng);
    assert!(FrequencyVector::new(probs).is_ok());
    let (fast, secs) = within(Duration::from_secs(60), start);
    let pass = violations.iter().all(|&v| v == 0) && fast;
    report(
        8,
        pass,
        format!(
            "{instances} instances: violations affinity {}, subextensivity {}, additivity {}, continuity {}; {secs:.1} s",
            violations[0], violations[1], violations[2], violations[3]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_d_level_work() {
    let h = Hamiltonian::new(vec![0.0, 1.0, 2.0]).unwrap();
    let gamma = gibbs_state(&h, 1.0).unwrap();
    let limit = 2.0 + gamma.log_partition_function();
    let top = FrequencyVector::new(vec![0.0, 0.0, 1.0]).unwrap();
    let cfg = MultilevelConfig::default();
    let per_copy: Vec<f64> = [100u64, 1_000, 10_000]
        .iter()
        .map(|&n| max_work(&top, &h, 1.0, n, &cfg).unwrap().per_copy)
        .collect();
    let never_exceeds = per_copy.iter().all(|&w| w <= limit + 1e-12);
    let close = per_copy[2] >= (1.0 - WORK_RELATIVE_GAP) * limit;
    let pass = (limit - WORK_PER_COPY_LIMIT).abs() < 1e-12 && never_exceeds && close;
    report(9, pass, format!("limit {limit:.6}, per copy at n = 1e2, 1e3, 1e4: {per_copy:.4?}"));
    assert!(pass);
}
