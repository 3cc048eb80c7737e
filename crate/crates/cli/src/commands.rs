//! One function per subcommand.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use athermal::coherent::{coherent_formation_error, err_norm, shift_overlap, CoherentTarget};
use athermal::distill::{distillation_yield, plan_distillation, DistillConfig, DistillationPlan};
use athermal::form::{plan_formation, FormConfig};
use athermal::monotone::{
    affinity_gap, binary_entropy, continuity_bound_check, continuity_constant, free_energy, interconversion_rate,
    relative_entropy, reversed_monotone, von_neumann_entropy,
};
use athermal::multilevel::{max_work, MultilevelConfig};
use athermal::random::random_density_matrix;
use athermal::simulate::{
    distillation_input, execute_plan_classical, execute_plan_quantum, exhaust_analysis, work_balance_audit, AuditLedger,
    PlanRef, QuantumReport, MAX_QUANTUM_QUBITS,
};
use athermal::typeclass::{FrequencyVector, Window};
use athermal::{gibbs_state, DensityMatrix, Hamiltonian, Probability};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::output::{emit, meta_path, sweep_csv, units, Envelope, SweepRow};

/// Prints `line` on stdout when the JSON went to a file, else on stderr.
fn summary(out: Option<&Path>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rate: f64,
    /// Two-level diagonal inputs only.
    pub closed_form: Option<f64>,
    pub relative_entropy_ratio: f64,
    pub difference: Option<f64>,
    pub numerator: f64,
    pub denominator: f64,
}

#[derive(Deserialize)]
struct StateFile {
    energies: Vec<f64>,
    populations: Option<Vec<f64>>,
    re: Option<Vec<Vec<f64>>>,
    im: Option<Vec<Vec<f64>>>,
}

fn read_state(path: &Path) -> Result<(Hamiltonian<f64>, DensityMatrix<f64>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: StateFile = serde_json::from_str(&text).context("parsing state file")?;
    let h = Hamiltonian::new(file.energies)?;
    let d = h.dim();
    let rho = match (file.populations, file.re) {
        (Some(pop), None) => DensityMatrix::from_diagonal(&pop)?,
        (None, Some(re)) => {
            let im = file.im.unwrap_or_else(|| vec![vec![0.0; d]; d]);
            if re.len() != d || im.len() != d || re.iter().chain(&im).any(|row| row.len() != d) {
                bail!("state matrix must be {d} x {d}");
            }
            DensityMatrix::new(Array2::from_shape_fn((d, d), |(i, j)| Complex64::new(re[i][j], im[i][j])))?
        }
        _ => bail!("state file needs exactly one of `populations` or `re`"),
    };
    Ok((h, rho))
}

fn two_level_d(p: f64, q: f64, beta: f64) -> athermal::Result<f64> {
    Ok(binary_entropy(q)? - binary_entropy(p)? + beta * (p - q))
}

pub fn rate(a: &RateArgs) -> Result<()> {
    let beta = a.beta;
    let (h, rho, p) = match (&a.state, a.p) {
        (Some(path), _) => {
            let (h, rho) = read_state(path)?;
            let p = (h.dim() == 2 && rho.is_diagonal()).then(|| rho.diagonal()[1]);
            (h, rho, p)
        }
        (None, Some(p)) => (Hamiltonian::qubit(), DensityMatrix::from_diagonal(&[1.0 - p, p])?, Some(p)),
        (None, None) => bail!("give --p or --state"),
    };
    let gamma = gibbs_state(&h, beta)?;
    let top = h.index_of_max();
    let target = if h.dim() == 2 {
        DensityMatrix::from_diagonal(&[1.0 - a.target_p, a.target_p])?
    } else {
        DensityMatrix::basis(h.dim(), top)?
    };
    let ratio = interconversion_rate(&rho, &target, &gamma)?;
    let g = gamma.density_matrix();
    let numerator = relative_entropy(&rho, &g)?;
    let denominator = relative_entropy(&target, &g)?;
    let closed_form = match (p, gamma.excited_population()) {
        (Some(p), Some(q)) if h.energies()[1] - h.energies()[0] == 1.0 => {
            Some(two_level_d(p, q, beta)? / two_level_d(a.target_p, q, beta)?)
        }
        _ => None,
    };
    let report = RateReport {
        rate: closed_form.unwrap_or(ratio),
        closed_form,
        relative_entropy_ratio: ratio,
        difference: closed_form.map(|c| (c - ratio).abs()),
        numerator,
        denominator,
    };
    println!("R = {}", report.rate);
    if let Some(c) = closed_form {
        println!("closed_form = {c}");
    }
    println!("relative_entropy_ratio = {ratio}");
    if let Some(d) = report.difference {
        println!("difference = {d:e}");
    }
    if let Some(out) = &a.out {
        let u = units(&[("rate", "dimensionless"), ("numerator", "nats"), ("denominator", "nats")]);
        emit(Some(out), &Envelope::new("rate", None, u, report).to_json()?)?;
    }
    Ok(())
}

fn window_mass(n: u64, f: f64, window: &Window) -> f64 {
    let (lo, hi) = window.count_range(n, f);
    (lo..=hi).map(|t| f64::type_probability(&[n - t, t], &[1.0 - f, f])).sum()
}

fn distill_config(ell: Option<u64>, window: &WindowArgs) -> DistillConfig {
    DistillConfig { ell, window: window.window(), ..DistillConfig::default() }
}

fn plan_units() -> crate::output::Units {
    units(&[
        ("n, ell, m, k", "qubits"),
        ("p, q, failure_mass", "dimensionless"),
        ("beta", "1/E0"),
        ("rate_limit, achieved_rate", "dimensionless"),
        ("log_* fields", "nats"),
    ])
}

pub fn distill(a: &PlanArgs) -> Result<()> {
    let plan = plan_distillation(a.n, a.p, a.beta, &distill_config(a.ell, &a.window))?;
    let complement = 1.0 - window_mass(plan.ell, plan.q, &plan.window) * window_mass(plan.n, plan.p, &plan.window);
    let line = format!(
        "n={} ell={} m={} rate={} rate_limit={} failure_mass={} typical_mass_complement={}",
        plan.n,
        plan.ell,
        plan.m,
        plan.achieved_rate,
        plan.rate_limit,
        plan.failure_mass,
        complement.max(0.0)
    );
    emit(a.out.as_deref(), &Envelope::new("distill", None, plan_units(), plan).to_json()?)?;
    summary(a.out.as_deref(), &line);
    Ok(())
}

pub fn form(a: &PlanArgs) -> Result<()> {
    let cfg = FormConfig { ell: a.ell, window: a.window.window(), ..FormConfig::default() };
    let plan = plan_formation(a.n, a.p, a.beta, &cfg)?;
    let line = format!(
        "n={} ell={} m={} cost_rate={} rate_limit={} birkhoff_register={} birkhoff_deviation={}",
        plan.n, plan.ell, plan.m, plan.cost_rate, plan.rate_limit, plan.birkhoff_register, plan.birkhoff.max_deviation
    );
    emit(a.out.as_deref(), &Envelope::new("form", None, plan_units(), plan).to_json()?)?;
    summary(a.out.as_deref(), &line);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub p: f64,
    pub beta: f64,
    pub ns: Vec<u64>,
    pub window: Window,
    pub columns: Vec<String>,
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let cfg = distill_config(None, &a.window);
    let rows = a
        .ns
        .par_iter()
        .map(|&n| {
            let y = distillation_yield(n, a.p, a.beta, &cfg)?;
            Ok(SweepRow { n, ell: y.ell, m: y.m, rate: y.rate, deficit: y.deficit, failure_mass: y.failure_mass })
        })
        .collect::<athermal::Result<Vec<_>>>()?;
    emit(Some(&a.out), &sweep_csv(&rows))?;
    let meta = SweepMeta {
        p: a.p,
        beta: a.beta,
        ns: a.ns.clone(),
        window: cfg.window,
        columns: crate::output::SWEEP_HEADER.split(',').map(String::from).collect(),
    };
    let u = units(&[
        ("n", "copies"),
        ("ell", "qubits"),
        ("m", "qubits"),
        ("rate", "dimensionless"),
        ("deficit", "dimensionless"),
        ("failure_mass", "dimensionless"),
    ]);
    emit(Some(&meta_path(&a.out)), &Envelope::new("sweep", None, u, meta).to_json()?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    pub failure_mass: f64,
    pub success_probability: f64,
    /// Work register distribution, indexed by the register's bits.
    pub work_marginal: Vec<f64>,
    pub audit: AuditLedger,
    pub quantum: Option<QuantumReport>,
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let plan = plan_distillation(a.n, a.p, a.beta, &distill_config(Some(a.ell), &a.window))?;
    let run = execute_plan_classical(PlanRef::Distillation(&plan), &distillation_input(&plan)?)?;
    let audit = work_balance_audit(&run, plan.m as u32, plan.q)?;
    let quantum = if !a.classical_only && plan.total_len() <= MAX_QUANTUM_QUBITS as u64 {
        Some(execute_plan_quantum(&plan)?)
    } else {
        None
    };
    let report = SimulateReport {
        n: plan.n,
        ell: plan.ell,
        m: plan.m,
        failure_mass: plan.failure_mass,
        success_probability: run.success_probability,
        work_marginal: run.work_marginal.probs().to_vec(),
        audit,
        quantum,
    };
    let line = format!(
        "n={} ell={} m={} success_probability={} failure_mass={}",
        report.n, report.ell, report.m, report.success_probability, report.failure_mass
    );
    let u = units(&[("n, ell, m", "qubits"), ("probabilities", "dimensionless"), ("work, energy", "E0")]);
    emit(a.out.as_deref(), &Envelope::new("simulate", None, u, report).to_json()?)?;
    summary(a.out.as_deref(), &line);
    Ok(())
}

pub fn exhaust(a: &ExhaustArgs) -> Result<()> {
    let plan: DistillationPlan = plan_distillation(a.n, a.p, a.beta, &distill_config(a.ell, &a.window))?;
    let report = exhaust_analysis(&plan, a.block)?;
    let line = format!(
        "k={} blocks={} per_system_rel_entropy={} pinsker_holds={} subadditivity_holds={}",
        report.exhaust_len,
        report.rel_entropies.len(),
        report.per_system_rel_entropy,
        report.pinsker_holds,
        report.subadditivity_holds
    );
    let u = units(&[("rel_entropies, total_rel_entropy", "nats"), ("trace norms, bounds", "dimensionless")]);
    emit(a.out.as_deref(), &Envelope::new("exhaust", None, u, report).to_json()?)?;
    summary(a.out.as_deref(), &line);
    Ok(())
}

pub fn frame(a: &FrameArgs) -> Result<()> {
    println!("overlap = {}", shift_overlap(a.window_size, a.delta)?);
    println!("err_norm = {}", err_norm(a.delta, a.window_size)?);
    Ok(())
}

pub fn coherent(a: &CoherentArgs) -> Result<()> {
    let target =
        CoherentTarget::new(Complex64::new(a.a_re, a.a_im), Complex64::new(a.b_re, a.b_im), a.p, a.n)?;
    let report = coherent_formation_error(&target, a.exact)?;
    let exact = report.exact.as_ref().map(|e| e.trace_distance.to_string()).unwrap_or_else(|| "-".into());
    let line = format!(
        "n={} frame={} analytic_bound={} exact_trace_distance={exact}",
        a.n, report.frame.window_size, report.analytic_bound
    );
    let u = units(&[("energies", "E0"), ("trace distances", "dimensionless, (1/2)||.||_1")]);
    emit(a.out.as_deref(), &Envelope::new("coherent", None, u, report).to_json()?)?;
    summary(a.out.as_deref(), &line);
    Ok(())
}

pub fn work(a: &WorkArgs) -> Result<()> {
    let h = Hamiltonian::new(a.energies.clone())?;
    let f = FrequencyVector::new(a.freqs.clone())?;
    let cfg = MultilevelConfig { ell: a.ell, window: a.window.window(), ..MultilevelConfig::default() };
    let ledger = max_work(&f, &h, a.beta, a.n, &cfg)?;
    let line = format!(
        "n={} ell={} extracted={} per_copy={} bound_per_copy={}",
        ledger.n, ledger.ell, ledger.extracted, ledger.per_copy, ledger.bound_per_copy
    );
    let u = units(&[("extracted, per_copy, bound_per_copy", "E0"), ("feasibility_margin", "nats"), ("counts", "systems")]);
    emit(a.out.as_deref(), &Envelope::new("work", None, u, ledger).to_json()?)?;
    summary(a.out.as_deref(), &line);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateMonotones {
    pub relative_entropy: f64,
    pub reversed_relative_entropy: f64,
    pub entropy: f64,
    pub mean_energy: f64,
    pub free_energy: f64,
    pub gibbs_free_energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomChecks {
    pub dim: usize,
    pub pairs: u64,
    pub continuity_constant: f64,
    pub continuity_violations: u64,
    pub affinity_violations: u64,
    /// Largest `lhs / rhs` of the continuity inequality.
    pub worst_continuity_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MonotoneReport {
    State(StateMonotones),
    Random(RandomChecks),
}

pub fn monotones(a: &MonotoneArgs) -> Result<()> {
    let h = Hamiltonian::new(a.energies.clone())?;
    let gamma = gibbs_state(&h, a.beta)?;
    let g = gamma.density_matrix();
    let (report, seed) = match &a.populations {
        Some(pop) => {
            let rho = DensityMatrix::from_diagonal(pop)?;
            let s = StateMonotones {
                relative_entropy: relative_entropy(&rho, &g)?,
                reversed_relative_entropy: reversed_monotone(&rho, &gamma)?,
                entropy: von_neumann_entropy(&rho),
                mean_energy: rho.mean_energy(&h)?,
                free_energy: free_energy(&rho, &h, a.beta)?,
                gibbs_free_energy: free_energy(&g, &h, a.beta)?,
            };
            println!("relative_entropy = {}", s.relative_entropy);
            (MonotoneReport::State(s), None)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let d = h.dim();
            let m = continuity_constant(&h, a.beta);
            let mut checks = RandomChecks {
                dim: d,
                pairs: a.pairs,
                continuity_constant: m,
                continuity_violations: 0,
                affinity_violations: 0,
                worst_continuity_ratio: 0.0,
            };
            for _ in 0..a.pairs {
                let rho = random_density_matrix::<f64, _>(d, rng.gen_range(1..=d), &mut rng);
                let sigma = random_density_matrix::<f64, _>(d, rng.gen_range(1..=d), &mut rng);
                let c = continuity_bound_check(&rho, &sigma, &gamma, m, std::f64::consts::LN_2)?;
                checks.continuity_violations += u64::from(!c.holds);
                checks.worst_continuity_ratio = checks.worst_continuity_ratio.max(c.lhs / c.rhs);
                let p: f64 = rng.gen_range(0.0..=1.0);
                let gap = affinity_gap(&rho, &sigma, p, &gamma)?;
                checks.affinity_violations += u64::from(gap < -1e-9 || gap > binary_entropy(p)? + 1e-9);
            }
            println!(
                "pairs = {} continuity_violations = {} affinity_violations = {}",
                checks.pairs, checks.continuity_violations, checks.affinity_violations
            );
            (MonotoneReport::Random(checks), Some(a.seed))
        }
    };
    if let Some(out) = &a.out {
        let u = units(&[("entropies, relative entropies", "nats"), ("energies, free energies", "E0")]);
        emit(Some(out), &Envelope::new("monotones", seed, u, report).to_json()?)?;
    }
    Ok(())
}
