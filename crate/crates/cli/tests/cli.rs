use std::path::Path;
use std::process::{Command, Output};

use athermal::distill::DistillationPlan;
use athermal::form::FormationPlan;
use athermal::simulate::ExhaustReport;
use athermal_cli::commands::{MonotoneReport, SimulateReport};
use athermal_cli::output::{Envelope, SWEEP_HEADER};

fn athermal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_athermal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn summary_value(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .parse()
        .unwrap()
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> (String, Envelope<T>) {
    let text = std::fs::read_to_string(path).unwrap();
    let env = serde_json::from_str(&text).unwrap();
    (text, env)
}

#[test]
fn rate_routes_agree() {
    let o = athermal(&["rate", "--p", "0.75", "--beta", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!((field(&s, "R") - 0.3814369578130738).abs() < 1e-12);
    assert!(field(&s, "difference") <= 1e-12);

    let s = stdout(&athermal(&["rate", "--p", "1", "--beta", "1"]));
    assert!((field(&s, "R") - 1.0).abs() < 1e-12);

    let q = (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
    let s = stdout(&athermal(&["rate", "--p", &q.to_string(), "--beta", "1"]));
    assert!(field(&s, "R").abs() < 1e-12);
}

#[test]
fn free_target_is_a_domain_error() {
    let q = (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
    let o = athermal(&["rate", "--p", "0.75", "--target-p", &q.to_string()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("free"));
}

#[test]
fn bad_arguments_exit_nonzero() {
    assert_eq!(athermal(&["distill", "--n", "10", "--p", "1.5", "--out", "/dev/null"]).status.code(), Some(2));
    assert_eq!(athermal(&["frame", "--N", "0", "--delta", "1"]).status.code(), Some(2));
    assert!(!athermal(&["no-such-command"]).status.success());
}

#[test]
fn rate_from_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    std::fs::write(&path, r#"{"energies": [0, 1], "populations": [0.25, 0.75]}"#).unwrap();
    let s = stdout(&athermal(&["rate", "--state", path.to_str().unwrap()]));
    assert!((field(&s, "R") - 0.3814369578130738).abs() < 1e-12);
    std::fs::write(&path, r#"{"energies": [0, 1, 2], "re": [[0.2, 0.1, 0], [0.1, 0.3, 0], [0, 0, 0.5]]}"#).unwrap();
    let o = athermal(&["rate", "--state", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(field(&stdout(&o), "R") > 0.0);
}

#[test]
fn frame_overlap() {
    let s = stdout(&athermal(&["frame", "--N", "100", "--delta", "1"]));
    assert!((field(&s, "overlap") - 0.99).abs() < 1e-15);
}

#[test]
fn distill_plan_round_trips_and_respects_limit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let o = athermal(&["distill", "--n", "1000", "--p", "0.75", "--beta", "1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let line = stdout(&o);
    let (text, env) = read::<DistillationPlan>(&path);
    assert_eq!(env.to_json().unwrap(), text);
    assert_eq!(env.schema_version, 1);
    let plan = env.report;
    assert!(plan.achieved_rate <= plan.rate_limit);
    assert!(summary_value(&line, "rate") <= summary_value(&line, "rate_limit"));
    let fm = summary_value(&line, "failure_mass");
    assert!((fm - summary_value(&line, "typical_mass_complement")).abs() < 1e-12);
    assert_eq!(fm, plan.failure_mass);
}

#[test]
fn formation_plan_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("form.json");
    let o = athermal(&["form", "--n", "60", "--p", "0.75", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (text, env) = read::<FormationPlan>(&path);
    assert_eq!(env.to_json().unwrap(), text);
    env.report.check_invariants().unwrap();
}

#[test]
fn sweep_is_deterministic_and_converges() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| vec!["sweep".to_string(), "--p".into(), "0.75".into(), "--ns".into(), "100,1000,10000".into(), "--out".into(), p.to_str().unwrap().into()];
    let run = |p: &Path, threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_athermal")).args(args(p)).env("ATHERMAL_THREADS", threads).output().unwrap();
        assert!(o.status.success());
    };
    run(&a, "1");
    run(&b, "2");
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    let deficits: Vec<f64> = lines.map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(deficits.len(), 3);
    assert!(deficits.iter().all(|&d| d > 0.0));
    assert!(deficits.windows(2).all(|w| w[1] < w[0]));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["units"]["deficit"], "dimensionless");
}

#[test]
fn simulate_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    let o = athermal(&["simulate", "--ell", "4", "--n", "2", "--width", "0.5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let (_, env) = read::<SimulateReport>(&path);
    let r = env.report;
    assert_eq!(r.m, 2);
    assert!(r.audit.balanced);
    let q = r.quantum.unwrap();
    assert!(q.commutes && q.trace_preserving);
    assert!(q.work_trace_distance <= r.failure_mass + 1e-12);
}

#[test]
fn exhaust_satisfies_pinsker_columnwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ex.json");
    let o = athermal(&["exhaust", "--n", "6", "--ell", "8", "--width", "1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let (_, env) = read::<ExhaustReport>(&path);
    let r = env.report;
    assert!(!r.rel_entropies.is_empty());
    for (tn, bound) in r.measured_trace_norms.iter().zip(&r.pinsker_bounds) {
        assert!(tn <= bound);
    }
}

#[test]
fn seeded_checks_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("m{i}.json"))).collect();
    for p in &paths {
        let o = athermal(&["monotones", "--energies", "0,1,2.5", "--pairs", "200", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let (a, env) = read::<MonotoneReport>(&paths[0]);
    assert_eq!(a, std::fs::read_to_string(&paths[1]).unwrap());
    assert_eq!(env.seed, Some(11));
    match env.report {
        MonotoneReport::Random(c) => assert_eq!(c.continuity_violations + c.affinity_violations, 0),
        MonotoneReport::State(_) => panic!("expected random checks"),
    }
}

#[test]
fn work_and_coherent_reports() {
    let s = String::from_utf8(athermal(&["work", "--energies", "0,1,2", "--freqs", "0,0,1", "--n", "100"]).stderr).unwrap();
    let line = s.lines().last().unwrap();
    assert!(summary_value(line, "per_copy") <= summary_value(line, "bound_per_copy"));
    let s = String::from_utf8(athermal(&["coherent", "--n", "4", "--exact"]).stderr).unwrap();
    let line = s.lines().last().unwrap();
    assert!(summary_value(line, "exact_trace_distance") <= summary_value(line, "analytic_bound"));
}
