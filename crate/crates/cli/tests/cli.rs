use std::path::Path;
use std::process::{Command, Output};

use epitrace::io::{self, ClusterRecord};
use epitrace::likelihood::{exact_mle, DegreeUniverse, LikelihoodConfig, ProbabilityMode, SourceScores};
use epitrace::metrics::EvalReport;
use epitrace::trace::TraceRun;

const EIGHT: &str = "\
# eight cases, one cycle
case a
case b
case c
case d
case e
case f
case g
case h
edge a b
edge b c
edge c a
edge c d
edge d e
edge e f
edge d g
edge g h
";

fn epitrace(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epitrace"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn exact_estimate_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("eight.cluster"), EIGHT).unwrap();
    let out = epitrace(
        dir.path(),
        &["estimate", "--cluster", "eight.cluster", "--estimator", "exact", "--universe", "tracing-network"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (tables, _): (Vec<SourceScores<f64>>, _) = io::from_json_bytes(&out.stdout).unwrap();

    let rec = ClusterRecord::parse(EIGHT).unwrap();
    let cfg = LikelihoodConfig::new(DegreeUniverse::TracingNetwork, ProbabilityMode::Boundary);
    let want: SourceScores<f64> = exact_mle(&rec.support().unwrap(), &cfg).unwrap();
    assert_eq!(tables.len(), 1);
    assert_eq!(tables[0].labels, want.labels);
    for (a, b) in tables[0].scores.iter().zip(&want.scores) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn generate_spread_trace_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let out = epitrace(d, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["--seed", "4", "--out", "g.json", "generate", "--family", "random-tree", "--size", "40", "--count", "3"]);
    run(&["--seed", "4", "--out", "e.json", "spread", "--input", "g.json", "--stop-fraction", "0.5"]);
    run(&["--seed", "4", "--out", "r.json", "trace", "--input", "e.json", "--strategy", "dfs", "--estimator", "rumor-centrality"]);
    run(&["--out", "m.csv", "evaluate", "--runs", "r.json", "--epidemics", "e.json", "--format", "csv"]);
    let runs: Vec<TraceRun> = io::load(d.join("r.json")).unwrap();
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().all(|r| r.stages() == 20));
    let csv = std::fs::read_to_string(d.join("m.csv")).unwrap();
    assert!(csv.starts_with("instance,"));

    let out = epitrace(d, &["evaluate", "--runs", "r.json", "--epidemics", "e.json"]);
    let (reports, _): (Vec<EvalReport>, _) = io::from_json_bytes(&out.stdout).unwrap();
    assert_eq!(reports[0].metric, "average-error");
    assert_eq!(reports[0].instances.len(), 3);
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| epitrace(dir.path(), args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["trace", "--no-such-flag"]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["spread", "--input", "missing.json"]), Some(2));
    std::fs::write(dir.path().join("bad.cluster"), "case a\nedge a zz\n").unwrap();
    let out = epitrace(dir.path(), &["estimate", "--cluster", "bad.cluster"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
