use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const GOLDEN_REGRET: &str = "\
t,node,cumulative_regret,average_regret
1,0,0.26064418852275661,0.26064418852275661
1,1,0.21418641335379718,0.21418641335379718
2,0,0.39760474506328392,0.19880237253164196
2,1,0.31266832222076757,0.15633416111038378
3,0,0.84437986246936814,0.28145995415645603
3,1,0.48317949718132414,0.16105983239377472
4,0,1.2040542231706310,0.30101355579265776
4,1,0.56652801746477510,0.14163200436619378
5,0,1.3763499676644377,0.27526999353288756
5,1,0.79485356918913830,0.15897071383782765
";

fn fogalloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fogalloc")).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = fogalloc(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_kind(args: &[&str]) -> String {
    let out = fogalloc(args);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stderr).unwrap();
    doc["error"]["kind"].as_str().unwrap().to_string()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn validate_spec_reports_dimensions_and_warnings() {
    let doc = ok_json(&["validate-spec", "--game", "game1"]);
    assert_eq!((doc["K"].as_u64(), doc["M"].as_u64()), (Some(2), Some(2)));
    assert_eq!(doc["warnings"].as_array().unwrap().len(), 1);
    let doc = ok_json(&["validate-spec", "--game", "dataset", "--nodes", "4", "--tasks", "6"]);
    assert_eq!((doc["K"].as_u64(), doc["M"].as_u64()), (Some(4), Some(6)));
}

#[test]
fn solve_nash_prints_the_equilibrium() {
    let doc = ok_json(&["solve-nash", "--game", "game1"]);
    let x = &doc["x_star"];
    assert!((x[0][1].as_f64().unwrap() - 0.068_675_344).abs() < 1e-6);
    assert!((x[1][0].as_f64().unwrap() - 0.104_563_126).abs() < 1e-6);
    assert_eq!(doc["converged"], Value::Bool(true));
}

#[test]
fn tiny_run_matches_golden_regret() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "run", "--strategy", "bgam", "--T", "5", "--seeds", "1", "--master-seed", "3", "--noise-std", "0", "--out", out,
    ];
    assert!(fogalloc(&args).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("regret_bgam.csv")).unwrap(), GOLDEN_REGRET);
}

#[test]
fn run_writes_every_result_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let status = fogalloc(&[
        "run", "--strategy", "bgam,lbwi,llr", "--T", "40", "--seeds", "2", "--master-seed", "1", "--trace", "--out", out,
    ])
    .status;
    assert!(status.success());
    let p = |name: &str| dir.path().join(name);
    for s in ["bgam", "lbwi", "llr"] {
        assert_eq!(header(&p(&format!("regret_{s}.csv"))), "t,node,cumulative_regret,average_regret");
        assert_eq!(header(&p(&format!("histogram_{s}.csv"))), "seed,node,task,bin,bin_lo,bin_hi,count");
        assert_eq!(header(&p(&format!("final_actions_{s}.csv"))), "seed,node,task,final_window_mean,tail_mean");
        for seed in 0..2 {
            let trace = fs::read_to_string(p(&format!("trace_{s}_seed{seed}.csv"))).unwrap();
            assert_eq!(trace.lines().next().unwrap(), "t,node,task,x,a,clean_utility,observed_utility");
            assert_eq!(trace.lines().count(), 1 + 40 * 4);
        }
        assert_eq!(fs::read_to_string(p(&format!("regret_{s}.csv"))).unwrap().lines().count(), 1 + 40 * 2);
        let hist = fs::read_to_string(p(&format!("histogram_{s}.csv"))).unwrap();
        assert_eq!(hist.lines().count(), 1 + 2 * 4 * 20);
    }
    let summary: Value = serde_json::from_str(&fs::read_to_string(p("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["strategies"].as_array().unwrap().len(), 3);
    assert_eq!(summary["replicas"].as_array().unwrap().len(), 6);
}

#[test]
fn saved_config_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let args = ["run", "--strategy", "lbwi", "--T", "60", "--seeds", "2", "--out", first.path().to_str().unwrap()];
    assert!(fogalloc(&args).status.success());
    let config = first.path().join("config.json");
    let rerun = [
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        second.path().to_str().unwrap(),
    ];
    assert!(fogalloc(&rerun).status.success());
    let read = |d: &Path| fs::read(d.join("regret_lbwi.csv")).unwrap();
    assert_eq!(read(first.path()), read(second.path()));
}

#[test]
fn bench_slope_reads_a_regret_file() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--strategy", "rs", "--T", "400", "--seeds", "1", "--out", dir.path().to_str().unwrap()];
    assert!(fogalloc(&args).status.success());
    let input = dir.path().join("regret_rs.csv");
    let doc = ok_json(&["bench-slope", "--input", input.to_str().unwrap()]);
    let slope = doc["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.2, "random play regret grows linearly, slope {slope}");
}

#[test]
fn failures_print_a_json_error() {
    assert_eq!(error_kind(&["run", "--T", "0"]), "config");
    assert_eq!(error_kind(&["validate-spec", "--dataset", "/nonexistent/fog.csv"]), "io");
    assert_eq!(error_kind(&["validate-spec", "--game", "game1", "--nodes", "2"]), "config");
    assert_eq!(error_kind(&["solve-nash", "--game", "game1", "--tol", "0"]), "config");
}
