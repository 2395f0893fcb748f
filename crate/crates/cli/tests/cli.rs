use std::path::{Path, PathBuf};
use std::process::Command;

use rankselect_core::harness::validate_json;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rankselect"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rankselect-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const KN: &str = r#"schema_version = 1

[instance]
generator = "slippage"
k = 4
delta = 0.5
variance = 1.0

[procedure]
name = "kn"
alpha = 0.05
delta = 0.5
n0 = 10

[harness]
seed = 3
replications = 30
"#;

fn write_config(name: &str, text: &str) -> String {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn every_shipped_config_runs_and_evaluates() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        seen += 1;
        let p = path.display().to_string();
        let (code, stdout, stderr) = run(&["run", "--config", &p]);
        assert_eq!(code, 0, "{p}: {stderr}");
        assert!(stdout.contains("selected: "), "{p}");
        let text = std::fs::read_to_string(&path).unwrap();
        if text.contains("replications") {
            let (code, stdout, stderr) = run(&["eval", "--config", &p, "--jobs", "2"]);
            assert_eq!(code, 0, "{p}: {stderr}");
            assert!(stdout.contains("verdict: "), "{p}");
        }
    }
    assert!(seen >= 10);
}

#[test]
fn run_kn_prints_summary() {
    let p = write_config("kn.toml", KN);
    let (code, stdout, _) = run(&["run", "--config", &p]);
    assert_eq!(code, 0);
    assert!(stdout.contains("procedure: kn"));
    let samples = stdout.lines().find(|l| l.starts_with("samples: ")).unwrap();
    let counts: Vec<u64> = samples[9..].split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(counts.len(), 4);
    let total = stdout.lines().find(|l| l.starts_with("total: ")).unwrap();
    assert_eq!(total[7..].parse::<u64>().unwrap(), counts.iter().sum::<u64>());
}

#[test]
fn run_is_byte_identical() {
    let p = write_config("kn_repeat.toml", KN);
    let a = bin().args(["run", "--config", &p, "--trace"]).output().unwrap();
    let b = bin().args(["run", "--config", &p, "--trace"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().contains("stage,eliminated_index"));
}

#[test]
fn seed_flag_overrides_file() {
    let p = write_config("kn_seed.toml", KN);
    let (_, a, _) = run(&["run", "--config", &p, "--seed", "99"]);
    assert!(a.contains("seed: 99"));
    let (_, b, _) = run(&["run", "--config", &p]);
    assert!(b.contains("seed: 3"));
}

#[test]
fn missing_delta_exits_1_with_key() {
    let p = write_config("kn_nodelta.toml", &KN.replace("delta = 0.5\nn0", "n0"));
    let (code, _, stderr) = run(&["run", "--config", &p]);
    assert_eq!(code, 1);
    assert!(stderr.contains("procedure.delta"), "{stderr}");
}

#[test]
fn unknown_key_exits_1_with_key() {
    let p = write_config("kn_unknown.toml", &KN.replace("n0 = 10", "n0 = 10\nn1 = 3"));
    let (code, _, stderr) = run(&["run", "--config", &p]);
    assert_eq!(code, 1);
    assert!(stderr.contains("procedure.n1"), "{stderr}");
}

#[test]
fn budget_cap_exits_2() {
    let text = r#"schema_version = 1

[instance]
generator = "equal_means"
k = 2
variance = 1.0

[procedure]
name = "fhn"
alpha = 0.05
n0 = 10
budget_cap = 30

[harness]
seed = 1
"#;
    let p = write_config("fhn_cap.toml", text);
    let (code, stdout, _) = run(&["run", "--config", &p]);
    assert_eq!(code, 2, "{stdout}");
    assert!(stdout.contains("terminated_by: budget_cap"));
}

#[test]
fn pool_failure_exits_2() {
    let text = r#"schema_version = 1

[instance]
generator = "slippage"
k = 4
delta = 0.5
variance = 1.0

[procedure]
name = "aps"
alpha = 0.05
delta = 0.5
n0 = 10

[harness]
seed = 1

[pool]
backend = "simulated"
workers = 2
delay = "constant:1"
fail_job = 5
"#;
    let p = write_config("aps_fail.toml", text);
    let (code, stdout, _) = run(&["run", "--config", &p, "--trace"]);
    assert_eq!(code, 2);
    assert!(stdout.contains("aborted"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["run"]).0, 1);
    assert_eq!(run(&["run", "--config", "/nonexistent/file.toml"]).0, 1);
    assert_eq!(run(&["constants", "nope", "--k", "2", "--alpha", "0.05"]).0, 1);
}

#[test]
fn eval_csv_and_verdict() {
    let p = write_config("kn_eval.toml", KN);
    let out = scratch("kn_eval.csv");
    let o = out.display().to_string();
    let (code, stdout, _) = run(&["eval", "--config", &p, "--out", &o, "--format", "csv"]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "procedure,k,config_hash,R,pcs_hat,pcs_se,pgs_hat,pgs_se,eoc_hat,eoc_se,mean_N,mean_N_se,runtime_s"
    );
    assert!(lines.next().unwrap().starts_with("kn,4,"));
    let verdict = stdout.lines().last().unwrap();
    assert!(verdict.starts_with("verdict: PASS") || verdict.starts_with("verdict: FAIL"), "{verdict}");
}

#[test]
fn eval_single_replication_inconclusive() {
    let p = write_config("kn_r1.toml", &KN.replace("replications = 30", "replications = 1"));
    let (code, stdout, _) = run(&["eval", "--config", &p]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict: INCONCLUSIVE"));
}

#[test]
fn eval_json_validates() {
    let p = write_config("kn_json.toml", KN);
    let out = scratch("kn_eval.json");
    let o = out.display().to_string();
    let (code, _, _) = run(&["eval", "--config", &p, "--out", &o, "--format", "json"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    validate_json(&doc["report"], &doc["schema"]).unwrap();
    assert_eq!(doc["config"]["replications"], 30);
    assert_eq!(doc["config"]["procedure"]["name"], "kn");
}

#[test]
fn eval_is_reproducible_across_jobs() {
    let p = write_config("kn_jobs.toml", KN);
    let strip = |s: &str| -> String {
        let row = s.lines().nth(1).unwrap();
        row.rsplit_once(',').unwrap().0.to_string()
    };
    let (_, a, _) = run(&["eval", "--config", &p, "--jobs", "1"]);
    let (_, b, _) = run(&["eval", "--config", &p, "--jobs", "3"]);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn eval_unwritable_out_exits_1() {
    let p = write_config("kn_unwritable.toml", KN);
    let (code, _, stderr) = run(&["eval", "--config", &p, "--out", "/nonexistent/dir/report.csv"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("/nonexistent/dir/report.csv"));
}

#[test]
fn eval_without_harness_section() {
    let text = KN.replace("replications = 30\n", "");
    let p = write_config("kn_noharness.toml", &text);
    let (code, _, stderr) = run(&["eval", "--config", &p]);
    assert_eq!(code, 1);
    assert!(stderr.contains("harness.replications"));
}

fn constant(args: &[&str]) -> f64 {
    let (code, stdout, stderr) = run(args);
    assert_eq!(code, 0, "{stderr}");
    let v = stdout.split(" = ").nth(1).unwrap();
    v.split(' ').next().unwrap().parse().unwrap()
}

#[test]
fn constants_subcommand() {
    let h = constant(&["constants", "bechhofer_h", "--k", "2", "--alpha", "0.05"]);
    assert!((h - 1.6449).abs() < 1e-4, "{h}");
    let eta = constant(&["constants", "kn_eta", "--k", "10", "--n0", "20", "--alpha", "0.05"]);
    assert!((eta - 0.3030).abs() < 5e-4, "{eta}");
    let h = constant(&["constants", "rinott_h", "--k", "2", "--n0", "10000", "--alpha", "0.05"]);
    assert!((h - 2.326).abs() < 5e-3, "{h}");
    let (_, stdout, _) = run(&["constants", "rinott_h", "--k", "2", "--n0", "20", "--alpha", "0.05"]);
    assert!(stdout.contains("residual"));
}

#[test]
fn constants_bad_parameters_exit_1() {
    assert_eq!(run(&["constants", "bechhofer_h", "--k", "1", "--alpha", "0.05"]).0, 1);
    assert_eq!(run(&["constants", "bechhofer_h", "--k", "3", "--alpha", "0.9"]).0, 1);
    assert_eq!(run(&["constants", "rinott_h", "--k", "3", "--alpha", "0.05"]).0, 1);
    assert_eq!(run(&["constants", "kn_eta", "--k", "3", "--n0", "1", "--alpha", "0.05"]).0, 1);
}
