use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-secrecy"))
}

fn small_sweep(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("small.toml");
    fs::write(&cfg, "[experiment]\nkind = \"power\"\ngrid = [10.0, 30.0]\ntrials = 200\ndrops = 3\nbaselines = [\"random-phase\", \"uav-only\"]\n").unwrap();
    cfg
}

#[test]
fn sweep_outputs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep(dir.path());
    let mut outputs = Vec::new();
    for threads in ["1", "4", "1"] {
        let out = dir.path().join(format!("t{threads}-{}", outputs.len()));
        let status = bin().args(["sweep", "--config", cfg.to_str().unwrap(), "--threads", threads, "--out", out.to_str().unwrap()]).output().unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        outputs.push((fs::read(out.join("sweep.csv")).unwrap(), fs::read(out.join("metrics.csv")).unwrap()));
        assert!(out.join("timing.csv").exists());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3);
    assert!(text.starts_with("grid,scheme,weighted,weighted_stderr,p_out_0"));
}

#[test]
fn run_writes_report_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = bin().args(["run", "--trials", "500", "--seed", "3", "--out", out.to_str().unwrap()]).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let iterations = report["iterations"].as_u64().unwrap();
    assert!(iterations >= 1 && iterations <= 30);
    assert!(report["stationarity"].is_object());
    let history = fs::read_to_string(out.join("history.csv")).unwrap();
    assert_eq!(history.lines().count() as u64, iterations + 1);
    let outage = fs::read_to_string(out.join("outage.csv")).unwrap();
    assert!(outage.starts_with("grid,scheme,user,metric,value,stderr,seed\n"));
    assert!(outage.lines().all(|l| l.ends_with(",3") || l.ends_with(",seed")));
}

#[test]
fn validate_bernstein_reports_failing_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let res = bin().args(["validate-bernstein", "--trials", "20000", "--out", dir.path().to_str().unwrap()]).output().unwrap();
    let stdout = String::from_utf8_lossy(&res.stdout);
    let rows = fs::read_to_string(dir.path().join("bernstein.csv")).unwrap();
    assert_eq!(rows.lines().count(), 101);
    let failing = rows.lines().skip(1).filter(|l| l.ends_with(",false")).count();
    assert_eq!(res.status.code(), Some(if failing == 0 { 0 } else { 1 }), "{stdout}");
    assert!(stdout.contains("random boundary blocks within eps + 3 stderr"));
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["run", "--seed", "x"]).output().unwrap().status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[experiment]\ndrops = 0\n").unwrap();
    assert_eq!(bin().args(["sweep", "--config", cfg.to_str().unwrap()]).output().unwrap().status.code(), Some(2));
    fs::write(&cfg, "[unknown]\nx = 1\n").unwrap();
    assert_eq!(bin().args(["run", "--config", cfg.to_str().unwrap()]).output().unwrap().status.code(), Some(2));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ris_secrecy::harness::RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap();
        n += 1;
    }
    assert!(n >= 7);
    let default = ris_secrecy::harness::RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")).unwrap();
    assert_eq!(default, ris_secrecy::harness::RunConfig::default());
}
