use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
output_dir = "OUT"

[grid]
n = 8
dims = 3

[physics]
regime = "hall_only"
hall_coefficient = 1.0

[initial]
generator = "beltrami"
amplitude = 1.0
lambda = 1

[step]
dt = 1e-3
t_end = 0.005

[monitor]
sample_cadence = 1
"#;

fn hmhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmhd")).args(args).env_remove("HMHD_OUTPUT_DIR").output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let out = dir.join("out");
    let path = dir.join("run.toml");
    fs::write(&path, text.replace("OUT", out.to_str().unwrap())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_gate_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let out = hmhd(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["outcome"]["cause"], "completed");

    let run_dir = tmp.path().join("out");
    let ck = run_dir.join("checkpoint_final.bin");
    let ck = ck.to_str().unwrap();
    assert_eq!(hmhd(&["gate", ck, "--theorem", "4", "--threshold", "1e6"]).status.code(), Some(0));
    assert_eq!(hmhd(&["gate", ck, "--theorem", "3", "--threshold", "1e-3"]).status.code(), Some(5));
    assert_eq!(hmhd(&["replay", run_dir.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &CONFIG.replace("dims = 3", "dims = 4"));
    let out = hmhd(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.dims"));

    let missing = tmp.path().join("absent.toml");
    assert_eq!(hmhd(&["run", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn blowup_exits_3_and_resolution_loss_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &CONFIG.replace("t_end = 0.005", "t_end = 0.005\nmax_hm_norm = 1e-3"));
    assert_eq!(hmhd(&["run", &cfg]).status.code(), Some(3));

    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &CONFIG.replace("lambda = 1", "lambda = 2"));
    assert_eq!(hmhd(&["run", &cfg]).status.code(), Some(4));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = hallmhd::harness::ExperimentConfig::from_toml_str(&text);
        assert!(cfg.is_ok(), "{}: {}", path.display(), cfg.unwrap_err());
        seen += 1;
    }
    assert_eq!(seen, 4);
}
