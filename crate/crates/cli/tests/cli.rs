use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hcran-sim"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hcran-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn writes_csv_json_and_trace() {
    let dir = scratch("outputs");
    let out = dir.join("run.csv");
    let status = bin()
        .args(["--sweep", "p_rs=1,2", "--metric", "outage,crra_ic", "--scheme", "ic", "--trials", "2000"])
        .args(["--crra-instances", "3", "--json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 1 + 4);
    assert!(body[1].starts_with("p_rs,1,ic,outage,"));
    assert!(body[2].starts_with("p_rs,1,ic,crra_ic,,"));
    let json = std::fs::read_to_string(dir.join("run.json")).unwrap();
    assert!(json.contains("\"metric\": \"crra_ic\""));
    let trace = std::fs::read_to_string(dir.join("run.trace.csv")).unwrap();
    assert!(trace.lines().any(|l| l.starts_with("p_rs,2,ic,")));
}

#[test]
fn config_file_supplies_the_experiment() {
    let dir = scratch("config");
    let cfg = dir.join("exp.toml");
    std::fs::write(
        &cfg,
        r#"
[system]
n_b = 6
m = 3
k = 1
p_m = 1.0
p_r = 1.0
p_rs_i = [1.0, 1.0, 1.0]

[experiment]
sweep = "gamma_th=-5:5:5"
metrics = ["outage", "ber"]
schemes = ["bf"]
trials = 1000
"#,
    )
    .unwrap();
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("# system.m = 3"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("gamma_th,")).count(), 3 * 2);
}

#[test]
fn invalid_input_exits_with_two() {
    for args in [
        vec!["--sweep", "gamma_th=3,1"],
        vec!["--sweep", "radius=1"],
        vec!["--sweep", "gamma_th=0", "--metric", "sinr"],
        vec!["--sweep", "n_b=2"],
        vec![],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn infeasible_power_allocation_exits_with_three() {
    let dir = scratch("infeasible");
    let cfg = dir.join("exp.toml");
    std::fs::write(&cfg, "[system]\nn_b = 6\nm = 2\nk = 2\np_m = 1.0\np_r = 1.0\np_rs_i = [1.0, 1.0]\nr_ms = 60.0\n").unwrap();
    let out = bin()
        .arg("--config")
        .arg(&cfg)
        .args(["--sweep", "p_rs=1", "--metric", "crra_bf", "--scheme", "bf", "--crra-instances", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn list_shows_both_registries() {
    let out = bin().arg("--list").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["outage", "capacity", "ber", "crra_ic", "crra_bf"] {
        assert!(text.contains(&format!("metric {name}")), "{name}");
    }
    assert!(text.contains("scheme ic") && text.contains("scheme bf"));
}
