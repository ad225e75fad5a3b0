use serde_json::Value;
use shubinlab::cli::config::ExperimentConfig;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shubinlab"));
    cmd.current_dir(dir).args(args).env_remove("SHUBINLAB_JOBS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run(args: &[&str]) -> Output {
    run_in(&std::env::temp_dir(), args, &[])
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn battery(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("batteries").join(name)
}

#[test]
fn harmonic_eigenvalues_as_a_csv_row() {
    let out = run(&["eig", "--k", "1", "--m", "1", "--d", "1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1,3,5,7,9\r\n");
}

#[test]
fn critical_regime_report() {
    let out = run(&["grushin", "regimes", "--gamma", "1", "--s", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["regime"], "critical");
    assert_eq!(v["tool"], "shubinlab");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["command"], "grushin");
    assert!(v["provenance"].is_object());
}

#[test]
fn invalid_configurations_exit_with_two() {
    assert_eq!(run(&["eig", "--k", "1", "--bogus", "2"]).status.code(), Some(2));
    assert_eq!(run(&["eig", "--k", "1", "--m", "1", "--d", "1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"command":"eig","params":{"k":1,"m":1,"d":1,"n":3},"colour":"red"}"#).unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, r#"{"command":"eig","params":{"k":1,"m":1,"d":1,"n":3,"extra":0}}"#).unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap()]).status.code(), Some(2));
    // flags for one command against a config for another
    std::fs::write(&path, r#"{"command":"hum","params":{}}"#).unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap(), "eig", "--n", "2"]).status.code(), Some(2));
    let out = run_in(dir.path(), &["eig", "--k", "1", "--m", "1", "--d", "1", "--n", "2"], &[("SHUBINLAB_JOBS", "0")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let out = run(&["eig", "--k", "2", "--m", "1", "--d", "1", "--n", "40", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not converged"));
}

#[test]
fn violated_verdicts_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.json");
    let cal = battery("calibration.json");
    let out = run(&["calibrate", "--battery", cal.to_str().unwrap(), "--output", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let verify = |profile: &str, set: &str| {
        run(&[
            "verify-ineq",
            "--model",
            r#"{"k":1,"m":1,"d":1,"basis_size":64}"#,
            "--profile",
            profile,
            "--set",
            set,
            "--lambdas",
            "[10]",
            "--calibration",
            table.to_str().unwrap(),
        ])
    };
    // θ near 1 and tiny L push the fitted bound below the true ratio
    let half = r#"{"type":"half_space","normal":[1],"offset":0}"#;
    let out = verify(r#"{"rho":{"type":"constant","l":0.01},"sigma":{"type":"constant","theta":0.99}}"#, half);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["violations"], 1);
    let out = verify(r#"{"rho":{"type":"constant","l":1},"sigma":{"type":"constant","theta":0.5}}"#, r#"{"type":"full","d":1}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reports"][0]["verdict"], "holds");
}

#[test]
fn embedded_config_round_trips() {
    let out = run(&[
        "grushin", "witness", "--gamma", "1", "--s", "1/2", "--L-dist", "1", "--T", "1", "--eps", "0.5", "--n-max", "20",
        "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let embedded = json(&out)["config"].clone();
    let cfg: ExperimentConfig = serde_json::from_value(embedded.clone()).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(serde_json::to_value(&cfg).unwrap(), embedded);
    // re-running the embedded config reproduces the report
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let again = run(&["--config", path.to_str().unwrap()]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"command":"eig","params":{"k":1,"m":1,"d":1,"n":3}}"#).unwrap();
    assert_eq!(stdout(&run(&["--config", path.to_str().unwrap()])), "1,3,5\r\n");
    let out = run(&["--config", path.to_str().unwrap(), "eig", "--n", "2", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["config"]["params"]["n"], 2);
    assert_eq!(v["config"]["params"]["k"], 1);
    assert_eq!(v["config"]["output"]["format"], "json");
}

#[test]
fn writes_only_the_declared_output() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("eig.csv");
    let out = run_in(dir.path(), &["eig", "--k", "1", "--m", "1", "--d", "1", "--n", "3", "--output", "eig.csv"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&target).unwrap(), "1,3,5\r\n");
    // the columns go to the file and the report to stdout
    assert_eq!(json(&out)["config"]["output"]["path"], "eig.csv");
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("eig.csv")]);
    let report = dir.path().join("r.json");
    let out = run_in(dir.path(), &["grushin", "regimes", "--gamma", "2", "--s", "1", "--output", "r.json"], &[]);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["regime"], "weak");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn plot_columns_have_headers() {
    let out = run(&["asymptotics", "study", "--k-grid", "[2,4,8]", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["k", "lambda_k", "upper", "lower_expr"]);
    let rows: Vec<Vec<f64>> = reader.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] <= r[2]));
    let out = run(&[
        "grushin", "witness", "--gamma", "1", "--s", "0.5", "--L-dist", "1", "--T", "1", "--eps", "0.5", "--n-max", "5",
        "--format", "csv",
    ]);
    assert!(stdout(&out).starts_with("n,exponent\r\n"), "{}", stdout(&out));
}

#[test]
fn worker_count_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let val = battery("validation.json");
    let args = ["verify-ineq", "--battery", val.to_str().unwrap()];
    let one = run_in(dir.path(), &args, &[("SHUBINLAB_JOBS", "1")]);
    let four = run_in(dir.path(), &args, &[("SHUBINLAB_JOBS", "4")]);
    let flag = run_in(dir.path(), &["--jobs", "2", args[0], args[1], args[2]], &[("SHUBINLAB_JOBS", "0")]);
    assert_eq!(one.status.code(), four.status.code());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, flag.stdout);
}
