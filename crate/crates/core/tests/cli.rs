use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn asl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asl"))
        .args(args)
        .env_remove("ASL_OUT_DIR")
        .output()
        .expect("spawn asl")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&value).expect("schema compiles")
}

fn assert_valid(schema_name: &str, path: &Path) {
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let s = schema(schema_name);
    let msgs: Vec<String> = match s.validate(&value) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{} fails {schema_name}: {msgs:?}", path.display());
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"law": "ipmb", "nu": 0.05, "kappa": 0.1, "gamma": 1, "d": 2, "n": 16,
  "dt": 0.01, "t_end": 0.2, "checkpoint_every": 4, "sobolev_s": [1, 2],
  "forcing": {"kind": "modes", "modes": [{"k": [1, 2], "re": 0.3}]}}"#;

#[test]
fn audit_mg_a1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = asl(&["audit", "--law", "mg", "--K", "16", "--nu", "0,0.1", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("audit_mg_A1.json");
    assert_valid("audit-report.schema.json", &path);
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["measured_sup"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn audit_preset_writes_every_condition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = asl(&["audit", "--preset", "symbol-audit-all", "--out", out]);
    // IPMB and SQG symbols are order zero, so |k|^2 |m| grows and A3 fails;
    // the MG symbol at nu = 0 grows along k = (k1, 1, 0), so A2 and A2* fail
    assert_eq!(code(&o), 1);
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 15);
    for f in &files {
        assert_valid("audit-report.schema.json", f);
    }
    let pass = |name: &str| -> bool {
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(name)).unwrap()).unwrap();
        v["pass"].as_bool().unwrap()
    };
    assert!(pass("audit_mg_A3.json"));
    assert!(!pass("audit_mg_A2.json"));
    assert!(!pass("audit_mg_A2star.json"));
    assert!(!pass("audit_ipmb_A3.json"));
    assert!(!pass("audit_sqg_A3.json"));
    assert!(pass("audit_ipmb_A2star.json"));
    assert!(pass("audit_sqg_A1.json"));
}

#[test]
fn usage_errors_exit_two() {
    let o = asl(&["run", "preset:sqg-critical-kappa-sweep"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("asl sweep"));
    assert_eq!(code(&asl(&[])), 2);
    assert_eq!(code(&asl(&["frobnicate"])), 2);
    assert_eq!(code(&asl(&["run", "--bogus"])), 2);
    assert_eq!(code(&asl(&["run"])), 2);
    assert_eq!(code(&asl(&["run", "preset:no-such-preset"])), 2);
    assert_eq!(code(&asl(&["audit", "--law", "euler"])), 2);
    assert_eq!(code(&asl(&["report", "/definitely/not/here"])), 2);
    assert_eq!(code(&asl(&["--help"])), 0);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"gamma\": 1", "\"gamma\": 2.5"));
    let o = asl(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("GammaOutOfRange") && err.contains("(0,2]"), "{err}");

    let cfg = write_config(dir.path(), &SMALL.replace("\"n\": 16", "\"n\": 16, \"mystery\": 1"));
    let o = asl(&["run", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mystery"));

    let cfg = write_config(dir.path(), "not json");
    assert_eq!(code(&asl(&["run", &cfg])), 2);
    assert_eq!(code(&asl(&["run", "/no/such/config.json"])), 2);
}

#[test]
fn run_outputs_are_valid_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), SMALL);
    for dir in [a.path(), b.path()] {
        let o = asl(&["run", &cfg, "--out", dir.to_str().unwrap(), "--seed", "4"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["diagnostics.csv", "summary.json", "final.aslb"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    assert_valid("run-summary.schema.json", &a.path().join("summary.json"));
    let csv = fs::read_to_string(a.path().join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,l2,h1,h2,linf,grad_ld,energy_residual,gevrey_tau,dealias_energy_fraction,step,max_imag\n"));
    assert_eq!(csv.lines().count(), 1 + 6);

    let c = tempfile::tempdir().unwrap();
    let o = asl(&["run", &cfg, "--out", c.path().to_str().unwrap(), "--seed", "5"]);
    assert_eq!(code(&o), 0);
    assert_ne!(fs::read(a.path().join("final.aslb")).unwrap(), fs::read(c.path().join("final.aslb")).unwrap());
}

#[test]
fn out_dir_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_asl"))
        .args(["run", &cfg])
        .env("ASL_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.join("summary.json").exists());
}

#[test]
fn resume_reproduces_the_uninterrupted_run() {
    let full = tempfile::tempdir().unwrap();
    let part = tempfile::tempdir().unwrap();
    let cfg = write_config(full.path(), &SMALL.replace("\"kappa\": 0.1", "\"kappa\": 0.1, \"integrator\": \"ab2-if\""));
    let o = asl(&["run", &cfg, "--out", full.path().to_str().unwrap(), "--checkpoint-every", "7"]);
    assert_eq!(code(&o), 0);
    let ck = full.path().join("checkpoint_00000014.aslb");
    assert!(ck.exists());
    let o = asl(&[
        "resume",
        "--checkpoint",
        ck.to_str().unwrap(),
        "--config",
        &cfg,
        "--out",
        part.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(full.path().join("final.aslb")).unwrap(), fs::read(part.path().join("final.aslb")).unwrap());
    let whole = fs::read_to_string(full.path().join("diagnostics.csv")).unwrap();
    let tail = fs::read_to_string(part.path().join("diagnostics.csv")).unwrap();
    // resumed series starts at step 14 (a record at t = 0.14 is not a checkpoint, so only the later rows align)
    let whole_rows: Vec<&str> = whole.lines().skip(1).collect();
    let tail_rows: Vec<&str> = tail.lines().skip(1).skip(1).collect();
    assert_eq!(&whole_rows[whole_rows.len() - tail_rows.len()..], &tail_rows[..]);
    let summary: Value = serde_json::from_str(&fs::read_to_string(part.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["resumed_from"], Value::from(14));
    assert_valid("run-summary.schema.json", &part.path().join("summary.json"));

    let bad = part.path().join("bad.aslb");
    fs::write(&bad, b"NOPE").unwrap();
    let o = asl(&["resume", "--checkpoint", bad.to_str().unwrap(), "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("BadMagic"));
    let mismatched = write_config(part.path(), &SMALL.replace("\"nu\": 0.05", "\"nu\": 0.5"));
    let o = asl(&["resume", "--checkpoint", ck.to_str().unwrap(), "--config", &mismatched]);
    assert_eq!(code(&o), 2);
}

#[test]
fn blow_up_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"law": "sqg", "nu": 0, "kappa": 0, "gamma": 1, "d": 2, "n": 32, "dt": 0.5, "t_end": 50,
            "checkpoint_every": 1, "initial_data": {"kind": "power-law", "slope": 0.5, "l2": 10000}}"#,
    );
    let o = asl(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("blow-up"));
    assert!(dir.path().join("diagnostics.csv").exists());
}

#[test]
fn strict_mode_turns_warnings_into_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"law": "sqg", "nu": 0, "kappa": 0, "gamma": 1, "d": 2, "n": 32, "dt": 0.5, "t_end": 0.5,
            "initial_data": {"kind": "power-law", "l2": 10}}"#,
    );
    let o = asl(&["run", &cfg, "--out", dir.path().to_str().unwrap(), "--strict"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn ipmb_preset_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = asl(&["sweep", "preset:ipmb-nu-sweep", "--out", out, "--workers", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("convergence.json");
    assert_valid("convergence-report.schema.json", &path);
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["monotone"], Value::Bool(true));
    assert_eq!(v["values"], serde_json::json!([0.1, 0.05, 0.025, 0.0125]));

    let o = asl(&["report", out]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("sweep over nu"));
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn sweep_of_a_plain_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = asl(&["sweep", &cfg, "--param", "kappa", "--values", "0.1,0.05,0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid("convergence-report.schema.json", &out.join("convergence.json"));
    assert_eq!(code(&asl(&["sweep", &cfg, "--values", "0.1,0"])), 2);
    assert_eq!(code(&asl(&["sweep", &cfg, "--param", "gamma", "--values", "0.1,0"])), 2);
}

#[test]
fn report_renders_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert_eq!(code(&asl(&["run", &cfg, "--out", out.to_str().unwrap()])), 0);
    let o = asl(&["report", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("run: law ipmb"));
    assert!(text.contains("realness"));
}
