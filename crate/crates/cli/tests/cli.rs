use std::path::PathBuf;
use std::process::{Command, Output};

use contextual_cli::run;

fn contextual(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contextual"))
        .args(args)
        .env_remove("CONTEXTUAL_SEED")
        .output()
        .unwrap()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

fn first_line(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).lines().next().unwrap_or_default().to_string()
}

#[test]
fn csv_headers() {
    let cases: [(&[&str], &str); 7] = [
        (
            &["analyze", "--kq", "1/8"],
            "context,outcome,class,delta,lambda_squared,lambda_sign,lambda,classification,phase_kind,theta,probability,reconstructed",
        ),
        (&["represent", "--kq", "1/8"], "context,kind,re_1,im_1,re_2,im_2"),
        (&["operators", "--kq", "1/8"], "context,variable,classical,quantum"),
        (&["compare-dist", "--kq", "1/8"], "context,source,value,probability"),
        (&["dispersion-free", "--kq", "1/8"], "set,context"),
        (&["verify", "--kq", "1/8"], "check,status,detail"),
        (&["sweep"], "q,theta_b1,theta_b2,distinct_states,distribution_gap"),
    ];
    for (args, header) in cases {
        let mut full = args.to_vec();
        full.extend(["--format", "csv"]);
        let out = contextual(&full);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(first_line(&out.stdout), header, "{args:?}");
    }
}

#[test]
fn json_reports_parse() {
    for sub in ["analyze", "represent", "operators", "compare-dist", "dispersion-free", "verify"] {
        let out = contextual(&[sub, "--kq", "1/4"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(doc.is_object(), "{sub}");
        assert!(out.stdout.ends_with(b"\n"));
    }
}

#[test]
fn verify_passes_on_kq() {
    let out = contextual(&["verify", "--kq", "3/8"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["passed"], serde_json::Value::Bool(true));
}

#[test]
fn verify_flags_a_non_double_stochastic_model() {
    let path = data("non_double_stochastic.json");
    let out = contextual(&["verify", "--model", path.to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["double_stochastic"], serde_json::Value::Bool(false));
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let to_file = contextual(&["analyze", "--kq", "1/8", "--out", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let to_stdout = contextual(&["analyze", "--kq", "1/8"]);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn fixed_seed_is_reproducible() {
    let run_with = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_contextual"))
            .args(["verify", "--kq", "1/4"])
            .env("CONTEXTUAL_SEED", seed)
            .output()
            .unwrap()
    };
    let a = run_with("7");
    let b = run_with("7");
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["seed"], serde_json::json!(7));
}

#[test]
fn invalid_seed_is_an_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_contextual"))
        .args(["verify", "--kq", "1/4"])
        .env("CONTEXTUAL_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CONTEXTUAL_SEED"));
}

#[test]
fn usage_errors_exit_one() {
    let cases: [&[&str]; 6] = [
        &["analyze"],
        &["analyze", "--kq", "1/8", "--model", "x.json"],
        &["analyze", "--kq", "1/2"],
        &["analyze", "--kq", "1/8", "--vars", "a,c"],
        &["analyze", "--kq", "1/8", "--vars", "a,a"],
        &["analyze", "--model", "/nonexistent/model.json"],
    ];
    for args in cases {
        let out = contextual(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    assert_eq!(run(["contextual", "--help"], &mut out, &mut err), 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("compare-dist") && text.contains("sweep"));
    assert!(err.is_empty());
}

#[test]
fn malformed_model_reports_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"points": [], "variables": {}, "extra": 1}"#).unwrap();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["contextual", "analyze", "--model", path.to_str().unwrap()], &mut out, &mut err);
    assert_eq!(code, 1);
    assert!(String::from_utf8(err).unwrap().contains("bad.json"));
}

#[test]
fn aligned_comparison_on_a_single_context() {
    let out = contextual(&["compare-dist", "--kq", "1/8", "--context", "w2,w3,w4", "--align"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"total_variation\""));
}
