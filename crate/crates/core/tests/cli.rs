use std::path::Path;
use std::process::{Command, Output};

fn skewflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewflow"))
        .args(args)
        .env_remove("SKEWFLOW_WORKERS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn thresholds_exact() {
    let o = skewflow(&["thresholds", "--d", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,value,decimal"));
    let rows: Vec<&str> = lines.take(6).collect();
    assert_eq!(
        rows,
        [
            "exp-moment,1/4,0.25",
            "existence,1/6,0.16666666666666666",
            "cg-flow,1/8,0.125",
            "flow-k1,1/4,0.25",
            "flow-k2,1/8,0.125",
            "flow-k3,1/12,0.08333333333333333"
        ]
    );
    assert!(!text.contains('\r'));
}

#[test]
fn shuffle_verify_passes() {
    let o = skewflow(&["shuffle-verify", "--mmax", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS"));
}

#[test]
fn malformed_input_exits_2() {
    for args in [
        &["fbm-check", "--no-such-key", "1"][..],
        &["fbm-check", "--h", "abc"],
        &["fbm-check", "--h"],
        &["fbm-check", "--h", "1.5"],
        &["not-a-command"],
    ] {
        let o = skewflow(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn keys_lists_defaults() {
    let o = skewflow(&["keys", "bound-scan"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("m_max"));
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> (String, serde_json::Value) {
    let prefix = dir.join(name);
    let mut args = vec!["fbm-check", "--out", prefix.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = skewflow(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    let json = serde_json::from_str(&std::fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap();
    (csv, json)
}

#[test]
fn config_file_overrides_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\ncount = 2000\nn = 8\nmethod = circulant\nseed = 5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (a, ja) = run_to(dir.path(), "a", &["--config", c, "--workers", "1"]);
    let (b, _) = run_to(dir.path(), "b", &["--config", c, "--workers", "4"]);
    assert_eq!(a, b);
    assert_eq!(ja["seed"], 5);
    assert_eq!(ja["params"]["count"], "2000");
    let (d, jd) = run_to(dir.path(), "d", &["--config", c, "--count", "1000"]);
    assert_eq!(jd["params"]["count"], "1000");
    assert_ne!(a, d);
}
