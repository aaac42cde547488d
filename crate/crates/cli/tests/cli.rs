use std::fs;
use std::process::{Command, Output};

fn tseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tseq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ringseq_certifies_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ring.json");
    let o = tseq(&["ringseq", "--r", "3/2", "--N", "60", "--kmax", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["verdict"], "certified");
    assert_eq!(report["evidence"][0]["difference"], "1");
    assert_eq!(report["evidence"][1]["difference"], "1");
    // Only the report itself is left behind.
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn reports_are_deterministic() {
    let args = ["sup-witness", "--a", "2^n", "--b", "3^n", "--g", "1", "--N", "200"];
    let a = tseq(&args);
    let b = tseq(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(4));
    assert!(stdout(&a).contains("\"largest_pair\": \"(3,2)\""));
}

#[test]
fn exit_codes_separate_refuted_from_inconclusive() {
    let o = tseq(&["nbhd-member", "--seq", "e", "--x", "2e1", "--slots", "0,2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = tseq(&["nbhd-member", "--seq", "2^n", "--x", "1", "--slots", "1", "--depth", "10"]);
    assert_eq!(o.status.code(), Some(4));
    let o = tseq(&["nbhd-member", "--seq", "2^n", "--x", "-12", "--slots", "0", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = tseq(&["sup-witness", "--a", "2^n", "--b", "2^n", "--g", "0", "--N", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("g must be non-zero"));
}

#[test]
fn track_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.json");
    fs::write(&base, r#"{"kind":"padic","p":"2","depth":64}"#).unwrap();
    let out = dir.path().join("tracked.csv");
    let o = tseq(&[
        "track", "--base", base.to_str().unwrap(), "--f", "n^2", "--eps", "default", "--N", "100", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[0], "n,f(n),eps(n),a_n,k_n");
    assert_eq!(lines[2], "2,4,1,4,2");
    assert_eq!(lines[3], "3,9,3/2,8,3");
}

#[test]
fn config_file_runs_and_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"experiment":"thm6-tau","params":{"mode":"ball-cap","n0":"3","window":"6"}}"#,
    )
    .unwrap();
    let o = tseq(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"window\": \"6\""));
    // The config's window wins over the flag.
    let o = tseq(&["freeab", "ball-cap", "--n0", "3", "--window", "2", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&o).contains("\"window\": \"6\""));
    // A config for a different experiment is refused.
    let o = tseq(&["amalgam", "check", "--c", "3", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"experiment\": \"thm2-ring\",\n  \"params\": {\"r\": \"3/2\", \"bogus\": 1}\n}").unwrap();
    let o = tseq(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.bogus"));
    fs::write(&cfg, "{\n  \"experiment\": \"thm2-ring\",\n  \"params\": [\n}").unwrap();
    let o = tseq(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn freeab_and_amalgam_commands() {
    let o = tseq(&["freeab", "witness", "--n", "2", "--slots", "3,3", "--count", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for i in 3..8 {
        assert!(s.contains(&format!("\"4e{i}\"")), "{s}");
    }
    let o = tseq(&["freeab", "compact", "--n0", "1", "--count", "2"]);
    let s = stdout(&o);
    assert!(s.contains("\"2e1\"") && s.contains("\"2e5\""), "{s}");
    let o = tseq(&["amalgam", "check", "--c", "3", "--bound", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let o = tseq(&["amalgam", "push", "--a", "2^n", "--c", "4", "--N", "2", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows[2]["e2"], "(4,0)");
    assert_eq!(rows[2]["equal"], "true");
}

#[test]
fn gaps_flags_the_identity_sequence() {
    let o = tseq(&["gaps", "--seq", "n", "--N", "100", "--blocks", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("\"violation_at\": \"1\""));
}
