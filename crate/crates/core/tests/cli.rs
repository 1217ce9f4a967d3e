use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn jsdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jsdm")).args(args).output().unwrap()
}

fn scenario(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_reports_the_scenario() {
    let o = jsdm(&["validate", &scenario("fig2_common_scatterer.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("M = 400"), "{out}");
    assert!(out.contains("2 profiles, 100 users"), "{out}");
}

#[test]
fn select_picks_user_two_only() {
    let o = jsdm(&["select", &scenario("sec4c_two_user_example.toml")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next().unwrap(), "selected: 2");

    let o = jsdm(&["select", &scenario("sec4c_two_user_example.toml"), "--algorithm", "greedy2", "-q"]);
    assert_eq!(stdout(&o).trim(), "selected: 1 2");
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    assert_eq!(jsdm(&[]).status.code(), Some(1));
    assert_eq!(jsdm(&["select"]).status.code(), Some(1));
    assert_eq!(jsdm(&["--help"]).status.code(), Some(0));
    assert_eq!(jsdm(&["validate", "/nonexistent.toml"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[geometry]\nM = 0\nD = 0.5\n[eval]\nsnr_db = [0.0]\n").unwrap();
    let o = jsdm(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = jsdm(&["select", &scenario("sec4c_two_user_example.toml"), "--algorithm", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = jsdm(&["validate", &scenario("sec4c_two_user_example.toml"), "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let s = scenario("sec4c_two_user_example.toml");
    for (out, seed) in [(&a, "4"), (&b, "4"), (&c, "5")] {
        let o = jsdm(&["sweep", &s, "-o", out.to_str().unwrap(), "--seed", seed, "--trials", "10", "-q"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn compare_writes_one_series_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let o = jsdm(&[
        "compare",
        &scenario("sec4c_two_user_example.toml"),
        "-o",
        out.to_str().unwrap(),
        "--modes",
        "covariance,orthogonalization",
        "--algorithms",
        "greedy1,exhaustive-q2",
        "--trials",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 3);
}

#[test]
fn import_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let profiles = dir.path().join("p.toml");
    let o = jsdm(&[
        "import-mpc",
        &scenario("raytrace_template.csv"),
        "-o",
        profiles.to_str().unwrap(),
        "--antennas",
        "100",
        "--reference-tx-dbm",
        "30",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("imported 3 users"));
    let body = std::fs::read_to_string(&profiles).unwrap();
    let full = dir.path().join("s.toml");
    std::fs::write(
        &full,
        format!("[geometry]\nM = 100\nD = 0.5\n[eval]\ntx_power_dbm = [30.0]\n{body}"),
    )
    .unwrap();
    assert_eq!(jsdm(&["validate", full.to_str().unwrap()]).status.code(), Some(0));
}
