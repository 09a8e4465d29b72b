use std::path::{Path, PathBuf};
use std::process::Command;

fn qliang() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qliang"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn run_into(cfg: &Path, out: &Path) -> std::process::Output {
    qliang().arg("run").arg(cfg).arg("--out").arg(out).output().unwrap()
}

#[test]
fn run_writes_one_csv_per_flow_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = run_into(&scenario("fig1a"), &a);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(run_into(&scenario("fig1a"), &b).status.success());

    let mut names: Vec<String> =
        std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    for flow in ["AB-to-C", "A-to-C", "B-to-C"] {
        assert!(names.contains(&format!("fig1a_{flow}.csv")), "{names:?}");
        assert!(names.contains(&format!("fig1a_{flow}.svg")), "{names:?}");
    }
    for name in &names {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }

    let csv = std::fs::read_to_string(a.join("fig1a_AB-to-C.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,S_target,S_target_frozen,T_cum_bits,T_rate_bits_per_time");
    assert_eq!(lines.count(), 50);
}

#[test]
fn empty_flow_list_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"name": "bad", "sites": ["A", "B"], "couplings": [["A", "B", 1.0]],
            "initial": {"A": "maximally_mixed", "B": {"pure": "0"}},
            "flows": [], "grid": {"t_max": 1.0, "steps": 10}}"#,
    )
    .unwrap();
    let out = run_into(&cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = qliang()
        .env("QLIANG_DIM_CAP", "16")
        .arg("run")
        .arg(scenario("fig3a"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn plot_rejects_single_column_csv_and_draws_multi_series() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    std::fs::write(&one, "t\n0\n1\n").unwrap();
    let out = qliang().arg("plot").arg(&one).arg(dir.path().join("one.svg")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed CSV"));

    assert!(run_into(&scenario("fig1a"), dir.path()).status.success());
    let svg = dir.path().join("plot.svg");
    let status = qliang().arg("plot").arg(dir.path().join("fig1a_summary.csv")).arg(&svg).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 4);
    assert!(text.contains(">bits<") && text.contains(">t<"));
}

#[test]
fn validate_subcommand_reports_json_lines() {
    let out = qliang().arg("validate").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["passed"], true, "{line}");
    }
}
