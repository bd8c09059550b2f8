use std::process::Command;

fn eigenbound() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eigenbound"))
}

#[test]
fn presets_are_listed() {
    let out = eigenbound().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "square-p1",
        "square-p2",
        "lshape-p1-adaptive",
        "lshape-p2-adaptive",
    ] {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
}

#[test]
fn run_with_overrides_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "name = cli\ndomain = unit_square\ninitial_refinements = 2\nrt_degrees = 1\nlevels = 4\n",
    )
    .unwrap();
    let out = eigenbound()
        .args(["run", "--config"])
        .arg(&cfg)
        .args([
            "--levels",
            "2",
            "--rt-degrees",
            "0,1",
            "--eigs",
            "2",
            "--svg",
            "--quiet",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = dir.path().join("cli").join("results.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    assert!(dir.path().join("cli").join("lower_bounds.svg").exists());

    let out = eigenbound().arg("summary").arg(&csv).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("8 rows over 2 steps"));
}

#[test]
fn bad_input_exits_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "fe_degree = 7\n").unwrap();
    let out = eigenbound()
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fe_degree"));

    std::fs::write(&cfg, "domain = missing/file.mesh\n").unwrap();
    let out = eigenbound()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("initial mesh"));
}
