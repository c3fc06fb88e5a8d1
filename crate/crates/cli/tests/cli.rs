use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn immerse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_immerse"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn list_names_the_catalog() {
    let o = immerse(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "clifford_torus_slice",
        "latitude_sphere_nonminimal",
        "clifford_x_clifford_S3xS3",
    ] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(
        code(&immerse(&[
            "check",
            "clifford_torus_slice",
            "--grid",
            "3,3"
        ])),
        0
    );
    assert_eq!(
        code(&immerse(&[
            "check",
            "latitude_sphere_nonminimal",
            "--checks",
            "minimality"
        ])),
        1
    );
    assert_eq!(code(&immerse(&["check", "no_such_entry"])), 2);
    assert_eq!(
        code(&immerse(&["check", "clifford_torus_slice", "--h", "0.5"])),
        2
    );
    assert_eq!(code(&immerse(&["frobnicate"])), 2);
}

#[test]
fn failing_minimality_reports_unit_mean_curvature() {
    let o = immerse(&[
        "check",
        "latitude_sphere_nonminimal",
        "--checks",
        "minimality",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let agg = &v["aggregates"][0];
    assert_eq!(agg["name"], "minimality");
    assert_eq!(agg["verdict"], "fail");
    assert!((agg["maxAbs"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn empty_filter_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = immerse(&[
        "check",
        "clifford_torus_slice",
        "--checks",
        "",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty checks filter"));
    assert!(!out.exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let p = dir.path().join(name);
        let mut args = vec![
            "check",
            "diagonal_sphere_S2xS2",
            "--out",
            p.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        assert_eq!(code(&immerse(&args)), 0);
        fs::read(p).unwrap()
    };
    let a = run("a.json", &[]);
    assert_eq!(a, run("b.json", &[]));
    assert_eq!(a, run("c.json", &["--sequential"]));
    let csv = run("d.csv", &["--format", "csv"]);
    assert_eq!(csv, run("e.csv", &["--format", "csv"]));
}

#[test]
fn config_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("torus.csv");
    let cfg = dir.path().join("torus.toml");
    fs::write(
        &cfg,
        format!(
            r#"[target]
c1 = 1.0
n1 = 3
c2 = 0.0
n2 = 1

[immersion]
name = "torus"
chart = [[0.0, 6.283185307179586], [0.0, 6.283185307179586]]
map = ["cos(u1)/sqrt(2)", "sin(u1)/sqrt(2)", "cos(u2)/sqrt(2)", "sin(u2)/sqrt(2)", "0"]

[grid]
points = [4, 4]

[checks]
names = ["gauss_residual", "minimality", "takahashi_lower"]

[output]
path = "{}"
format = "csv"
"#,
            out.display()
        ),
    )
    .unwrap();
    let o = immerse(&["check", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 * 3);

    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        "[immersion]\nentry = \"clifford_torus_slice\"\n[grid]\npoints = [9, 9]\nstep = 1\n",
    )
    .unwrap();
    let o = immerse(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("line 5"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!Path::new("report.json").exists());
}

#[test]
fn convergence_table() {
    let o = immerse(&[
        "convergence",
        "clifford_torus_slice",
        "--check",
        "gauss_residual",
        "--h",
        "1e-2,5e-3,2.5e-3",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let t = &v["convergence"];
    assert_eq!(t["monotone"], true);
    assert_eq!(t["rows"].as_array().unwrap().len(), 3);
    for order in t["orders"].as_array().unwrap() {
        assert!(order.as_f64().unwrap() >= 2.0);
    }
    let o = immerse(&[
        "convergence",
        "clifford_torus_slice",
        "--check",
        "slice_classifier",
        "--h",
        "1e-2,5e-3",
    ]);
    assert_eq!(code(&o), 2);
}
