use immerse_core::checks::{SliceClass, Verdict};
use immerse_core::config::{Format, RunConfig, Source};
use immerse_core::report::Report;
use immerse_core::runner::run;
use serde_json::Value;

const PLANE: &str = r#"
[target]
c1 = -1.0
n1 = 2
c2 = 0.0
n2 = 1

[immersion]
name = "geodesic_plane"
chart = [[-1.0, 1.0], [-1.0, 1.0]]
map = ["cosh(u1)", "sinh(u1)", "0", "t"]

[immersion.expected]
minimal = true
pluriharmonic = true
anti_pluriharmonic = true
equality_cases = ["scalar_margin_general"]
slice = "generic"

[grid]
points = [7, 5]

[output]
format = "csv"
"#;

fn report(text: &str) -> Report {
    let c = RunConfig::parse(text).unwrap();
    let out = run(&c.spec).unwrap();
    Report::for_run(&c.source, &c.spec, out)
}

#[test]
fn inline_hyperbolic_plane_passes() {
    let c = RunConfig::parse(PLANE).unwrap();
    assert_eq!(c.source, Source::Inline("geodesic_plane".into()));
    assert_eq!(c.format, Format::Csv);
    let out = run(&c.spec).unwrap();
    assert_eq!(out.samples.len(), 35);
    assert_eq!(out.slice, SliceClass::Generic);
    for a in &out.aggregates {
        assert_ne!(
            a.verdict,
            Verdict::Fail,
            "{} max |value| {}",
            a.name,
            a.max_abs
        );
    }
}

#[test]
fn reports_are_byte_identical() {
    let a = report(PLANE);
    let b = report(PLANE);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
}

#[test]
fn csv_has_one_row_per_sample_and_check() {
    let r = report(PLANE);
    let rows = String::from_utf8(r.to_csv().unwrap())
        .unwrap()
        .lines()
        .count()
        - 1;
    let o = r.outcome.as_ref().unwrap();
    assert_eq!(rows, o.samples.len() * o.aggregates.len());
}

#[test]
fn json_echoes_config_and_hypotheses() {
    let v: Value = serde_json::from_slice(&report(PLANE).to_json()).unwrap();
    assert_eq!(v["config"]["source"], "inline:geodesic_plane");
    assert_eq!(v["config"]["grid"], serde_json::json!([7, 5]));
    assert!(v["hypotheses"]["simplyConnected"]
        .as_str()
        .unwrap()
        .starts_with("unchecked"));
    assert_eq!(v["verdict"], "pass");
    assert!(v.get("wallTime").is_none());
}

#[test]
fn config_errors_point_at_lines() {
    let e = RunConfig::parse(&PLANE.replace("\"t\"]", "\"sin(t\"]")).unwrap_err();
    assert_eq!(e.line, Some(11));
    assert!(
        e.to_string().starts_with("line 11, immersion.map[3]"),
        "{e}"
    );

    let e = RunConfig::parse(&PLANE.replace("\"0\", ", "")).unwrap_err();
    assert!(e.message.contains("3 components"), "{e}");

    let e = RunConfig::parse(&PLANE.replace("points = [7, 5]", "points = [7]")).unwrap_err();
    assert_eq!(e.line, Some(21));

    let e = RunConfig::parse(&PLANE.replace("\"generic\"", "\"sideways\"")).unwrap_err();
    assert_eq!(e.field, "immersion.expected.slice");

    let e = RunConfig::parse(&PLANE.replace("format = \"csv\"", "format = \"xml\"")).unwrap_err();
    assert_eq!(e.line, Some(24));

    let e = RunConfig::parse(&PLANE.replace("n2 = 1", "n2 = 1\nc3 = 2")).unwrap_err();
    assert_eq!(e.line, Some(7));
}

#[test]
fn tolerances_must_be_positive() {
    let e = RunConfig::parse(&format!("{PLANE}\n[tolerances]\nfd = -1.0\n")).unwrap_err();
    assert_eq!(e.field, "tolerances");
}

#[test]
fn matrix_complex_structure() {
    let text = PLANE.replace(
        "[immersion.expected]",
        "complex_structure = [[0, -1], [1, 0]]\n\n[immersion.expected]",
    );
    let c = RunConfig::parse(&text).unwrap();
    let out = run(&c.spec).unwrap();
    assert_eq!(
        out.aggregate("kahler_square").unwrap().verdict,
        Verdict::Pass
    );
}
