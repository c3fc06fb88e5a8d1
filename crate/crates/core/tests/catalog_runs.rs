use immerse_core::catalog::{entry_names, find_entry};
use immerse_core::checks::{SliceClass, Verdict};
use immerse_core::par::Execution;
use immerse_core::runner::{run, RunSpec};

/// Entries that are not minimal on purpose.
const NON_MINIMAL: &[&str] = &["latitude_sphere_nonminimal", "generic_surface_S2xS2"];

fn spec(name: &str) -> RunSpec {
    RunSpec::from_entry(find_entry(name).unwrap())
}

#[test]
fn every_entry_meets_its_expectations() {
    for name in entry_names().iter().map(String::as_str) {
        let out = run(&spec(name)).unwrap();
        assert!(out.errors.is_empty(), "{name}: {:?}", out.errors.first());
        for a in &out.aggregates {
            if a.name == "minimality" && NON_MINIMAL.contains(&name) {
                continue;
            }
            assert_ne!(
                a.verdict,
                Verdict::Fail,
                "{name}: {} max |value| {}",
                a.name,
                a.max_abs
            );
        }
    }
}

#[test]
fn only_minimality_fails_on_controls() {
    for &name in NON_MINIMAL {
        let out = run(&spec(name)).unwrap();
        let failed: Vec<_> = out
            .aggregates
            .iter()
            .filter(|a| a.verdict == Verdict::Fail)
            .map(|a| a.name.as_str())
            .collect();
        assert_eq!(failed, ["minimality"], "{name}");
    }
    let out = run(&spec("latitude_sphere_nonminimal")).unwrap();
    let m = out.aggregate("minimality").unwrap();
    assert!((m.min_value - 1.0).abs() < 1e-6 && (m.max_value - 1.0).abs() < 1e-6);
}

#[test]
fn minimality_gated_checks_are_not_applicable_on_controls() {
    let out = run(&spec("latitude_sphere_nonminimal")).unwrap();
    for name in [
        "pluriharmonicity_property",
        "defect_pluri_identity",
        "ricci_margin_SxR",
    ] {
        let a = out.aggregate(name).unwrap();
        assert_eq!(a.verdict, Verdict::NotApplicable, "{name}");
        assert_eq!(a.not_applicable, out.samples.len());
    }
    // a consistency check holds vacuously when its premises fail
    let a = out.aggregate("obstruction_QxR").unwrap();
    assert_eq!(a.verdict, Verdict::Pass);
    assert_eq!(a.labels, ["premises_not_met"]);
}

#[test]
fn slices_are_classified() {
    let cases = [
        ("clifford_torus_slice", SliceClass::FirstFactorSlice),
        ("totally_geodesic_slice_S2xR", SliceClass::FirstFactorSlice),
        (
            "totally_geodesic_H2_point_x_H3",
            SliceClass::SecondFactorSlice,
        ),
        ("vertical_cylinder_S2xR", SliceClass::Generic),
        ("diagonal_sphere_S2xS2", SliceClass::Generic),
    ];
    for (name, class) in cases {
        assert_eq!(run(&spec(name)).unwrap().slice, class, "{name}");
    }
}

#[test]
fn sequential_and_parallel_agree_exactly() {
    for name in ["diagonal_sphere_S2xS2", "helicoid_S2xR"] {
        let mut s = spec(name);
        s.execution = Execution::Sequential;
        let a = run(&s).unwrap();
        s.execution = Execution::Parallel;
        let b = run(&s).unwrap();
        // Debug text, since NaN placeholders never compare equal
        assert_eq!(format!("{:?}", a.rows), format!("{:?}", b.rows), "{name}");
        assert_eq!(
            format!("{:?}", a.aggregates),
            format!("{:?}", b.aggregates),
            "{name}"
        );
    }
}

#[test]
fn spectral_invariants_hold_everywhere() {
    for name in entry_names().iter().map(String::as_str) {
        let s = spec(name);
        let out = run(&s).unwrap();
        for r in out
            .results_for("spectral_r")
            .chain(out.results_for("r_complement"))
        {
            assert_eq!(r.verdict, Verdict::Pass, "{name}: {} = {}", r.name, r.value);
        }
    }
}

#[test]
fn convergence_on_the_torus_is_fourth_order() {
    let t = immerse_core::runner::convergence(
        &spec("clifford_torus_slice"),
        "gauss_residual",
        &[1e-2, 5e-3, 2.5e-3],
    )
    .unwrap();
    assert!(t.monotone);
    assert_eq!(t.verdict, Verdict::Pass);
    for o in &t.orders {
        assert!(*o > 3.5, "order {o}");
    }
}

#[test]
fn bad_specs_are_rejected() {
    let mut s = spec("clifford_torus_slice");
    assert!(s.select_checks::<&str>(&[]).is_err());
    assert!(s.select_checks(&["nope"]).is_err());
    s.grid = vec![9];
    assert!(run(&s).is_err());
    let mut s = spec("clifford_torus_slice");
    s.h = 0.1;
    assert!(run(&s).is_err());
    let mut s = spec("clifford_torus_slice");
    s.tolerances.fd = 0.0;
    assert!(run(&s).is_err());
    assert!(immerse_core::runner::convergence(
        &spec("clifford_torus_slice"),
        "slice_classifier",
        &[1e-2, 5e-3]
    )
    .is_err());
    assert!(immerse_core::runner::convergence(
        &spec("clifford_torus_slice"),
        "gauss_residual",
        &[5e-3, 1e-2]
    )
    .is_err());
}
