//! Closed-form example immersions with exact first partials, complex
//! structures and expected behaviour.
//!
//! Sphere charts keep 0.2 rad away from the poles.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::ambient::{AmbientProduct, AmbientVector};
use crate::checks::{Expectations, SliceClass};
use crate::error::{GeometryError, Result};
use crate::jetcalc::{standard_complex_structure, Chart, ComplexStructure, ImmersionDefinition};

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub immersion: ImmersionDefinition,
    pub target: AmbientProduct,
    pub expected: Expectations,
    /// Default grid points per chart axis.
    pub grid: Vec<usize>,
    pub summary: &'static str,
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        &self.immersion.name
    }
}

fn v(xs: &[f64]) -> AmbientVector {
    DVector::from_column_slice(xs)
}

fn cat(parts: &[&[f64]]) -> AmbientVector {
    DVector::from_iterator(
        parts.iter().map(|p| p.len()).sum(),
        parts.iter().flat_map(|p| p.iter().copied()),
    )
}

/// Unit sphere point and its `(φ, θ)` partials.
fn sphere(phi: f64, theta: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    (
        [sp * ct, sp * st, cp],
        [cp * ct, cp * st, -sp],
        [-sp * st, sp * ct, 0.0],
    )
}

/// `J ∂φ = (1/sin φ) ∂θ` for metrics proportional to `dφ² + sin²φ dθ²`.
fn sphere_j() -> ComplexStructure {
    ComplexStructure::Field(Arc::new(|u: &[f64]| {
        let s = u[0].sin();
        DMatrix::from_row_slice(2, 2, &[0.0, -s, 1.0 / s, 0.0])
    }))
}

fn entry(
    name: &str,
    chart: &[(f64, f64)],
    target: AmbientProduct,
    map: impl Fn(&[f64]) -> AmbientVector + Send + Sync + 'static,
    partials: impl Fn(&[f64]) -> Vec<AmbientVector> + Send + Sync + 'static,
    j: ComplexStructure,
    expected: Expectations,
    grid: Vec<usize>,
    summary: &'static str,
) -> CatalogEntry {
    let chart = Chart::new(chart).expect("catalog chart");
    let immersion = ImmersionDefinition::new(name, chart, Arc::new(map))
        .with_partials(Arc::new(partials))
        .with_complex_structure(j);
    CatalogEntry {
        immersion,
        target,
        expected,
        grid,
        summary,
    }
}

fn target(c1: f64, n1: usize, c2: f64, n2: usize) -> AmbientProduct {
    AmbientProduct::from_parts(c1, n1, c2, n2).expect("catalog target")
}

fn eq(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

const TWO_PI: f64 = 2.0 * PI;

fn clifford_torus_slice() -> CatalogEntry {
    let s = FRAC_1_SQRT_2;
    entry(
        "clifford_torus_slice",
        &[(0.0, TWO_PI), (0.0, TWO_PI)],
        target(1.0, 3, 0.0, 1),
        move |u| {
            v(&[
                s * u[0].cos(),
                s * u[0].sin(),
                s * u[1].cos(),
                s * u[1].sin(),
                0.0,
            ])
        },
        move |u| {
            vec![
                v(&[-s * u[0].sin(), s * u[0].cos(), 0.0, 0.0, 0.0]),
                v(&[0.0, 0.0, -s * u[1].sin(), s * u[1].cos(), 0.0]),
            ]
        },
        ComplexStructure::Constant(standard_complex_structure(2)),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(false),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::FirstFactorSlice),
            equality_cases: eq(&["takahashi_lower"]),
            trace_r: Some((0.0, 0.0)),
            ric: Some(0.0),
            scal: Some(0.0),
        },
        vec![9, 9],
        "Clifford torus in S^3 x {0}",
    )
}

fn vertical_cylinder() -> CatalogEntry {
    entry(
        "vertical_cylinder_S2xR",
        &[(0.0, TWO_PI), (-1.0, 1.0)],
        target(1.0, 2, 0.0, 1),
        |u| v(&[u[0].cos(), u[0].sin(), 0.0, u[1]]),
        |u| {
            vec![
                v(&[-u[0].sin(), u[0].cos(), 0.0, 0.0]),
                v(&[0.0, 0.0, 0.0, 1.0]),
            ]
        },
        ComplexStructure::Constant(standard_complex_structure(2)),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::Generic),
            equality_cases: eq(&["scalar_margin_SxR", "scalar_margin_general"]),
            trace_r: Some((1.0, 1.0)),
            ric: Some(0.0),
            scal: Some(0.0),
        },
        vec![9, 9],
        "great circle x R in S^2 x R",
    )
}

fn totally_geodesic_slice() -> CatalogEntry {
    entry(
        "totally_geodesic_slice_S2xR",
        &[(0.2, PI - 0.2), (0.0, TWO_PI)],
        target(1.0, 2, 0.0, 1),
        |u| {
            let (p, _, _) = sphere(u[0], u[1]);
            cat(&[&p, &[0.5]])
        },
        |u| {
            let (_, a, b) = sphere(u[0], u[1]);
            vec![cat(&[&a, &[0.0]]), cat(&[&b, &[0.0]])]
        },
        sphere_j(),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::FirstFactorSlice),
            equality_cases: eq(&[
                "dajczer_rodriguez_margin",
                "ricci_margin_SxR",
                "scalar_margin_SxR",
                "scalar_margin_general",
                "takahashi_lower",
                "takahashi_upper",
            ]),
            trace_r: Some((0.0, 0.0)),
            ric: Some(1.0),
            scal: Some(2.0),
        },
        vec![9, 9],
        "S^2 x {1/2} in S^2 x R",
    )
}

fn geodesic_plane_h2xr() -> CatalogEntry {
    entry(
        "geodesic_plane_H2xR",
        &[(-1.0, 1.0), (-1.0, 1.0)],
        target(-1.0, 2, 0.0, 1),
        |u| v(&[u[0].cosh(), u[0].sinh(), 0.0, u[1]]),
        |u| {
            vec![
                v(&[u[0].sinh(), u[0].cosh(), 0.0, 0.0]),
                v(&[0.0, 0.0, 0.0, 1.0]),
            ]
        },
        ComplexStructure::Constant(standard_complex_structure(2)),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::Generic),
            equality_cases: eq(&["scalar_margin_general"]),
            trace_r: Some((1.0, 1.0)),
            ric: Some(0.0),
            scal: Some(0.0),
        },
        vec![9, 9],
        "geodesic x R in H^2 x R",
    )
}

fn diagonal_sphere() -> CatalogEntry {
    entry(
        "diagonal_sphere_S2xS2",
        &[(0.2, PI - 0.2), (0.0, TWO_PI)],
        target(1.0, 2, 1.0, 2),
        |u| {
            let (p, _, _) = sphere(u[0], u[1]);
            cat(&[&p, &p])
        },
        |u| {
            let (_, a, b) = sphere(u[0], u[1]);
            vec![cat(&[&a, &a]), cat(&[&b, &b])]
        },
        sphere_j(),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::Generic),
            equality_cases: eq(&["scalar_margin_general"]),
            trace_r: Some((1.0, 1.0)),
            ric: Some(0.5),
            scal: Some(1.0),
        },
        vec![9, 9],
        "p -> (p, p) in S^2 x S^2",
    )
}

fn clifford_x_clifford() -> CatalogEntry {
    let s = FRAC_1_SQRT_2;
    entry(
        "clifford_x_clifford_S3xS3",
        &[(0.0, TWO_PI), (0.0, TWO_PI), (0.0, TWO_PI), (0.0, TWO_PI)],
        target(1.0, 3, 1.0, 3),
        move |u| {
            let c: Vec<f64> = u.iter().flat_map(|&x| [s * x.cos(), s * x.sin()]).collect();
            v(&c)
        },
        move |u| {
            (0..4)
                .map(|a| {
                    let mut d = vec![0.0; 8];
                    d[2 * a] = -s * u[a].sin();
                    d[2 * a + 1] = s * u[a].cos();
                    v(&d)
                })
                .collect()
        },
        ComplexStructure::Constant(standard_complex_structure(4)),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(false),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::Generic),
            equality_cases: Vec::new(),
            trace_r: Some((2.0, 2.0)),
            ric: Some(0.0),
            scal: Some(0.0),
        },
        vec![5, 5, 5, 5],
        "product of Clifford tori in S^3 x S^3",
    )
}

fn geodesic_product_sxh() -> CatalogEntry {
    entry(
        "geodesic_product_SxH",
        &[(0.0, TWO_PI), (-1.0, 1.0)],
        target(1.0, 2, -1.0, 2),
        |u| v(&[u[0].cos(), u[0].sin(), 0.0, u[1].cosh(), u[1].sinh(), 0.0]),
        |u| {
            vec![
                v(&[-u[0].sin(), u[0].cos(), 0.0, 0.0, 0.0, 0.0]),
                v(&[0.0, 0.0, 0.0, u[1].sinh(), u[1].cosh(), 0.0]),
            ]
        },
        ComplexStructure::Constant(standard_complex_structure(2)),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::Generic),
            equality_cases: eq(&["scalar_margin_SxH", "scalar_margin_general"]),
            trace_r: Some((1.0, 1.0)),
            ric: Some(0.0),
            scal: Some(0.0),
        },
        vec![9, 9],
        "great circle x geodesic in S^2 x H^2",
    )
}

fn latitude_sphere() -> CatalogEntry {
    let r = FRAC_1_SQRT_2;
    entry(
        "latitude_sphere_nonminimal",
        &[(0.2, PI - 0.2), (0.0, TWO_PI)],
        target(1.0, 3, 0.0, 1),
        move |u| {
            let (p, _, _) = sphere(u[0], u[1]);
            v(&[r * p[0], r * p[1], r * p[2], r, 0.0])
        },
        move |u| {
            let (_, a, b) = sphere(u[0], u[1]);
            vec![
                v(&[r * a[0], r * a[1], r * a[2], 0.0, 0.0]),
                v(&[r * b[0], r * b[1], r * b[2], 0.0, 0.0]),
            ]
        },
        sphere_j(),
        Expectations {
            minimal: Some(false),
            pluriharmonic: Some(false),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::FirstFactorSlice),
            equality_cases: Vec::new(),
            trace_r: Some((0.0, 0.0)),
            ric: Some(2.0),
            scal: Some(4.0),
        },
        vec![9, 9],
        "umbilic 2-sphere at x4 = cos(pi/4) in S^3 x {0}; non-minimal control",
    )
}

fn great_sphere_slice_s3xh2() -> CatalogEntry {
    entry(
        "great_sphere_slice_S3xH2",
        &[(0.2, PI - 0.2), (0.0, TWO_PI)],
        target(1.0, 3, -1.0, 2),
        |u| {
            let (p, _, _) = sphere(u[0], u[1]);
            cat(&[&p, &[0.0, 1.0, 0.0, 0.0]])
        },
        |u| {
            let (_, a, b) = sphere(u[0], u[1]);
            vec![cat(&[&a, &[0.0; 4]]), cat(&[&b, &[0.0; 4]])]
        },
        sphere_j(),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::FirstFactorSlice),
            equality_cases: eq(&[
                "dajczer_rodriguez_margin",
                "ricci_margin_SxH",
                "scalar_margin_SxH",
                "scalar_margin_general",
                "takahashi_lower",
                "takahashi_upper",
            ]),
            trace_r: Some((0.0, 0.0)),
            ric: Some(1.0),
            scal: Some(2.0),
        },
        vec![9, 9],
        "great S^2 x {p} in S^3 x H^2",
    )
}

/// Horizontal great circles through the poles, rotating at rate `a` with height.
fn helicoid() -> CatalogEntry {
    const A: f64 = 0.7;
    entry(
        "helicoid_S2xR",
        &[(-1.2, 1.0), (-1.5, 1.5)],
        target(1.0, 2, 0.0, 1),
        |u| {
            let (su, cu) = u[0].sin_cos();
            let (sv, cv) = (A * u[1]).sin_cos();
            v(&[cu * cv, cu * sv, su, u[1]])
        },
        |u| {
            let (su, cu) = u[0].sin_cos();
            let (sv, cv) = (A * u[1]).sin_cos();
            vec![
                v(&[-su * cv, -su * sv, cu, 0.0]),
                v(&[-A * cu * sv, A * cu * cv, 0.0, 1.0]),
            ]
        },
        ComplexStructure::SurfaceRotation,
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(false),
            parallel_alpha: Some(false),
            slice: Some(SliceClass::Generic),
            equality_cases: Vec::new(),
            trace_r: Some((0.0, 1.0)),
            ric: None,
            scal: None,
        },
        vec![9, 9],
        "helicoid in S^2 x R",
    )
}

fn generic_surface() -> CatalogEntry {
    entry(
        "generic_surface_S2xS2",
        &[(0.4, 1.4), (0.0, 2.0)],
        target(1.0, 2, 1.0, 2),
        |u| {
            let (p, _, _) = sphere(u[0], u[1]);
            let (q, _, _) = sphere(0.6 + 0.4 * u[0], 0.7 * u[1] + 0.3 * u[0]);
            cat(&[&p, &q])
        },
        |u| {
            let (_, a, b) = sphere(u[0], u[1]);
            let (_, qa, qb) = sphere(0.6 + 0.4 * u[0], 0.7 * u[1] + 0.3 * u[0]);
            let d0: Vec<f64> = (0..3).map(|i| 0.4 * qa[i] + 0.3 * qb[i]).collect();
            let d1: Vec<f64> = (0..3).map(|i| 0.7 * qb[i]).collect();
            vec![cat(&[&a, &d0]), cat(&[&b, &d1])]
        },
        ComplexStructure::SurfaceRotation,
        Expectations {
            minimal: Some(false),
            pluriharmonic: Some(false),
            anti_pluriharmonic: Some(false),
            parallel_alpha: Some(false),
            slice: Some(SliceClass::Generic),
            equality_cases: Vec::new(),
            trace_r: Some((0.0, 2.0)),
            ric: None,
            scal: None,
        },
        vec![9, 9],
        "graph-like surface in S^2 x S^2 with no special structure",
    )
}

fn totally_geodesic_h2() -> CatalogEntry {
    entry(
        "totally_geodesic_H2_point_x_H3",
        &[(-1.0, 1.0), (-1.0, 1.0)],
        target(1.0, 2, -1.0, 3),
        |u| {
            let (ca, sa, cb, sb) = (u[0].cosh(), u[0].sinh(), u[1].cosh(), u[1].sinh());
            v(&[0.0, 0.0, 1.0, ca * cb, sa * cb, sb, 0.0])
        },
        |u| {
            let (ca, sa, cb, sb) = (u[0].cosh(), u[0].sinh(), u[1].cosh(), u[1].sinh());
            vec![
                v(&[0.0, 0.0, 0.0, sa * cb, ca * cb, 0.0, 0.0]),
                v(&[0.0, 0.0, 0.0, ca * sb, sa * sb, cb, 0.0]),
            ]
        },
        ComplexStructure::Field(Arc::new(|u: &[f64]| {
            let cb = u[1].cosh();
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0 / cb, cb, 0.0])
        })),
        Expectations {
            minimal: Some(true),
            pluriharmonic: Some(true),
            anti_pluriharmonic: Some(true),
            parallel_alpha: Some(true),
            slice: Some(SliceClass::SecondFactorSlice),
            equality_cases: eq(&[
                "scalar_margin_SxH",
                "scalar_margin_general",
                "takahashi_lower",
                "takahashi_upper",
            ]),
            trace_r: Some((2.0, 2.0)),
            ric: Some(-1.0),
            scal: Some(-2.0),
        },
        vec![9, 9],
        "{p} x totally geodesic H^2 in S^2 x H^3",
    )
}

/// Every entry, in a fixed order.
pub fn list_entries() -> Vec<CatalogEntry> {
    vec![
        clifford_torus_slice(),
        vertical_cylinder(),
        totally_geodesic_slice(),
        geodesic_plane_h2xr(),
        diagonal_sphere(),
        clifford_x_clifford(),
        geodesic_product_sxh(),
        latitude_sphere(),
        great_sphere_slice_s3xh2(),
        helicoid(),
        generic_surface(),
        totally_geodesic_h2(),
    ]
}

pub fn entry_names() -> Vec<String> {
    list_entries()
        .iter()
        .map(|e| e.name().to_string())
        .collect()
}

pub fn find_entry(name: &str) -> Result<CatalogEntry> {
    list_entries()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| GeometryError::InvalidArgument(format!("unknown catalog entry `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_unique() {
        let mut names = entry_names();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn every_entry_validates_on_its_grid() {
        for e in list_entries() {
            let grid = e.immersion.chart.grid(&e.grid).unwrap();
            e.immersion
                .validate(&e.target, &grid, 1e-10)
                .unwrap_or_else(|err| panic!("{}: {err}", e.name()));
        }
    }

    #[test]
    fn exact_partials_match_differences() {
        let h = 1e-6;
        for e in list_entries() {
            let grid = e.immersion.chart.grid(&e.grid).unwrap();
            let steps = crate::jetcalc::Steps::uniform(e.immersion.domain_dim(), h);
            for u in grid.iter().step_by(7) {
                let exact = e.immersion.eval_partials(u, &steps).unwrap();
                for (a, d) in exact.iter().enumerate() {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[a] += h;
                    dn[a] -= h;
                    let fd = (e.immersion.eval_map(&up).unwrap()
                        - e.immersion.eval_map(&dn).unwrap())
                        / (2.0 * h);
                    assert!((fd - d).amax() < 1e-8, "{} axis {a}", e.name());
                }
            }
        }
    }
}
