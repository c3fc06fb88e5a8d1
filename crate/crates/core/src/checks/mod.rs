//! Identities, obstructions and curvature bounds as residuals, margins and
//! classifiers.
//!
//! The functions here are pure formulas over per-sample data; [`registry`]
//! maps check names onto them and applies hypotheses and tolerances.

pub mod equations;
pub mod registry;

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::ambient::AmbientProduct;
use crate::error::{GeometryError, Result};
use crate::kahler::CurvaturePackage;
use crate::tensors::{GeometrySample, ProductTensors};

pub use equations::{
    codazzi_residual, covariant_alpha, parallel_alpha_residual, ricci_eq_residual, CovariantAlpha,
};
pub use registry::{
    check_names, evaluate_check, find_check, CheckSpec, Expectations, GridFacts, CHECKS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    /// Passes iff `|value| <= tolerance`.
    Residual,
    /// Passes iff `value >= -tolerance`.
    Margin,
    /// A label compared against an expectation.
    Classifier,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Residual => "residual",
            Self::Margin => "margin",
            Self::Classifier => "classifier",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotApplicable => "not_applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub label: Option<String>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub sample_point: Vec<f64>,
    pub notes: String,
}

impl CheckResult {
    pub fn residual(name: &str, value: f64, tolerance: f64, at: &[f64]) -> Self {
        let verdict = if value.abs() <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self::new(name, CheckKind::Residual, value, tolerance, verdict, at)
    }

    pub fn margin(name: &str, value: f64, tolerance: f64, at: &[f64]) -> Self {
        let verdict = if value >= -tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self::new(name, CheckKind::Margin, value, tolerance, verdict, at)
    }

    pub fn classifier(
        name: &str,
        value: f64,
        label: &str,
        tolerance: f64,
        verdict: Verdict,
        at: &[f64],
    ) -> Self {
        let mut r = Self::new(name, CheckKind::Classifier, value, tolerance, verdict, at);
        r.label = Some(label.to_string());
        r
    }

    pub fn not_applicable(
        name: &str,
        kind: CheckKind,
        tolerance: f64,
        at: &[f64],
        why: impl Into<String>,
    ) -> Self {
        let mut r = Self::new(name, kind, f64::NAN, tolerance, Verdict::NotApplicable, at);
        r.notes = why.into();
        r
    }

    pub fn failed(
        name: &str,
        kind: CheckKind,
        tolerance: f64,
        at: &[f64],
        why: impl Into<String>,
    ) -> Self {
        let mut r = Self::new(name, kind, f64::NAN, tolerance, Verdict::Fail, at);
        r.notes = why.into();
        r
    }

    fn new(
        name: &str,
        kind: CheckKind,
        value: f64,
        tolerance: f64,
        verdict: Verdict,
        at: &[f64],
    ) -> Self {
        Self {
            name: name.to_string(),
            kind,
            value,
            label: None,
            tolerance,
            verdict,
            sample_point: at.to_vec(),
            notes: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if !note.is_empty() {
            if !self.notes.is_empty() {
                self.notes.push_str("; ");
            }
            self.notes.push_str(&note);
        }
        self
    }

    pub fn fail_with(mut self, note: impl Into<String>) -> Self {
        self.verdict = Verdict::Fail;
        self.with_note(note)
    }
}

/// `max_{p,q} |α(X_p, JX_q) - α(JX_p, X_q)|`.
pub fn pluriharmonic_residual(
    gs: &GeometrySample,
    j: &DMatrix<f64>,
    ambient: &AmbientProduct,
) -> f64 {
    j_symmetry_residual(gs, j, ambient, -1.0)
}

/// `max_{p,q} |α(X_p, JX_q) + α(JX_p, X_q)|`.
pub fn antipluriharmonic_residual(
    gs: &GeometrySample,
    j: &DMatrix<f64>,
    ambient: &AmbientProduct,
) -> f64 {
    j_symmetry_residual(gs, j, ambient, 1.0)
}

fn j_symmetry_residual(
    gs: &GeometrySample,
    j: &DMatrix<f64>,
    ambient: &AmbientProduct,
    sign: f64,
) -> f64 {
    let d = gs.dim();
    let mut worst: f64 = 0.0;
    for p in 0..d {
        for q in 0..d {
            let mut v = gs.alpha_j(p, q, j);
            v.axpy(sign, &gs.alpha_j(q, p, j), 1.0);
            worst = worst.max(ambient.norm(&v));
        }
    }
    worst
}

/// `4c1(n-1)(n - tr R) + (c1+c2)((tr R)^2 - |R|^2 - <RJ,JR>)`.
pub fn pluriharmonicity_property_lhs(
    r: &DMatrix<f64>,
    j: &DMatrix<f64>,
    c1: f64,
    c2: f64,
    n: usize,
) -> f64 {
    let n = n as f64;
    let tr = r.trace();
    let rjjr = crate::linalg::frobenius(&(r * j), &(j * r));
    4.0 * c1 * (n - 1.0) * (n - tr) + (c1 + c2) * (tr * tr - r.norm_squared() - rjjr)
}

/// Squared norms of `u_i = (α(X_i,JX_1), ..., α(X_i,JX_2n))`,
/// `v_i = (α(X_1,JX_i), ..., α(X_2n,JX_i))` and of their difference and sum,
/// in the stacked normal space.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectVectors {
    pub u_norms2: Vec<f64>,
    pub v_norms2: Vec<f64>,
    pub diff_norms2: Vec<f64>,
    pub sum_norms2: Vec<f64>,
}

impl DefectVectors {
    /// `max_i | |u-v|^2 + |u+v|^2 - 2(|u|^2 + |v|^2) |`.
    pub fn parallelogram_residual(&self) -> f64 {
        (0..self.u_norms2.len())
            .map(|i| {
                (self.diff_norms2[i] + self.sum_norms2[i]
                    - 2.0 * (self.u_norms2[i] + self.v_norms2[i]))
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Defect vectors over the sample frame, which should be `J`-adapted.
pub fn defect_vectors(
    gs: &GeometrySample,
    j: &DMatrix<f64>,
    ambient: &AmbientProduct,
) -> DefectVectors {
    let d = gs.dim();
    let mut dv = DefectVectors {
        u_norms2: vec![0.0; d],
        v_norms2: vec![0.0; d],
        diff_norms2: vec![0.0; d],
        sum_norms2: vec![0.0; d],
    };
    for i in 0..d {
        for k in 0..d {
            let u = gs.alpha_j(i, k, j);
            let v = gs.alpha_j(k, i, j);
            dv.u_norms2[i] += ambient.norm2(&u);
            dv.v_norms2[i] += ambient.norm2(&v);
            dv.diff_norms2[i] += ambient.norm2(&(&u - &v));
            dv.sum_norms2[i] += ambient.norm2(&(&u + &v));
        }
    }
    dv
}

/// Per-direction coefficients `(A_i, B_i, C_i)`:
/// `A_i = c1(1 - ⟨RX_i,X_i⟩ - ⟨RJX_i,JX_i⟩) + (c1+c2)⟨RJX_i,JRX_i⟩`,
/// `B_i = c1((2n-1) - tr R - 2(n-1)⟨RX_i,X_i⟩) + (c1+c2)(⟨RX_i,X_i⟩ tr R - |RX_i|^2)`,
/// `C_i` as `B_i` with `X_i` replaced by `JX_i`.
pub fn abc_coefficients(pt: &ProductTensors, c1: f64, c2: f64) -> Vec<(f64, f64, f64)> {
    let r = &pt.r;
    let j = &pt.j;
    let d = r.nrows();
    let n = (d / 2) as f64;
    let tr = r.trace();
    let cc = c1 + c2;
    (0..d)
        .map(|i| {
            let mut x = DVector::zeros(d);
            x[i] = 1.0;
            let jx = j * &x;
            let rx = r * &x;
            let rjx = r * &jx;
            let jrx = j * &rx;
            let rxx = rx.dot(&x);
            let rjxjx = rjx.dot(&jx);
            let a = c1 * (1.0 - rxx - rjxjx) + cc * rjx.dot(&jrx);
            let b = c1 * ((2.0 * n - 1.0) - tr - 2.0 * (n - 1.0) * rxx)
                + cc * (rxx * tr - rx.norm_squared());
            let c = c1 * ((2.0 * n - 1.0) - tr - 2.0 * (n - 1.0) * rjxjx)
                + cc * (rjxjx * tr - rjx.norm_squared());
            (a, b, c)
        })
        .collect()
}

/// Residuals of the two defect identities:
/// `|(1/2) Σ|u_i - v_i|^2 - LHS|` and
/// `max_i ||u_i + v_i|^2 - (-4 Ric(X_i) + 2A_i + B_i + C_i)|`.
pub fn defect_identity_residuals(
    dv: &DefectVectors,
    pt: &ProductTensors,
    c1: f64,
    c2: f64,
    ric: &CurvaturePackage,
) -> (f64, f64) {
    let n = pt.complex_dim();
    let lhs = pluriharmonicity_property_lhs(&pt.r, &pt.j, c1, c2, n);
    let half_sum: f64 = 0.5 * dv.diff_norms2.iter().sum::<f64>();
    let abc = abc_coefficients(pt, c1, c2);
    let ricci = abc
        .iter()
        .enumerate()
        .map(|(i, (a, b, c))| (dv.sum_norms2[i] - (-4.0 * ric.ric[(i, i)] + 2.0 * a + b + c)).abs())
        .fold(0.0, f64::max);
    ((half_sum - lhs).abs(), ricci)
}

/// `|Σ|u_i + v_i|^2 - (Σ(2A_i + B_i + C_i) - 4 Scal)|`.
pub fn scalar_defect_residual(
    dv: &DefectVectors,
    pt: &ProductTensors,
    c1: f64,
    c2: f64,
    scal: f64,
) -> f64 {
    let sum: f64 = dv.sum_norms2.iter().sum();
    let abc: f64 = abc_coefficients(pt, c1, c2)
        .iter()
        .map(|(a, b, c)| 2.0 * a + b + c)
        .sum();
    (sum - (abc - 4.0 * scal)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SliceClass {
    FirstFactorSlice,
    SecondFactorSlice,
    Generic,
}

impl SliceClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::FirstFactorSlice => "first_factor_slice",
            Self::SecondFactorSlice => "second_factor_slice",
            Self::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "first_factor_slice" => Some(Self::FirstFactorSlice),
            "second_factor_slice" => Some(Self::SecondFactorSlice),
            "generic" => Some(Self::Generic),
            _ => None,
        }
    }
}

/// Slice type from the traces of `R` over a grid: `tr R ≡ 0` means the image
/// sits in `Q1 x {p}`, `tr R ≡ dim M` in `{p} x Q2`.
pub fn slice_classifier(traces: &[f64], dim: usize, tolerance: f64) -> SliceClass {
    if traces.is_empty() {
        return SliceClass::Generic;
    }
    let max0 = traces.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let max_full = traces
        .iter()
        .map(|t| (t - dim as f64).abs())
        .fold(0.0, f64::max);
    if max0 < tolerance {
        SliceClass::FirstFactorSlice
    } else if max_full < tolerance {
        SliceClass::SecondFactorSlice
    } else {
        SliceClass::Generic
    }
}

/// `c(2n - |∂_t^T|^2)/2`; with `tr R` in place of `|∂_t^T|^2` this is also the
/// `S_c x H_{-c}` bound.
pub fn ricci_bound_half(c: f64, n: usize, trace_r: f64) -> f64 {
    c * (2.0 * n as f64 - trace_r) / 2.0
}

/// `2nc(n - tr R)`.
pub fn scalar_bound_product(c: f64, n: usize, trace_r: f64) -> f64 {
    let n = n as f64;
    2.0 * n * c * (n - trace_r)
}

/// `2nc1(n - tr R) + ((c1+c2)/2)((tr R)^2 - |R|^2 + <RJ,JR>)`.
pub fn scalar_bound_general(pt: &ProductTensors, c1: f64, c2: f64) -> f64 {
    let n = pt.complex_dim();
    let tr = pt.trace_r;
    scalar_bound_product(c1, n, tr) + 0.5 * (c1 + c2) * (tr * tr - pt.norm_r2 + pt.rjjr)
}

/// Classical two-sided bound `((N-1)/N)(cN - |α|^2) <= Ric <= c(N-1)` for a
/// minimal `M^N` in a space form; returns `(lower, upper)`.
pub fn takahashi_bounds(c: f64, real_dim: usize, norm_alpha2: f64) -> (f64, f64) {
    let n = real_dim as f64;
    ((n - 1.0) / n * (c * n - norm_alpha2), c * (n - 1.0))
}

/// `4(n-1)(n λ(t) - |∂_t^T|^2 μ(t))` with `λ = (c - ρ'^2)/ρ^2` and
/// `μ = λ + ρ''/ρ`, evaluated at `t`.
pub fn warped_obstruction_lhs(
    n: usize,
    c: f64,
    rho: impl Fn(f64) -> f64,
    drho: impl Fn(f64) -> f64,
    ddrho: impl Fn(f64) -> f64,
    t: f64,
    t_norm2: f64,
) -> Result<f64> {
    let r = rho(t);
    if !(r > 0.0) {
        return Err(GeometryError::InvalidArgument(format!(
            "warping function must be positive, got {r}"
        )));
    }
    let lambda = (c - drho(t).powi(2)) / (r * r);
    let mu = lambda + ddrho(t) / r;
    let n = n as f64;
    Ok(4.0 * (n - 1.0) * (n * lambda - t_norm2 * mu))
}

/// Whether a target is `Q^{m-1}_c x R` with `c != 0`.
pub fn is_qxr(ambient: &AmbientProduct) -> bool {
    ambient.c1() != 0.0 && ambient.c2() == 0.0 && ambient.factor2.dim() == 1
}

/// Whether a target is `Q_c x Q_{-c}` with `c != 0`.
pub fn is_opposite_curvature(ambient: &AmbientProduct) -> bool {
    ambient.c1() != 0.0 && ambient.c1() == -ambient.c2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::standard_complex_structure;

    #[test]
    fn clifford_product_lhs_vanishes() {
        let r = DMatrix::from_diagonal(&nalgebra::dvector![0.0, 0.0, 1.0, 1.0]);
        let j = standard_complex_structure(4);
        assert_eq!(crate::linalg::frobenius(&(&r * &j), &(&j * &r)), 2.0);
        assert!(pluriharmonicity_property_lhs(&r, &j, 1.0, 1.0, 2).abs() < 1e-15);
    }

    #[test]
    fn qxr_lhs_reduces() {
        // R = <., t> t with |t|^2 = 0.3 in a 4-dim frame
        let t = nalgebra::dvector![0.3f64.sqrt(), 0.0, 0.0, 0.0];
        let r = &t * t.transpose();
        let j = standard_complex_structure(4);
        let c = 1.7;
        let lhs = pluriharmonicity_property_lhs(&r, &j, c, 0.0, 2);
        assert!((lhs - 4.0 * c * (2.0 - 1.0) * (2.0 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn warped_examples() {
        let one = |_: f64| 1.0;
        let zero = |_: f64| 0.0;
        assert_eq!(
            warped_obstruction_lhs(1, 0.3, |t| t, one, zero, 2.0, 0.5).unwrap(),
            0.0
        );
        let cone = warped_obstruction_lhs(3, 0.0, |t| t, one, zero, 2.0, 0.5).unwrap();
        assert!((cone - 4.0 * 2.0 * (3.0 - 0.5) * (-0.25)).abs() < 1e-14);
        let flat = warped_obstruction_lhs(2, 0.7, one, zero, zero, 5.0, 0.4).unwrap();
        assert!((flat - 4.0 * 0.7 * (2.0 - 0.4)).abs() < 1e-14);
        assert!(warped_obstruction_lhs(2, 0.7, zero, zero, zero, 1.0, 0.0).is_err());
    }

    #[test]
    fn slice_labels() {
        assert_eq!(
            slice_classifier(&[0.0, 1e-9], 2, 1e-6),
            SliceClass::FirstFactorSlice
        );
        assert_eq!(
            slice_classifier(&[2.0, 2.0], 2, 1e-6),
            SliceClass::SecondFactorSlice
        );
        assert_eq!(slice_classifier(&[1.0, 1.0], 2, 1e-6), SliceClass::Generic);
        assert_eq!(slice_classifier(&[0.0, 1.0], 2, 1e-6), SliceClass::Generic);
    }

    #[test]
    fn takahashi_examples() {
        assert_eq!(takahashi_bounds(1.0, 2, 0.0), (1.0, 1.0));
        assert_eq!(takahashi_bounds(1.0, 2, 2.0), (0.0, 1.0));
    }
}
