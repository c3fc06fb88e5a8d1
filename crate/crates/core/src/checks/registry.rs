//! Named checks: hypotheses, tolerances and verdicts over a [`SampleContext`].
//!
//! Nonexistence theorems are encoded as consistency assertions: when the
//! premises hold at a sample the conclusion must hold too, and a sample that
//! meets the premises but violates the conclusion is reported as a failure
//! with diagnostics.

use crate::ambient::{AmbientProduct, FactorKind};
use crate::kahler;
use crate::linalg;
use crate::sample::{Lazy, Needs, SampleContext, Tolerances};
use crate::tensors;

use super::equations::{codazzi_residual, parallel_alpha_residual};
use super::{
    antipluriharmonic_residual, defect_identity_residuals, defect_vectors, is_opposite_curvature,
    is_qxr, pluriharmonic_residual, pluriharmonicity_property_lhs, ricci_bound_half,
    scalar_bound_general, scalar_bound_product, scalar_defect_residual, takahashi_bounds,
    warped_obstruction_lhs, CheckKind, CheckResult, SliceClass, Verdict,
};

/// Expected behaviour of an example, asserted by classifier checks and tests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expectations {
    pub minimal: Option<bool>,
    pub pluriharmonic: Option<bool>,
    pub anti_pluriharmonic: Option<bool>,
    pub parallel_alpha: Option<bool>,
    pub slice: Option<SliceClass>,
    /// Names of margin checks expected to sit at equality.
    pub equality_cases: Vec<String>,
    /// Inclusive range for `tr R`.
    pub trace_r: Option<(f64, f64)>,
    /// Constant Ricci curvature, when it is one.
    pub ric: Option<f64>,
    pub scal: Option<f64>,
}

/// Grid-level facts shared by every sample's checks.
#[derive(Debug, Clone, Copy)]
pub struct GridFacts<'a> {
    pub ambient: &'a AmbientProduct,
    pub slice: SliceClass,
    pub expected: &'a Expectations,
    pub tol: &'a Tolerances,
}

type EvalFn = fn(&SampleContext, &GridFacts<'_>) -> CheckResult;

pub struct CheckSpec {
    pub name: &'static str,
    pub kind: CheckKind,
    pub needs: Needs,
    pub summary: &'static str,
    eval: EvalFn,
}

impl std::fmt::Debug for CheckSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CheckSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

const NONE: Needs = Needs {
    kahler_parallel: false,
    intrinsic: false,
    covariant_alpha: false,
    ricci_equation: false,
    normal_connection: false,
};
const KP: Needs = Needs {
    kahler_parallel: true,
    ..NONE
};
const KP_ALPHA: Needs = Needs {
    kahler_parallel: true,
    covariant_alpha: true,
    ..NONE
};

macro_rules! check {
    ($name:literal, $kind:ident, $needs:expr, $summary:literal, $f:expr) => {
        CheckSpec {
            name: $name,
            kind: CheckKind::$kind,
            needs: $needs,
            summary: $summary,
            eval: $f,
        }
    };
}

/// All checks, sorted by name.
pub static CHECKS: &[CheckSpec] = &[
    check!(
        "antipluriharmonic_residual",
        Classifier,
        NONE,
        "max |α(X,JY) + α(JX,Y)|",
        antipluri
    ),
    check!(
        "codazzi_residual",
        Residual,
        Needs {
            covariant_alpha: true,
            ..NONE
        },
        "Codazzi equation",
        codazzi
    ),
    check!(
        "curvature_j_commutation",
        Residual,
        KP,
        "R(X,Y)∘J = J∘R(X,Y) (Gauss route)",
        curvature_j
    ),
    check!(
        "dajczer_rodriguez_margin",
        Margin,
        KP,
        "Ric <= cn in a spherical slice",
        dajczer_rodriguez
    ),
    check!(
        "defect_parallelogram",
        Residual,
        NONE,
        "|u-v|^2 + |u+v|^2 = 2(|u|^2 + |v|^2)",
        defect_parallelogram
    ),
    check!(
        "defect_pluri_identity",
        Residual,
        KP,
        "(1/2)Σ|u_i - v_i|^2 = pluriharmonicity LHS",
        defect_pluri
    ),
    check!(
        "defect_ricci_identity",
        Residual,
        KP,
        "|u_i + v_i|^2 = -4Ric(X_i) + 2A_i + B_i + C_i",
        defect_ricci
    ),
    check!(
        "defect_scalar_identity",
        Residual,
        KP,
        "Σ|u_i + v_i|^2 = Σ(2A_i + B_i + C_i) - 4Scal",
        defect_scalar
    ),
    check!(
        "expected_values",
        Residual,
        NONE,
        "tr R, Ric, Scal against the example's stated values",
        expected_values
    ),
    check!(
        "frame_orthonormality",
        Residual,
        NONE,
        "Gram matrix of tangent and normal frames",
        frame_ortho
    ),
    check!(
        "gauss_residual",
        Residual,
        Needs {
            intrinsic: true,
            ..NONE
        },
        "FD curvature vs Gauss equation",
        gauss_residual
    ),
    check!(
        "kahler_orthogonality",
        Residual,
        NONE,
        "<JX,JY> = <X,Y>",
        kahler_ortho
    ),
    check!("kahler_parallel", Residual, KP, "∇J = 0", kahler_parallel),
    check!("kahler_square", Residual, NONE, "J^2 = -Id", kahler_square),
    check!("minimality", Residual, NONE, "|H|", minimality),
    check!(
        "normal_connection_skew",
        Residual,
        Needs {
            normal_connection: true,
            ..NONE
        },
        "<∇⊥ξ_k, ξ_l> skew",
        normal_skew
    ),
    check!(
        "obstruction_QcxQmc",
        Classifier,
        KP,
        "pluriharmonic in Q_c x Q_-c forces n = 1 or tr R = n",
        obstruction_opposite
    ),
    check!(
        "obstruction_QxR",
        Classifier,
        KP,
        "premises in Q_c x R force n = 1",
        obstruction_qxr
    ),
    check!(
        "on_manifold",
        Residual,
        NONE,
        "constraint residual of the sample point",
        on_manifold
    ),
    check!(
        "parallel_alpha_residual",
        Classifier,
        Needs {
            covariant_alpha: true,
            ..NONE
        },
        "max |∇⊥α|",
        parallel_alpha
    ),
    check!(
        "pluriharmonic_residual",
        Classifier,
        NONE,
        "max |α(X,JY) - α(JX,Y)|",
        pluri
    ),
    check!(
        "pluriharmonicity_property",
        Classifier,
        KP,
        "LHS = 0 iff pluriharmonic",
        pluri_property
    ),
    check!("r_complement", Residual, NONE, "R + R~ = Id", r_complement),
    check!(
        "ricci_equation_residual",
        Residual,
        Needs {
            ricci_equation: true,
            ..NONE
        },
        "Ricci equation",
        ricci_equation
    ),
    check!(
        "ricci_j_invariance",
        Residual,
        KP,
        "Ric(JX,JY) = Ric(X,Y)",
        ricci_j
    ),
    check!(
        "ricci_margin_SxH",
        Margin,
        KP_ALPHA,
        "Ric <= c(2n - tr R)/2 in S_c x H_-c",
        ricci_margin_sxh
    ),
    check!(
        "ricci_margin_SxR",
        Margin,
        KP_ALPHA,
        "Ric <= c(2n - |∂t^T|^2)/2 in S_c x R",
        ricci_margin_sxr
    ),
    check!(
        "ricci_route_fd",
        Residual,
        Needs {
            intrinsic: true,
            ..NONE
        },
        "Ric by FD vs Gauss",
        ricci_route_fd
    ),
    check!(
        "ricci_route_kahler",
        Residual,
        KP,
        "Ric by the Kähler identity vs Gauss",
        ricci_route_kahler
    ),
    check!(
        "riem_symmetries",
        Residual,
        Needs {
            intrinsic: true,
            ..NONE
        },
        "symmetries of the FD curvature",
        riem_symmetries
    ),
    check!(
        "rj_commutator",
        Classifier,
        KP,
        "RJ + JR = 0 or 2J consequences",
        rj_commutator
    ),
    check!(
        "scalar_margin_SxH",
        Margin,
        KP,
        "Scal <= 2nc(n - tr R) in Q_c x Q_-c",
        scalar_margin_sxh
    ),
    check!(
        "scalar_margin_SxR",
        Margin,
        KP,
        "Scal <= 2nc(n - |∂t^T|^2) in S_c x R",
        scalar_margin_sxr
    ),
    check!(
        "scalar_margin_general",
        Margin,
        KP,
        "general scalar curvature bound",
        scalar_margin_general
    ),
    check!(
        "slice_classifier",
        Classifier,
        NONE,
        "tr R over the grid",
        slice
    ),
    check!(
        "spectral_r",
        Residual,
        NONE,
        "eigenvalues of R in [0,1]",
        spectral_r
    ),
    check!(
        "spectral_t",
        Residual,
        NONE,
        "eigenvalues of T in [0,1]",
        spectral_t
    ),
    check!(
        "takahashi_lower",
        Margin,
        NONE,
        "Ric >= ((N-1)/N)(cN - |α|^2) in a slice",
        takahashi_lower
    ),
    check!(
        "takahashi_upper",
        Margin,
        NONE,
        "Ric <= c(N-1) in a slice",
        takahashi_upper
    ),
    check!("trace_jr", Residual, KP, "tr(JR) = 0", trace_jr),
    check!("trace_l", Residual, NONE, "|L|^2 = tr R", trace_l),
    check!(
        "vertical_projection",
        Margin,
        NONE,
        "|∂t^T|^2 in [0,1]",
        vertical_projection
    ),
    check!(
        "warped_specialization",
        Residual,
        KP,
        "warped LHS with ρ = 1 vs product LHS",
        warped_specialization
    ),
    check!(
        "weingarten_symmetry",
        Residual,
        NONE,
        "A_ξ symmetric",
        weingarten_symmetry
    ),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

pub fn find_check(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn evaluate_check(spec: &CheckSpec, ctx: &SampleContext, facts: &GridFacts<'_>) -> CheckResult {
    (spec.eval)(ctx, facts)
}

// ---- helpers

fn na(
    name: &str,
    kind: CheckKind,
    tol: f64,
    ctx: &SampleContext,
    why: impl Into<String>,
) -> CheckResult {
    CheckResult::not_applicable(name, kind, tol, &ctx.u, why)
}

/// `Err` carries the NotApplicable result when the sample is not minimal or
/// not certified Kähler.
fn require_minimal_kahler(
    name: &str,
    kind: CheckKind,
    tol: f64,
    ctx: &SampleContext,
    g: &GridFacts<'_>,
) -> Result<(), CheckResult> {
    let h = ctx.mean_curvature(g.ambient);
    if h > g.tol.algebraic {
        return Err(na(
            name,
            kind,
            tol,
            ctx,
            format!("not minimal (|H| = {h:.3e})"),
        ));
    }
    require_kahler(name, kind, tol, ctx, g)
}

fn require_kahler(
    name: &str,
    kind: CheckKind,
    tol: f64,
    ctx: &SampleContext,
    g: &GridFacts<'_>,
) -> Result<(), CheckResult> {
    if !ctx.kahler_certified(g.tol) {
        return Err(na(name, kind, tol, ctx, "J not certified Kähler at sample"));
    }
    Ok(())
}

fn lazy<'a, T>(
    name: &str,
    kind: CheckKind,
    tol: f64,
    ctx: &SampleContext,
    v: &'a Lazy<T>,
) -> Result<&'a T, CheckResult> {
    v.get()
        .map_err(|why| CheckResult::failed(name, kind, tol, &ctx.u, why))
}

fn is_pluri(ctx: &SampleContext, g: &GridFacts<'_>) -> (bool, f64) {
    let r = pluriharmonic_residual(&ctx.gs, &ctx.j_frame, g.ambient);
    (r < g.tol.classifier, r)
}

fn is_anti(ctx: &SampleContext, g: &GridFacts<'_>) -> (bool, f64) {
    let r = antipluriharmonic_residual(&ctx.gs, &ctx.j_frame, g.ambient);
    (r < g.tol.classifier, r)
}

/// Label check against an optional expectation.
fn labelled(
    name: &str,
    value: f64,
    flag: bool,
    yes: &str,
    no: &str,
    expected: Option<bool>,
    tol: f64,
    ctx: &SampleContext,
) -> CheckResult {
    let label = if flag { yes } else { no };
    match expected {
        Some(e) if e != flag => {
            CheckResult::classifier(name, value, label, tol, Verdict::Fail, &ctx.u)
                .with_note(format!("expected {}", if e { yes } else { no }))
        }
        Some(_) => CheckResult::classifier(name, value, label, tol, Verdict::Pass, &ctx.u),
        None => CheckResult::classifier(name, value, label, tol, Verdict::Pass, &ctx.u)
            .with_note("no expectation"),
    }
}

fn expects_equality(g: &GridFacts<'_>, name: &str) -> Option<bool> {
    if g.expected == &Expectations::default() {
        None
    } else {
        Some(g.expected.equality_cases.iter().any(|e| e == name))
    }
}

fn equality_label(margin: f64, tol: &Tolerances) -> (&'static str, bool) {
    if margin.abs() < tol.fd {
        ("equality", true)
    } else {
        ("strict", false)
    }
}

/// Common tail of margin checks: label, expectation, and equality-case extras.
fn finish_margin(name: &str, margin: f64, ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let (label, eq) = equality_label(margin, g.tol);
    let mut r = CheckResult::margin(name, margin, g.tol.algebraic, &ctx.u);
    r.label = Some(label.into());
    match expects_equality(g, name) {
        Some(true) if !eq => r.fail_with("equality expected"),
        Some(false) if eq => r.fail_with("strict inequality expected"),
        _ => r,
    }
}

/// Ricci equality case: slice containment and parallel second fundamental form.
fn ricci_equality_assertions(
    r: CheckResult,
    ctx: &SampleContext,
    g: &GridFacts<'_>,
    slice: SliceClass,
) -> CheckResult {
    if r.label.as_deref() != Some("equality") {
        return r;
    }
    let mut r = r;
    if g.slice != slice {
        r = r.fail_with(format!(
            "equality without {} (grid is {})",
            slice.label(),
            g.slice.label()
        ));
    }
    match ctx.covariant_alpha.get() {
        Ok(ca) => {
            let p = parallel_alpha_residual(ca, g.ambient);
            if p >= g.tol.classifier {
                r = r.fail_with(format!("equality without parallel α (|∇⊥α| = {p:.3e})"));
            } else {
                r = r.with_note(format!("{}, |∇⊥α| = {p:.3e}", slice.label()));
            }
        }
        Err(e) => r = r.fail_with(format!("∇⊥α unavailable: {e}")),
    }
    r
}

/// Scalar equality clause: margin at equality iff anti-pluriharmonic.
fn scalar_biconditional(r: CheckResult, ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let eq = r.label.as_deref() == Some("equality");
    let (anti, res) = is_anti(ctx, g);
    let note = format!("antipluriharmonic residual {res:.3e}");
    if eq != anti {
        r.fail_with(format!(
            "equality {eq} but anti-pluriharmonic {anti}; {note}"
        ))
    } else {
        r.with_note(note)
    }
}

fn spherical_product_target(a: &AmbientProduct) -> bool {
    a.c1() > 0.0
}

fn sxr(a: &AmbientProduct) -> bool {
    spherical_product_target(a) && is_qxr(a)
}

fn sxh(a: &AmbientProduct) -> bool {
    spherical_product_target(a)
        && is_opposite_curvature(a)
        && a.factor2.kind() == FactorKind::Hyperbolic
}

// ---- residual checks

fn on_manifold(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let v = g.ambient.on_manifold_residual(&ctx.jet.point);
    CheckResult::residual("on_manifold", v, g.tol.on_manifold, &ctx.u)
}

fn frame_ortho(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let all: Vec<_> = ctx
        .frames
        .tangent_frame()
        .iter()
        .chain(ctx.frames.normal.iter())
        .collect();
    let mut worst: f64 = 0.0;
    for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.ambient.inner(a, b) - target).abs());
        }
    }
    CheckResult::residual("frame_orthonormality", worst, g.tol.algebraic, &ctx.u)
}

fn weingarten_symmetry(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let v = ctx
        .gs
        .weingarten
        .iter()
        .map(|a| linalg::max_abs(&(a - a.transpose())))
        .fold(0.0, f64::max);
    CheckResult::residual("weingarten_symmetry", v, g.tol.algebraic, &ctx.u)
}

fn minimality(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let h = ctx.mean_curvature(g.ambient);
    let r = CheckResult::residual("minimality", h, g.tol.algebraic, &ctx.u);
    match g.expected.minimal {
        Some(false) => r.with_note("negative control: example is expected to be non-minimal"),
        _ => r,
    }
}

fn kahler_square(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    CheckResult::residual("kahler_square", ctx.kahler.square, g.tol.algebraic, &ctx.u)
}

fn kahler_ortho(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    CheckResult::residual(
        "kahler_orthogonality",
        ctx.kahler.ortho,
        g.tol.algebraic,
        &ctx.u,
    )
}

fn kahler_parallel(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "kahler_parallel";
    match lazy(
        name,
        CheckKind::Residual,
        g.tol.fd,
        ctx,
        &ctx.kahler_parallel,
    ) {
        Ok(p) => CheckResult::residual(name, *p, g.tol.fd, &ctx.u),
        Err(r) => r,
    }
}

fn spectral_violation(eigs: &[f64]) -> f64 {
    eigs.iter().map(|&l| (-l).max(l - 1.0)).fold(0.0, f64::max)
}

fn spectral_r(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let v = spectral_violation(&ctx.pt.eigen_r());
    CheckResult::residual("spectral_r", v, g.tol.spectral, &ctx.u)
}

fn spectral_t(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let v = spectral_violation(&ctx.pt.eigen_t());
    CheckResult::residual("spectral_t", v, g.tol.spectral, &ctx.u)
}

fn r_complement(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    CheckResult::residual(
        "r_complement",
        ctx.pt.complement_residual(),
        g.tol.complement,
        &ctx.u,
    )
}

fn trace_l(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    CheckResult::residual(
        "trace_l",
        ctx.pt.trace_l_residual(),
        g.tol.complement,
        &ctx.u,
    )
}

fn vertical_projection(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "vertical_projection";
    match tensors::vertical_projection_norm(&ctx.pt, g.ambient) {
        Ok(t) => {
            let mut r = CheckResult::margin(name, t.min(1.0 - t), g.tol.spectral, &ctx.u);
            r.notes = format!("|∂t^T|^2 = {t:.6}");
            r
        }
        Err(e) => na(name, CheckKind::Margin, g.tol.spectral, ctx, e.to_string()),
    }
}

fn trace_jr(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "trace_jr";
    if let Err(r) = require_kahler(name, CheckKind::Residual, g.tol.algebraic, ctx, g) {
        return r;
    }
    CheckResult::residual(name, kahler::trace_jr(&ctx.pt), g.tol.algebraic, &ctx.u)
}

fn gauss_residual(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "gauss_residual";
    let fd = match lazy(name, CheckKind::Residual, g.tol.fd, ctx, &ctx.intrinsic) {
        Ok(p) => p,
        Err(r) => return r,
    };
    let (Some(a), Some(b)) = (fd.riem.as_ref(), ctx.gauss.riem.as_ref()) else {
        return CheckResult::failed(
            name,
            CheckKind::Residual,
            g.tol.fd,
            &ctx.u,
            "curvature tensor missing",
        );
    };
    let d = a.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    worst = worst.max((a.get(i, j, k, l) - b.get(i, j, k, l)).abs());
                }
            }
        }
    }
    CheckResult::residual(name, worst, g.tol.fd, &ctx.u)
}

fn ricci_route_fd(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "ricci_route_fd";
    match lazy(name, CheckKind::Residual, g.tol.fd, ctx, &ctx.intrinsic) {
        Ok(fd) => CheckResult::residual(name, fd.ricci_difference(&ctx.gauss), g.tol.fd, &ctx.u),
        Err(r) => r,
    }
}

fn ricci_route_kahler(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "ricci_route_kahler";
    if let Err(r) = require_minimal_kahler(name, CheckKind::Residual, g.tol.algebraic, ctx, g) {
        return r;
    }
    match kahler::ricci_via_kahler_identity(&ctx.gs, &ctx.pt, g.ambient, g.tol.algebraic) {
        Ok(k) => CheckResult::residual(
            name,
            ctx.gauss.ricci_difference(&k),
            g.tol.algebraic,
            &ctx.u,
        ),
        Err(e) => na(
            name,
            CheckKind::Residual,
            g.tol.algebraic,
            ctx,
            e.to_string(),
        ),
    }
}

fn riem_symmetries(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "riem_symmetries";
    match lazy(name, CheckKind::Residual, g.tol.fd, ctx, &ctx.intrinsic) {
        Ok(fd) => match &fd.riem {
            Some(r) => CheckResult::residual(name, r.symmetry_residual(), g.tol.algebraic, &ctx.u),
            None => CheckResult::failed(
                name,
                CheckKind::Residual,
                g.tol.algebraic,
                &ctx.u,
                "no curvature tensor",
            ),
        },
        Err(r) => r,
    }
}

fn ricci_j(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "ricci_j_invariance";
    if let Err(r) = require_kahler(name, CheckKind::Residual, g.tol.algebraic, ctx, g) {
        return r;
    }
    let v = kahler::ricci_j_invariance(&ctx.gauss.ric, &ctx.j_frame);
    CheckResult::residual(name, v, g.tol.algebraic, &ctx.u)
}

fn curvature_j(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "curvature_j_commutation";
    if let Err(r) = require_kahler(name, CheckKind::Residual, g.tol.algebraic, ctx, g) {
        return r;
    }
    let Some(riem) = ctx.gauss.riem.as_ref() else {
        return CheckResult::failed(
            name,
            CheckKind::Residual,
            g.tol.algebraic,
            &ctx.u,
            "no curvature tensor",
        );
    };
    let v = kahler::curvature_j_commutator(riem, &ctx.j_frame);
    CheckResult::residual(name, v, g.tol.algebraic, &ctx.u)
}

fn codazzi(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "codazzi_residual";
    match lazy(
        name,
        CheckKind::Residual,
        g.tol.fd,
        ctx,
        &ctx.covariant_alpha,
    ) {
        Ok(ca) => CheckResult::residual(
            name,
            codazzi_residual(ca, &ctx.pt, &ctx.frames, g.ambient),
            g.tol.fd,
            &ctx.u,
        ),
        Err(r) => r,
    }
}

fn ricci_equation(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "ricci_equation_residual";
    match lazy(
        name,
        CheckKind::Residual,
        g.tol.fd,
        ctx,
        &ctx.ricci_equation,
    ) {
        Ok(v) => CheckResult::residual(name, *v, g.tol.fd, &ctx.u),
        Err(r) => r,
    }
}

fn normal_skew(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "normal_connection_skew";
    match lazy(
        name,
        CheckKind::Residual,
        g.tol.fd,
        ctx,
        &ctx.normal_connection,
    ) {
        Ok(nc) => CheckResult::residual(name, nc.skew_residual(), g.tol.fd, &ctx.u),
        Err(r) => r,
    }
}

fn expected_values(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "expected_values";
    let e = g.expected;
    if e.trace_r.is_none() && e.ric.is_none() && e.scal.is_none() {
        return na(name, CheckKind::Residual, g.tol.fd, ctx, "no stated values");
    }
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    if let Some((lo, hi)) = e.trace_r {
        let t = ctx.pt.trace_r;
        worst = worst.max((lo - t).max(t - hi).max(0.0));
        notes.push(format!("tr R = {t:.9}"));
    }
    if let Some(ric) = e.ric {
        let dev = (ctx.gauss.ric_max() - ric)
            .abs()
            .max((ctx.gauss.ric_min() - ric).abs());
        worst = worst.max(dev);
        notes.push(format!(
            "Ric in [{:.9}, {:.9}]",
            ctx.gauss.ric_min(),
            ctx.gauss.ric_max()
        ));
    }
    if let Some(scal) = e.scal {
        worst = worst.max((ctx.gauss.scal - scal).abs());
        notes.push(format!("Scal = {:.9}", ctx.gauss.scal));
    }
    CheckResult::residual(name, worst, g.tol.fd, &ctx.u).with_note(notes.join(", "))
}

// ---- classifiers

fn pluri(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let (flag, v) = is_pluri(ctx, g);
    labelled(
        "pluriharmonic_residual",
        v,
        flag,
        "pluriharmonic",
        "not_pluriharmonic",
        g.expected.pluriharmonic,
        g.tol.classifier,
        ctx,
    )
}

fn antipluri(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let (flag, v) = is_anti(ctx, g);
    labelled(
        "antipluriharmonic_residual",
        v,
        flag,
        "anti_pluriharmonic",
        "not_anti_pluriharmonic",
        g.expected.anti_pluriharmonic,
        g.tol.classifier,
        ctx,
    )
}

fn parallel_alpha(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "parallel_alpha_residual";
    let ca = match lazy(
        name,
        CheckKind::Classifier,
        g.tol.classifier,
        ctx,
        &ctx.covariant_alpha,
    ) {
        Ok(ca) => ca,
        Err(r) => return r,
    };
    let v = parallel_alpha_residual(ca, g.ambient);
    labelled(
        name,
        v,
        v < g.tol.classifier,
        "parallel",
        "not_parallel",
        g.expected.parallel_alpha,
        g.tol.classifier,
        ctx,
    )
}

fn slice(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "slice_classifier";
    let label = g.slice.label();
    let verdict = match g.expected.slice {
        Some(s) if s != g.slice => Verdict::Fail,
        _ => Verdict::Pass,
    };
    let r = CheckResult::classifier(
        name,
        ctx.pt.trace_r,
        label,
        g.tol.classifier,
        verdict,
        &ctx.u,
    );
    match g.expected.slice {
        Some(s) if s != g.slice => r.with_note(format!("expected {}", s.label())),
        Some(_) => r,
        None => r.with_note("no expectation"),
    }
}

fn pluri_property(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "pluriharmonicity_property";
    if let Err(r) = require_minimal_kahler(name, CheckKind::Classifier, g.tol.algebraic, ctx, g) {
        return r;
    }
    let n = ctx.complex_dim();
    let lhs =
        pluriharmonicity_property_lhs(&ctx.pt.r, &ctx.j_frame, g.ambient.c1(), g.ambient.c2(), n);
    let zero = lhs.abs() <= g.tol.algebraic;
    let (pl, res) = is_pluri(ctx, g);
    let label = if zero { "lhs_zero" } else { "lhs_nonzero" };
    let verdict = if zero == pl {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    CheckResult::classifier(name, lhs, label, g.tol.algebraic, verdict, &ctx.u)
        .with_note(format!("pluriharmonic residual {res:.3e}"))
}

fn obstruction_qxr(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "obstruction_QxR";
    let tol = g.tol.classifier;
    if !is_qxr(g.ambient) {
        return na(
            name,
            CheckKind::Classifier,
            tol,
            ctx,
            "target is not Q_c x R with c != 0",
        );
    }
    let n = ctx.complex_dim();
    let c = g.ambient.c1();
    let minimal = ctx.is_minimal(g.ambient, g.tol);
    let (pl, res) = is_pluri(ctx, g);
    let kahler = ctx.kahler_certified(g.tol);
    let premises = kahler && ((c < 0.0 && minimal) || (c > 0.0 && minimal && pl));
    let note = format!("c = {c}, n = {n}, minimal = {minimal}, pluriharmonic residual = {res:.3e}, kahler = {kahler}");
    if !premises {
        return CheckResult::classifier(
            name,
            n as f64,
            "premises_not_met",
            tol,
            Verdict::Pass,
            &ctx.u,
        )
        .with_note(note);
    }
    if n == 1 {
        CheckResult::classifier(name, n as f64, "n_equals_1", tol, Verdict::Pass, &ctx.u)
            .with_note(note)
    } else {
        CheckResult::classifier(name, n as f64, "counterexample", tol, Verdict::Fail, &ctx.u)
            .with_note(format!(
                "premises hold with n > 1, engine inconsistency: {note}"
            ))
    }
}

fn obstruction_opposite(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "obstruction_QcxQmc";
    let tol = g.tol.fd;
    if !is_opposite_curvature(g.ambient) {
        return na(
            name,
            CheckKind::Classifier,
            tol,
            ctx,
            "target is not Q_c x Q_-c with c != 0",
        );
    }
    let n = ctx.complex_dim();
    let (pl, res) = is_pluri(ctx, g);
    let premises = ctx.kahler_certified(g.tol) && ctx.is_minimal(g.ambient, g.tol) && pl;
    let tr = ctx.pt.trace_r;
    let note = format!("n = {n}, tr R = {tr:.9}, pluriharmonic residual = {res:.3e}");
    if !premises {
        return CheckResult::classifier(name, tr, "premises_not_met", tol, Verdict::Pass, &ctx.u)
            .with_note(note);
    }
    let trace_branch = (tr - n as f64).abs() < tol;
    if n == 1 {
        let r = CheckResult::classifier(name, tr, "n_equals_1", tol, Verdict::Pass, &ctx.u)
            .with_note(note);
        if trace_branch {
            r.with_note("tr R = n also holds")
        } else {
            r
        }
    } else if trace_branch {
        CheckResult::classifier(name, tr, "trace_r_equals_n", tol, Verdict::Pass, &ctx.u)
            .with_note(note)
            .with_note("branch realized numerically; global realizability not certified")
    } else {
        CheckResult::classifier(name, tr, "counterexample", tol, Verdict::Fail, &ctx.u)
            .with_note(format!("premises hold but neither branch does: {note}"))
    }
}

fn rj_commutator(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "rj_commutator";
    let tol = g.tol.algebraic;
    let (pl, res) = is_pluri(ctx, g);
    if !pl {
        return na(
            name,
            CheckKind::Classifier,
            tol,
            ctx,
            format!("not pluriharmonic (residual {res:.3e})"),
        );
    }
    if let Err(r) = require_minimal_kahler(name, CheckKind::Classifier, tol, ctx, g) {
        return r;
    }
    let (r, j) = (&ctx.pt.r, &ctx.j_frame);
    let sum = r * j + j * r;
    let zero = linalg::max_abs(&sum);
    let two = linalg::max_abs(&(&sum - j * 2.0));
    let n = ctx.complex_dim();
    let (c1, c2) = (g.ambient.c1(), g.ambient.c2());
    if zero < tol {
        let tr = ctx.pt.trace_r;
        let ok = (c1 == 0.0 || n == 1) && tr.abs() < tol;
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        CheckResult::classifier(name, zero, "rj_plus_jr_zero", tol, verdict, &ctx.u)
            .with_note(format!("c1 = {c1}, n = {n}, tr R = {tr:.3e}"))
    } else if two < tol {
        let verdict = if c2 == 0.0 || n == 1 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckResult::classifier(name, two, "rj_plus_jr_two_j", tol, verdict, &ctx.u)
            .with_note(format!("c2 = {c2}, n = {n}"))
    } else {
        na(
            name,
            CheckKind::Classifier,
            tol,
            ctx,
            format!("RJ + JR is neither 0 nor 2J ({zero:.3e}, {two:.3e})"),
        )
    }
}

fn warped_specialization(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "warped_specialization";
    let tol = g.tol.algebraic;
    if !is_qxr(g.ambient) {
        return na(name, CheckKind::Residual, tol, ctx, "target is not Q_c x R");
    }
    if let Err(r) = require_kahler(name, CheckKind::Residual, tol, ctx, g) {
        return r;
    }
    let n = ctx.complex_dim();
    let c = g.ambient.c1();
    let t2 = ctx.pt.trace_r;
    let t = *ctx.u.last().unwrap_or(&0.0);
    let warped = match warped_obstruction_lhs(n, c, |_| 1.0, |_| 0.0, |_| 0.0, t, t2) {
        Ok(v) => v,
        Err(e) => {
            return CheckResult::failed(name, CheckKind::Residual, tol, &ctx.u, e.to_string())
        }
    };
    let product = pluriharmonicity_property_lhs(&ctx.pt.r, &ctx.j_frame, c, g.ambient.c2(), n);
    CheckResult::residual(name, warped - product, tol, &ctx.u)
        .with_note("constant warping; the warped statement itself needs non-constant ρ")
}

// ---- margins

fn ricci_margin_sxr(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "ricci_margin_SxR";
    if !sxr(g.ambient) {
        return na(
            name,
            CheckKind::Margin,
            g.tol.algebraic,
            ctx,
            "target is not S_c x R",
        );
    }
    if let Err(r) = require_minimal_kahler(name, CheckKind::Margin, g.tol.algebraic, ctx, g) {
        return r;
    }
    let bound = ricci_bound_half(g.ambient.c1(), ctx.complex_dim(), ctx.pt.trace_r);
    let r = finish_margin(name, bound - ctx.gauss.ric_max(), ctx, g);
    ricci_equality_assertions(r, ctx, g, SliceClass::FirstFactorSlice)
}

fn ricci_margin_sxh(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "ricci_margin_SxH";
    if !sxh(g.ambient) {
        return na(
            name,
            CheckKind::Margin,
            g.tol.algebraic,
            ctx,
            "target is not S_c x H_-c",
        );
    }
    if let Err(r) = require_minimal_kahler(name, CheckKind::Margin, g.tol.algebraic, ctx, g) {
        return r;
    }
    let bound = ricci_bound_half(g.ambient.c1(), ctx.complex_dim(), ctx.pt.trace_r);
    let r = finish_margin(name, bound - ctx.gauss.ric_max(), ctx, g);
    ricci_equality_assertions(r, ctx, g, SliceClass::FirstFactorSlice)
}

fn scalar_margin_sxr(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "scalar_margin_SxR";
    if !sxr(g.ambient) {
        return na(
            name,
            CheckKind::Margin,
            g.tol.algebraic,
            ctx,
            "target is not S_c x R",
        );
    }
    if let Err(r) = require_minimal_kahler(name, CheckKind::Margin, g.tol.algebraic, ctx, g) {
        return r;
    }
    let bound = scalar_bound_product(g.ambient.c1(), ctx.complex_dim(), ctx.pt.trace_r);
    scalar_biconditional(finish_margin(name, bound - ctx.gauss.scal, ctx, g), ctx, g)
}

fn scalar_margin_sxh(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "scalar_margin_SxH";
    if !sxh(g.ambient) {
        return na(
            name,
            CheckKind::Margin,
            g.tol.algebraic,
            ctx,
            "target is not S_c x H_-c",
        );
    }
    if let Err(r) = require_minimal_kahler(name, CheckKind::Margin, g.tol.algebraic, ctx, g) {
        return r;
    }
    let bound = scalar_bound_product(g.ambient.c1(), ctx.complex_dim(), ctx.pt.trace_r);
    scalar_biconditional(finish_margin(name, bound - ctx.gauss.scal, ctx, g), ctx, g)
}

fn scalar_margin_general(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "scalar_margin_general";
    if let Err(r) = require_minimal_kahler(name, CheckKind::Margin, g.tol.algebraic, ctx, g) {
        return r;
    }
    let bound = scalar_bound_general(&ctx.pt, g.ambient.c1(), g.ambient.c2());
    scalar_biconditional(finish_margin(name, bound - ctx.gauss.scal, ctx, g), ctx, g)
}

/// Curvature of the factor containing a slice, if the grid is one.
fn slice_curvature(g: &GridFacts<'_>) -> Option<f64> {
    match g.slice {
        SliceClass::FirstFactorSlice => Some(g.ambient.c1()),
        SliceClass::SecondFactorSlice => Some(g.ambient.c2()),
        SliceClass::Generic => None,
    }
}

fn takahashi(name: &str, lower: bool, ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let tol = g.tol.algebraic;
    let Some(c) = slice_curvature(g) else {
        return na(name, CheckKind::Margin, tol, ctx, "not a slice");
    };
    if !ctx.is_minimal(g.ambient, g.tol) {
        return na(name, CheckKind::Margin, tol, ctx, "not minimal");
    }
    let (lo, hi) = takahashi_bounds(c, ctx.jet.dim(), ctx.gs.norm_alpha2(g.ambient));
    let margin = if lower {
        ctx.gauss.ric_min() - lo
    } else {
        hi - ctx.gauss.ric_max()
    };
    finish_margin(name, margin, ctx, g)
}

fn takahashi_lower(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    takahashi("takahashi_lower", true, ctx, g)
}

fn takahashi_upper(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    takahashi("takahashi_upper", false, ctx, g)
}

fn dajczer_rodriguez(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "dajczer_rodriguez_margin";
    let tol = g.tol.algebraic;
    match slice_curvature(g) {
        Some(c) if c > 0.0 => {
            if let Err(r) = require_minimal_kahler(name, CheckKind::Margin, tol, ctx, g) {
                return r;
            }
            finish_margin(
                name,
                c * ctx.complex_dim() as f64 - ctx.gauss.ric_max(),
                ctx,
                g,
            )
        }
        _ => na(
            name,
            CheckKind::Margin,
            tol,
            ctx,
            "not a slice in a spherical factor",
        ),
    }
}

// ---- defect identities

fn defect_parallelogram(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let dv = defect_vectors(&ctx.gs, &ctx.j_frame, g.ambient);
    CheckResult::residual(
        "defect_parallelogram",
        dv.parallelogram_residual(),
        g.tol.algebraic,
        &ctx.u,
    )
}

fn defect_pluri(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "defect_pluri_identity";
    if let Err(r) = require_minimal_kahler(name, CheckKind::Residual, g.tol.algebraic, ctx, g) {
        return r;
    }
    let dv = defect_vectors(&ctx.gs, &ctx.j_frame, g.ambient);
    let (p, _) =
        defect_identity_residuals(&dv, &ctx.pt, g.ambient.c1(), g.ambient.c2(), &ctx.gauss);
    CheckResult::residual(name, p, g.tol.algebraic, &ctx.u)
}

fn defect_ricci(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "defect_ricci_identity";
    if let Err(r) = require_minimal_kahler(name, CheckKind::Residual, g.tol.algebraic, ctx, g) {
        return r;
    }
    let dv = defect_vectors(&ctx.gs, &ctx.j_frame, g.ambient);
    let (_, q) =
        defect_identity_residuals(&dv, &ctx.pt, g.ambient.c1(), g.ambient.c2(), &ctx.gauss);
    CheckResult::residual(name, q, g.tol.algebraic, &ctx.u)
}

fn defect_scalar(ctx: &SampleContext, g: &GridFacts<'_>) -> CheckResult {
    let name = "defect_scalar_identity";
    if let Err(r) = require_minimal_kahler(name, CheckKind::Residual, g.tol.algebraic, ctx, g) {
        return r;
    }
    let dv = defect_vectors(&ctx.gs, &ctx.j_frame, g.ambient);
    let v = scalar_defect_residual(&dv, &ctx.pt, g.ambient.c1(), g.ambient.c2(), ctx.gauss.scal);
    CheckResult::residual(name, v, g.tol.algebraic, &ctx.u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_sorted_and_unique() {
        let names = check_names();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(names, sorted);
    }

    #[test]
    fn find_known_and_unknown() {
        assert!(find_check("gauss_residual").is_some());
        assert!(find_check("nope").is_none());
    }
}
