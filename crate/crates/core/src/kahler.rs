//! Kähler hypotheses on the domain, `J`-adapted frames, and intrinsic
//! curvature by three routes: finite differences of the induced metric, the
//! Gauss equation, and the Kähler identity.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z` and
//! `Ric(X,Y) = tr(Z ↦ R(Z,X)Y)`, so round spheres have positive Ricci.

use nalgebra::DMatrix;

use crate::ambient::AmbientProduct;
use crate::error::{GeometryError, Result};
use crate::fd;
use crate::jetcalc::{self, FrameSample, ImmersionDefinition, Steps, TangentSpace};
use crate::linalg;
use crate::tensors::{GeometrySample, ProductTensors};

/// `J` over an orthonormal frame: `E^{-1} J E`.
pub fn j_in_frame(j_coord: &DMatrix<f64>, coord_to_frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = coord_to_frame
        .clone()
        .try_inverse()
        .ok_or(GeometryError::DegenerateImmersion {
            min_eig: 0.0,
            max_eig: 0.0,
        })?;
    Ok(inv * j_coord * coord_to_frame)
}

/// `|J^2 + Id|_F` over an orthonormal frame.
pub fn square_residual(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    (j * j + DMatrix::identity(n, n)).norm()
}

/// `max |<JX_p, JX_q> - δ_pq|` over an orthonormal frame.
pub fn ortho_residual(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    linalg::max_abs(&(j.transpose() * j - DMatrix::identity(n, n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KahlerResiduals {
    pub square: f64,
    pub ortho: f64,
    /// `max |(∇_{X_p} J) X_q|` over an orthonormal frame.
    pub parallel: f64,
}

impl KahlerResiduals {
    pub fn max(self, other: Self) -> Self {
        Self {
            square: self.square.max(other.square),
            ortho: self.ortho.max(other.ortho),
            parallel: self.parallel.max(other.parallel),
        }
    }

    pub fn certified(&self, algebraic_tol: f64, fd_tol: f64) -> bool {
        self.square <= algebraic_tol && self.ortho <= algebraic_tol && self.parallel <= fd_tol
    }
}

/// Christoffel symbols `Γ^l_ij` of the induced metric in chart coordinates.
#[derive(Debug, Clone)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, l: usize, i: usize, j: usize) -> f64 {
        self.data[(l * self.dim + i) * self.dim + j]
    }

    /// Levi-Civita symbols from `g` and its coordinate derivatives.
    pub fn from_metric(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Result<Self> {
        let dim = g.nrows();
        let ginv = g
            .clone()
            .try_inverse()
            .ok_or(GeometryError::DegenerateImmersion {
                min_eig: 0.0,
                max_eig: 0.0,
            })?;
        let mut data = vec![0.0; dim * dim * dim];
        for l in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = 0.0;
                    for m in 0..dim {
                        s += ginv[(l, m)] * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]);
                    }
                    data[(l * dim + i) * dim + j] = 0.5 * s;
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// `(Γ_a)[c][d] = Γ^c_ad`.
    fn along(&self, a: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |c, d| self.get(c, a, d))
    }
}

fn metric_at(
    imm: &ImmersionDefinition,
    v: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
) -> Result<DMatrix<f64>> {
    Ok(jetcalc::metric_of(&imm.eval_partials(v, steps)?, ambient))
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    m.as_slice().to_vec()
}

/// Metric at `u` and its coordinate derivatives (Richardson differences of
/// the metric built from first partials).
pub fn metric_derivatives(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let dim = u.len();
    let g = metric_at(imm, u, steps, ambient)?;
    let field = |v: &[f64]| metric_at(imm, v, steps, ambient).map(|m| flatten(&m));
    let dg = (0..dim)
        .map(|a| {
            fd::central_richardson(field, u, a, steps.0[a])
                .map(|(d, _)| DMatrix::from_vec(dim, dim, d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((g, dg))
}

pub fn christoffel_intrinsic(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
) -> Result<Christoffel> {
    let (g, dg) = metric_derivatives(imm, u, steps, ambient)?;
    Christoffel::from_metric(&g, &dg)
}

/// Kähler residuals at one chart point.
pub fn kahler_residuals_at(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
) -> Result<KahlerResiduals> {
    let dim = u.len();
    let d1 = imm.eval_partials(u, steps)?;
    let tangent = TangentSpace::from_partials(imm.eval_map(u)?, &d1, ambient)?;
    let e = &tangent.coord_to_frame;
    let (g, dg) = metric_derivatives(imm, u, steps, ambient)?;
    let jc = imm.complex_structure_at(u, &g)?;
    let jf = j_in_frame(&jc, e)?;
    let gamma = Christoffel::from_metric(&g, &dg)?;
    let j_field = |v: &[f64]| -> Result<Vec<f64>> {
        let gv = metric_at(imm, v, steps, ambient)?;
        Ok(flatten(&imm.complex_structure_at(v, &gv)?))
    };
    let mut nabla = Vec::with_capacity(dim);
    for a in 0..dim {
        let (d, _) = fd::central_richardson(j_field, u, a, steps.0[a])?;
        let dj = DMatrix::from_vec(dim, dim, d);
        let ga = gamma.along(a);
        nabla.push(dj + &ga * &jc - &jc * &ga);
    }
    let einv = e
        .clone()
        .try_inverse()
        .ok_or(GeometryError::DegenerateImmersion {
            min_eig: 0.0,
            max_eig: 0.0,
        })?;
    let mut parallel: f64 = 0.0;
    for p in 0..dim {
        let mut n = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            n += &nabla[a] * e[(a, p)];
        }
        let f = &einv * n * e;
        for q in 0..dim {
            parallel = parallel.max(f.column(q).norm());
        }
    }
    Ok(KahlerResiduals {
        square: square_residual(&jf),
        ortho: ortho_residual(&jf),
        parallel,
    })
}

/// Maximum of the Kähler residuals over a set of chart points.
pub fn kahler_residuals(
    imm: &ImmersionDefinition,
    grid: &[Vec<f64>],
    steps: &Steps,
    ambient: &AmbientProduct,
) -> Result<KahlerResiduals> {
    let mut acc = KahlerResiduals::default();
    for u in grid {
        acc = acc.max(kahler_residuals_at(imm, u, steps, ambient)?);
    }
    Ok(acc)
}

/// Reorders `frames` into `X_1, JX_1, X_3, JX_3, ...`. Each `X_{2j-1}` is the
/// frame vector with the largest component outside the span already built
/// (ties to the lowest index), orthonormalized; `X_{2j}` is its image under
/// `J` with no further correction. Returns the new frames and the frame
/// change `Q` (`X'_q = sum_p Q[p,q] X_p`).
pub fn adapted_frame(
    frames: &FrameSample,
    j: &DMatrix<f64>,
    tolerance: f64,
) -> Result<(FrameSample, DMatrix<f64>)> {
    let dim = j.nrows();
    let residual = square_residual(j).max(ortho_residual(j));
    if !dim.is_multiple_of(2) || residual > tolerance || residual.is_nan() {
        return Err(GeometryError::KahlerIncompatible { residual });
    }
    let mut q = DMatrix::zeros(dim, dim);
    let mut built: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(dim);
    for pair in 0..dim / 2 {
        let mut best = None;
        let mut best_norm = 0.0;
        for k in 0..dim {
            let mut c = nalgebra::DVector::zeros(dim);
            c[k] = 1.0;
            for b in &built {
                let s = c.dot(b);
                c.axpy(-s, b, 1.0);
            }
            let n = c.norm();
            if n > best_norm + 1e-12 {
                best_norm = n;
                best = Some(c);
            }
        }
        let mut y = best.ok_or(GeometryError::KahlerIncompatible { residual })?;
        for b in &built {
            let s = y.dot(b);
            y.axpy(-s, b, 1.0);
        }
        y /= y.norm();
        let jy = j * &y;
        q.set_column(2 * pair, &y);
        q.set_column(2 * pair + 1, &jy);
        built.push(y);
        built.push(jy);
    }
    Ok((frames.remixed(&q), q))
}

/// `⟨R(X_i,X_j)X_k, X_l⟩` over an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Riem {
    dim: usize,
    data: Vec<f64>,
}

impl Riem {
    fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.idx(i, j, k, l);
        self.data[n] = v;
    }

    /// `Ric_jk = sum_i R_ijki`.
    pub fn ricci(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |j, k| {
            (0..self.dim).map(|i| self.get(i, j, k, i)).sum()
        })
    }

    /// Sectional curvature of the plane `X_i ∧ X_j` (orthonormal pair).
    pub fn sectional(&self, i: usize, j: usize) -> f64 {
        self.get(i, j, j, i)
    }

    /// Matrix of `R(X_i, X_j)` acting on the frame: `[l][k] = R_ijkl`.
    pub fn operator(&self, i: usize, j: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |l, k| self.get(i, j, k, l))
    }

    /// Largest violation of antisymmetry in both pairs, pair symmetry, and
    /// the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v + self.get(j, i, k, l)).abs())
                            .max((v + self.get(i, j, l, k)).abs())
                            .max((v - self.get(k, l, i, j)).abs())
                            .max((v + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Re-expresses a covariant 4-tensor in a new basis: `out_pqrs = sum
    /// m_ap m_bq m_cr m_ds t_abcd`, one index at a time.
    fn transformed(&self, m: &DMatrix<f64>) -> Self {
        let d = self.dim;
        let mut cur = self.data.clone();
        let stride = [d * d * d, d * d, d, 1];
        for &s in &stride {
            let mut next = vec![0.0; cur.len()];
            for (idx, out) in next.iter_mut().enumerate() {
                let p = (idx / s) % d;
                let base = idx - p * s;
                *out = (0..d).map(|a| m[(a, p)] * cur[base + a * s]).sum();
            }
            cur = next;
        }
        Self { dim: d, data: cur }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureRoute {
    IntrinsicFd,
    GaussEquation,
    KahlerIdentity,
}

#[derive(Debug, Clone)]
pub struct CurvaturePackage {
    pub riem: Option<Riem>,
    /// Over the frame the package was computed in.
    pub ric: DMatrix<f64>,
    pub scal: f64,
    pub route: CurvatureRoute,
    /// Only the diagonal `Ric(X_i)` is known (Kähler identity route).
    pub diagonal_only: bool,
}

impl CurvaturePackage {
    fn from_riem(riem: Riem, route: CurvatureRoute) -> Self {
        let ric = riem.ricci();
        let scal = ric.trace();
        Self {
            riem: Some(riem),
            ric,
            scal,
            route,
            diagonal_only: false,
        }
    }

    /// Largest Ricci curvature over all unit directions (largest eigenvalue),
    /// or over frame directions when only the diagonal is known.
    pub fn ric_max(&self) -> f64 {
        if self.diagonal_only {
            return self.ric.diagonal().max();
        }
        *linalg::symmetric_eigenvalues(&self.ric)
            .last()
            .unwrap_or(&0.0)
    }

    pub fn ric_min(&self) -> f64 {
        if self.diagonal_only {
            return self.ric.diagonal().min();
        }
        *linalg::symmetric_eigenvalues(&self.ric)
            .first()
            .unwrap_or(&0.0)
    }

    /// Entrywise agreement with another route (diagonal only if either side
    /// is diagonal-only).
    pub fn ricci_difference(&self, other: &Self) -> f64 {
        let diff = &self.ric - &other.ric;
        if self.diagonal_only || other.diagonal_only {
            diff.diagonal().amax()
        } else {
            linalg::max_abs(&diff)
        }
    }
}

/// Curvature of the induced metric by nested finite differences:
/// Christoffels from Richardson differences of the metric, curvature from
/// Richardson differences of the Christoffels, then conversion to the frame
/// given by `coord_to_frame`.
pub fn intrinsic_curvature_fd(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
    coord_to_frame: &DMatrix<f64>,
) -> Result<CurvaturePackage> {
    let d = u.len();
    let gamma_field = |v: &[f64]| christoffel_intrinsic(imm, v, steps, ambient).map(|c| c.data);
    let gamma = christoffel_intrinsic(imm, u, steps, ambient)?;
    let g = metric_at(imm, u, steps, ambient)?;
    let dgamma = (0..d)
        .map(|a| fd::central_richardson(gamma_field, u, a, steps.0[a]).map(|(v, _)| v))
        .collect::<Result<Vec<_>>>()?;
    let dg = |a: usize, l: usize, i: usize, j: usize| dgamma[a][(l * d + i) * d + j];
    let mut coord = Riem::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                // R(d_a, d_b) d_c = Rm^l d_l
                let rm: Vec<f64> = (0..d)
                    .map(|l| {
                        let mut v = dg(a, l, b, c) - dg(b, l, a, c);
                        for m in 0..d {
                            v += gamma.get(l, a, m) * gamma.get(m, b, c)
                                - gamma.get(l, b, m) * gamma.get(m, a, c);
                        }
                        v
                    })
                    .collect();
                for e in 0..d {
                    let lowered = (0..d).map(|l| g[(l, e)] * rm[l]).sum();
                    coord.set(a, b, c, e, lowered);
                }
            }
        }
    }
    Ok(CurvaturePackage::from_riem(
        coord.transformed(coord_to_frame),
        CurvatureRoute::IntrinsicFd,
    ))
}

/// Gauss equation over the sample frame:
/// `⟨R(X,Y)Z,W⟩ = c1[X∧Y - X∧RY - RX∧Y] + (c1+c2) RX∧RY
///  + ⟨α(Y,Z),α(X,W)⟩ - ⟨α(X,Z),α(Y,W)⟩`, `⟨(A∧B)Z,W⟩ = ⟨B,Z⟩⟨A,W⟩ - ⟨A,Z⟩⟨B,W⟩`.
pub fn riem_via_gauss(gs: &GeometrySample, pt: &ProductTensors, ambient: &AmbientProduct) -> Riem {
    let (c1, c2) = (ambient.c1(), ambient.c2());
    let d = gs.dim();
    let r = &pt.r;
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut out = Riem::zeros(d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let space = delta(j, k) * delta(i, l)
                        - delta(i, k) * delta(j, l)
                        - (r[(j, k)] * delta(i, l) - delta(i, k) * r[(j, l)])
                        - (delta(j, k) * r[(i, l)] - r[(i, k)] * delta(j, l));
                    let mixed = r[(j, k)] * r[(i, l)] - r[(i, k)] * r[(j, l)];
                    let ext = ambient.inner(gs.alpha(j, k), gs.alpha(i, l))
                        - ambient.inner(gs.alpha(i, k), gs.alpha(j, l));
                    out.set(i, j, k, l, c1 * space + (c1 + c2) * mixed + ext);
                }
            }
        }
    }
    out
}

/// Ricci from the contracted Gauss equation; no minimality assumed.
pub fn ricci_via_gauss(
    gs: &GeometrySample,
    pt: &ProductTensors,
    ambient: &AmbientProduct,
) -> CurvaturePackage {
    CurvaturePackage::from_riem(
        riem_via_gauss(gs, pt, ambient),
        CurvatureRoute::GaussEquation,
    )
}

/// `Ric(X_i) = -Σ_j ⟨α(X_i,JX_j), α(X_j,JX_i)⟩ + c1(1 - ⟨RX_i,X_i⟩ - ⟨RJX_i,JX_i⟩)
/// + (c1+c2)⟨RJX_i, JRX_i⟩` over a `J`-adapted frame. Rejects samples with
/// `|H| > minimal_tol`.
pub fn ricci_via_kahler_identity(
    gs: &GeometrySample,
    pt: &ProductTensors,
    ambient: &AmbientProduct,
    minimal_tol: f64,
) -> Result<CurvaturePackage> {
    let h = ambient.norm(&gs.mean_curvature);
    if h > minimal_tol || h.is_nan() {
        return Err(GeometryError::NotMinimal { mean_curvature: h });
    }
    let (c1, c2) = (ambient.c1(), ambient.c2());
    let d = gs.dim();
    let j = &pt.j;
    let r = &pt.r;
    let rj = r * j;
    let jr = j * r;
    let mut ric = DMatrix::zeros(d, d);
    for i in 0..d {
        let mut ext = 0.0;
        for jj in 0..d {
            ext -= ambient.inner(&gs.alpha_j(i, jj, j), &gs.alpha_j(jj, i, j));
        }
        let jxi = j.column(i);
        let rjx = r * jxi;
        let space = c1 * (1.0 - r[(i, i)] - jxi.dot(&rjx));
        let mixed = (c1 + c2) * rj.column(i).dot(&jr.column(i));
        ric[(i, i)] = ext + space + mixed;
    }
    let scal = ric.trace();
    Ok(CurvaturePackage {
        riem: None,
        ric,
        scal,
        route: CurvatureRoute::KahlerIdentity,
        diagonal_only: true,
    })
}

/// `max |J^t Ric J - Ric|`.
pub fn ricci_j_invariance(ric: &DMatrix<f64>, j: &DMatrix<f64>) -> f64 {
    linalg::max_abs(&(j.transpose() * ric * j - ric))
}

/// `max_{i,j} |R(X_i,X_j)∘J - J∘R(X_i,X_j)|`.
pub fn curvature_j_commutator(riem: &Riem, j: &DMatrix<f64>) -> f64 {
    let d = riem.dim();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let m = riem.operator(a, b);
            worst = worst.max(linalg::max_abs(&(&m * j - j * &m)));
        }
    }
    worst
}

/// `tr(JR)`, zero for symmetric `R` and antisymmetric `J`.
pub fn trace_jr(pt: &ProductTensors) -> f64 {
    (&pt.j * &pt.r).trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::{
        build_frames, compute_jet, standard_complex_structure, Chart, ComplexStructure,
    };
    use crate::tensors::{product_tensors, second_fundamental_form};
    use nalgebra::dvector;
    use std::sync::Arc;

    fn flat_torus() -> (ImmersionDefinition, AmbientProduct) {
        let imm = ImmersionDefinition::new(
            "plane",
            Chart::new(&[(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            Arc::new(|u: &[f64]| dvector![u[0], u[1], 0.0, 0.0]),
        )
        .with_partials(Arc::new(|_: &[f64]| {
            vec![dvector![1.0, 0.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0, 0.0]]
        }));
        (imm, AmbientProduct::from_parts(0.0, 3, 0.0, 1).unwrap())
    }

    fn round_sphere() -> (ImmersionDefinition, AmbientProduct) {
        let imm = ImmersionDefinition::new(
            "sphere",
            Chart::new(&[(0.2, 2.9), (0.0, 6.0)]).unwrap(),
            Arc::new(|u: &[f64]| {
                dvector![
                    u[0].sin() * u[1].cos(),
                    u[0].sin() * u[1].sin(),
                    u[0].cos(),
                    0.3
                ]
            }),
        )
        .with_partials(Arc::new(|u: &[f64]| {
            vec![
                dvector![
                    u[0].cos() * u[1].cos(),
                    u[0].cos() * u[1].sin(),
                    -u[0].sin(),
                    0.0
                ],
                dvector![-u[0].sin() * u[1].sin(), u[0].sin() * u[1].cos(), 0.0, 0.0],
            ]
        }))
        .with_complex_structure(ComplexStructure::SurfaceRotation);
        (imm, AmbientProduct::from_parts(1.0, 2, 0.0, 1).unwrap())
    }

    #[test]
    fn flat_residuals_vanish() {
        let (imm, a) = flat_torus();
        let steps = Steps::scaled(&imm.chart, 1e-3);
        let k = kahler_residuals(&imm, &imm.chart.grid(&[3, 3]).unwrap(), &steps, &a).unwrap();
        assert!(
            k.square < 1e-10 && k.ortho < 1e-10 && k.parallel < 1e-10,
            "{k:?}"
        );
        let curv = intrinsic_curvature_fd(&imm, &[0.5, 0.5], &steps, &a, &DMatrix::identity(2, 2))
            .unwrap();
        assert!(curv.riem.unwrap().data.iter().all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn round_sphere_rotation_is_parallel() {
        let (imm, a) = round_sphere();
        let steps = Steps::scaled(&imm.chart, 1e-3);
        let k = kahler_residuals_at(&imm, &[1.1, 2.0], &steps, &a).unwrap();
        assert!(
            k.parallel < 1e-5 && k.square < 1e-12 && k.ortho < 1e-12,
            "{k:?}"
        );
    }

    #[test]
    fn scaled_structure_fails_square() {
        let (imm, a) = flat_torus();
        let imm = imm.with_complex_structure(ComplexStructure::Constant(
            standard_complex_structure(2) * 1.1,
        ));
        let k = kahler_residuals_at(&imm, &[0.5, 0.5], &Steps::uniform(2, 1e-3), &a).unwrap();
        assert!((k.square - 0.21 * 2f64.sqrt()).abs() < 1e-12);
        assert!(!k.certified(1e-6, 1e-4));
    }

    #[test]
    fn sphere_curvature_routes() {
        let (imm, a) = round_sphere();
        let u = [1.1, 2.0];
        let steps = Steps::scaled(&imm.chart, 1e-3);
        let jet = compute_jet(&imm, &u, &steps).unwrap();
        let frames = build_frames(&jet, &a).unwrap();
        let g = jetcalc::induced_metric(&jet, &a).unwrap();
        let jf = j_in_frame(
            &imm.complex_structure_at(&u, &g).unwrap(),
            frames.coord_to_frame(),
        )
        .unwrap();
        let (frames, _) = adapted_frame(&frames, &jf, 1e-9).unwrap();
        let jf = j_in_frame(
            &imm.complex_structure_at(&u, &g).unwrap(),
            frames.coord_to_frame(),
        )
        .unwrap();
        let fd = intrinsic_curvature_fd(&imm, &u, &steps, &a, frames.coord_to_frame()).unwrap();
        assert!((fd.riem.as_ref().unwrap().sectional(0, 1) - 1.0).abs() < 1e-4);
        let gs = second_fundamental_form(&jet, &frames, &a).unwrap();
        let pt = product_tensors(&frames, &jf, &a).unwrap();
        let gauss = ricci_via_gauss(&gs, &pt, &a);
        let kid = ricci_via_kahler_identity(&gs, &pt, &a, 1e-6).unwrap();
        assert!((gauss.scal - 2.0).abs() < 1e-7);
        assert!(gauss.ricci_difference(&kid) < 1e-9);
        assert!(gauss.ricci_difference(&fd) < 1e-4);
        assert!(gauss.riem.as_ref().unwrap().symmetry_residual() < 1e-9);
        assert!(fd.riem.as_ref().unwrap().symmetry_residual() < 1e-6);
        assert!(ricci_j_invariance(&gauss.ric, &jf) < 1e-7);
        assert!(curvature_j_commutator(gauss.riem.as_ref().unwrap(), &jf) < 1e-5);
        assert!(trace_jr(&pt).abs() < 1e-12);
    }

    #[test]
    fn adapted_frame_pairs_vectors() {
        let (imm, a) = flat_torus();
        let jet = compute_jet(&imm, &[0.5, 0.5], &Steps::uniform(2, 1e-3)).unwrap();
        let frames = build_frames(&jet, &a).unwrap();
        let j = standard_complex_structure(2);
        let (adapted, q) = adapted_frame(&frames, &j, 1e-9).unwrap();
        assert_eq!(q.column(1), (&j * q.column(0)).column(0));
        let x = adapted.tangent_frame();
        assert!(a.inner(&x[0], &x[1]).abs() < 1e-14);
        assert!(adapted_frame(&frames, &(j * 1.1), 1e-6).is_err());
    }
}
