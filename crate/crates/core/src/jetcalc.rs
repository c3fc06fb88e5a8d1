//! Jets of an immersion on its chart and orthonormal tangent/normal frames.
//!
//! First partials come from the exact derivative callback when one is
//! supplied (fourth-order central differences otherwise). Second partials are
//! central differences of the first partials with one Richardson level.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::ambient::{AmbientProduct, AmbientVector};
use crate::error::{GeometryError, Result};
use crate::fd;
use crate::linalg;

pub type MapFn = Arc<dyn Fn(&[f64]) -> AmbientVector + Send + Sync>;
/// Returns the `2n` coordinate partials `d f / d u_i`.
pub type PartialsFn = Arc<dyn Fn(&[f64]) -> Vec<AmbientVector> + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Default base step; the per-axis step is this times the chart extent.
pub const DEFAULT_H: f64 = 1e-3;

/// Smallest metric eigenvalue allowed, relative to the largest.
pub const RANK_TOL: f64 = 1e-8;

/// Almost complex structure in chart coordinates. Column `b` of the matrix is
/// `J d_b` expanded in the coordinate basis.
#[derive(Clone)]
pub enum ComplexStructure {
    Constant(DMatrix<f64>),
    Field(MatrixField),
    /// Rotation by `pi/2` in the induced metric (surfaces only).
    SurfaceRotation,
}

impl fmt::Debug for ComplexStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(m) => write!(f, "Constant({m:?})"),
            Self::Field(_) => write!(f, "Field(..)"),
            Self::SurfaceRotation => write!(f, "SurfaceRotation"),
        }
    }
}

/// Standard block rotation `J e_{2j-1} = e_{2j}` on `R^{2n}`. For odd `dim`
/// the last axis is left in the kernel; such charts fail validation anyway.
pub fn standard_complex_structure(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    for k in (0..dim.saturating_sub(1)).step_by(2) {
        j[(k + 1, k)] = 1.0;
        j[(k, k + 1)] = -1.0;
    }
    j
}

/// Rectangular parameter box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Chart {
    pub fn new(ranges: &[(f64, f64)]) -> Result<Self> {
        if ranges.is_empty() {
            return Err(GeometryError::InvalidArgument(
                "chart needs at least one axis".into(),
            ));
        }
        for (k, &(lo, hi)) in ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GeometryError::InvalidArgument(format!(
                    "chart axis {k}: invalid range [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            lo: ranges.iter().map(|r| r.0).collect(),
            hi: ranges.iter().map(|r| r.1).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn range(&self, axis: usize) -> (f64, f64) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
                context: "parameter point",
            });
        }
        for (axis, &value) in u.iter().enumerate() {
            if !(value >= self.lo[axis] && value <= self.hi[axis]) {
                return Err(GeometryError::OutsideChart {
                    axis,
                    value,
                    lo: self.lo[axis],
                    hi: self.hi[axis],
                });
            }
        }
        Ok(())
    }

    /// Cell-centred grid with `points[k]` samples on axis `k`, in row-major
    /// order (last axis fastest).
    pub fn grid(&self, points: &[usize]) -> Result<Vec<Vec<f64>>> {
        if points.len() != self.dim() || points.contains(&0) {
            return Err(GeometryError::InvalidArgument(format!(
                "grid {points:?} does not match a {}-dimensional chart",
                self.dim()
            )));
        }
        let total: usize = points.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim()];
        for _ in 0..total {
            out.push(
                idx.iter()
                    .enumerate()
                    .map(|(a, &k)| {
                        self.lo[a] + (k as f64 + 0.5) * self.extent(a) / points[a] as f64
                    })
                    .collect(),
            );
            for a in (0..self.dim()).rev() {
                idx[a] += 1;
                if idx[a] < points[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(out)
    }
}

/// Per-axis finite-difference steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Steps(pub Vec<f64>);

impl Steps {
    /// `h` times the extent of each chart axis.
    pub fn scaled(chart: &Chart, h: f64) -> Self {
        Self((0..chart.dim()).map(|a| h * chart.extent(a)).collect())
    }

    pub fn uniform(dim: usize, h: f64) -> Self {
        Self(vec![h; dim])
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// A closed-form immersion of a `2n`-dimensional chart into the flat space
/// containing an ambient product.
#[derive(Clone)]
pub struct ImmersionDefinition {
    pub name: String,
    pub chart: Chart,
    map: MapFn,
    partials: Option<PartialsFn>,
    pub complex_structure: ComplexStructure,
    /// Diagnostic mode: accept `2n >= m`.
    pub allow_low_codimension: bool,
}

impl fmt::Debug for ImmersionDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionDefinition")
            .field("name", &self.name)
            .field("chart", &self.chart)
            .field("exact_partials", &self.partials.is_some())
            .field("complex_structure", &self.complex_structure)
            .finish()
    }
}

impl ImmersionDefinition {
    pub fn new(name: impl Into<String>, chart: Chart, map: MapFn) -> Self {
        let dim = chart.dim();
        Self {
            name: name.into(),
            chart,
            map,
            partials: None,
            complex_structure: ComplexStructure::Constant(standard_complex_structure(dim)),
            allow_low_codimension: false,
        }
    }

    pub fn with_partials(mut self, partials: PartialsFn) -> Self {
        self.partials = Some(partials);
        self
    }

    pub fn with_complex_structure(mut self, j: ComplexStructure) -> Self {
        self.complex_structure = j;
        self
    }

    pub fn has_exact_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn domain_dim(&self) -> usize {
        self.chart.dim()
    }

    /// Complex dimension `n`.
    pub fn complex_dim(&self) -> usize {
        self.domain_dim() / 2
    }

    pub fn eval_map(&self, u: &[f64]) -> Result<AmbientVector> {
        self.chart.check(u)?;
        let p = (self.map)(u);
        if p.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::Evaluation { at: u.to_vec() });
        }
        Ok(p)
    }

    /// Coordinate partials at `u`; `steps` is only used without exact partials.
    pub fn eval_partials(&self, u: &[f64], steps: &Steps) -> Result<Vec<AmbientVector>> {
        self.chart.check(u)?;
        let d1 = match &self.partials {
            Some(p) => {
                let d1 = p(u);
                if d1.len() != self.domain_dim() {
                    return Err(GeometryError::DimensionMismatch {
                        expected: self.domain_dim(),
                        got: d1.len(),
                        context: "number of partials",
                    });
                }
                d1
            }
            None => (0..self.domain_dim())
                .map(|a| {
                    let flat = |v: &[f64]| self.eval_map(v).map(|p| p.as_slice().to_vec());
                    fd::central_fourth_order(flat, u, a, steps.0[a]).map(AmbientVector::from_vec)
                })
                .collect::<Result<_>>()?,
        };
        if d1.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(GeometryError::Evaluation { at: u.to_vec() });
        }
        Ok(d1)
    }

    /// `J` in chart coordinates at `u`; `metric` is the induced metric there.
    pub fn complex_structure_at(&self, u: &[f64], metric: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let dim = self.domain_dim();
        let j = match &self.complex_structure {
            ComplexStructure::Constant(m) => m.clone(),
            ComplexStructure::Field(f) => f(u),
            ComplexStructure::SurfaceRotation => {
                if dim != 2 {
                    return Err(GeometryError::InvalidArgument(
                        "surface rotation needs a 2-dimensional chart".into(),
                    ));
                }
                let (g11, g12, g22) = (metric[(0, 0)], metric[(0, 1)], metric[(1, 1)]);
                let s = (g11 * g22 - g12 * g12).sqrt();
                DMatrix::from_row_slice(2, 2, &[-g12 / s, -g22 / s, g11 / s, g12 / s])
            }
        };
        if j.nrows() != dim || j.ncols() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                got: j.nrows(),
                context: "complex structure matrix",
            });
        }
        Ok(j)
    }

    /// Load-time validation against a target: even dimension, proper
    /// codimension, matching flat dimension and on-manifold samples.
    pub fn validate(
        &self,
        ambient: &AmbientProduct,
        samples: &[Vec<f64>],
        tolerance: f64,
    ) -> Result<()> {
        let dim = self.domain_dim();
        if !dim.is_multiple_of(2) {
            return Err(GeometryError::InvalidArgument(format!(
                "domain dimension {dim} is odd"
            )));
        }
        if dim >= ambient.total_dim() && !self.allow_low_codimension {
            return Err(GeometryError::Codimension {
                domain_dim: dim,
                ambient_dim: ambient.total_dim(),
            });
        }
        for u in samples {
            let p = self.eval_map(u)?;
            if p.len() != ambient.flat_dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: ambient.flat_dim(),
                    got: p.len(),
                    context: "map output",
                });
            }
            ambient.require_on_manifold(&p, tolerance)?;
        }
        Ok(())
    }
}

/// Position, first partials and symmetric second partials at a chart point.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub point: AmbientVector,
    pub d1: Vec<AmbientVector>,
    d2: Vec<AmbientVector>,
    pub step_used: f64,
    pub error_estimate: f64,
}

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.d1.len()
    }

    fn packed(i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        b * (b + 1) / 2 + a
    }

    /// `d^2 f / du_i du_j`; symmetric by storage.
    pub fn d2(&self, i: usize, j: usize) -> &AmbientVector {
        &self.d2[Self::packed(i, j)]
    }
}

pub fn compute_jet(imm: &ImmersionDefinition, u: &[f64], steps: &Steps) -> Result<Jet2> {
    let dim = imm.domain_dim();
    if steps.0.len() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            got: steps.0.len(),
            context: "steps",
        });
    }
    let point = imm.eval_map(u)?;
    let d1 = imm.eval_partials(u, steps)?;
    let flat = point.len();
    let stacked = |v: &[f64]| -> Result<Vec<f64>> {
        Ok(imm
            .eval_partials(v, steps)?
            .iter()
            .flat_map(|d| d.iter().copied())
            .collect())
    };
    // dd[i][j] = d/du_i of d1[j]
    let mut dd: Vec<Vec<AmbientVector>> = Vec::with_capacity(dim);
    let mut error_estimate: f64 = 0.0;
    for i in 0..dim {
        let (d, err) = fd::central_richardson(stacked, u, i, steps.0[i])?;
        error_estimate = error_estimate.max(err);
        dd.push(
            d.chunks(flat)
                .map(AmbientVector::from_column_slice)
                .collect(),
        );
    }
    let mut d2 = Vec::with_capacity(dim * (dim + 1) / 2);
    for b in 0..dim {
        for a in 0..=b {
            d2.push((&dd[a][b] + &dd[b][a]) * 0.5);
        }
    }
    Ok(Jet2 {
        point,
        d1,
        d2,
        step_used: steps.max(),
        error_estimate,
    })
}

/// Gram matrix of the partials under the ambient form, unchecked.
pub fn metric_of(d1: &[AmbientVector], ambient: &AmbientProduct) -> DMatrix<f64> {
    let n = d1.len();
    DMatrix::from_fn(n, n, |i, k| ambient.inner(&d1[i], &d1[k]))
}

fn check_rank(g: &DMatrix<f64>) -> Result<()> {
    let eig = linalg::symmetric_eigenvalues(g);
    let (min_eig, max_eig) = (eig[0], eig[eig.len() - 1]);
    if !(max_eig > 0.0) || min_eig < RANK_TOL * max_eig {
        return Err(GeometryError::DegenerateImmersion { min_eig, max_eig });
    }
    Ok(())
}

/// Pullback metric `g_ik = <d_i f, d_k f>`.
pub fn induced_metric(jet: &Jet2, ambient: &AmbientProduct) -> Result<DMatrix<f64>> {
    let g = metric_of(&jet.d1, ambient);
    check_rank(&g)?;
    Ok(g)
}

/// Orthonormal tangent frame at a point, enough to split vectors of `T Q`
/// into tangent and normal parts.
#[derive(Debug, Clone)]
pub struct TangentSpace {
    pub point: AmbientVector,
    pub frame: Vec<AmbientVector>,
    /// Column `p` holds the coordinates of `frame[p]` in the partials basis.
    pub coord_to_frame: DMatrix<f64>,
}

impl TangentSpace {
    /// Modified Gram-Schmidt in input order with a re-orthogonalization pass.
    pub fn from_partials(
        point: AmbientVector,
        d1: &[AmbientVector],
        ambient: &AmbientProduct,
    ) -> Result<Self> {
        check_rank(&metric_of(d1, ambient))?;
        let dim = d1.len();
        let mut frame: Vec<AmbientVector> = Vec::with_capacity(dim);
        let mut coeff = DMatrix::<f64>::identity(dim, dim);
        for p in 0..dim {
            let mut v = d1[p].clone();
            for _pass in 0..2 {
                for q in 0..frame.len() {
                    let c = ambient.inner(&v, &frame[q]);
                    v.axpy(-c, &frame[q], 1.0);
                    let col_q = coeff.column(q).clone_owned();
                    let mut col_p = coeff.column_mut(p);
                    col_p.axpy(-c, &col_q, 1.0);
                }
            }
            let n2 = ambient.norm2(&v);
            if !(n2 > 0.0) {
                return Err(GeometryError::DegenerateImmersion {
                    min_eig: n2,
                    max_eig: 0.0,
                });
            }
            let n = n2.sqrt();
            v /= n;
            coeff.column_mut(p).scale_mut(1.0 / n);
            frame.push(v);
        }
        Ok(Self {
            point,
            frame,
            coord_to_frame: coeff,
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Frame components `<v, X_p>`.
    pub fn components(&self, v: &AmbientVector, ambient: &AmbientProduct) -> Vec<f64> {
        self.frame.iter().map(|x| ambient.inner(v, x)).collect()
    }

    pub fn tangent_part(&self, v: &AmbientVector, ambient: &AmbientProduct) -> AmbientVector {
        let mut out = AmbientVector::zeros(v.len());
        for x in &self.frame {
            out.axpy(ambient.inner(v, x), x, 1.0);
        }
        out
    }

    /// Projection onto the normal space of the immersion inside `T Q`.
    pub fn normal_part(&self, v: &AmbientVector, ambient: &AmbientProduct) -> AmbientVector {
        let mut out = ambient.tangent_project(&self.point, v);
        for x in &self.frame {
            let c = ambient.inner(&out, x);
            out.axpy(-c, x, 1.0);
        }
        out
    }
}

/// Orthonormal tangent and normal frames at a sample.
#[derive(Debug, Clone)]
pub struct FrameSample {
    pub tangent: TangentSpace,
    pub normal: Vec<AmbientVector>,
    /// Flat coordinate axes that seeded each normal vector, in order.
    pub normal_seeds: Vec<usize>,
}

impl FrameSample {
    pub fn tangent_frame(&self) -> &[AmbientVector] {
        &self.tangent.frame
    }

    pub fn coord_to_frame(&self) -> &DMatrix<f64> {
        &self.tangent.coord_to_frame
    }

    pub fn point(&self) -> &AmbientVector {
        &self.tangent.point
    }

    /// Same normal frame, tangent frame replaced by `X'_q = sum_p q[p,q] X_p`.
    pub fn remixed(&self, q: &DMatrix<f64>) -> Self {
        let dim = self.tangent.dim();
        let frame = (0..dim)
            .map(|c| {
                let mut v = AmbientVector::zeros(self.point().len());
                for p in 0..dim {
                    v.axpy(q[(p, c)], &self.tangent.frame[p], 1.0);
                }
                v
            })
            .collect();
        Self {
            tangent: TangentSpace {
                point: self.tangent.point.clone(),
                frame,
                coord_to_frame: &self.tangent.coord_to_frame * q,
            },
            normal: self.normal.clone(),
            normal_seeds: self.normal_seeds.clone(),
        }
    }
}

/// Tangent frame by Gram-Schmidt on the partials; normal frame by
/// Gram-Schmidt of the projected flat coordinate axes against the tangent frame.
pub fn build_frames(jet: &Jet2, ambient: &AmbientProduct) -> Result<FrameSample> {
    let tangent = TangentSpace::from_partials(jet.point.clone(), &jet.d1, ambient)?;
    let codim = ambient.total_dim().saturating_sub(tangent.dim());
    let candidates = projected_axes(&jet.point, ambient);
    let picked = linalg::gram_schmidt_select_indexed(candidates, &tangent.frame, codim, |a, b| {
        ambient.inner(a, b)
    });
    if picked.len() != codim {
        return Err(GeometryError::DegenerateImmersion {
            min_eig: 0.0,
            max_eig: 0.0,
        });
    }
    let (normal_seeds, normal): (Vec<usize>, Vec<AmbientVector>) = picked.into_iter().unzip();
    for v in &normal {
        let off = ambient.normal_component(&jet.point, v);
        if off > 1e-8 {
            return Err(GeometryError::NotTangent { component: off });
        }
    }
    Ok(FrameSample {
        tangent,
        normal,
        normal_seeds,
    })
}

fn projected_axes(point: &AmbientVector, ambient: &AmbientProduct) -> Vec<AmbientVector> {
    (0..ambient.flat_dim())
        .map(|k| {
            let mut e = AmbientVector::zeros(ambient.flat_dim());
            e[k] = 1.0;
            ambient.tangent_project(point, &e)
        })
        .collect()
}

/// Normal frame at a nearby point seeded by the same coordinate axes as
/// `reference`, with signs aligned to it. Fails if a propagated vector turns
/// by more than 60 degrees against its reference.
pub fn propagate_normal_frame(
    tangent: &TangentSpace,
    ambient: &AmbientProduct,
    reference: &FrameSample,
) -> Result<Vec<AmbientVector>> {
    let axes = projected_axes(&tangent.point, ambient);
    let seeds = reference
        .normal_seeds
        .iter()
        .map(|&k| axes[k].clone())
        .collect();
    let mut frame =
        linalg::gram_schmidt_in_order(seeds, &tangent.frame, |a, b| ambient.inner(a, b))
            .ok_or(GeometryError::FrameContinuity { ratio: 0.0 })?;
    for (v, r) in frame.iter_mut().zip(&reference.normal) {
        let c = ambient.inner(v, r);
        if c.abs() < 0.5 {
            return Err(GeometryError::FrameContinuity { ratio: c.abs() });
        }
        if c < 0.0 {
            *v = -v.clone();
        }
    }
    Ok(frame)
}
