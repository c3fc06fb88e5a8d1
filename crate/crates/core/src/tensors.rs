//! Second fundamental form, Weingarten operators, normal connection and the
//! product tensors `L, K, R = L^t L, S = K^t L, T = K^t K` (and tildes).

use nalgebra::DMatrix;

use crate::ambient::{AmbientProduct, AmbientVector, FactorKind};
use crate::error::{GeometryError, Result};
use crate::fd;
use crate::jetcalc::{self, FrameSample, ImmersionDefinition, Jet2, Steps, TangentSpace};
use crate::linalg;

/// Index into packed symmetric storage.
pub(crate) fn packed(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

/// Bilinear change of basis of a symmetric vector-valued form:
/// `out[p][q] = sum_ab m[a,p] m[b,q] form[a][b]`.
pub(crate) fn change_basis_sym(
    form: &[AmbientVector],
    m: &DMatrix<f64>,
    flat: usize,
) -> Vec<AmbientVector> {
    let dim = m.ncols();
    let mut out = Vec::with_capacity(dim * (dim + 1) / 2);
    for q in 0..dim {
        for p in 0..=q {
            let mut v = AmbientVector::zeros(flat);
            for a in 0..m.nrows() {
                for b in 0..m.nrows() {
                    let w = m[(a, p)] * m[(b, q)];
                    if w != 0.0 {
                        v.axpy(w, &form[packed(a, b)], 1.0);
                    }
                }
            }
            out.push(v);
        }
    }
    out
}

/// Extrinsic geometry at one sample.
#[derive(Debug, Clone)]
pub struct GeometrySample {
    dim: usize,
    /// `alpha(d_a, d_b)` over the coordinate basis, packed.
    coord_alpha: Vec<AmbientVector>,
    /// `alpha(X_p, X_q)` over the orthonormal tangent frame, packed.
    alpha: Vec<AmbientVector>,
    /// `A_xi` over the tangent frame, one per normal frame vector.
    pub weingarten: Vec<DMatrix<f64>>,
    pub mean_curvature: AmbientVector,
}

impl GeometrySample {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self, p: usize, q: usize) -> &AmbientVector {
        &self.alpha[packed(p, q)]
    }

    pub fn coord_alpha(&self, a: usize, b: usize) -> &AmbientVector {
        &self.coord_alpha[packed(a, b)]
    }

    /// `sum_{p,q} |alpha(X_p, X_q)|^2`.
    pub fn norm_alpha2(&self, ambient: &AmbientProduct) -> f64 {
        let mut s = 0.0;
        for p in 0..self.dim {
            for q in 0..self.dim {
                s += ambient.norm2(self.alpha(p, q));
            }
        }
        s
    }

    pub fn max_alpha_norm(&self, ambient: &AmbientProduct) -> f64 {
        self.alpha
            .iter()
            .map(|v| ambient.norm(v))
            .fold(0.0, f64::max)
    }

    /// `alpha(X_p, J X_q)` for `J` given as a frame matrix.
    pub fn alpha_j(&self, p: usize, q: usize, j: &DMatrix<f64>) -> AmbientVector {
        let mut v = AmbientVector::zeros(self.mean_curvature.len());
        for r in 0..self.dim {
            if j[(r, q)] != 0.0 {
                v.axpy(j[(r, q)], self.alpha(p, r), 1.0);
            }
        }
        v
    }
}

/// `alpha(d_a, d_b) = (d2_ab)^perp`, then frame components and `A_xi`, `H`.
pub fn second_fundamental_form(
    jet: &Jet2,
    frames: &FrameSample,
    ambient: &AmbientProduct,
) -> Result<GeometrySample> {
    let dim = jet.dim();
    if frames.tangent.dim() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            got: frames.tangent.dim(),
            context: "tangent frame",
        });
    }
    let flat = jet.point.len();
    let mut coord_alpha = Vec::with_capacity(dim * (dim + 1) / 2);
    for b in 0..dim {
        for a in 0..=b {
            coord_alpha.push(frames.tangent.normal_part(jet.d2(a, b), ambient));
        }
    }
    let alpha = change_basis_sym(&coord_alpha, frames.coord_to_frame(), flat);
    let weingarten = frames
        .normal
        .iter()
        .map(|xi| DMatrix::from_fn(dim, dim, |p, q| ambient.inner(&alpha[packed(p, q)], xi)))
        .collect();
    let mut mean_curvature = AmbientVector::zeros(flat);
    for p in 0..dim {
        mean_curvature += &alpha[packed(p, p)];
    }
    mean_curvature /= dim as f64;
    Ok(GeometrySample {
        dim,
        coord_alpha,
        alpha,
        weingarten,
        mean_curvature,
    })
}

/// `|H|`.
pub fn minimality_residual(gs: &GeometrySample, ambient: &AmbientProduct) -> f64 {
    ambient.norm(&gs.mean_curvature)
}

/// `L, K, R, S, T`, their tilde counterparts and the scalars built from `R`
/// and `J`, all over the sample's tangent and normal frames.
#[derive(Debug, Clone)]
pub struct ProductTensors {
    /// `n2 x 2n`: rows index an orthonormal basis of `T Q^{n2}`.
    pub l: DMatrix<f64>,
    /// `n2 x (m - 2n)`.
    pub k: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// `(m - 2n) x 2n`: column `p` holds the normal components of `S X_p`.
    pub s: DMatrix<f64>,
    pub t: DMatrix<f64>,
    pub l_tilde: DMatrix<f64>,
    pub k_tilde: DMatrix<f64>,
    pub r_tilde: DMatrix<f64>,
    pub s_tilde: DMatrix<f64>,
    pub t_tilde: DMatrix<f64>,
    /// `J` over the tangent frame.
    pub j: DMatrix<f64>,
    pub trace_r: f64,
    pub norm_r2: f64,
    /// `<RJ, JR> = trace((RJ)^t JR)`.
    pub rjjr: f64,
}

impl ProductTensors {
    pub fn complex_dim(&self) -> usize {
        self.r.nrows() / 2
    }

    pub fn eigen_r(&self) -> Vec<f64> {
        linalg::symmetric_eigenvalues(&self.r)
    }

    pub fn eigen_t(&self) -> Vec<f64> {
        if self.t.nrows() == 0 {
            return Vec::new();
        }
        linalg::symmetric_eigenvalues(&self.t)
    }

    /// `|R + R~ - Id|_max`.
    pub fn complement_residual(&self) -> f64 {
        let n = self.r.nrows();
        linalg::max_abs(&(&self.r + &self.r_tilde - DMatrix::identity(n, n)))
    }

    /// `| |L|^2 - tr R |`.
    pub fn trace_l_residual(&self) -> f64 {
        (self.l.norm_squared() - self.trace_r).abs()
    }
}

fn block_matrices(
    frames: &FrameSample,
    basis: &[AmbientVector],
    ambient: &AmbientProduct,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let tangent = frames.tangent_frame();
    let l = DMatrix::from_fn(basis.len(), tangent.len(), |r, p| {
        ambient.inner(&tangent[p], &basis[r])
    });
    let k = DMatrix::from_fn(basis.len(), frames.normal.len(), |r, a| {
        ambient.inner(&frames.normal[a], &basis[r])
    });
    (l, k)
}

/// Evaluates the product tensors with `j` the complex structure over the
/// tangent frame of `frames`.
pub fn product_tensors(
    frames: &FrameSample,
    j: &DMatrix<f64>,
    ambient: &AmbientProduct,
) -> Result<ProductTensors> {
    let dim = frames.tangent.dim();
    if j.nrows() != dim || j.ncols() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            got: j.nrows(),
            context: "frame complex structure",
        });
    }
    let p = frames.point();
    let (l, k) = block_matrices(frames, &ambient.factor_tangent_basis(p, 2), ambient);
    let (l_tilde, k_tilde) = block_matrices(frames, &ambient.factor_tangent_basis(p, 1), ambient);
    let r = l.transpose() * &l;
    let r_tilde = l_tilde.transpose() * &l_tilde;
    let trace_r = r.trace();
    let norm_r2 = r.norm_squared();
    let rjjr = linalg::frobenius(&(&r * j), &(j * &r));
    Ok(ProductTensors {
        s: k.transpose() * &l,
        t: k.transpose() * &k,
        s_tilde: k_tilde.transpose() * &l_tilde,
        t_tilde: k_tilde.transpose() * &k_tilde,
        l,
        k,
        r,
        l_tilde,
        k_tilde,
        r_tilde,
        j: j.clone(),
        trace_r,
        norm_r2,
        rjjr,
    })
}

/// `|d_t^T|^2` for a `Q x R` target, which equals `tr R`.
pub fn vertical_projection_norm(pt: &ProductTensors, ambient: &AmbientProduct) -> Result<f64> {
    let f2 = ambient.factor2;
    if f2.kind() != FactorKind::Euclidean || f2.dim() != 1 {
        return Err(GeometryError::WrongTarget(
            "vertical projection needs a Euclidean line as second factor".into(),
        ));
    }
    Ok(pt.trace_r)
}

/// Covariant derivatives of a propagated normal frame along the coordinate
/// axes at the centre sample.
#[derive(Debug, Clone)]
pub struct NormalConnection {
    /// `derivatives[a][k] = nabla^perp_{d_a} xi_k`.
    pub derivatives: Vec<Vec<AmbientVector>>,
    /// `coefficients[a][(l, k)] = <nabla^perp_{d_a} xi_k, xi_l>`.
    pub coefficients: Vec<DMatrix<f64>>,
    pub error_estimate: f64,
}

impl NormalConnection {
    /// Largest `|w_a(k,l) + w_a(l,k)|`; zero for a metric connection.
    pub fn skew_residual(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|w| linalg::max_abs(&(w + w.transpose())))
            .fold(0.0, f64::max)
    }
}

/// Normal connection at `u`, with the normal frame at nearby points seeded
/// like `centre` and sign-aligned to it.
pub fn normal_connection(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
    centre: &FrameSample,
) -> Result<NormalConnection> {
    let rank = centre.normal.len();
    let flat = ambient.flat_dim();
    let field = |v: &[f64]| -> Result<Vec<f64>> {
        let point = imm.eval_map(v)?;
        let d1 = imm.eval_partials(v, steps)?;
        let tangent = TangentSpace::from_partials(point, &d1, ambient)?;
        let frame = jetcalc::propagate_normal_frame(&tangent, ambient, centre)?;
        Ok(frame.iter().flat_map(|x| x.iter().copied()).collect())
    };
    let mut derivatives = Vec::with_capacity(u.len());
    let mut coefficients = Vec::with_capacity(u.len());
    let mut error_estimate: f64 = 0.0;
    for axis in 0..u.len() {
        let (d, err) = fd::central_richardson(field, u, axis, steps.0[axis])?;
        error_estimate = error_estimate.max(err);
        let dk: Vec<AmbientVector> = d
            .chunks(flat)
            .take(rank)
            .map(|c| {
                centre
                    .tangent
                    .normal_part(&AmbientVector::from_column_slice(c), ambient)
            })
            .collect();
        coefficients.push(DMatrix::from_fn(rank, rank, |l, k| {
            ambient.inner(&dk[k], &centre.normal[l])
        }));
        derivatives.push(dk);
    }
    Ok(NormalConnection {
        derivatives,
        coefficients,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::{build_frames, compute_jet, Chart, ImmersionDefinition};
    use nalgebra::dvector;
    use std::f64::consts::FRAC_1_SQRT_2;
    use std::sync::Arc;

    fn clifford() -> (ImmersionDefinition, AmbientProduct) {
        let s = FRAC_1_SQRT_2;
        let imm = ImmersionDefinition::new(
            "clifford",
            Chart::new(&[(0.0, 6.0), (0.0, 6.0)]).unwrap(),
            Arc::new(move |u: &[f64]| {
                dvector![
                    s * u[0].cos(),
                    s * u[0].sin(),
                    s * u[1].cos(),
                    s * u[1].sin(),
                    0.0
                ]
            }),
        )
        .with_partials(Arc::new(move |u: &[f64]| {
            vec![
                dvector![-s * u[0].sin(), s * u[0].cos(), 0.0, 0.0, 0.0],
                dvector![0.0, 0.0, -s * u[1].sin(), s * u[1].cos(), 0.0],
            ]
        }));
        (imm, AmbientProduct::from_parts(1.0, 3, 0.0, 1).unwrap())
    }

    fn cylinder() -> (ImmersionDefinition, AmbientProduct) {
        let imm = ImmersionDefinition::new(
            "cylinder",
            Chart::new(&[(0.0, 6.0), (-1.0, 1.0)]).unwrap(),
            Arc::new(|u: &[f64]| dvector![u[0].cos(), u[0].sin(), 0.0, u[1]]),
        )
        .with_partials(Arc::new(|u: &[f64]| {
            vec![
                dvector![-u[0].sin(), u[0].cos(), 0.0, 0.0],
                dvector![0.0, 0.0, 0.0, 1.0],
            ]
        }));
        (imm, AmbientProduct::from_parts(1.0, 2, 0.0, 1).unwrap())
    }

    fn sample(
        imm: &ImmersionDefinition,
        ambient: &AmbientProduct,
        u: &[f64],
    ) -> (FrameSample, GeometrySample) {
        let jet = compute_jet(imm, u, &Steps::scaled(&imm.chart, 1e-3)).unwrap();
        let frames = build_frames(&jet, ambient).unwrap();
        let gs = second_fundamental_form(&jet, &frames, ambient).unwrap();
        (frames, gs)
    }

    #[test]
    fn clifford_shape_operator() {
        let (imm, a) = clifford();
        let (frames, gs) = sample(&imm, &a, &[0.7, 2.1]);
        assert!(minimality_residual(&gs, &a) < 1e-7);
        // one normal is the S^3 normal, the other the R direction
        let mut eigs: Vec<Vec<f64>> = gs
            .weingarten
            .iter()
            .map(linalg::symmetric_eigenvalues)
            .collect();
        eigs.sort_by(|x, y| x[1].abs().total_cmp(&y[1].abs()));
        assert!(eigs[0].iter().all(|e| e.abs() < 1e-7));
        assert!((eigs[1][0] + 1.0).abs() < 1e-7 && (eigs[1][1] - 1.0).abs() < 1e-7);
        for (xi, w) in frames.normal.iter().zip(&gs.weingarten) {
            for p in 0..2 {
                for q in 0..2 {
                    assert!((w[(p, q)] - w[(q, p)]).abs() < 1e-12);
                    assert!((w[(p, q)] - a.inner(gs.alpha(p, q), xi)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cylinder_tensors() {
        let (imm, a) = cylinder();
        let (frames, gs) = sample(&imm, &a, &[1.3, 0.2]);
        assert!(gs.max_alpha_norm(&a) < 1e-7);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let pt = product_tensors(&frames, &j, &a).unwrap();
        assert!((pt.r[(0, 0)]).abs() < 1e-12 && (pt.r[(1, 1)] - 1.0).abs() < 1e-12);
        assert!((pt.trace_r - 1.0).abs() < 1e-12);
        assert!((vertical_projection_norm(&pt, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(pt.complement_residual() < 1e-12);
        assert!(pt.trace_l_residual() < 1e-12);
    }

    #[test]
    fn vertical_projection_rejects_curved_second_factor() {
        let (imm, _) = clifford();
        let a = AmbientProduct::from_parts(1.0, 3, 0.0, 2).unwrap();
        let s = FRAC_1_SQRT_2;
        let imm = ImmersionDefinition::new(
            "c",
            imm.chart.clone(),
            Arc::new(move |u: &[f64]| {
                dvector![
                    s * u[0].cos(),
                    s * u[0].sin(),
                    s * u[1].cos(),
                    s * u[1].sin(),
                    0.0,
                    0.0
                ]
            }),
        );
        let (frames, _) = sample(&imm, &a, &[1.0, 1.0]);
        let pt = product_tensors(
            &frames,
            &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            &a,
        )
        .unwrap();
        assert!(vertical_projection_norm(&pt, &a).is_err());
    }

    #[test]
    fn clifford_normal_bundle_is_flat() {
        let (imm, a) = clifford();
        let u = [0.7, 2.1];
        let (frames, _) = sample(&imm, &a, &u);
        let nc =
            normal_connection(&imm, &u, &Steps::scaled(&imm.chart, 1e-3), &a, &frames).unwrap();
        for per_axis in &nc.derivatives {
            for v in per_axis {
                assert!(a.norm(v) < 1e-8, "{}", a.norm(v));
            }
        }
        assert!(nc.skew_residual() < 1e-9);
    }
}
