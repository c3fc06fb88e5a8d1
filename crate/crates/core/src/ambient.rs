//! Products of two space forms realized inside a flat coordinate space.
//!
//! A factor of curvature `c != 0` is the level set `<x, x> = 1/c`; for `c < 0`
//! the form is Lorentzian with the timelike axis first and points live on the
//! upper sheet (`x_0 > 0`). Euclidean factors use the identity embedding.
//! With this realization the Levi-Civita connection of the product is the flat
//! derivative followed by [`AmbientProduct::tangent_project`].

use nalgebra::DVector;

use crate::error::{GeometryError, Result};

/// Coordinates of a point or vector in the flat space containing the product.
/// The first `factor1.embed_dim()` entries are the first block.
pub type AmbientVector = DVector<f64>;

/// Default absolute tolerance on the constraint residual.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Spherical,
    Euclidean,
    Hyperbolic,
}

/// Simply connected space form of constant curvature `curvature` and dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceFormFactor {
    curvature: f64,
    dim: usize,
}

impl SpaceFormFactor {
    pub fn new(curvature: f64, dim: usize) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(GeometryError::InvalidFactor(format!(
                "curvature must be finite, got {curvature}"
            )));
        }
        if dim == 0 {
            return Err(GeometryError::InvalidFactor(
                "dimension must be positive".into(),
            ));
        }
        Ok(Self { curvature, dim })
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FactorKind {
        if self.curvature > 0.0 {
            FactorKind::Spherical
        } else if self.curvature < 0.0 {
            FactorKind::Hyperbolic
        } else {
            FactorKind::Euclidean
        }
    }

    pub fn is_curved(&self) -> bool {
        self.curvature != 0.0
    }

    pub fn embed_dim(&self) -> usize {
        if self.is_curved() {
            self.dim + 1
        } else {
            self.dim
        }
    }

    /// Signature form of the embedding space: Lorentzian `(-,+,...,+)` for
    /// hyperbolic factors, Euclidean otherwise.
    pub fn form(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        if self.kind() == FactorKind::Hyperbolic {
            dot - 2.0 * a[0] * b[0]
        } else {
            dot
        }
    }

    /// `|<x,x> - 1/c|`, zero for Euclidean factors; infinite on the lower
    /// sheet of a hyperboloid.
    pub fn constraint_residual(&self, x: &[f64]) -> f64 {
        if !self.is_curved() {
            return 0.0;
        }
        if self.kind() == FactorKind::Hyperbolic && x[0] <= 0.0 {
            return f64::INFINITY;
        }
        (self.form(x, x) - 1.0 / self.curvature).abs()
    }

    /// `v - c <v, x> x` in place.
    fn project_in_place(&self, x: &[f64], v: &mut [f64]) {
        if !self.is_curved() {
            return;
        }
        let s = self.curvature * self.form(v, x);
        for (vi, xi) in v.iter_mut().zip(x) {
            *vi -= s * xi;
        }
    }
}

/// The Riemannian product `Q^{n1}_{c1} x Q^{n2}_{c2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientProduct {
    pub factor1: SpaceFormFactor,
    pub factor2: SpaceFormFactor,
}

impl AmbientProduct {
    pub fn new(factor1: SpaceFormFactor, factor2: SpaceFormFactor) -> Self {
        Self { factor1, factor2 }
    }

    /// Shorthand for `Q^{n1}_{c1} x Q^{n2}_{c2}`.
    pub fn from_parts(c1: f64, n1: usize, c2: f64, n2: usize) -> Result<Self> {
        Ok(Self::new(
            SpaceFormFactor::new(c1, n1)?,
            SpaceFormFactor::new(c2, n2)?,
        ))
    }

    pub fn c1(&self) -> f64 {
        self.factor1.curvature()
    }

    pub fn c2(&self) -> f64 {
        self.factor2.curvature()
    }

    /// `m = n1 + n2`.
    pub fn total_dim(&self) -> usize {
        self.factor1.dim() + self.factor2.dim()
    }

    pub fn flat_dim(&self) -> usize {
        self.factor1.embed_dim() + self.factor2.embed_dim()
    }

    /// Index where the second block starts.
    pub fn split(&self) -> usize {
        self.factor1.embed_dim()
    }

    fn check_len(&self, v: &AmbientVector) -> Result<()> {
        if v.len() != self.flat_dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.flat_dim(),
                got: v.len(),
                context: "ambient vector",
            });
        }
        Ok(())
    }

    /// Product form: signature form on each block, summed.
    pub fn inner(&self, a: &AmbientVector, b: &AmbientVector) -> f64 {
        let s = self.split();
        let (a, b) = (a.as_slice(), b.as_slice());
        self.factor1.form(&a[..s], &b[..s]) + self.factor2.form(&a[s..], &b[s..])
    }

    pub fn norm2(&self, a: &AmbientVector) -> f64 {
        self.inner(a, a)
    }

    pub fn norm(&self, a: &AmbientVector) -> f64 {
        self.norm2(a).max(0.0).sqrt()
    }

    /// Max over curved factors of `|<x_i,x_i> - 1/c_i|`.
    pub fn on_manifold_residual(&self, p: &AmbientVector) -> f64 {
        let s = self.split();
        let p = p.as_slice();
        self.factor1
            .constraint_residual(&p[..s])
            .max(self.factor2.constraint_residual(&p[s..]))
    }

    /// Orthogonal projection onto `T_p Q^m`, without checking that `p` is on
    /// the manifold.
    pub fn tangent_project(&self, p: &AmbientVector, v: &AmbientVector) -> AmbientVector {
        let s = self.split();
        let mut out = v.clone();
        {
            let (o1, o2) = out.as_mut_slice().split_at_mut(s);
            self.factor1.project_in_place(&p.as_slice()[..s], o1);
            self.factor2.project_in_place(&p.as_slice()[s..], o2);
        }
        out
    }

    /// Checked projection onto `T_p Q^m`.
    pub fn tangent_project_q(&self, p: &AmbientVector, v: &AmbientVector) -> Result<AmbientVector> {
        self.check_len(p)?;
        self.check_len(v)?;
        self.require_on_manifold(p, ON_MANIFOLD_TOL)?;
        Ok(self.tangent_project(p, v))
    }

    pub fn require_on_manifold(&self, p: &AmbientVector, tolerance: f64) -> Result<()> {
        let residual = self.on_manifold_residual(p);
        if residual > tolerance || residual.is_nan() {
            return Err(GeometryError::OffManifold {
                residual,
                tolerance,
            });
        }
        Ok(())
    }

    /// Largest `|<v_i, x_i>| * sqrt|c_i|` over curved factors, i.e. the
    /// component of `v` along the unit position normals.
    pub fn normal_component(&self, p: &AmbientVector, v: &AmbientVector) -> f64 {
        let s = self.split();
        let (p, v) = (p.as_slice(), v.as_slice());
        let mut worst: f64 = 0.0;
        for (f, range) in [(self.factor1, 0..s), (self.factor2, s..p.len())] {
            if f.is_curved() {
                let comp = f.form(&v[range.clone()], &p[range]) * f.curvature().abs().sqrt();
                worst = worst.max(comp.abs());
            }
        }
        worst
    }

    /// Levi-Civita derivative of a tangent field `Y` along `X` at `p`, given
    /// the flat directional derivative `dy = D_X Y`.
    pub fn ambient_covariant_derivative(
        &self,
        p: &AmbientVector,
        x: &AmbientVector,
        y: &AmbientVector,
        dy: &AmbientVector,
    ) -> Result<AmbientVector> {
        self.check_len(x)?;
        self.check_len(y)?;
        for v in [x, y] {
            let component = self.normal_component(p, v);
            if component > ON_MANIFOLD_TOL * (1.0 + v.amax()) {
                return Err(GeometryError::NotTangent { component });
            }
        }
        self.tangent_project_q(p, dy)
    }

    /// `(d pi_1 v, d pi_2 v)` as full-length vectors with the other block zeroed.
    pub fn dpi_split(&self, v: &AmbientVector) -> (AmbientVector, AmbientVector) {
        let s = self.split();
        let mut first = v.clone();
        let mut second = v.clone();
        first.as_mut_slice()[s..].fill(0.0);
        second.as_mut_slice()[..s].fill(0.0);
        (first, second)
    }

    /// Orthonormal basis of `T Q^{n2}` at the second block of `p`, embedded
    /// as full-length vectors. Gram-Schmidt on the projected coordinate axes.
    pub fn factor_tangent_basis(&self, p: &AmbientVector, which: usize) -> Vec<AmbientVector> {
        let s = self.split();
        let (range, dim) = if which == 1 {
            (0..s, self.factor1.dim())
        } else {
            (s..self.flat_dim(), self.factor2.dim())
        };
        let candidates = range.map(|k| {
            let mut e = AmbientVector::zeros(self.flat_dim());
            e[k] = 1.0;
            self.tangent_project(p, &e)
        });
        crate::linalg::gram_schmidt_select(candidates.collect(), &[], dim, |a, b| self.inner(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn sphere_only() -> AmbientProduct {
        AmbientProduct::from_parts(1.0, 2, 0.0, 1).unwrap()
    }

    #[test]
    fn residual_examples() {
        let a = sphere_only();
        assert_eq!(a.on_manifold_residual(&dvector![1.0, 0.0, 0.0, 5.0]), 0.0);
        assert_eq!(a.on_manifold_residual(&dvector![2.0, 0.0, 0.0, 5.0]), 3.0);
        let h = AmbientProduct::from_parts(-1.0, 2, 0.0, 1).unwrap();
        assert_eq!(h.on_manifold_residual(&dvector![1.0, 0.0, 0.0, 0.0]), 0.0);
        assert!(h
            .on_manifold_residual(&dvector![-1.0, 0.0, 0.0, 0.0])
            .is_infinite());
    }

    #[test]
    fn projection_examples() {
        let a = sphere_only();
        let p = dvector![1.0, 0.0, 0.0, 0.0];
        let pr = |v: AmbientVector| a.tangent_project_q(&p, &v).unwrap();
        assert_eq!(
            pr(dvector![0.0, 1.0, 0.0, 0.0]),
            dvector![0.0, 1.0, 0.0, 0.0]
        );
        assert_eq!(
            pr(dvector![1.0, 0.0, 0.0, 0.0]),
            dvector![0.0, 0.0, 0.0, 0.0]
        );
        // explicit projector I - p p^T on the first block
        let v = dvector![3.0, 4.0, 0.0, 2.0];
        let x = nalgebra::Vector3::new(1.0, 0.0, 0.0);
        let proj = nalgebra::Matrix3::identity() - x * x.transpose();
        let expect = proj * nalgebra::Vector3::new(3.0, 4.0, 0.0);
        let got = pr(v);
        assert_eq!(got, dvector![expect[0], expect[1], expect[2], 2.0]);
        assert_eq!(got, dvector![0.0, 4.0, 0.0, 2.0]);
    }

    #[test]
    fn off_manifold_rejected() {
        let a = sphere_only();
        let err = a.tangent_project_q(&dvector![2.0, 0.0, 0.0, 0.0], &dvector![0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(err, Err(GeometryError::OffManifold { .. })));
    }

    #[test]
    fn great_circle_has_zero_covariant_acceleration() {
        let a = sphere_only();
        let s: f64 = 0.7;
        let p = dvector![s.cos(), s.sin(), 0.0, 0.0];
        let vel = dvector![-s.sin(), s.cos(), 0.0, 0.0];
        let acc = dvector![-s.cos(), -s.sin(), 0.0, 0.0];
        let cov = a
            .ambient_covariant_derivative(&p, &vel, &vel, &acc)
            .unwrap();
        assert!(cov.amax() < 1e-15);
    }

    #[test]
    fn latitude_circle_geodesic_curvature() {
        // colatitude pi/4, unit angular speed: |acc| = cot(theta) sin^2(theta) = 1/2
        let a = sphere_only();
        let th = std::f64::consts::FRAC_PI_4;
        let s: f64 = 0.3;
        let p = dvector![th.sin() * s.cos(), th.sin() * s.sin(), th.cos(), 0.0];
        let vel = dvector![-th.sin() * s.sin(), th.sin() * s.cos(), 0.0, 0.0];
        let acc = dvector![-th.sin() * s.cos(), -th.sin() * s.sin(), 0.0, 0.0];
        let cov = a
            .ambient_covariant_derivative(&p, &vel, &vel, &acc)
            .unwrap();
        let expect = (1.0 / th.tan()) * th.sin().powi(2);
        assert!((a.norm(&cov) - expect).abs() < 1e-14);
        assert!((a.norm(&cov) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn euclidean_factor_passes_through() {
        let a = AmbientProduct::from_parts(0.0, 2, 0.0, 1).unwrap();
        let p = dvector![0.3, 0.1, 2.0];
        let dy = dvector![1.0, -2.0, 0.5];
        let x = dvector![1.0, 0.0, 0.0];
        assert_eq!(a.ambient_covariant_derivative(&p, &x, &x, &dy).unwrap(), dy);
    }

    #[test]
    fn non_tangent_rejected() {
        let a = sphere_only();
        let p = dvector![1.0, 0.0, 0.0, 0.0];
        let radial = dvector![1.0, 0.0, 0.0, 0.0];
        let err = a.ambient_covariant_derivative(&p, &radial, &radial, &radial);
        assert!(matches!(err, Err(GeometryError::NotTangent { .. })));
    }

    #[test]
    fn dpi_split_examples() {
        let a = AmbientProduct::from_parts(1.0, 2, 1.0, 2).unwrap();
        let v = dvector![1.0, 2.0, 3.0, 0.0, 0.0, 0.0];
        let (v1, v2) = a.dpi_split(&v);
        assert_eq!(v1, v);
        assert_eq!(v2, AmbientVector::zeros(6));
        let z = AmbientVector::zeros(6);
        assert_eq!(a.dpi_split(&z), (z.clone(), z));
    }

    #[test]
    fn kind_and_dims() {
        let a = AmbientProduct::from_parts(-0.5, 3, 0.0, 2).unwrap();
        assert_eq!(a.factor1.kind(), FactorKind::Hyperbolic);
        assert_eq!(a.factor2.kind(), FactorKind::Euclidean);
        assert_eq!(a.total_dim(), 5);
        assert_eq!(a.flat_dim(), 6);
        assert!(SpaceFormFactor::new(1.0, 0).is_err());
    }
}
