//! Everything the checks need at one chart point, computed once.

use nalgebra::DMatrix;

use crate::ambient::AmbientProduct;
use crate::checks::equations::{covariant_alpha, ricci_eq_residual, CovariantAlpha};
use crate::error::{GeometryError, Result};
use crate::jetcalc::{
    build_frames, compute_jet, induced_metric, FrameSample, ImmersionDefinition, Jet2, Steps,
};
use crate::kahler::{self, CurvaturePackage, KahlerResiduals};
use crate::tensors::{self, GeometrySample, NormalConnection, ProductTensors};

/// Numerical tolerances shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities between quantities computed at one sample.
    pub algebraic: f64,
    /// Identities involving stacked finite differences.
    pub fd: f64,
    /// Thresholds that decide a label (pluriharmonic, parallel, equality).
    pub classifier: f64,
    /// Eigenvalue bounds on `R` and `T`.
    pub spectral: f64,
    /// `R + R~ = Id`.
    pub complement: f64,
    pub on_manifold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-6,
            fd: 1e-4,
            classifier: 1e-5,
            spectral: 1e-8,
            complement: 1e-9,
            on_manifold: crate::ambient::ON_MANIFOLD_TOL,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("algebraic", self.algebraic),
            ("fd", self.fd),
            ("classifier", self.classifier),
            ("spectral", self.spectral),
            ("complement", self.complement),
            ("on_manifold", self.on_manifold),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GeometryError::InvalidArgument(format!(
                    "tolerance `{name}` must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Optional, more expensive per-sample computations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Needs {
    pub kahler_parallel: bool,
    pub intrinsic: bool,
    pub covariant_alpha: bool,
    pub ricci_equation: bool,
    pub normal_connection: bool,
}

impl Needs {
    pub fn all() -> Self {
        Self {
            kahler_parallel: true,
            intrinsic: true,
            covariant_alpha: true,
            ricci_equation: true,
            normal_connection: true,
        }
    }

    pub fn union(self, o: Self) -> Self {
        Self {
            kahler_parallel: self.kahler_parallel || o.kahler_parallel,
            intrinsic: self.intrinsic || o.intrinsic,
            covariant_alpha: self.covariant_alpha || o.covariant_alpha,
            ricci_equation: self.ricci_equation || o.ricci_equation,
            normal_connection: self.normal_connection || o.normal_connection,
        }
    }
}

/// Result slot for an optional computation.
#[derive(Debug, Clone)]
pub enum Lazy<T> {
    Skipped,
    Done(T),
    Failed(GeometryError),
}

impl<T> Lazy<T> {
    fn run(wanted: bool, f: impl FnOnce() -> Result<T>) -> Self {
        if !wanted {
            return Self::Skipped;
        }
        match f() {
            Ok(v) => Self::Done(v),
            Err(e) => Self::Failed(e),
        }
    }

    /// The value, or a note explaining its absence.
    pub fn get(&self) -> std::result::Result<&T, String> {
        match self {
            Self::Done(v) => Ok(v),
            Self::Skipped => Err("not computed".into()),
            Self::Failed(e) => Err(e.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleContext {
    pub u: Vec<f64>,
    pub jet: Jet2,
    /// `J`-adapted when `adapted` is set, otherwise the Gram-Schmidt frame.
    pub frames: FrameSample,
    pub metric: DMatrix<f64>,
    /// `J` over `frames`.
    pub j_frame: DMatrix<f64>,
    pub adapted: bool,
    pub kahler: KahlerResiduals,
    pub kahler_parallel: Lazy<f64>,
    pub gs: GeometrySample,
    pub pt: ProductTensors,
    pub gauss: CurvaturePackage,
    pub intrinsic: Lazy<CurvaturePackage>,
    pub covariant_alpha: Lazy<CovariantAlpha>,
    pub ricci_equation: Lazy<f64>,
    pub normal_connection: Lazy<NormalConnection>,
}

impl SampleContext {
    pub fn complex_dim(&self) -> usize {
        self.jet.dim() / 2
    }

    pub fn mean_curvature(&self, ambient: &AmbientProduct) -> f64 {
        tensors::minimality_residual(&self.gs, ambient)
    }

    pub fn is_minimal(&self, ambient: &AmbientProduct, tol: &Tolerances) -> bool {
        self.mean_curvature(ambient) <= tol.algebraic
    }

    /// `J^2 = -Id`, orthogonal, parallel, and an adapted frame was built.
    pub fn kahler_certified(&self, tol: &Tolerances) -> bool {
        let algebraic = self.adapted
            && self.kahler.square <= tol.algebraic
            && self.kahler.ortho <= tol.algebraic;
        match &self.kahler_parallel {
            Lazy::Done(p) => algebraic && *p <= tol.fd,
            Lazy::Skipped => algebraic,
            Lazy::Failed(_) => false,
        }
    }
}

/// Evaluates a sample: jet, frames (`J`-adapted when possible), extrinsic
/// and product tensors, Gauss-route curvature, and whatever `needs` asks for.
pub fn evaluate_sample(
    imm: &ImmersionDefinition,
    ambient: &AmbientProduct,
    u: &[f64],
    steps: &Steps,
    tol: &Tolerances,
    needs: Needs,
) -> Result<SampleContext> {
    let jet = compute_jet(imm, u, steps)?;
    let metric = induced_metric(&jet, ambient)?;
    let base = build_frames(&jet, ambient)?;
    let j_coord = imm.complex_structure_at(u, &metric)?;
    let j_base = kahler::j_in_frame(&j_coord, base.coord_to_frame())?;
    let (frames, adapted) = match kahler::adapted_frame(&base, &j_base, tol.algebraic) {
        Ok((f, _)) => (f, true),
        Err(_) => (base, false),
    };
    let j_frame = kahler::j_in_frame(&j_coord, frames.coord_to_frame())?;
    let kahler = KahlerResiduals {
        square: kahler::square_residual(&j_frame),
        ortho: kahler::ortho_residual(&j_frame),
        parallel: f64::NAN,
    };
    let kahler_parallel = Lazy::run(needs.kahler_parallel, || {
        kahler::kahler_residuals_at(imm, u, steps, ambient).map(|k| k.parallel)
    });
    let gs = tensors::second_fundamental_form(&jet, &frames, ambient)?;
    let pt = tensors::product_tensors(&frames, &j_frame, ambient)?;
    let gauss = kahler::ricci_via_gauss(&gs, &pt, ambient);
    let intrinsic = Lazy::run(needs.intrinsic, || {
        kahler::intrinsic_curvature_fd(imm, u, steps, ambient, frames.coord_to_frame())
    });
    let covariant_alpha = Lazy::run(needs.covariant_alpha, || {
        covariant_alpha(imm, u, steps, ambient, &frames)
    });
    let ricci_equation = Lazy::run(needs.ricci_equation, || {
        ricci_eq_residual(imm, u, steps, ambient, &frames, &gs, &pt)
    });
    let normal_connection = Lazy::run(needs.normal_connection, || {
        tensors::normal_connection(imm, u, steps, ambient, &frames)
    });
    Ok(SampleContext {
        u: u.to_vec(),
        jet,
        frames,
        metric,
        j_frame,
        adapted,
        kahler,
        kahler_parallel,
        gs,
        pt,
        gauss,
        intrinsic,
        covariant_alpha,
        ricci_equation,
        normal_connection,
    })
}
