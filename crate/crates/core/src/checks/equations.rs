//! Third-order data: `∇⊥α`, the Codazzi equation and the Ricci equation.
//!
//! `α` is differenced as a field of normal vectors over the coordinate
//! basis, which needs no normal-frame gauge. The Ricci equation extends each
//! normal vector `ξ` by `η(u') = (ξ)^⊥` at nearby points; the curvature
//! operator is tensorial so any extension with `η(u) = ξ` gives the same value.

use nalgebra::DMatrix;

use crate::ambient::{AmbientProduct, AmbientVector};
use crate::error::Result;
use crate::fd;
use crate::jetcalc::{compute_jet, FrameSample, ImmersionDefinition, Jet2, Steps, TangentSpace};
use crate::tensors::{packed, GeometrySample, ProductTensors};

/// `(∇⊥_{X_p} α)(X_q, X_r)` over the sample frame, plus the coordinate version.
#[derive(Debug, Clone)]
pub struct CovariantAlpha {
    dim: usize,
    coord: Vec<AmbientVector>,
    frame: Vec<AmbientVector>,
    pub error_estimate: f64,
}

impl CovariantAlpha {
    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dim + b) * self.dim + c
    }

    pub fn frame(&self, p: usize, q: usize, r: usize) -> &AmbientVector {
        &self.frame[self.idx(p, q, r)]
    }

    pub fn coord(&self, a: usize, b: usize, c: usize) -> &AmbientVector {
        &self.coord[self.idx(a, b, c)]
    }

    /// `max |∇⊥α|` over frame triples.
    pub fn max_norm(&self, ambient: &AmbientProduct) -> f64 {
        self.frame
            .iter()
            .map(|v| ambient.norm(v))
            .fold(0.0, f64::max)
    }
}

fn coord_alpha(jet: &Jet2, tangent: &TangentSpace, ambient: &AmbientProduct) -> Vec<AmbientVector> {
    let dim = jet.dim();
    let mut out = Vec::with_capacity(dim * (dim + 1) / 2);
    for b in 0..dim {
        for a in 0..=b {
            out.push(tangent.normal_part(jet.d2(a, b), ambient));
        }
    }
    out
}

/// Extrinsic Christoffels `Γ^l_ij = g^{lm} <d2_ij, d1_m>`.
fn christoffel_extrinsic(
    jet: &Jet2,
    g: &DMatrix<f64>,
    ambient: &AmbientProduct,
) -> Option<Vec<f64>> {
    let d = jet.dim();
    let ginv = g.clone().try_inverse()?;
    let mut low = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for m in 0..d {
                low[(m * d + i) * d + j] = ambient.inner(jet.d2(i, j), &jet.d1[m]);
            }
        }
    }
    let mut out = vec![0.0; d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                out[(l * d + i) * d + j] = (0..d)
                    .map(|m| ginv[(l, m)] * low[(m * d + i) * d + j])
                    .sum();
            }
        }
    }
    Some(out)
}

/// Trilinear change of basis with `m = coord_to_frame`.
fn to_frame3(coord: &[AmbientVector], m: &DMatrix<f64>, flat: usize) -> Vec<AmbientVector> {
    let d = m.nrows();
    let mut cur: Vec<AmbientVector> = coord.to_vec();
    for s in [d * d, d, 1] {
        let mut next = vec![AmbientVector::zeros(flat); cur.len()];
        for (idx, out) in next.iter_mut().enumerate() {
            let p = (idx / s) % d;
            let base = idx - p * s;
            for a in 0..d {
                if m[(a, p)] != 0.0 {
                    out.axpy(m[(a, p)], &cur[base + a * s], 1.0);
                }
            }
        }
        cur = next;
    }
    cur
}

/// `(∇⊥_a α)(b,c) = (∂_a α_bc)^⊥ - Γ^d_ab α_dc - Γ^d_ac α_bd`, converted to the
/// frame of `frames`.
pub fn covariant_alpha(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
    frames: &FrameSample,
) -> Result<CovariantAlpha> {
    let d = u.len();
    let flat = ambient.flat_dim();
    let jet = compute_jet(imm, u, steps)?;
    let g = crate::jetcalc::induced_metric(&jet, ambient)?;
    let alpha = coord_alpha(&jet, &frames.tangent, ambient);
    let gamma = christoffel_extrinsic(&jet, &g, ambient).ok_or(
        crate::GeometryError::DegenerateImmersion {
            min_eig: 0.0,
            max_eig: 0.0,
        },
    )?;
    let field = |v: &[f64]| -> Result<Vec<f64>> {
        let jet = compute_jet(imm, v, steps)?;
        let tangent = TangentSpace::from_partials(jet.point.clone(), &jet.d1, ambient)?;
        Ok(coord_alpha(&jet, &tangent, ambient)
            .iter()
            .flat_map(|x| x.iter().copied())
            .collect())
    };
    let mut coord = vec![AmbientVector::zeros(flat); d * d * d];
    let mut error_estimate: f64 = 0.0;
    for a in 0..d {
        let (deriv, err) = fd::central_richardson(field, u, a, steps.0[a])?;
        error_estimate = error_estimate.max(err);
        let dalpha: Vec<AmbientVector> = deriv
            .chunks(flat)
            .map(AmbientVector::from_column_slice)
            .collect();
        for b in 0..d {
            for c in 0..d {
                let mut v = frames.tangent.normal_part(&dalpha[packed(b, c)], ambient);
                for e in 0..d {
                    v.axpy(-gamma[(e * d + a) * d + b], &alpha[packed(e, c)], 1.0);
                    v.axpy(-gamma[(e * d + a) * d + c], &alpha[packed(b, e)], 1.0);
                }
                coord[(a * d + b) * d + c] = v;
            }
        }
    }
    let frame = to_frame3(&coord, frames.coord_to_frame(), flat);
    Ok(CovariantAlpha {
        dim: d,
        coord,
        frame,
        error_estimate,
    })
}

/// `max |∇⊥α|` over frame triples; zero iff the second fundamental form is
/// parallel at the sample.
pub fn parallel_alpha_residual(ca: &CovariantAlpha, ambient: &AmbientProduct) -> f64 {
    ca.max_norm(ambient)
}

/// `S X_p` as an ambient vector.
fn s_vector(pt: &ProductTensors, frames: &FrameSample, p: usize) -> AmbientVector {
    let mut v = AmbientVector::zeros(frames.point().len());
    for (k, xi) in frames.normal.iter().enumerate() {
        v.axpy(pt.s[(k, p)], xi, 1.0);
    }
    v
}

/// Largest frame norm of
/// `(∇⊥_X α)(Y,Z) - (∇⊥_Y α)(X,Z) - c1(⟨X,Z⟩SY - ⟨Y,Z⟩SX) - (c1+c2)(⟨RY,Z⟩SX - ⟨RX,Z⟩SY)`.
pub fn codazzi_residual(
    ca: &CovariantAlpha,
    pt: &ProductTensors,
    frames: &FrameSample,
    ambient: &AmbientProduct,
) -> f64 {
    let (c1, c2) = (ambient.c1(), ambient.c2());
    let d = ca.dim;
    let s: Vec<AmbientVector> = (0..d).map(|p| s_vector(pt, frames, p)).collect();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut worst: f64 = 0.0;
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                let mut v = ca.frame(x, y, z) - ca.frame(y, x, z);
                v.axpy(-c1 * delta(x, z), &s[y], 1.0);
                v.axpy(c1 * delta(y, z), &s[x], 1.0);
                v.axpy(-(c1 + c2) * pt.r[(y, z)], &s[x], 1.0);
                v.axpy((c1 + c2) * pt.r[(x, z)], &s[y], 1.0);
                worst = worst.max(ambient.norm(&v));
            }
        }
    }
    worst
}

/// `R⊥(d_a, d_b) ξ_k` for every coordinate pair and normal frame vector,
/// by nested Richardson differences of the projected extensions.
fn normal_curvature_coord(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
    frames: &FrameSample,
) -> Result<Vec<Vec<Vec<AmbientVector>>>> {
    let d = u.len();
    let flat = ambient.flat_dim();
    let rank = frames.normal.len();
    let tangent_at = |v: &[f64]| -> Result<TangentSpace> {
        let point = imm.eval_map(v)?;
        let d1 = imm.eval_partials(v, steps)?;
        TangentSpace::from_partials(point, &d1, ambient)
    };
    let eta = |v: &[f64]| -> Result<Vec<f64>> {
        let t = tangent_at(v)?;
        Ok(frames
            .normal
            .iter()
            .flat_map(|xi| {
                t.normal_part(xi, ambient)
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect())
    };
    // W_b(v) = (∂_b η)^⊥ at v, stacked over b and k
    let w = |v: &[f64]| -> Result<Vec<f64>> {
        let t = tangent_at(v)?;
        let mut out = Vec::with_capacity(d * rank * flat);
        for b in 0..d {
            let (deriv, _) = fd::central_richardson(eta, v, b, steps.0[b])?;
            for chunk in deriv.chunks(flat) {
                out.extend(
                    t.normal_part(&AmbientVector::from_column_slice(chunk), ambient)
                        .iter(),
                );
            }
        }
        Ok(out)
    };
    let mut dw = Vec::with_capacity(d);
    for a in 0..d {
        dw.push(fd::central_richardson(w, u, a, steps.0[a])?.0);
    }
    let at = |a: usize, b: usize, k: usize| {
        let start = (b * rank + k) * flat;
        AmbientVector::from_column_slice(&dw[a][start..start + flat])
    };
    let mut out = vec![vec![Vec::with_capacity(rank); d]; d];
    for a in 0..d {
        for b in 0..d {
            for k in 0..rank {
                let v = at(a, b, k) - at(b, a, k);
                out[a][b].push(frames.tangent.normal_part(&v, ambient));
            }
        }
    }
    Ok(out)
}

/// Largest frame norm of
/// `R⊥(X,Y)η - α(X,A_η Y) + α(A_η X,Y) - (c1+c2)(SX∧SY)η`
/// over frame pairs and normal frame vectors.
#[allow(clippy::too_many_arguments)]
pub fn ricci_eq_residual(
    imm: &ImmersionDefinition,
    u: &[f64],
    steps: &Steps,
    ambient: &AmbientProduct,
    frames: &FrameSample,
    gs: &GeometrySample,
    pt: &ProductTensors,
) -> Result<f64> {
    let d = u.len();
    let rank = frames.normal.len();
    let coord = normal_curvature_coord(imm, u, steps, ambient, frames)?;
    let e = frames.coord_to_frame();
    let s: Vec<AmbientVector> = (0..d).map(|p| s_vector(pt, frames, p)).collect();
    let cc = ambient.c1() + ambient.c2();
    let mut worst: f64 = 0.0;
    for k in 0..rank {
        let eta = &frames.normal[k];
        let a_eta = &gs.weingarten[k];
        for x in 0..d {
            for y in 0..d {
                let mut v = AmbientVector::zeros(eta.len());
                for a in 0..d {
                    for b in 0..d {
                        let w = e[(a, x)] * e[(b, y)];
                        if w != 0.0 {
                            v.axpy(w, &coord[a][b][k], 1.0);
                        }
                    }
                }
                for r in 0..d {
                    v.axpy(-a_eta[(r, y)], gs.alpha(x, r), 1.0);
                    v.axpy(a_eta[(r, x)], gs.alpha(r, y), 1.0);
                }
                v.axpy(-cc * ambient.inner(&s[y], eta), &s[x], 1.0);
                v.axpy(cc * ambient.inner(&s[x], eta), &s[y], 1.0);
                worst = worst.max(ambient.norm(&v));
            }
        }
    }
    Ok(worst)
}
