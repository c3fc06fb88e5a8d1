//! Small dense helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};

/// Orthonormalizes `candidates` against `existing` (assumed orthonormal) and
/// each other, returning up to `count` new vectors. At every step the
/// candidate with the largest remaining norm is taken; ties resolve to the
/// lowest index, so the output is deterministic. Each accepted vector gets a
/// second orthogonalization pass.
pub fn gram_schmidt_select<F>(
    candidates: Vec<DVector<f64>>,
    existing: &[DVector<f64>],
    count: usize,
    inner: F,
) -> Vec<DVector<f64>>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    gram_schmidt_select_indexed(candidates, existing, count, inner)
        .into_iter()
        .map(|(_, v)| v)
        .collect()
}

/// As [`gram_schmidt_select`], also reporting which candidate produced each
/// output vector.
pub fn gram_schmidt_select_indexed<F>(
    candidates: Vec<DVector<f64>>,
    existing: &[DVector<f64>],
    count: usize,
    inner: F,
) -> Vec<(usize, DVector<f64>)>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    let mut pool: Vec<(usize, DVector<f64>)> = candidates.into_iter().enumerate().collect();
    let mut basis: Vec<DVector<f64>> = existing.to_vec();
    let mut out = Vec::with_capacity(count);
    let remove = |v: &mut DVector<f64>, basis: &[DVector<f64>]| {
        for b in basis {
            let c = inner(v, b);
            v.axpy(-c, b, 1.0);
        }
    };
    for (_, v) in pool.iter_mut() {
        remove(v, &basis);
    }
    while out.len() < count {
        let mut best = None;
        let mut best_norm = 0.0;
        for (k, (_, v)) in pool.iter().enumerate() {
            let n = inner(v, v);
            if n > best_norm {
                best_norm = n;
                best = Some(k);
            }
        }
        let Some(k) = best else { break };
        if best_norm <= 1e-24 {
            break;
        }
        let (idx, mut v) = pool.remove(k);
        remove(&mut v, &basis);
        let n = inner(&v, &v).sqrt();
        v /= n;
        for (_, w) in pool.iter_mut() {
            let c = inner(w, &v);
            w.axpy(-c, &v, 1.0);
        }
        basis.push(v.clone());
        out.push((idx, v));
    }
    out
}

/// Gram-Schmidt of `candidates` in the given order against `existing`, two
/// passes per vector. Returns `None` if a candidate is (numerically) dependent.
pub fn gram_schmidt_in_order<F>(
    candidates: Vec<DVector<f64>>,
    existing: &[DVector<f64>],
    inner: F,
) -> Option<Vec<DVector<f64>>>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    let mut basis: Vec<DVector<f64>> = existing.to_vec();
    let mut out = Vec::with_capacity(candidates.len());
    for mut v in candidates {
        for _pass in 0..2 {
            for b in &basis {
                let c = inner(&v, b);
                v.axpy(-c, b, 1.0);
            }
        }
        let n2 = inner(&v, &v);
        if !(n2 > 1e-24) {
            return None;
        }
        v /= n2.sqrt();
        basis.push(v.clone());
        out.push(v);
    }
    Some(out)
}

/// Ascending eigenvalues of a symmetric matrix (symmetrized first).
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

/// Frobenius pairing `trace(a^T b)`.
pub fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
