//! Central differences with one level of Richardson extrapolation.

use crate::error::Result;

/// Returns `(derivative, error_estimate)` of a vector-valued field along
/// `axis`. The estimate is `max |D(h/2) - D(h)| / 3`, the magnitude of the
/// leading error term removed by the extrapolation.
pub fn central_richardson<F>(f: F, u: &[f64], axis: usize, h: f64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let diff = |step: f64| -> Result<Vec<f64>> {
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[axis] += step;
        dn[axis] -= step;
        let fp = f(&up)?;
        let fm = f(&dn)?;
        Ok(fp
            .iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect())
    };
    let coarse = diff(h)?;
    let fine = diff(0.5 * h)?;
    let mut err: f64 = 0.0;
    let out = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| {
            err = err.max((f - c).abs() / 3.0);
            (4.0 * f - c) / 3.0
        })
        .collect();
    Ok((out, err))
}

/// Fourth-order five-point first derivative.
pub fn central_fourth_order<F>(f: F, u: &[f64], axis: usize, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let at = |s: f64| {
        let mut p = u.to_vec();
        p[axis] += s;
        f(&p)
    };
    let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
    Ok((0..p1.len())
        .map(|k| (-p2[k] + 8.0 * p1[k] - 8.0 * m1[k] + m2[k]) / (12.0 * h))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_fourth_order() {
        let f = |u: &[f64]| Ok(vec![u[0].sin(), u[0].exp()]);
        let x = 0.4_f64;
        let e = |h: f64| {
            let (d, _) = central_richardson(f, &[x], 0, h).unwrap();
            (d[0] - x.cos()).abs().max((d[1] - x.exp()).abs())
        };
        let ratio = e(0.1) / e(0.05);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn fourth_order_stencil() {
        let f = |u: &[f64]| Ok(vec![u[0].powi(4)]);
        let d = central_fourth_order(f, &[1.0], 0, 0.1).unwrap();
        // exact for quartics up to the h^4 f^(5) term, which vanishes
        assert!((d[0] - 4.0).abs() < 1e-12);
    }
}
