//! Time quadrature and differencing on (possibly non-uniform) sample grids.

use crate::error::{Error, Result};

/// Trapezoid rule `∫ v dt` over the sample times.
pub fn trapezoid(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2)
        .zip(v.windows(2))
        .map(|(tt, vv)| 0.5 * (tt[1] - tt[0]) * (vv[0] + vv[1]))
        .sum()
}

/// Running trapezoid integral; the first entry is zero.
pub fn cumulative_trapezoid(t: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    if !t.is_empty() {
        out.push(0.0);
    }
    for (tt, vv) in t.windows(2).zip(v.windows(2)) {
        acc += 0.5 * (tt[1] - tt[0]) * (vv[0] + vv[1]);
        out.push(acc);
    }
    out
}

/// Running maximum.
pub fn running_max(v: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    v.iter()
        .map(|&x| {
            m = m.max(x);
            m
        })
        .collect()
}

/// Second-order finite-difference derivative: centered (three-point, non-uniform)
/// in the interior, one-sided three-point at the ends.
pub fn derivative(t: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        out[i] = lagrange_derivative([t[a], t[b], t[c]], [v[a], v[b], v[c]], t[i]);
    }
    Ok(out)
}

/// Derivative at `x` of the quadratic through three points.
fn lagrange_derivative(t: [f64; 3], v: [f64; 3], x: f64) -> f64 {
    let [t0, t1, t2] = t;
    let d0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
    let d1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
    let d2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
    v[0] * d0 + v[1] * d1 + v[2] * d2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_exact_for_linear() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&t, &v) - 2.5).abs() < 1e-14);
        let c = cumulative_trapezoid(&t, &v);
        assert_eq!(c.len(), t.len());
        assert!((c[10] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn derivative_exact_for_quadratics() {
        let t = [0.0, 0.1, 0.25, 0.3, 0.5];
        let v: Vec<f64> = t.iter().map(|x| 2.0 * x * x - x + 4.0).collect();
        let d = derivative(&t, &v).unwrap();
        for (x, dv) in t.iter().zip(d) {
            assert!((dv - (4.0 * x - 1.0)).abs() < 1e-12);
        }
        assert!(derivative(&t[..2], &v[..2]).is_err());
    }

    #[test]
    fn running_max_is_monotone() {
        assert_eq!(running_max(&[1.0, 3.0, 2.0, 5.0]), vec![1.0, 3.0, 3.0, 5.0]);
    }
}
