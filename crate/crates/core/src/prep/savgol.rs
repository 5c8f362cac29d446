//! Savitzky-Golay first-derivative filtering.
//!
//! The derivative at each sample comes from a least-squares polynomial fit
//! over a centered window; for uniform spacing this reduces to a fixed
//! convolution. Boundaries are handled by endpoint replication so the output
//! keeps the input length.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Convolution coefficients `c` such that the fitted first derivative at the
/// window center is `sum_i c[i] * y[i]`, in per-sample units.
///
/// Row 1 of the pseudoinverse `(A^T A)^{-1} A^T` for the Vandermonde matrix
/// `A[i][j] = u_i^j`, `u_i = i - half`.
pub fn sg_derivative_coefficients(window: usize, order: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 || window <= order {
        return Err(Error::Config(format!(
            "sg window must be odd and > order (got window {window}, order {order})"
        )));
    }
    let half = (window / 2) as isize;
    let n = order + 1;

    // Normal matrix G[j][k] = sum_i u_i^(j+k).
    let mut g = vec![0.0f64; n * n];
    for j in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for i in -half..=half {
                s += (i as f64).powi((j + k) as i32);
            }
            g[j * n + k] = s;
        }
    }

    // Solve G x = e_1 for the derivative row of G^{-1}.
    let mut rhs = vec![0.0f64; n];
    rhs[1] = 1.0;
    let x = solve_dense(&mut g, &mut rhs, n)?;

    // c[i] = sum_j x[j] * u_i^j.
    let mut coeffs = Vec::with_capacity(window);
    for i in -half..=half {
        let mut c = 0.0;
        for (j, xj) in x.iter().enumerate() {
            c += xj * (i as f64).powi(j as i32);
        }
        coeffs.push(c);
    }
    Ok(coeffs)
}

/// Gaussian elimination with partial pivoting for the small normal system.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(Error::Config("singular SG normal matrix".into()));
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row * n + c] * x[c];
        }
        x[row] = s / a[row * n + row];
    }
    Ok(x)
}

/// Per-sample first derivative of `positions` (dva) in °/s.
///
/// NaN inputs yield NaN at every output whose fit window touches a NaN;
/// all other outputs are clamped to `+/-clamp`. Endpoint replication keeps
/// the output length equal to the input length.
pub fn differentiate_sg<S: Scalar>(
    positions: &[S],
    dt_ms: f64,
    sg_window: usize,
    sg_order: usize,
    clamp: f64,
) -> Result<Vec<S>> {
    if positions.len() < sg_window {
        return Err(Error::Insufficient(format!(
            "sequence of {} samples is shorter than the SG window {}",
            positions.len(),
            sg_window
        )));
    }
    if dt_ms <= 0.0 || clamp <= 0.0 {
        return Err(Error::Config("dt_ms and clamp must be positive".into()));
    }
    let coeffs = sg_derivative_coefficients(sg_window, sg_order)?;
    let half = sg_window / 2;
    let n = positions.len();
    let scale = 1000.0 / dt_ms; // per-sample -> per-second

    // Replicated padding.
    let mut padded = Vec::with_capacity(n + 2 * half);
    padded.extend(std::iter::repeat(positions[0]).take(half));
    padded.extend_from_slice(positions);
    padded.extend(std::iter::repeat(positions[n - 1]).take(half));

    let clamp_s = S::from_f64_lossy(clamp);
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let win = &padded[t..t + sg_window];
        if win.iter().any(|v| v.is_nan()) {
            out.push(S::nan());
            continue;
        }
        let mut acc = 0.0f64;
        for (c, v) in coeffs.iter().zip(win) {
            acc += c * v.to_f64_lossy();
        }
        let v = S::from_f64_lossy(acc * scale);
        out.push(v.max(-clamp_s).min(clamp_s));
    }
    Ok(out)
}
