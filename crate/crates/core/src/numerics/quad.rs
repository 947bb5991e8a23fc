//! Quadrature primitives: Gauss–Hermite nodes/weights and a 1-D adaptive
//! Simpson rule used as the fallback when the tensor rule hits non-finite
//! intermediates.

use super::{NumError, NumResult};

/// Nodes and weights of the `n`-point Gauss–Hermite rule for the weight
/// `exp(−s²)` on the whole line: `∫ exp(−s²)·f(s) ds ≈ Σ wᵢ·f(sᵢ)`.
///
/// Nodes are found by Newton iteration on the orthonormal Hermite recurrence
/// (stable for the moderate orders used here); weights come from the
/// derivative value at each root.
pub fn gauss_hermite(n: usize) -> NumResult<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(NumError::InvalidSpec(format!(
            "Gauss–Hermite rule needs at least 2 points per axis, got {n}"
        )));
    }
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    // Positive roots found so far, largest first; the initial guess for each
    // subsequent root extrapolates from these.
    let mut upper: Vec<f64> = Vec::with_capacity(m);
    let mut z = 0.0_f64;
    for i in 0..m {
        // Standard initial guesses, then refinement.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * upper[0],
            3 => 1.91 * z - 0.91 * upper[1],
            _ => 2.0 * z - upper[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            // Orthonormal Hermite values at z: p1 = h_n(z), p2 = h_{n−1}(z).
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(NumError::InvalidSpec(format!(
                "Gauss–Hermite node iteration did not converge for n = {n}"
            )));
        }
        upper.push(z);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    Ok((nodes, weights))
}

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance
/// `tol`. Non-finite values of `f` abort with the quadrature error so the
/// caller can report the failing configuration.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> NumResult<f64> {
    let eval = |x: f64| -> NumResult<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumError::NonFinite(format!(
                "integrand is not finite at {x}"
            )))
        }
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&eval, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    eval: &dyn Fn(f64) -> NumResult<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> NumResult<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (eval(lm)?, eval(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let half = 0.5 * tol;
    Ok(simpson_step(eval, a, m, fa, flm, fm, left, half, depth - 1)?
        + simpson_step(eval, m, b, fm, frm, fb, right, half, depth - 1)?)
}
