//! Adaptive Dormand–Prince 5(4) integrator for the small autonomous systems
//! that arise when flowing points along a vector field.

use super::{NumError, NumResult};

/// Right-hand side of the ODE system: `dy/da = rhs(a, y)`.
pub type Rhs<'a> = &'a dyn Fn(f64, &[f64]) -> NumResult<Vec<f64>>;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// Fifth-order solution weights (also the last stage's row: FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Embedded fourth-order weights.
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// Integrate `dy/da = rhs(a, y)` from `a0` to `a1` (either direction) with
/// local error tolerance `tol` (used as both absolute and relative). After
/// every accepted step `inspect` sees the new state and may abort the
/// integration (used for domain checks).
pub fn dp45(
    rhs: Rhs<'_>,
    y0: Vec<f64>,
    a0: f64,
    a1: f64,
    tol: f64,
    mut inspect: impl FnMut(&[f64]) -> NumResult<()>,
) -> NumResult<Vec<f64>> {
    if a0 == a1 {
        return Ok(y0);
    }
    let dim = y0.len();
    let span = a1 - a0;
    let dir = span.signum();
    let mut a = a0;
    let mut y = y0;
    let mut h = span / 100.0;
    let mut k1 = rhs(a, &y)?;
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps > 1_000_000 {
            return Err(NumError::Integrator(
                "step limit exceeded (1e6 accepted or rejected steps)".into(),
            ));
        }
        // Do not step past the endpoint.
        if (a + h - a1) * dir > 0.0 {
            h = a1 - a;
        }
        let stage = |coeffs: &[(f64, &[f64])], y: &[f64], h: f64| -> Vec<f64> {
            let mut out = y.to_vec();
            for (c, k) in coeffs {
                for i in 0..dim {
                    out[i] += h * c * k[i];
                }
            }
            out
        };
        let k2 = rhs(a + C[1] * h, &stage(&[(A21, &k1)], &y, h))?;
        let k3 = rhs(a + C[2] * h, &stage(&[(A31, &k1), (A32, &k2)], &y, h))?;
        let k4 = rhs(
            a + C[3] * h,
            &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)], &y, h),
        )?;
        let k5 = rhs(
            a + C[4] * h,
            &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &y, h),
        )?;
        let k6 = rhs(
            a + C[5] * h,
            &stage(
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                &y,
                h,
            ),
        )?;
        let ynew = stage(
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            &y,
            h,
        );
        let k7 = rhs(a + C[6] * h, &ynew)?;
        let ylow = stage(
            &[
                (E1, &k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
            &y,
            h,
        );
        // Scaled RMS error estimate.
        let mut err = 0.0;
        for i in 0..dim {
            let scale = tol + tol * ynew[i].abs().max(y[i].abs());
            let d = (ynew[i] - ylow[i]) / scale;
            err += d * d;
        }
        err = (err / dim as f64).sqrt();
        if !err.is_finite() {
            return Err(NumError::Integrator("non-finite error estimate".into()));
        }
        if err <= 1.0 {
            a += h;
            y = ynew;
            k1 = k7; // first-same-as-last
            inspect(&y)?;
            if (a - a1) * dir >= 0.0 {
                return Ok(y);
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 * span.abs() {
            return Err(NumError::Integrator("step size underflow".into()));
        }
    }
}
