//! Floating-point validation of the closed-form source solution.
//!
//! The symbolic modules prove the kernel solves the equation; this module
//! checks the quantitative claims that make it the *fundamental* solution:
//! vanishing PDE residual on finite-difference stencils, unit mass at every
//! forward time, Gaussian moments matching the exponent's quadratic form,
//! concentration at the source as t ↓ t0, the semigroup composition law, and
//! invariance of the kernel graph under the flows of the source-fixing
//! generators.
//!
//! Pre-build oracle for the quadrature design (derived by completing the
//! square in y, then x): with τ = t − t0 the exponent is −Q/1 with
//! `Q = (x−x0)²/(4τ) + (3/τ³)(y−y0−τ(x+x0)/2)²`, so the substitution
//! `x = x0 + 2√τ·s`, `y = y0 + τ(x+x0)/2 + √(τ³/3)·r` maps Q to s² + r² with
//! Jacobian 2τ²/√3. Inverting the quadratic form gives the covariance
//! var_x = 2τ, cov_xy = τ², var_y = (2/3)τ³ and the mass 2π·C₁/√3, which is 1
//! exactly at the normalizing amplitude C₁ = √3/(2π).

mod ode;
mod quad;

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::ExprError;
use crate::expr::SymbolKind;
use crate::jet::VectorField;

pub use quad::{adaptive_simpson, gauss_hermite};

/// Errors raised by the numeric validation layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumError {
    /// The kernel was evaluated exactly at the singular time t = t0.
    #[error("kernel is singular at t = t0")]
    SingularTime,

    /// A finite-difference stencil would reach across the singular time.
    #[error(
        "finite-difference step {h} too large for a point with t − t0 = {tau} \
         (need t − t0 ≥ 10·h)"
    )]
    StepTooLarge { h: f64, tau: f64 },

    /// An operation that integrates over a time slice was asked about t ≤ t0.
    #[error("operation requires t > t0 (got t − t0 = {0})")]
    NotForward(f64),

    /// A quadrature intermediate overflowed or was otherwise not finite.
    #[error("non-finite intermediate in quadrature ({0}); try the adaptive rule")]
    NonFinite(String),

    /// Malformed quadrature or tolerance specification.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Composition times must be strictly increasing.
    #[error("times must be strictly increasing: {0}")]
    BadTimes(String),

    /// A flow left the forward domain t > t0.
    #[error("flow left the domain t > t0 (reached t − t0 = {0})")]
    DomainExit(f64),

    /// The adaptive integrator gave up.
    #[error("ODE integrator failed: {0}")]
    Integrator(String),

    /// A symbolic evaluation inside a numeric operation failed.
    #[error(transparent)]
    Symbolic(#[from] ExprError),
}

/// Convenience alias for the numeric layer.
pub type NumResult<T> = Result<T, NumError>;

/// The normalizing amplitude √3/(2π): the unique choice of the smooth-factor
/// constant that gives the kernel unit mass on every forward time slice.
pub fn normalizing_amplitude() -> f64 {
    3.0_f64.sqrt() / (2.0 * PI)
}

/// Source point and amplitude constants of the closed-form kernel
/// `u = (c1·θ(t−t0) + c0)/(t−t0)² · exp[−(x−x0)²/(4(t−t0))
///      − 3(y−y0−(t−t0)(x+x0)/2)²/(t−t0)³]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    /// Source time.
    pub t0: f64,
    /// Source x-coordinate.
    pub x0: f64,
    /// Source y-coordinate.
    pub y0: f64,
    /// Two-sided amplitude (the weak solution allows any value; 0 selects
    /// the causal kernel that vanishes for t < t0).
    pub c0: f64,
    /// Forward jump amplitude; defaults to the normalizing √3/(2π).
    pub c1: f64,
}

impl KernelParams {
    /// Causal kernel at the given source point: c0 = 0, c1 = √3/(2π).
    pub fn new(t0: f64, x0: f64, y0: f64) -> KernelParams {
        KernelParams {
            t0,
            x0,
            y0,
            c0: 0.0,
            c1: normalizing_amplitude(),
        }
    }

    /// Replace the two-sided amplitude.
    pub fn with_c0(mut self, c0: f64) -> KernelParams {
        self.c0 = c0;
        self
    }

    /// Replace the forward jump amplitude.
    pub fn with_c1(mut self, c1: f64) -> KernelParams {
        self.c1 = c1;
        self
    }
}

/// Evaluate the kernel at one point. Exact at the level of the closed form:
/// no quadrature or differencing is involved.
///
/// For t < t0 the θ factor drops the c1 term; with the default c0 = 0 the
/// value is exactly 0 there (the exponential is skipped, so far-field points
/// cannot overflow). t = t0 is the singular time.
pub fn kernel(p: &KernelParams, t: f64, x: f64, y: f64) -> NumResult<f64> {
    let tau = t - p.t0;
    if tau == 0.0 {
        return Err(NumError::SingularTime);
    }
    let amp = if tau > 0.0 { p.c1 + p.c0 } else { p.c0 };
    if amp == 0.0 {
        return Ok(0.0);
    }
    let dx = x - p.x0;
    let dy = y - p.y0 - tau * (x + p.x0) / 2.0;
    let exponent = -dx * dx / (4.0 * tau) - 3.0 * dy * dy / (tau * tau * tau);
    let value = amp / (tau * tau) * exponent.exp();
    if !value.is_finite() {
        return Err(NumError::NonFinite(format!(
            "kernel at t = {t}, x = {x}, y = {y}"
        )));
    }
    Ok(value)
}

/// Affine standardization of the kernel's Gaussian exponent at a fixed
/// forward time: maps standard coordinates (s, r) to (x, y) so that the
/// exponent becomes −(s² + r²).
#[derive(Debug, Clone, Copy)]
struct GaussianFrame {
    tau: f64,
    x0: f64,
    y0: f64,
}

impl GaussianFrame {
    fn new(p: &KernelParams, t: f64) -> NumResult<GaussianFrame> {
        let tau = t - p.t0;
        if tau <= 0.0 {
            return Err(NumError::NotForward(tau));
        }
        Ok(GaussianFrame {
            tau,
            x0: p.x0,
            y0: p.y0,
        })
    }

    /// Map standard coordinates to the original slice.
    fn point(&self, s: f64, r: f64) -> (f64, f64) {
        let x = self.x0 + 2.0 * self.tau.sqrt() * s;
        let y = self.y0 + self.tau * (x + self.x0) / 2.0 + (self.tau.powi(3) / 3.0).sqrt() * r;
        (x, y)
    }

    /// |∂(x,y)/∂(s,r)| = 2τ²/√3.
    fn jacobian(&self) -> f64 {
        2.0 * self.tau * self.tau / 3.0_f64.sqrt()
    }

    /// Standard deviation of the marginal in x: var_x = 2τ.
    fn sigma_x(&self) -> f64 {
        (2.0 * self.tau).sqrt()
    }

    /// Conditional standard deviation of y given x: var = τ³/6.
    fn sigma_y_given_x(&self) -> f64 {
        (self.tau.powi(3) / 6.0).sqrt()
    }

    /// Center of the conditional y-Gaussian at this x.
    fn y_center(&self, x: f64) -> f64 {
        self.y0 + self.tau * (x + self.x0) / 2.0
    }
}

/// Quadrature rule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Tensor Gauss–Hermite after affine standardization (spectrally
    /// accurate; the default).
    GaussHermite,
    /// Iterated 1-D adaptive Simpson over a ±10σ window (fallback for
    /// configurations where the tensor rule hits non-finite intermediates).
    Adaptive,
}

/// How to integrate over a time slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Which rule to apply.
    pub rule: QuadratureRule,
    /// Points per axis for the tensor rule (≥ 2).
    pub points_per_axis: usize,
    /// Target absolute tolerance (drives the adaptive rule).
    pub tolerance: f64,
}

impl QuadratureSpec {
    /// Tensor Gauss–Hermite with the given points per axis.
    pub fn gauss_hermite(points_per_axis: usize) -> NumResult<QuadratureSpec> {
        if points_per_axis < 2 {
            return Err(NumError::InvalidSpec(format!(
                "points per axis must be at least 2, got {points_per_axis}"
            )));
        }
        Ok(QuadratureSpec {
            rule: QuadratureRule::GaussHermite,
            points_per_axis,
            tolerance: 1e-10,
        })
    }

    /// Adaptive fallback rule with the given absolute tolerance.
    pub fn adaptive(tolerance: f64) -> NumResult<QuadratureSpec> {
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(NumError::InvalidSpec(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(QuadratureSpec {
            rule: QuadratureRule::Adaptive,
            points_per_axis: 2,
            tolerance,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> QuadratureSpec {
        QuadratureSpec::gauss_hermite(20).expect("static spec is valid")
    }
}

/// ∬ g(x, y)·K(t, x, y) dx dy over the slice at time t.
///
/// The tensor rule standardizes the Gaussian and evaluates the kernel
/// *honestly* at every node (multiplying back the weight), so a defect in
/// [`kernel`] shows up as a wrong integral rather than being cancelled by
/// construction.
fn integrate_against_kernel(
    p: &KernelParams,
    t: f64,
    q: &QuadratureSpec,
    g: &dyn Fn(f64, f64) -> f64,
) -> NumResult<f64> {
    let frame = GaussianFrame::new(p, t)?;
    match q.rule {
        QuadratureRule::GaussHermite => {
            let (nodes, weights) = quad::gauss_hermite(q.points_per_axis)?;
            let mut total = 0.0;
            for (i, &s) in nodes.iter().enumerate() {
                for (j, &r) in nodes.iter().enumerate() {
                    let (x, y) = frame.point(s, r);
                    let k = kernel(p, t, x, y)?;
                    let f = g(x, y) * k * frame.jacobian() * (s * s + r * r).exp();
                    if !f.is_finite() {
                        return Err(NumError::NonFinite(format!(
                            "tensor node (s, r) = ({s}, {r}) at t = {t}"
                        )));
                    }
                    total += weights[i] * weights[j] * f;
                }
            }
            Ok(total)
        }
        QuadratureRule::Adaptive => {
            let sx = frame.sigma_x();
            let sy = frame.sigma_y_given_x();
            let inner_tol = q.tolerance / (40.0 * sx);
            quad::adaptive_simpson(
                &|x| {
                    let cy = frame.y_center(x);
                    quad::adaptive_simpson(
                        &|y| match kernel(p, t, x, y) {
                            Ok(k) => g(x, y) * k,
                            Err(_) => f64::NAN,
                        },
                        cy - 10.0 * sy,
                        cy + 10.0 * sy,
                        inner_tol,
                    )
                    .unwrap_or(f64::NAN)
                },
                frame.x0 - 10.0 * sx,
                frame.x0 + 10.0 * sx,
                q.tolerance,
            )
        }
    }
}

/// Total mass ∬ K dx dy of the kernel on the slice at time t (> t0).
///
/// With the normalizing amplitude this is 1 for every forward time — the
/// operational expression of the unit point source.
pub fn normalization(p: &KernelParams, t: f64, q: &QuadratureSpec) -> NumResult<f64> {
    integrate_against_kernel(p, t, q, &|_, _| 1.0)
}

/// First and second moments of the kernel viewed as a probability density on
/// the slice at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

/// Quadrature moments of the kernel as a probability density at time t.
pub fn moments(p: &KernelParams, t: f64, q: &QuadratureSpec) -> NumResult<Moments> {
    let mass = normalization(p, t, q)?;
    if mass <= 0.0 {
        return Err(NumError::NonFinite(format!("nonpositive mass {mass}")));
    }
    let mean_x = integrate_against_kernel(p, t, q, &|x, _| x)? / mass;
    let mean_y = integrate_against_kernel(p, t, q, &|_, y| y)? / mass;
    let var_x =
        integrate_against_kernel(p, t, q, &|x, _| (x - mean_x) * (x - mean_x))? / mass;
    let var_y =
        integrate_against_kernel(p, t, q, &|_, y| (y - mean_y) * (y - mean_y))? / mass;
    let cov_xy =
        integrate_against_kernel(p, t, q, &|x, y| (x - mean_x) * (y - mean_y))? / mass;
    Ok(Moments {
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov_xy,
    })
}

/// Mass inside the Euclidean ball of the given radius around the source
/// location (x0, y0) on the slice at time t. With the normalizing amplitude
/// this tends to 1 as t ↓ t0 for every fixed radius: the kernel concentrates
/// at the source.
pub fn concentration(
    p: &KernelParams,
    t: f64,
    radius: f64,
    q: &QuadratureSpec,
) -> NumResult<f64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(NumError::InvalidSpec(format!(
            "ball radius must be positive, got {radius}"
        )));
    }
    integrate_against_kernel(p, t, q, &|x, y| {
        let dx = x - p.x0;
        let dy = y - p.y0;
        if dx * dx + dy * dy <= radius * radius {
            1.0
        } else {
            0.0
        }
    })
}

/// Central finite-difference residuals `u_t − u_xx + x·u_y` of an arbitrary
/// field sampled from `f`, one per point, using a second-order stencil of
/// width h.
pub fn fd_residuals(
    f: &dyn Fn(f64, f64, f64) -> NumResult<f64>,
    points: &[(f64, f64, f64)],
    h: f64,
) -> NumResult<Vec<f64>> {
    if h.is_nan() || h <= 0.0 {
        return Err(NumError::InvalidSpec(format!(
            "stencil width must be positive, got {h}"
        )));
    }
    let mut out = Vec::with_capacity(points.len());
    for &(t, x, y) in points {
        let center = f(t, x, y)?;
        let u_t = (f(t + h, x, y)? - f(t - h, x, y)?) / (2.0 * h);
        let u_xx = (f(t, x + h, y)? - 2.0 * center + f(t, x - h, y)?) / (h * h);
        let u_y = (f(t, x, y + h)? - f(t, x, y - h)?) / (2.0 * h);
        out.push(u_t - u_xx + x * u_y);
    }
    Ok(out)
}

/// Maximum absolute finite-difference residual of the kernel over the given
/// points. Every point must satisfy t − t0 ≥ 10·h so the stencil stays well
/// inside the forward domain.
pub fn residual_fd(p: &KernelParams, points: &[(f64, f64, f64)], h: f64) -> NumResult<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(NumError::InvalidSpec(format!(
            "stencil width must be positive, got {h}"
        )));
    }
    for &(t, _, _) in points {
        let tau = t - p.t0;
        if tau < 10.0 * h {
            return Err(NumError::StepTooLarge { h, tau });
        }
    }
    let residuals = fd_residuals(&|t, x, y| kernel(p, t, x, y), points, h)?;
    Ok(residuals.iter().fold(0.0, |acc, r| acc.max(r.abs())))
}

/// Deterministic pseudo-random forward points for residual and flow checks:
/// t − t0 uniform in `tau_range`, x − x0 and y − y0 uniform in ±`spread`.
pub fn sample_points(
    p: &KernelParams,
    n: usize,
    seed: u64,
    tau_range: (f64, f64),
    spread: f64,
) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let tau = rng.gen_range(tau_range.0..=tau_range.1);
            let dx = rng.gen_range(-spread..=spread);
            let dy = rng.gen_range(-spread..=spread);
            (p.t0 + tau, p.x0 + dx, p.y0 + dy)
        })
        .collect()
}

/// Maximum absolute composition defect of the kernel over the test points:
/// `|∬ K(t1→t2)(x',y')·K(t2→t3)((x',y')→(x,y)) dx'dy' − K(t1→t3)(x,y)|`.
///
/// The source is (t1, x0, y0) with the amplitudes of `p`; the identity holds
/// for the causal normalized kernel (c0 = 0, c1 = √3/(2π)), which is the
/// transition density of the underlying degenerate diffusion.
pub fn chapman_kolmogorov(
    p: &KernelParams,
    times: (f64, f64, f64),
    points: &[(f64, f64)],
    q: &QuadratureSpec,
) -> NumResult<f64> {
    let (t1, t2, t3) = times;
    if !(t1 < t2 && t2 < t3) {
        return Err(NumError::BadTimes(format!("({t1}, {t2}, {t3})")));
    }
    let first = KernelParams {
        t0: t1,
        x0: p.x0,
        y0: p.y0,
        c0: p.c0,
        c1: p.c1,
    };
    let second_at = |xp: f64, yp: f64| KernelParams {
        t0: t2,
        x0: xp,
        y0: yp,
        c0: p.c0,
        c1: p.c1,
    };
    let mut worst = 0.0_f64;
    match q.rule {
        QuadratureRule::GaussHermite => {
            // The integrand is the product of two Gaussians in the
            // intermediate point, so the tensor rule must standardize by the
            // *composite* exponent: the Hessian of the first kernel's
            // exponent with respect to its evaluation point plus the Hessian
            // of the second kernel's exponent with respect to its source
            // point (both analytic, below). Standardizing by either factor
            // alone leaves a near-degenerate direction that Gauss–Hermite
            // resolves very slowly.
            let tau1 = t2 - t1;
            let tau2 = t3 - t2;
            let h11 = 2.0 / tau1 + 2.0 / tau2;
            let h12 = -3.0 / (tau1 * tau1) + 3.0 / (tau2 * tau2);
            let h22 = 6.0 / tau1.powi(3) + 6.0 / tau2.powi(3);
            // Cholesky H = L·Lᵀ and the node map δ = √2·L⁻ᵀ(s, r), which
            // turns the composite quadratic ½δᵀHδ into s² + r².
            let l11 = h11.sqrt();
            let l21 = h12 / l11;
            let l22 = (h22 - l21 * l21).sqrt();
            let jac = 2.0 / (l11 * l22);
            let (nodes, weights) = quad::gauss_hermite(q.points_per_axis)?;
            // Means of the two Gaussian factors: the first kernel peaks at
            // its drifted mean, the second (as a function of its source) at
            // the pullback of the evaluation point.
            let m1 = (first.x0, first.y0 + tau1 * first.x0);
            for &(x, y) in points {
                let direct = kernel(&first, t3, x, y)?;
                let m2 = (x, y - tau2 * x);
                // Composite mean: solve H·μ = H₁·m₁ + H₂·m₂.
                let b1 = (2.0 / tau1) * m1.0 - (3.0 / (tau1 * tau1)) * m1.1
                    + (2.0 / tau2) * m2.0
                    + (3.0 / (tau2 * tau2)) * m2.1;
                let b2 = -(3.0 / (tau1 * tau1)) * m1.0 + (6.0 / tau1.powi(3)) * m1.1
                    + (3.0 / (tau2 * tau2)) * m2.0
                    + (6.0 / tau2.powi(3)) * m2.1;
                let det = h11 * h22 - h12 * h12;
                let mu = ((h22 * b1 - h12 * b2) / det, (h11 * b2 - h12 * b1) / det);
                let mut composed = 0.0;
                for (i, &s) in nodes.iter().enumerate() {
                    for (j, &r) in nodes.iter().enumerate() {
                        // Solve Lᵀδ = √2·(s, r) by back-substitution.
                        let d2 = std::f64::consts::SQRT_2 * r / l22;
                        let d1 = (std::f64::consts::SQRT_2 * s - l21 * d2) / l11;
                        let (xp, yp) = (mu.0 + d1, mu.1 + d2);
                        let k12 = kernel(&first, t2, xp, yp)?;
                        let k23 = kernel(&second_at(xp, yp), t3, x, y)?;
                        let f = k12 * k23 * jac * (s * s + r * r).exp();
                        if !f.is_finite() {
                            return Err(NumError::NonFinite(format!(
                                "composition node (s, r) = ({s}, {r})"
                            )));
                        }
                        composed += weights[i] * weights[j] * f;
                    }
                }
                worst = worst.max((composed - direct).abs());
            }
        }
        QuadratureRule::Adaptive => {
            for &(x, y) in points {
                let direct = kernel(&first, t3, x, y)?;
                let composed = integrate_against_kernel(&first, t2, q, &|xp, yp| {
                    kernel(&second_at(xp, yp), t3, x, y).unwrap_or(f64::NAN)
                })?;
                worst = worst.max((composed - direct).abs());
            }
        }
    }
    Ok(worst)
}

/// Maximum graph-invariance defect of the kernel under the flow of `field`
/// for group parameter `a`: each point (t, x, y) with its kernel value is
/// integrated along `d(t,x,y)/da = ξ`, `du/da = α·u` (local tolerance `tol`),
/// and the flowed value is compared with the kernel at the flowed point.
///
/// Free parameters named `t0`, `x0`, `y0` in the field are bound to the
/// corresponding kernel parameters. The flow must stay inside t > t0.
pub fn flow_invariance(
    field: &VectorField,
    a: f64,
    p: &KernelParams,
    points: &[(f64, f64, f64)],
    tol: f64,
) -> NumResult<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumError::InvalidSpec(format!(
            "ODE tolerance must be positive, got {tol}"
        )));
    }
    let vars = field.vars();
    if vars.len() != 3 {
        return Err(NumError::InvalidSpec(format!(
            "flow check needs a field over three variables, got {}",
            vars.len()
        )));
    }
    // Bind source parameters by name; anything else unbound will surface as
    // a symbolic evaluation error.
    let mut bindings: HashMap<crate::expr::Symbol, f64> = HashMap::new();
    for component in field.xi().iter().chain(std::iter::once(field.alpha())) {
        for s in component.free_symbols() {
            if s.kind() == SymbolKind::SourceParameter {
                match s.name() {
                    "t0" => bindings.insert(s, p.t0),
                    "x0" => bindings.insert(s, p.x0),
                    "y0" => bindings.insert(s, p.y0),
                    _ => None,
                };
            }
        }
    }
    let mut worst = 0.0_f64;
    for &(t, x, y) in points {
        if t - p.t0 <= 0.0 {
            return Err(NumError::NotForward(t - p.t0));
        }
        let u0 = kernel(p, t, x, y)?;
        if a == 0.0 {
            continue; // identity flow: defect is exactly zero
        }
        let rhs = |_: f64, state: &[f64]| -> NumResult<Vec<f64>> {
            let mut bind = bindings.clone();
            for (v, value) in vars.iter().zip(state.iter()) {
                bind.insert(v.clone(), *value);
            }
            let mut out = Vec::with_capacity(4);
            for j in 0..3 {
                out.push(field.xi_component(j).eval_numeric(&bind)?);
            }
            out.push(field.alpha().eval_numeric(&bind)? * state[3]);
            Ok(out)
        };
        let end = ode::dp45(&rhs, vec![t, x, y, u0], 0.0, a, tol, |state| {
            if state[0] - p.t0 <= 0.0 {
                Err(NumError::DomainExit(state[0] - p.t0))
            } else {
                Ok(())
            }
        })?;
        let expected = kernel(p, end[0], end[1], end[2])?;
        worst = worst.max((end[3] - expected).abs());
    }
    Ok(worst)
}
