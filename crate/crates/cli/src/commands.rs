//! Implementations of the five subcommands. Each loads a problem file,
//! runs its checks, and returns a [`Report`]; user mistakes (bad file, bad
//! flags, unknown names) surface as [`UsageError`] before any report is
//! produced.

use std::fmt;
use std::path::Path;

use liefund_core::context::Context;
use liefund_core::expr::{rat, Expression, Rat, Symbol};
use liefund_core::fundsol::{
    build_constraints, same_span, satisfies_source_conditions, solve_constraints,
};
use liefund_core::jet::{check_symmetry, SymmetryVerdict, VectorField};
use liefund_core::numerics::{
    chapman_kolmogorov, flow_invariance, moments, normalization, residual_fd, sample_points,
    KernelParams, QuadratureSpec,
};
use liefund_core::parser::{parse_problem, ProblemFile};
use liefund_core::reduce::{check_invariant, substitute_ansatz, verify_solution, Ansatz};

use crate::report::{Report, ReportBuilder};
use crate::Command;

/// A mistake in the invocation or the input file, reported before any
/// checks run (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

pub fn dispatch(cmd: &Command) -> Result<Report, UsageError> {
    match cmd {
        Command::VerifySymmetry { file, fields } => cmd_verify_symmetry(file, fields),
        Command::Fundsol { file } => cmd_fundsol(file),
        Command::Reduce { file } => cmd_reduce(file),
        Command::VerifyKernel {
            file,
            tol,
            points,
            times,
            c1,
            seed,
        } => cmd_verify_kernel(file, *tol, *points, times.as_deref(), *c1, *seed),
        Command::Commutators { file } => cmd_commutators(file),
    }
}

fn load(file: &Path) -> Result<(ProblemFile, Vec<u8>), UsageError> {
    let bytes = std::fs::read(file)
        .map_err(|e| usage(format!("cannot read {}: {e}", file.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| usage(format!("{} is not valid UTF-8", file.display())))?;
    let problem = parse_problem(&text).map_err(|e| {
        usage(format!("{} failed to parse:\n{e}", file.display()))
    })?;
    Ok((problem, bytes))
}

/// Find a named field among `field` and `expect` declarations.
fn lookup_field<'a>(problem: &'a ProblemFile, name: &str) -> Option<&'a VectorField> {
    problem.field(name).or_else(|| problem.expect(name))
}

/// Expand field-name arguments, allowing inclusive ranges like `X1..X8`.
fn expand_names(requested: &[String], problem: &ProblemFile) -> Result<Vec<String>, UsageError> {
    fn split_numeric(s: &str) -> Option<(&str, u64)> {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit());
        if cut.len() == s.len() {
            return None;
        }
        s[cut.len()..].parse().ok().map(|n| (cut, n))
    }
    let mut out = Vec::new();
    for r in requested {
        if let Some((lo, hi)) = r.split_once("..") {
            let (Some((pl, nl)), Some((ph, nh))) = (split_numeric(lo), split_numeric(hi)) else {
                return Err(usage(format!(
                    "bad field range `{r}`: expected e.g. X1..X8"
                )));
            };
            if pl != ph || nl > nh {
                return Err(usage(format!("bad field range `{r}`")));
            }
            for k in nl..=nh {
                out.push(format!("{pl}{k}"));
            }
        } else {
            out.push(r.clone());
        }
    }
    for n in &out {
        if lookup_field(problem, n).is_none() {
            let known: Vec<&str> = problem
                .fields
                .iter()
                .map(|(n, _)| n.as_str())
                .chain(problem.expects.iter().map(|(n, _)| n.as_str()))
                .collect();
            return Err(usage(format!(
                "unknown field `{n}` (declared: {})",
                known.join(", ")
            )));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// verify-symmetry
// ---------------------------------------------------------------------------

fn cmd_verify_symmetry(file: &Path, fields: &[String]) -> Result<Report, UsageError> {
    let (problem, bytes) = load(file)?;
    let names: Vec<String> = if fields.is_empty() {
        problem.fields.iter().map(|(n, _)| n.clone()).collect()
    } else {
        expand_names(fields, &problem)?
    };
    let mut rb = ReportBuilder::new("verify-symmetry", file.display().to_string(), &bytes);
    if names.is_empty() {
        rb.warn("fields", "no fields declared in the file");
        return Ok(rb.finish());
    }
    let ctx = &problem.context;
    for name in &names {
        let field = lookup_field(&problem, name).expect("validated above");
        match check_symmetry(field, &problem.pde, ctx) {
            Ok(SymmetryVerdict::Symmetry { lambda }) => rb.pass(
                format!("{name} is a symmetry"),
                format!("{name} = {field}\nλ = {lambda}"),
            ),
            Ok(SymmetryVerdict::NotSymmetry { remainder }) => rb.fail(
                format!("{name} is not a symmetry"),
                format!("{name} = {field}\nremainder (must vanish): {remainder}"),
            ),
            Err(e) => rb.fail(format!("{name} check errored"), e.to_string()),
        }
    }
    Ok(rb.finish())
}

// ---------------------------------------------------------------------------
// fundsol
// ---------------------------------------------------------------------------

fn cmd_fundsol(file: &Path) -> Result<Report, UsageError> {
    let (problem, bytes) = load(file)?;
    let mut rb = ReportBuilder::new("fundsol", file.display().to_string(), &bytes);
    let ctx = &problem.context;

    if problem.fields.is_empty() {
        rb.warn("fields", "no fields declared — nothing to constrain");
        return Ok(rb.finish());
    }
    let source: Vec<Symbol> = problem.decls.params().to_vec();
    if source.len() != problem.decls.vars().len() {
        return Err(usage(format!(
            "fundsol needs one source parameter per variable ({} vars, {} params)",
            problem.decls.vars().len(),
            source.len()
        )));
    }

    // Every declared field must be a symmetry, and we need its multiplier.
    let mut basis: Vec<VectorField> = Vec::new();
    let mut lambdas: Vec<Expression> = Vec::new();
    for (name, field) in &problem.fields {
        match check_symmetry(field, &problem.pde, ctx) {
            Ok(SymmetryVerdict::Symmetry { lambda }) => {
                rb.pass(
                    format!("{name} is a symmetry"),
                    format!("λ = {lambda}"),
                );
                basis.push(field.clone());
                lambdas.push(lambda);
            }
            Ok(SymmetryVerdict::NotSymmetry { remainder }) => {
                rb.fail(
                    format!("{name} is not a symmetry"),
                    format!("remainder (must vanish): {remainder}"),
                );
                return Ok(rb.finish());
            }
            Err(e) => {
                rb.fail(format!("{name} check errored"), e.to_string());
                return Ok(rb.finish());
            }
        }
    }

    let sys = match build_constraints(ctx, &basis, &lambdas, &source) {
        Ok(s) => s,
        Err(e) => {
            rb.fail("constraint system", e.to_string());
            return Ok(rb.finish());
        }
    };
    rb.pass(
        format!("point-source constraints ({} rows)", sys.rows().len()),
        format!("{sys}"),
    );

    let algebra = match solve_constraints(ctx, &sys) {
        Ok(a) => a,
        Err(e) => {
            rb.fail("constraint solve", e.to_string());
            return Ok(rb.finish());
        }
    };
    if algebra.relations().is_empty() {
        rb.pass("eliminated relations", "(none)");
    } else {
        let rels: Vec<String> = algebra.relations().iter().map(|r| r.to_string()).collect();
        rb.pass("eliminated relations", rels.join("\n"));
    }
    for w in algebra.warnings() {
        rb.warn(
            "generic-position pivot",
            format!(
                "row {} pivots on `{}`: valid while {}",
                w.row_label(),
                w.column(),
                w.condition()
            ),
        );
    }

    let field_names: Vec<&str> = problem.fields.iter().map(|(n, _)| n.as_str()).collect();
    let mut lines = Vec::new();
    for (k, (f, coefs)) in algebra
        .fields()
        .iter()
        .zip(algebra.coefficients())
        .enumerate()
    {
        let combo = linear_combo_string(coefs, &field_names);
        lines.push(format!("Z{} = {}", k + 1, combo));
        lines.push(format!("     = {f}"));
    }
    rb.pass(
        format!("source-fixing algebra has dimension {}", algebra.dimension()),
        lines.join("\n"),
    );

    if !problem.expects.is_empty() {
        let expected: Vec<VectorField> =
            problem.expects.iter().map(|(_, f)| f.clone()).collect();
        if algebra.dimension() == expected.len() {
            rb.pass(
                format!("dimension matches the {} expected generators", expected.len()),
                String::new(),
            );
        } else {
            rb.fail(
                "dimension mismatch",
                format!(
                    "derived {} generators, file expects {}",
                    algebra.dimension(),
                    expected.len()
                ),
            );
        }
        match same_span(ctx, algebra.fields(), &expected) {
            Ok(true) => rb.pass("derived basis spans the expected generators", String::new()),
            Ok(false) => rb.fail(
                "span mismatch",
                "the derived basis and the expected generators span different spaces",
            ),
            Err(e) => rb.fail("span comparison errored", e.to_string()),
        }
        for (name, field) in &problem.expects {
            let outcome = check_symmetry(field, &problem.pde, ctx).and_then(|verdict| {
                match verdict {
                    SymmetryVerdict::Symmetry { lambda } => {
                        satisfies_source_conditions(ctx, field, &lambda, &source)
                    }
                    SymmetryVerdict::NotSymmetry { .. } => Ok(false),
                }
            });
            match outcome {
                Ok(true) => rb.pass(
                    format!("{name} satisfies the point-source conditions"),
                    format!("{name} = {field}"),
                ),
                Ok(false) => rb.fail(
                    format!("{name} violates the point-source conditions"),
                    format!("{name} = {field}"),
                ),
                Err(e) => rb.fail(format!("{name} check errored"), e.to_string()),
            }
        }
    }
    Ok(rb.finish())
}

/// Render `Σ coefs[i]·names[i]`, skipping zeros.
fn linear_combo_string(coefs: &[Expression], names: &[&str]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (c, n) in coefs.iter().zip(names) {
        if matches!(c, Expression::Rational(r) if *r == rat(0, 1)) {
            continue;
        }
        if matches!(c, Expression::Rational(r) if *r == rat(1, 1)) {
            parts.push((*n).to_string());
        } else {
            parts.push(format!("({c})*{n}"));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

fn cmd_reduce(file: &Path) -> Result<Report, UsageError> {
    let (problem, bytes) = load(file)?;
    let Some(block) = &problem.ansatz else {
        return Err(usage(format!(
            "{} has no ansatz block (need `ansatz multiplier/similarity/profile`)",
            file.display()
        )));
    };
    let mut rb = ReportBuilder::new("reduce", file.display().to_string(), &bytes);
    let ctx = &problem.context;

    // Invariant checks: each named field must annihilate both u/F and ω.
    let names: Vec<String> = if block.fields.is_empty() {
        problem.expects.iter().map(|(n, _)| n.clone()).collect()
    } else {
        block.fields.clone()
    };
    let u_over_f = Expression::div(
        Expression::symbol(problem.decls.dep().clone()),
        block.multiplier.clone(),
    );
    let invariants = [("u/F", &u_over_f), ("ω", &block.similarity)];
    for name in &names {
        let Some(field) = lookup_field(&problem, name) else {
            rb.fail(format!("{name} not found"), "ansatz names an unknown field");
            continue;
        };
        for (label, inv) in &invariants {
            match check_invariant(ctx, field, inv) {
                Ok(true) => rb.pass(format!("{name} annihilates {label}"), String::new()),
                Ok(false) => rb.fail(
                    format!("{name} does not annihilate {label}"),
                    format!("{label} = {inv}"),
                ),
                Err(e) => rb.fail(format!("{name} invariant check errored"), e.to_string()),
            }
        }
    }

    let ansatz = match Ansatz::new(
        ctx,
        block.multiplier.clone(),
        block.similarity.clone(),
        Symbol::constant(&block.profile_name),
    ) {
        Ok(a) => a,
        Err(e) => {
            rb.fail("ansatz", e.to_string());
            return Ok(rb.finish());
        }
    };
    let ode = match substitute_ansatz(ctx, &problem.pde, &ansatz) {
        Ok(o) => o,
        Err(e) => {
            rb.fail("reduction", format!("substitution did not close: {e}"));
            return Ok(rb.finish());
        }
    };
    rb.pass(
        "reduction to an ordinary differential equation",
        format!("{ode}"),
    );

    // The file's profile is written in its own similarity symbol; rebase it
    // onto the ODE's variable before the residual check.
    let file_omega = Symbol::constant(&block.similarity_name);
    let rebased = block.profile.substitute(
        ctx,
        &[(file_omega.clone(), Expression::symbol(ode.omega().clone()))],
    );
    match rebased {
        Ok(profile) => match ode.is_solution(ctx, &profile) {
            Ok(true) => rb.pass(
                format!("{} solves the reduced equation", block.profile_name),
                format!("{} = {profile}", block.profile_name),
            ),
            Ok(false) => {
                let residual = ode
                    .residual_for(ctx, &profile)
                    .map(|r| r.to_string())
                    .unwrap_or_else(|e| e.to_string());
                rb.fail(
                    format!("{} fails the reduced equation", block.profile_name),
                    format!("residual: {residual}"),
                );
            }
            Err(e) => rb.fail("profile residual errored", e.to_string()),
        },
        Err(e) => rb.fail("profile rebase errored", e.to_string()),
    }

    // Assemble u = F·φ(ω) and verify it against the original equation.
    match ansatz.apply_profile(ctx, &block.profile, &file_omega) {
        Ok(candidate) => match verify_solution(ctx, &problem.pde, &candidate) {
            Ok(true) => rb.pass(
                "assembled solution solves the equation",
                format!("u = {candidate}"),
            ),
            Ok(false) => rb.fail(
                "assembled solution fails the equation",
                format!("u = {candidate}"),
            ),
            Err(e) => rb.fail("solution verification errored", e.to_string()),
        },
        Err(e) => rb.fail("solution assembly errored", e.to_string()),
    }
    Ok(rb.finish())
}

// ---------------------------------------------------------------------------
// verify-kernel
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_verify_kernel(
    file: &Path,
    tol: Option<f64>,
    points: Option<usize>,
    times: Option<&str>,
    c1: Option<f64>,
    seed: Option<u64>,
) -> Result<Report, UsageError> {
    let (problem, bytes) = load(file)?;
    if problem.decls.vars().len() != 3 {
        return Err(usage(
            "verify-kernel applies to the three-variable model equation",
        ));
    }
    let Some(src) = &problem.kernel_source else {
        return Err(usage(format!(
            "{} has no `kernel source:` line",
            file.display()
        )));
    };
    let mut p = KernelParams::new(src[0], src[1], src[2]);
    if let Some(c1) = c1 {
        p = p.with_c1(c1);
    }
    let ode_tol = tol.unwrap_or(1e-12);
    if ode_tol.is_nan() || ode_tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    let seed = seed.unwrap_or(7);
    let q = QuadratureSpec::gauss_hermite(points.unwrap_or(20))
        .map_err(|e| usage(format!("--points: {e}")))?;
    let ck_q = QuadratureSpec::gauss_hermite(points.unwrap_or(30))
        .map_err(|e| usage(format!("--points: {e}")))?;
    let (t1, t2, t3) = match times {
        None => (p.t0, p.t0 + 0.5, p.t0 + 1.0),
        Some(csv) => {
            let parsed: Result<Vec<f64>, _> =
                csv.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let v = parsed.map_err(|e| usage(format!("--times: {e}")))?;
            if v.len() != 3 {
                return Err(usage("--times needs exactly three values t1,t2,t3"));
            }
            if !(v[0] < v[1] && v[1] < v[2]) {
                return Err(usage(format!(
                    "--times must be strictly increasing, got {},{},{}",
                    v[0], v[1], v[2]
                )));
            }
            (v[0], v[1], v[2])
        }
    };

    let mut rb = ReportBuilder::new("verify-kernel", file.display().to_string(), &bytes);

    // Unit mass across time scales.
    for tau in [1e-3, 0.1, 1.0, 10.0] {
        match normalization(&p, p.t0 + tau, &q) {
            Ok(mass) => rb.metric(
                (mass - 1.0).abs() <= 1e-8,
                format!("unit mass at τ = {tau}"),
                format!("measured mass {mass:.10}"),
                mass,
                1e-8,
            ),
            Err(e) => rb.fail(format!("mass at τ = {tau} errored"), e.to_string()),
        }
    }

    // Gaussian moments at τ = 1.
    match moments(&p, p.t0 + 1.0, &q) {
        Ok(m) => {
            let expected = [
                ("mean_x", m.mean_x, p.x0),
                ("mean_y", m.mean_y, p.y0 + p.x0),
                ("var_x", m.var_x, 2.0),
                ("cov_xy", m.cov_xy, 1.0),
                ("var_y", m.var_y, 2.0 / 3.0),
            ];
            let mut worst = 0.0f64;
            let mut lines = Vec::new();
            for (name, got, want) in expected {
                let dev = (got - want).abs() / want.abs().max(1.0);
                worst = worst.max(dev);
                lines.push(format!("{name} = {got:.12} (expected {want:.12})"));
            }
            rb.metric(
                worst <= 1e-8,
                "moments at τ = 1 match the inverted quadratic form",
                lines.join("\n"),
                worst,
                1e-8,
            );
        }
        Err(e) => rb.fail("moments errored", e.to_string()),
    }

    // Interior residual of the closed form under central differences.
    let pts = sample_points(&p, 100, seed, (0.5, 2.0), 2.0);
    match residual_fd(&p, &pts, 1e-4) {
        Ok(r) => rb.metric(
            r <= 1e-5,
            "finite-difference residual on 100 sampled points",
            format!("max |u_t - u_xx + x*u_y| = {r:.3e} at h = 1e-4"),
            r,
            1e-5,
        ),
        Err(e) => rb.fail("residual errored", e.to_string()),
    }

    // Composition over an intermediate time.
    let ck_pts: Vec<(f64, f64)> = {
        let tau = (t3 - t1).max(1e-3);
        sample_points(&p, 10, seed.wrapping_add(1), (0.9 * tau, tau), 1.5)
            .into_iter()
            .map(|(_, x, y)| (x, y))
            .collect()
    };
    match chapman_kolmogorov(&p, (t1, t2, t3), &ck_pts, &ck_q) {
        Ok(err) => rb.metric(
            err <= 1e-6,
            format!("composition over t = ({t1}, {t2}, {t3})"),
            format!("max defect {err:.3e} on 10 points"),
            err,
            1e-6,
        ),
        Err(e) => rb.fail("composition errored", e.to_string()),
    }

    // Flow invariance of the kernel graph under the source generators.
    let flow_names: Vec<String> = match &problem.ansatz {
        Some(b) if !b.fields.is_empty() => b.fields.clone(),
        _ => problem.expects.iter().map(|(n, _)| n.clone()).collect(),
    };
    if flow_names.is_empty() {
        rb.warn(
            "flow invariance",
            "no expected generators declared — nothing to flow along",
        );
    } else {
        let flow_pts = sample_points(&p, 20, seed.wrapping_add(2), (0.5, 2.0), 2.0);
        for name in &flow_names {
            let Some(field) = lookup_field(&problem, name) else {
                rb.fail(format!("{name} not found"), "unknown field in ansatz block");
                continue;
            };
            for a in [0.2, -0.2, 0.3, -0.3] {
                match flow_invariance(field, a, &p, &flow_pts, ode_tol) {
                    Ok(err) => rb.metric(
                        err <= 1e-9,
                        format!("flow of {name} at a = {a}"),
                        format!("max |u(flowed) - kernel(flowed)| = {err:.3e} on 20 points"),
                        err,
                        1e-9,
                    ),
                    Err(e) => rb.fail(
                        format!("flow of {name} at a = {a} errored"),
                        e.to_string(),
                    ),
                }
            }
        }
    }
    Ok(rb.finish())
}

// ---------------------------------------------------------------------------
// commutators
// ---------------------------------------------------------------------------

fn cmd_commutators(file: &Path) -> Result<Report, UsageError> {
    let (problem, bytes) = load(file)?;
    let mut rb = ReportBuilder::new("commutators", file.display().to_string(), &bytes);
    let ctx = &problem.context;
    if problem.fields.len() < 2 {
        rb.warn("fields", "need at least two fields for a commutator table");
        return Ok(rb.finish());
    }
    let names: Vec<&str> = problem.fields.iter().map(|(n, _)| n.as_str()).collect();
    let basis: Vec<&VectorField> = problem.fields.iter().map(|(_, f)| f).collect();

    // Exact sample evaluations propose the structure constants; a symbolic
    // zero check certifies them afterwards, so sampling never decides.
    let samples: [(i64, i64, i64); 6] = [
        (2, 3, 5),
        (1, -1, 2),
        (3, 1, -2),
        (5, 2, 1),
        (-1, 4, 3),
        (2, -3, -1),
    ];
    let columns: Option<Vec<Vec<Rat>>> = basis
        .iter()
        .map(|f| eval_components(ctx, f, &problem.decls, &samples))
        .collect();

    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let name = format!("[{}, {}]", names[i], names[j]);
            let bracket = match basis[i].commutator(ctx, basis[j]) {
                Ok(b) => b,
                Err(e) => {
                    rb.fail(format!("{name} errored"), e.to_string());
                    continue;
                }
            };
            match bracket.is_zero(ctx) {
                Ok(true) => {
                    rb.pass(format!("{name} = 0"), String::new());
                    continue;
                }
                Ok(false) => {}
                Err(e) => {
                    rb.fail(format!("{name} errored"), e.to_string());
                    continue;
                }
            }
            let Some(cols) = &columns else {
                rb.warn(
                    format!("{name} = {bracket}"),
                    "structure constants skipped: field components are not \
                     constant-coefficient polynomials",
                );
                continue;
            };
            let target = eval_components(ctx, &bracket, &problem.decls, &samples);
            let combo = target
                .and_then(|t| solve_exact(cols, &t))
                .and_then(|c| certify_combo(ctx, &basis, &c, &bracket).then_some(c));
            match combo {
                Some(c) => {
                    let exprs: Vec<Expression> =
                        c.iter().map(|r| Expression::Rational(r.clone())).collect();
                    rb.pass(
                        format!("{name} = {}", linear_combo_string(&exprs, &names)),
                        format!("{name} = {bracket}"),
                    );
                }
                None => rb.fail(
                    format!("{name} is outside the span of the declared fields"),
                    format!("{name} = {bracket}"),
                ),
            }
        }
    }
    Ok(rb.finish())
}

/// Evaluate all components (ξ¹..ξⁿ, α) of a field at integer sample points,
/// exactly. `None` when a component does not collapse to a rational number
/// (free parameters remain).
fn eval_components(
    ctx: &Context,
    field: &VectorField,
    decls: &liefund_core::parser::Declarations,
    samples: &[(i64, i64, i64)],
) -> Option<Vec<Rat>> {
    let vars = decls.vars();
    let mut out = Vec::new();
    for &(a, b, c) in samples {
        let binds: Vec<(Symbol, Expression)> = vars
            .iter()
            .cloned()
            .zip([a, b, c].map(Expression::integer))
            .collect();
        for component in field.xi().iter().chain(std::iter::once(field.alpha())) {
            match component.substitute(ctx, &binds).ok()? {
                Expression::Rational(r) => out.push(r),
                _ => return None,
            }
        }
    }
    Some(out)
}

/// Solve `Σ_k x_k·cols[k] = target` exactly over the rationals (free
/// variables pinned to zero); `None` if inconsistent.
fn solve_exact(cols: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let n = cols.len();
    let rows = target.len();
    let zero = rat(0, 1);
    // Augmented row-major matrix.
    let mut m: Vec<Vec<Rat>> = (0..rows)
        .map(|r| {
            let mut row: Vec<Rat> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut row = 0;
    for col in 0..n {
        let Some(pr) = (row..rows).find(|&r| m[r][col] != zero) else {
            continue;
        };
        m.swap(row, pr);
        let inv = m[row][col].clone();
        for entry in &mut m[row][col..=n] {
            *entry = entry.clone() / inv.clone();
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && other[col] != zero {
                let f = other[col].clone();
                for (entry, pv) in other[col..=n].iter_mut().zip(&pivot_row[col..=n]) {
                    *entry = entry.clone() - f.clone() * pv.clone();
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == rows {
            break;
        }
    }
    // Inconsistent rows: all-zero coefficients with nonzero right side.
    for r in &m {
        if r[..n].iter().all(|v| *v == zero) && r[n] != zero {
            return None;
        }
    }
    let mut x = vec![zero.clone(); n];
    for (col, pr) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pr {
            x[col] = m[*r][n].clone();
        }
    }
    Some(x)
}

/// Symbolically certify `Σ c_k·basis[k] == bracket`.
fn certify_combo(
    ctx: &Context,
    basis: &[&VectorField],
    coefs: &[Rat],
    bracket: &VectorField,
) -> bool {
    let zero = rat(0, 1);
    let mut acc: Option<VectorField> = None;
    for (f, c) in basis.iter().zip(coefs) {
        if *c == zero {
            continue;
        }
        let term = match f.scale(ctx, &Expression::Rational(c.clone())) {
            Ok(t) => t,
            Err(_) => return false,
        };
        acc = Some(match acc {
            None => term,
            Some(a) => match a.add(ctx, &term) {
                Ok(s) => s,
                Err(_) => return false,
            },
        });
    }
    let diff = match acc {
        None => bracket.clone(),
        Some(a) => match bracket.neg(ctx).and_then(|nb| a.add(ctx, &nb)) {
            Ok(d) => d,
            Err(_) => return false,
        },
    };
    diff.is_zero(ctx).unwrap_or(false)
}
