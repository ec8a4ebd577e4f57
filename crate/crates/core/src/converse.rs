//! Converse bounds: chord sup bounds, the power constant
//! `C(lambda, m, M, p, q)`, the `#_r` geometric mean and its corollary,
//! Li-Mathias type lower bounds, and tangent-line lower bounds.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{
    apply_function, loewner_leq_abs, matrix_power, ComparisonVerdict, HermitianMatrix, Tolerance, ENDPOINT_SLACK,
};
use crate::maps::{integrate_field, PositiveMapField, VectorField, VECTOR_MASS_TOL};
use crate::scalar::{check_interval, chord, grid, Interval, ScalarFunctionSpec, Subgradient};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sup,
    Inf,
}

impl Mode {
    fn sign(self) -> f64 {
        match self {
            Mode::Sup => 1.0,
            Mode::Inf => -1.0,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sup => "sup",
            Mode::Inf => "inf",
        })
    }
}

/// Extremum of a scalar function over `[m, M]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarBound {
    pub value: f64,
    /// Location of the extremum (named for the sup case; also used for inf).
    pub argmax_z: f64,
    pub grid_size: usize,
    /// The golden-section pass improved on the best grid value.
    pub refined: bool,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizerConfig {
    pub grid_size: usize,
    pub z_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_size: 10001,
            z_tol: 1e-12,
        }
    }
}

pub fn optimize_scalar(h: impl Fn(f64) -> f64, m: f64, big_m: f64, mode: Mode) -> Result<ScalarBound> {
    optimize_scalar_with(h, m, big_m, mode, OptimizerConfig::default())
}

/// Dense grid search followed by golden-section refinement on the cells
/// adjacent to the best grid point. Ties go to the smallest `z`.
pub fn optimize_scalar_with(
    h: impl Fn(f64) -> f64,
    m: f64,
    big_m: f64,
    mode: Mode,
    cfg: OptimizerConfig,
) -> Result<ScalarBound> {
    check_interval(m, big_m)?;
    let s = mode.sign();
    let zs: Vec<f64> = grid(m, big_m, cfg.grid_size).collect();
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &z) in zs.iter().enumerate() {
        let v = h(z);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { z, value: v });
        }
        if s * v > best {
            best = s * v;
            best_i = i;
        }
    }
    let mut bound = ScalarBound {
        value: s * best,
        argmax_z: zs[best_i],
        grid_size: zs.len(),
        refined: false,
        mode,
    };

    let lo = zs[best_i.saturating_sub(1)];
    let hi = zs[(best_i + 1).min(zs.len() - 1)];
    let (z, v) = golden_section(|z| s * h(z), lo, hi, cfg.z_tol);
    if v.is_finite() && v > best {
        bound.value = s * v;
        bound.argmax_z = z;
        bound.refined = true;
    }
    Ok(bound)
}

// Maximizes `g` on `[a, b]`.
fn golden_section(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    if gc >= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// The function `F(u, v)` of two real variables, operator monotone in `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BivariateSpec {
    /// `u - lambda v`.
    Difference { lambda: f64 },
    /// `u / v` (operator form `B^{-1/2} A B^{-1/2}`).
    Ratio,
    /// `u^{1/q} - lambda v`.
    PowerProbe { q: f64, lambda: f64 },
    /// `a u + b v + c` with `a >= 0`.
    Affine { a: f64, b: f64, c: f64 },
}

impl BivariateSpec {
    pub fn difference() -> Self {
        BivariateSpec::Difference { lambda: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} = {x}")))
            }
        };
        match *self {
            BivariateSpec::Difference { lambda } => finite(lambda, "lambda"),
            BivariateSpec::Ratio => Ok(()),
            BivariateSpec::PowerProbe { q, lambda } => {
                finite(lambda, "lambda")?;
                if !(q >= 1.0) || !q.is_finite() {
                    return Err(Error::InvalidParameter(format!("probe exponent q = {q} must be >= 1")));
                }
                Ok(())
            }
            BivariateSpec::Affine { a, b, c } => {
                finite(a, "a")?;
                finite(b, "b")?;
                finite(c, "c")?;
                if a < 0.0 {
                    return Err(Error::FlagViolation(format!(
                        "affine F with a = {a} is not monotone in its first argument"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Parses `diff[:lambda]`, `ratio`, `probe:q,lambda`, `affine:a,b,c`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n.trim(), r),
            None => (text.trim(), ""),
        };
        let nums: Vec<f64> = if rest.trim().is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("cannot parse `{s}` in `{text}`")))
                })
                .collect::<Result<_>>()?
        };
        let spec = match (name, nums.as_slice()) {
            ("diff" | "difference", []) => BivariateSpec::Difference { lambda: 1.0 },
            ("diff" | "difference", [l]) => BivariateSpec::Difference { lambda: *l },
            ("ratio", []) => BivariateSpec::Ratio,
            ("probe" | "linear_probe", [q, l]) => BivariateSpec::PowerProbe { q: *q, lambda: *l },
            ("affine", [a, b, c]) => BivariateSpec::Affine { a: *a, b: *b, c: *c },
            _ => return Err(Error::InvalidParameter(format!("unknown F `{text}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> String {
        match *self {
            BivariateSpec::Difference { lambda } => format!("u - {lambda} v"),
            BivariateSpec::Ratio => "u / v".into(),
            BivariateSpec::PowerProbe { q, lambda } => format!("u^(1/{q}) - {lambda} v"),
            BivariateSpec::Affine { a, b, c } => format!("{a} u + {b} v + {c}"),
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match *self {
            BivariateSpec::Difference { lambda } => u - lambda * v,
            BivariateSpec::Ratio => u / v,
            BivariateSpec::PowerProbe { q, lambda } => u.max(0.0).powf(1.0 / q) - lambda * v,
            BivariateSpec::Affine { a, b, c } => a * u + b * v + c,
        }
    }

    /// The set `U` of admissible first arguments.
    pub fn first_domain(&self) -> Interval {
        match self {
            BivariateSpec::PowerProbe { .. } => Interval::nonnegative(),
            _ => Interval::real_line(),
        }
    }

    /// The set `V` of admissible second arguments.
    pub fn second_domain(&self) -> Interval {
        match self {
            BivariateSpec::Ratio => Interval::positive(),
            _ => Interval::real_line(),
        }
    }

    /// Finite-difference check that `u -> F(u, v)` is non-decreasing on a
    /// grid over `[u_lo, u_hi] x [v_lo, v_hi]`.
    pub fn verify_monotone_in_first(&self, u: (f64, f64), v: (f64, f64)) -> bool {
        let us: Vec<f64> = grid(u.0, u.1, 41).collect();
        grid(v.0, v.1, 41).all(|vv| {
            us.windows(2)
                .all(|w| self.eval(w[1], vv) - self.eval(w[0], vv) >= -1e-12 * self.eval(w[0], vv).abs().max(1.0))
        })
    }

    /// `F[A, B]` for the builtin shapes, using functional calculus in each
    /// argument separately.
    pub fn operator_eval(&self, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
        if a.dim() != b.dim() {
            return Err(Error::DimMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        match *self {
            BivariateSpec::Difference { lambda } => Ok(a - &(b * lambda)),
            BivariateSpec::Ratio => {
                let b_inv_sqrt = matrix_power(b, -0.5)?;
                a.congruence(b_inv_sqrt.as_matrix())
            }
            BivariateSpec::PowerProbe { q, lambda } => {
                let sd = a.eig()?;
                let scale = sd.max().abs().max(1.0);
                if sd.min() < -ENDPOINT_SLACK * scale {
                    return Err(Error::DomainViolation(format!(
                        "first argument has eigenvalue {} < 0",
                        sd.min()
                    )));
                }
                let root = sd.reconstruct_with(|x| x.max(0.0).powf(1.0 / q));
                Ok(&root - &(b * lambda))
            }
            BivariateSpec::Affine { a: ca, b: cb, c } => {
                let n = a.dim();
                Ok(&(&(a * ca) + &(b * cb)) + &HermitianMatrix::scalar(n, c))
            }
        }
    }
}

fn check_range_in(what: &str, values: impl Iterator<Item = f64>, domain: Interval) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if !domain.contains(v) {
            return Err(Error::DomainViolation(format!(
                "{what} takes value {v} outside {domain}"
            )));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

const RANGE_GRID: usize = 1001;

// f([m,M]) in U, g([m,M]) in V, F monotone in u on the observed ranges.
fn check_hypotheses(
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
    m: f64,
    big_m: f64,
) -> Result<()> {
    check_interval(m, big_m)?;
    big_f.validate()?;
    for func in [f, g] {
        if !func.domain().contains_interval(m, big_m) {
            return Err(Error::DomainViolation(format!(
                "[{m}, {big_m}] is not inside the domain {} of `{}`",
                func.domain(),
                func.name()
            )));
        }
    }
    let u = check_range_in("f", grid(m, big_m, RANGE_GRID).map(|z| f.eval(z)), big_f.first_domain())?;
    let v = check_range_in(
        "g",
        grid(m, big_m, RANGE_GRID).map(|z| g.eval(z)),
        big_f.second_domain(),
    )?;
    if !big_f.verify_monotone_in_first(u, v) {
        return Err(Error::FlagViolation(format!(
            "F = {} is not monotone in u",
            big_f.name()
        )));
    }
    Ok(())
}

/// `sup_{m<=z<=M} F[alpha_f z + beta_f, g(z)]` for convex `f`; the infimum
/// for concave `f`.
pub fn mond_pecaric_sup(
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
    m: f64,
    big_m: f64,
) -> Result<ScalarBound> {
    let mode = if f.flags().convex {
        Mode::Sup
    } else if f.flags().concave {
        Mode::Inf
    } else {
        return Err(Error::FlagViolation(format!(
            "`{}` is neither convex nor concave",
            f.name()
        )));
    };
    check_hypotheses(f, g, big_f, m, big_m)?;
    let c = chord(f, m, big_m)?;
    optimize_scalar(|z| big_f.eval(c.at(z), g.eval(z)), m, big_m, mode)
}

/// Operator-side evaluation of a converse inequality: `F[int phi(f(x)), g(int phi(x))]`
/// compared against a scalar bound.
#[derive(Clone, Debug)]
pub struct ConverseReport {
    pub bound: ScalarBound,
    pub evaluation: HermitianMatrix,
    pub verdict: ComparisonVerdict,
}

/// `F[int phi_t(f(x_t)), g(int phi_t(x_t))]`.
pub fn operator_f_value(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
) -> Result<HermitianMatrix> {
    field.check_unital()?;
    let a = integrate_field(field, Some(f))?;
    let b = apply_function(g, &integrate_field(field, None)?)?;
    big_f.operator_eval(&a, &b)
}

fn compare_with_bound(evaluation: HermitianMatrix, bound: ScalarBound, tol: &Tolerance) -> Result<ConverseReport> {
    let n = evaluation.dim();
    let level = HermitianMatrix::scalar(n, bound.value);
    let scale = evaluation.operator_norm()?.max(bound.value.abs());
    let abs_tol = tol.absolute(scale);
    let verdict = match bound.mode {
        Mode::Sup => loewner_leq_abs(&evaluation, &level, abs_tol)?,
        Mode::Inf => loewner_leq_abs(&level, &evaluation, abs_tol)?,
    };
    Ok(ConverseReport {
        bound,
        evaluation,
        verdict,
    })
}

/// Checks `F[...] <= sup-bound * 1` (or `>= inf-bound * 1` for concave `f`).
pub fn verify_converse(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
    tol: &Tolerance,
) -> Result<ConverseReport> {
    let (m, big_m) = field.interval();
    let bound = mond_pecaric_sup(f, g, big_f, m, big_m)?;
    let e = operator_f_value(field, f, g, big_f)?;
    compare_with_bound(e, bound, tol)
}

/// Which of the three pieces of `C(lambda, m, M, p, q)` applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerBranch {
    /// Maximum of `H` at `z = M`.
    Upper,
    /// Interior critical point.
    Interior,
    /// Maximum of `H` at `z = m`.
    Lower,
}

fn check_power_params(lambda: f64, m: f64, big_m: f64, p: f64, q: f64) -> Result<()> {
    let all_finite = [lambda, m, big_m, p, q].iter().all(|x| x.is_finite());
    if !all_finite || lambda < 0.0 || m <= 0.0 || m >= big_m || p < 1.0 || q < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "power constant needs lambda >= 0, 0 < m < M, p >= 1, q >= 1 \
             (got lambda = {lambda}, m = {m}, M = {big_m}, p = {p}, q = {q})"
        )));
    }
    Ok(())
}

/// Chord coefficients of `z^p` on `[m, M]`.
fn power_chord(m: f64, big_m: f64, p: f64) -> (f64, f64) {
    let (mp, bp) = (m.powf(p), big_m.powf(p));
    ((bp - mp) / (big_m - m), (big_m * mp - m * bp) / (big_m - m))
}

/// `H(z) = (alpha_p z + beta_p)^{1/q} - lambda z`, whose supremum over
/// `[m, M]` is the power constant.
pub fn power_objective(lambda: f64, m: f64, big_m: f64, p: f64, q: f64) -> impl Fn(f64) -> f64 {
    let (alpha, beta) = power_chord(m, big_m, p);
    move |z| (alpha * z + beta).max(0.0).powf(1.0 / q) - lambda * z
}

/// Branch thresholds `(alpha_p/q) M^{p(1/q-1)} <= (alpha_p/q) m^{p(1/q-1)}`.
pub fn power_thresholds(m: f64, big_m: f64, p: f64, q: f64) -> (f64, f64) {
    let (alpha, _) = power_chord(m, big_m, p);
    let e = p * (1.0 / q - 1.0);
    (alpha / q * big_m.powf(e), alpha / q * m.powf(e))
}

pub fn power_branch(lambda: f64, m: f64, big_m: f64, p: f64, q: f64) -> Result<PowerBranch> {
    check_power_params(lambda, m, big_m, p, q)?;
    let (t1, t2) = power_thresholds(m, big_m, p, q);
    Ok(if lambda <= t1 {
        PowerBranch::Upper
    } else if lambda < t2 && q > 1.0 {
        PowerBranch::Interior
    } else {
        PowerBranch::Lower
    })
}

/// Evaluates one branch formula regardless of whether its condition holds.
pub fn power_branch_value(branch: PowerBranch, lambda: f64, m: f64, big_m: f64, p: f64, q: f64) -> f64 {
    match branch {
        PowerBranch::Upper => big_m * (big_m.powf(p / q - 1.0) - lambda),
        PowerBranch::Lower => m * (m.powf(p / q - 1.0) - lambda),
        PowerBranch::Interior => {
            let (alpha, beta) = power_chord(m, big_m, p);
            (q - 1.0) / q * (q / alpha * lambda).powf(1.0 / (1.0 - q)) + beta / alpha * lambda
        }
    }
}

/// `C(lambda, m, M, p, q) = sup_{m<=z<=M} H(z)` in closed form. For `q = 1`
/// only the endpoint branches are used.
pub fn power_constant(lambda: f64, m: f64, big_m: f64, p: f64, q: f64) -> Result<f64> {
    let branch = power_branch(lambda, m, big_m, p, q)?;
    Ok(power_branch_value(branch, lambda, m, big_m, p, q))
}

#[derive(Clone, Copy, Debug)]
pub struct PowerReport {
    pub lhs: f64,
    pub bound: f64,
    pub verdict: ComparisonVerdict,
}

/// `(sum w <A^p x, x>)^{1/q} - lambda sum w <A x, x> <= C(lambda, m, M, p, q)`.
pub fn verify_rev0(vf: &VectorField, lambda: f64, p: f64, q: f64) -> Result<PowerReport> {
    let (m, big_m) = vf.interval();
    check_power_params(lambda, m, big_m, p, q)?;
    vf.check_spectra()?;
    let ap = vf.expectation(|a| matrix_power(a, p))?;
    let a1 = vf.expectation(|a| Ok(a.clone()))?;
    let lhs = ap.max(0.0).powf(1.0 / q) - lambda * a1;
    let bound = power_constant(lambda, m, big_m, p, q)?;
    Ok(PowerReport {
        lhs,
        bound,
        verdict: ComparisonVerdict::scalar(lhs, bound, 1e-9 * bound.abs().max(1.0)),
    })
}

fn check_positive_definite(a: &HermitianMatrix) -> Result<()> {
    let ev = a.eigenvalues()?;
    let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
    if ev[0] <= 0.0 || ev[0] < 1e-10 * norm {
        return Err(Error::NotPositiveDefinite { min_eig: ev[0] });
    }
    Ok(())
}

/// `A #_r B = A^{1/2} (A^{-1/2} B A^{-1/2})^r A^{1/2}`.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix, r: f64) -> Result<HermitianMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "mean weight r = {r} must lie in [0, 1]"
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    check_positive_definite(a)?;
    check_positive_definite(b)?;
    let a_half = matrix_power(a, 0.5)?;
    let a_inv_half = matrix_power(a, -0.5)?;
    let inner = b.congruence(a_inv_half.as_matrix())?;
    let inner_r = matrix_power(&inner, r)?;
    inner_r.congruence(a_half.as_matrix())
}

#[derive(Clone, Debug)]
pub struct Rev3Point {
    pub weight: f64,
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    pub vector: Vec<Complex64>,
}

/// Declared bounds `m1 <= A_t <= M1`, `m2 <= B_t <= M2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds {
    pub m1: f64,
    pub big_m1: f64,
    pub m2: f64,
    pub big_m2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rev3Params {
    pub lambda: f64,
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl Rev3Params {
    /// Fills in the conjugate exponent `q = p / (p - 1)`.
    pub fn with_conjugate(lambda: f64, s: f64, p: f64) -> Self {
        Self {
            lambda,
            s,
            p,
            q: p / (p - 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Rev3Report {
    pub lhs: f64,
    /// `C(lambda, m, M, s, p) * M2^q`.
    pub bound: f64,
    /// `C(lambda, m, M, s, p) * sum w <B^q x, x>`, the bound before the
    /// final estimate by `M2^q`.
    pub intermediate_bound: f64,
    pub constant: f64,
    /// `(m1^{p/s} / M2^{q/s}, M1^{p/s} / m2^{q/s})`.
    pub sandwich: (f64, f64),
    pub verdict: ComparisonVerdict,
    pub intermediate_verdict: ComparisonVerdict,
}

fn check_spectrum_in(a: &HermitianMatrix, lo: f64, hi: f64, what: &str) -> Result<()> {
    let ev = a.eigenvalues()?;
    let slack = ENDPOINT_SLACK * hi.abs().max(1.0);
    if ev[0] < lo - slack || ev[ev.len() - 1] > hi + slack {
        return Err(Error::SpectralSandwichViolated(format!(
            "{what} has spectrum [{}, {}] outside [{lo}, {hi}]",
            ev[0],
            ev[ev.len() - 1]
        )));
    }
    Ok(())
}

/// Both sides of the geometric-mean corollary of the power constant, with
/// no check on the sign of `C`. See [`verify_rev3`].
pub fn evaluate_rev3(points: &[Rev3Point], bounds: SpectralBounds, params: Rev3Params) -> Result<Rev3Report> {
    let Rev3Params { lambda, s, p, q } = params;
    let SpectralBounds { m1, big_m1, m2, big_m2 } = bounds;
    if !(p > 1.0) || !q.is_finite() || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
        return Err(Error::ConjugateExponentViolation { p, q });
    }
    if !(s >= 1.0) || !(lambda >= 0.0) || !s.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need s >= 1 and lambda >= 0 (s = {s}, lambda = {lambda})"
        )));
    }
    if !(0.0 < m1 && m1 < big_m1 && 0.0 < m2 && m2 < big_m2) || !big_m1.is_finite() || !big_m2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need 0 < m1 < M1 and 0 < m2 < M2 (got {m1}, {big_m1}, {m2}, {big_m2})"
        )));
    }
    if points.is_empty() {
        return Err(Error::Empty);
    }
    let mass: f64 = points
        .iter()
        .map(|pt| pt.weight * pt.vector.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    if (mass - 1.0).abs() > VECTOR_MASS_TOL {
        return Err(Error::NotNormalized { mass });
    }

    let lo = m1.powf(p / s) / big_m2.powf(q / s);
    let hi = big_m1.powf(p / s) / m2.powf(q / s);
    let mut sum_ap = 0.0;
    let mut sum_bq = 0.0;
    let mut sum_mean = 0.0;
    for (i, pt) in points.iter().enumerate() {
        if pt.a.dim() != pt.b.dim() || pt.vector.len() != pt.a.dim() {
            return Err(Error::DimMismatch {
                expected: pt.a.dim(),
                found: pt.b.dim().max(pt.vector.len()),
            });
        }
        check_spectrum_in(&pt.a, m1, big_m1, &format!("A at point {i}"))?;
        check_spectrum_in(&pt.b, m2, big_m2, &format!("B at point {i}"))?;
        let ap = matrix_power(&pt.a, p)?;
        let bq = matrix_power(&pt.b, q)?;
        let b_inv_half_q = matrix_power(&pt.b, -q / 2.0)?;
        let inner = ap.congruence(b_inv_half_q.as_matrix())?;
        let c_t = matrix_power(&inner, 1.0 / s)?;
        let rel = hi * 1e-10;
        let ev = c_t.eigenvalues()?;
        if ev[0] < lo - rel || ev[ev.len() - 1] > hi + rel {
            return Err(Error::SpectralSandwichViolated(format!(
                "C_t at point {i} has spectrum [{}, {}] outside [{lo}, {hi}]",
                ev[0],
                ev[ev.len() - 1]
            )));
        }
        let mean = geometric_mean(&bq, &ap, 1.0 / s)?;
        sum_ap += pt.weight * ap.quadratic_form(&pt.vector)?;
        sum_bq += pt.weight * bq.quadratic_form(&pt.vector)?;
        sum_mean += pt.weight * mean.quadratic_form(&pt.vector)?;
    }
    let lhs = sum_ap.max(0.0).powf(1.0 / p) * sum_bq.max(0.0).powf(1.0 / q) - lambda * sum_mean;
    let constant = power_constant(lambda, lo, hi, s, p)?;
    let bound = constant * big_m2.powf(q);
    let intermediate_bound = constant * sum_bq;
    let tol = |b: f64| 1e-9 * b.abs().max(lhs.abs()).max(1.0);
    Ok(Rev3Report {
        lhs,
        bound,
        intermediate_bound,
        constant,
        sandwich: (lo, hi),
        verdict: ComparisonVerdict::scalar(lhs, bound, tol(bound)),
        intermediate_verdict: ComparisonVerdict::scalar(lhs, intermediate_bound, tol(intermediate_bound)),
    })
}

/// The geometric-mean corollary of the power constant.
///
/// Returns [`Error::NegativeConstant`] when `C < 0`: the last step of the
/// estimate replaces `sum w <B^q x, x>` by its upper bound `M2^q`, which is
/// only an upper estimate when `C >= 0`. The report's `intermediate_bound`
/// is valid for all `lambda >= 0`.
pub fn verify_rev3(points: &[Rev3Point], bounds: SpectralBounds, params: Rev3Params) -> Result<Rev3Report> {
    let report = evaluate_rev3(points, bounds, params)?;
    if report.constant < 0.0 {
        return Err(Error::NegativeConstant(report.constant));
    }
    Ok(report)
}

/// `inf_{m<=z<=M} F[f(z), g(z)]` for operator convex `f` (sup for operator
/// concave `f`).
pub fn li_mathias_inf(
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
    m: f64,
    big_m: f64,
) -> Result<ScalarBound> {
    let mode = if f.flags().operator_convex {
        Mode::Inf
    } else if f.flags().operator_concave {
        Mode::Sup
    } else {
        return Err(Error::FlagViolation(format!(
            "`{}` is neither operator convex nor operator concave",
            f.name()
        )));
    };
    check_hypotheses(f, g, big_f, m, big_m)?;
    optimize_scalar(|z| big_f.eval(f.eval(z), g.eval(z)), m, big_m, mode)
}

pub fn verify_lm(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
    tol: &Tolerance,
) -> Result<ConverseReport> {
    let (m, big_m) = field.interval();
    let bound = li_mathias_inf(f, g, big_f, m, big_m)?;
    let e = operator_f_value(field, f, g, big_f)?;
    compare_with_bound(e, bound, tol)
}

/// `inf_{m<=z<=M} F[f(y) + k(y)(z - y), g(z)]` for convex `f` (sup for
/// concave `f`).
pub fn sub3_inf(
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
    y: f64,
    m: f64,
    big_m: f64,
    k: &Subgradient,
) -> Result<ScalarBound> {
    let mode = if f.flags().convex {
        Mode::Inf
    } else if f.flags().concave {
        Mode::Sup
    } else {
        return Err(Error::FlagViolation(format!(
            "`{}` is neither convex nor concave",
            f.name()
        )));
    };
    check_hypotheses(f, g, big_f, m, big_m)?;
    if !(m..=big_m).contains(&y) {
        return Err(Error::PointOutOfInterval { point: y, m, big_m });
    }
    let u = big_f.first_domain();
    let pts: Vec<f64> = grid(m, big_m, 101).collect();
    for &yy in pts.iter().chain(std::iter::once(&y)) {
        let (fy, ky) = (f.eval(yy), k.eval(yy));
        for &t in &pts {
            let v = fy + ky * (t - yy);
            if !u.contains(v) {
                return Err(Error::TangentLeavesU(format!(
                    "f({yy}) + k({yy})({t} - {yy}) = {v} is outside {u}"
                )));
            }
        }
    }
    let (fy, ky) = (f.eval(y), k.eval(y));
    optimize_scalar(|z| big_f.eval(fy + ky * (z - y), g.eval(z)), m, big_m, mode)
}

pub fn verify_sub3(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    big_f: &BivariateSpec,
    y: f64,
    tol: &Tolerance,
) -> Result<ConverseReport> {
    let (m, big_m) = field.interval();
    let k = f.subgradient_on(m, big_m)?;
    let bound = sub3_inf(f, g, big_f, y, m, big_m, &k)?;
    let e = operator_f_value(field, f, g, big_f)?;
    compare_with_bound(e, bound, tol)
}
