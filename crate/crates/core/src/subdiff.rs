//! Bounds built from a subdifferential `k` of `f`: the two-sided tangent
//! sandwich, norm-based bounds, and a Slater type estimate.

use crate::error::{Error, Result};
use crate::hermitian::{loewner_leq_abs, ComparisonVerdict, HermitianMatrix, NormSpec, Tolerance, ENDPOINT_SLACK};
use crate::maps::{integrate_field, PositiveMapField};
use crate::scalar::{ScalarFunctionSpec, Subgradient};

#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub lower: HermitianMatrix,
    pub middle: HermitianMatrix,
    pub upper: HermitianMatrix,
    /// `lower <= middle` (reversed for concave `f`).
    pub verdict_lower: ComparisonVerdict,
    /// `middle <= upper` (reversed for concave `f`).
    pub verdict_upper: ComparisonVerdict,
    pub x_used: f64,
    pub y_used: f64,
}

fn check_k_finite(k: &Subgradient, m: f64, big_m: f64) -> Result<()> {
    for z in [m, big_m] {
        let v = k.eval(z);
        if !v.is_finite() {
            return Err(Error::DomainViolation(format!(
                "subgradient k({z}) = {v} is not finite"
            )));
        }
    }
    Ok(())
}

fn ordered(a: &HermitianMatrix, b: &HermitianMatrix, convex: bool, tol: &Tolerance) -> Result<ComparisonVerdict> {
    let scale = a.operator_norm()?.max(b.operator_norm()?).max(1.0);
    if convex {
        loewner_leq_abs(a, b, tol.absolute(scale))
    } else {
        loewner_leq_abs(b, a, tol.absolute(scale))
    }
}

/// `f(y)1 + k(y)(X - y1) <= int phi(f(x_t)) <= f(x)1 - x int phi(k(x_t)) + int phi(k(x_t) x_t)`
/// with `X = int phi(x_t)`.
pub fn sub1_sandwich(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    k: &Subgradient,
    x: f64,
    y: f64,
    tol: &Tolerance,
) -> Result<SandwichReport> {
    let convex = if f.flags().convex {
        true
    } else if f.flags().concave {
        false
    } else {
        return Err(Error::FlagViolation(format!(
            "`{}` is neither convex nor concave",
            f.name()
        )));
    };
    let (m, big_m) = field.interval();
    for p in [x, y] {
        if !(m..=big_m).contains(&p) {
            return Err(Error::PointOutOfInterval { point: p, m, big_m });
        }
    }
    field.check_unital()?;
    check_k_finite(k, m, big_m)?;
    let n = field.out_dim();
    let mean = integrate_field(field, None)?;
    let middle = integrate_field(field, Some(f))?;
    let k_int = field.integrate_spectral(|t| k.eval(t))?;
    let kt_int = field.integrate_spectral(|t| k.eval(t) * t)?;

    let lower = &HermitianMatrix::scalar(n, f.eval(y)) + &(&(&mean - &HermitianMatrix::scalar(n, y)) * k.eval(y));
    let upper = &(&HermitianMatrix::scalar(n, f.eval(x)) - &(&k_int * x)) + &kt_int;
    let verdict_lower = ordered(&lower, &middle, convex, tol)?;
    let verdict_upper = ordered(&middle, &upper, convex, tol)?;
    Ok(SandwichReport {
        lower,
        middle,
        upper,
        verdict_lower,
        verdict_upper,
        x_used: x,
        y_used: y,
    })
}

#[derive(Clone, Debug)]
pub struct NormBoundReport {
    /// `int phi(f(A_t))`.
    pub lhs: HermitianMatrix,
    /// `f(0)1 + int (f(|A_t|) - f(0)) / |A_t| phi(A_t)`.
    pub rhs_general: HermitianMatrix,
    pub verdict_general: ComparisonVerdict,
    /// `int f(|A_t|) / |A_t| phi(A_t)`, only when `f(0) <= 0`.
    pub rhs_nonpositive: Option<HermitianMatrix>,
    pub verdict_nonpositive: Option<ComparisonVerdict>,
    /// `int phi(A_t) / |A_t|`, which must stay below `1`.
    pub mass: HermitianMatrix,
    pub verdict_mass: ComparisonVerdict,
}

fn check_positive_data(field: &PositiveMapField) -> Result<()> {
    for (i, p) in field.points().iter().enumerate() {
        let ev = p.datum.eigenvalues()?;
        if ev[0] < -ENDPOINT_SLACK * ev[ev.len() - 1].abs().max(1.0) {
            return Err(Error::PreconditionViolated(format!(
                "datum at point {i} is not positive (eigenvalue {})",
                ev[0]
            )));
        }
    }
    Ok(())
}

fn check_convex_from_zero(f: &ScalarFunctionSpec) -> Result<()> {
    if !f.flags().convex {
        return Err(Error::FlagViolation(format!("`{}` is not convex", f.name())));
    }
    value_at_zero(f).map(|_| ())
}

// `f(0)`, read as the limit from the right when the domain is `(0, inf)`.
fn value_at_zero(f: &ScalarFunctionSpec) -> Result<f64> {
    let d = f.domain();
    let f0 = f.eval(0.0);
    if d.lo > 0.0 || !f0.is_finite() {
        return Err(Error::DomainViolation(format!(
            "`{}` has no finite value at 0 (domain {d})",
            f.name()
        )));
    }
    Ok(f0)
}

/// Chord bound of `f` between `0` and `|A_t|` for positive data and a
/// gauge-normalized unitarily invariant norm.
pub fn dk1_norm_bound(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    norm: &NormSpec,
    tol: &Tolerance,
) -> Result<NormBoundReport> {
    check_convex_from_zero(f)?;
    field.check_unital()?;
    check_positive_data(field)?;
    let n = field.out_dim();
    let f0 = value_at_zero(f)?;
    let mut norms = Vec::with_capacity(field.points().len());
    for (i, p) in field.points().iter().enumerate() {
        let d = p.datum.dim();
        if !norm.is_gauge_normalized(d) {
            return Err(Error::NotGaugeNormalized(norm.rank_one_norm(d)));
        }
        let a = norm.norm(&p.datum)?;
        if !(a > 0.0) {
            return Err(Error::ZeroOperator(i));
        }
        norms.push(a);
    }
    let lhs = integrate_field(field, Some(f))?;
    let mut slope_int = HermitianMatrix::zeros(n);
    let mut ratio_int = HermitianMatrix::zeros(n);
    let mut mass = HermitianMatrix::zeros(n);
    for (p, &a) in field.points().iter().zip(&norms) {
        let phi_a = &p.map.apply(&p.datum)? * p.weight;
        slope_int = &slope_int + &(&phi_a * ((f.eval(a) - f0) / a));
        ratio_int = &ratio_int + &(&phi_a * (f.eval(a) / a));
        mass = &mass + &(&phi_a * (1.0 / a));
    }
    let rhs_general = &HermitianMatrix::scalar(n, f0) + &slope_int;
    let verdict_general = ordered(&lhs, &rhs_general, true, tol)?;
    let (rhs_nonpositive, verdict_nonpositive) = if f0 <= 0.0 {
        let v = ordered(&lhs, &ratio_int, true, tol)?;
        (Some(ratio_int), Some(v))
    } else {
        (None, None)
    };
    let verdict_mass = ordered(&mass, &HermitianMatrix::identity(n), true, tol)?;
    Ok(NormBoundReport {
        lhs,
        rhs_general,
        verdict_general,
        rhs_nonpositive,
        verdict_nonpositive,
        mass,
        verdict_mass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dk11Branch {
    /// `f(|X|) <= |int phi(f(x_t))|` for convex increasing `f` with `f(0) <= 0`.
    Convex,
    /// `int phi(f(x_t)) <= f(|X|) 1` for concave increasing `f` when `X <= |X| 1`.
    Concave,
}

#[derive(Clone, Debug)]
pub struct Dk11Report {
    pub branch: Dk11Branch,
    /// `|X|` with `X = int phi(x_t)`.
    pub y: f64,
    /// Convex branch: `(f(|X|), |int phi(f(x_t))|)`.
    pub scalar_sides: Option<(f64, f64)>,
    /// Concave branch: `int phi(f(x_t))`.
    pub matrix_lhs: Option<HermitianMatrix>,
    pub verdict: ComparisonVerdict,
}

pub fn dk11_bounds(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    k: &Subgradient,
    norm: &NormSpec,
    branch: Dk11Branch,
    tol: &Tolerance,
) -> Result<Dk11Report> {
    let fail = |what: String| Err(Error::PreconditionViolated(what));
    field.check_unital()?;
    check_positive_data(field)?;
    if !f.flags().increasing {
        return fail(format!("`{}` is not increasing", f.name()));
    }
    if f.domain().lo > 0.0 {
        return fail(format!("`{}` is not defined on (0, inf)", f.name()));
    }
    let n = field.out_dim();
    let mean = integrate_field(field, None)?;
    let y = norm.norm(&mean)?;
    let middle = integrate_field(field, Some(f))?;
    match branch {
        Dk11Branch::Convex => {
            if !norm.is_unit_normalized(n) {
                return fail(format!("|1| = {} is not 1 for the {norm} norm", norm.identity_norm(n)));
            }
            if !f.flags().convex {
                return fail(format!("`{}` is not convex", f.name()));
            }
            let f0 = value_at_zero(f)?;
            if f0 > 0.0 {
                return fail(format!("f(0) = {f0} > 0"));
            }
            let ky = k.eval(y);
            let slack = ENDPOINT_SLACK * f.eval(y).abs().max(1.0);
            if !(ky >= 0.0) || !(ky * y - f.eval(y) >= -slack) {
                return fail(format!(
                    "k(y) = {ky} and k(y) y - f(y) = {} at y = {y} must be >= 0",
                    ky * y - f.eval(y)
                ));
            }
            let lhs = f.eval(y);
            let rhs = norm.norm(&middle)?;
            Ok(Dk11Report {
                branch,
                y,
                scalar_sides: Some((lhs, rhs)),
                matrix_lhs: None,
                verdict: ComparisonVerdict::scalar(lhs, rhs, tol.absolute(lhs.abs().max(rhs.abs()))),
            })
        }
        Dk11Branch::Concave => {
            if !f.flags().concave {
                return fail(format!("`{}` is not concave", f.name()));
            }
            let level = HermitianMatrix::scalar(n, y);
            let pre = loewner_leq_abs(&mean, &level, tol.absolute(y.max(1.0)))?;
            if !pre.holds {
                return fail(format!(
                    "int phi(x_t) <= |int phi(x_t)| 1 fails for the {norm} norm (min eigenvalue {})",
                    pre.min_eig_of_difference
                ));
            }
            let bound = HermitianMatrix::scalar(n, f.eval(y));
            let verdict = ordered(&middle, &bound, true, tol)?;
            Ok(Dk11Report {
                branch,
                y,
                scalar_sides: None,
                matrix_lhs: Some(middle),
                verdict,
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct SlaterReport {
    /// `|int phi(k(x_t) x_t)| / |int phi(k(x_t))|`.
    pub x: f64,
    pub lhs: HermitianMatrix,
    pub bound: f64,
    pub verdict: ComparisonVerdict,
}

/// `int phi(f(x_t)) <= f(x) 1` where `x` is the ratio of norms above, under
/// the condition that the two normalized integrals are Loewner ordered.
pub fn slater_bound(
    field: &PositiveMapField,
    f: &ScalarFunctionSpec,
    k: &Subgradient,
    norm: &NormSpec,
    tol: &Tolerance,
) -> Result<SlaterReport> {
    if !f.flags().convex {
        return Err(Error::FlagViolation(format!("`{}` is not convex", f.name())));
    }
    field.check_unital()?;
    let (m, big_m) = field.interval();
    check_k_finite(k, m, big_m)?;
    let k_int = field.integrate_spectral(|t| k.eval(t))?;
    let kt_int = field.integrate_spectral(|t| k.eval(t) * t)?;
    let den = norm.norm(&k_int)?;
    let num = norm.norm(&kt_int)?;
    if !(den > 0.0) {
        return Err(Error::ZeroDenominatorNorm);
    }
    if num > 0.0 {
        let cond = loewner_leq_abs(&(&kt_int * (1.0 / num)), &(&k_int * (1.0 / den)), tol.absolute(1.0))?;
        if !cond.holds {
            return Err(Error::ConditionNotMet {
                min_eig: cond.min_eig_of_difference,
            });
        }
    }
    let x = num / den;
    if !f.domain().contains(x) {
        return Err(Error::XOutOfDomain {
            x,
            domain: f.domain().to_string(),
        });
    }
    let lhs = integrate_field(field, Some(f))?;
    let bound = f.eval(x);
    let verdict = ordered(&lhs, &HermitianMatrix::scalar(field.out_dim(), bound), true, tol)?;
    Ok(SlaterReport { x, lhs, bound, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{apply_function, NormKind, Normalization};
    use crate::maps::{KrausMap, MapFamily};
    use crate::scalar::builtin;

    fn sq() -> ScalarFunctionSpec {
        builtin("power", &[2.0]).unwrap()
    }

    fn scalar_field(values: &[f64], weights: &[f64]) -> PositiveMapField {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        MapFamily::new(weights.to_vec(), vec![KrausMap::identity(1); values.len()])
            .unwrap()
            .with_data(
                values.iter().map(|&v| HermitianMatrix::diag(&[v])).collect(),
                (lo.min(hi - 1.0), hi),
            )
            .unwrap()
    }

    fn pinching_field() -> PositiveMapField {
        let x = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        MapFamily::new(vec![1.0], vec![KrausMap::pinching(2)])
            .unwrap()
            .with_data(vec![x], (1.0, 3.0))
            .unwrap()
    }

    #[test]
    fn sandwich_point_equality() {
        let field = scalar_field(&[2.0], &[1.0]);
        let f = sq();
        let k = f.subgradient_on(1.0, 2.0).unwrap();
        let r = sub1_sandwich(&field, &f, &k, 2.0, 2.0, &Tolerance::default()).unwrap();
        for m in [&r.lower, &r.middle, &r.upper] {
            assert!((m.get(0, 0).re - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_pinching() {
        let f = sq();
        let k = f.subgradient_on(1.0, 3.0).unwrap();
        let r = sub1_sandwich(&pinching_field(), &f, &k, 2.0, 2.0, &Tolerance::default()).unwrap();
        assert!((&r.lower - &HermitianMatrix::diag(&[4.0, 4.0])).max_abs_entry() < 1e-12);
        assert!((&r.middle - &HermitianMatrix::diag(&[5.0, 5.0])).max_abs_entry() < 1e-12);
        // k(X) X = 2 X^2 = [[10, 8], [8, 10]], pinched to diag(10, 10); k(X) pinches to diag(4, 4)
        assert!((&r.upper - &HermitianMatrix::diag(&[6.0, 6.0])).max_abs_entry() < 1e-12);
        assert!(r.verdict_lower.holds && r.verdict_upper.holds);
    }

    #[test]
    fn sandwich_concave_reverses() {
        let f = builtin("power", &[0.5]).unwrap();
        let x = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let field = MapFamily::new(vec![1.0], vec![KrausMap::pinching(2)])
            .unwrap()
            .with_data(vec![x], (1.0, 4.0))
            .unwrap();
        let k = f.subgradient_on(1.0, 4.0).unwrap();
        for y in [1.0, 2.5, 4.0] {
            let r = sub1_sandwich(&field, &f, &k, 1.5, y, &Tolerance::default()).unwrap();
            assert!(r.verdict_lower.holds && r.verdict_upper.holds);
        }
        let e = builtin("power", &[3.0]).unwrap();
        let ke = e.subgradient_on(-1.0, 1.0).unwrap();
        assert!(matches!(
            sub1_sandwich(&pinching_field(), &sq(), &ke, 5.0, 2.0, &Tolerance::default()),
            Err(Error::PointOutOfInterval { .. })
        ));
    }

    #[test]
    fn dk1_remark_and_affine() {
        let f = sq();
        let a = HermitianMatrix::from_real_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let field = MapFamily::new(vec![1.0], vec![KrausMap::identity(2)])
            .unwrap()
            .with_data(vec![a.clone()], (0.0, 3.0))
            .unwrap();
        let r = dk1_norm_bound(&field, &f, &NormSpec::operator(), &Tolerance::default()).unwrap();
        assert!(r.verdict_general.holds && r.verdict_nonpositive.unwrap().holds && r.verdict_mass.holds);
        // |A|^2 = |A^2| for the operator norm
        let na = a.operator_norm().unwrap();
        let nfa = apply_function(&f, &a).unwrap().operator_norm().unwrap();
        assert!((na * na - nfa).abs() < 1e-10);

        let lin = builtin("affine", &[3.0, 0.0]).unwrap();
        let field = scalar_field(&[2.0], &[1.0]);
        let r = dk1_norm_bound(&field, &lin, &NormSpec::operator(), &Tolerance::default()).unwrap();
        assert!(r.verdict_nonpositive.unwrap().min_eig_of_difference.abs() < 1e-12);

        let fro = NormSpec::new(NormKind::Frobenius, Normalization::Unit).unwrap();
        let two = MapFamily::new(vec![1.0], vec![KrausMap::identity(2)])
            .unwrap()
            .with_data(vec![HermitianMatrix::identity(2)], (0.0, 2.0))
            .unwrap();
        assert!(matches!(
            dk1_norm_bound(&two, &f, &fro, &Tolerance::default()),
            Err(Error::NotGaugeNormalized(_))
        ));
        let zero = MapFamily::new(vec![1.0], vec![KrausMap::identity(2)])
            .unwrap()
            .with_data(vec![HermitianMatrix::zeros(2)], (0.0, 2.0))
            .unwrap();
        assert!(matches!(
            dk1_norm_bound(&zero, &f, &NormSpec::operator(), &Tolerance::default()),
            Err(Error::ZeroOperator(0))
        ));
    }

    #[test]
    fn dk11_branches() {
        let f = sq();
        let field = scalar_field(&[1.5], &[1.0]);
        let k = f.subgradient_on(0.0, 4.0).unwrap();
        let r = dk11_bounds(
            &field,
            &f,
            &k,
            &NormSpec::operator(),
            Dk11Branch::Convex,
            &Tolerance::default(),
        )
        .unwrap();
        let (l, rr) = r.scalar_sides.unwrap();
        assert!((l - rr).abs() < 1e-12 && r.verdict.holds);

        let fro = NormSpec::gauge(NormKind::Frobenius).unwrap();
        let two = MapFamily::new(vec![1.0], vec![KrausMap::identity(2)])
            .unwrap()
            .with_data(vec![HermitianMatrix::diag(&[1.0, 2.0])], (1.0, 2.0))
            .unwrap();
        assert!(matches!(
            dk11_bounds(&two, &f, &k, &fro, Dk11Branch::Convex, &Tolerance::default()),
            Err(Error::PreconditionViolated(_))
        ));

        let sqrt = builtin("power", &[0.5]).unwrap();
        let ks = sqrt.subgradient_on(1.0, 2.0).unwrap();
        let r = dk11_bounds(
            &two,
            &sqrt,
            &ks,
            &NormSpec::operator(),
            Dk11Branch::Concave,
            &Tolerance::default(),
        )
        .unwrap();
        assert!(r.verdict.holds);
        assert!(dk11_bounds(
            &two,
            &sqrt,
            &ks,
            &NormSpec::operator(),
            Dk11Branch::Convex,
            &Tolerance::default()
        )
        .is_err());
    }

    #[test]
    fn slater_examples() {
        let f = sq();
        let field = scalar_field(&[1.7], &[1.0]);
        let k = f.subgradient_on(0.7, 1.7).unwrap();
        let r = slater_bound(&field, &f, &k, &NormSpec::operator(), &Tolerance::default()).unwrap();
        assert!((r.x - 1.7).abs() < 1e-12);
        assert!((r.bound - r.lhs.get(0, 0).re).abs() < 1e-12);

        let field = scalar_field(&[1.0, 3.0], &[0.5, 0.5]);
        let k = f.subgradient_on(1.0, 3.0).unwrap();
        let r = slater_bound(&field, &f, &k, &NormSpec::operator(), &Tolerance::default()).unwrap();
        assert!((r.x - 2.5).abs() < 1e-12);
        assert!((r.bound - 6.25).abs() < 1e-12);
        assert!((r.lhs.get(0, 0).re - 5.0).abs() < 1e-12);
        assert!(r.verdict.holds);
    }

    #[test]
    fn slater_condition_failure() {
        // normalized: k(X) -> diag(-1, 1/3), k(X) X -> diag(1, 1/9)
        let f = sq();
        let x = HermitianMatrix::diag(&[-3.0, 1.0]);
        let field = MapFamily::new(vec![1.0], vec![KrausMap::identity(2)])
            .unwrap()
            .with_data(vec![x], (-3.0, 1.0))
            .unwrap();
        let k = f.subgradient_on(-3.0, 1.0).unwrap();
        assert!(matches!(
            slater_bound(&field, &f, &k, &NormSpec::operator(), &Tolerance::default()),
            Err(Error::ConditionNotMet { .. })
        ));
    }
}
