//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p opineq-cli --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use opineq::converse::{
    evaluate_rev3, geometric_mean, li_mathias_inf, mond_pecaric_sup, operator_f_value, optimize_scalar,
    power_branch_value, power_constant, power_objective, power_thresholds, sub3_inf, verify_converse, verify_rev0,
    verify_rev3, BivariateSpec, Mode, PowerBranch, Rev3Params, SpectralBounds,
};
use opineq::generators::{
    gaussian_matrix, random_field, random_hermitian_with, random_rev3_points, random_vector_field, rng_for, FieldShape,
};
use opineq::hermitian::{matrix_power, HermitianMatrix, NormKind, NormSpec, Tolerance};
use opineq::jensen::jensen_gap;
use opineq::maps::{KrausMap, MapFamily, PositiveMapField};
use opineq::scalar::{builtin, subdiff_default, ScalarFunctionSpec};
use opineq::subdiff::{dk11_bounds, dk1_norm_bound, slater_bound, sub1_sandwich, Dk11Branch};
use opineq::Error;

const SEED: u64 = 20_240;
const JENSEN_RTOL: f64 = 1e-8;
const JENSEN_BUDGET_SECS: f64 = 60.0;
const FALSIFY_SEED: u64 = 2024;
const FALSIFY_TRIALS: &str = "10000";
const CONVERSE_RTOL: f64 = 1e-8;
const TIGHTNESS_TOL: f64 = 1e-6;
const POWER_ORACLE_TOL: f64 = 1e-7;
const CONTINUITY_RTOL: f64 = 1e-9;
const KUBO_ANDO_TOL: f64 = 1e-8;
const AFFINE_TOL: f64 = 1e-10;
const REMARK_TOL: f64 = 1e-10;
const NORM_RTOL: f64 = 1e-8;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ok<T>(r: opineq::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn f(name: &str, params: &[f64]) -> ScalarFunctionSpec {
    builtin(name, params).expect("builtin exists")
}

fn field(stream: u64, m: f64, big_m: f64) -> Result<PositiveMapField, String> {
    ok(random_field(
        &mut rng_for(SEED, stream),
        FieldShape::default(),
        m,
        big_m,
    ))
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_opineq"));
    c.env_remove("OPINEQ_TOL");
    c
}

fn exit_code(c: &mut Command) -> Result<i32, String> {
    let out = c.output().map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "terminated by signal".into())
}

fn jensen_holds() -> Outcome {
    let tol = Tolerance::new(JENSEN_RTOL);
    let cases = [
        (f("power", &[2.0]), 0.0, 3.0),
        (f("power", &[1.5]), 0.0, 3.0),
        (f("power", &[-1.0]), 0.5, 2.0),
        (f("xlogx", &[]), 0.5, 3.0),
    ];
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for (i, (func, m, big_m)) in cases.iter().enumerate() {
        let gaps = (0..500u64)
            .into_par_iter()
            .map(|t| {
                let r = ok(jensen_gap(&field(1000 * i as u64 + t, *m, *big_m)?, func, &tol))?;
                if !r.verdict.holds {
                    return Err(format!("{} trial {t}: gap {:e}", func.name(), r.gap_min_eig));
                }
                Ok(r.gap_min_eig / r.scale)
            })
            .collect::<Result<Vec<_>, _>>()?;
        worst = gaps.into_iter().fold(worst, f64::min);
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > JENSEN_BUDGET_SECS {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("2000 fields, worst gap/scale {worst:.3e}, {secs:.1}s"))
}

fn falsifier_finds_and_replays() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut found = Vec::new();
    for (spec, m, big_m) in [("exp", "0", "3"), ("power:4", "0", "2")] {
        let path = dir.path().join(format!("{}.json", spec.replace(':', "_")));
        let code = exit_code(bin().args([
            "falsify",
            "--f",
            spec,
            "--m",
            m,
            "--M",
            big_m,
            "--trials",
            FALSIFY_TRIALS,
            "--seed",
            &FALSIFY_SEED.to_string(),
            "--out",
            path.to_str().unwrap(),
        ]))?;
        if code != 0 {
            return Err(format!("falsify {spec} exited {code}"));
        }
        let code = exit_code(bin().args(["verify", "jensen", "--input", path.to_str().unwrap()]))?;
        if code != 1 {
            return Err(format!("replay of {spec} witness exited {code}"));
        }
        found.push(spec);
    }
    Ok(format!("witnesses for {found:?} replay to exit 1"))
}

fn two_point_field(m: f64, big_m: f64, z: f64) -> Result<PositiveMapField, String> {
    let w = (big_m - z) / (big_m - m);
    let fam = ok(MapFamily::new(vec![w, 1.0 - w], vec![KrausMap::identity(1); 2]))?;
    ok(fam.with_data(
        vec![HermitianMatrix::diag(&[m]), HermitianMatrix::diag(&[big_m])],
        (m, big_m),
    ))
}

fn converse_holds_and_is_tight() -> Outcome {
    let tol = Tolerance::new(CONVERSE_RTOL);
    let pairs = [
        (f("power", &[2.0]), f("power", &[2.0]), "diff", 0.0, 3.0),
        (f("exp", &[]), f("exp", &[]), "diff", 0.0, 2.0),
        (f("power", &[-1.0]), f("power", &[-1.0]), "ratio", 0.5, 2.0),
        (f("power", &[2.0]), f("power", &[1.0]), "probe:2,1", 0.5, 2.0),
        (f("power", &[0.5]), f("power", &[0.5]), "diff", 0.25, 4.0),
    ];
    for (i, (func, g, big_f, m, big_m)) in pairs.iter().enumerate() {
        let big_f = ok(BivariateSpec::parse(big_f))?;
        (0..200u64).into_par_iter().try_for_each(|t| {
            let r = ok(verify_converse(
                &field(5000 + 1000 * i as u64 + t, *m, *big_m)?,
                func,
                g,
                &big_f,
                &tol,
            ))?;
            if r.verdict.holds {
                Ok(())
            } else {
                Err(format!(
                    "{} / {}: trial {t} slack {:e}",
                    func.name(),
                    big_f.name(),
                    r.verdict.min_eig_of_difference
                ))
            }
        })?;
        let bound = ok(mond_pecaric_sup(func, g, &big_f, *m, *big_m))?;
        let e = ok(operator_f_value(
            &two_point_field(*m, *big_m, bound.argmax_z)?,
            func,
            g,
            &big_f,
        ))?;
        let attained = e.get(0, 0).re;
        if (attained - bound.value).abs() > TIGHTNESS_TOL {
            return Err(format!(
                "{}: two-point value {attained} vs bound {}",
                func.name(),
                bound.value
            ));
        }
    }
    let sq = f("power", &[2.0]);
    let b = ok(mond_pecaric_sup(&sq, &sq, &BivariateSpec::difference(), 1.0, 3.0))?;
    if (b.value - 1.0).abs() > TIGHTNESS_TOL || (b.argmax_z - 2.0).abs() > TIGHTNESS_TOL {
        return Err(format!("t^2 on [1,3]: value {} at {}", b.value, b.argmax_z));
    }
    Ok("1000 instances over 5 (f, F) pairs; tight at the two-point field; t^2 on [1,3] gives 1 at z = 2".into())
}

fn power_sweep() -> Vec<(f64, f64, f64, f64, f64)> {
    let mut cells = Vec::new();
    for &lambda in &[0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        for &(m, big_m) in &[(0.5, 1.0), (0.5, 2.0), (1.0, 3.0), (0.1, 4.0), (2.0, 5.0)] {
            for &p in &[1.0, 1.5, 2.0, 3.0, 4.0] {
                for &q in &[1.0, 1.5, 2.0, 3.0] {
                    cells.push((lambda, m, big_m, p, q));
                }
            }
        }
    }
    cells
}

fn power_constant_criterion() -> Outcome {
    let cells = power_sweep();
    let mut worst = 0.0f64;
    for &(lambda, m, big_m, p, q) in &cells {
        let c = ok(power_constant(lambda, m, big_m, p, q))?;
        let oracle = ok(optimize_scalar(
            power_objective(lambda, m, big_m, p, q),
            m,
            big_m,
            Mode::Sup,
        ))?
        .value;
        let err = (c - oracle).abs() / oracle.abs().max(1.0);
        worst = worst.max(err);
        if err > POWER_ORACLE_TOL {
            return Err(format!("C({lambda}, {m}, {big_m}, {p}, {q}) = {c}, oracle {oracle}"));
        }
    }
    let mut seams = 0;
    for &(_, m, big_m, p, q) in cells.iter().filter(|c| c.0 == 0.0) {
        let (t1, t2) = power_thresholds(m, big_m, p, q);
        let checks = if q > 1.0 {
            vec![
                (t1, PowerBranch::Upper, PowerBranch::Interior),
                (t2, PowerBranch::Interior, PowerBranch::Lower),
            ]
        } else {
            vec![(t1, PowerBranch::Upper, PowerBranch::Lower)]
        };
        for (lambda, a, b) in checks {
            let (va, vb) = (
                power_branch_value(a, lambda, m, big_m, p, q),
                power_branch_value(b, lambda, m, big_m, p, q),
            );
            if (va - vb).abs() > CONTINUITY_RTOL * va.abs().max(vb.abs()).max(1.0) {
                return Err(format!(
                    "jump {va} vs {vb} at lambda = {lambda} ({m}, {big_m}, {p}, {q})"
                ));
            }
            seams += 1;
        }
    }
    let sample: Vec<_> = cells.iter().step_by(25).copied().collect();
    sample
        .par_iter()
        .enumerate()
        .try_for_each(|(i, &(lambda, m, big_m, p, q))| {
            for t in 0..200u64 {
                let mut rng = rng_for(SEED + 1, 1000 * i as u64 + t);
                let (n, dim) = (rng.gen_range(1..=4), rng.gen_range(1..=5));
                let vf = ok(random_vector_field(&mut rng, n, dim, m, big_m))?;
                let r = ok(verify_rev0(&vf, lambda, p, q))?;
                if !r.verdict.holds {
                    return Err(format!(
                        "cell ({lambda}, {m}, {big_m}, {p}, {q}) trial {t}: {} > {}",
                        r.lhs, r.bound
                    ));
                }
            }
            Ok(())
        })?;
    Ok(format!(
        "{} cells, worst oracle error {worst:.1e}; {seams} branch seams continuous; {} vector fields",
        cells.len(),
        sample.len() * 200
    ))
}

fn max_rel_diff(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    (a - b).max_abs_entry() / a.max_abs_entry().max(b.max_abs_entry()).max(1.0)
}

fn geometric_mean_criterion() -> Outcome {
    let bounds_list = [
        SpectralBounds {
            m1: 0.5,
            big_m1: 2.0,
            m2: 0.5,
            big_m2: 2.0,
        },
        SpectralBounds {
            m1: 1.0,
            big_m1: 3.0,
            m2: 0.5,
            big_m2: 1.5,
        },
        SpectralBounds {
            m1: 0.2,
            big_m1: 1.0,
            m2: 1.0,
            big_m2: 4.0,
        },
    ];
    let (mut verified, mut negative, mut attempts) = (0, 0, 0u64);
    while verified < 200 {
        if attempts > 20_000 {
            return Err(format!("only {verified} instances with C >= 0"));
        }
        let mut rng = rng_for(SEED + 2, attempts);
        attempts += 1;
        let bounds = bounds_list[rng.gen_range(0..bounds_list.len())];
        let params = Rev3Params::with_conjugate(
            rng.gen_range(0.0..2.0),
            rng.gen_range(1.0..3.0),
            rng.gen_range(1.2..4.0),
        );
        let (n, dim) = (rng.gen_range(1..=3), rng.gen_range(1..=4));
        let pts = ok(random_rev3_points(&mut rng, n, dim, bounds))?;
        match verify_rev3(&pts, bounds, params) {
            Ok(r) if r.verdict.holds && r.intermediate_verdict.holds => verified += 1,
            Ok(r) => return Err(format!("{params:?} {bounds:?}: {} > {}", r.lhs, r.bound)),
            Err(Error::NegativeConstant(_)) => {
                negative += 1;
                let r = ok(evaluate_rev3(&pts, bounds, params))?;
                if !r.intermediate_verdict.holds {
                    return Err(format!("intermediate bound fails at {params:?}"));
                }
            }
            Err(e) => return Err(e.to_string()),
        }
    }

    let mut rng = rng_for(SEED + 3, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let dim = rng.gen_range(1..=5);
        let a = ok(random_hermitian_with(&mut rng, dim, 0.3, 3.0))?;
        let b = ok(random_hermitian_with(&mut rng, dim, 0.3, 3.0))?;
        let r = rng.gen_range(0.0..1.0);
        worst = worst.max(max_rel_diff(&ok(geometric_mean(&a, &b, 0.0))?, &a));
        worst = worst.max(max_rel_diff(&ok(geometric_mean(&a, &b, 1.0))?, &b));
        let (da, db): (Vec<f64>, Vec<f64>) = (0..dim)
            .map(|_| (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0)))
            .unzip();
        let closed: Vec<f64> = da.iter().zip(&db).map(|(x, y)| x.powf(1.0 - r) * y.powf(r)).collect();
        let diag = ok(geometric_mean(
            &HermitianMatrix::diag(&da),
            &HermitianMatrix::diag(&db),
            r,
        ))?;
        worst = worst.max(max_rel_diff(&diag, &HermitianMatrix::diag(&closed)));
        let t = gaussian_matrix(&mut rng, dim, dim);
        let lhs = ok(ok(geometric_mean(&a, &b, r))?.congruence(&t))?;
        let rhs = match geometric_mean(&ok(a.congruence(&t))?, &ok(b.congruence(&t))?, r) {
            Ok(x) => x,
            // a nearly singular T; skip
            Err(Error::NotPositiveDefinite { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        worst = worst.max(max_rel_diff(&lhs, &rhs));
    }
    if worst > KUBO_ANDO_TOL {
        return Err(format!("Kubo-Ando property off by {worst:e}"));
    }
    Ok(format!(
        "200 instances hold ({negative} negative-C draws refused, intermediate bound held); Kubo-Ando worst {worst:.1e}"
    ))
}

fn sandwich_criterion() -> Outcome {
    let tol = Tolerance::default();
    let cases = [
        (f("power", &[2.0]), 0.0, 3.0),
        (f("exp", &[]), -1.0, 2.0),
        (f("power", &[-1.0]), 0.5, 2.0),
        (f("xlogx", &[]), 0.5, 3.0),
        (f("abs", &[]), -1.0, 2.0),
    ];
    (0..200u64).into_par_iter().try_for_each(|t| {
        let (func, m, big_m) = &cases[t as usize % cases.len()];
        let fld = field(20_000 + t, *m, *big_m)?;
        let k = ok(func.subgradient_on(*m, *big_m))?;
        for i in 0..=10 {
            for j in 0..=10 {
                let x = m + (big_m - m) * i as f64 / 10.0;
                let y = m + (big_m - m) * j as f64 / 10.0;
                let r = ok(sub1_sandwich(&fld, func, &k, x, y, &tol))?;
                if !(r.verdict_lower.holds && r.verdict_upper.holds) {
                    return Err(format!("{} trial {t} at ({x}, {y})", func.name()));
                }
            }
        }
        Ok(())
    })?;
    let aff = f("affine", &[2.0, -1.0]);
    let k = ok(aff.subgradient_on(-1.0, 2.0))?;
    let mut worst = 0.0f64;
    for t in 0..20 {
        let fld = field(30_000 + t, -1.0, 2.0)?;
        for (x, y) in [(-1.0, 2.0), (0.5, 0.5), (2.0, -0.3)] {
            let r = ok(sub1_sandwich(&fld, &aff, &k, x, y, &tol))?;
            worst = worst
                .max(max_rel_diff(&r.lower, &r.middle))
                .max(max_rel_diff(&r.middle, &r.upper));
        }
    }
    if worst > AFFINE_TOL {
        return Err(format!("affine sides differ by {worst:e}"));
    }
    Ok(format!(
        "200 instances x 121 (x, y) points; affine collapse {worst:.1e}"
    ))
}

fn ordering_chain() -> Outcome {
    let cases = [
        (f("power", &[2.0]), 0.0, 3.0),
        (f("power", &[1.5]), 0.1, 3.0),
        (f("power", &[-1.0]), 0.5, 2.0),
        (f("xlogx", &[]), 0.5, 3.0),
    ];
    let id = f("identity", &[]);
    let diff = BivariateSpec::difference();
    (0..100u64).into_par_iter().try_for_each(|t| {
        let (func, m, big_m) = &cases[t as usize % cases.len()];
        let (m, big_m) = (*m, *big_m);
        let fld = field(40_000 + t, m, big_m)?;
        let y = rng_for(SEED + 4, t).gen_range(m..=big_m);
        let k = ok(func.subgradient_on(m, big_m))?;
        let s3 = ok(sub3_inf(func, &id, &diff, y, m, big_m, &k))?.value;
        let lm = ok(li_mathias_inf(func, &id, &diff, m, big_m))?.value;
        let mp = ok(mond_pecaric_sup(func, &id, &diff, m, big_m))?.value;
        let ev = ok(ok(operator_f_value(&fld, func, &id, &diff))?.eigenvalues())?;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        let tol = CONVERSE_RTOL * mp.abs().max(lo.abs()).max(hi.abs()).max(1.0);
        if s3 <= lm + tol && lm <= lo + tol && hi <= mp + tol {
            Ok(())
        } else {
            Err(format!(
                "{} trial {t}: {s3} <= {lm} <= [{lo}, {hi}] <= {mp} fails",
                func.name()
            ))
        }
    })?;
    Ok("100 instances ordered".into())
}

fn norm_bounds() -> Outcome {
    let tol = Tolerance::new(NORM_RTOL);
    let fs = [f("power", &[2.0]), f("power", &[1.5]), f("exp", &[]), f("xlogx", &[])];
    let norms = [
        ok(NormSpec::gauge(NormKind::Operator))?,
        ok(NormSpec::gauge(NormKind::Trace))?,
        ok(NormSpec::gauge(NormKind::KyFan(2)))?,
    ];
    let mut with_dk3 = 0;
    for (ni, norm) in norms.iter().enumerate() {
        let counts = (0..200u64)
            .into_par_iter()
            .map(|t| {
                let func = &fs[t as usize % fs.len()];
                let r = ok(dk1_norm_bound(
                    &field(50_000 + 1000 * ni as u64 + t, 0.0, 3.0)?,
                    func,
                    norm,
                    &tol,
                ))?;
                let dk3 = r.verdict_nonpositive.map(|v| v.holds);
                if !r.verdict_general.holds || !r.verdict_mass.holds || dk3 == Some(false) {
                    return Err(format!("{} with {norm:?}, trial {t}", func.name()));
                }
                if func.eval(0.0) <= 0.0 && dk3.is_none() {
                    return Err(format!("{}: f(0) <= 0 but no nonpositive bound", func.name()));
                }
                Ok(usize::from(dk3.is_some()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        with_dk3 += counts.iter().sum::<usize>();
    }

    let mut rng = rng_for(SEED + 5, 0);
    for _ in 0..200 {
        let dim = rng.gen_range(1..=8);
        let a = ok(random_hermitian_with(&mut rng, dim, -3.0, 3.0))?;
        let op = NormSpec::operator();
        let (n1, n2) = (ok(op.norm(&a))?, ok(op.norm(&ok(matrix_power(&a, 2.0))?))?);
        if (n1 * n1 - n2).abs() > REMARK_TOL * n2.max(1.0) {
            return Err(format!("||A||^2 = {} but ||A^2|| = {n2}", n1 * n1));
        }
    }

    let op = NormSpec::operator();
    let mut tally = [[0usize; 2]; 3];
    for t in 0..200u64 {
        let fld = field(60_000 + t, 0.0, 3.0)?;
        let convex = [f("power", &[2.0]), f("exp", &[]), f("xlogx", &[])];
        let concave = [f("power", &[0.5]), f("power", &[0.25]), f("log", &[])];
        let c = &convex[t as usize % 3];
        let runs: [(usize, opineq::Result<bool>); 3] = [
            (
                0,
                subdiff_default(c)
                    .and_then(|k| dk11_bounds(&fld, c, &k, &op, Dk11Branch::Convex, &tol))
                    .map(|r| r.verdict.holds),
            ),
            (1, {
                let g = &concave[t as usize % 3];
                subdiff_default(g)
                    .and_then(|k| dk11_bounds(&fld, g, &k, &op, Dk11Branch::Concave, &tol))
                    .map(|r| r.verdict.holds)
            }),
            (
                2,
                c.subgradient_on(0.0, 3.0)
                    .and_then(|k| slater_bound(&fld, c, &k, &op, &tol))
                    .map(|r| r.verdict.holds),
            ),
        ];
        for (which, r) in runs {
            match r {
                Ok(true) => tally[which][0] += 1,
                Ok(false) => return Err(format!("bound {which} fails on trial {t} with preconditions met")),
                Err(e) if e.is_precondition() => tally[which][1] += 1,
                Err(e) => return Err(format!("bound {which} trial {t}: {e}")),
            }
        }
    }
    if tally.iter().any(|[held, _]| *held == 0) {
        return Err(format!("vacuous run: {tally:?}"));
    }

    // Known violations must be reported, never passed.
    let fro = ok(NormSpec::gauge(NormKind::Frobenius))?;
    let sq = f("power", &[2.0]);
    let pinch = ok(MapFamily::new(vec![1.0], vec![KrausMap::pinching(2)]))?;
    let pos = ok(pinch.with_data(vec![HermitianMatrix::diag(&[1.0, 2.0])], (0.0, 2.0)))?;
    let bad_norm = dk11_bounds(&pos, &sq, &ok(subdiff_default(&sq))?, &fro, Dk11Branch::Convex, &tol);
    let mixed = ok(pinch.with_data(vec![HermitianMatrix::diag(&[-3.0, 1.0])], (-3.0, 1.0)))?;
    let bad_slater = slater_bound(&mixed, &sq, &ok(sq.subgradient_on(-3.0, 1.0))?, &op, &tol);
    match (bad_norm, bad_slater) {
        (Err(a), Err(b)) if a.is_precondition() && b.is_precondition() => {}
        (a, b) => return Err(format!("violations not reported: {:?} / {:?}", a.err(), b.err())),
    }
    Ok(format!(
        "600 DK2 fields ({with_dk3} with DK3); remark holds; DK21 {}/{} DK31 {}/{} Slater {}/{} (held/refused)",
        tally[0][0], tally[0][1], tally[1][0], tally[1][1], tally[2][0], tally[2][1]
    ))
}

fn suite_is_deterministic() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let code = exit_code(bin().args([
            "suite",
            corpus.to_str().unwrap(),
            "--seed",
            "42",
            "--report",
            path.to_str().unwrap(),
        ]))?;
        if code != 0 {
            return Err(format!("suite exited {code}"));
        }
        reports.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    if reports[0] != reports[1] {
        return Err("reports differ".into());
    }
    Ok(format!("two runs, {} identical bytes", reports[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("jensen holds for operator convex builtins", jensen_holds),
        (
            "falsifier finds exp and t^4, witnesses replay",
            falsifier_finds_and_replays,
        ),
        ("converse bound holds and is attained", converse_holds_and_is_tight),
        (
            "power constant, branch continuity, vector fields",
            power_constant_criterion,
        ),
        (
            "geometric-mean corollary and Kubo-Ando properties",
            geometric_mean_criterion,
        ),
        ("subgradient sandwich", sandwich_criterion),
        ("sub3 <= lm <= F-value <= mp ordering", ordering_chain),
        ("norm bounds", norm_bounds),
        ("suite determinism", suite_is_deterministic),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {}. {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
