//! The Jensen gap `int phi_t(f(x_t)) - f(int phi_t(x_t))` for unital fields.

use crate::error::{Error, Result};
use crate::hermitian::{apply_function, loewner_leq_abs, ComparisonVerdict, HermitianMatrix, Tolerance};
use crate::maps::{integrate_field, FieldPoint, KrausMap, PositiveMapField};
use crate::scalar::ScalarFunctionSpec;

#[derive(Clone, Debug)]
pub struct JensenReport {
    /// `f(int phi_t(x_t))`.
    pub lhs: HermitianMatrix,
    /// `int phi_t(f(x_t))`.
    pub rhs: HermitianMatrix,
    /// Smallest eigenvalue of `rhs - lhs`.
    pub gap_min_eig: f64,
    /// `lhs <= rhs`.
    pub verdict: ComparisonVerdict,
    /// `rhs <= lhs`, the direction expected for operator concave `f`.
    pub reverse: ComparisonVerdict,
    pub scale: f64,
}

/// Computes both sides and compares them; operator-convexity flags are never
/// consulted.
pub fn jensen_gap(field: &PositiveMapField, f: &ScalarFunctionSpec, tol: &Tolerance) -> Result<JensenReport> {
    field.check_unital()?;
    let mean = integrate_field(field, None)?;
    let lhs = apply_function(f, &mean)?;
    let rhs = integrate_field(field, Some(f))?;
    let scale = rhs.operator_norm()?.max(1.0);
    let abs_tol = tol.absolute(scale);
    let verdict = loewner_leq_abs(&lhs, &rhs, abs_tol)?;
    let reverse = loewner_leq_abs(&rhs, &lhs, abs_tol)?;
    Ok(JensenReport {
        gap_min_eig: verdict.min_eig_of_difference,
        lhs,
        rhs,
        verdict,
        reverse,
        scale,
    })
}

/// `f(sum_i w_i phi_i(x_i)) <= sum_i w_i phi_i(f(x_i))` with the field built
/// from the given weights; the declared interval is the hull of the data
/// spectra.
pub fn discrete_jensen(
    weights: &[f64],
    maps: &[KrausMap],
    data: &[HermitianMatrix],
    f: &ScalarFunctionSpec,
    tol: &Tolerance,
) -> Result<JensenReport> {
    if weights.len() != maps.len() || maps.len() != data.len() {
        return Err(Error::DimMismatch {
            expected: maps.len(),
            found: weights.len().min(data.len()),
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in data {
        let ev = d.eigenvalues()?;
        lo = lo.min(ev[0]);
        hi = hi.max(ev[ev.len() - 1]);
    }
    let points = weights
        .iter()
        .zip(maps)
        .zip(data)
        .map(|((&weight, map), datum)| FieldPoint {
            weight,
            map: map.clone(),
            datum: datum.clone(),
        })
        .collect();
    let field = PositiveMapField::new(points, (lo, hi))?;
    jensen_gap(&field, f, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::CMatrix;
    use crate::maps::MapFamily;
    use crate::scalar::builtin;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn x2() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap()
    }

    fn random_isometry(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> CMatrix {
        let g = CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        g.qr().q()
    }

    fn random_hermitian(rng: &mut ChaCha20Rng, n: usize, m: f64, big_m: f64) -> HermitianMatrix {
        let u = random_isometry(rng, n, n);
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(m..big_m)).collect();
        HermitianMatrix::diag(&d).congruence(&u.adjoint()).unwrap()
    }

    #[test]
    fn pinching_square_example() {
        let field = MapFamily::new(vec![1.0], vec![KrausMap::pinching(2)])
            .unwrap()
            .with_data(vec![x2()], (1.0, 3.0))
            .unwrap();
        let r = jensen_gap(&field, &builtin("power", &[2.0]).unwrap(), &Tolerance::default()).unwrap();
        assert!((&r.lhs - &HermitianMatrix::diag(&[4.0, 4.0])).max_abs_entry() < 1e-13);
        assert!((&r.rhs - &HermitianMatrix::diag(&[5.0, 5.0])).max_abs_entry() < 1e-13);
        assert!((r.gap_min_eig - 1.0).abs() < 1e-13);
        assert!(r.verdict.holds);
        assert!(!r.reverse.holds);
    }

    #[test]
    fn affine_and_identity_have_zero_gap() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let aff = builtin("affine", &[-1.5, 0.25]).unwrap();
        let v = random_isometry(&mut rng, 4, 2);
        let maps = vec![KrausMap::compression(&v).unwrap(), KrausMap::pinching(2)];
        let fam = MapFamily::new(vec![0.5, 0.5], maps).unwrap();
        let data = vec![
            random_hermitian(&mut rng, 4, -1.0, 2.0),
            random_hermitian(&mut rng, 2, -1.0, 2.0),
        ];
        let field = fam.with_data(data, (-1.0, 2.0)).unwrap();
        let r = jensen_gap(&field, &aff, &Tolerance::default()).unwrap();
        assert!(r.gap_min_eig.abs() < 1e-10);

        let x = random_hermitian(&mut rng, 3, 0.5, 2.0);
        let r = discrete_jensen(
            &[1.0],
            &[KrausMap::identity(3)],
            &[x],
            &builtin("exp", &[]).unwrap(),
            &Tolerance::default(),
        )
        .unwrap();
        assert!(r.gap_min_eig.abs() < 1e-12);
    }

    #[test]
    fn schwarz_form_compression() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let f = builtin("power", &[2.0]).unwrap();
        for _ in 0..20 {
            let v = random_isometry(&mut rng, 5, 3);
            let x = random_hermitian(&mut rng, 5, -2.0, 2.0);
            let x = &x + &HermitianMatrix::scalar(5, 2.0);
            let r = discrete_jensen(
                &[1.0],
                &[KrausMap::compression(&v).unwrap()],
                &[x],
                &f,
                &Tolerance::default(),
            )
            .unwrap();
            assert!(r.verdict.holds, "gap {}", r.gap_min_eig);
        }
    }

    #[test]
    fn isometry_block_form() {
        // a_i are blocks of an isometry's rows, so sum a_i* a_i = 1.
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let f = builtin("power", &[-1.0]).unwrap();
        for _ in 0..20 {
            let v = random_isometry(&mut rng, 6, 2);
            let a1 = v.rows(0, 3).into_owned();
            let a2 = v.rows(3, 3).into_owned();
            let maps = vec![KrausMap::compression(&a1).unwrap(), KrausMap::compression(&a2).unwrap()];
            let data = vec![
                random_hermitian(&mut rng, 3, 0.5, 3.0),
                random_hermitian(&mut rng, 3, 0.5, 3.0),
            ];
            let r = discrete_jensen(&[1.0, 1.0], &maps, &data, &f, &Tolerance::default()).unwrap();
            assert!(r.verdict.holds, "gap {}", r.gap_min_eig);
        }
    }

    #[test]
    fn not_unital_is_rejected() {
        let field = MapFamily::new(vec![0.5], vec![KrausMap::identity(2)])
            .unwrap()
            .with_data(vec![x2()], (1.0, 3.0))
            .unwrap();
        let err = jensen_gap(&field, &builtin("exp", &[]).unwrap(), &Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::NotUnital { .. }));
    }

    #[test]
    fn splitting_spectral_projections_leaves_both_sides_unchanged() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let f = builtin("power", &[1.5]).unwrap();
        let v = random_isometry(&mut rng, 3, 2);
        let x = random_hermitian(&mut rng, 3, 0.5, 2.5);
        let y = random_hermitian(&mut rng, 2, 0.5, 2.5);
        let maps = vec![KrausMap::compression(&v).unwrap(), KrausMap::identity(2)];
        let coarse = MapFamily::new(vec![0.6, 0.4], maps.clone())
            .unwrap()
            .with_data(vec![x.clone(), y.clone()], (0.5, 2.5))
            .unwrap();
        let r0 = jensen_gap(&coarse, &f, &Tolerance::default()).unwrap();

        // Replace (phi, x) by the points (phi(P_j . P_j), t_j) with x = sum t_j P_j.
        let sd = x.eig().unwrap();
        let mut weights = Vec::new();
        let mut fine_maps = Vec::new();
        let mut data = Vec::new();
        for j in 0..sd.dim() {
            let col = sd.frame.columns(j, 1).into_owned();
            let ops: Vec<CMatrix> = maps[0].kraus_ops().iter().map(|k| k * &col).collect();
            fine_maps.push(KrausMap::new(ops).unwrap());
            weights.push(0.6);
            data.push(HermitianMatrix::diag(&[sd.eigenvalues[j]]));
        }
        fine_maps.push(maps[1].clone());
        weights.push(0.4);
        data.push(y);
        let fine = MapFamily::new(weights, fine_maps)
            .unwrap()
            .with_data(data, (0.5, 2.5))
            .unwrap();
        let r1 = jensen_gap(&fine, &f, &Tolerance::default()).unwrap();
        assert!((&r0.lhs - &r1.lhs).max_abs_entry() < 1e-10);
        assert!((&r0.rhs - &r1.rhs).max_abs_entry() < 1e-10);
    }
}
