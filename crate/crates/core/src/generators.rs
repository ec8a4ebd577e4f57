//! Seeded random instances and the random search for Jensen violations.
//!
//! Every draw comes from `ChaCha20Rng::seed_from_u64(seed)` with the stream
//! set to the trial index, so trial `i` is reproducible on its own.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::converse::{Rev3Point, SpectralBounds};
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianMatrix, Tolerance};
use crate::jensen::jensen_gap;
use crate::maps::{KrausMap, MapFamily, PositiveMapField, VectorField, VectorPoint};
use crate::scalar::ScalarFunctionSpec;

pub const RNG_ALGORITHM: &str = "ChaCha20";
pub const MAX_DIM: usize = 16;
const NORMALIZER_RETRIES: u64 = 8;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of
/// `diag(R)` divided out).
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let (q, r) = gaussian_matrix(rng, n, n).qr().unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`).
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    random_unitary(rng, rows).columns(0, cols).into_owned()
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} outside [1, {MAX_DIM}]"
        )));
    }
    Ok(())
}

fn check_range(m: f64, big_m: f64) -> Result<()> {
    if !(m < big_m) || !m.is_finite() || !big_m.is_finite() {
        return Err(Error::InvalidParameter(format!("need m < M (got {m}, {big_m})")));
    }
    Ok(())
}

/// `U diag(lambda) U*` with eigenvalues uniform on `[m, M]`.
pub fn random_hermitian_with(rng: &mut impl Rng, dim: usize, m: f64, big_m: f64) -> Result<HermitianMatrix> {
    check_dim(dim)?;
    check_range(m, big_m)?;
    let eigs: Vec<f64> = (0..dim).map(|_| rng.gen_range(m..=big_m)).collect();
    with_spectrum(rng, &eigs)
}

/// A random unitary conjugate of `diag(eigs)`.
pub fn with_spectrum(rng: &mut impl Rng, eigs: &[f64]) -> Result<HermitianMatrix> {
    let u = random_unitary(rng, eigs.len());
    HermitianMatrix::diag(eigs).congruence(&u.adjoint())
}

pub fn random_hermitian(dim: usize, m: f64, big_m: f64, seed: u64) -> Result<HermitianMatrix> {
    random_hermitian_with(&mut rng_for(seed, 0), dim, m, big_m)
}

/// Eigenvalues drawn from the endpoints `{m, M}` with probability `p_end`,
/// uniform otherwise.
pub fn random_hermitian_biased(
    rng: &mut impl Rng,
    dim: usize,
    m: f64,
    big_m: f64,
    p_end: f64,
) -> Result<HermitianMatrix> {
    check_dim(dim)?;
    check_range(m, big_m)?;
    let eigs: Vec<f64> = (0..dim)
        .map(|_| {
            if rng.gen_bool(p_end) {
                if rng.gen_bool(0.5) {
                    m
                } else {
                    big_m
                }
            } else {
                rng.gen_range(m..=big_m)
            }
        })
        .collect();
    with_spectrum(rng, &eigs)
}

/// Random Kraus maps normalized so that `sum_i w_i phi_i(1) = 1`.
pub fn random_unital_family_with(
    rng: &mut impl Rng,
    n_points: usize,
    in_dims: &[usize],
    out_dim: usize,
    kraus_per_map: usize,
) -> Result<MapFamily> {
    if n_points == 0 || kraus_per_map == 0 || in_dims.len() != n_points {
        return Err(Error::InvalidParameter(format!(
            "need n_points >= 1, kraus_per_map >= 1 and one input dimension per point \
             (got {n_points}, {kraus_per_map}, {} dims)",
            in_dims.len()
        )));
    }
    check_dim(out_dim)?;
    for &d in in_dims {
        check_dim(d)?;
    }
    let mut last = Error::Empty;
    for _ in 0..NORMALIZER_RETRIES {
        let weights: Vec<f64> = (0..n_points).map(|_| rng.gen_range(0.1..=1.0)).collect();
        let maps = in_dims
            .iter()
            .map(|&d| KrausMap::new((0..kraus_per_map).map(|_| gaussian_matrix(rng, out_dim, d)).collect()))
            .collect::<Result<Vec<_>>>()?;
        match MapFamily::new(weights, maps)?.normalize_to_unital() {
            Ok(fam) => return Ok(fam),
            Err(e @ Error::SingularNormalizer { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

pub fn random_unital_field(
    n_points: usize,
    in_dim: usize,
    out_dim: usize,
    kraus_per_map: usize,
    seed: u64,
) -> Result<MapFamily> {
    random_unital_family_with(
        &mut rng_for(seed, 0),
        n_points,
        &vec![in_dim; n_points],
        out_dim,
        kraus_per_map,
    )
}

/// Ranges used when drawing whole fields.
#[derive(Clone, Copy, Debug)]
pub struct FieldShape {
    pub points: (usize, usize),
    pub dims: (usize, usize),
    pub kraus: (usize, usize),
}

impl Default for FieldShape {
    fn default() -> Self {
        Self {
            points: (1, 4),
            dims: (2, 8),
            kraus: (1, 2),
        }
    }
}

/// A unital field with data spectra in `[m, M]`.
pub fn random_field(rng: &mut impl Rng, shape: FieldShape, m: f64, big_m: f64) -> Result<PositiveMapField> {
    let n = rng.gen_range(shape.points.0..=shape.points.1);
    let out_dim = rng.gen_range(shape.dims.0..=shape.dims.1);
    let in_dims: Vec<usize> = (0..n).map(|_| rng.gen_range(shape.dims.0..=shape.dims.1)).collect();
    let kraus = rng.gen_range(shape.kraus.0..=shape.kraus.1);
    // sum_i w_i K_i K_i* has rank at most sum_i in_dim_i * kraus
    let kraus = kraus.max(out_dim.div_ceil(in_dims.iter().sum::<usize>()));
    let fam = random_unital_family_with(rng, n, &in_dims, out_dim, kraus)?;
    let data = in_dims
        .iter()
        .map(|&d| random_hermitian_with(rng, d, m, big_m))
        .collect::<Result<Vec<_>>>()?;
    fam.with_data(data, (m, big_m))
}

/// Weighted `(A_i, x_i)` pairs with `sum w_i |x_i|^2 = 1`.
pub fn random_vector_field(rng: &mut impl Rng, n_points: usize, dim: usize, m: f64, big_m: f64) -> Result<VectorField> {
    let mut points = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let weight = rng.gen_range(0.1..=1.0);
        let operator = random_hermitian_with(rng, dim, m, big_m)?;
        let vector: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        points.push(VectorPoint {
            weight,
            operator,
            vector,
        });
    }
    normalize_vectors(&mut points);
    VectorField::new(points, (m, big_m))
}

fn normalize_vectors(points: &mut [VectorPoint]) {
    let mass: f64 = points
        .iter()
        .map(|p| p.weight * p.vector.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    let s = 1.0 / mass.sqrt();
    for p in points {
        for z in &mut p.vector {
            *z *= s;
        }
    }
}

/// Points `(w, A, B, x)` with spectra inside the given bounds and
/// `sum w |x|^2 = 1`.
pub fn random_rev3_points(
    rng: &mut impl Rng,
    n_points: usize,
    dim: usize,
    bounds: SpectralBounds,
) -> Result<Vec<Rev3Point>> {
    let mut pts = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let weight = rng.gen_range(0.1..=1.0);
        let a = random_hermitian_with(rng, dim, bounds.m1, bounds.big_m1)?;
        let b = random_hermitian_with(rng, dim, bounds.m2, bounds.big_m2)?;
        let vector: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        pts.push(Rev3Point { weight, a, b, vector });
    }
    let mass: f64 = pts
        .iter()
        .map(|p| p.weight * p.vector.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    let s = 1.0 / mass.sqrt();
    for p in &mut pts {
        for z in &mut p.vector {
            *z *= s;
        }
    }
    Ok(pts)
}

#[derive(Clone, Copy, Debug)]
pub struct FalsifyConfig {
    pub trials: u64,
    pub seed: u64,
    /// Inclusive range of matrix dimensions.
    pub dims: (usize, usize),
    pub interval: (f64, f64),
}

#[derive(Clone, Debug)]
pub struct FalsificationResult {
    pub found: bool,
    pub witness: Option<PositiveMapField>,
    /// Smallest `gap_min_eig / scale` over the trials examined.
    pub min_gap_seen: f64,
    pub trial: Option<u64>,
    pub trials_run: u64,
}

/// A trial counts as a violation when the Jensen gap has an eigenvalue
/// below `-VIOLATION_RTOL * scale`.
pub const VIOLATION_RTOL: f64 = 1e-6;
const CHUNK: u64 = 256;

/// Trial `i` uses stream `i` and one of three shapes chosen by `i mod 3`:
/// a generic random field, a compression `V* X V` with endpoint-heavy `X`,
/// and a midpoint pair `(f(A) + f(B))/2` against `f((A + B)/2)`.
pub fn falsification_trial(cfg: &FalsifyConfig, trial: u64) -> Result<PositiveMapField> {
    let mut rng = rng_for(cfg.seed, trial);
    let (m, big_m) = cfg.interval;
    let (lo, hi) = cfg.dims;
    match trial % 3 {
        0 => random_field(
            &mut rng,
            FieldShape {
                points: (1, 3),
                dims: (lo, hi),
                kraus: (1, 2),
            },
            m,
            big_m,
        ),
        1 => {
            let out = rng.gen_range(lo.max(2).min(hi)..=hi);
            let inn = rng.gen_range(out..=(2 * out).min(MAX_DIM));
            let v = random_isometry(&mut rng, inn, out);
            let x = random_hermitian_biased(&mut rng, inn, m, big_m, 0.7)?;
            MapFamily::new(vec![1.0], vec![KrausMap::compression(&v)?])?.with_data(vec![x], (m, big_m))
        }
        _ => {
            let d = rng.gen_range(lo.max(2).min(hi)..=hi);
            let a = random_hermitian_biased(&mut rng, d, m, big_m, 0.7)?;
            let b = random_hermitian_biased(&mut rng, d, m, big_m, 0.7)?;
            let id = KrausMap::identity(d);
            MapFamily::new(vec![0.5, 0.5], vec![id.clone(), id])?.with_data(vec![a, b], (m, big_m))
        }
    }
}

/// Searches for a unital field with `f(int phi(x)) </= int phi(f(x))`.
/// Trials run in parallel in fixed-size chunks; the reported witness is the
/// lowest-index violation, so the outcome does not depend on scheduling.
pub fn falsify_jensen(f: &ScalarFunctionSpec, cfg: &FalsifyConfig) -> Result<FalsificationResult> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    check_dim(cfg.dims.0)?;
    check_dim(cfg.dims.1)?;
    if cfg.dims.0 > cfg.dims.1 {
        return Err(Error::InvalidParameter(format!(
            "dimension range {:?} is empty",
            cfg.dims
        )));
    }
    check_range(cfg.interval.0, cfg.interval.1)?;
    if !f.domain().contains_interval(cfg.interval.0, cfg.interval.1) {
        return Err(Error::DomainViolation(format!(
            "[{}, {}] is not inside the domain {} of `{}`",
            cfg.interval.0,
            cfg.interval.1,
            f.domain(),
            f.name()
        )));
    }
    let tol = Tolerance::default();
    let mut min_gap = f64::INFINITY;
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + CHUNK).min(cfg.trials);
        let results: Vec<(u64, Option<(f64, bool)>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let outcome = falsification_trial(cfg, i)
                    .and_then(|field| jensen_gap(&field, f, &tol))
                    .ok()
                    .map(|r| (r.gap_min_eig / r.scale, r.gap_min_eig < -VIOLATION_RTOL * r.scale));
                (i, outcome)
            })
            .collect();
        for (i, outcome) in results {
            let Some((rel_gap, violated)) = outcome else { continue };
            min_gap = min_gap.min(rel_gap);
            if violated {
                return Ok(FalsificationResult {
                    found: true,
                    witness: Some(falsification_trial(cfg, i)?),
                    min_gap_seen: min_gap,
                    trial: Some(i),
                    trials_run: i + 1,
                });
            }
        }
        start = end;
    }
    Ok(FalsificationResult {
        found: false,
        witness: None,
        min_gap_seen: min_gap,
        trial: None,
        trials_run: cfg.trials,
    })
}
