//! Dense Hermitian matrices, a cyclic Jacobi eigensolver, spectral functional
//! calculus, the Loewner order and unitarily invariant norms.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::ScalarFunctionSpec;

pub type CMatrix = DMatrix<Complex64>;

/// Relative asymmetry accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_RTOL: f64 = 1e-12;

/// Slack used when testing eigenvalues against interval endpoints.
pub const ENDPOINT_SLACK: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction checks the Hermitian property against
/// `1e-12 * max|a_ij|` and then replaces the matrix by `(A + A*)/2`, so the
/// stored entries are exactly Hermitian.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.inner)
    }
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        let max_abs = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !max_abs.is_finite() {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let asymmetry = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tolerance = HERMITIAN_RTOL * max_abs;
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        Ok(Self::hermitized(m))
    }

    /// Symmetrizes without checking. Used for results that are Hermitian up
    /// to rounding (congruences, spectral reconstructions).
    pub(crate) fn hermitized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        let inner = (m + adj) * Complex64::new(0.5, 0.0);
        Self { inner }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            inner: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: CMatrix::zeros(n, n),
        }
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        Self::identity(n) * c
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    /// `T* A T` for an arbitrary (possibly rectangular) `T`.
    pub fn congruence(&self, t: &CMatrix) -> Result<HermitianMatrix> {
        if t.nrows() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: t.nrows(),
            });
        }
        Ok(Self::hermitized(t.adjoint() * &self.inner * t))
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    /// `<A v, v>` for a complex vector `v`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..v.len() {
            for j in 0..v.len() {
                acc += v[i].conj() * self.inner[(i, j)] * v[j];
            }
        }
        Ok(acc.re)
    }

    pub fn frobenius(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_hermitian(self)?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("dim >= 1"))
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "Hermitian arithmetic on mismatched dimensions");
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        self.check_same_dim(rhs);
        HermitianMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Add for HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: HermitianMatrix) -> HermitianMatrix {
        &self + &rhs
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        self.check_same_dim(rhs);
        HermitianMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Sub for HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: HermitianMatrix) -> HermitianMatrix {
        &self - &rhs
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        HermitianMatrix {
            inner: &self.inner * Complex64::new(rhs, 0.0),
        }
    }
}

impl Mul<f64> for HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        &self * rhs
    }
}

impl Neg for HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self * -1.0
    }
}

/// Eigenvalues in ascending order with an orthonormal frame of eigenvectors
/// (column `j` of `frame` belongs to `eigenvalues[j]`).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub frame: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `U g(Λ) U*`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> HermitianMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&x| g(x)).collect();
        self.reconstruct_from_values(&values)
    }

    /// `U diag(values) U*`.
    pub fn reconstruct_from_values(&self, values: &[f64]) -> HermitianMatrix {
        let n = self.dim();
        let mut scaled = self.frame.clone();
        for j in 0..n {
            let w = Complex64::new(values[j], 0.0);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        HermitianMatrix::hermitized(scaled * self.frame.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(|x| x)
    }

    /// Orthogonal projection onto the eigenvector `j`.
    pub fn projection(&self, j: usize) -> HermitianMatrix {
        let col = self.frame.column(j);
        HermitianMatrix::hermitized(col * col.adjoint())
    }
}

/// Spectral decomposition by cyclic complex Jacobi rotations.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let mut m = a.inner.clone();
    let mut v = CMatrix::identity(n, n);
    let scale = a.frobenius();

    let mut converged = n == 1 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q, scale);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let frame = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SpectralDecomposition { eigenvalues, frame })
}

// Zeroes m[p,q] with G = diag(1, e^{-i phi}) R, R a real Jacobi rotation.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, scale: f64) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r <= 1e-300 || r <= 1e-18 * scale {
        m[(p, q)] = Complex64::new(0.0, 0.0);
        m[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase_conj = (apq / r).conj();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase_conj * (-s);
    let g_qq = phase_conj * c;
    let n = m.nrows();

    for k in 0..n {
        let kp = m[(k, p)];
        let kq = m[(k, q)];
        m[(k, p)] = kp * g_pp + kq * g_qp;
        m[(k, q)] = kp * g_pq + kq * g_qq;
    }
    for k in 0..n {
        let pk = m[(p, k)];
        let qk = m[(q, k)];
        m[(p, k)] = g_pp.conj() * pk + g_qp.conj() * qk;
        m[(q, k)] = g_pq.conj() * pk + g_qq.conj() * qk;
    }
    for k in 0..n {
        let kp = v[(k, p)];
        let kq = v[(k, q)];
        v[(k, p)] = kp * g_pp + kq * g_qp;
        v[(k, q)] = kp * g_pq + kq * g_qq;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}

/// `f(A) = U f(Λ) U*`, rejecting eigenvalues outside the domain of `f`.
pub fn apply_function(f: &ScalarFunctionSpec, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let sd = eig_hermitian(a)?;
    apply_function_to(f, &sd)
}

pub fn apply_function_to(f: &ScalarFunctionSpec, sd: &SpectralDecomposition) -> Result<HermitianMatrix> {
    let mut values = Vec::with_capacity(sd.dim());
    for &ev in &sd.eigenvalues {
        let x = f.domain().admit(ev).ok_or_else(|| Error::SpectrumOutOfDomain {
            function: f.name().to_string(),
            eigenvalue: ev,
            domain: f.domain().to_string(),
        })?;
        values.push(f.eval(x));
    }
    Ok(sd.reconstruct_from_values(&values))
}

/// Applies an arbitrary real function to the spectrum.
pub fn map_spectrum(a: &HermitianMatrix, g: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    Ok(eig_hermitian(a)?.reconstruct_with(g))
}

/// `A^r` via the spectral decomposition.
///
/// Non-negative integer powers are defined for every Hermitian `A`; other
/// exponents require `A` positive definite.
pub fn matrix_power(a: &HermitianMatrix, r: f64) -> Result<HermitianMatrix> {
    if !r.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent {r}")));
    }
    let sd = eig_hermitian(a)?;
    if r >= 0.0 && r.fract() == 0.0 {
        let k = r as i32;
        return Ok(sd.reconstruct_with(|x| x.powi(k)));
    }
    let norm = sd.min().abs().max(sd.max().abs());
    if sd.min() <= 0.0 || sd.min() < 1e-10 * norm {
        return Err(Error::NotPositiveDefinite { min_eig: sd.min() });
    }
    Ok(sd.reconstruct_with(|x| x.powf(r)))
}

/// Tolerance record shared by every Loewner verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Self { rel }
    }

    /// Absolute tolerance `rel * max(1, scale)`.
    pub fn absolute(&self, scale: f64) -> f64 {
        self.rel * scale.max(1.0)
    }
}

/// Outcome of a Loewner (or scalar) comparison `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonVerdict {
    pub min_eig_of_difference: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl ComparisonVerdict {
    pub fn new(min_eig_of_difference: f64, tolerance: f64) -> Self {
        Self {
            min_eig_of_difference,
            tolerance,
            holds: min_eig_of_difference >= -tolerance,
        }
    }

    /// Scalar verdict for `lhs <= rhs`.
    pub fn scalar(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(rhs - lhs, tolerance)
    }
}

/// `A <= B` with the default scale `max(1, ||B - A||_op, ||B||_op)`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: &Tolerance) -> Result<ComparisonVerdict> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = b - a;
    let ev = diff.eigenvalues()?;
    let diff_norm = ev[0].abs().max(ev[ev.len() - 1].abs());
    let scale = diff_norm.max(b.operator_norm()?);
    Ok(ComparisonVerdict::new(ev[0], tol.absolute(scale)))
}

/// `A <= B` against an explicit absolute tolerance.
pub fn loewner_leq_abs(a: &HermitianMatrix, b: &HermitianMatrix, tolerance: f64) -> Result<ComparisonVerdict> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(ComparisonVerdict::new((b - a).min_eigenvalue()?, tolerance))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    Operator,
    Trace,
    Frobenius,
    KyFan(usize),
    Schatten(f64),
}

/// `Gauge`: a rank-one projection has norm 1. `Unit`: the identity has norm 1
/// (the raw norm is divided by the norm of the identity).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Gauge,
    Unit,
}

/// A unitarily invariant norm, computed from singular values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub kind: NormKind,
    pub normalization: Normalization,
}

impl NormSpec {
    pub fn new(kind: NormKind, normalization: Normalization) -> Result<Self> {
        match kind {
            NormKind::KyFan(0) => return Err(Error::InvalidNormParameter("Ky Fan order must be >= 1".into())),
            NormKind::Schatten(p) if !(p >= 1.0) || p.is_nan() => {
                return Err(Error::InvalidNormParameter(format!(
                    "Schatten exponent {p} must be >= 1"
                )))
            }
            _ => {}
        }
        Ok(Self { kind, normalization })
    }

    pub fn gauge(kind: NormKind) -> Result<Self> {
        Self::new(kind, Normalization::Gauge)
    }

    pub fn operator() -> Self {
        Self {
            kind: NormKind::Operator,
            normalization: Normalization::Gauge,
        }
    }

    fn raw(&self, sv: &mut [f64]) -> f64 {
        sv.sort_by(|a, b| b.total_cmp(a));
        match self.kind {
            NormKind::Operator => sv.first().copied().unwrap_or(0.0),
            NormKind::Trace => sv.iter().sum(),
            NormKind::Frobenius => sv.iter().map(|s| s * s).sum::<f64>().sqrt(),
            NormKind::KyFan(k) => sv.iter().take(k).sum(),
            NormKind::Schatten(p) => {
                if p.is_infinite() {
                    sv.first().copied().unwrap_or(0.0)
                } else {
                    sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
                }
            }
        }
    }

    fn normalizer(&self, n: usize) -> f64 {
        match self.normalization {
            Normalization::Gauge => 1.0,
            Normalization::Unit => self.raw(&mut vec![1.0; n]),
        }
    }

    /// Norm of a matrix given its singular values.
    pub fn of_singular_values(&self, singular_values: &[f64]) -> f64 {
        let n = singular_values.len();
        let mut sv = singular_values.to_vec();
        self.raw(&mut sv) / self.normalizer(n)
    }

    pub fn norm(&self, a: &HermitianMatrix) -> Result<f64> {
        let sv: Vec<f64> = a.eigenvalues()?.iter().map(|x| x.abs()).collect();
        Ok(self.of_singular_values(&sv))
    }

    /// Norm of an arbitrary square matrix via its singular values.
    pub fn norm_general(&self, a: &CMatrix) -> f64 {
        let sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
        self.of_singular_values(&sv)
    }

    /// `||1_n||`.
    pub fn identity_norm(&self, n: usize) -> f64 {
        self.of_singular_values(&vec![1.0; n])
    }

    /// `||diag(1, 0, ..., 0)||` in dimension `n`.
    pub fn rank_one_norm(&self, n: usize) -> f64 {
        let mut sv = vec![0.0; n];
        sv[0] = 1.0;
        self.of_singular_values(&sv)
    }

    pub fn is_gauge_normalized(&self, n: usize) -> bool {
        (self.rank_one_norm(n) - 1.0).abs() <= 1e-12
    }

    pub fn is_unit_normalized(&self, n: usize) -> bool {
        (self.identity_norm(n) - 1.0).abs() <= 1e-12
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let norm = match self.normalization {
            Normalization::Gauge => "gauge",
            Normalization::Unit => "unit",
        };
        match self.kind {
            NormKind::Operator => write!(f, "operator/{norm}"),
            NormKind::Trace => write!(f, "trace/{norm}"),
            NormKind::Frobenius => write!(f, "frobenius/{norm}"),
            NormKind::KyFan(k) => write!(f, "ky_fan({k})/{norm}"),
            NormKind::Schatten(p) => write!(f, "schatten({p})/{norm}"),
        }
    }
}
