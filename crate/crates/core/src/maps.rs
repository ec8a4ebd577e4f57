//! Positive linear maps in Kraus form and finite unital fields of them.
//!
//! A field is a list of `(weight, map, datum)` triples standing for the
//! integral of `phi_t(x_t)` against an atomic measure. Weights stay outside
//! the Kraus operators so that a field can be re-weighted in place.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{apply_function_to, eig_hermitian, matrix_power, CMatrix, HermitianMatrix};
use crate::scalar::{check_interval, ScalarFunctionSpec};

/// Residual accepted by [`PositiveMapField::check_unital`].
pub const UNITALITY_TOL: f64 = 1e-8;

/// `X -> sum_k K_k X K_k*` with each `K_k` of shape `out_dim x in_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    in_dim: usize,
    out_dim: usize,
    kraus_ops: Vec<CMatrix>,
}

impl KrausMap {
    pub fn new(kraus_ops: Vec<CMatrix>) -> Result<Self> {
        let first = kraus_ops.first().ok_or(Error::Empty)?;
        let (out_dim, in_dim) = first.shape();
        if out_dim == 0 || in_dim == 0 {
            return Err(Error::Empty);
        }
        for k in &kraus_ops {
            if k.nrows() != out_dim {
                return Err(Error::DimMismatch {
                    expected: out_dim,
                    found: k.nrows(),
                });
            }
            if k.ncols() != in_dim {
                return Err(Error::DimMismatch {
                    expected: in_dim,
                    found: k.ncols(),
                });
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidParameter("non-finite Kraus entry".into()));
            }
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus_ops,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            in_dim: n,
            out_dim: n,
            kraus_ops: vec![CMatrix::identity(n, n)],
        }
    }

    /// Pinching onto the diagonal: Kraus operators are the coordinate
    /// projections.
    pub fn pinching(n: usize) -> Self {
        let ops = (0..n)
            .map(|i| {
                let mut p = CMatrix::zeros(n, n);
                p[(i, i)] = Complex64::new(1.0, 0.0);
                p
            })
            .collect();
        Self {
            in_dim: n,
            out_dim: n,
            kraus_ops: ops,
        }
    }

    /// `A -> <A x, x>` as a map into 1x1 matrices (single Kraus op `x*`).
    pub fn vector_state(x: &[Complex64]) -> Result<Self> {
        let row = CMatrix::from_fn(1, x.len(), |_, j| x[j].conj());
        Self::new(vec![row])
    }

    /// `X -> V* X V` for `V` of shape `in_dim x out_dim`.
    pub fn compression(v: &CMatrix) -> Result<Self> {
        Self::new(vec![v.adjoint()])
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn apply(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        if x.dim() != self.in_dim {
            return Err(Error::DimMismatch {
                expected: self.in_dim,
                found: x.dim(),
            });
        }
        let mut acc = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus_ops {
            acc += k * x.as_matrix() * k.adjoint();
        }
        Ok(HermitianMatrix::hermitized(acc))
    }

    /// `phi(1)`.
    pub fn image_of_identity(&self) -> HermitianMatrix {
        let mut acc = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus_ops {
            acc += k * k.adjoint();
        }
        HermitianMatrix::hermitized(acc)
    }

    /// Every Kraus operator left-multiplied by `t`.
    fn premultiplied(&self, t: &CMatrix) -> Self {
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kraus_ops: self.kraus_ops.iter().map(|k| t * k).collect(),
        }
    }
}

pub fn apply_map(phi: &KrausMap, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    phi.apply(x)
}

/// Weighted maps without data: the skeleton of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct MapFamily {
    pub weights: Vec<f64>,
    pub maps: Vec<KrausMap>,
}

impl MapFamily {
    pub fn new(weights: Vec<f64>, maps: Vec<KrausMap>) -> Result<Self> {
        if weights.len() != maps.len() {
            return Err(Error::DimMismatch {
                expected: maps.len(),
                found: weights.len(),
            });
        }
        let first = maps.first().ok_or(Error::Empty)?;
        for m in &maps {
            if m.out_dim != first.out_dim {
                return Err(Error::DimMismatch {
                    expected: first.out_dim,
                    found: m.out_dim,
                });
            }
        }
        for &w in &weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("weight {w} must be finite and >= 0")));
            }
        }
        Ok(Self { weights, maps })
    }

    pub fn out_dim(&self) -> usize {
        self.maps[0].out_dim
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// `S = sum_i w_i phi_i(1)`.
    pub fn normalizer(&self) -> HermitianMatrix {
        let n = self.out_dim();
        self.weights
            .iter()
            .zip(&self.maps)
            .fold(HermitianMatrix::zeros(n), |acc, (w, m)| {
                &acc + &(m.image_of_identity() * *w)
            })
    }

    /// Max-entry distance of the normalizer from the identity.
    pub fn unitality_residual(&self) -> f64 {
        (&self.normalizer() - &HermitianMatrix::identity(self.out_dim())).max_abs_entry()
    }

    /// Replaces every Kraus operator `K` by `S^{-1/2} K`.
    pub fn normalize_to_unital(&self) -> Result<Self> {
        let s = self.normalizer();
        let sd = eig_hermitian(&s)?;
        let norm = sd.max().abs().max(sd.min().abs());
        if sd.min() <= 0.0 || sd.min() < 1e-10 * norm {
            return Err(Error::SingularNormalizer { min_eig: sd.min() });
        }
        let inv_sqrt = matrix_power(&s, -0.5)?.into_matrix();
        Ok(Self {
            weights: self.weights.clone(),
            maps: self.maps.iter().map(|m| m.premultiplied(&inv_sqrt)).collect(),
        })
    }

    /// Attaches data and the declared spectral interval.
    pub fn with_data(&self, data: Vec<HermitianMatrix>, interval: (f64, f64)) -> Result<PositiveMapField> {
        if data.len() != self.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                found: data.len(),
            });
        }
        let points = self
            .weights
            .iter()
            .zip(&self.maps)
            .zip(data)
            .map(|((&weight, map), datum)| FieldPoint {
                weight,
                map: map.clone(),
                datum,
            })
            .collect();
        PositiveMapField::new(points, interval)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldPoint {
    pub weight: f64,
    pub map: KrausMap,
    pub datum: HermitianMatrix,
}

/// A finite field `((w_i, phi_i, x_i))` with every spectrum inside the
/// declared interval `[m, M]`.
///
/// Unitality is not a construction invariant; operations that need it call
/// [`PositiveMapField::check_unital`].
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMapField {
    points: Vec<FieldPoint>,
    out_dim: usize,
    interval: (f64, f64),
}

impl PositiveMapField {
    pub fn new(points: Vec<FieldPoint>, interval: (f64, f64)) -> Result<Self> {
        let (m, big_m) = interval;
        if !m.is_finite() || !big_m.is_finite() || m > big_m {
            return Err(Error::InvalidParameter(format!("interval [{m}, {big_m}]")));
        }
        let first = points.first().ok_or(Error::Empty)?;
        let out_dim = first.map.out_dim;
        for (i, p) in points.iter().enumerate() {
            if p.map.out_dim != out_dim {
                return Err(Error::DimMismatch {
                    expected: out_dim,
                    found: p.map.out_dim,
                });
            }
            if p.datum.dim() != p.map.in_dim {
                return Err(Error::DimMismatch {
                    expected: p.map.in_dim,
                    found: p.datum.dim(),
                });
            }
            if !(p.weight >= 0.0) || !p.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "weight {} at point {i} must be finite and >= 0",
                    p.weight
                )));
            }
            let ev = p.datum.eigenvalues()?;
            let (lo, hi) = (ev[0], ev[ev.len() - 1]);
            let slack = crate::hermitian::ENDPOINT_SLACK * m.abs().max(big_m.abs()).max(1.0);
            if lo < m - slack || hi > big_m + slack {
                return Err(Error::SpectrumOutOfRange { lo, hi, m, big_m });
            }
        }
        Ok(Self {
            points,
            out_dim,
            interval,
        })
    }

    pub fn points(&self) -> &[FieldPoint] {
        &self.points
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn family(&self) -> MapFamily {
        MapFamily {
            weights: self.points.iter().map(|p| p.weight).collect(),
            maps: self.points.iter().map(|p| p.map.clone()).collect(),
        }
    }

    pub fn unitality_residual(&self) -> f64 {
        self.family().unitality_residual()
    }

    pub fn check_unital(&self) -> Result<()> {
        let residual = self.unitality_residual();
        if residual > UNITALITY_TOL {
            return Err(Error::NotUnital {
                residual,
                tolerance: UNITALITY_TOL,
            });
        }
        Ok(())
    }

    pub fn normalize_to_unital(&self) -> Result<Self> {
        let fam = self.family().normalize_to_unital()?;
        fam.with_data(self.points.iter().map(|p| p.datum.clone()).collect(), self.interval)
    }

    /// Same maps and weights, data replaced.
    pub fn with_data(&self, data: Vec<HermitianMatrix>, interval: (f64, f64)) -> Result<Self> {
        self.family().with_data(data, interval)
    }

    /// `sum_i w_i phi_i(g(x_i))` for any matrix-valued `g`, summed in index
    /// order.
    pub fn integrate_with(
        &self,
        mut g: impl FnMut(&HermitianMatrix) -> Result<HermitianMatrix>,
    ) -> Result<HermitianMatrix> {
        let mut acc = HermitianMatrix::zeros(self.out_dim);
        for p in &self.points {
            let y = g(&p.datum)?;
            acc = &acc + &(p.map.apply(&y)? * p.weight);
        }
        Ok(acc)
    }

    /// `sum_i w_i phi_i(h(x_i))` where `h` acts on each datum's spectrum.
    pub fn integrate_spectral(&self, h: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        self.integrate_with(|x| Ok(eig_hermitian(x)?.reconstruct_with(&h)))
    }
}

/// `sum_i w_i phi_i(x_i)`, or `sum_i w_i phi_i(f(x_i))` when `f` is given.
pub fn integrate_field(field: &PositiveMapField, f: Option<&ScalarFunctionSpec>) -> Result<HermitianMatrix> {
    match f {
        None => field.integrate_with(|x| Ok(x.clone())),
        Some(f) => field.integrate_with(|x| apply_function_to(f, &eig_hermitian(x)?)),
    }
}

pub fn normalize_to_unital(field: &PositiveMapField) -> Result<PositiveMapField> {
    field.normalize_to_unital()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorPoint {
    pub weight: f64,
    pub operator: HermitianMatrix,
    pub vector: Vec<Complex64>,
}

/// Weighted `(A_t, x_t)` pairs with `sum_i w_i |x_i|^2 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    points: Vec<VectorPoint>,
    interval: (f64, f64),
}

/// Accepted deviation of the total vector mass from 1.
pub const VECTOR_MASS_TOL: f64 = 1e-10;

impl VectorField {
    pub fn new(points: Vec<VectorPoint>, interval: (f64, f64)) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        for p in &points {
            if p.vector.len() != p.operator.dim() {
                return Err(Error::DimMismatch {
                    expected: p.operator.dim(),
                    found: p.vector.len(),
                });
            }
            if !(p.weight >= 0.0) || !p.weight.is_finite() {
                return Err(Error::InvalidParameter(format!("weight {}", p.weight)));
            }
        }
        let vf = Self { points, interval };
        let mass = vf.mass();
        if (mass - 1.0).abs() > VECTOR_MASS_TOL {
            return Err(Error::NotNormalized { mass });
        }
        Ok(vf)
    }

    pub fn points(&self) -> &[VectorPoint] {
        &self.points
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// `sum_i w_i |x_i|^2`.
    pub fn mass(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.weight * p.vector.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Verifies that every operator has spectrum in the declared interval,
    /// with `0 < m < M`.
    pub fn check_spectra(&self) -> Result<()> {
        let (m, big_m) = self.interval;
        check_interval(m, big_m)?;
        if m <= 0.0 {
            return Err(Error::InvalidParameter(format!("need 0 < m, got m = {m}")));
        }
        for p in &self.points {
            let ev = p.operator.eigenvalues()?;
            let (lo, hi) = (ev[0], ev[ev.len() - 1]);
            let slack = crate::hermitian::ENDPOINT_SLACK * big_m.max(1.0);
            if lo < m - slack || hi > big_m + slack {
                return Err(Error::SpectrumOutOfRange { lo, hi, m, big_m });
            }
        }
        Ok(())
    }

    /// `sum_i w_i <g(A_i) x_i, x_i>`.
    pub fn expectation(&self, g: impl Fn(&HermitianMatrix) -> Result<HermitianMatrix>) -> Result<f64> {
        let mut acc = 0.0;
        for p in &self.points {
            acc += p.weight * g(&p.operator)?.quadratic_form(&p.vector)?;
        }
        Ok(acc)
    }

    /// Vector states `A -> <A x_t, x_t>` as a field into 1x1 matrices.
    pub fn to_map_field(&self) -> Result<PositiveMapField> {
        let mass = self.mass();
        if (mass - 1.0).abs() > VECTOR_MASS_TOL {
            return Err(Error::NotNormalized { mass });
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                Ok(FieldPoint {
                    weight: p.weight,
                    map: KrausMap::vector_state(&p.vector)?,
                    datum: p.operator.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PositiveMapField::new(points, self.interval)
    }
}

pub fn vector_field_to_map_field(vf: &VectorField) -> Result<PositiveMapField> {
    vf.to_map_field()
}
