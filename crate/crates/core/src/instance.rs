//! JSON instance format shared by the command line tools and the falsifier.
//!
//! ```json
//! {"kind": "jensen", "interval": [1, 3],
//!  "field": {"points": [{"weight": 1, "kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]],
//!                        "datum": [[2, 1], [1, 2]]}]},
//!  "function": {"name": "power", "params": [2]},
//!  "F": {"name": "diff", "params": [1]},
//!  "params": {}}
//! ```
//!
//! Matrix entries are real numbers or `[re, im]` pairs, rows listed in order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::converse::{BivariateSpec, Rev3Params, Rev3Point, SpectralBounds};
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianMatrix, NormKind, NormSpec, Normalization};
use crate::maps::{FieldPoint, KrausMap, PositiveMapField, VectorField, VectorPoint};
use crate::scalar::{builtin, ScalarFunctionSpec, SubgradientSelection};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    fn from_complex(z: Complex64) -> Self {
        Entry::Complex([z.re, z.im])
    }
}

pub type MatrixJson = Vec<Vec<Entry>>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixJson>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldJson {
    pub points: Vec<PointJson>,
    /// Rescale the Kraus operators so the field becomes unital before use.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    /// `[scale, shift]`: use `t -> f(scale * t + shift)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argument: Option<[f64; 2]>,
    /// `left`, `right` or `midpoint`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgradient: Option<String>,
}

impl FunctionJson {
    pub fn from_spec(f: &ScalarFunctionSpec) -> Self {
        Self {
            name: f.builtin_name().to_string(),
            params: f.parameters(),
            argument: f.argument().map(|(a, b)| [a, b]),
            subgradient: match f.selection() {
                SubgradientSelection::Midpoint => None,
                SubgradientSelection::Left => Some("left".into()),
                SubgradientSelection::Right => Some("right".into()),
            },
        }
    }

    pub fn to_spec(&self) -> Result<ScalarFunctionSpec> {
        let mut f = builtin(&self.name, &self.params)?;
        if let Some([scale, shift]) = self.argument {
            f = f.with_affine_argument(scale, shift)?;
        }
        if let Some(sel) = &self.subgradient {
            let sel = match sel.as_str() {
                "left" => SubgradientSelection::Left,
                "right" => SubgradientSelection::Right,
                "midpoint" => SubgradientSelection::Midpoint,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown subgradient selection `{other}`"
                    )))
                }
            };
            f = f.with_selection(sel);
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BivariateJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl BivariateJson {
    pub fn to_spec(&self) -> Result<BivariateSpec> {
        let spec = match (self.name.as_str(), self.params.as_slice()) {
            ("diff" | "difference", []) => BivariateSpec::Difference { lambda: 1.0 },
            ("diff" | "difference", [l]) => BivariateSpec::Difference { lambda: *l },
            ("ratio", []) => BivariateSpec::Ratio,
            ("probe", [q, l]) => BivariateSpec::PowerProbe { q: *q, lambda: *l },
            ("affine", [a, b, c]) => BivariateSpec::Affine { a: *a, b: *b, c: *c },
            ("diff" | "difference" | "ratio" | "probe" | "affine", p) => {
                return Err(Error::InvalidParameter(format!(
                    "F `{}` does not take {} parameters",
                    self.name,
                    p.len()
                )))
            }
            (other, _) => return Err(Error::NonCommutingUnsupportedF(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormJson {
    /// `operator`, `trace`, `frobenius`, `ky_fan` (with `k`), `schatten` (with `p`).
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// `gauge` (default) or `unit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,
}

impl NormJson {
    pub fn to_spec(&self) -> Result<NormSpec> {
        let kind = match (self.kind.as_str(), self.k, self.p) {
            ("operator", None, None) => NormKind::Operator,
            ("trace", None, None) => NormKind::Trace,
            ("frobenius", None, None) => NormKind::Frobenius,
            ("ky_fan", Some(k), None) => NormKind::KyFan(k),
            ("schatten", None, Some(p)) => NormKind::Schatten(p),
            _ => {
                return Err(Error::InvalidNormParameter(format!(
                    "norm `{}` with k = {:?}, p = {:?}",
                    self.kind, self.k, self.p
                )))
            }
        };
        let normalization = match self.normalization.as_deref() {
            None | Some("gauge") => Normalization::Gauge,
            Some("unit") => Normalization::Unit,
            Some(other) => return Err(Error::InvalidNormParameter(format!("normalization `{other}`"))),
        };
        NormSpec::new(kind, normalization)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsJson {
    pub m1: f64,
    #[serde(rename = "M1")]
    pub big_m1: f64,
    pub m2: f64,
    #[serde(rename = "M2")]
    pub big_m2: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<FunctionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormJson>,
    /// `convex` or `concave`, for the norm bounds of increasing functions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsJson>,
    /// Number of generated cases (`random-*` kinds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    /// Inclusive dimension range (`random-*` kinds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    /// Inclusive range for the number of field points (`random-*` kinds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionJson>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub big_f: Option<BivariateJson>,
    #[serde(default)]
    pub params: ParamsJson,
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn require<'a, T>(value: &'a Option<T>, location: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| parse_error(location, "missing"))
}

pub fn matrix_from_json(rows: &MatrixJson, location: &str) -> Result<CMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return Err(parse_error(location, "empty matrix"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n_cols {
            return Err(parse_error(
                format!("{location}[{i}]"),
                format!("row has {} entries, expected {n_cols}", r.len()),
            ));
        }
    }
    Ok(CMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j].value()))
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::from_complex(m[(i, j)])).collect())
        .collect()
}

fn hermitian_from_json(rows: &MatrixJson, location: &str) -> Result<HermitianMatrix> {
    HermitianMatrix::new(matrix_from_json(rows, location)?).map_err(|e| match e {
        Error::NotSquare { .. } | Error::NotHermitian { .. } => parse_error(location, e.to_string()),
        other => other,
    })
}

fn vector_from_json(v: &[Entry]) -> Vec<Complex64> {
    v.iter().map(|e| e.value()).collect()
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| parse_error(format!("line {} column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn interval(&self) -> Result<(f64, f64)> {
        let [m, big_m] = *require(&self.interval, "interval")?;
        Ok((m, big_m))
    }

    pub fn function(&self) -> Result<ScalarFunctionSpec> {
        require(&self.function, "function")?.to_spec()
    }

    /// `params.g`, defaulting to `f` itself.
    pub fn g_function(&self) -> Result<ScalarFunctionSpec> {
        match &self.params.g {
            Some(g) => g.to_spec(),
            None => self.function(),
        }
    }

    pub fn bivariate(&self) -> Result<BivariateSpec> {
        match &self.big_f {
            Some(f) => f.to_spec(),
            None => Ok(BivariateSpec::difference()),
        }
    }

    pub fn norm(&self) -> Result<NormSpec> {
        match &self.params.norm {
            Some(n) => n.to_spec(),
            None => Ok(NormSpec::operator()),
        }
    }

    pub fn param(&self, value: Option<f64>, name: &str) -> Result<f64> {
        value.ok_or_else(|| parse_error(format!("params.{name}"), "missing"))
    }

    fn points(&self) -> Result<&[PointJson]> {
        let field = require(&self.field, "field")?;
        if field.points.is_empty() {
            return Err(parse_error("field.points", "no points"));
        }
        Ok(&field.points)
    }

    /// The positive-map field; points without `kraus` use the identity map.
    pub fn map_field(&self) -> Result<PositiveMapField> {
        let interval = self.interval()?;
        let mut points = Vec::new();
        for (i, p) in self.points()?.iter().enumerate() {
            let loc = format!("field.points[{i}]");
            let datum = hermitian_from_json(require(&p.datum, &format!("{loc}.datum"))?, &format!("{loc}.datum"))?;
            let map = match &p.kraus {
                None => KrausMap::identity(datum.dim()),
                Some(ops) => {
                    let ops = ops
                        .iter()
                        .enumerate()
                        .map(|(j, k)| matrix_from_json(k, &format!("{loc}.kraus[{j}]")))
                        .collect::<Result<Vec<_>>>()?;
                    KrausMap::new(ops).map_err(|e| parse_error(format!("{loc}.kraus"), e.to_string()))?
                }
            };
            points.push(FieldPoint {
                weight: p.weight,
                map,
                datum,
            });
        }
        let field = PositiveMapField::new(points, interval)?;
        if self.field.as_ref().is_some_and(|f| f.normalize) {
            field.normalize_to_unital()
        } else {
            Ok(field)
        }
    }

    pub fn vector_field(&self) -> Result<VectorField> {
        let interval = self.interval()?;
        let mut points = Vec::new();
        for (i, p) in self.points()?.iter().enumerate() {
            let loc = format!("field.points[{i}]");
            let operator = hermitian_from_json(
                require(&p.operator, &format!("{loc}.operator"))?,
                &format!("{loc}.operator"),
            )?;
            let vector = vector_from_json(require(&p.vector, &format!("{loc}.vector"))?);
            if vector.len() != operator.dim() {
                return Err(parse_error(
                    format!("{loc}.vector"),
                    format!(
                        "length {} does not match operator dimension {}",
                        vector.len(),
                        operator.dim()
                    ),
                ));
            }
            points.push(VectorPoint {
                weight: p.weight,
                operator,
                vector,
            });
        }
        VectorField::new(points, interval)
    }

    pub fn rev3_points(&self) -> Result<Vec<Rev3Point>> {
        let mut points = Vec::new();
        for (i, p) in self.points()?.iter().enumerate() {
            let loc = format!("field.points[{i}]");
            let a = hermitian_from_json(require(&p.a, &format!("{loc}.a"))?, &format!("{loc}.a"))?;
            let b = hermitian_from_json(require(&p.b, &format!("{loc}.b"))?, &format!("{loc}.b"))?;
            let vector = vector_from_json(require(&p.vector, &format!("{loc}.vector"))?);
            points.push(Rev3Point {
                weight: p.weight,
                a,
                b,
                vector,
            });
        }
        Ok(points)
    }

    pub fn rev3_bounds(&self) -> Result<SpectralBounds> {
        let b = require(&self.params.bounds, "params.bounds")?;
        Ok(SpectralBounds {
            m1: b.m1,
            big_m1: b.big_m1,
            m2: b.m2,
            big_m2: b.big_m2,
        })
    }

    /// `q` defaults to the conjugate exponent of `p`.
    pub fn rev3_params(&self) -> Result<Rev3Params> {
        let lambda = self.param(self.params.lambda, "lambda")?;
        let s = self.param(self.params.s, "s")?;
        let p = self.param(self.params.p, "p")?;
        Ok(match self.params.q {
            Some(q) => Rev3Params { lambda, s, p, q },
            None => Rev3Params::with_conjugate(lambda, s, p),
        })
    }

    /// Serializes a map field as a `jensen` instance.
    pub fn jensen_witness(field: &PositiveMapField, f: &ScalarFunctionSpec) -> Self {
        let (m, big_m) = field.interval();
        let points = field
            .points()
            .iter()
            .map(|p| PointJson {
                weight: p.weight,
                kraus: Some(p.map.kraus_ops().iter().map(matrix_to_json).collect()),
                datum: Some(matrix_to_json(p.datum.as_matrix())),
                ..PointJson::default()
            })
            .collect();
        Instance {
            kind: "jensen".into(),
            interval: Some([m, big_m]),
            field: Some(FieldJson {
                points,
                normalize: false,
            }),
            function: Some(FunctionJson::from_spec(f)),
            big_f: None,
            params: ParamsJson::default(),
        }
    }
}
