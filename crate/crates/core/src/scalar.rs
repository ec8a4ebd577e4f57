//! Scalar functions with convexity metadata, chord coefficients and
//! subdifferential selections.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hermitian::ENDPOINT_SLACK;

/// A real interval with open or closed endpoints (infinite endpoints are
/// always open).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn nonnegative() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn positive() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_closed: false,
            hi_closed: false,
        }
    }

    fn slack(end: f64) -> f64 {
        ENDPOINT_SLACK * end.abs().max(1.0)
    }

    /// Returns `x` (clamped onto a closed endpoint when it misses it by at
    /// most the endpoint slack) if it belongs to the interval.
    pub fn admit(&self, x: f64) -> Option<f64> {
        if x.is_nan() {
            return None;
        }
        let mut y = x;
        if self.lo.is_finite() {
            if self.lo_closed {
                if y < self.lo - Self::slack(self.lo) {
                    return None;
                }
                y = y.max(self.lo);
            } else if y <= self.lo {
                return None;
            }
        }
        if self.hi.is_finite() {
            if self.hi_closed {
                if y > self.hi + Self::slack(self.hi) {
                    return None;
                }
                y = y.min(self.hi);
            } else if y >= self.hi {
                return None;
            }
        }
        Some(y)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.admit(x).is_some()
    }

    /// `[m, M]` lies in the interval; open endpoints must be cleared by a
    /// margin of `1e-10`.
    pub fn contains_interval(&self, m: f64, big_m: f64) -> bool {
        let lo_ok = if !self.lo.is_finite() {
            m.is_finite()
        } else if self.lo_closed {
            m >= self.lo
        } else {
            m >= self.lo + Self::slack(self.lo)
        };
        let hi_ok = if !self.hi.is_finite() {
            big_m.is_finite()
        } else if self.hi_closed {
            big_m <= self.hi
        } else {
            big_m <= self.hi - Self::slack(self.hi)
        };
        lo_ok && hi_ok && m <= big_m
    }

    /// Preimage under `x -> scale * x + shift` (`scale != 0`).
    fn preimage(&self, scale: f64, shift: f64) -> Self {
        let a = (self.lo - shift) / scale;
        let b = (self.hi - shift) / scale;
        if scale > 0.0 {
            Self {
                lo: a,
                hi: b,
                lo_closed: self.lo_closed,
                hi_closed: self.hi_closed,
            }
        } else {
            Self {
                lo: b,
                hi: a,
                lo_closed: self.hi_closed,
                hi_closed: self.lo_closed,
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FunctionFlags {
    pub convex: bool,
    pub concave: bool,
    pub operator_convex: bool,
    pub operator_concave: bool,
    pub operator_monotone: bool,
    /// Non-decreasing on the domain.
    pub increasing: bool,
    pub decreasing: bool,
    pub nonneg: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FunctionKind {
    Power(f64),
    Exp,
    Log,
    XLogX,
    Abs,
    Affine { slope: f64, intercept: f64 },
}

/// Which point of `[f'_-(x), f'_+(x)]` the default subgradient picks at
/// interior kinks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubgradientSelection {
    Left,
    Right,
    #[default]
    Midpoint,
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named builtin function, optionally precomposed with an affine map of
/// its argument, together with its domain and flag metadata.
#[derive(Clone)]
pub struct ScalarFunctionSpec {
    kind: FunctionKind,
    name: String,
    argument: Option<(f64, f64)>,
    domain: Interval,
    flags: FunctionFlags,
    selection: SubgradientSelection,
    custom_subgradient: Option<RealFn>,
}

impl fmt::Debug for ScalarFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunctionSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("argument", &self.argument)
            .field("domain", &self.domain)
            .field("flags", &self.flags)
            .field("selection", &self.selection)
            .field("custom_subgradient", &self.custom_subgradient.is_some())
            .finish()
    }
}

fn power_flags(p: f64) -> FunctionFlags {
    FunctionFlags {
        convex: p >= 1.0 || p <= 0.0,
        concave: (0.0..=1.0).contains(&p),
        operator_convex: (1.0..=2.0).contains(&p) || (-1.0..=0.0).contains(&p),
        operator_concave: (0.0..=1.0).contains(&p),
        operator_monotone: (0.0..=1.0).contains(&p),
        increasing: p >= 0.0,
        decreasing: p <= 0.0,
        nonneg: true,
    }
}

/// Looks up a builtin by name.
///
/// | name       | params      | domain    |
/// |------------|-------------|-----------|
/// | `power`    | `[p]`       | `[0,inf)` for integer `p >= 1`, else `(0,inf)` |
/// | `exp`      | none        | real line |
/// | `log`      | none        | `(0,inf)` |
/// | `xlogx`    | none        | `[0,inf)`, with `0 log 0 = 0` |
/// | `abs`      | none        | real line |
/// | `affine`   | `[a, b]`    | real line |
/// | `identity` | none        | real line |
pub fn builtin(name: &str, params: &[f64]) -> Result<ScalarFunctionSpec> {
    if let Some(bad) = params.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite parameter {bad}")));
    }
    let expect = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "`{name}` takes {n} parameter(s), got {}",
                params.len()
            )))
        }
    };
    let (kind, domain, flags, display) = match name {
        "power" => {
            expect(1)?;
            let p = params[0];
            let domain = if p >= 1.0 && p.fract() == 0.0 {
                Interval::nonnegative()
            } else {
                Interval::positive()
            };
            (FunctionKind::Power(p), domain, power_flags(p), format!("power({p})"))
        }
        "exp" => {
            expect(0)?;
            let flags = FunctionFlags {
                convex: true,
                increasing: true,
                nonneg: true,
                ..Default::default()
            };
            (FunctionKind::Exp, Interval::real_line(), flags, "exp".to_string())
        }
        "log" => {
            expect(0)?;
            let flags = FunctionFlags {
                concave: true,
                operator_concave: true,
                operator_monotone: true,
                increasing: true,
                ..Default::default()
            };
            (FunctionKind::Log, Interval::positive(), flags, "log".to_string())
        }
        "xlogx" => {
            expect(0)?;
            let flags = FunctionFlags {
                convex: true,
                operator_convex: true,
                ..Default::default()
            };
            (FunctionKind::XLogX, Interval::nonnegative(), flags, "xlogx".to_string())
        }
        "abs" => {
            expect(0)?;
            let flags = FunctionFlags {
                convex: true,
                nonneg: true,
                ..Default::default()
            };
            (FunctionKind::Abs, Interval::real_line(), flags, "abs".to_string())
        }
        "affine" | "identity" => {
            let (slope, intercept) = if name == "identity" {
                expect(0)?;
                (1.0, 0.0)
            } else {
                expect(2)?;
                (params[0], params[1])
            };
            let flags = FunctionFlags {
                convex: true,
                concave: true,
                operator_convex: true,
                operator_concave: true,
                operator_monotone: slope >= 0.0,
                increasing: slope >= 0.0,
                decreasing: slope <= 0.0,
                nonneg: slope == 0.0 && intercept >= 0.0,
            };
            let display = if name == "identity" {
                "identity".to_string()
            } else {
                format!("affine({slope}, {intercept})")
            };
            (
                FunctionKind::Affine { slope, intercept },
                Interval::real_line(),
                flags,
                display,
            )
        }
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(ScalarFunctionSpec {
        kind,
        name: display,
        argument: None,
        domain,
        flags,
        selection: SubgradientSelection::default(),
        custom_subgradient: None,
    })
}

/// Parses the short form `name[:p1,p2,...]`, e.g. `power:2`, `exp`,
/// `affine:2,-1`.
pub fn parse_function(text: &str) -> Result<ScalarFunctionSpec> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (text.trim(), None),
    };
    let params = match rest {
        None => Vec::new(),
        Some(r) => r
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse `{s}` in `{text}`")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    builtin(name, &params)
}

impl ScalarFunctionSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    /// Builtin name as accepted by [`builtin`].
    pub fn builtin_name(&self) -> &'static str {
        match self.kind {
            FunctionKind::Power(_) => "power",
            FunctionKind::Exp => "exp",
            FunctionKind::Log => "log",
            FunctionKind::XLogX => "xlogx",
            FunctionKind::Abs => "abs",
            FunctionKind::Affine { .. } if self.name == "identity" => "identity",
            FunctionKind::Affine { .. } => "affine",
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match self.kind {
            FunctionKind::Power(p) => vec![p],
            FunctionKind::Affine { slope, intercept } if self.name != "identity" => {
                vec![slope, intercept]
            }
            _ => Vec::new(),
        }
    }

    pub fn argument(&self) -> Option<(f64, f64)> {
        self.argument
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn flags(&self) -> FunctionFlags {
        self.flags
    }

    pub fn selection(&self) -> SubgradientSelection {
        self.selection
    }

    pub fn has_custom_subgradient(&self) -> bool {
        self.custom_subgradient.is_some()
    }

    /// `x -> f(scale * x + shift)`.
    pub fn with_affine_argument(&self, scale: f64, shift: f64) -> Result<Self> {
        if !scale.is_finite() || !shift.is_finite() || scale == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "affine argument ({scale}, {shift}) must have finite non-zero scale"
            )));
        }
        let (s0, c0) = self.argument.unwrap_or((1.0, 0.0));
        let mut out = self.clone();
        out.argument = Some((s0 * scale, s0 * shift + c0));
        out.domain = self.domain.preimage(scale, shift);
        if scale < 0.0 {
            out.flags.increasing = self.flags.decreasing;
            out.flags.decreasing = self.flags.increasing;
            out.flags.operator_monotone = false;
        }
        out.name = format!("{}({scale}*t{shift:+})", self.name);
        Ok(out)
    }

    /// Replaces the default subgradient with a user-chosen `k`.
    pub fn with_subgradient(&self, k: RealFn) -> Self {
        let mut out = self.clone();
        out.custom_subgradient = Some(k);
        out
    }

    pub fn with_selection(&self, selection: SubgradientSelection) -> Self {
        let mut out = self.clone();
        out.selection = selection;
        out
    }

    fn inner(&self, x: f64) -> f64 {
        match self.argument {
            Some((s, c)) => s * x + c,
            None => x,
        }
    }

    fn base_eval(&self, u: f64) -> f64 {
        match self.kind {
            FunctionKind::Power(p) => {
                if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                    u.powi(p as i32)
                } else {
                    u.powf(p)
                }
            }
            FunctionKind::Exp => u.exp(),
            FunctionKind::Log => u.ln(),
            FunctionKind::XLogX => {
                if u == 0.0 {
                    0.0
                } else {
                    u * u.ln()
                }
            }
            FunctionKind::Abs => u.abs(),
            FunctionKind::Affine { slope, intercept } => slope * u + intercept,
        }
    }

    fn base_derivatives(&self, u: f64) -> (f64, f64) {
        let d = match self.kind {
            FunctionKind::Power(p) => {
                if p == 0.0 {
                    0.0
                } else if u == 0.0 {
                    if p == 1.0 {
                        1.0
                    } else if p > 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    p * u.powf(p - 1.0)
                }
            }
            FunctionKind::Exp => u.exp(),
            FunctionKind::Log => 1.0 / u,
            FunctionKind::XLogX => {
                if u == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    u.ln() + 1.0
                }
            }
            FunctionKind::Abs => {
                return if u > 0.0 {
                    (1.0, 1.0)
                } else if u < 0.0 {
                    (-1.0, -1.0)
                } else {
                    (-1.0, 1.0)
                }
            }
            FunctionKind::Affine { slope, .. } => slope,
        };
        (d, d)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.base_eval(self.inner(x))
    }

    /// One-sided derivatives `(f'_-(x), f'_+(x))`.
    pub fn one_sided_derivatives(&self, x: f64) -> (f64, f64) {
        let (s, _) = self.argument.unwrap_or((1.0, 0.0));
        let (l, r) = self.base_derivatives(self.inner(x));
        if s > 0.0 {
            (s * l, s * r)
        } else {
            (s * r, s * l)
        }
    }

    /// Default subdifferential function `k` of this function on `[m, M]`.
    pub fn subgradient_on(&self, m: f64, big_m: f64) -> Result<Subgradient> {
        if !(self.flags.convex || self.flags.concave) {
            return Err(Error::NotConvexOrConcave(self.name.clone()));
        }
        Ok(Subgradient {
            function: self.clone(),
            interval: Some((m, big_m)),
        })
    }
}

/// A subdifferential function `k` of a convex (or concave) function.
///
/// Inside the interval `k(x)` is the selected point of `[f'_-(x), f'_+(x)]`;
/// at the ends it is `f'_+(m)` and `f'_-(M)`. A user-supplied `k` on the
/// function spec takes precedence everywhere.
#[derive(Clone, Debug)]
pub struct Subgradient {
    function: ScalarFunctionSpec,
    interval: Option<(f64, f64)>,
}

impl Subgradient {
    pub fn eval(&self, x: f64) -> f64 {
        if let Some(k) = &self.function.custom_subgradient {
            return k(x);
        }
        let (l, r) = self.function.one_sided_derivatives(x);
        if let Some((m, big_m)) = self.interval {
            if x <= m {
                return self.function.one_sided_derivatives(m).1;
            }
            if x >= big_m {
                return self.function.one_sided_derivatives(big_m).0;
            }
        }
        match self.function.selection {
            SubgradientSelection::Left => l,
            SubgradientSelection::Right => r,
            SubgradientSelection::Midpoint => 0.5 * (l + r),
        }
    }

    pub fn function(&self) -> &ScalarFunctionSpec {
        &self.function
    }
}

/// Default `k` without an interval: interior selection everywhere.
pub fn subdiff_default(f: &ScalarFunctionSpec) -> Result<Subgradient> {
    if !(f.flags.convex || f.flags.concave) {
        return Err(Error::NotConvexOrConcave(f.name.clone()));
    }
    Ok(Subgradient {
        function: f.clone(),
        interval: None,
    })
}

/// Secant `alpha * z + beta` through `(m, f(m))` and `(M, f(M))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub m: f64,
    pub big_m: f64,
}

impl ChordCoefficients {
    pub fn at(&self, z: f64) -> f64 {
        self.alpha * z + self.beta
    }
}

pub fn check_interval(m: f64, big_m: f64) -> Result<()> {
    if !m.is_finite() || !big_m.is_finite() || big_m - m < 1e-12 * m.abs().max(1.0) {
        return Err(Error::DegenerateInterval { m, big_m });
    }
    Ok(())
}

pub fn chord(f: &ScalarFunctionSpec, m: f64, big_m: f64) -> Result<ChordCoefficients> {
    check_interval(m, big_m)?;
    if !f.domain.contains_interval(m, big_m) {
        return Err(Error::DomainViolation(format!(
            "[{m}, {big_m}] is not inside the domain {} of `{}`",
            f.domain, f.name
        )));
    }
    let fm = f.eval(m);
    let f_big = f.eval(big_m);
    let alpha = (f_big - fm) / (big_m - m);
    let beta = (big_m * fm - m * f_big) / (big_m - m);
    Ok(ChordCoefficients { alpha, beta, m, big_m })
}

/// `n` equally spaced points covering `[m, M]`.
pub fn grid(m: f64, big_m: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| {
        if i == n - 1 {
            big_m
        } else {
            m + (big_m - m) * i as f64 / (n - 1) as f64
        }
    })
}
