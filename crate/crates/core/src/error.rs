use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the engine reports.
///
/// Variants fall in two groups: malformed input (bad shapes, unknown names,
/// out-of-range parameters) and unmet hypotheses of an inequality (a field
/// that is not unital, a norm that is not normalized, a Loewner condition
/// that fails). [`Error::is_precondition`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("empty matrix")]
    Empty,
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("eigenvalue {eigenvalue} lies outside the domain {domain} of `{function}`")]
    SpectrumOutOfDomain {
        function: String,
        eigenvalue: f64,
        domain: String,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("invalid norm parameter: {0}")]
    InvalidNormParameter(String),
    #[error("matrix is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate interval [{m}, {big_m}]")]
    DegenerateInterval { m: f64, big_m: f64 },
    #[error("`{0}` is neither convex nor concave")]
    NotConvexOrConcave(String),
    #[error("field is not unital: residual {residual:e} exceeds {tolerance:e}")]
    NotUnital { residual: f64, tolerance: f64 },
    #[error("normalizer is singular (min eigenvalue {min_eig:e})")]
    SingularNormalizer { min_eig: f64 },
    #[error("vector field is not normalized: total mass {mass}")]
    NotNormalized { mass: f64 },
    #[error("function flag violation: {0}")]
    FlagViolation(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("non-finite value {value} at z = {z}")]
    NonFiniteValue { z: f64, value: f64 },
    #[error("operator evaluation unsupported for F = `{0}`")]
    NonCommutingUnsupportedF(String),
    #[error("spectrum [{lo}, {hi}] leaves the declared interval [{m}, {big_m}]")]
    SpectrumOutOfRange { lo: f64, hi: f64, m: f64, big_m: f64 },
    #[error("spectral sandwich violated: {0}")]
    SpectralSandwichViolated(String),
    #[error("exponents p = {p}, q = {q} are not conjugate (1/p + 1/q = 1, p > 1)")]
    ConjugateExponentViolation { p: f64, q: f64 },
    #[error("tangent line leaves the first-argument domain of F: {0}")]
    TangentLeavesU(String),
    #[error("point {point} lies outside [{m}, {big_m}]")]
    PointOutOfInterval { point: f64, m: f64, big_m: f64 },
    #[error("zero operator at field point {0}")]
    ZeroOperator(usize),
    #[error("norm is not gauge-normalized (rank-one projection has norm {0})")]
    NotGaugeNormalized(f64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("Slater condition not met (min eigenvalue {min_eig:e})")]
    ConditionNotMet { min_eig: f64 },
    #[error("zero denominator norm")]
    ZeroDenominatorNorm,
    #[error("Slater point {x} lies outside the domain {domain}")]
    XOutOfDomain { x: f64, domain: String },
    #[error("constant C = {0} is negative; the bound requires C >= 0")]
    NegativeConstant(f64),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    /// True when the input was well formed but a hypothesis of the
    /// inequality being checked does not hold.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotUnital { .. }
                | Error::NotNormalized { .. }
                | Error::FlagViolation(_)
                | Error::DomainViolation(_)
                | Error::SpectrumOutOfDomain { .. }
                | Error::SpectrumOutOfRange { .. }
                | Error::SpectralSandwichViolated(_)
                | Error::TangentLeavesU(_)
                | Error::PointOutOfInterval { .. }
                | Error::ZeroOperator(_)
                | Error::NotGaugeNormalized(_)
                | Error::PreconditionViolated(_)
                | Error::ConditionNotMet { .. }
                | Error::ZeroDenominatorNorm
                | Error::XOutOfDomain { .. }
                | Error::NegativeConstant(_)
                | Error::NotPositiveDefinite { .. }
                | Error::SingularNormalizer { .. }
        )
    }
}
