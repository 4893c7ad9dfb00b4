use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map onto the CLI exit-code contract through [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at offset {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("negative exponent at offset {offset}")]
    NegativeExponent { offset: usize },

    #[error("variable count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weights must be positive integers")]
    NonPositiveWeight,
    #[error("weights must be non-decreasing in variable order")]
    NotAscending,
    #[error("cannot take weighted-polar coordinates of the origin")]
    OriginInput,
    #[error("at least one sample is required")]
    EmptySample,

    #[error("leading coefficient t^{index} = {value:e} does not vanish; cannot shift by -{shift}")]
    NonVanishingLeadingCoefficients { index: usize, value: f64, shift: usize },
    #[error("denominator vanishes to higher order than the numerator")]
    DegenerateDenominator,

    #[error("equation {0} is not weighted homogeneous")]
    NotWeightedHomogeneous(usize),
    #[error("perturbation {0} has weighted order below its equation")]
    PerturbationOrderTooLow(usize),
    #[error("equation {0} is not in the square of the maximal ideal")]
    NotInSquaredMaximalIdeal(usize),
    #[error("{equations} equations and {perturbations} perturbations")]
    LengthMismatch { equations: usize, perturbations: usize },
    #[error("{c} equations exceed {n} variables")]
    TooManyEquations { c: usize, n: usize },
    #[error("germ has no equations")]
    NoEquations,

    #[error("Cauchy-Binet mismatch: det(M M^T) = {gram:e}, sum of squared minors = {minors:e}")]
    CauchyBinetMismatch { gram: f64, minors: f64 },

    #[error("direction {s:?} is obstructed (coefficient {coefficient:e})")]
    Obstructed { s: Vec<f64>, coefficient: f64 },
    #[error("fixed-point iteration does not contract (|eps| = {eps} exceeds estimated {eps_max:e})")]
    NoContraction { eps: f64, eps_max: f64 },
    #[error("direction is off the link (|f(s)| = {value:e})")]
    NotOnLink { value: f64 },
    #[error("arc parameter t = {t:e} exceeds validity radius {t_max:e}")]
    OutsideValidityRadius { t: f64, t_max: f64 },
    #[error("inverse map did not converge (relative residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("the arcs coincide on the whole grid; tangency order is at least {cap}")]
    DegenerateArcs { cap: f64 },

    #[error("operation requires a hypersurface (c = 1), got c = {0}")]
    NotHypersurface(usize),
    #[error("right trivialization is not constructed on the link")]
    OnLinkUnsupported,

    #[error("invalid germ definition: {0}")]
    Definition(String),
}

impl Error {
    /// Exit code of the `germfold` CLI for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Obstructed { .. } => 3,
            Error::NoContraction { .. } | Error::NoConvergence { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
