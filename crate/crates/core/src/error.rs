use thiserror::Error;

/// Errors raised by constructors, evaluators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("knots must be strictly increasing (violation at index {index})")]
    NonMonotonicKnots { index: usize },

    #[error("need at least 3 knots (2 subintervals), got {got}")]
    TooFewKnots { got: usize },

    #[error("scale factor alpha[{index}] = {value} is outside (-1, 1)")]
    ScaleOutOfRange { index: usize, value: f64 },

    #[error("bad data: {0}")]
    BadData(String),

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("base and height functions disagree at {at}: {base} vs {height}")]
    EndpointMismatch { at: f64, base: f64, height: f64 },

    #[error("derivative of order {order} needs |alpha[{index}]| < a^r ({bound}), got {value}")]
    DerivativeScaleViolation {
        order: u32,
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("x = {x} lies outside [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("depth {depth} needs {rows} rows, above the cap of {cap}")]
    DepthTooLarge { depth: u32, rows: u128, cap: usize },

    #[error("candidate samples do not match the address grid: {0}")]
    GridMismatch(String),

    #[error("series evaluation not applicable: {0}")]
    SeriesNotApplicable(String),

    #[error("Stieltjes argument s = {s} lies inside [{lo}, {hi}]")]
    StieltjesPole { s: f64, lo: f64, hi: f64 },

    #[error("histogram total area is zero")]
    ZeroTotalArea,

    #[error("linear system is singular (pivot {pivot:e}, condition estimate {condition:e})")]
    SingularSystem { pivot: f64, condition: f64 },

    #[error("spline knot values do not match cumulative histogram data (max deviation {deviation:e})")]
    CumulativeMismatch { deviation: f64 },

    #[error("moment order {order} exceeds the cap {cap}")]
    MomentOrderTooLarge { order: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, FracError>;
