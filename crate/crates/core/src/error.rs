use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("invalid variable list: {0}")]
    InvalidVariables(String),

    /// Evaluation left the domain of an elementary function.
    #[error("domain error in `{subterm}`: {message}")]
    Domain { subterm: String, message: String },

    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },

    #[error("singular metric at {point:?} (|det| = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },

    #[error("signature mismatch at {point:?}: declared {declared:?}, observed {observed:?}")]
    SignatureMismatch {
        point: Vec<f64>,
        declared: Vec<i8>,
        observed: Vec<i8>,
    },

    #[error("target metric is not positive definite at {0:?}")]
    TargetNotRiemannian(Vec<f64>),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension too small: m = {m}, need m >= {required}")]
    DimensionTooSmall { m: usize, required: usize },

    #[error("observer vector is not unit timelike (g(v,v) = {0})")]
    FrameNotUnit(f64),

    #[error("null frame normalization violated: {0}")]
    FrameNotNull(String),

    #[error("flow left the chart box at t = {t} (point {point:?})")]
    FlowLeftDomain { t: f64, point: Vec<f64> },

    #[error("warping function is not positive at {point:?} (w = {value})")]
    NonPositiveWarp { point: Vec<f64>, value: f64 },

    #[error("not a closed factor: {0}")]
    NotClosedFactor(String),

    #[error("normal form violated: {0}")]
    FormViolation(String),

    #[error("coordinate name `{0}` appears in both factors")]
    CoordinateClash(String),

    #[error("kappa must be nonzero")]
    ZeroCoupling,

    #[error("{0}")]
    Invalid(String),
}
