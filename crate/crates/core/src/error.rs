use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("DepthLimitExceeded: depth {depth} is beyond the exact-representation limit")]
    DepthLimitExceeded { depth: u32 },
    #[error("index {index} on axis {axis} is outside [0, 2^{depth})")]
    IndexOutOfRange { axis: usize, index: u64, depth: u32 },
    #[error("a cube must have at least one dimension")]
    ZeroDimension,
    #[error("malformed cube record: {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("InvalidGridPoint: {0:?} is not on the bump grid")]
    InvalidGridPoint(Vec<f64>),
    #[error("invalid function parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error("OutOfCube: point {point:?} lies outside {cube}")]
    OutOfCube { point: Vec<f64>, cube: String },
    #[error("expected {expected} vertex values, got {got}")]
    VertexCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(
        "CubeBudgetExceeded: iteration {iteration} needs {requested} cubes, budget is {max_cubes}"
    )]
    CubeBudgetExceeded {
        iteration: u32,
        requested: usize,
        max_cubes: usize,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("OracleFailure: non-finite value {value} at {point:?}")]
    OracleFailure { point: Vec<f64>, value: f64 },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("strategy returned {got} query points for a cube, expected {expected}")]
    StrategyContract { expected: usize, got: usize },
    #[error("UnknownSmoothness: a Hölder or gradient-Hölder class is required")]
    UnknownSmoothness,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerificationError {
    #[error(
        "NoLevelSetSampler: containment check requested but the oracle has no level-set sampler"
    )]
    NoLevelSetSampler,
    #[error("DegenerateInput: {0}")]
    DegenerateInput(String),
    #[error("EmptyInflatedSet: no grid point within {scale} of the level")]
    EmptyInflatedSet { scale: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error(
        "AccuracyTooLarge: epsilon {epsilon} is outside the admissible range (bump scale {eta})"
    )]
    AccuracyTooLarge { epsilon: f64, eta: f64 },
    #[error("NondeterministicAlgorithm: query {step} differs on replay")]
    NondeterministicAlgorithm { step: usize },
    #[error("NoUnqueriedCell: every grid cell received a query")]
    NoUnqueriedCell,
    #[error("invalid adversary parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Verification(#[from] VerificationError),
}
