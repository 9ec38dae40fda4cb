use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("grid resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("grid origin must be finite")]
    InvalidOrigin,
    #[error("expected {expected} cells, found {found}")]
    CellCount { expected: usize, found: usize },
    #[error("inflation radius must be a non-negative finite number, got {0}")]
    NegativeRadius(f64),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("start pose is in collision")]
    StartOccupied,
    #[error("goal pose is in collision")]
    GoalOccupied,
    #[error("no path: search exhausted the open set after {expansions} expansions")]
    NoPath { expansions: usize },
    #[error("no path found within {limit} expansions")]
    ExpansionLimit { limit: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum CorridorError {
    #[error("path point {index} at ({x:.3}, {y:.3}) admits no free polygon")]
    NoFreePolygon { index: usize, x: f64, y: f64 },
    #[error("path is empty")]
    EmptyPath,
}

/// Errors raised by the bound-constrained minimizer.
#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch: x0 has {x0} entries, bounds have {bounds}")]
    Dimension { x0: usize, bounds: usize },
    #[error("lower bound exceeds upper bound at index {0}")]
    InvertedBounds(usize),
    #[error("initial point has a non-finite entry at index {0}")]
    NonFiniteStart(usize),
    #[error("objective returned a non-finite value at evaluation {evaluation}")]
    NonFiniteValue { evaluation: usize },
    #[error("gradient entry {index} is non-finite at evaluation {evaluation}")]
    NonFiniteGradient { evaluation: usize, index: usize },
}

/// Line-search failures; the minimizer recovers from these by resetting its history.
#[derive(Debug, Error, PartialEq)]
pub enum LineSearchError {
    #[error("search direction is not a descent direction (slope {0})")]
    NotDescent(f64),
    #[error("no strong Wolfe point within {0} evaluations")]
    EvaluationLimit(usize),
    #[error("bracket collapsed without a strong Wolfe point")]
    Collapsed,
    #[error("objective evaluation aborted")]
    Aborted,
}

#[derive(Debug, Error, PartialEq)]
pub enum OptimizerError {
    #[error("variable {index} is non-finite")]
    NonFiniteVariable { index: usize },
    #[error("gradient entry {index} is non-finite")]
    NonFiniteGradient { index: usize },
    #[error("objective value is non-finite")]
    NonFiniteValue,
    #[error("time interval {index} must be positive, got {value}")]
    NonPositiveInterval { index: usize, value: f64 },
    #[error("packed vector has {found} entries, expected {expected}")]
    PackedLength { expected: usize, found: usize },
    #[error("initial trajectory has {found} states, corridor assigns {expected}")]
    StateCount { expected: usize, found: usize },
    #[error("time offset {offset} s lies outside the trajectory duration {duration} s")]
    OffsetOutOfRange { offset: f64, duration: f64 },
    #[error("a trajectory needs at least two states")]
    TooFewStates,
    #[error("solver failed: {0}")]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Failure of the full planning pipeline.
#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Corridor(#[from] CorridorError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
}
