use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("evaluation singular: {0}")]
    EvaluationSingular(String),

    #[error("jets do not share dimension, order or base point: {0}")]
    MismatchedJets(String),

    #[error("syntax error at line {line}, column {column}: found {found}, expected {}", expected.join(" | "))]
    Syntax {
        line: usize,
        column: usize,
        found: String,
        expected: Vec<String>,
    },

    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },

    #[error("unknown background `{0}`")]
    UnknownBackground(String),

    #[error("background `{name}` does not support dimension {dim}")]
    BadDimension { name: String, dim: usize },

    #[error("background `{name}` requires parameter `{param}`")]
    MissingParam { name: String, param: String },

    #[error("point {point:?} lies outside the safe domain ({detail})")]
    OutsideDomain { point: Vec<f64>, detail: String },

    #[error("degenerate metric: |det| = {det:e} is below the floor {floor:e}")]
    DegenerateMetric { det: f64, floor: f64 },

    #[error("bad slot selection: {0}")]
    BadSlots(String),

    #[error("insufficient jet order: need {needed}, have {have}")]
    InsufficientJetOrder { needed: usize, have: usize },

    #[error("assembly paths disagree: residual {residual:e} exceeds {bound:e}")]
    PathMismatch { residual: f64, bound: f64 },

    #[error("need at least {needed} sample points, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
