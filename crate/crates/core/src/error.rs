use alloc::string::String;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid figure: {0}")]
    InvalidFigure(String),
    #[error("degenerate geometry")]
    DegenerateGeometry,
    #[error("shape mismatch at layer {layer}: {detail}")]
    ShapeMismatch { layer: String, detail: String },
    #[error("numerical overflow in {layer}")]
    NumericalOverflow { layer: String },
    #[error("undefined similarity: zero vector")]
    UndefinedSimilarity,
    #[error("degenerate labels: dataset needs at least two classes")]
    DegenerateLabels,
    #[error("degenerate imagination: blended vector has zero norm")]
    DegenerateImagination,
    #[error("uninterpretable message")]
    UninterpretableMessage,
    #[error("no identifiable candidate: all candidate features are degenerate")]
    NoIdentifiableCandidate,
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("empty confusion matrix")]
    EmptyConfusion,
    #[error("zero variance")]
    ZeroVariance,
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("calibration pass {pass}: {source}")]
    Calibration {
        pass: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("snapshot integrity: expected hash {expected}, found {found}")]
    SnapshotIntegrity { expected: String, found: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
