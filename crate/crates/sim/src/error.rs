use std::path::PathBuf;

/// Errors of the std layer: IO and formats on top of the core errors.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] tangram_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, detail: impl ToString) -> Self {
        SimError::Format { path: path.into(), detail: detail.to_string() }
    }

    /// Whether the failure lies in the user's configuration or inputs rather
    /// than in the run itself.
    pub fn is_config(&self) -> bool {
        use tangram_core::Error as E;
        match self {
            SimError::Config(_) | SimError::Format { .. } => true,
            SimError::Core(e) => matches!(
                e,
                E::InvalidFigure(_) | E::InvalidVocabulary(_) | E::DegenerateLabels | E::ShapeMismatch { .. } | E::InvalidArgument(_)
            ),
            SimError::Io { .. } | SimError::Runtime(_) => false,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
