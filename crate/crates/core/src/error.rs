use std::path::PathBuf;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("metadata: {0}")]
    Metadata(String),

    #[error("metadata row {row}, column `{column}`: {message}")]
    MetadataCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("control-flow graph `{method}`: {message}")]
    Graph { method: String, message: String },

    #[error("preprocessing feature `{feature}`: {message}")]
    Prep { feature: String, message: String },

    #[error("feature selection: {0}")]
    FeatureSelection(String),

    #[error("projection: {0}")]
    Projection(String),

    #[error("footprint: {0}")]
    Footprint(String),

    #[error("polygon boolean operation failed between `{left}` and `{right}`")]
    BooleanOp { left: String, right: String },

    #[error("boundary: {0}")]
    Boundary(String),

    #[error("config: {0}")]
    Config(String),

    #[error("artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },

    #[error("plot: {0}")]
    Plot(String),

    #[error("synthetic data: {0}")]
    Synth(String),

    #[error("recommend: {0}")]
    Recommend(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Artifact {
            path: path.into(),
            message: message.into(),
        }
    }
}
