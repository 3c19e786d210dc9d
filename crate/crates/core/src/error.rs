use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter domain error: {0}")]
    ParameterDomain(String),

    #[error("degenerate firing: total firing strength {total:e} at x = {x} ({context})")]
    DegenerateFiring { x: f64, total: f64, context: String },

    #[error("training diverged at epoch {epoch}: loss is not finite; try a smaller learning rate")]
    Divergence { epoch: usize },

    #[error("invalid parameter spec `{parameter}`: {reason}")]
    SpecValidation { parameter: String, reason: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("rating {ordinal} for `{parameter}` lies outside the domain [{lo}, {hi}]")]
    OutOfDomain {
        parameter: String,
        ordinal: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unparseable rating token `{0}`")]
    RatingParse(String),

    #[error("no mapping for {driver}={rating}{}", fmt_neighbors(.neighbors))]
    MappingGap {
        driver: String,
        rating: String,
        neighbors: Vec<String>,
    },

    #[error("no rosetta entry for COCOMO 81 driver `{0}`")]
    Conversion(String),

    #[error("record `{record}`: {reason}")]
    Data { record: String, reason: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("schema error in {path}: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

fn fmt_neighbors(neighbors: &[String]) -> String {
    if neighbors.is_empty() {
        String::new()
    } else {
        format!(" (nearest defined: {})", neighbors.join(", "))
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a record identifier to an error raised while processing it.
    pub fn in_record(self, record: &str) -> Self {
        match self {
            Error::Data { .. } => self,
            other => Error::Data {
                record: record.to_string(),
                reason: other.to_string(),
            },
        }
    }
}
