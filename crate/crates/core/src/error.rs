use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input file or value does not describe a usable configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A field required by the active attention variant was not provided.
    #[error("{variant} configuration is missing required field `{field}`")]
    MissingField { variant: &'static str, field: &'static str },

    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The hardware profile lacks a ceiling for the requested precision/basis.
    #[error("capability not profiled: {profile} has no {basis} {what}")]
    NotProfiled {
        profile: String,
        basis: String,
        what: String,
    },

    #[error("degenerate cost: {0}")]
    DegenerateCost(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("join error: {0}")]
    Join(String),

    #[error("render error: {0}")]
    Render(String),

    #[error("probe error: {0}")]
    Probe(String),

    /// An internal invariant was violated; indicates a bug rather than bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Deserializes JSON, reporting failures with the path of the offending key.
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}
