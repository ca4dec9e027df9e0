use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: malformed row: {message}")]
    MalformedRow {
        file: String,
        line: usize,
        message: String,
    },

    #[error("duplicate patent_id {patent_id} (rows {first} and {second})")]
    DuplicateId {
        patent_id: String,
        first: usize,
        second: usize,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("patent {patent_id}: {message}")]
    Record { patent_id: String, message: String },

    #[error("IPC code {code:?} does not resolve to {level} level")]
    IpcLevel { code: String, level: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("rows {a} and {b} are identical with opposite labels")]
    DegenerateRows { a: usize, b: usize },

    #[error("class {class} has {count} members, fewer than k = {k}")]
    ClassSmallerThanK { class: String, count: usize, k: usize },

    #[error("feature width mismatch: model expects {expected}, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("non-finite {what} at {unit} {index}")]
    NonFinite {
        what: String,
        unit: String,
        index: usize,
    },

    #[error("no embedding vector for patent_id {0}")]
    MissingEmbedding(String),

    #[error("{0} features exceed the exact-Shapley budget of {1}; use sampled mode")]
    ExactShapleyBudget(usize, usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
