use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input data that does not match the expected schema or value ranges.
    #[error("{}", fmt_data(.line, .msg))]
    Data { line: Option<usize>, msg: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("battery exhausted: {available:.3} J left, {required:.3} J required")]
    BatteryExhausted { available: f64, required: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_data(line: &Option<usize>, msg: &str) -> String {
    match line {
        Some(line) => format!("data error at line {line}: {msg}"),
        None => format!("data error: {msg}"),
    }
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data { line: None, msg: msg.into() }
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
