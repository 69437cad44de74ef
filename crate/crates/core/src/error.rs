use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("fit diverged at iteration {iteration}: loss is not finite")]
    FitDiverged { iteration: usize },

    #[error("mesh is not watertight: edge ({a}, {b}) is shared by {count} faces")]
    NotWatertight { a: u32, b: u32, count: usize },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("container format error: {0}")]
    Container(String),

    #[error("shape config error: {0}")]
    ShapeConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
