use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("failed to parse {path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(
        "eigensolver did not converge after {iterations} iterations \
         (achieved residual {achieved:e}, requested {requested:e})"
    )]
    NotConverged {
        iterations: usize,
        achieved: f64,
        requested: f64,
    },

    #[error(transparent)]
    Bound(#[from] BoundError),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

/// Reasons a guaranteed bound cannot be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BoundError {
    #[error("separation violated: eigenvalue approximation {lambda_hat} is not below the lower bound {lambda_next_lower}")]
    Separation {
        lambda_hat: f64,
        lambda_next_lower: f64,
    },

    #[error("bound inapplicable: denominator {denominator} is not positive (mesh too coarse)")]
    Denominator { denominator: f64 },

    #[error("kappa must exceed 1, got {0}")]
    Kappa(f64),

    #[error("negative estimator value {0}")]
    NegativeEta(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Wraps an error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
