use thiserror::Error;

/// Errors produced by the library and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, bad parameter values, or inconsistent inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// A state stopped being finite during numerical integration.
    #[error("integration diverged at step {step}")]
    IntegrationDiverged { step: usize },

    /// Kernel normalization hit a zero degree (kernel too narrow for the data).
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    /// Input data carries no usable signal (e.g. all-zero distances or variance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Retained spectrum is smaller than requested and cannot support the operation.
    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    /// A dense linear-algebra routine failed to converge.
    #[error("numerical failure in {routine}: info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    /// Other numerical failure.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Domain error on a mathematical operation (e.g. zero vector input).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code contract: 1 for configuration problems, 2 for
    /// numerical/runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
