//! Library side of the `catbell` command-line tool.

pub mod commands;
pub mod config;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(catbell_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<catbell_core::Error> for CliError {
    fn from(e: catbell_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}
