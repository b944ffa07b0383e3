use fracphi_core::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fracphi_core::Error),
    #[error("writing {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn missing(section: &str) -> Self {
        CliError::Config(format!("section [{section}] is required for this command"))
    }

    /// 2 for configuration problems, 3 for numerical failures, 4 for unmet
    /// preconditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Numeric => 3,
                ErrorClass::Precondition => 4,
            },
        }
    }
}
