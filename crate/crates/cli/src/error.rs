use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] paramlearn::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for bad configuration or input, 3 for a resource cap, 4 for I/O.
    pub fn code(&self) -> u8 {
        use paramlearn::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                E::Domain(_) | E::Parse { .. } | E::UnsupportedKind(_) => 2,
                E::Resource(_) => 3,
                E::Io(_) => 4,
                E::Internal(_) => 1,
            },
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}
