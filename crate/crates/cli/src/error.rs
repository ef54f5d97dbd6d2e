use std::fmt;

/// Process-level failure channels. The exit code is a stable contract:
/// 0 success, 1 environment/IO trouble, 2 bad input, 3 analysis failure.
#[derive(Debug)]
pub enum CliError {
    /// Filesystem or environment problems: unreadable input, unwritable
    /// output directory.
    Io(String),
    /// The input could not be understood: CSV parse errors (with position),
    /// invalid configuration files, out-of-range options.
    Input(String),
    /// The data parsed but the statistical machinery rejected it.
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Analysis(_) => 3,
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) | CliError::Input(msg) | CliError::Analysis(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<sharedvol_core::Error> for CliError {
    fn from(err: sharedvol_core::Error) -> Self {
        CliError::Analysis(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
