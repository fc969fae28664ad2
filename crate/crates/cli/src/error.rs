use std::fmt;

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config file: exit 1.
    Usage(String),
    /// Unreadable or incompatible input: exit 2.
    Data(String),
    /// A checked invariant did not hold: exit 3.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Invariant(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gtgbm::Error> for CliError {
    fn from(e: gtgbm::Error) -> Self {
        use gtgbm::Error as E;
        match e {
            E::Config(c) => CliError::Usage(c.to_string()),
            E::Invariant(m) => CliError::Invariant(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<gtgbm::ConfigError> for CliError {
    fn from(e: gtgbm::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<gtgbm::DataError> for CliError {
    fn from(e: gtgbm::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<gtgbm::ModelError> for CliError {
    fn from(e: gtgbm::ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<gtgbm::MetricError> for CliError {
    fn from(e: gtgbm::MetricError) -> Self {
        CliError::Data(e.to_string())
    }
}
