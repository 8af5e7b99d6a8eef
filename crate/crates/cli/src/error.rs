use lierestrict::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Resource(String),
    Internal(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Resource(m) => write!(f, "resource limit: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn classify(e: &Error) -> fn(String) -> CliError {
    match e {
        Error::WeylCapExceeded { .. } | Error::Budget { .. } => CliError::Resource,
        Error::InternalConsistency(_) => CliError::Internal,
        Error::Scan { source, .. } => classify(source),
        _ => CliError::Usage,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        classify(&e)(e.to_string())
    }
}
