use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed config at `{field}`: {message}")]
    Malformed { field: String, message: String },

    #[error("`{field}` is not contractive: operator norm {norm}")]
    NonContractive { field: String, norm: f64 },

    #[error("bad subshift at `{field}`: {message}")]
    BadSubshift { field: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        source: subaffine::Error,
    },

    #[error("non-finite result for `{0}`")]
    NonFinite(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn malformed(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Malformed {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// 2 validation, 3 budget, 4 numeric; I/O failures count as validation
    /// because they stem from user-supplied paths.
    pub fn exit_code(&self) -> i32 {
        use subaffine::Error as E;
        match self {
            CliError::Core { source, .. } => match source {
                E::DepthBudgetExceeded { .. } => 3,
                E::SingularMatrix => 4,
                _ => 2,
            },
            CliError::NonFinite(_) => 4,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, what: &str) -> CliResult<T>;
}

impl<T> Context<T> for subaffine::Result<T> {
    fn context(self, what: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
