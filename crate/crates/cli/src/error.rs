use synth_core::SynthError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Engine { context: String, source: SynthError },
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine { .. } => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Wraps an engine error with the scenario it came from.
    pub fn engine(context: impl Into<String>) -> impl FnOnce(SynthError) -> CliError {
        let context = context.into();
        move |source| match source {
            SynthError::InvalidParameter(msg) => CliError::Config(format!("{context}: {msg}")),
            SynthError::NullCat => CliError::Config(format!("{context}: {}", SynthError::NullCat)),
            source => CliError::Engine { context, source },
        }
    }
}

/// Parameter errors raised while assembling a scenario are config errors.
impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::engine("scenario")(e)
    }
}
