use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate baseline: baseline size is 0")]
    DegenerateBaseline,

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("no eligible mutation instruction for strategy {strategy}")]
    NoEligibleInstruction { strategy: String },

    #[error("mutation provider timed out after {secs:.1}s")]
    ProviderTimeout { secs: f64 },

    #[error("mutation provider unavailable after {attempts} attempt(s): {last}")]
    ProviderUnavailable { attempts: u32, last: String },

    #[error("stub provider has no rule for instruction `{0}`")]
    MissingStubRule(String),

    #[error("no recognizable code in provider response")]
    ExtractionFailed,

    #[error("toolchain missing: `{program}` not found")]
    ToolchainMissing { program: String },

    #[error("compile timed out after {secs:.1}s ({compiler_id} {opt_flag})")]
    CompileTimeout { compiler_id: String, opt_flag: String, secs: f64 },

    #[error("function `{symbol}` is no longer defined by the program")]
    SignatureCorrupted { symbol: String },

    #[error("seed program does not compile with {compiler_id} {opt_flag}: {diagnostics}")]
    SeedDoesNotCompile { compiler_id: String, opt_flag: String, diagnostics: String },

    #[error("range is not bisectable: {0}")]
    NotBisectable(String),

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

/// Attaches a path to `std::io` failures.
pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
