use std::fmt;

/// Failure class, mapped one-to-one onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    ModelMismatch,
}

impl ErrorKind {
    pub fn code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::ModelMismatch => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::ModelMismatch => "model-mismatch",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::ModelMismatch,
            message: message.into(),
        }
    }

    pub fn code(&self) -> i32 {
        self.kind.code()
    }

    /// Prefixes the message with where the failure happened.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    /// `error<TAB>code<TAB>kind<TAB>message`, newlines flattened.
    pub fn line(&self) -> String {
        format!(
            "error\t{}\t{}\t{}",
            self.code(),
            self.kind.tag(),
            self.message.replace(['\n', '\r'], " ")
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Parsed inputs that belong to the configuration rather than the data.
const CONFIG_INPUTS: [&str; 3] = ["abbreviation table", "hierarchy spec", "boost file"];

impl From<cuisto::Error> for CliError {
    fn from(e: cuisto::Error) -> Self {
        use cuisto::Error as E;
        let module = match &e {
            E::Io { .. } => "io",
            E::Xml(_) | E::Schema(_) | E::EmptyCorpus | E::Split(_) => "corpus",
            E::Config(_) => "config",
            E::Training(_) => "training",
            E::SchemaMismatch(_) | E::ClassSetMismatch(_) => "model",
            E::Evaluation(_) => "eval",
            E::Parse { what, .. } => what,
        };
        let kind = match &e {
            E::Io { .. } | E::Config(_) => ErrorKind::Config,
            E::Parse { what, .. } if CONFIG_INPUTS.contains(what) => ErrorKind::Config,
            E::SchemaMismatch(_) | E::ClassSetMismatch(_) => ErrorKind::ModelMismatch,
            _ => ErrorKind::Data,
        };
        CliError {
            kind,
            message: format!("{module}: {e}"),
        }
    }
}
