use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("statement {statement}: {source}")]
    Statement {
        statement: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid model: {0}")]
    Validation(String),

    #[error(
        "the I-map is disconnected ({components} components); add edges between the parts or split the model"
    )]
    Disconnected { components: usize },

    #[error("{subject} over {{{}}} is not contained in any clique; use --mode global", variables.join(","))]
    Locality {
        subject: String,
        variables: Vec<String>,
    },

    #[error("{variables} variables exceed the global engine cap of {cap}; use --mode jointree")]
    SizeCap { variables: usize, cap: usize },

    #[error("the specification is inconsistent")]
    Inconsistent,

    #[error("the conditioning event has probability 0 in every extension")]
    UndefinedConditional,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Strips [`Error::Statement`] context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Statement { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
