use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("{line}:{col}: unknown constant `{name}`")]
    UnknownConstant {
        name: String,
        line: usize,
        col: usize,
    },

    #[error("type error at {path}: {msg}")]
    Type { path: String, msg: String },

    #[error("signature error: {0}")]
    Signature(String),

    #[error("domain at type {ty} exceeds the size cap of {cap} elements")]
    SpaceTooLarge { ty: String, cap: usize },

    #[error("model cannot interpret {0}")]
    Uninterpreted(String),

    #[error("expected a closed term of type o: {0}")]
    NotClosedBase(String),

    #[error("constant `{0}` is not allowed here: tree signature required")]
    NotTreeSignature(String),

    #[error("term contains omega, which the divergence theorem excludes")]
    ContainsLittleOmega,

    #[error("automaton error: {0}")]
    Automaton(String),

    #[error("unknown label `{0}` for this automaton")]
    UnknownLabel(String),

    #[error("stuck case: scrutinee `{0}` is not a tagged constant")]
    StuckCase(String),

    #[error("term is not eta-long for constants: {0}")]
    NotEtaLong(String),

    #[error("head reduction ran out of fuel after {0} steps on a convergent term")]
    FuelExhausted(usize),

    #[error("scheme error: {0}")]
    Scheme(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
