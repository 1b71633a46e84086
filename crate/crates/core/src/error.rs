use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("maximal optimal design failed verification: {0}")]
    VerificationFailed(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("point is not in the polytope of optimal weights")]
    NotInPolytope,

    #[error("generator {generator} does not preserve the polytope of optimal weights")]
    GeneratorNotPreserving { generator: usize },

    #[error("exact design size {size} is smaller than the support size {support}")]
    SizeTooSmall { size: u64, support: usize },

    #[error("objective is not differentiable at the current iterate")]
    NotDifferentiable,

    #[error("infeasible start: {0}")]
    InfeasibleStart(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
