use thiserror::Error;

/// Errors raised by presentation handling, tree combinatorics, orderings and
/// the DSL front end.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("generator `{name}` used in identity {identity} is not declared")]
    UndeclaredGenerator { name: String, identity: String },

    #[error("generator `{name}` has arity {arity}; arity must be at least 2")]
    BadArity { name: String, arity: usize },

    #[error("generator `{name}` of arity {arity} cannot be {symmetry}; only binary generators carry symmetries")]
    SymmetryOnNonBinary {
        name: String,
        arity: usize,
        symmetry: String,
    },

    #[error("generator `{0}` is declared twice")]
    DuplicateGenerator(String),

    #[error("generator `{name}` in identity {identity} applied to {got} arguments, expected {expected}")]
    ArgumentCount {
        name: String,
        identity: String,
        expected: usize,
        got: usize,
    },

    #[error("identity {identity} is not homogeneous in variable `{variable}`")]
    InhomogeneousIdentity { identity: String, variable: String },

    #[error("identity {0} is zero")]
    ZeroIdentity(String),

    #[error("singular change of generator basis: {0}")]
    SingularMap(String),

    #[error("leaf label {0} occurs more than once")]
    DuplicateLeafLabel(u32),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid shuffle assignment: {0}")]
    InvalidShuffle(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("the operadic unit cannot be used as a divisibility pattern")]
    UnitPattern,

    #[error("unknown ordering preset `{0}`")]
    UnknownPreset(String),

    #[error("bad ordering specification: {0}")]
    BadOrdering(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("zero polynomial has no leading term")]
    ZeroPolynomial,

    #[error("arity {requested} is beyond the computed bound {bound}")]
    OutOfBound { requested: usize, bound: usize },

    #[error("basis is not quadratic: {0}")]
    NotQuadratic(String),

    #[error("overlap patterns do not match the leading terms of the given elements")]
    PatternMismatch,

    #[error("arity {requested} exceeds the resource guard {guard}")]
    BoundExceeded { requested: usize, guard: usize },

    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("{line}:{col}: undeclared generator `{name}`")]
    UndeclaredAt { name: String, line: usize, col: usize },

    #[error("{line}:{col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },

    #[error("bad parameter assignment `{0}`")]
    BadSample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
