use thiserror::Error;

use crate::numlin::LinalgError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("point `{0}` has zero fiber dimension")]
    ZeroDim(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("sections live on different bundles")]
    BundleMismatch,
    #[error("section is supported at `{0}`, outside the part")]
    SupportOutsidePart(String),
    #[error("sections are not supported in one common part")]
    CrossPartSupport,
    #[error("block ({row}, {col}) has shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        row: String,
        col: String,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("semigroupoid fails its axioms: {0}")]
    InvalidSemigroupoid(String),
    #[error("bad family parameters: {0}")]
    BadFamilyParams(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("fiber dimension is not constant along the orbit of `{0}`")]
    OrbitBundleNotTrivial(String),
    #[error("kernel is not positive semidefinite on part `{0}`")]
    NotPsd(String),
    #[error("kernel is not partially positive semidefinite on part `{0}`")]
    NotPartiallyPsd(String),
    #[error("kernel is not partially Hermitian on part `{0}`")]
    NotPartiallyHermitian(String),
    #[error("kernel is not invariant: K({alpha}·{x}, {y}) ≠ K({x}, {alpha}*·{y}), residual {residual:e}")]
    NotInvariant {
        alpha: String,
        x: String,
        y: String,
        residual: f64,
    },
    #[error("shift of `{0}` does not preserve the kernel of the Gram matrix (residual {1:e})")]
    QuotientIncompatible(String, f64),
    #[error("rank mismatch on part `{part}`: {left} vs {right}")]
    RankMismatch {
        part: String,
        left: usize,
        right: usize,
    },
    #[error("pairing condition violated: residual {residual:e} exceeds {bound:e}")]
    PairingViolated { residual: f64, bound: f64 },
    #[error("kernel is not dominated on part `{part}`: {detail}")]
    KernelNotDominated { part: String, detail: String },

    #[error("parse error in {file} at line {line}, column {column}: {msg}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("cross-reference error in {file}: {msg}")]
    CrossRef { file: String, msg: String },
    #[error("axiom {axiom} violated: {detail}")]
    Axiom { axiom: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
