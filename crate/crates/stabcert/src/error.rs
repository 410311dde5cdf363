use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generators {0} and {1} do not commute")]
    NonCommutingGenerators(usize, usize),

    #[error("generator {0} is not Hermitian")]
    NonHermitianGenerator(usize),

    #[error("the generated group contains -identity (detected while reducing generator {0})")]
    MinusIdentity(usize),

    #[error("dense realization capped at {cap} qubits, requested {n}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error(
        "deterministic-strategy enumeration capped at {cap} parties, requested {n}; \
         check the closed-form bound instead"
    )]
    EnumerationCapExceeded { n: usize, cap: usize },

    #[error("substitution rule does not cover Y factors (qubit {0})")]
    UnsupportedYFactor(usize),

    #[error("stabilizer term carries an imaginary phase; cannot enter a real Bell expression")]
    ImaginaryPhase,

    #[error("toric lattice size must be at least 2, got {0}")]
    InvalidLatticeSize(usize),

    #[error("invalid special party {party} for {n} parties")]
    InvalidParty { party: usize, n: usize },

    #[error("bipartition side must be nonempty and proper")]
    InvalidBipartition,

    #[error("behaviour does not define the correlator for parties {0:?}, inputs {1:?}")]
    MissingCorrelator(Vec<usize>, Vec<u8>),

    #[error("labeler {0} is invalid: {1}")]
    InvalidLabeler(usize, String),

    #[error("observable for party {party}, input {input} violates A=A\u{2020}, A\u{b2}=1 (residual {residual:.3e})")]
    InvalidObservable {
        party: usize,
        input: usize,
        residual: f64,
    },

    #[error("operator relation {relation} violated: residual {residual:.3e} exceeds {tol:.3e}")]
    RelationViolated {
        relation: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("qubit extraction requires even dimension, got {0}")]
    OddDimension(usize),

    #[error("channel is not trace preserving (residual {0:.3e})")]
    NotTracePreserving(f64),

    #[error("angle {0} outside [0, \u{3c0}/2]")]
    AngleOutOfRange(f64),

    #[error("iterative eigensolver did not converge: residual {residual:.3e} after {matvecs} matvecs")]
    NonConvergence { residual: f64, matvecs: usize },

    #[error("no tight linear certificate found for a \u{2264} {0}")]
    NoTightCertificate(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}
