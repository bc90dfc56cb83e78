use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice size: {0}")]
    InvalidLattice(String),
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("operator is not Hermitian")]
    NotHermitian,
    #[error("control qubit {0} overlaps the target region")]
    ControlInRegion(usize),
    #[error("control qubit {0} must be in |0> before this step")]
    ControlNotReset(usize),
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("{qubits} qubits exceed the dense-oracle cap of {cap}")]
    OracleCapExceeded { qubits: usize, cap: usize },
    #[error("pauli strings act on different site universes ({0} vs {1})")]
    SiteUniverseMismatch(usize, usize),
    #[error("observable regions do not mutually commute")]
    NonCommutingRegions,
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("mismatch between model terms and sweep schedule: {0}")]
    ScheduleMismatch(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
