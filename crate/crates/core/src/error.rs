use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atom index {index} out of range 1..={n_atoms}")]
    AtomIndexOutOfRange { index: usize, n_atoms: usize },

    #[error("unknown axis label `{0}`")]
    UnknownAxis(String),

    #[error("operation needs a photon cutoff M >= 1 (layout is atoms-only)")]
    PhotonCutoffRequired,

    #[error("invalid Hilbert layout: {0}")]
    InvalidLayout(String),

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {max_deviation:e})")]
    NotHermitian { max_deviation: f64 },

    #[error("excitation number {n} out of range for {n_atoms} atoms")]
    ExcitationOutOfRange { n: usize, n_atoms: usize },

    #[error("no finite critical point: N = 2n + 1 (N = {n_atoms}, n = {n})")]
    NoFiniteCriticalPoint { n_atoms: usize, n: usize },

    #[error("unsupported interaction model: {0}")]
    UnsupportedInteraction(String),

    #[error("operator does not conserve the total excitation number (max leaking entry {max_leak:e})")]
    NotExcitationConserving { max_leak: f64 },

    #[error("parameter grid is empty")]
    EmptyGrid,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "superoperator dimension {dim} exceeds the cap {cap}; lower the photon cutoff or the atom number"
    )]
    SuperoperatorTooLarge { dim: usize, cap: usize },

    #[error("trace drifted by {drift:e} at t = {time}; reduce the time step")]
    TraceDrift { time: f64, drift: f64 },

    #[error("density operator lost positivity at t = {time} (min eigenvalue {min_eigenvalue:e}); reduce the time step")]
    PositivityViolation { time: f64, min_eigenvalue: f64 },

    #[error("photon cutoff did not converge over {tried:?}; long-time photon numbers {photon_numbers:?}")]
    CutoffNotConverged {
        tried: Vec<usize>,
        photon_numbers: Vec<f64>,
    },
}
