use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integrand does not decay at the grid ends (|f| = {magnitude:e}, threshold {threshold:e})")]
    TailTooLarge { magnitude: f64, threshold: f64 },
    #[error("evaluation point {0} lies on the real axis")]
    NonRealGrid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("spectral parameter too far from the real axis for this domain (Im z * halfwidth = {0})")]
    Stiffness(f64),
    #[error("scattering function vanishes on the real axis near z = {0}")]
    RealAxisZero(f64),
    #[error("zero count mismatch: scan found {scan}, winding number is {winding}")]
    CountMismatch { scan: usize, winding: i64 },
    #[error("a'(z) vanishes at z = i{0}")]
    DerivativeVanishes(f64),
    #[error("Bäcklund eigenvector collapsed at x = {0}")]
    ZeroVector(f64),
    #[error("branch ambiguous: |B(iq)| or |A(-iq)| = {0:e} is below the degeneracy threshold")]
    BranchAmbiguous(f64),
    #[error("norming constant unstable at i{0}: both branch denominators are tiny")]
    InstableNorming(f64),
    #[error("new pole {0} collides with an existing pole")]
    PoleCollision(String),
    #[error("Darboux frame is singular at x = {0}")]
    SingularFrame(f64),
    #[error("{0} is not a pole of this configuration")]
    NotAPole(String),
    #[error("singular linear system")]
    SingularLinearSystem,
    #[error("unsupported spectrum: {0} zeros (at most 2)")]
    UnsupportedSpectrum(usize),
    #[error("initial data is not even (deviation {0:e})")]
    NotEven(f64),
    #[error("parabolic cylinder arguments outside the supported envelope")]
    OutOfEnvelope,
    #[error("solution blew up at t = {0}")]
    BlowUp(f64),
    #[error("radiation reached the boundary at t = {t} (|u| = {magnitude:e})")]
    TailContamination { t: f64, magnitude: f64 },
}

impl Error {
    /// Short name used by the CLI when reporting a tripped guard.
    pub fn guard_name(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::TailTooLarge { .. } => "TailTooLarge",
            Error::NonRealGrid(_) => "NonRealGrid",
            Error::Io(_) => "IoError",
            Error::Format(_) => "FormatError",
            Error::Stiffness(_) => "StiffnessError",
            Error::RealAxisZero(_) => "RealAxisZero",
            Error::CountMismatch { .. } => "CountMismatch",
            Error::DerivativeVanishes(_) => "DerivativeVanishes",
            Error::ZeroVector(_) => "ZeroVector",
            Error::BranchAmbiguous(_) => "BranchAmbiguous",
            Error::InstableNorming(_) => "InstableNorming",
            Error::PoleCollision(_) => "PoleCollision",
            Error::SingularFrame(_) => "SingularFrame",
            Error::NotAPole(_) => "NotAPole",
            Error::SingularLinearSystem => "SingularLinearSystem",
            Error::UnsupportedSpectrum(_) => "UnsupportedSpectrum",
            Error::NotEven(_) => "NotEven",
            Error::OutOfEnvelope => "OutOfEnvelope",
            Error::BlowUp(_) => "BlowUp",
            Error::TailContamination { .. } => "TailContamination",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
