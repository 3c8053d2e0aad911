use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong in the core computations.
///
/// Variants fall into three groups: malformed input data, violated
/// hypotheses (the input is well-formed but outside the class an operation
/// is defined on), and numerical failures.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Breakpoints are not strictly increasing from 0, or not finite.
    Breakpoints(&'static str),
    /// Piece count does not match the breakpoint list.
    PieceCount { breakpoints: usize, pieces: usize },
    /// A piece is not positive semidefinite. `None` means the tail.
    NotPositiveSemidefinite { piece: Option<usize> },
    /// A piece has vanishing trace. `None` means the tail.
    ZeroTrace { piece: Option<usize> },
    /// A non-finite number appeared in piece data.
    NonFinite { piece: Option<usize> },
    /// The Hamiltonian is a.e. a single diagonal projector.
    Trivial,
    /// An operation that needs `h12 ≡ 0` received an off-diagonal entry.
    NotDiagonal { piece: Option<usize> },
    /// `∫ √det H < ∞`, so the `η` grid is undefined.
    DetIntegrable,
    /// The operation needs a constant tail with positive determinant.
    NoDetPositiveTail,
    /// A unit-trace Hamiltonian was required.
    NotUnitTrace { piece: Option<usize> },
    /// Negative or non-finite shift / cut position.
    BadPosition(f64),
    /// A positive real parameter was not positive (or not finite).
    BadParameter(&'static str),
    /// `Im z` must be positive.
    NotUpperHalfPlane,
    /// Weyl disk denominator vanished: the horizon is too short.
    HorizonTooShort { t: f64 },
    /// Disk iteration hit the horizon cap before reaching the tolerance.
    ToleranceUnreachable { center_re: f64, center_im: f64, radius: f64 },
    /// Malformed string data.
    InvalidString(&'static str),
    /// `L + lim M < ∞` or `M ≡ 0`.
    StringNotSingular(&'static str),
    /// `√M' ∈ L¹`, so the string grid `t_n` is undefined.
    DensityRootIntegrable,
    /// A closed-form route does not cover this input.
    Unsupported(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |p: &Option<usize>| match p {
            Some(k) => alloc::format!("piece {k}"),
            None => alloc::string::String::from("tail"),
        };
        match self {
            Error::Breakpoints(m) => write!(f, "invalid breakpoints: {m}"),
            Error::PieceCount { breakpoints, pieces } => {
                write!(f, "{breakpoints} breakpoints need {} pieces, got {pieces}", breakpoints.saturating_sub(1))
            }
            Error::NotPositiveSemidefinite { piece } => {
                write!(f, "{} is not positive semidefinite", at(piece))
            }
            Error::ZeroTrace { piece } => write!(f, "trace vanishes on {}", at(piece)),
            Error::NonFinite { piece } => write!(f, "non-finite entry in {}", at(piece)),
            Error::Trivial => write!(f, "Hamiltonian is trivial: a.e. equal to diag(1,0) or diag(0,1) up to scaling"),
            Error::NotDiagonal { piece } => write!(f, "{} has a nonzero off-diagonal entry", at(piece)),
            Error::DetIntegrable => {
                write!(f, "sqrt(det H) is integrable on R+; the eta grid requires sqrt(det H) not in L1")
            }
            Error::NoDetPositiveTail => {
                write!(f, "operation requires a constant tail with positive determinant")
            }
            Error::NotUnitTrace { piece } => {
                write!(f, "{} does not have unit trace; normalize the trace before converting to a string", at(piece))
            }
            Error::BadPosition(r) => write!(f, "position {r} must be finite and nonnegative"),
            Error::BadParameter(m) => write!(f, "bad parameter: {m}"),
            Error::NotUpperHalfPlane => write!(f, "spectral parameter must satisfy Im z > 0"),
            Error::HorizonTooShort { t } => write!(f, "horizon too short at t = {t}"),
            Error::ToleranceUnreachable { center_re, center_im, radius } => {
                write!(f, "tolerance unreachable; best disk center {center_re}{center_im:+}i radius {radius}")
            }
            Error::InvalidString(m) => write!(f, "invalid string: {m}"),
            Error::StringNotSingular(m) => write!(f, "[M,L] pair condition violated: {m}"),
            Error::DensityRootIntegrable => {
                write!(f, "sqrt(M') is integrable; the t_n grid requires sqrt(M') not in L1")
            }
            Error::Unsupported(m) => write!(f, "unsupported input: {m}"),
        }
    }
}

impl core::error::Error for Error {}
