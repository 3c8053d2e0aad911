//! File formats, subcommands and the verification report for
//! `canon-szego-core`.

pub mod commands;
pub mod corpus;
pub mod input;
pub mod output;
pub mod verify;

use canon_szego_core::Error;

/// Exit codes: 2 for malformed input or flags, 3 for a violated hypothesis,
/// 4 for a numerical failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("invalid input: {0}")]
    Invalid(Error),
    #[error("hypothesis violated: {0}")]
    Hypothesis(Error),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn field(field: &str, message: String) -> Self {
        CliError::Field { field: field.to_string(), message }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Field { .. } | CliError::Invalid(_) | CliError::Io(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        use Error::*;
        match e {
            Breakpoints(_)
            | PieceCount { .. }
            | NotPositiveSemidefinite { .. }
            | ZeroTrace { .. }
            | NonFinite { .. }
            | BadPosition(_)
            | BadParameter(_)
            | NotUpperHalfPlane
            | InvalidString(_) => CliError::Invalid(e),
            Trivial
            | NotDiagonal { .. }
            | DetIntegrable
            | NoDetPositiveTail
            | NotUnitTrace { .. }
            | StringNotSingular(_)
            | DensityRootIntegrable
            | Unsupported(_) => CliError::Hypothesis(e),
            HorizonTooShort { .. } | ToleranceUnreachable { .. } => CliError::Numerical(e),
        }
    }
}

/// `a:b:n`, `n` equally spaced points from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = |m: &str| CliError::field("grid", format!("{m} (expected a:b:n), got {spec:?}"));
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, n] = parts[..] else { return Err(bad("need three fields")) };
        let a: f64 = a.trim().parse().map_err(|_| bad("bad start"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("bad end"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("bad count"))?;
        if !a.is_finite() || !b.is_finite() {
            return Err(bad("endpoints must be finite"));
        }
        if n == 0 {
            return Err(bad("count must be positive"));
        }
        Ok(Grid { a, b, n })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.a];
        }
        let step = (self.b - self.a) / (self.n - 1) as f64;
        (0..self.n).map(|k| if k + 1 == self.n { self.b } else { self.a + step * k as f64 }).collect()
    }
}

/// Positive finite tolerance.
pub fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(CliError::field("tol", format!("must be positive and finite, got {tol}")))
    }
}
