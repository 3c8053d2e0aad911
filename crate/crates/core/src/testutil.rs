use crate::hamiltonian::DiagonalHamiltonian;
use crate::C64;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[track_caller]
pub(crate) fn assert_close(actual: f64, expected: f64, tol: f64) {
    assert!(
        (actual - expected).abs() <= tol,
        "{actual} differs from {expected} by {} > {tol}",
        (actual - expected).abs()
    );
}

/// `diag(2, 1/2)` on `[0, 1)`, identity afterwards.
pub(crate) fn bump() -> DiagonalHamiltonian {
    DiagonalHamiltonian::from_lengths(&[(1.0, 2.0, 0.5)], (1.0, 1.0)).unwrap()
}
