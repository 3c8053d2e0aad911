//! Weyl–Titchmarsh function, Weyl disks and the spectral density.
//!
//! Every Hamiltonian in this crate ends in a constant tail, whose own Weyl
//! function is a root of a quadratic. Pulling it back through the transfer
//! matrix at the tail start gives `m(z)` exactly. The nested-disk limit is
//! kept as a second, independent route.

use crate::hamiltonian::{Hamiltonian, Piece};
use crate::math::sqrt;
use crate::transfer::{solve, TransferMatrix};
use crate::{Error, Result, C64};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest horizon tried by the disk-limit route.
pub const HORIZON_CAP: f64 = (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    ExactTail,
    DiskLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylResult {
    pub m: C64,
    /// Certified bound on `|m − m_true|`; zero on the exact route.
    pub radius: f64,
    pub route: Route,
}

/// `m(z) = a + b z + ∫ (...) dμ`; only `a` and `b` are stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HerglotzCoefficients {
    pub a: f64,
    pub b: f64,
}

/// Weyl function of a constant Hamiltonian, `None` standing for `∞`.
///
/// For `[[a, b], [b, c]]` with `a > 0` this is the root of
/// `a w² − 2 b w + c = 0` with nonnegative imaginary part. It does not depend
/// on `z`.
pub fn tail_m(tail: &Piece) -> Option<C64> {
    if tail.h11 == 0.0 {
        return None;
    }
    let det = tail.det().max(0.0);
    Some(C64::new(tail.h12, sqrt(det)) / tail.h11)
}

fn check_upper(z: C64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NotUpperHalfPlane)
    }
}

/// Pull a tail parameter back through `M(t_K, z)`.
fn pull_back(m: &TransferMatrix, w: Option<C64>) -> C64 {
    match w {
        Some(w) => m.fraction(w),
        None => m.phi_minus / m.theta_minus,
    }
}

/// Center `Φ⁻/Θ⁻` and radius `1 / Im(Θ⁺ conj Θ⁻)` of the Weyl disk at `t`.
pub fn weyl_disk(h: &Hamiltonian, t: f64, z: C64) -> Result<(C64, f64)> {
    check_upper(z)?;
    let m = solve(h, t, z);
    disk_of(&m, t)
}

fn disk_of(m: &TransferMatrix, t: f64) -> Result<(C64, f64)> {
    let energy = m.energy();
    if m.theta_minus.norm() == 0.0 || !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::HorizonTooShort { t });
    }
    let center = m.phi_minus / m.theta_minus;
    if !center.re.is_finite() || !center.im.is_finite() {
        return Err(Error::HorizonTooShort { t });
    }
    Ok((center, 1.0 / energy))
}

/// `m(z)` from the exact constant tail.
pub fn m_function(h: &Hamiltonian, z: C64) -> Result<WeylResult> {
    check_upper(z)?;
    let m = solve(h, h.tail_start(), z);
    Ok(WeylResult { m: pull_back(&m, tail_m(&h.tail())), radius: 0.0, route: Route::ExactTail })
}

/// Reference point on the boundary of each Weyl disk used by the disk-limit route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// `Φ⁺/Θ⁺`.
    Zero,
    /// `Φ⁻/Θ⁻`, the disk center.
    Infinity,
}

/// `m(z)` as the limit of nested Weyl disks, doubling the horizon from
/// `t = 1` until the certified bound is below `tol`.
pub fn m_disk_limit(h: &Hamiltonian, z: C64, tol: f64, reference: Reference) -> Result<WeylResult> {
    check_upper(z)?;
    if !(tol > 0.0) {
        return Err(Error::BadParameter("tol must be positive"));
    }
    let mut best: Option<(C64, f64)> = None;
    let mut t = 1.0;
    while t <= HORIZON_CAP {
        let m = solve(h, t, z);
        match disk_of(&m, t) {
            Ok((center, radius)) => {
                // A boundary point is within one radius of the center, so
                // within two radii of the true value.
                let (value, bound) = match reference {
                    Reference::Infinity => (center, radius),
                    Reference::Zero => (m.phi_plus / m.theta_plus, 2.0 * radius),
                };
                if value.re.is_finite() && value.im.is_finite() {
                    best = Some((value, bound));
                    if bound < tol {
                        return Ok(WeylResult { m: value, radius: bound, route: Route::DiskLimit });
                    }
                } else {
                    break;
                }
            }
            Err(_) if m.max_abs().is_finite() => {}
            Err(_) => break,
        }
        t *= 2.0;
    }
    match best {
        Some((c, r)) => Err(Error::ToleranceUnreachable { center_re: c.re, center_im: c.im, radius: r }),
        None => Err(Error::HorizonTooShort { t: HORIZON_CAP }),
    }
}

/// `w(x) = Im m_r / |Θ⁺(t_K, x) + m_r Θ⁻(t_K, x)|²`, the a.c. spectral density.
/// Needs a tail with positive determinant.
pub fn spectral_density(h: &Hamiltonian, x: f64) -> Result<f64> {
    let tail = h.tail();
    if !(tail.det() > 0.0) {
        return Err(Error::NoDetPositiveTail);
    }
    let mr = tail_m(&tail).expect("positive determinant implies h11 > 0");
    let m = solve(h, h.tail_start(), C64::new(x, 0.0));
    let f = m.theta_plus + mr * m.theta_minus;
    Ok(mr.im / f.norm_sqr())
}

/// Poisson-regularized density `Im m(x + iε)`.
pub fn spectral_density_regularized(h: &Hamiltonian, x: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::BadParameter("eps must be positive"));
    }
    Ok(m_function(h, C64::new(x, eps))?.m.im)
}

/// `a` and `b` for diagonal `H`: `a = 0`, and `b` is the `h22`-mass of a
/// leading interval on which `H` is a multiple of `diag(0, 1)`.
pub fn herglotz_coefficients(h: &Hamiltonian) -> Result<HerglotzCoefficients> {
    if !h.is_diagonal() {
        return Err(Error::Unsupported("Herglotz coefficients need a diagonal Hamiltonian"));
    }
    let mut b = 0.0;
    for seg in h.segments() {
        if seg.piece.h11 != 0.0 {
            break;
        }
        if seg.end.is_infinite() {
            return Err(Error::Trivial);
        }
        b += seg.length() * seg.piece.h22;
    }
    Ok(HerglotzCoefficients { a: 0.0, b })
}
