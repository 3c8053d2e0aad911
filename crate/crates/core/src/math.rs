//! Scalar helpers that `core` does not provide without `std`.

use crate::C64;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

/// `sin(w) / w`, with a Taylor series for `|w| < 1e-4`.
pub(crate) fn sinc(w: C64) -> C64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        // 1 - w²/6 + w⁴/120 - w⁶/5040
        C64::new(1.0, 0.0) + w2 * (-1.0 / 6.0 + w2 * (1.0 / 120.0 - w2 / 5040.0))
    } else {
        w.sin() / w
    }
}

/// Square root of `w` on the branch with positive imaginary part.
///
/// For `w` on the positive real axis the limit from the upper half-plane is
/// returned (a nonnegative real number).
pub(crate) fn sqrt_upper(w: C64) -> C64 {
    let k = w.sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        -k
    } else {
        k
    }
}
