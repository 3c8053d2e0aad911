//! Transfer matrices of `J M' = z H M` for piecewise-constant `H`.
//!
//! On a constant piece the solution is `exp(-z δ J H)`, which has a closed
//! form because `(JH)² = -det(H)·Id`. The full matrix is the ordered product
//! of these steps, later pieces multiplying from the left.

use crate::hamiltonian::{Hamiltonian, Piece};
use crate::math::sinc;
use crate::quadrature::{integrate, QuadOptions};
use crate::C64;

/// `M = [[Θ⁺, Φ⁺], [Θ⁻, Φ⁻]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub theta_plus: C64,
    pub phi_plus: C64,
    pub theta_minus: C64,
    pub phi_minus: C64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        TransferMatrix { theta_plus: l, phi_plus: o, theta_minus: o, phi_minus: l }
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let (a, b) = (self, rhs);
        TransferMatrix {
            theta_plus: a.theta_plus * b.theta_plus + a.phi_plus * b.theta_minus,
            phi_plus: a.theta_plus * b.phi_plus + a.phi_plus * b.phi_minus,
            theta_minus: a.theta_minus * b.theta_plus + a.phi_minus * b.theta_minus,
            phi_minus: a.theta_minus * b.phi_plus + a.phi_minus * b.phi_minus,
        }
    }

    pub fn det(&self) -> C64 {
        self.theta_plus * self.phi_minus - self.theta_minus * self.phi_plus
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.theta_plus, self.phi_plus, self.theta_minus, self.phi_minus]
    }

    /// `|det M − 1| / max(1, max|M_ij|²)`: round-off in the determinant
    /// scales with the square of the entries.
    pub fn det_defect(&self) -> f64 {
        let s = self.max_abs();
        (self.det() - 1.0).norm() / (s * s).max(1.0)
    }

    /// `(Φ⁺ + w Φ⁻) / (Θ⁺ + w Θ⁻)`.
    pub fn fraction(&self, w: C64) -> C64 {
        (self.phi_plus + w * self.phi_minus) / (self.theta_plus + w * self.theta_minus)
    }

    /// `Im(Θ⁺ · conj Θ⁻)`.
    pub fn energy(&self) -> f64 {
        (self.theta_plus * self.theta_minus.conj()).im
    }
}

/// `exp(-z δ J H)` for a single constant piece.
pub fn step_matrix(piece: &Piece, delta: f64, z: C64) -> TransferMatrix {
    // -JH = [[h12, h22], [-h11, -h12]].
    let s = z * delta;
    let a = TransferMatrix {
        theta_plus: s * piece.h12,
        phi_plus: s * piece.h22,
        theta_minus: s * (-piece.h11),
        phi_minus: s * (-piece.h12),
    };
    let det = piece.det();
    let one = C64::new(1.0, 0.0);
    if det > 0.0 {
        let omega = s * crate::math::sqrt(det);
        let c = omega.cos();
        let k = sinc(omega);
        TransferMatrix {
            theta_plus: c + k * a.theta_plus,
            phi_plus: k * a.phi_plus,
            theta_minus: k * a.theta_minus,
            phi_minus: c + k * a.phi_minus,
        }
    } else {
        TransferMatrix {
            theta_plus: one + a.theta_plus,
            phi_plus: a.phi_plus,
            theta_minus: a.theta_minus,
            phi_minus: one + a.phi_minus,
        }
    }
}

/// `M(t, z)`.
pub fn solve(h: &Hamiltonian, t: f64, z: C64) -> TransferMatrix {
    let mut m = TransferMatrix::identity();
    for seg in h.segments() {
        if seg.start >= t {
            break;
        }
        let len = seg.end.min(t) - seg.start;
        m = step_matrix(&seg.piece, len, z).mul(&m);
    }
    m
}

/// Both sides of `Im(Θ⁺ conj Θ⁻) = Im z ∫_0^t ⟨HΘ, Θ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `residual / max(1, |lhs|)`.
    pub relative: f64,
}

fn quadratic_form(p: &Piece, x: (C64, C64)) -> f64 {
    let (u, v) = x;
    p.h11 * u.norm_sqr() + 2.0 * p.h12 * (u.conj() * v).re + p.h22 * v.norm_sqr()
}

/// Energy identity residual at `(t, z)`.
///
/// On rank-one pieces `⟨HΘ, Θ⟩` is constant, so the integral is exact;
/// elsewhere it is integrated by adaptive quadrature.
pub fn energy_check(h: &Hamiltonian, t: f64, z: C64) -> EnergyCheck {
    let mut m = TransferMatrix::identity();
    let mut integral = 0.0;
    for seg in h.segments() {
        if seg.start >= t {
            break;
        }
        let len = seg.end.min(t) - seg.start;
        let theta0 = (m.theta_plus, m.theta_minus);
        let p = seg.piece;
        if p.det() > 0.0 {
            let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_panels: 1 << 12 };
            let r = integrate(
                |s| {
                    let step = step_matrix(&p, s, z);
                    let th = (
                        step.theta_plus * theta0.0 + step.phi_plus * theta0.1,
                        step.theta_minus * theta0.0 + step.phi_minus * theta0.1,
                    );
                    quadratic_form(&p, th)
                },
                0.0,
                len,
                opts,
            );
            integral += r.value;
        } else {
            integral += len * quadratic_form(&p, theta0);
        }
        m = step_matrix(&p, len, z).mul(&m);
    }
    let lhs = m.energy();
    let rhs = z.im * integral;
    let residual = (lhs - rhs).abs();
    EnergyCheck { lhs, rhs, residual, relative: residual / lhs.abs().max(1.0) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_close, c};
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn identity_step_is_rotation() {
        let z = c(0.7, 0.3);
        let t = 2.5;
        let m = step_matrix(&Piece::diag(1.0, 1.0), t, z);
        let w = z * t;
        assert!((m.theta_plus - w.cos()).norm() < 1e-15);
        assert!((m.phi_plus - w.sin()).norm() < 1e-15);
        assert!((m.theta_minus + w.sin()).norm() < 1e-15);
        assert!((m.phi_minus - w.cos()).norm() < 1e-15);
    }

    #[test]
    fn projector_step_is_nilpotent_update() {
        let z = c(1.5, -2.0);
        let m = step_matrix(&Piece::diag(1.0, 0.0), 0.75, z);
        assert_eq!(m.theta_plus, c(1.0, 0.0));
        assert_eq!(m.phi_plus, c(0.0, 0.0));
        assert_eq!(m.theta_minus, -z * 0.75);
        assert_eq!(m.phi_minus, c(1.0, 0.0));
    }

    #[test]
    fn stieltjes_two_step() {
        let h = Hamiltonian::from_lengths(
            &[(1.0, Piece::diag(1.0, 0.0)), (1.0, Piece::diag(0.0, 1.0))],
            Piece::diag(1.0, 0.0),
        )
        .unwrap();
        for z in [c(0.3, 1.0), c(-2.0, 0.5), c(0.0, 3.0)] {
            let m = solve(&h, 2.0, z);
            assert!((m.theta_plus - (1.0 - z * z)).norm() < 1e-14);
            assert!((m.phi_plus - z).norm() < 1e-14);
            assert!((m.theta_minus + z).norm() < 1e-14);
            assert!((m.phi_minus - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_diagonal_closed_form() {
        // diag(a1, a2): Θ⁺ = cos(√(a1a2) t z), Θ⁻ = -√(a1/a2) sin(...).
        let (a1, a2) = (2.0, 8.0);
        let h = Hamiltonian::constant(Piece::diag(a1, a2)).unwrap();
        for &t in &[0.5, 3.0, 10.0] {
            for z in [c(0.0, 0.3), c(5.0, 0.0), c(-1.0, 2.0)] {
                let m = solve(&h, t, z);
                let w = z * t * 4.0;
                let scale = m.max_abs().max(1.0);
                assert!((m.theta_plus - w.cos()).norm() / scale < 1e-13);
                assert!((m.theta_minus + w.sin() * 0.5).norm() / scale < 1e-13);
                assert!((m.phi_plus - w.sin() * 2.0).norm() / scale < 1e-13);
            }
        }
    }

    #[test]
    fn small_omega_series_matches() {
        let p = Piece::diag(1.0, 1.0);
        let z = c(1e-6, 1e-6);
        let m = step_matrix(&p, 1.0, z);
        assert!((m.phi_plus - z.sin()).norm() < 1e-20);
    }

    #[test]
    fn energy_identity_on_identity_hamiltonian() {
        let h = Hamiltonian::constant(Piece::diag(1.0, 1.0)).unwrap();
        let e = energy_check(&h, 1.0, c(0.0, 1.0));
        let expected = libm::cosh(1.0) * libm::sinh(1.0);
        assert_close(e.lhs, expected, 1e-14);
        assert!(e.residual < 1e-12);
        let e0 = energy_check(&h, 0.0, c(0.0, 1.0));
        assert_eq!((e0.lhs, e0.rhs), (0.0, 0.0));
    }

    #[test]
    fn mean_type_matches_xi() {
        let h = Hamiltonian::from_lengths(
            &[(1.0, Piece::diag(2.0, 0.5)), (0.5, Piece::diag(4.0, 1.0))],
            Piece::diag(1.0, 1.0),
        )
        .unwrap();
        let y = 1e3;
        // y·ξ(t) must stay below the f64 exponent range.
        for &t in &[0.25, 0.5, 0.6] {
            let big = solve(&h, t, c(0.0, y));
            let mt = big.theta_plus.norm().ln() / y;
            assert!((mt - h.xi(t)).abs() < 0.01, "t = {t}: {mt} vs {}", h.xi(t));
        }
    }

    fn piece_strategy() -> impl Strategy<Value = Piece> {
        // Rank-one pieces use small integer directions and dyadic scales so
        // their determinant is exactly zero.
        let rank_one = (
            prop::sample::select(vec![(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0), (2.0, 1.0), (1.0, -3.0)]),
            1u32..24,
        )
            .prop_map(|((p, q), k): ((f64, f64), u32)| {
                let a = k as f64 / 8.0;
                Piece::new(a * p * p, a * p * q, a * q * q)
            });
        let full = (0.0f64..3.0, -1.0f64..1.0, 0.0f64..3.0)
            .prop_map(|(a, s, b)| Piece::new(a + 0.05, s * libm::sqrt(a * b), b + 0.05));
        prop_oneof![rank_one, full]
    }

    proptest! {
        #[test]
        fn step_determinant_is_one(p in piece_strategy(), d in 0.01f64..2.0,
                                   re in -10.0f64..10.0, im in -10.0f64..10.0) {
            let z = c(re, im).scale(if c(re, im).norm() > 10.0 { 10.0 / c(re, im).norm() } else { 1.0 });
            let m = step_matrix(&p, d, z);
            prop_assert!(m.det_defect() < 1e-14, "defect {}", m.det_defect());
        }

        #[test]
        fn cocycle_and_symmetry(p1 in piece_strategy(), p2 in piece_strategy(), tail in piece_strategy(),
                                l1 in 0.1f64..3.0, l2 in 0.1f64..3.0, frac in 0.0f64..1.0,
                                re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let h = Hamiltonian::from_lengths(&[(l1, p1), (l2, p2)], tail).unwrap();
            let z = c(re, im);
            let t = 8.0;
            let r = frac * t;
            let full = solve(&h, t, z);
            let split = solve(&h.shift(r).unwrap(), t - r, z).mul(&solve(&h, r, z));
            let scale = full.max_abs().max(1.0);
            for (a, b) in full.entries().iter().zip(split.entries().iter()) {
                prop_assert!((a - b).norm() / scale < 1e-12);
            }
            let mirrored = solve(&h, t, c(re, -im));
            for (a, b) in full.entries().iter().zip(mirrored.entries().iter()) {
                prop_assert!((a.conj() - b).norm() / scale < 1e-13);
            }
            let real = solve(&h, t, c(re, 0.0));
            for e in real.entries() {
                prop_assert!(e.im == 0.0);
            }
        }

        #[test]
        fn energy_identity(p1 in piece_strategy(), p2 in piece_strategy(), tail in piece_strategy(),
                           l1 in 0.1f64..3.0, l2 in 0.1f64..3.0, t in 0.0f64..10.0,
                           re in -3.0f64..3.0, im in 0.05f64..3.0) {
            let h = Hamiltonian::from_lengths(&[(l1, p1), (l2, p2)], tail).unwrap();
            let e = energy_check(&h, t, c(re, im));
            prop_assert!(e.relative < 1e-10, "relative residual {}", e.relative);
        }
    }
}
