//! Entropy functionals `I_H(r) = Im m_r(i)`, `J_H(r)` (the logarithmic
//! integral of the density of `H_r`) and `K_H(r) = log I − J`.
//!
//! For a tail with positive determinant `J` has a closed form through the
//! transfer matrix at the tail start, so nothing here needs an improper
//! integral. The line-quadrature route is an independent cross-check.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::hamiltonian::{DiagonalHamiltonian, Hamiltonian};
use crate::math::{exp, ln, sqrt};
use crate::quadrature::{integrate_breaks, QuadOptions};
use crate::transfer::solve;
use crate::weyl::{herglotz_coefficients, m_function, spectral_density, tail_m};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyRoute {
    ExactTail,
    Quadrature,
}

/// `(I, J, K)` at one position. `J = −∞` and `K = +∞` encode a density
/// whose logarithm is not integrable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRecord {
    pub i: f64,
    pub j: f64,
    pub k: f64,
    pub route: EntropyRoute,
}

/// `Im m_{H_r}(i)`.
pub fn i_value(h: &Hamiltonian, r: f64) -> Result<f64> {
    let hr = h.shift(r)?;
    hr.validate().require_nontrivial()?;
    Ok(m_function(&hr, I)?.m.im)
}

/// `J_H(0)` from the tail: `log Im m_tail + 2ξ(t_K) − 2 log|F(i)|` with
/// `F = Θ⁺ + m_tail Θ⁻` at the tail start. `−∞` for a rank-one tail, whose
/// spectral measure is discrete.
pub fn j_exact(h: &Hamiltonian) -> Result<f64> {
    h.validate().require_nontrivial()?;
    let tail = h.tail();
    if tail.det() <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mr = tail_m(&tail).expect("positive determinant implies h11 > 0");
    let tk = h.tail_start();
    let m = solve(h, tk, I);
    let f = m.theta_plus + mr * m.theta_minus;
    Ok(ln(mr.im) + 2.0 * h.xi(tk) - 2.0 * ln(f.norm()))
}

/// `J_H(r)`.
pub fn j_exact_at(h: &Hamiltonian, r: f64) -> Result<f64> {
    j_exact(&h.shift(r)?)
}

/// `log I − J`, with `+∞` when `J = −∞`.
pub fn k_mu(i: f64, j: f64) -> f64 {
    if j == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        ln(i) - j
    }
}

/// Exact-route record at `r`.
pub fn k_value(h: &Hamiltonian, r: f64) -> Result<EntropyRecord> {
    let hr = h.shift(r)?;
    hr.validate().require_nontrivial()?;
    let i = m_function(&hr, I)?.m.im;
    let j = j_exact(&hr)?;
    Ok(EntropyRecord { i, j, k: k_mu(i, j), route: EntropyRoute::ExactTail })
}

/// Settings for integrals of the form `(1/π) ∫_ℝ f(x) / (1 + x²) dx`.
///
/// The integral over `[−X, X]` is computed with unit-width panels, the cutoff
/// doubled from `start`, and the `1/X` tail of the truncation removed by
/// the extrapolation `2T(2X) − T(X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineQuadOptions {
    pub tol: f64,
    pub start: f64,
    pub max_cutoff: f64,
    /// `log w` is clipped below at this value.
    pub log_floor: f64,
}

impl Default for LineQuadOptions {
    fn default() -> Self {
        LineQuadOptions { tol: 1e-9, start: 64.0, max_cutoff: 131_072.0, log_floor: -700.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntegral {
    pub value: f64,
    /// Change between the last two extrapolated values.
    pub error: f64,
    pub cutoff: f64,
    pub converged: bool,
}

fn unit_breaks(a: f64, b: f64) -> Vec<f64> {
    let n = libm::ceil(b - a).max(1.0) as usize;
    let mut pts: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    pts.push(b);
    pts
}

/// Extrapolated `(1/π) ∫ f(x)/(1+x²) dx`, plus the sequence of successive
/// changes between extrapolated values.
fn poisson_line<F: FnMut(f64) -> f64>(f: &mut F, opts: &LineQuadOptions) -> (LineIntegral, Vec<f64>, f64) {
    let mut g = |x: f64| f(x) / (1.0 + x * x) / core::f64::consts::PI;
    let inner = QuadOptions { abs_tol: opts.tol * 1e-2, rel_tol: 0.0, max_panels: 1 << 22 };
    let mut x = opts.start;
    let mut t = integrate_breaks(&mut g, &unit_breaks(-x, x), inner).value;
    let mut prev: Option<f64> = None;
    let mut changes = Vec::new();
    let mut last = t;
    while 2.0 * x <= opts.max_cutoff {
        let right = integrate_breaks(&mut g, &unit_breaks(x, 2.0 * x), inner).value;
        let left = integrate_breaks(&mut g, &unit_breaks(-2.0 * x, -x), inner).value;
        let t2 = t + right + left;
        let r = 2.0 * t2 - t;
        x *= 2.0;
        t = t2;
        last = r;
        if let Some(p) = prev {
            let change = (r - p).abs();
            changes.push(r - p);
            if change < opts.tol {
                return (LineIntegral { value: r, error: change, cutoff: x, converged: true }, changes, t);
            }
        }
        prev = Some(r);
    }
    let error = changes.last().map_or(f64::INFINITY, |c| c.abs());
    (LineIntegral { value: last, error, cutoff: x, converged: false }, changes, t)
}

/// Result of the quadrature route for `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JQuadrature {
    pub integral: LineIntegral,
    /// `w(x)` and `w(−x)` agreed at every probe point.
    pub even: bool,
    /// Some sample hit the `log w` floor.
    pub clipped: bool,
}

impl JQuadrature {
    /// The value, or `−∞` when the integral was found to diverge.
    pub fn value(&self) -> f64 {
        self.integral.value
    }
}

/// `(1/π) ∫ log w(x) / (1 + x²) dx` for an arbitrary evaluable density.
///
/// Returns `−∞` when the extrapolated value keeps decreasing by more than
/// the tolerance over the last three refinements at the largest cutoff.
pub fn j_quadrature<W: FnMut(f64) -> f64>(mut w: W, opts: &LineQuadOptions) -> JQuadrature {
    let mut even = true;
    for &x in &[0.37, 1.3, 2.9, 7.7, 23.1] {
        let (a, b) = (w(x), w(-x));
        if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1e-300) {
            even = false;
        }
    }
    let floor = opts.log_floor;
    let mut clipped = false;
    let mut logw = |x: f64| {
        let v = w(x);
        let l = if v > 0.0 { ln(v) } else { f64::NEG_INFINITY };
        if l < floor {
            clipped = true;
            floor
        } else {
            l
        }
    };
    let (mut integral, changes, _) = poisson_line(&mut logw, opts);
    let n = changes.len();
    if !integral.converged && n >= 3 && changes[n - 3..].iter().all(|&c| c < -opts.tol) {
        integral.value = f64::NEG_INFINITY;
    }
    JQuadrature { integral, even, clipped }
}

/// `b + (1/π) ∫ w(x)/(1+x²) dx`, the quadrature route for `I`; `b` is the
/// linear Herglotz coefficient.
pub fn i_quadrature(h: &Hamiltonian, opts: &LineQuadOptions) -> Result<LineIntegral> {
    let b = herglotz_coefficients(h)?.b;
    spectral_density(h, 0.0)?;
    let mut w = |x: f64| spectral_density(h, x).expect("tail checked");
    let (mut r, _, _) = poisson_line(&mut w, opts);
    r.value += b;
    Ok(r)
}

/// Quadrature-route record at `r` (diagonal input, positive-determinant tail).
pub fn k_value_quadrature(h: &Hamiltonian, r: f64, opts: &LineQuadOptions) -> Result<EntropyRecord> {
    let hr = h.shift(r)?;
    hr.validate().require_nontrivial()?;
    let i = i_quadrature(&hr, opts)?.value;
    let j = j_quadrature(|x| spectral_density(&hr, x).expect("tail checked"), opts).value();
    Ok(EntropyRecord { i, j, k: k_mu(i, j), route: EntropyRoute::Quadrature })
}

/// One line of an identity report.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub at: f64,
    pub residual: f64,
    pub threshold: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    fn push(&mut self, name: &str, at: f64, residual: f64, threshold: f64) {
        // A NaN residual must fail.
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.checks.push(IdentityCheck { name: String::from(name), at, residual, threshold });
    }
}

/// Thresholds used by [`identity_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteThresholds {
    pub exact: f64,
    pub derivative: f64,
    pub integral_equation: f64,
}

impl Default for SuiteThresholds {
    fn default() -> Self {
        SuiteThresholds { exact: 1e-8, derivative: 1e-6, integral_equation: 1e-6 }
    }
}

/// Bernstein–Szegő chain data at one cut `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainLink {
    pub r: f64,
    pub i_r: f64,
    pub k_r: f64,
    /// `K` at 0 of the truncation continued by `diag(1/I_r, I_r)`.
    pub k_truncated: f64,
}

/// `K_H(r)` and `K_{Ĥ_r}(0)` at every finite breakpoint.
pub fn bernstein_szego_chain(h: &DiagonalHamiltonian) -> Result<Vec<ChainLink>> {
    h.breakpoints()
        .iter()
        .map(|&r| {
            let rec = k_value(h, r)?;
            let truncated = h.bernstein_szego(r, rec.i)?;
            let kt = k_value(&truncated, 0.0)?.k;
            Ok(ChainLink { r, i_r: rec.i, k_r: rec.k, k_truncated: kt })
        })
        .collect()
}

fn j_fd(h: &Hamiltonian, r: f64, step: f64) -> Result<(f64, f64)> {
    let jp = j_exact_at(h, r + step)?;
    let jm = j_exact_at(h, r - step)?;
    let ip = i_value(h, r + step)?;
    let im = i_value(h, r - step)?;
    let dj = (jp - jm) / (2.0 * step);
    let dk = ((ln(ip) - jp) - (ln(im) - jm)) / (2.0 * step);
    Ok((dj, dk))
}

/// Right side of the integral equation
/// `e^{−J(r)/2 − ξ(r)} = ∫_r^∞ h1(s) e^{−J_d(s)/2 − ξ(s)} ds`
/// (`dual = false`), or its dual with `h2` and `J` (`dual = true`).
pub fn integral_equation_rhs(h: &DiagonalHamiltonian, r: f64, dual: bool) -> Result<f64> {
    let hd = h.dual();
    let (weight_of, other): (fn(&crate::hamiltonian::Piece) -> f64, &Hamiltonian) =
        if dual { (|p| p.h22, h) } else { (|p| p.h11, &hd) };
    let tk = h.tail_start();
    let mut total = 0.0;
    if r < tk {
        let mut pts: Vec<f64> = h.breakpoints().iter().copied().filter(|&b| b > r && b < tk).collect();
        pts.insert(0, r);
        pts.push(tk);
        let mut failure = None;
        let mut f = |s: f64| match j_exact_at(other, s) {
            Ok(j) => weight_of(&h.at(s)) * exp(-0.5 * j - h.xi(s)),
            Err(e) => {
                failure = Some(e);
                0.0
            }
        };
        let q = integrate_breaks(&mut f, &pts, QuadOptions { abs_tol: 1e-12, rel_tol: 0.0, max_panels: 1 << 14 });
        if let Some(e) = failure {
            return Err(e);
        }
        total += q.value;
    }
    let tail = h.tail();
    let start = r.max(tk);
    let j_tail = j_exact(&Hamiltonian::constant(if dual { tail } else { tail.dual() })?)?;
    total += weight_of(&tail) * exp(-0.5 * j_tail - h.xi(start)) / sqrt(tail.det());
    Ok(total)
}

/// Left side `e^{−J(r)/2 − ξ(r)}` (or the dual version).
pub fn integral_equation_lhs(h: &DiagonalHamiltonian, r: f64, dual: bool) -> Result<f64> {
    let j = if dual { j_exact_at(&h.dual(), r)? } else { j_exact_at(h, r)? };
    Ok(exp(-0.5 * j - h.xi(r)))
}

/// Evaluate the exact identities for a diagonal Hamiltonian with a
/// positive-determinant tail.
///
/// Checked at `r = 0`, every breakpoint and every piece midpoint:
/// `I·I_d = 1`, `K = K_d`, the shift formula for `J(r)`, the two integral
/// equations; at breakpoints additivity `K(0) = K_{Ĥ_r}(0) + K(r)` and
/// `K(r) ≤ K(0)`; at midpoints the derivative formulas
/// `J' = 2I h1 − 2ξ'` and `K' = −I h1 − h2/I + 2ξ'` by central differences,
/// together with second-order decay of their error under step halving.
pub fn identity_suite(h: &DiagonalHamiltonian, th: &SuiteThresholds) -> Result<IdentityReport> {
    if h.tail().det() <= 0.0 {
        return Err(Error::NoDetPositiveTail);
    }
    h.validate().require_nontrivial()?;
    let mut rep = IdentityReport::default();
    let hd = h.dual();
    let k0 = k_value(h, 0.0)?;
    let bps = h.breakpoints().to_vec();
    let mut points: Vec<(f64, bool)> = bps.iter().map(|&b| (b, true)).collect();
    for w in bps.windows(2) {
        points.push((0.5 * (w[0] + w[1]), false));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    for &(r, is_break) in &points {
        let rec = k_value(h, r)?;
        let recd = k_value(&hd, r)?;
        rep.push("I*I_dual = 1", r, (rec.i * recd.i - 1.0).abs(), th.exact);
        rep.push("K = K_dual", r, (rec.k - recd.k).abs(), th.exact);
        rep.push("K >= 0", r, (-rec.k).max(0.0), th.exact);

        let m = solve(h, r, I);
        let shifted = k0.j - 2.0 * h.xi(r) + 2.0 * ln((m.theta_plus + I * rec.i * m.theta_minus).norm());
        rep.push("J shift formula", r, (rec.j - shifted).abs(), th.exact);

        for dual in [false, true] {
            let lhs = integral_equation_lhs(h, r, dual)?;
            let rhs = integral_equation_rhs(h, r, dual)?;
            let name = if dual { "integral equation (h2, J)" } else { "integral equation (h1, J_dual)" };
            rep.push(name, r, (lhs - rhs).abs(), th.integral_equation);
        }

        if is_break {
            let truncated = h.bernstein_szego(r, rec.i)?;
            let kt = k_value(&truncated, 0.0)?.k;
            rep.push("K(0) = K_trunc(0) + K(r)", r, (k0.k - kt - rec.k).abs(), th.exact);
            rep.push("K(r) <= K(0)", r, (rec.k - k0.k).max(0.0), th.exact);
        } else {
            let k = bps.partition_point(|&b| b <= r);
            let len = bps[k] - bps[k - 1];
            let p = h.at(r);
            let dxi = sqrt(p.det());
            let dj_exact = 2.0 * rec.i * p.h11 - 2.0 * dxi;
            let dk_exact = -rec.i * p.h11 - p.h22 / rec.i + 2.0 * dxi;
            let step = 1e-4 * len;
            let (dj1, dk1) = j_fd(h, r, step)?;
            let (dj2, dk2) = j_fd(h, r, 0.5 * step)?;
            let (ej1, ej2) = ((dj1 - dj_exact).abs(), (dj2 - dj_exact).abs());
            let (ek1, ek2) = ((dk1 - dk_exact).abs(), (dk2 - dk_exact).abs());
            rep.push("J' = 2 I h1 - 2 xi'", r, ej2, th.derivative);
            rep.push("K' = -I h1 - h2/I + 2 xi'", r, ek2, th.derivative);
            rep.push("J' difference error is O(step^2)", r, second_order_defect(ej1, ej2), 0.0);
            rep.push("K' difference error is O(step^2)", r, second_order_defect(ek1, ek2), 0.0);
        }
    }
    Ok(rep)
}

/// Zero when halving the step cut the error by at least a factor 3, or when
/// both errors are at round-off level; otherwise the shortfall.
fn second_order_defect(coarse: f64, fine: f64) -> f64 {
    const ROUNDOFF: f64 = 1e-10;
    if fine <= ROUNDOFF || fine * 3.0 <= coarse {
        0.0
    } else {
        fine * 3.0 - coarse
    }
}

/// A short human-readable label for a residual, used by report writers.
pub fn describe(check: &IdentityCheck) -> String {
    format!("{} at r = {}", check.name, check.at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Piece;
    use crate::testutil::{assert_close, bump};
    use libm::{cosh, log, sinh};

    fn bump_i() -> f64 {
        (cosh(1.0) + 0.5 * sinh(1.0)) / (cosh(1.0) + 2.0 * sinh(1.0))
    }

    fn bump_j() -> f64 {
        2.0 - 2.0 * log(cosh(1.0) + 2.0 * sinh(1.0))
    }

    #[test]
    fn constant_values() {
        let h = Hamiltonian::constant(Piece::diag(2.0, 8.0)).unwrap();
        assert_eq!(i_value(&h, 0.0).unwrap(), 2.0);
        assert_close(j_exact(&h).unwrap(), log(2.0), 1e-15);
        let rec = k_value(&h, 3.0).unwrap();
        assert_eq!(rec.k, 0.0);
    }

    #[test]
    fn bump_values() {
        let b = bump();
        assert_close(i_value(&b, 0.0).unwrap(), bump_i(), 1e-15);
        assert_close(j_exact(&b).unwrap(), bump_j(), 1e-14);
        assert_close(bump_j(), -0.7186, 1e-4);
        let k = k_value(&b, 0.0).unwrap().k;
        assert_close(k, 0.1157, 1e-4);
        assert_close(k_value(&b, 1.0).unwrap().k, 0.0, 1e-15);
    }

    #[test]
    fn rank_one_tail_gives_infinite_entropy() {
        let h = Hamiltonian::from_lengths(&[(1.0, Piece::diag(1.0, 1.0))], Piece::diag(1.0, 0.0)).unwrap();
        let rec = k_value(&h, 0.0).unwrap();
        assert_eq!(rec.j, f64::NEG_INFINITY);
        assert_eq!(rec.k, f64::INFINITY);
        assert_eq!(k_mu(1.0, f64::NEG_INFINITY), f64::INFINITY);
    }

    #[test]
    fn trivial_shift_is_rejected() {
        let h = Hamiltonian::from_lengths(&[(1.0, Piece::diag(1.0, 1.0))], Piece::diag(0.0, 1.0)).unwrap();
        assert_eq!(i_value(&h, 1.0), Err(Error::Trivial));
        assert!(i_value(&h, 0.5).is_ok());
    }

    #[test]
    fn quadrature_constant_and_bump() {
        let opts = LineQuadOptions::default();
        let one = j_quadrature(|_| 1.0, &opts);
        assert_eq!(one.value(), 0.0);
        let two = j_quadrature(|_| 2.0, &opts);
        assert_close(two.value(), log(2.0), 1e-9);
        let b = bump();
        let q = j_quadrature(|x| spectral_density(&b, x).unwrap(), &opts);
        assert!(q.integral.converged && q.even && !q.clipped);
        assert_close(q.value(), bump_j(), 1e-6);
        let iq = i_quadrature(&b, &opts).unwrap();
        assert_close(iq.value, bump_i(), 1e-6);
    }

    #[test]
    fn quadrature_flags_odd_and_divergent_densities() {
        let opts = LineQuadOptions { max_cutoff: 4096.0, ..LineQuadOptions::default() };
        let odd = j_quadrature(|x| if x > 0.0 { 2.0 } else { 1.0 }, &opts);
        assert!(!odd.even);
        let divergent = j_quadrature(|x| libm::exp(-x.abs()), &opts);
        assert_eq!(divergent.value(), f64::NEG_INFINITY);
        let zero = j_quadrature(|_| 0.0, &opts);
        assert!(zero.clipped);
    }

    #[test]
    fn bump_identity_suite() {
        let rep = identity_suite(&bump(), &SuiteThresholds::default()).unwrap();
        for c in &rep.checks {
            assert!(c.passed(), "{} residual {}", describe(c), c.residual);
        }
        let chain = bernstein_szego_chain(&bump()).unwrap();
        let k0 = chain[0].k_r;
        for link in &chain {
            assert!((k0 - link.k_truncated - link.k_r).abs() < 1e-8);
        }
    }

    #[test]
    fn integral_equation_on_constant() {
        let h = DiagonalHamiltonian::constant(2.0, 8.0).unwrap();
        for &r in &[0.0, 0.5, 2.0] {
            for dual in [false, true] {
                let l = integral_equation_lhs(&h, r, dual).unwrap();
                let rr = integral_equation_rhs(&h, r, dual).unwrap();
                assert!((l - rr).abs() < 1e-12);
            }
        }
    }
}
