//! Fixed-scale `A₂`-type characteristics of piecewise-constant weights.
//!
//! Interval averages are computed by splitting at breakpoints, never by
//! sampling. Quantities of the form `⟨h⟩⟨1/h⟩ − 1` are evaluated as
//! `Σ_{i<j} w_i w_j (h_i − h_j)² / (h_i h_j)`, which is nonnegative term by
//! term.

use alloc::vec;
use alloc::vec::Vec;

use crate::entropy::k_value;
use crate::hamiltonian::{DiagonalHamiltonian, Hamiltonian, Piece};
use crate::math::{exp, expm1, ln};
use crate::{Error, Result};

/// A positive piecewise-constant function on `ℝ₊` with a constant tail.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    tail: f64,
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl WeightFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, tail: f64) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Breakpoints("must start at 0 and increase strictly"));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Breakpoints("must be finite"));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::PieceCount { breakpoints: breakpoints.len(), pieces: values.len() });
        }
        if let Some(k) = values.iter().position(|&v| !positive(v)) {
            return Err(Error::NotPositiveSemidefinite { piece: Some(k) });
        }
        if !positive(tail) {
            return Err(Error::NotPositiveSemidefinite { piece: None });
        }
        Ok(WeightFunction { breakpoints, values, tail })
    }

    pub fn constant(v: f64) -> Result<Self> {
        Self::new(vec![0.0], Vec::new(), v)
    }

    /// From consecutive `(length, value)` pairs.
    pub fn from_lengths(parts: &[(f64, f64)], tail: f64) -> Result<Self> {
        let mut bps = vec![0.0];
        let mut t = 0.0;
        for &(len, _) in parts {
            t += len;
            bps.push(t);
        }
        Self::new(bps, parts.iter().map(|p| p.1).collect(), tail)
    }

    /// `h = h1` of a diagonal Hamiltonian with `h1·h2 = 1`.
    pub fn from_det_one(h: &DiagonalHamiltonian) -> Result<Self> {
        let check = |p: &Piece| {
            if (p.h11 * p.h22 - 1.0).abs() > 1e-12 {
                Err(Error::BadParameter("weight extraction needs h1*h2 = 1 on every piece"))
            } else {
                Ok(p.h11)
            }
        };
        let values = h.pieces().iter().map(check).collect::<Result<Vec<_>>>()?;
        let tail = check(&h.tail())?;
        Self::new(h.breakpoints().to_vec(), values, tail)
    }

    /// `diag(h, 1/h)`.
    pub fn to_hamiltonian(&self) -> DiagonalHamiltonian {
        let pieces = self.values.iter().map(|&v| Piece::diag(v, 1.0 / v)).collect();
        let h = Hamiltonian::new(self.breakpoints.clone(), pieces, Piece::diag(self.tail, 1.0 / self.tail))
            .expect("positive weights give valid pieces");
        DiagonalHamiltonian::try_from(h).expect("diagonal by construction")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn tail_start(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        if k == 0 {
            self.values.first().copied().unwrap_or(self.tail)
        } else {
            self.values.get(k - 1).copied().unwrap_or(self.tail)
        }
    }

    /// `(length, value)` of the constant stretches covering `[a, b)`.
    pub fn stretches(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let n = self.values.len();
        for k in 0..=n {
            let lo = self.breakpoints[k];
            let hi = if k < n { self.breakpoints[k + 1] } else { f64::INFINITY };
            let (l, r) = (lo.max(a), hi.min(b));
            if r > l {
                out.push((r - l, if k < n { self.values[k] } else { self.tail }));
            }
            if hi >= b {
                break;
            }
        }
        out
    }

    /// `⟨h⟩_{[a,b)}`.
    pub fn average(&self, a: f64, b: f64) -> f64 {
        self.stretches(a, b).iter().map(|(l, v)| l * v).sum::<f64>() / (b - a)
    }

    /// `⟨1/h⟩_{[a,b)}`.
    pub fn average_inverse(&self, a: f64, b: f64) -> f64 {
        self.stretches(a, b).iter().map(|(l, v)| l / v).sum::<f64>() / (b - a)
    }

    /// `⟨h⟩⟨1/h⟩ − 1` over `[a, b)`, in nonnegative form.
    pub fn a2_defect(&self, a: f64, b: f64) -> f64 {
        let s = self.stretches(a, b);
        let total = b - a;
        let mut acc = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                let (wi, hi) = (s[i].0 / total, s[i].1);
                let (wj, hj) = (s[j].0 / total, s[j].1);
                let d = hi - hj;
                acc += wi * wj * d * d / (hi * hj);
            }
        }
        acc
    }

    /// `∫_r^∞ h(s) e^{r−s} ds` and `∫_r^∞ h(s)⁻¹ e^{r−s} ds`.
    pub fn exponential_tails(&self, r: f64) -> (f64, f64) {
        let (mut c, mut d) = (self.tail, 1.0 / self.tail);
        let n = self.values.len();
        for k in (0..n).rev() {
            let (lo, hi) = (self.breakpoints[k], self.breakpoints[k + 1]);
            if hi <= r {
                break;
            }
            let len = hi - lo.max(r);
            let v = self.values[k];
            let decay = exp(-len);
            let mass = -expm1(-len);
            c = v * mass + decay * c;
            d = mass / v + decay * d;
        }
        (c, d)
    }

    /// `κ(r) = C(r)/h(r)` and `κ_d(r) = h(r) D(r)`.
    pub fn kappas(&self, r: f64) -> (f64, f64) {
        let (c, d) = self.exponential_tails(r);
        let h = self.at(r);
        (c / h, h * d)
    }
}

/// `Σ_n (⟨h⟩⟨1/h⟩ − 1)` over `[n, n + α_n)`, stopping once `h` is constant on
/// every remaining interval.
pub fn bracket<A: Fn(usize) -> f64>(h: &WeightFunction, alpha: A) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    while (n as f64) < h.tail_start() {
        let a = alpha(n);
        if !positive(a) {
            return Err(Error::BadParameter("alpha_n must be positive"));
        }
        total += h.a2_defect(n as f64, n as f64 + a);
        n += 1;
    }
    Ok(total)
}

/// `[h]_{2,ℓ¹}`: the bracket with `α ≡ 2`.
pub fn a2l1(h: &WeightFunction) -> f64 {
    bracket(h, |_| 2.0).expect("constant alpha is positive")
}

/// `∫_0^∞ (κ + κ_d − 2)` in closed form.
///
/// On a piece `[a, b)` with value `v` the integrand is
/// `e^{−(b−r)}(C(b)/v + v D(b) − 2)`, which integrates to
/// `(1 − e^{−(b−a)})(C(b)/v + v D(b) − 2)`. The bracket is a kernel average
/// `Σ p_i (h_i − v)² / (h_i v)` over the later stretches, summed in that
/// form so each term is nonnegative. The tail contributes nothing.
pub fn int_characteristic(h: &WeightFunction) -> f64 {
    let n = h.values.len();
    let mut total = 0.0;
    for k in 0..n {
        let b = h.breakpoints[k + 1];
        let v = h.values[k];
        let mut bracket = 0.0;
        for i in k + 1..=n {
            let (lo, hv) = (h.breakpoints[i], if i < n { h.values[i] } else { h.tail });
            let weight = if i < n { -expm1(-(h.breakpoints[i + 1] - lo)) } else { 1.0 };
            let d = hv - v;
            bracket += exp(-(lo - b)) * weight * d * d / (hv * v);
        }
        total += -expm1(-(b - h.breakpoints[k])) * bracket;
    }
    total
}

/// `Q_n`, `f_n`, `v_n`, the renormalized weight and the unit-interval identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequences {
    /// `⟨h⟩⟨1/h⟩ − 1` over `[n, n+2)`.
    pub q: Vec<f64>,
    /// `⟨h⟩` over `[n, n+1)`.
    pub f: Vec<f64>,
    /// `log(f_n / f_{n−1})`, with `v_0 = 0`.
    pub v: Vec<f64>,
    /// `h / f_n` on `[n, n+1)`.
    pub renormalized: WeightFunction,
    /// `Σ_n ‖h̃ + 1/h̃ − 2‖_{L¹[n,n+1)}`.
    pub l1_sum: f64,
    /// `Σ_n (⟨h⟩⟨1/h⟩ − 1)` over `[n, n+1)`.
    pub defect_sum: f64,
    /// `|l1_sum − defect_sum|`.
    pub residual: f64,
    /// `|l1_sum − 2·defect_sum|`, the discrepancy of the doubled form.
    pub doubled_discrepancy: f64,
}

pub fn sequences_and_identity(h: &WeightFunction) -> Sequences {
    let n_max = libm::ceil(h.tail_start()) as usize;
    let mut q = Vec::with_capacity(n_max + 1);
    let mut f = Vec::with_capacity(n_max + 1);
    let mut v = Vec::with_capacity(n_max + 1);
    let mut bps = vec![0.0];
    let mut vals = Vec::new();
    let (mut l1_sum, mut defect_sum) = (0.0, 0.0);
    for n in 0..=n_max {
        let (a, b) = (n as f64, n as f64 + 1.0);
        q.push(h.a2_defect(a, a + 2.0));
        let fn_ = h.average(a, b);
        v.push(if n == 0 { 0.0 } else { ln(fn_ / f[n - 1]) });
        f.push(fn_);
        defect_sum += h.a2_defect(a, b);
        let mut x = a;
        for (len, val) in h.stretches(a, b) {
            let r = val / fn_;
            l1_sum += len * (r - 1.0) * (r - 1.0) / r;
            if n < n_max {
                x += len;
                bps.push(x);
                vals.push(r);
            }
        }
    }
    // Past n_max the weight is the constant tail, so h̃ ≡ 1 there.
    let (bps, vals) = merge_equal(bps, vals, 1.0);
    let renormalized = WeightFunction::new(bps, vals, 1.0).expect("positive ratios");
    Sequences {
        q,
        f,
        v,
        renormalized,
        l1_sum,
        defect_sum,
        residual: (l1_sum - defect_sum).abs(),
        doubled_discrepancy: (l1_sum - 2.0 * defect_sum).abs(),
    }
}

fn merge_equal(bps: Vec<f64>, vals: Vec<f64>, tail: f64) -> (Vec<f64>, Vec<f64>) {
    let mut ob = vec![0.0];
    let mut ov: Vec<f64> = Vec::new();
    for (k, v) in vals.iter().enumerate() {
        if ov.last() == Some(v) {
            *ob.last_mut().unwrap() = bps[k + 1];
        } else {
            ov.push(*v);
            ob.push(bps[k + 1]);
        }
    }
    while ov.last() == Some(&tail) {
        ov.pop();
        ob.pop();
    }
    (ob, ov)
}

/// Minimizing lengths `t_n ∈ [3, 4]` and the resulting inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct P1Witness {
    pub t: Vec<f64>,
    /// `⟨h⟩⟨1/h⟩` over `[4n, 4n + t_n)`.
    pub a: Vec<f64>,
    pub sum: f64,
    /// `K_H(0)` of `H = diag(h, 1/h)`.
    pub k: f64,
    /// `e^{10K} − 1`.
    pub bound: f64,
}

impl P1Witness {
    pub fn holds(&self) -> bool {
        self.sum <= self.bound
    }

    pub fn slack(&self) -> f64 {
        self.bound - self.sum
    }
}

/// For each `n` with `4n` before the tail, minimize `⟨h⟩⟨1/h⟩` over
/// `[4n, 4n + t]` on the grid `t = 3 + j/(grid − 1)`.
pub fn p1_witness(h: &WeightFunction, grid: usize) -> Result<P1Witness> {
    if grid < 2 {
        return Err(Error::BadParameter("grid needs at least two points"));
    }
    let k = k_value(&h.to_hamiltonian(), 0.0)?.k;
    let mut t = Vec::new();
    let mut a = Vec::new();
    let mut sum = 0.0;
    let mut n = 0usize;
    while 4.0 * (n as f64) < h.tail_start() {
        let start = 4.0 * n as f64;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for j in 0..grid {
            let len = 3.0 + j as f64 / (grid - 1) as f64;
            let defect = h.a2_defect(start, start + len);
            if defect < best.0 {
                best = (defect, len, 1.0 + defect);
            }
        }
        t.push(best.1);
        a.push(best.2);
        sum += best.0;
        n += 1;
    }
    Ok(P1Witness { t, a, sum, k, bound: expm1(10.0 * k) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_breaks, QuadOptions};
    use crate::testutil::assert_close;
    use proptest::prelude::*;

    fn step() -> WeightFunction {
        WeightFunction::from_lengths(&[(1.0, 2.0)], 1.0).unwrap()
    }

    #[test]
    fn bracket_examples() {
        let c = WeightFunction::constant(3.0).unwrap();
        assert_eq!(a2l1(&c), 0.0);
        assert_eq!(int_characteristic(&c), 0.0);
        let h = step();
        assert_eq!(h.average(0.0, 2.0), 1.5);
        assert_eq!(h.average_inverse(0.0, 2.0), 0.75);
        assert_eq!(a2l1(&h), 0.125);
        assert!(bracket(&h, |_| 0.0).is_err());
    }

    #[test]
    fn szego_characteristic_is_four_times_a2l1_on_det_one() {
        // With η_n = n each term is ∫h·∫h⁻¹ − 4 = 4(⟨h⟩⟨h⁻¹⟩ − 1) over [n, n+2).
        let h = WeightFunction::from_lengths(&[(1.0, 2.0), (1.0, 0.5), (2.0, 4.0)], 1.0).unwrap();
        let kt = h.to_hamiltonian().szego_characteristic().unwrap().total;
        assert!((kt - 4.0 * a2l1(&h)).abs() < 1e-14);
    }

    #[test]
    fn int_characteristic_closed_form_and_oracle() {
        let h = step();
        let exact = 0.5 * (1.0 - libm::exp(-1.0));
        assert_close(int_characteristic(&h), exact, 1e-15);
        let mut f = |r: f64| {
            let (k, kd) = h.kappas(r);
            k + kd - 2.0
        };
        let q = integrate_breaks(&mut f, &[0.0, 1.0, 40.0], QuadOptions { abs_tol: 1e-13, ..Default::default() });
        assert_close(q.value, exact, 1e-8);
    }

    #[test]
    fn sequences_examples() {
        let s = sequences_and_identity(&step());
        assert_eq!(s.q[0], 0.125);
        assert_eq!(s.f[0], 2.0);
        assert_eq!(s.f[1], 1.0);
        assert_close(s.v[1], -libm::log(2.0), 1e-15);
        assert_eq!(s.residual, 0.0);
        let c = sequences_and_identity(&WeightFunction::constant(5.0).unwrap());
        assert_eq!(c.q, vec![0.0]);
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.renormalized, WeightFunction::constant(1.0).unwrap());
    }

    #[test]
    fn renormalized_has_unit_means() {
        let h = WeightFunction::from_lengths(&[(0.5, 2.0), (1.25, 0.25), (0.75, 3.0)], 0.5).unwrap();
        let s = sequences_and_identity(&h);
        for n in 0..3 {
            assert_close(s.renormalized.average(n as f64, n as f64 + 1.0), 1.0, 1e-15);
        }
    }

    #[test]
    fn p1_examples() {
        let c = p1_witness(&WeightFunction::constant(2.0).unwrap(), 64).unwrap();
        assert_eq!((c.sum, c.bound), (0.0, 0.0));
        assert!(c.holds());
        let b = p1_witness(&step(), 64).unwrap();
        assert!(b.holds());
        assert!(b.t.iter().all(|&t| (3.0..=4.0).contains(&t)));
        let fine = p1_witness(&step(), 127).unwrap();
        assert!((fine.sum - b.sum).abs() < 1e-6);
    }

    fn weight_strategy() -> impl Strategy<Value = WeightFunction> {
        prop::collection::vec((0.1f64..2.5, 0.05f64..20.0), 1..6)
            .prop_flat_map(|parts| (Just(parts), 0.05f64..20.0))
            .prop_map(|(parts, tail)| WeightFunction::from_lengths(&parts, tail).unwrap())
    }

    proptest! {
        #[test]
        fn defects_are_nonnegative(h in weight_strategy(), a in 0.0f64..8.0, len in 0.1f64..4.0) {
            prop_assert!(h.a2_defect(a, a + len) >= 0.0);
            prop_assert!(int_characteristic(&h) >= 0.0);
        }

        #[test]
        fn unit_interval_identity(h in weight_strategy()) {
            let s = sequences_and_identity(&h);
            prop_assert!(s.residual < 1e-10 * s.l1_sum.max(1.0));
        }

        #[test]
        fn kappa_sum_at_least_two(h in weight_strategy(), r in 0.0f64..12.0) {
            let (k, kd) = h.kappas(r);
            prop_assert!(k + kd >= 2.0 - 1e-12);
        }

        #[test]
        fn bracket_matches_direct_averages(h in weight_strategy()) {
            let mut direct = 0.0;
            let mut n = 0.0;
            while n < h.tail_start() {
                direct += h.average(n, n + 2.0) * h.average_inverse(n, n + 2.0) - 1.0;
                n += 1.0;
            }
            prop_assert!((direct - a2l1(&h)).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }
}
