//! Piecewise-constant Hamiltonians on `ℝ₊` with a constant infinite tail.
//!
//! A [`Hamiltonian`] is given by breakpoints `0 = t_0 < t_1 < ... < t_K`,
//! one symmetric 2×2 matrix per interval `[t_k, t_{k+1})`, and a tail matrix
//! on `[t_K, ∞)`. Structural operations (duality, shifting, truncation, time
//! changes) act on this data exactly: cuts at non-breakpoints split the
//! containing piece, nothing is ever interpolated.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::math::{atan2, sqrt};
use crate::{Error, Result};

/// A real symmetric 2×2 matrix `[[h11, h12], [h12, h22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

impl Piece {
    pub const fn new(h11: f64, h12: f64, h22: f64) -> Self {
        Piece { h11, h12, h22 }
    }

    pub const fn diag(h1: f64, h2: f64) -> Self {
        Piece { h11: h1, h12: 0.0, h22: h2 }
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12 * self.h12
    }

    pub fn trace(&self) -> f64 {
        self.h11 + self.h22
    }

    pub fn is_finite(&self) -> bool {
        self.h11.is_finite() && self.h12.is_finite() && self.h22.is_finite()
    }

    pub fn is_psd(&self) -> bool {
        self.h11 >= 0.0 && self.h22 >= 0.0 && self.det() >= 0.0
    }

    pub fn is_diagonal(&self) -> bool {
        self.h12 == 0.0
    }

    /// Rank one, decided by an exact determinant test.
    pub fn is_rank_one(&self) -> bool {
        self.h11 * self.h22 == self.h12 * self.h12 && self.trace() > 0.0
    }

    /// `J* H J`: `[[h22, -h12], [-h12, h11]]`.
    pub fn dual(&self) -> Self {
        Piece { h11: self.h22, h12: -self.h12, h22: self.h11 }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Piece { h11: c * self.h11, h12: c * self.h12, h22: c * self.h22 }
    }

    /// `self = c·other` for some `c > 0`, decided by exact cross products.
    pub fn proportional_to(&self, other: &Piece) -> bool {
        let (a, b) = (self, other);
        a.h11 * b.h12 == a.h12 * b.h11
            && a.h11 * b.h22 == a.h22 * b.h11
            && a.h12 * b.h22 == a.h22 * b.h12
            && (a.trace() > 0.0) == (b.trace() > 0.0)
    }

    /// The angle `φ ∈ [0, π)` with `H = h·e_φ e_φᵀ`, for rank-one pieces.
    pub fn direction(&self) -> Option<f64> {
        if !self.is_rank_one() {
            return None;
        }
        if self.h11 == 0.0 {
            return Some(core::f64::consts::FRAC_PI_2);
        }
        let phi = atan2(self.h12, self.h11);
        Some(if phi < 0.0 { phi + core::f64::consts::PI } else { phi })
    }
}

/// One constant stretch of a Hamiltonian; `end` is `∞` for the tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub piece: Piece,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// A maximal open interval on which `H = h(x)·e_φ e_φᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndivisibleInterval {
    pub start: f64,
    /// `∞` when the interval runs into the tail.
    pub end: f64,
    pub angle: f64,
    /// `(start, end, h)` for each constant stretch of the scalar profile.
    pub profile: Vec<(f64, f64, f64)>,
}

/// Structural flags produced by [`Hamiltonian::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub singular: bool,
    pub nontrivial: bool,
    pub diagonal: bool,
    pub indivisible: Vec<IndivisibleInterval>,
}

impl Diagnostics {
    pub fn require_nontrivial(&self) -> Result<()> {
        if self.nontrivial {
            Ok(())
        } else {
            Err(Error::Trivial)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
    tail: Piece,
}

fn check_piece(p: &Piece, idx: Option<usize>) -> Result<()> {
    if !p.is_finite() {
        return Err(Error::NonFinite { piece: idx });
    }
    if !p.is_psd() {
        return Err(Error::NotPositiveSemidefinite { piece: idx });
    }
    if p.trace() <= 0.0 {
        return Err(Error::ZeroTrace { piece: idx });
    }
    Ok(())
}

impl Hamiltonian {
    /// `breakpoints` must start at 0 and increase strictly; there is one piece
    /// per gap between consecutive breakpoints.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Piece>, tail: Piece) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) {
            return Err(Error::Breakpoints("must start at 0"));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Breakpoints("must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Breakpoints("must be strictly increasing"));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::PieceCount { breakpoints: breakpoints.len(), pieces: pieces.len() });
        }
        for (k, p) in pieces.iter().enumerate() {
            check_piece(p, Some(k))?;
        }
        check_piece(&tail, None)?;
        Ok(Hamiltonian { breakpoints, pieces, tail })
    }

    pub fn constant(tail: Piece) -> Result<Self> {
        Self::new(vec![0.0], Vec::new(), tail)
    }

    /// Build from consecutive `(length, piece)` pairs followed by the tail.
    pub fn from_lengths(parts: &[(f64, Piece)], tail: Piece) -> Result<Self> {
        let mut breakpoints = Vec::with_capacity(parts.len() + 1);
        breakpoints.push(0.0);
        let mut t = 0.0;
        for &(len, _) in parts {
            t += len;
            breakpoints.push(t);
        }
        Self::new(breakpoints, parts.iter().map(|p| p.1).collect(), tail)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tail(&self) -> Piece {
        self.tail
    }

    /// Start of the constant tail (the last finite breakpoint).
    pub fn tail_start(&self) -> f64 {
        *self.breakpoints.last().expect("breakpoints are never empty")
    }

    /// Finite pieces followed by the tail segment.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let finite = self.pieces.iter().enumerate().map(move |(k, &piece)| Segment {
            start: self.breakpoints[k],
            end: self.breakpoints[k + 1],
            piece,
        });
        finite.chain(core::iter::once(Segment { start: self.tail_start(), end: f64::INFINITY, piece: self.tail }))
    }

    /// The (right-continuous) value at `t`.
    pub fn at(&self, t: f64) -> Piece {
        // Index of the last breakpoint <= t.
        let k = self.breakpoints.partition_point(|&b| b <= t);
        if k == 0 || k > self.pieces.len() {
            // t < 0 is treated like t = 0.
            if k == 0 && !self.pieces.is_empty() {
                return self.pieces[0];
            }
            return self.tail;
        }
        self.pieces[k - 1]
    }

    /// Entrywise `∫_a^b H` for finite `0 ≤ a ≤ b`.
    pub fn integral(&self, a: f64, b: f64) -> Piece {
        let mut acc = Piece::new(0.0, 0.0, 0.0);
        for seg in self.segments() {
            let lo = seg.start.max(a);
            let hi = seg.end.min(b);
            if hi > lo {
                let len = hi - lo;
                acc.h11 += len * seg.piece.h11;
                acc.h12 += len * seg.piece.h12;
                acc.h22 += len * seg.piece.h22;
            }
            if seg.end >= b {
                break;
            }
        }
        acc
    }

    /// `ξ(t) = ∫_0^t √det H`.
    pub fn xi(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for seg in self.segments() {
            let hi = seg.end.min(t);
            if hi > seg.start {
                acc += (hi - seg.start) * sqrt(seg.piece.det());
            }
            if seg.end >= t {
                break;
            }
        }
        acc
    }

    /// `min{t ≥ 0 : ξ(t) = level}`; needs `det(tail) > 0`.
    pub fn eta(&self, level: f64) -> Result<f64> {
        if !(level >= 0.0) {
            return Err(Error::BadParameter("eta level must be nonnegative"));
        }
        if self.tail.det() <= 0.0 {
            return Err(Error::DetIntegrable);
        }
        if level == 0.0 {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        for seg in self.segments() {
            let slope = sqrt(seg.piece.det());
            if slope > 0.0 {
                let reach = acc + slope * seg.length();
                if reach >= level {
                    let t = seg.start + (level - acc) / slope;
                    return Ok(t.min(seg.end));
                }
                acc = reach;
            }
        }
        unreachable!("tail has positive slope")
    }

    /// `η_0, ..., η_{n_max}`.
    pub fn eta_grid(&self, n_max: usize) -> Result<Vec<f64>> {
        (0..=n_max).map(|n| self.eta(n as f64)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.tail.is_diagonal() && self.pieces.iter().all(Piece::is_diagonal)
    }

    /// Not a.e. a positive multiple of `diag(1,0)`, nor of `diag(0,1)`.
    pub fn is_nontrivial(&self) -> bool {
        let all_like =
            |proj: Piece| self.tail.proportional_to(&proj) && self.pieces.iter().all(|p| p.proportional_to(&proj));
        !all_like(Piece::diag(1.0, 0.0)) && !all_like(Piece::diag(0.0, 1.0))
    }

    pub fn validate(&self) -> Diagnostics {
        let mut indivisible: Vec<IndivisibleInterval> = Vec::new();
        let mut prev: Option<Piece> = None;
        for seg in self.segments() {
            let p = seg.piece;
            if let Some(angle) = p.direction() {
                let extends = prev.is_some_and(|q| q.proportional_to(&p));
                match indivisible.last_mut() {
                    Some(iv) if extends && iv.end == seg.start => {
                        iv.end = seg.end;
                        iv.profile.push((seg.start, seg.end, p.trace()));
                    }
                    _ => indivisible.push(IndivisibleInterval {
                        start: seg.start,
                        end: seg.end,
                        angle,
                        profile: vec![(seg.start, seg.end, p.trace())],
                    }),
                }
            }
            prev = Some(p);
        }
        Diagnostics {
            singular: self.tail.trace() > 0.0,
            nontrivial: self.is_nontrivial(),
            diagonal: self.is_diagonal(),
            indivisible,
        }
    }

    pub fn dual(&self) -> Self {
        Hamiltonian {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(Piece::dual).collect(),
            tail: self.tail.dual(),
        }
    }

    /// Same function with a breakpoint inserted at `r` (no-op if present).
    /// Cutting inside the tail materializes a finite piece `[t_K, r)`.
    pub fn split_at(&self, r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::BadPosition(r));
        }
        if r == 0.0 || self.breakpoints.contains(&r) {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        if r > self.tail_start() {
            out.breakpoints.push(r);
            out.pieces.push(self.tail);
        } else {
            let k = self.breakpoints.partition_point(|&b| b < r);
            out.breakpoints.insert(k, r);
            out.pieces.insert(k, self.pieces[k - 1]);
        }
        Ok(out)
    }

    /// `x ↦ H(x + r)`.
    pub fn shift(&self, r: f64) -> Result<Self> {
        let split = self.split_at(r)?;
        let k = split.breakpoints.partition_point(|&b| b < r);
        let breakpoints: Vec<f64> = split.breakpoints[k..].iter().map(|b| b - r).collect();
        let pieces = split.pieces[k..].to_vec();
        Ok(Hamiltonian { breakpoints, pieces, tail: self.tail })
    }

    /// `H` on `[0, r)` continued by the constant `tail` on `[r, ∞)`.
    pub fn truncate_with_tail(&self, r: f64, tail: Piece) -> Result<Self> {
        check_piece(&tail, None)?;
        let split = self.split_at(r)?;
        let k = split.breakpoints.partition_point(|&b| b <= r);
        Ok(Hamiltonian { breakpoints: split.breakpoints[..k].to_vec(), pieces: split.pieces[..k - 1].to_vec(), tail })
    }

    /// Merge equal neighbours and absorb trailing pieces equal to the tail.
    pub fn canonical(&self) -> Self {
        let mut breakpoints = vec![0.0];
        let mut pieces: Vec<Piece> = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            if pieces.last() == Some(p) {
                *breakpoints.last_mut().unwrap() = self.breakpoints[k + 1];
            } else {
                pieces.push(*p);
                breakpoints.push(self.breakpoints[k + 1]);
            }
        }
        while pieces.last() == Some(&self.tail) {
            pieces.pop();
            breakpoints.pop();
        }
        Hamiltonian { breakpoints, pieces, tail: self.tail }
    }

    /// Time change to unit trace: piece `k` gets length `ℓ_k·tr H_k` and value `H_k / tr H_k`.
    pub fn unit_trace_reparametrize(&self) -> Self {
        let mut parts = Vec::with_capacity(self.pieces.len());
        for seg in self.segments().take(self.pieces.len()) {
            let tr = seg.piece.trace();
            parts.push((seg.length() * tr, seg.piece.scaled(1.0 / tr)));
        }
        let tail = self.tail.scaled(1.0 / self.tail.trace());
        Hamiltonian::from_lengths(&parts, tail).expect("time change preserves validity")
    }

    /// Perturb by `eps·Id` on `[0, t_K)` and change time so that `det ≡ 1`.
    ///
    /// Piece `k` of `H_ε = H + ε·χ_{[0,t_K)}·Id` becomes a piece of length
    /// `ℓ_k √det` with value `H_ε,k / √det`. `eps` may be zero only when every
    /// piece already has positive determinant.
    pub fn det_one_reparametrize(&self, eps: f64) -> Result<(Self, TimeChange)> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::BadParameter("eps must be finite and nonnegative"));
        }
        if self.tail.det() <= 0.0 {
            return Err(Error::DetIntegrable);
        }
        let mut parts = Vec::with_capacity(self.pieces.len());
        let mut slopes = Vec::with_capacity(self.pieces.len());
        for seg in self.segments().take(self.pieces.len()) {
            let p = seg.piece;
            let pe = Piece::new(p.h11 + eps, p.h12, p.h22 + eps);
            let d = pe.det();
            if d <= 0.0 {
                return Err(Error::BadParameter("eps must be positive when det H vanishes on a piece"));
            }
            let root = sqrt(d);
            parts.push((seg.length() * root, pe.scaled(1.0 / root)));
            slopes.push(1.0 / root);
        }
        let root_tail = sqrt(self.tail.det());
        let out = Hamiltonian::from_lengths(&parts, self.tail.scaled(1.0 / root_tail))?;
        let change = TimeChange {
            old_breakpoints: self.breakpoints.clone(),
            new_breakpoints: out.breakpoints.clone(),
            slopes,
            tail_slope: 1.0 / root_tail,
        };
        Ok((out, change))
    }
}

/// Piecewise-linear time change `η` from a reparametrization: old time as a
/// function of new time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    pub old_breakpoints: Vec<f64>,
    pub new_breakpoints: Vec<f64>,
    /// `η'` on each finite piece.
    pub slopes: Vec<f64>,
    pub tail_slope: f64,
}

impl TimeChange {
    /// Old time `η(s)` for new time `s`.
    pub fn eta(&self, s: f64) -> f64 {
        let k = self.new_breakpoints.partition_point(|&b| b <= s);
        let k = k.max(1) - 1;
        let slope = self.slopes.get(k).copied().unwrap_or(self.tail_slope);
        self.old_breakpoints[k] + slope * (s - self.new_breakpoints[k])
    }
}

/// A Hamiltonian with `h12 ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian(Hamiltonian);

impl TryFrom<Hamiltonian> for DiagonalHamiltonian {
    type Error = Error;

    fn try_from(h: Hamiltonian) -> Result<Self> {
        if let Some(k) = h.pieces.iter().position(|p| !p.is_diagonal()) {
            return Err(Error::NotDiagonal { piece: Some(k) });
        }
        if !h.tail.is_diagonal() {
            return Err(Error::NotDiagonal { piece: None });
        }
        Ok(DiagonalHamiltonian(h))
    }
}

impl Deref for DiagonalHamiltonian {
    type Target = Hamiltonian;

    fn deref(&self) -> &Hamiltonian {
        &self.0
    }
}

impl DiagonalHamiltonian {
    /// From consecutive `(length, h1, h2)` triples and the tail `(h1, h2)`.
    pub fn from_lengths(parts: &[(f64, f64, f64)], tail: (f64, f64)) -> Result<Self> {
        let parts: Vec<(f64, Piece)> = parts.iter().map(|&(l, a, b)| (l, Piece::diag(a, b))).collect();
        Ok(DiagonalHamiltonian(Hamiltonian::from_lengths(&parts, Piece::diag(tail.0, tail.1))?))
    }

    pub fn constant(h1: f64, h2: f64) -> Result<Self> {
        Ok(DiagonalHamiltonian(Hamiltonian::constant(Piece::diag(h1, h2))?))
    }

    pub fn as_hamiltonian(&self) -> &Hamiltonian {
        &self.0
    }

    pub fn into_inner(self) -> Hamiltonian {
        self.0
    }

    pub fn h1(&self, t: f64) -> f64 {
        self.0.at(t).h11
    }

    pub fn h2(&self, t: f64) -> f64 {
        self.0.at(t).h22
    }

    /// `diag(h2, h1)`.
    pub fn dual(&self) -> Self {
        DiagonalHamiltonian(self.0.dual())
    }

    pub fn shift(&self, r: f64) -> Result<Self> {
        Ok(DiagonalHamiltonian(self.0.shift(r)?))
    }

    pub fn canonical(&self) -> Self {
        DiagonalHamiltonian(self.0.canonical())
    }

    /// `H` on `[0, r)` followed by the constant `diag(1/I_r, I_r)`.
    ///
    /// `i_r` is `I_H(r) = Im m_r(i)`, supplied by the caller (see
    /// [`crate::entropy::i_value`]).
    pub fn bernstein_szego(&self, r: f64, i_r: f64) -> Result<Self> {
        if !(i_r > 0.0) || !i_r.is_finite() {
            return Err(Error::Trivial);
        }
        Ok(DiagonalHamiltonian(self.0.truncate_with_tail(r, Piece::diag(1.0 / i_r, i_r))?))
    }

    /// The discrete Szegő characteristic
    /// `K̃(H) = Σ_n (∫_{η_n}^{η_{n+2}} h1 · ∫_{η_n}^{η_{n+2}} h2 − 4)`.
    ///
    /// Only indices with `η_n` before the tail are summed: past that point
    /// every term vanishes identically.
    pub fn szego_characteristic(&self) -> Result<SzegoCharacteristic> {
        let tail_start = self.tail_start();
        let mut eta = vec![0.0, self.eta(1.0)?];
        let mut terms = Vec::new();
        let mut n = 0usize;
        while eta[n] < tail_start {
            eta.push(self.eta((n + 2) as f64)?);
            let int = self.integral(eta[n], eta[n + 2]);
            terms.push(int.h11 * int.h22 - 4.0);
            n += 1;
        }
        let total = terms.iter().sum();
        Ok(SzegoCharacteristic { eta, terms, total })
    }
}

/// `K̃(H)` together with the grid and the individual (nonzero-range) terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SzegoCharacteristic {
    pub eta: Vec<f64>,
    pub terms: Vec<f64>,
    pub total: f64,
}
