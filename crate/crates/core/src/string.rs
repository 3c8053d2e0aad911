//! Krein strings `[M, L]` with piecewise-constant density and finitely many
//! atoms, their bijection with unit-trace diagonal Hamiltonians, and the
//! principal Weyl function `q`.
//!
//! A density stretch `[a, b)` with value `v` corresponds to a Hamiltonian
//! piece of length `(b − a)(1 + v)` with value `diag(1, v)/(1 + v)`; an atom of
//! mass `m` corresponds to a `diag(0, 1)` piece of length `m`.

use alloc::vec;
use alloc::vec::Vec;

use crate::entropy::j_exact;
use crate::hamiltonian::{DiagonalHamiltonian, Hamiltonian, Piece};
use crate::math::{sinc, sqrt, sqrt_upper};
use crate::{Error, Result, C64};

/// One density stretch: the value `v` holds up to position `upto`
/// (from the previous `upto`, or 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub upto: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub pos: f64,
    pub mass: f64,
}

/// A string on `[0, L)`: density `M'` (zero past the last `upto`) and atoms.
///
/// A finite `L` needs `heavy_end`, meaning infinite mass accumulates at `L`.
/// A last `upto` of `∞` continues the final density value forever.
#[derive(Debug, Clone, PartialEq)]
pub struct StringSpec {
    length: f64,
    density: Vec<DensityPiece>,
    atoms: Vec<Atom>,
    heavy_end: bool,
}

impl StringSpec {
    pub fn new(length: f64, density: Vec<DensityPiece>, atoms: Vec<Atom>, heavy_end: bool) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidString("L must be positive"));
        }
        let mut prev = 0.0;
        for (k, d) in density.iter().enumerate() {
            if !(d.upto > prev) {
                return Err(Error::InvalidString("density 'upto' values must increase strictly from 0"));
            }
            if d.upto.is_infinite() && k + 1 != density.len() {
                return Err(Error::InvalidString("only the last density piece may extend to infinity"));
            }
            if d.upto > length {
                return Err(Error::InvalidString("density piece extends past L"));
            }
            if !(d.value >= 0.0) || !d.value.is_finite() {
                return Err(Error::InvalidString("density values must be finite and nonnegative"));
            }
            prev = d.upto;
        }
        let mut prev: Option<f64> = None;
        for a in &atoms {
            if !(a.pos >= 0.0) || !(a.pos < length) {
                return Err(Error::InvalidString("atom positions must lie in [0, L)"));
            }
            if prev.is_some_and(|p| !(a.pos > p)) {
                return Err(Error::InvalidString("atom positions must increase strictly"));
            }
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::InvalidString("atom masses must be finite and positive"));
            }
            prev = Some(a.pos);
        }
        if length.is_infinite() {
            if heavy_end {
                return Err(Error::InvalidString("a heavy end needs finite L"));
            }
            if atoms.is_empty() && density.iter().all(|d| d.value == 0.0) {
                return Err(Error::StringNotSingular("L = infinity with M identically zero"));
            }
        } else if !heavy_end {
            return Err(Error::StringNotSingular("L + lim M < infinity"));
        }
        Ok(StringSpec { length, density, atoms, heavy_end })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn heavy_end(&self) -> bool {
        self.heavy_end
    }

    /// `(start, end, value)` for each density stretch, including the implicit
    /// zero stretch up to `L` when the listed pieces stop short of it.
    pub fn stretches(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.density.len() + 1);
        let mut a = 0.0;
        for d in &self.density {
            out.push((a, d.upto, d.value));
            a = d.upto;
        }
        if a < self.length {
            out.push((a, self.length, 0.0));
        }
        out
    }

    /// `M'(x)`.
    pub fn density_at(&self, x: f64) -> f64 {
        self.stretches().iter().find(|s| x >= s.0 && x < s.1).map_or(0.0, |s| s.2)
    }

    /// `m([a, b))`: density integral plus atoms in the half-open interval.
    ///
    /// Closed on the left so that an atom sitting on a grid point `t_n`
    /// belongs to the term starting there, as it does for the image
    /// Hamiltonian, where `t_n` picks the start of the atom's interval.
    pub fn mass_on(&self, a: f64, b: f64) -> f64 {
        let mut m = 0.0;
        for (lo, hi, v) in self.stretches() {
            let (l, r) = (lo.max(a), hi.min(b));
            if r > l && v > 0.0 {
                m += (r - l) * v;
            }
        }
        m + self.atoms.iter().filter(|at| at.pos >= a && at.pos < b).map(|at| at.mass).sum::<f64>()
    }

    /// Merge adjacent equal density values and drop a trailing zero stretch.
    pub fn canonical(&self) -> Self {
        let mut density: Vec<DensityPiece> = Vec::new();
        for d in &self.density {
            match density.last_mut() {
                Some(last) if last.value == d.value => last.upto = d.upto,
                _ => density.push(*d),
            }
        }
        if density.last().is_some_and(|d| d.value == 0.0) {
            density.pop();
        }
        StringSpec { length: self.length, density, atoms: self.atoms.clone(), heavy_end: self.heavy_end }
    }

    /// The string of the dual Hamiltonian.
    pub fn dual(&self) -> Result<Self> {
        hamiltonian_to_string(&string_to_hamiltonian(self)?.dual())
    }

    /// End of the last density change, and the last atom position.
    fn feature_ends(&self) -> (f64, f64) {
        let dens_end = match self.density.last() {
            Some(d) if d.upto.is_infinite() => {
                if self.density.len() >= 2 {
                    self.density[self.density.len() - 2].upto
                } else {
                    0.0
                }
            }
            Some(d) => d.upto,
            None => 0.0,
        };
        (dens_end, self.atoms.last().map_or(0.0, |a| a.pos))
    }

    /// Position after which the string is a constant (possibly zero) density
    /// with no atoms.
    fn feature_end(&self) -> f64 {
        let (d, a) = self.feature_ends();
        d.max(a)
    }

    /// Whether `[x, ∞)` carries neither atoms nor density changes.
    fn plain_from(&self, x: f64) -> bool {
        let (d, a) = self.feature_ends();
        x >= d && (self.atoms.is_empty() || x > a)
    }
}

fn stretch_piece(v: f64) -> Piece {
    Piece::diag(1.0 / (1.0 + v), v / (1.0 + v))
}

/// The unit-trace diagonal Hamiltonian of a string.
///
/// One pass in position order, emitting a piece for each density segment
/// between atoms and one for each atom.
pub fn string_to_hamiltonian(s: &StringSpec) -> Result<DiagonalHamiltonian> {
    let mut parts: Vec<(f64, Piece)> = Vec::new();
    let mut push = |len: f64, p: Piece| {
        if len > 0.0 {
            match parts.last_mut() {
                Some(last) if last.1 == p => last.0 += len,
                _ => parts.push((len, p)),
            }
        }
    };
    let stretches = s.stretches();
    let mut ai = 0usize;
    let mut tail = None;
    for &(a, b, v) in &stretches {
        let mut x = a;
        while ai < s.atoms.len() && s.atoms[ai].pos < b {
            let at = s.atoms[ai];
            push((at.pos - x) * (1.0 + v), stretch_piece(v));
            push(at.mass, Piece::diag(0.0, 1.0));
            x = at.pos;
            ai += 1;
        }
        if b.is_infinite() {
            tail = Some(stretch_piece(v));
        } else {
            push((b - x) * (1.0 + v), stretch_piece(v));
        }
    }
    let tail = match tail {
        Some(t) => t,
        None if s.heavy_end => Piece::diag(0.0, 1.0),
        None => Piece::diag(1.0, 0.0),
    };
    let h = Hamiltonian::from_lengths(&parts, tail)?.canonical();
    DiagonalHamiltonian::try_from(h)
}

/// Tolerance for `h1 + h2 = 1`.
pub const UNIT_TRACE_TOL: f64 = 1e-12;

/// The string of a unit-trace diagonal Hamiltonian.
pub fn hamiltonian_to_string(h: &DiagonalHamiltonian) -> Result<StringSpec> {
    for (k, seg) in h.segments().enumerate() {
        if (seg.piece.trace() - 1.0).abs() > UNIT_TRACE_TOL {
            let piece = if seg.end.is_infinite() { None } else { Some(k) };
            return Err(Error::NotUnitTrace { piece });
        }
    }
    h.validate().require_nontrivial()?;
    let mut density: Vec<DensityPiece> = Vec::new();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut x = 0.0;
    for seg in h.segments() {
        let p = seg.piece;
        if seg.end.is_infinite() {
            if p.h11 == 0.0 {
                return StringSpec::new(x, density, atoms, true).map(|s| s.canonical());
            }
            let v = p.h22 / p.h11;
            if v > 0.0 {
                density.push(DensityPiece { upto: f64::INFINITY, value: v });
            }
            break;
        }
        if p.h11 == 0.0 {
            match atoms.last_mut() {
                Some(a) if a.pos == x => a.mass += seg.length() * p.h22,
                _ => atoms.push(Atom { pos: x, mass: seg.length() * p.h22 }),
            }
        } else {
            x += seg.length() * p.h11;
            density.push(DensityPiece { upto: x, value: p.h22 / p.h11 });
        }
    }
    StringSpec::new(f64::INFINITY, density, atoms, false).map(|s| s.canonical())
}

/// `N⁻¹(y) = ∫_0^y h1`: the string position reached at Hamiltonian time `y`.
pub fn n_inverse(h: &Hamiltonian, y: f64) -> f64 {
    h.integral(0.0, y).h11
}

fn root_density_error(s: &StringSpec) -> Result<f64> {
    match s.density.last() {
        Some(d) if d.upto.is_infinite() && d.value > 0.0 => Ok(d.value),
        _ => Err(Error::DensityRootIntegrable),
    }
}

/// `t_n = min{t : ∫_0^t √M' = n}` for `n = 0..=n_max`.
pub fn t_points(s: &StringSpec, n_max: usize) -> Result<Vec<f64>> {
    root_density_error(s)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let stretches = s.stretches();
    let (mut acc, mut idx) = (0.0, 0usize);
    for n in 1..=n_max {
        let level = n as f64;
        loop {
            let (a, b, v) = stretches[idx];
            let slope = sqrt(v);
            if slope > 0.0 && acc + slope * (b - a) >= level {
                out.push(a + (level - acc) / slope);
                break;
            }
            acc += slope * (b - a);
            idx += 1;
        }
    }
    Ok(out)
}

/// `t_n` through the image Hamiltonian: `N⁻¹(η_n)`.
pub fn t_points_via_eta(s: &StringSpec, n_max: usize) -> Result<Vec<f64>> {
    root_density_error(s)?;
    let h = string_to_hamiltonian(s)?;
    Ok(h.eta_grid(n_max)?.into_iter().map(|e| n_inverse(&h, e)).collect())
}

/// `K̃[M, L] = Σ_n ((t_{n+2} − t_n) m((t_n, t_{n+2}]) − 4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StringCharacteristic {
    pub t: Vec<f64>,
    pub terms: Vec<f64>,
    pub total: f64,
}

/// Summed while `t_n` lies before the last atom or density change; later
/// terms vanish identically.
pub fn string_characteristic(s: &StringSpec) -> Result<StringCharacteristic> {
    root_density_error(s)?;
    let mut n_max = 2;
    let t = loop {
        let t = t_points(s, n_max)?;
        if s.plain_from(t[n_max - 2]) {
            break t;
        }
        n_max *= 2;
    };
    let mut terms = Vec::new();
    let mut n = 0;
    while !s.plain_from(t[n]) {
        terms.push((t[n + 2] - t[n]) * s.mass_on(t[n], t[n + 2]) - 4.0);
        n += 1;
    }
    let keep = n + 2;
    let total = terms.iter().sum();
    Ok(StringCharacteristic { t: t[..keep.max(1)].to_vec(), terms, total })
}

/// `φ`, `ψ` and their right derivatives at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringPropagation {
    pub x: f64,
    pub phi: C64,
    pub dphi: C64,
    pub psi: C64,
    pub dpsi: C64,
}

impl StringPropagation {
    pub fn wronskian(&self) -> C64 {
        self.phi * self.dpsi - self.dphi * self.psi
    }

    fn advance(&mut self, len: f64, rho: f64, z: C64) {
        if len <= 0.0 {
            return;
        }
        let k2 = z * rho;
        let w = sqrt_upper(k2) * len;
        let (c, sk) = (w.cos(), sinc(w) * len);
        let ksk = k2 * sk;
        let step = |y: C64, dy: C64| (y * c + dy * sk, dy * c - y * ksk);
        (self.phi, self.dphi) = step(self.phi, self.dphi);
        (self.psi, self.dpsi) = step(self.psi, self.dpsi);
        self.x += len;
    }

    fn kick(&mut self, mass: f64, z: C64) {
        self.dphi -= z * mass * self.phi;
        self.dpsi -= z * mass * self.psi;
    }
}

/// Solutions of `φ(x) = 1 − z ∫_{[0,x]} (x − s) φ dm` and the `ψ` analogue
/// with `ψ(0) = 0`, `ψ'(0) = 1`; atoms at `x` are included.
pub fn phi_psi(s: &StringSpec, x: f64, z: C64) -> Result<StringPropagation> {
    if !(x >= 0.0) || !(x <= s.length) || x.is_infinite() {
        return Err(Error::BadPosition(x));
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut st = StringPropagation { x: 0.0, phi: one, dphi: zero, psi: zero, dpsi: one };
    let mut ai = 0usize;
    for (a, b, v) in s.stretches() {
        if a > x {
            break;
        }
        let mut pos = a;
        while ai < s.atoms.len() && s.atoms[ai].pos < b && s.atoms[ai].pos <= x {
            let at = s.atoms[ai];
            st.advance(at.pos - pos, v, z);
            st.x = at.pos;
            st.kick(at.mass, z);
            pos = at.pos;
            ai += 1;
        }
        let stop = b.min(x);
        st.advance(stop - pos, v, z);
        st.x = stop;
    }
    st.x = x;
    Ok(st)
}

/// Principal Weyl function `q(z)`.
///
/// Eventually constant density `ρ`: the Weyl solution is proportional to
/// `e^{ikx}` with `k² = zρ`, `Im k > 0`, giving
/// `q = (ikψ − ψ')/(ikφ − φ')` past the last atom (`ψ'/φ'` when `ρ = 0`).
/// Heavy end at `L`: the Weyl solution vanishes there, `q = ψ(L)/φ(L)`.
/// `z` may lie on the real axis (away from 0); on the positive half-line the
/// limit from above is taken.
pub fn q_function(s: &StringSpec, z: C64) -> Result<C64> {
    if z.im < 0.0 || z == C64::new(0.0, 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NotUpperHalfPlane);
    }
    if s.heavy_end {
        let p = phi_psi(s, s.length, z)?;
        return Ok(p.psi / p.phi);
    }
    let x = s.feature_end();
    let p = phi_psi(s, x, z)?;
    let rho = match s.density.last() {
        Some(d) if d.upto.is_infinite() => d.value,
        _ => 0.0,
    };
    if rho == 0.0 {
        return Ok(p.dpsi / p.dphi);
    }
    let ik = C64::new(0.0, 1.0) * sqrt_upper(z * rho);
    Ok((ik * p.psi - p.dpsi) / (ik * p.phi - p.dphi))
}

/// `∫_0^∞ log v(x) / ((1 + x)√x) dx` with `v = Im q(x + i0)`, equal to
/// `π J` of the dual image Hamiltonian. `−∞` when the image has a rank-one
/// tail.
pub fn szego_log_integral(s: &StringSpec) -> Result<f64> {
    let h = string_to_hamiltonian(s)?;
    Ok(core::f64::consts::PI * j_exact(&h.dual())?)
}

/// The string with `ε_n = −(n+2)^{−3/4}`, `δ_n = Π_{j<n}(1 + ε_j)`,
/// stretches `[t_n, t_n + δ_n)` of density `δ_n^{−2}` and an atom of mass
/// 1/2 at each stretch midpoint.
///
/// Every window `[t_n, t_{n+2})` carries singular mass 1, so the singular
/// part is infinite, while
/// `term(n) = ε_n²/(1 + ε_n) + δ_n + δ_{n+1}` is summable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GeometricString;

impl GeometricString {
    pub const ALPHA: f64 = 0.75;

    pub fn epsilon(n: usize) -> f64 {
        -libm::pow(n as f64 + 2.0, -Self::ALPHA)
    }

    /// `δ_0, ..., δ_n`.
    pub fn deltas(n: usize) -> Vec<f64> {
        let mut d = vec![1.0];
        for j in 0..n {
            d.push(d[j] * (1.0 + Self::epsilon(j)));
        }
        d
    }

    pub fn term(n: usize) -> f64 {
        let d = Self::deltas(n + 1);
        let e = Self::epsilon(n);
        e * e / (1.0 + e) + d[n] + d[n + 1]
    }

    /// `Σ_{n<N} term(n)`.
    pub fn partial_sum(n: usize) -> f64 {
        let d = Self::deltas(n + 1);
        (0..n)
            .map(|k| {
                let e = Self::epsilon(k);
                e * e / (1.0 + e) + d[k] + d[k + 1]
            })
            .sum()
    }

    /// Upper bound on `Σ_{n≥N} term(n)`.
    ///
    /// `Σ ε_n²/(1+ε_n) ≤ 2/(√(N+1)(1 + ε_N))`, and with `s = (N+2)^{1/4}`,
    /// `δ_n ≤ δ_N e^{−4((n+2)^{1/4} − s)}` gives
    /// `Σ_{n≥N} δ_n ≤ δ_N (1 + s³ + 3s²/4 + 3s/8 + 3/32)`.
    pub fn tail_bound(n: usize) -> f64 {
        let nf = n as f64;
        let quad = 2.0 / (sqrt(nf + 1.0) * (1.0 + Self::epsilon(n)));
        let s = sqrt(sqrt(nf + 2.0));
        let dn = Self::deltas(n)[n];
        let delta_sum = dn * (1.0 + s * s * s + 0.75 * s * s + 0.375 * s + 3.0 / 32.0);
        quad + 2.0 * delta_sum
    }

    /// Singular mass on `[0, t_N)`.
    pub fn singular_mass(n: usize) -> f64 {
        0.5 * n as f64
    }

    /// The first `N` stretches with their atoms, continued by the constant
    /// density `δ_N^{−2}`.
    pub fn truncate(n: usize) -> Result<StringSpec> {
        let d = Self::deltas(n);
        let mut density = Vec::with_capacity(n + 1);
        let mut atoms = Vec::with_capacity(n);
        let mut t = 0.0;
        for &dk in &d[..n] {
            atoms.push(Atom { pos: t + 0.5 * dk, mass: 0.5 });
            t += dk;
            density.push(DensityPiece { upto: t, value: 1.0 / (dk * dk) });
        }
        density.push(DensityPiece { upto: f64::INFINITY, value: 1.0 / (d[n] * d[n]) });
        StringSpec::new(f64::INFINITY, density, atoms, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::c;
    use crate::weyl::m_function;
    use proptest::prelude::*;

    fn uniform(atoms: Vec<Atom>) -> StringSpec {
        StringSpec::new(f64::INFINITY, vec![DensityPiece { upto: f64::INFINITY, value: 1.0 }], atoms, false).unwrap()
    }

    fn single_mass() -> StringSpec {
        StringSpec::new(f64::INFINITY, vec![], vec![Atom { pos: 1.0, mass: 1.0 }], false).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(StringSpec::new(f64::INFINITY, vec![], vec![], false), Err(Error::StringNotSingular(_))));
        assert!(matches!(
            StringSpec::new(2.0, vec![DensityPiece { upto: 2.0, value: 1.0 }], vec![], false),
            Err(Error::StringNotSingular(_))
        ));
        assert!(matches!(
            StringSpec::new(
                f64::INFINITY,
                vec![],
                vec![Atom { pos: 1.0, mass: 1.0 }, Atom { pos: 1.0, mass: 1.0 }],
                false
            ),
            Err(Error::InvalidString(_))
        ));
        assert!(StringSpec::new(1.0, vec![], vec![Atom { pos: 0.0, mass: 1.0 }], true).is_ok());
    }

    #[test]
    fn uniform_string_image() {
        let h = string_to_hamiltonian(&uniform(vec![])).unwrap();
        assert!(h.pieces().is_empty());
        assert_eq!(h.tail(), Piece::diag(0.5, 0.5));
        assert_eq!(hamiltonian_to_string(&h).unwrap(), uniform(vec![]));
    }

    #[test]
    fn single_mass_image() {
        let h = string_to_hamiltonian(&single_mass()).unwrap();
        assert_eq!(h.breakpoints(), &[0.0, 1.0, 2.0]);
        assert_eq!(h.pieces(), &[Piece::diag(1.0, 0.0), Piece::diag(0.0, 1.0)]);
        assert_eq!(h.tail(), Piece::diag(1.0, 0.0));
        assert_eq!(hamiltonian_to_string(&h).unwrap(), single_mass());
    }

    #[test]
    fn non_unit_trace_and_trivial_are_rejected() {
        let h = DiagonalHamiltonian::constant(2.0, 8.0).unwrap();
        assert_eq!(hamiltonian_to_string(&h), Err(Error::NotUnitTrace { piece: None }));
        let t = DiagonalHamiltonian::constant(1.0, 0.0).unwrap();
        assert_eq!(hamiltonian_to_string(&t), Err(Error::Trivial));
    }

    #[test]
    fn uniform_with_atom_characteristic() {
        let s = uniform(vec![Atom { pos: 0.5, mass: 1.0 }]);
        let k = string_characteristic(&s).unwrap();
        assert_eq!(k.total, 2.0);
        assert_eq!(k.terms, vec![2.0]);
        assert_eq!(t_points(&s, 4).unwrap(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let h = string_to_hamiltonian(&s).unwrap();
        assert_eq!(h.eta_grid(3).unwrap(), vec![0.0, 3.0, 5.0, 7.0]);
        assert_eq!(n_inverse(&h, 3.0), 1.0);
        assert_eq!(t_points_via_eta(&s, 4).unwrap(), t_points(&s, 4).unwrap());
        assert_eq!(h.szego_characteristic().unwrap().total, 2.0);
        assert_eq!(string_characteristic(&uniform(vec![])).unwrap().total, 0.0);
    }

    #[test]
    fn root_integrable_density_is_rejected() {
        assert_eq!(t_points(&single_mass(), 3), Err(Error::DensityRootIntegrable));
    }

    #[test]
    fn propagation_examples() {
        let s = single_mass();
        let p = phi_psi(&s, 0.5, c(0.3, 0.7)).unwrap();
        assert_eq!((p.phi, p.psi), (c(1.0, 0.0), c(0.5, 0.0)));
        for z in [c(0.0, 1.0), c(1.0, 1.0), c(-2.0, 0.5)] {
            assert!((q_function(&s, z).unwrap() - (1.0 - 1.0 / z)).norm() < 1e-15);
        }
        let dual = s.dual().unwrap();
        assert_eq!(dual, StringSpec::new(1.0, vec![], vec![Atom { pos: 0.0, mass: 1.0 }], true).unwrap());
        for z in [c(0.0, 1.0), c(1.0, 1.0)] {
            assert!((q_function(&dual, z).unwrap() - 1.0 / (1.0 - z)).norm() < 1e-15);
        }
    }

    #[test]
    fn q_matches_m_through_squaring() {
        let strings = [
            single_mass(),
            uniform(vec![Atom { pos: 0.5, mass: 1.0 }]),
            StringSpec::new(
                f64::INFINITY,
                vec![DensityPiece { upto: 0.75, value: 3.0 }, DensityPiece { upto: f64::INFINITY, value: 0.5 }],
                vec![Atom { pos: 0.0, mass: 0.25 }, Atom { pos: 1.5, mass: 2.0 }],
                false,
            )
            .unwrap(),
        ];
        for s in &strings {
            let h = string_to_hamiltonian(s).unwrap();
            for z in [c(0.0, 1.0), c(1.0, 1.0), c(0.0, 2.0)] {
                let q = q_function(s, z * z).unwrap();
                let m = m_function(&h, z).unwrap().m;
                assert!((z * q + 1.0 / m).norm() < 1e-10, "{s:?} at {z}");
            }
        }
    }

    #[test]
    fn geometric_string_partial_sums() {
        let s100 = GeometricString::partial_sum(100);
        let s1000 = GeometricString::partial_sum(1000);
        assert!(s1000 > s100);
        assert!(s1000 - s100 <= GeometricString::tail_bound(100));
        assert!(GeometricString::tail_bound(1000) < GeometricString::tail_bound(100));
        let trunc = GeometricString::truncate(6).unwrap();
        let t = t_points(&trunc, 6).unwrap();
        let d = GeometricString::deltas(6);
        for n in 0..6 {
            assert!((t[n + 1] - t[n] - d[n]).abs() < 1e-13);
        }
        let k = string_characteristic(&trunc).unwrap();
        for n in 0..4 {
            assert!((k.terms[n] - GeometricString::term(n)).abs() < 1e-12);
        }
    }

    fn string_strategy() -> impl Strategy<Value = StringSpec> {
        // Dyadic lengths and values with 1 + v a power of two keep every
        // conversion exact.
        let value = prop::sample::select(vec![0.0, 1.0, 3.0, 7.0]);
        let piece = (1u32..8, value.clone()).prop_map(|(l, v)| (l as f64 / 4.0, v));
        (
            prop::collection::vec(piece, 0..4),
            prop::sample::select(vec![1.0, 3.0, 7.0]),
            prop::collection::vec((0u32..4, 1u32..8), 0..3),
        )
            .prop_map(|(pieces, last, atoms)| {
                let mut density = Vec::new();
                let mut x = 0.0;
                for (l, v) in pieces {
                    x += l;
                    density.push(DensityPiece { upto: x, value: v });
                }
                density.push(DensityPiece { upto: f64::INFINITY, value: last });
                let mut pos = 0.0;
                let atoms = atoms
                    .into_iter()
                    .map(|(gap, m)| {
                        pos += gap as f64 / 8.0 + 0.125;
                        Atom { pos, mass: m as f64 / 4.0 }
                    })
                    .collect();
                StringSpec::new(f64::INFINITY, density, atoms, false).unwrap().canonical()
            })
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(s in string_strategy()) {
            let h = string_to_hamiltonian(&s).unwrap();
            for seg in h.segments() {
                prop_assert_eq!(seg.piece.trace(), 1.0);
            }
            prop_assert_eq!(hamiltonian_to_string(&h).unwrap(), s.clone());
            prop_assert_eq!(string_to_hamiltonian(&hamiltonian_to_string(&h).unwrap()).unwrap(), h);
        }

        #[test]
        fn wronskian_is_one(s in string_strategy(), x in 0.0f64..5.0, re in -3.0f64..3.0, im in 0.0f64..3.0) {
            let p = phi_psi(&s, x, c(re, im)).unwrap();
            let scale = [p.phi, p.dphi, p.psi, p.dpsi].iter().map(|v| v.norm()).fold(1.0, f64::max);
            prop_assert!((p.wronskian() - 1.0).norm() / (scale * scale) < 1e-12);
        }

        #[test]
        fn dual_preserves_characteristic(s in string_strategy()) {
            let d = s.dual().unwrap();
            prop_assert_eq!(d.dual().unwrap(), s.clone());
            let k = string_characteristic(&s).unwrap().total;
            let kd = string_characteristic(&d).unwrap().total;
            prop_assert!((k - kd).abs() <= 1e-12 * (1.0 + k.abs()));
        }
    }
}
