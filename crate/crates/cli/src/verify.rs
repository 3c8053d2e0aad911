//! The verification report: residuals against thresholds on the built-in
//! corpus, or on a user Hamiltonian.

use canon_szego_core::entropy::{
    i_quadrature, identity_suite, j_exact, j_quadrature, k_value, k_value_quadrature, LineQuadOptions, SuiteThresholds,
};
use canon_szego_core::hamiltonian::{DiagonalHamiltonian, Hamiltonian};
use canon_szego_core::muckenhoupt::{a2l1, int_characteristic, p1_witness, sequences_and_identity, WeightFunction};
use canon_szego_core::quadrature::{integrate_breaks, QuadOptions};
use canon_szego_core::string::{
    hamiltonian_to_string, q_function, string_characteristic, string_to_hamiltonian, t_points_via_eta, GeometricString,
    StringSpec,
};
use canon_szego_core::transfer::{energy_check, solve};
use canon_szego_core::weyl::{m_function, spectral_density};
use canon_szego_core::{Error, C64};
use rayon::prelude::*;

use crate::corpus;
use crate::output::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub case: String,
    pub name: String,
    pub at: f64,
    pub residual: f64,
    pub threshold: f64,
}

impl Check {
    /// A NaN residual fails.
    pub fn passed(&self) -> bool {
        self.residual <= self.threshold
    }
}

struct Report {
    case: String,
    checks: Vec<Check>,
}

impl Report {
    fn new(case: &str) -> Self {
        Report { case: case.to_string(), checks: Vec::new() }
    }

    fn push(&mut self, name: &str, at: f64, residual: f64, threshold: f64) {
        self.checks.push(Check { case: self.case.clone(), name: name.to_string(), at, residual, threshold });
    }

    /// Record the checks produced by `f`, or one failing line if it errors.
    fn run(&mut self, label: &str, f: impl FnOnce(&mut Self) -> Result<(), Error>) {
        if let Err(e) = f(self) {
            self.push(&format!("{label}: {e}"), 0.0, f64::INFINITY, 0.0);
        }
    }
}

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

/// Checks that apply to any Hamiltonian; the diagonal, det-one and
/// positive-tail ones are added when their hypotheses hold. The line
/// quadrature is slow for rapidly oscillating densities and can be left out.
fn hamiltonian_checks(rep: &mut Report, h: &Hamiltonian, quadrature: bool) {
    rep.run("transfer", |rep| {
        let t = h.tail_start() + 1.0;
        for z in [i(), C64::new(1.0, 0.5), C64::new(-2.0, 1.0), C64::new(3.0, 0.0)] {
            rep.push("det M = 1", z.re, solve(h, t, z).det_defect(), 1e-12);
            if z.im > 0.0 {
                rep.push("energy identity", z.re, energy_check(h, t, z).relative, 1e-10);
            }
        }
        Ok(())
    });
    let Ok(d) = DiagonalHamiltonian::try_from(h.clone()) else { return };
    if d.tail().det() > 0.0 && d.is_nontrivial() {
        rep.run("identity suite", |rep| {
            for c in identity_suite(&d, &SuiteThresholds::default())?.checks {
                rep.push(&c.name, c.at, c.residual, c.threshold);
            }
            Ok(())
        });
    }
    if quadrature && d.tail().det() > 0.0 && d.is_nontrivial() {
        rep.run("quadrature", |rep| {
            let opts = LineQuadOptions::default();
            let je = j_exact(&d)?;
            let jq = j_quadrature(|x| spectral_density(&d, x).expect("positive tail"), &opts);
            rep.push("J quadrature = J exact", 0.0, (jq.value() - je).abs(), 1e-6);
            rep.push("density is even", 0.0, if jq.even { 0.0 } else { 1.0 }, 0.0);
            let ie = m_function(&d, i())?.m.im;
            rep.push("I quadrature = I exact", 0.0, (i_quadrature(&d, &opts)?.value - ie).abs(), 1e-6);
            let kq = k_value_quadrature(&d, 0.0, &opts)?.k;
            rep.push("K quadrature = K exact", 0.0, (kq - k_value(&d, 0.0)?.k).abs(), 1e-4);
            Ok(())
        });
    }
    if let Ok(w) = WeightFunction::from_det_one(&d) {
        rep.run("weight", |rep| weight_checks(rep, &d, &w));
    }
}

fn weight_checks(rep: &mut Report, d: &DiagonalHamiltonian, w: &WeightFunction) -> Result<(), Error> {
    let k0 = k_value(d, 0.0)?.k;
    let int = int_characteristic(w);
    rep.push("K(0) <= [h]_int", 0.0, (k0 - int).max(0.0), 0.0);
    let p1 = p1_witness(w, 64)?;
    rep.push("p1 inequality", 0.0, (-p1.slack()).max(0.0), 0.0);
    rep.push("unit-interval L1 identity", 0.0, sequences_and_identity(w).residual, 1e-10);
    let mut pts = w.breakpoints().to_vec();
    pts.push(w.tail_start() + 1.0);
    let mut f = |r: f64| {
        let (k, kd) = w.kappas(r);
        k + kd - 2.0
    };
    let oracle = integrate_breaks(&mut f, &pts, QuadOptions { abs_tol: 1e-13, ..Default::default() });
    rep.push("[h]_int closed form = quadrature", 0.0, (int - oracle.value).abs(), 1e-8);
    let kt = d.szego_characteristic()?.total;
    rep.push("K~ = 4 [h]_2,l1", 0.0, (kt - 4.0 * a2l1(w)).abs(), 1e-12);
    Ok(())
}

fn constant_case() -> Report {
    let mut rep = Report::new("constant");
    let h = corpus::constant();
    rep.run("closed forms", |rep| {
        rep.push("m(i) = 2i", 0.0, (m_function(&h, i())?.m - C64::new(0.0, 2.0)).norm(), 1e-12);
        for x in [0.0, 1.0, 5.0] {
            rep.push("w = 2", x, (spectral_density(&h, x)? - 2.0).abs(), 1e-12);
        }
        rep.push("J = log 2", 0.0, (j_exact(&h)? - 2f64.ln()).abs(), 1e-12);
        rep.push("K = 0", 0.0, k_value(&h, 0.0)?.k.abs(), 1e-12);
        let d = DiagonalHamiltonian::try_from(h.clone())?;
        rep.push("K~ = 0", 0.0, d.szego_characteristic()?.total.abs(), 0.0);
        Ok(())
    });
    hamiltonian_checks(&mut rep, &h, true);
    rep
}

fn bump_case() -> Report {
    let mut rep = Report::new("bump");
    let h = corpus::bump();
    rep.run("closed forms", |rep| {
        let (c, s) = (1f64.cosh(), 1f64.sinh());
        let ic = (c + 0.5 * s) / (c + 2.0 * s);
        let jc = 2.0 - 2.0 * (c + 2.0 * s).ln();
        let rec = k_value(&h, 0.0)?;
        rep.push("I(0) closed form", 0.0, (rec.i - ic).abs(), 1e-12);
        rep.push("J(0) closed form", 0.0, (rec.j - jc).abs(), 1e-12);
        rep.push("K(0) = log I - J closed form", 0.0, (rec.k - (ic.ln() - jc)).abs(), 1e-12);
        let d = DiagonalHamiltonian::try_from(h.clone())?;
        rep.push("K~ = 1/2", 0.0, (d.szego_characteristic()?.total - 0.5).abs(), 0.0);
        Ok(())
    });
    hamiltonian_checks(&mut rep, &h, true);
    rep
}

/// Largest relative difference between corresponding numbers of two
/// strings; infinite when their shapes differ.
fn string_distance(a: &StringSpec, b: &StringSpec) -> f64 {
    let rel = |x: f64, y: f64| if x == y { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) };
    if a.density().len() != b.density().len() || a.atoms().len() != b.atoms().len() || a.heavy_end() != b.heavy_end() {
        return f64::INFINITY;
    }
    let dens = a.density().iter().zip(b.density()).map(|(p, q)| rel(p.upto, q.upto).max(rel(p.value, q.value)));
    let atoms = a.atoms().iter().zip(b.atoms()).map(|(p, q)| rel(p.pos, q.pos).max(rel(p.mass, q.mass)));
    dens.chain(atoms).fold(rel(a.length(), b.length()), f64::max)
}

/// Round trip, plus the grid and characteristic checks when `√M'` is not
/// integrable.
fn string_checks(rep: &mut Report, s: &StringSpec) -> Result<(), Error> {
    let h = string_to_hamiltonian(s)?;
    rep.push("string round trip", 0.0, string_distance(&hamiltonian_to_string(&h)?, s), 1e-12);
    if s.density().last().is_none_or(|d| !(d.upto.is_infinite() && d.value > 0.0)) {
        return Ok(());
    }
    let sc = string_characteristic(s)?;
    let via = t_points_via_eta(s, sc.t.len() - 1)?;
    let dt = sc.t.iter().zip(&via).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    rep.push("t_n = N^-1(eta_n)", 0.0, dt, 1e-12);
    let hc = h.szego_characteristic()?;
    let n = sc.terms.len().max(hc.terms.len());
    let term = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    for k in 0..n {
        rep.push(
            "string K~ term = Hamiltonian K~ term",
            k as f64,
            (term(&sc.terms, k) - term(&hc.terms, k)).abs(),
            1e-12,
        );
    }
    Ok(())
}

fn single_mass_case() -> Report {
    let mut rep = Report::new("stieltjes");
    let s = corpus::single_mass();
    rep.run("string", |rep| string_checks(rep, &s));
    rep.run("weyl", |rep| {
        let h = string_to_hamiltonian(&s)?;
        for z in [i(), C64::new(1.0, 1.0), C64::new(-0.5, 0.2)] {
            let m = m_function(&h, z)?.m;
            rep.push("m(z) = z/(1 - z^2)", z.re, (m - z / (1.0 - z * z)).norm(), 1e-12);
        }
        for z in [i(), C64::new(1.0, 1.0), C64::new(0.0, 2.0)] {
            let m = m_function(&h, z)?.m;
            let q = q_function(&s, z * z)?;
            rep.push("z q(z^2) = -1/m(z)", z.im, (z * q + 1.0 / m).norm(), 1e-10);
        }
        Ok(())
    });
    hamiltonian_checks(&mut rep, &corpus::single_mass_image(), true);
    rep
}

fn geometric_case() -> Report {
    let mut rep = Report::new("geometric");
    let s = corpus::geometric();
    let n = corpus::GEOMETRIC_STRETCHES;
    rep.run("generator", |rep| {
        let same = GeometricString::truncate(n)? == s;
        rep.push("corpus file = truncated generator", n as f64, if same { 0.0 } else { 1.0 }, 0.0);
        Ok(())
    });
    rep.run("string", |rep| string_checks(rep, &s));
    rep.run("terms", |rep| {
        let sc = string_characteristic(&s)?;
        for k in 0..n - 2 {
            rep.push("K~ term closed form", k as f64, (sc.terms[k] - GeometricString::term(k)).abs(), 1e-12);
        }
        let gap = GeometricString::partial_sum(1000) - GeometricString::partial_sum(100);
        rep.push("K~ tail below bound", 100.0, (gap - GeometricString::tail_bound(100)).max(0.0), 0.0);
        Ok(())
    });
    hamiltonian_checks(&mut rep, &string_to_hamiltonian(&s).map(|h| h.into_inner()).expect("corpus is valid"), false);
    rep
}

/// Every corpus case, in a fixed order.
pub fn corpus_checks() -> Vec<Check> {
    let cases: [fn() -> Report; 4] = [constant_case, bump_case, single_mass_case, geometric_case];
    let reports: Vec<Report> = cases.par_iter().map(|f| f()).collect();
    reports.into_iter().flat_map(|r| r.checks).collect()
}

/// Generic checks on one Hamiltonian.
pub fn hamiltonian_report(name: &str, h: &Hamiltonian) -> Vec<Check> {
    let mut rep = Report::new(name);
    hamiltonian_checks(&mut rep, h, true);
    rep.checks
}

/// Columns: `case, check, at, residual, threshold, passed`.
pub fn to_table(checks: &[Check]) -> Table {
    let mut t = Table::new("verify", &["case", "check", "at", "residual", "threshold", "passed"]);
    for c in checks {
        t.push(vec![
            c.case.as_str().into(),
            c.name.as_str().into(),
            c.at.into(),
            c.residual.into(),
            c.threshold.into(),
            c.passed().into(),
        ]);
    }
    t
}
