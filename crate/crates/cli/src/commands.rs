//! One function per subcommand, each producing a [`Table`].
//!
//! Grid points are evaluated in parallel on the current rayon pool and
//! collected in grid order.

use canon_szego_core::entropy::{k_value, k_value_quadrature, LineQuadOptions};
use canon_szego_core::hamiltonian::{DiagonalHamiltonian, Hamiltonian};
use canon_szego_core::muckenhoupt::{a2l1, int_characteristic, p1_witness, sequences_and_identity, WeightFunction};
use canon_szego_core::string::{
    q_function, string_characteristic, string_to_hamiltonian, szego_log_integral, t_points_via_eta, StringSpec,
};
use canon_szego_core::weyl::{m_disk_limit, m_function, spectral_density, Reference, Route};
use canon_szego_core::C64;
use rayon::prelude::*;

use crate::output::{Cell, Table};
use crate::{CliError, Grid};

type Rows = Result<Vec<Vec<Cell>>, CliError>;

fn par_rows<F>(points: &[f64], f: F) -> Rows
where
    F: Fn(f64) -> Result<Vec<Cell>, CliError> + Sync,
{
    let rows: Vec<_> = points.par_iter().map(|&x| f(x)).collect();
    rows.into_iter().collect()
}

fn table(command: &str, columns: &[&'static str], rows: Vec<Vec<Cell>>) -> Table {
    let mut t = Table::new(command, columns);
    rows.into_iter().for_each(|r| t.push(r));
    t
}

fn upper(x: f64, im: f64) -> Result<C64, CliError> {
    if im > 0.0 && im.is_finite() {
        Ok(C64::new(x, im))
    } else {
        Err(CliError::field("imag", format!("must be positive and finite, got {im}")))
    }
}

fn diagonal(h: &Hamiltonian) -> Result<DiagonalHamiltonian, CliError> {
    Ok(DiagonalHamiltonian::try_from(h.clone())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Closed form through the constant tail.
    Exact,
    /// Nested Weyl disks up to the requested radius.
    Disk,
}

/// Columns: `re_z, im_z, re_m, im_m, radius, route`.
pub fn simulate(h: &Hamiltonian, grid: &Grid, im: f64, method: Method, tol: f64) -> Result<Table, CliError> {
    upper(0.0, im)?;
    h.validate().require_nontrivial()?;
    let rows = par_rows(&grid.points(), |x| {
        let z = upper(x, im)?;
        let r = match method {
            Method::Exact => m_function(h, z)?,
            Method::Disk => m_disk_limit(h, z, tol, Reference::Infinity)?,
        };
        let route = match r.route {
            Route::ExactTail => "exact_tail",
            Route::DiskLimit => "disk_limit",
        };
        Ok(vec![z.re.into(), z.im.into(), r.m.re.into(), r.m.im.into(), r.radius.into(), route.into()])
    })?;
    Ok(table("simulate", &["re_z", "im_z", "re_m", "im_m", "radius", "route"], rows))
}

/// Columns: `x, w`.
pub fn density(h: &Hamiltonian, grid: &Grid) -> Result<Table, CliError> {
    h.validate().require_nontrivial()?;
    let rows = par_rows(&grid.points(), |x| Ok(vec![x.into(), spectral_density(h, x)?.into()]))?;
    Ok(table("density", &["x", "w"], rows))
}

/// Columns: `route, r, i, j, k`. The quadrature row is present for
/// diagonal input with a positive-determinant tail.
pub fn entropy(h: &Hamiltonian, r: f64, tol: Option<f64>) -> Result<Table, CliError> {
    let exact = k_value(h, r)?;
    let mut t = Table::new("entropy", &["route", "r", "i", "j", "k"]);
    t.push(vec!["exact_tail".into(), r.into(), exact.i.into(), exact.j.into(), exact.k.into()]);
    if h.is_diagonal() && h.tail().det() > 0.0 {
        let mut opts = LineQuadOptions::default();
        if let Some(tol) = tol {
            opts.tol = tol;
        }
        let q = k_value_quadrature(h, r, &opts)?;
        t.push(vec!["quadrature".into(), r.into(), q.i.into(), q.j.into(), q.k.into()]);
    }
    Ok(t)
}

/// Columns: `n, eta_n, eta_n2, term, partial_sum`; the last partial sum is
/// `K̃`.
pub fn szego(h: &Hamiltonian) -> Result<Table, CliError> {
    let d = diagonal(h)?;
    let sc = d.szego_characteristic()?;
    let mut t = Table::new("szego", &["n", "eta_n", "eta_n2", "term", "partial_sum"]);
    let mut partial = 0.0;
    for (n, &term) in sc.terms.iter().enumerate() {
        partial += term;
        t.push(vec![n.into(), sc.eta[n].into(), sc.eta[n + 2].into(), term.into(), partial.into()]);
    }
    if sc.terms.is_empty() {
        t.push(vec![0usize.into(), 0.0.into(), sc.eta[1].into(), 0.0.into(), 0.0.into()]);
    }
    Ok(t)
}

/// Characteristics of `h = h1` for `H = diag(h, 1/h)`, one record.
pub fn a2(h: &Hamiltonian, p1_grid: usize) -> Result<Table, CliError> {
    let d = diagonal(h)?;
    let w = WeightFunction::from_det_one(&d)?;
    let seq = sequences_and_identity(&w);
    let p1 = p1_witness(&w, p1_grid)?;
    let k0 = k_value(&d, 0.0)?.k;
    let kt = d.szego_characteristic()?.total;
    let int = int_characteristic(&w);
    let mut t = Table::new(
        "a2",
        &[
            "a2l1",
            "int_characteristic",
            "k0",
            "ktilde",
            "k0_le_int",
            "l1_identity_residual",
            "doubled_discrepancy",
            "p1_sum",
            "p1_bound",
            "p1_holds",
        ],
    );
    t.push(vec![
        a2l1(&w).into(),
        int.into(),
        k0.into(),
        kt.into(),
        (k0 <= int).into(),
        seq.residual.into(),
        seq.doubled_discrepancy.into(),
        p1.sum.into(),
        p1.bound.into(),
        p1.holds().into(),
    ]);
    Ok(t)
}

/// The image Hamiltonian as segments `start, end, h1, h2`; the last row is
/// the tail with `end = inf`.
pub fn string_convert(s: &StringSpec) -> Result<Table, CliError> {
    let h = string_to_hamiltonian(s)?;
    let mut t = Table::new("string convert", &["start", "end", "h1", "h2"]);
    for seg in h.segments() {
        t.push(vec![seg.start.into(), seg.end.into(), seg.piece.h11.into(), seg.piece.h22.into()]);
    }
    Ok(t)
}

/// Columns: `n, t_n, t_n_via_eta, t_n2, mass, term`, with `mass` the mass
/// of `[t_n, t_{n+2})`.
pub fn string_analyze(s: &StringSpec) -> Result<Table, CliError> {
    let sc = string_characteristic(s)?;
    let via = t_points_via_eta(s, sc.t.len() - 1)?;
    let mut t = Table::new("string analyze", &["n", "t_n", "t_n_via_eta", "t_n2", "mass", "term"]);
    for (n, &term) in sc.terms.iter().enumerate() {
        t.push(vec![
            n.into(),
            sc.t[n].into(),
            via[n].into(),
            sc.t[n + 2].into(),
            s.mass_on(sc.t[n], sc.t[n + 2]).into(),
            term.into(),
        ]);
    }
    Ok(t)
}

/// `K̃` of the string and of its image, and the logarithmic integral.
pub fn string_ktilde(s: &StringSpec) -> Result<Table, CliError> {
    let ks = string_characteristic(s)?.total;
    let kh = string_to_hamiltonian(s)?.szego_characteristic()?.total;
    let log = szego_log_integral(s)?;
    let mut t = Table::new("string ktilde", &["ktilde_string", "ktilde_hamiltonian", "log_integral"]);
    t.push(vec![ks.into(), kh.into(), log.into()]);
    Ok(t)
}

/// Columns: `re_z, im_z, re_q, im_q`, with `im_z = 0` allowed.
pub fn string_q(s: &StringSpec, grid: &Grid, im: f64) -> Result<Table, CliError> {
    if im < 0.0 || !im.is_finite() {
        return Err(CliError::field("imag", format!("must be nonnegative and finite, got {im}")));
    }
    let rows = par_rows(&grid.points(), |x| {
        let z = C64::new(x, im);
        let q = q_function(s, z)?;
        Ok(vec![z.re.into(), z.im.into(), q.re.into(), q.im.into()])
    })?;
    Ok(table("string q", &["re_z", "im_z", "re_q", "im_q"], rows))
}
