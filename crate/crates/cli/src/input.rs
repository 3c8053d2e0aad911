//! JSON input formats for Hamiltonians and strings.

use canon_szego_core::hamiltonian::{Hamiltonian, Piece};
use canon_szego_core::string::{Atom, DensityPiece, StringSpec};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceDoc {
    h11: f64,
    #[serde(default)]
    h12: f64,
    h22: f64,
}

impl From<&PieceDoc> for Piece {
    fn from(p: &PieceDoc) -> Self {
        Piece::new(p.h11, p.h12, p.h22)
    }
}

/// Either the full form (`pieces` + `tail`) or the diagonal shorthand, where
/// `h1` and `h2` list one value per breakpoint and the last value is the tail.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianDoc {
    breakpoints: Vec<f64>,
    pieces: Option<Vec<PieceDoc>>,
    tail: Option<PieceDoc>,
    h1: Option<Vec<f64>>,
    h2: Option<Vec<f64>>,
}

/// A number or the string `"inf"`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Extended {
    Num(f64),
    Word(String),
}

impl Extended {
    fn value(&self, field: &str) -> Result<f64, CliError> {
        match self {
            Extended::Num(v) => Ok(*v),
            Extended::Word(w) if w == "inf" => Ok(f64::INFINITY),
            Extended::Word(w) => Err(CliError::field(field, format!("expected a number or \"inf\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityDoc {
    upto: Extended,
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    pos: f64,
    mass: f64,
}

/// `heavy_end` defaults to `true` exactly when `L` is finite.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StringDoc {
    #[serde(rename = "L")]
    length: Extended,
    #[serde(default)]
    density: Vec<DensityDoc>,
    #[serde(default)]
    atoms: Vec<AtomDoc>,
    heavy_end: Option<bool>,
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian, CliError> {
    let doc: HamiltonianDoc = parse(text)?;
    let n = doc.breakpoints.len();
    let (pieces, tail) = match (doc.pieces, doc.tail, doc.h1, doc.h2) {
        (Some(pieces), Some(tail), None, None) => (pieces.iter().map(Piece::from).collect(), Piece::from(&tail)),
        (None, None, Some(h1), Some(h2)) => {
            if h1.len() != n {
                return Err(CliError::field("h1", format!("needs {n} values (one per breakpoint), got {}", h1.len())));
            }
            if h2.len() != n {
                return Err(CliError::field("h2", format!("needs {n} values (one per breakpoint), got {}", h2.len())));
            }
            let mut pieces: Vec<Piece> = h1.iter().zip(&h2).map(|(&a, &b)| Piece::diag(a, b)).collect();
            match pieces.pop() {
                Some(tail) => (pieces, tail),
                None => return Err(CliError::field("breakpoints", "must not be empty".into())),
            }
        }
        _ => return Err(CliError::field("pieces", "give either \"pieces\" and \"tail\", or \"h1\" and \"h2\"".into())),
    };
    Hamiltonian::new(doc.breakpoints, pieces, tail).map_err(CliError::from)
}

pub fn parse_string(text: &str) -> Result<StringSpec, CliError> {
    let doc: StringDoc = parse(text)?;
    let length = doc.length.value("L")?;
    let density = doc
        .density
        .iter()
        .enumerate()
        .map(|(k, d)| Ok(DensityPiece { upto: d.upto.value(&format!("density[{k}].upto"))?, value: d.value }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let atoms = doc.atoms.iter().map(|a| Atom { pos: a.pos, mass: a.mass }).collect();
    let heavy_end = doc.heavy_end.unwrap_or(length.is_finite());
    StringSpec::new(length, density, atoms, heavy_end).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_and_full_forms_agree() {
        let a = parse_hamiltonian(r#"{"breakpoints":[0,1],"h1":[2,1],"h2":[0.5,1]}"#).unwrap();
        let b = parse_hamiltonian(
            r#"{"breakpoints":[0,1],"pieces":[{"h11":2,"h22":0.5}],"tail":{"h11":1,"h12":0,"h22":1}}"#,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn diagnostics() {
        let e = parse_hamiltonian("{\"breakpoints\":[0,1],\n\"h1\":[2,").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }), "{e}");
        let e = parse_hamiltonian(r#"{"breakpoints":[0,1],"h1":[2],"h2":[1,1]}"#).unwrap_err();
        assert!(e.to_string().contains("h1"));
        let e = parse_hamiltonian(r#"{"breakpoints":[0],"h1":[1],"h2":[1],"extra":1}"#).unwrap_err();
        assert!(e.to_string().contains("extra"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn strings() {
        let s = parse_string(r#"{"L":"inf","atoms":[{"pos":1,"mass":1}]}"#).unwrap();
        assert_eq!(s.atoms().len(), 1);
        assert!(!s.heavy_end());
        let s = parse_string(r#"{"L":2,"density":[{"upto":2,"value":1}]}"#).unwrap();
        assert!(s.heavy_end());
        let e = parse_string(r#"{"L":"infinity"}"#).unwrap_err();
        assert!(e.to_string().contains("L"));
    }
}
