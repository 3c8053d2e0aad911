//! The built-in example set, compiled into the binary.

use canon_szego_core::hamiltonian::Hamiltonian;
use canon_szego_core::string::{string_to_hamiltonian, StringSpec};

use crate::input::{parse_hamiltonian, parse_string};

/// Geometric string truncated after this many stretches.
pub const GEOMETRIC_STRETCHES: usize = 8;

pub const CONSTANT_JSON: &str = include_str!("../corpus/constant.json");
pub const BUMP_JSON: &str = include_str!("../corpus/bump.json");
pub const STIELTJES_JSON: &str = include_str!("../corpus/stieltjes.json");
pub const GEOMETRIC_JSON: &str = include_str!("../corpus/geometric.json");

/// `diag(2, 8)` everywhere.
pub fn constant() -> Hamiltonian {
    parse_hamiltonian(CONSTANT_JSON).expect("built-in corpus parses")
}

/// `diag(2, 1/2)` on `[0, 1)`, then the identity.
pub fn bump() -> Hamiltonian {
    parse_hamiltonian(BUMP_JSON).expect("built-in corpus parses")
}

/// One unit mass at distance 1 from the origin, nothing else.
pub fn single_mass() -> StringSpec {
    parse_string(STIELTJES_JSON).expect("built-in corpus parses")
}

pub fn single_mass_image() -> Hamiltonian {
    string_to_hamiltonian(&single_mass()).expect("valid string").into_inner()
}

pub fn geometric() -> StringSpec {
    parse_string(GEOMETRIC_JSON).expect("built-in corpus parses")
}
