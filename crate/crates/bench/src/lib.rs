//! Shared setup for the benchmarks: the sample programs shipped with the
//! repository.

use finhors::{elaborate, parse_program, Elaborated};

pub const PROGRAMS: [&str; 8] = ["e", "zloop", "nloop", "diverge", "doubling_unary", "doubling_binary", "identity_iterated", "discarded_argument"];

pub fn load(name: &str) -> Elaborated {
    let path = format!("{}/../../programs/{name}.hors", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    elaborate(&parse_program(&text).expect("sample program parses"))
}
