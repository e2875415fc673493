//! Brute-force semantics: head reduction and bounded enumeration of the
//! tree language, used as ground truth for the decision procedure.

mod language;
mod reduce;

pub use language::{enumerate_language, tree_size, Budget, LanguageSample, RankedTree};
pub use reduce::{beta, head_reduce, shift, substitute, HeadForm, OracleError};
