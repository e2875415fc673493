//! Sorts, surface syntax, and the interned term graph.
//!
//! Nonterminal equations are read directly as regular infinitary λ-terms: a
//! nonterminal occurrence is the node of its body's root. This is an
//! equivalent presentation of λY-terms and keeps the set of subterms small.

mod parse;
mod sort;
mod store;

pub use parse::{parse_program, Expr, Nonterminal, ParseError, Pos, Program, Symbol, SymbolId, BR};
pub use sort::{ord_sort, Sort};
pub use store::{elaborate, Elaborated, NodeId, NodeKind, TermStore};
