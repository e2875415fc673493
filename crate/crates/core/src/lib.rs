//! Deciding whether a nondeterministic higher-order recursion scheme generates
//! finitely many trees.
//!
//! The crate is organised bottom-up:
//!
//! * [`term`] parses programs and elaborates them into an interned, possibly
//!   cyclic term graph;
//! * [`oracle`] head-reduces terms and enumerates small trees of the language
//!   by brute force;
//! * [`types`] is the intersection type system with flags and markers;
//! * [`finiteness`] searches derivations and decides finiteness.

pub mod finiteness;
pub mod oracle;
pub mod term;
pub mod types;

pub use finiteness::{
    decide_finiteness, detect_pump, extract_tree_order0, min_counter_table, root_goal,
    search_derivations, splice, Decision, Derivation, FinitenessError, Pump, Rule, SearchConfig,
};
pub use oracle::{enumerate_language, Budget, LanguageSample, RankedTree};
pub use term::{elaborate, parse_program, Elaborated, NodeId, Program, Sort, TermStore};
pub use types::{FullType, IType, Judgment, JudgmentClass, OrderSet, TypeEnv};
