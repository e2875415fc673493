#![allow(dead_code)]

pub mod comp_laws;

use std::collections::BTreeSet;

use finhors::term::NodeKind;
use finhors::{elaborate, parse_program, Elaborated, FullType, IType, NodeId, OrderSet, TermStore};

pub fn program_text(name: &str) -> String {
    let path = format!("{}/../../programs/{name}.hors", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn load(name: &str) -> Elaborated {
    elaborate(&parse_program(&program_text(name)).expect("sample program parses"))
}

pub fn set(xs: &[u32]) -> OrderSet {
    xs.iter().copied().collect()
}

pub fn ground(k: u32, flags: &[u32], markers: &[u32]) -> FullType {
    FullType::new(k, set(flags), set(markers), IType::Ground).unwrap()
}

pub fn arrow(k: u32, flags: &[u32], markers: &[u32], args: &[&FullType]) -> FullType {
    let args: BTreeSet<FullType> = args.iter().map(|t| (*t).clone()).collect();
    FullType::new(k, set(flags), set(markers), IType::arrow(args, IType::Ground)).unwrap()
}

/// (1, ∅, {0}, o): an order-1 argument carrying the order-0 marker.
pub fn marked_ground() -> FullType {
    ground(1, &[], &[0])
}

/// The argument type with an order-1 flag and no markers.
pub fn flagged_fn() -> FullType {
    arrow(2, &[1], &[], &[&marked_ground()])
}

/// The argument type carrying the order-1 marker.
pub fn marked_fn() -> FullType {
    arrow(2, &[], &[1], &[&marked_ground()])
}

pub fn recursion_type() -> FullType {
    arrow(2, &[], &[0], &[&flagged_fn(), &marked_fn()])
}

pub fn operator(store: &TermStore, app: NodeId) -> NodeId {
    match store.kind(app) {
        NodeKind::App { operator, .. } => *operator,
        other => panic!("not an application: {other:?}"),
    }
}

pub fn operand(store: &TermStore, app: NodeId) -> NodeId {
    match store.kind(app) {
        NodeKind::App { operand, .. } => *operand,
        other => panic!("not an application: {other:?}"),
    }
}

pub fn body(store: &TermStore, abs: NodeId) -> NodeId {
    match store.kind(abs) {
        NodeKind::Abs { body } => *body,
        other => panic!("not an abstraction: {other:?}"),
    }
}

pub fn arg(store: &TermStore, node: NodeId, i: usize) -> NodeId {
    match store.kind(node) {
        NodeKind::Symbol { args, .. } => args[i],
        other => panic!("not a symbol application: {other:?}"),
    }
}
