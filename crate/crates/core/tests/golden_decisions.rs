mod common;

use std::time::Instant;

use finhors::{decide_finiteness, Decision, SearchConfig};

fn decide(path: &str) -> Decision {
    let elab = common::load(path);
    let start = Instant::now();
    let d = decide_finiteness(&elab.store, elab.root, &SearchConfig::default()).unwrap();
    eprintln!("{path}: {:?} in {:?}", short(&d), start.elapsed());
    d
}

fn short(d: &Decision) -> String {
    match d {
        Decision::Finite { root_derivable, max_counter } => format!("Finite({root_derivable}, {max_counter})"),
        Decision::Infinite { pump, .. } => format!("Infinite({} vs {})", pump.ancestor.counter, pump.descendant.counter),
        Decision::Inconclusive { reason } => format!("Inconclusive({reason})"),
    }
}

fn infinite(d: &Decision) -> bool {
    matches!(d, Decision::Infinite { .. })
}

fn finite(d: &Decision) -> bool {
    matches!(d, Decision::Finite { .. })
}

#[test]
fn single_leaf() {
    assert!(finite(&decide("e")));
}

#[test]
fn ground_loop() {
    assert!(infinite(&decide("zloop")));
}

#[test]
fn growing_argument() {
    assert!(infinite(&decide("nloop")));
}

#[test]
fn divergence() {
    assert!(matches!(decide("diverge"), Decision::Finite { root_derivable: false, .. }));
}

#[test]
fn doubling_unary() {
    assert!(infinite(&decide("doubling_unary")));
}

#[test]
fn doubling_binary() {
    assert!(infinite(&decide("doubling_binary")));
}

#[test]
fn identity_iterated() {
    assert!(finite(&decide("identity_iterated")));
}

#[test]
fn discarded_argument() {
    assert!(finite(&decide("discarded_argument")));
}
