//! Properties of the derivation stream on the sample programs.

mod common;

use common::load;
use finhors::{min_counter_table, root_goal, search_derivations, Derivation, SearchConfig};

const PROGRAMS: [&str; 8] = ["e", "doubling_unary", "doubling_binary", "identity_iterated", "discarded_argument", "zloop", "nloop", "diverge"];

fn first(name: &str, n: usize) -> Vec<Derivation> {
    let el = load(name);
    let goal = root_goal(&el.store, el.root);
    search_derivations(&el.store, &goal, &SearchConfig::default())
        .unwrap()
        .take(n)
        .collect()
}

fn monotone_and_uniform(d: &Derivation) -> bool {
    d.premisses.iter().all(|p| {
        p.conclusion.counter <= d.conclusion.counter
            && p.conclusion.fulltype.order == d.conclusion.fulltype.order
            && monotone_and_uniform(p)
    })
}

#[test]
fn counters_come_out_sorted() {
    for name in PROGRAMS {
        let counters: Vec<u64> = first(name, 300).iter().map(|d| d.conclusion.counter).collect();
        assert!(counters.windows(2).all(|w| w[0] <= w[1]), "{name}: {counters:?}");
    }
}

#[test]
fn rules_never_lower_counters_or_change_order() {
    for name in PROGRAMS {
        for d in first(name, 300) {
            assert!(monotone_and_uniform(&d), "{name}");
        }
    }
}

#[test]
fn distinct_derivations() {
    for name in PROGRAMS {
        let ds = first(name, 300);
        for (i, a) in ds.iter().enumerate() {
            assert!(ds[i + 1..].iter().all(|b| b != a), "{name}: repeated derivation");
        }
    }
}

#[test]
fn single_leaf_has_one_derivation() {
    let ds = first("e", 10);
    assert_eq!(ds.len(), 1);
    assert_eq!(ds[0].conclusion.counter, 1);
    assert_eq!(ds[0].size(), 1);
    let el = load("e");
    let goal = root_goal(&el.store, el.root);
    let table = min_counter_table(&el.store, &goal, &SearchConfig::default()).unwrap();
    assert_eq!(table.get(&goal), Some(&1));
}

#[test]
fn identity_argument_stays_at_one() {
    let ds = first("identity_iterated", 40);
    assert!(!ds.is_empty());
    assert!(ds.iter().all(|d| d.conclusion.counter == 1));
}

#[test]
fn diverging_program_has_no_derivation() {
    assert!(first("diverge", 10).is_empty());
}

#[test]
fn doubling_starts_at_two_then_three() {
    let counters: Vec<u64> = first("doubling_unary", 50).iter().map(|d| d.conclusion.counter).collect();
    assert_eq!(counters[0], 2);
    assert!(counters.contains(&3));
}

#[test]
fn low_cap_is_rejected() {
    let el = load("doubling_unary");
    let goal = root_goal(&el.store, el.root);
    let config = SearchConfig {
        branch_occurrence_cap: 1,
        ..SearchConfig::default()
    };
    assert!(search_derivations(&el.store, &goal, &config).is_err());
}
