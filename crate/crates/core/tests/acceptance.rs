//! The acceptance run: one PASS or FAIL line per criterion, nonzero exit
//! status if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use common::comp_laws;
use common::*;
use finhors::finiteness::{counter_vanishes_without_top_marker, env_markers_accounted};
use finhors::types::comp;
use finhors::{
    decide_finiteness, detect_pump, enumerate_language, extract_tree_order0, root_goal, search_derivations, splice,
    Budget, Decision, Derivation, Elaborated, JudgmentClass, OrderSet, SearchConfig, TypeEnv,
};
use proptest::test_runner::{Config, TestError, TestRunner};

type Outcome = Result<String, String>;

/// A program with the derivations produced for it.
struct Run {
    name: &'static str,
    el: Elaborated,
    decision: Decision,
    derivations: Vec<Derivation>,
}

const EXPECTED: [(&str, bool); 8] = [
    ("doubling_unary", true),
    ("doubling_binary", true),
    ("identity_iterated", false),
    ("discarded_argument", false),
    ("e", false),
    ("zloop", true),
    ("nloop", true),
    ("diverge", false),
];

/// Derivations drawn from the stream of every golden program for the
/// invariant checks.
const STREAM_SAMPLE: usize = 200;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_decisions(runs: &mut Vec<Run>) -> Outcome {
    let config = SearchConfig::default();
    let mut failures = Vec::new();
    for (name, infinite) in EXPECTED {
        let el = load(name);
        let decision = decide_finiteness(&el.store, el.root, &config).map_err(|e| format!("{name}: {e}"))?;
        let got_infinite = matches!(decision, Decision::Infinite { .. });
        let finite = matches!(decision, Decision::Finite { .. });
        if got_infinite != infinite || (!infinite && !finite) {
            failures.push(format!("{name}: {decision:?}"));
        }
        if name == "diverge" && !matches!(decision, Decision::Finite { root_derivable: false, .. }) {
            failures.push("diverge: goal should be underivable".into());
        }
        let goal = root_goal(&el.store, el.root);
        let derivations: Vec<Derivation> = search_derivations(&el.store, &goal, &config)
            .map_err(|e| format!("{name}: {e}"))?
            .take(STREAM_SAMPLE)
            .collect();
        runs.push(Run {
            name,
            el,
            decision,
            derivations,
        });
    }
    for run in runs.iter_mut().filter(|r| matches!(r.decision, Decision::Infinite { .. })) {
        // the doubling programs only reach their third tree size beyond the default bound
        let (budget, needed) = match run.name {
            "zloop" | "nloop" => (Budget::default(), 5),
            _ => (Budget::new(31, 400), 3),
        };
        let sizes = enumerate_language(&mut run.el.store, run.el.root, budget).sizes();
        if sizes.len() < needed {
            failures.push(format!("{}: oracle sizes {sizes:?}", run.name));
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} programs decided as expected", EXPECTED.len()))
}

/// Whether some branch holds `class` at counter `low` below the same class
/// at counter `high`.
fn stacked(d: &Derivation, class: &JudgmentClass, high: u64, low: u64, above: bool) -> bool {
    let here = d.conclusion.class() == *class;
    if here && above && d.conclusion.counter == low {
        return true;
    }
    let above = above || (here && d.conclusion.counter == high);
    d.premisses.iter().any(|p| stacked(p, class, high, low, above))
}

fn doubling_reproduction(out: &mut Vec<Derivation>) -> Outcome {
    let el = load("doubling_unary");
    let s = &el.store;
    let config = SearchConfig::default();
    let goal = root_goal(s, el.root);
    let r_class = JudgmentClass {
        env: TypeEnv::empty(),
        subject: el.nonterminals[0],
        fulltype: recursion_type(),
    };
    let mut counters = BTreeSet::new();
    let mut pumped = false;
    for d in search_derivations(s, &goal, &config).map_err(|e| e.to_string())?.take(20_000) {
        if d.conclusion.counter > 4 {
            break;
        }
        ensure(d.conclusion.class() == goal, || "a derivation of another class".into())?;
        counters.insert(d.conclusion.counter);
        if !pumped && stacked(&d, &r_class, 2, 1, false) && detect_pump(&d).is_some() {
            pumped = true;
        }
        out.push(d);
    }
    ensure([2, 3, 4].iter().all(|c| counters.contains(c)), || format!("counters seen {counters:?}"))?;
    ensure(pumped, || "no pumped derivation with the recursion at 2 over 1".into())?;
    Ok(format!("{} derivations, counters {counters:?}", out.len()))
}

fn comp_examples() -> Outcome {
    let set = |xs: &[u32]| -> OrderSet { xs.iter().copied().collect() };
    let cases = [
        (2, set(&[0]), vec![(set(&[0]), 0), (set(&[]), 0)], (set(&[1]), 0)),
        (2, set(&[0, 1]), vec![(set(&[0]), 0), (set(&[]), 0)], (set(&[]), 1)),
        (2, set(&[0, 1]), vec![(set(&[]), 0), (set(&[1]), 0)], (set(&[]), 1)),
        (0, set(&[]), vec![(set(&[]), 1), (set(&[]), 4), (set(&[]), 7)], (set(&[]), 12)),
    ];
    for (m, markers, inputs, expected) in &cases {
        let got = comp(*m, *markers, inputs).map_err(|e| e.to_string())?;
        ensure(got == *expected, || format!("comp({m}, {markers}, {inputs:?}) = {got:?}"))?;
    }
    Ok(format!("{} examples", cases.len()))
}

fn comp_laws() -> Outcome {
    use proptest::prelude::*;
    const CASES: u32 = 10_000;
    let runner = || {
        TestRunner::new(Config {
            cases: CASES,
            failure_persistence: None,
            ..Config::default()
        })
    };
    fn named<T: std::fmt::Debug>(name: &str, r: Result<(), TestError<T>>) -> Result<(), String> {
        r.map_err(|e| format!("{name}: {e}"))
    }
    named(
        "additivity",
        runner().run(&(comp_laws::case(), prop::collection::vec(0u64..50, 6)), |((m, mk, i), x)| {
            comp_laws::additive(m, mk, &i, &x)
        }),
    )?;
    named(
        "flag-free inputs",
        runner().run(
            &(0u32..=5, any::<u16>(), any::<u16>(), 0u64..20, prop::collection::vec(0u64..20, 0..6)),
            |(m, b, a, e, ds)| comp_laws::flag_free_rest(m, b, a, e, &ds),
        ),
    )?;
    named(
        "order up",
        runner().run(&comp_laws::strict_case(4), |(m, mk, i)| comp_laws::lift(m, mk, &i)),
    )?;
    named(
        "order down",
        runner().run(&(comp_laws::strict_case(5), prop::collection::vec(0u64..5, 6)), |((m, mk, i), s)| {
            comp_laws::lower(m, mk, &i, &s)
        }),
    )?;
    Ok(format!("4 laws x {CASES} cases"))
}

fn judgment_invariants(runs: &[Run], doubling: &[Derivation]) -> Outcome {
    let unary = runs.iter().find(|r| r.name == "doubling_unary").expect("decided above");
    let mut all: Vec<(&Elaborated, &Derivation)> = Vec::new();
    for run in runs {
        if let Decision::Infinite { derivation, .. } = &run.decision {
            all.push((&run.el, derivation));
        }
        all.extend(run.derivations.iter().map(|d| (&run.el, d)));
    }
    all.extend(doubling.iter().map(|d| (&unary.el, d)));
    let mut judgments = 0usize;
    for (el, d) in &all {
        d.check(&el.store).map_err(|e| format!("replay: {e}"))?;
        ensure(d.within_search_space(&el.store, SearchConfig::default().branch_occurrence_cap), || {
            "a derivation outside the searched space".into()
        })?;
        for j in d.judgments() {
            judgments += 1;
            ensure(counter_vanishes_without_top_marker(&el.store, j), || {
                format!("positive counter without the top marker: {j:?}")
            })?;
            ensure(env_markers_accounted(j), || format!("environment markers unaccounted: {j:?}"))?;
        }
    }
    Ok(format!("{judgments} judgments in {} derivations", all.len()))
}

fn splice_check(runs: &[Run]) -> Outcome {
    let mut n = 0;
    for run in runs {
        let Decision::Infinite { pump, derivation } = &run.decision else {
            continue;
        };
        let s = &run.el.store;
        let spliced = splice(s, derivation, pump).map_err(|e| format!("{}: {e}", run.name))?;
        spliced.check(s).map_err(|e| format!("{}: {e}", run.name))?;
        let gain = pump.ancestor.counter.abs_diff(pump.descendant.counter);
        ensure(spliced.conclusion.counter == derivation.conclusion.counter + gain, || {
            format!(
                "{}: {} became {}, gain {gain}",
                run.name, derivation.conclusion.counter, spliced.conclusion.counter
            )
        })?;
        n += 1;
    }
    Ok(format!("{n} pumps spliced"))
}

fn order0_witnesses() -> Outcome {
    let mut el = load("zloop");
    let goal = root_goal(&el.store, el.root);
    let wanted = [1u64, 2, 3];
    let mut trees = Vec::new();
    for d in search_derivations(&el.store, &goal, &SearchConfig::default())
        .map_err(|e| e.to_string())?
        .take(1_000)
    {
        let c = d.conclusion.counter;
        if c > 3 {
            break;
        }
        if wanted.contains(&c) && !trees.iter().any(|(k, _)| *k == c) {
            let t = extract_tree_order0(&el.store, &d).map_err(|e| e.to_string())?;
            trees.push((c, t));
        }
    }
    let sample = enumerate_language(&mut el.store, el.root, Budget::default());
    for c in wanted {
        let (_, t) = trees.iter().find(|(k, _)| *k == c).ok_or(format!("no derivation at {c}"))?;
        ensure(t.size() as u64 == c, || format!("{t} has size {} at counter {c}", t.size()))?;
        ensure(sample.trees.contains(t), || format!("{t} is not in the oracle sample"))?;
    }
    let shown: Vec<String> = trees.iter().map(|(_, t)| t.to_string()).collect();
    Ok(shown.join(", "))
}

fn oracle_sizes() -> Outcome {
    let mut found = Vec::new();
    for (name, expected) in [("doubling_unary", vec![2, 3, 5, 9]), ("identity_iterated", vec![1])] {
        let mut el = load(name);
        let sizes = enumerate_language(&mut el.store, el.root, Budget::default()).sizes();
        let expected: BTreeSet<usize> = expected.into_iter().collect();
        ensure(sizes == expected, || format!("{name}: {sizes:?}"))?;
        found.push(format!("{name} {sizes:?}"));
    }
    Ok(found.join(", "))
}

fn report(number: usize, title: &str, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    match &outcome {
        Ok(detail) => println!("criterion {number} ({title}): PASS [{elapsed:.2?}] {detail}"),
        Err(detail) => println!("criterion {number} ({title}): FAIL [{elapsed:.2?}] {detail}"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut runs = Vec::new();
    let mut doubling = Vec::new();
    let results = [
        report(1, "golden decisions", || golden_decisions(&mut runs)),
        report(2, "doubling derivations", || doubling_reproduction(&mut doubling)),
        report(3, "comp examples", comp_examples),
        report(4, "comp laws", comp_laws),
        report(5, "judgment invariants", || judgment_invariants(&runs, &doubling)),
        report(6, "pump splicing", || splice_check(&runs)),
        report(7, "order-0 witnesses", order0_witnesses),
        report(8, "oracle sizes", oracle_sizes),
    ];
    let passed = results.iter().filter(|ok| **ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
