//! Lazy enumeration of derivations of a goal, in nondecreasing order of
//! the goal's counter.
//!
//! A search state is a partial derivation given by the productions chosen
//! so far in preorder plus a stack of open premisses. Its priority is the
//! counter accumulated so far plus the least counters of the open
//! premisses, which never overestimates, so complete derivations come out
//! sorted by counter.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::rc::Rc;

use super::analysis::{materialize, Analysis, Plan};
use super::derivation::Derivation;
use super::saturate::{ClassId, Hypergraph};
use super::SearchConfig;
use crate::term::TermStore;

/// The classes on the branch above an open premiss.
struct Branch {
    class: ClassId,
    parent: Option<Rc<Branch>>,
}

fn occurrences(branch: &Option<Rc<Branch>>, class: ClassId) -> usize {
    let mut n = 0;
    let mut cur = branch.as_ref();
    while let Some(b) = cur {
        if b.class == class {
            n += 1;
        }
        cur = b.parent.as_ref();
    }
    n
}

struct Choices {
    production: usize,
    previous: Option<Rc<Choices>>,
}

struct State {
    bound: u64,
    nodes: usize,
    seq: u64,
    choices: Option<Rc<Choices>>,
    open: Vec<(ClassId, Option<Rc<Branch>>)>,
    lower: u64,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for State {}
impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for State {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}
impl State {
    /// Smallest bound first, then the state closest to completion, then
    /// the most recent one, which makes ties behave depth-first.
    fn key(&self) -> (Reverse<u64>, Reverse<usize>, u64) {
        (Reverse(self.bound), Reverse(self.open.len()), self.seq)
    }
}

/// Derivations of one goal class, produced on demand.
pub struct DerivationStream<'s> {
    store: &'s TermStore,
    graph: Hypergraph,
    analysis: Analysis,
    cap: usize,
    max_nodes: usize,
    max_frontier: usize,
    heap: BinaryHeap<State>,
    seq: u64,
    truncated: bool,
}

impl<'s> DerivationStream<'s> {
    pub(crate) fn new(
        store: &'s TermStore,
        graph: Hypergraph,
        analysis: Analysis,
        goal: Option<ClassId>,
        config: &SearchConfig,
    ) -> Self {
        let truncated = graph.truncated.is_some();
        let mut stream = DerivationStream {
            store,
            graph,
            analysis,
            cap: config.branch_occurrence_cap,
            max_nodes: config.max_derivation_nodes,
            max_frontier: config.max_search_frontier,
            heap: BinaryHeap::new(),
            seq: 0,
            truncated,
        };
        if let Some(g) = goal {
            if let Some(bound) = stream.analysis.min[g] {
                stream.heap.push(State {
                    bound,
                    nodes: 0,
                    seq: 0,
                    choices: None,
                    open: vec![(g, None)],
                    lower: 0,
                });
            }
        }
        stream
    }

    /// Whether some limit stopped the enumeration from being exhaustive.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn rebuild_plan(&self, choices: &Option<Rc<Choices>>) -> Plan {
        let mut seq = Vec::new();
        let mut cur = choices.as_ref();
        while let Some(c) = cur {
            seq.push(c.production);
            cur = c.previous.as_ref();
        }
        seq.reverse();
        let mut it = seq.into_iter();
        fn build(graph: &Hypergraph, it: &mut impl Iterator<Item = usize>) -> Plan {
            let p = it.next().expect("one production per node");
            let children = graph.productions[p].premisses.iter().map(|_| build(graph, it)).collect();
            Plan { production: p, children }
        }
        build(&self.graph, &mut it)
    }
}

impl Iterator for DerivationStream<'_> {
    type Item = Derivation;

    fn next(&mut self) -> Option<Derivation> {
        while let Some(mut state) = self.heap.pop() {
            let Some((class, branch)) = state.open.pop() else {
                let plan = self.rebuild_plan(&state.choices);
                match materialize(self.store, &self.graph, &plan) {
                    Ok(d) => return Some(d),
                    Err(_) => continue,
                }
            };
            if occurrences(&branch, class) >= self.cap {
                continue;
            }
            let below = Some(Rc::new(Branch { class, parent: branch }));
            let rest_min: u64 = state.open.iter().map(|(c, _)| self.analysis.min[*c].unwrap()).sum();
            for &p in &self.graph.by_conclusion[class] {
                if !self.analysis.derivable(&self.graph, p) {
                    continue;
                }
                let prod = &self.graph.productions[p];
                let nodes = state.nodes + 1;
                if nodes + state.open.len() + prod.premisses.len() > self.max_nodes {
                    self.truncated = true;
                    continue;
                }
                let lower = state.lower + prod.weight;
                let premiss_min: u64 = prod.premisses.iter().map(|&q| self.analysis.min[q].unwrap()).sum();
                let mut open = state.open.clone();
                for &q in prod.premisses.iter().rev() {
                    open.push((q, below.clone()));
                }
                self.seq += 1;
                self.heap.push(State {
                    bound: lower + rest_min + premiss_min,
                    nodes,
                    seq: self.seq,
                    choices: Some(Rc::new(Choices {
                        production: p,
                        previous: state.choices.clone(),
                    })),
                    open,
                    lower,
                });
            }
            state.open.clear();
            if self.heap.len() > self.max_frontier {
                self.truncated = true;
                self.heap.clear();
                return None;
            }
        }
        None
    }
}
