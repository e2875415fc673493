//! Counter questions answered on the hypergraph: least counters,
//! possibly-positive classes, classes useful for a goal, strongly connected
//! components, and cycles that raise the counter.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use super::derivation::{Derivation, Rule};
use super::saturate::{ClassId, Hypergraph, Step};
use crate::term::TermStore;
use crate::types::{Judgment, TypeError};

pub(crate) struct Analysis {
    pub min: Vec<Option<u64>>,
    best: Vec<Option<usize>>,
    pub positive: Vec<bool>,
    /// Production and premiss position (if any) showing a class can be positive.
    positive_reason: Vec<Option<(usize, Option<usize>)>>,
    pub useful: Vec<bool>,
    pub component: Vec<usize>,
}

/// A derivation skeleton: a production per node.
#[derive(Clone, Debug)]
pub(crate) struct Plan {
    pub production: usize,
    pub children: Vec<Plan>,
}

impl Analysis {
    pub fn new(graph: &Hypergraph, goal: Option<ClassId>) -> Analysis {
        let n = graph.classes.len();
        let (min, best) = least_counters(graph);
        let derivable = |p: usize| graph.productions[p].premisses.iter().all(|&c| min[c].is_some());

        let mut positive = vec![false; n];
        let mut positive_reason = vec![None; n];
        loop {
            let mut changed = false;
            for (idx, p) in graph.productions.iter().enumerate() {
                if positive[p.conclusion] || !derivable(idx) {
                    continue;
                }
                let reason = if p.weight > 0 {
                    Some(None)
                } else {
                    p.premisses.iter().position(|&c| positive[c]).map(Some)
                };
                if let Some(r) = reason {
                    positive[p.conclusion] = true;
                    positive_reason[p.conclusion] = Some((idx, r));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut useful = vec![false; n];
        if let Some(g) = goal.filter(|&g| min[g].is_some()) {
            useful[g] = true;
            let mut queue = VecDeque::from([g]);
            while let Some(c) = queue.pop_front() {
                for &p in &graph.by_conclusion[c] {
                    if !derivable(p) {
                        continue;
                    }
                    for &q in &graph.productions[p].premisses {
                        if !useful[q] {
                            useful[q] = true;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }

        let component = components(graph, &useful, &min);
        Analysis {
            min,
            best,
            positive,
            positive_reason,
            useful,
            component,
        }
    }

    pub fn derivable(&self, graph: &Hypergraph, p: usize) -> bool {
        graph.productions[p].premisses.iter().all(|&c| self.min[c].is_some())
    }

    /// A useful production and premiss position lying on a cycle whose
    /// traversal raises the counter.
    pub fn gainful_edge(&self, graph: &Hypergraph) -> Option<(usize, usize)> {
        for (idx, p) in graph.productions.iter().enumerate() {
            if !self.useful[p.conclusion] || !self.derivable(graph, idx) {
                continue;
            }
            for (j, &y) in p.premisses.iter().enumerate() {
                if self.component[y] != self.component[p.conclusion] {
                    continue;
                }
                let sibling_gain = p
                    .premisses
                    .iter()
                    .enumerate()
                    .any(|(i, &z)| i != j && self.positive[z]);
                if p.weight > 0 || sibling_gain {
                    return Some((idx, j));
                }
            }
        }
        None
    }

    /// Largest counter over derivations of the goal, assuming no gainful
    /// cycle is useful.
    pub fn max_counter(&self, graph: &Hypergraph, goal: ClassId) -> u64 {
        let mut max: Vec<Option<u64>> = vec![None; graph.classes.len()];
        let relevant: Vec<usize> = (0..graph.productions.len())
            .filter(|&p| self.useful[graph.productions[p].conclusion] && self.derivable(graph, p))
            .collect();
        loop {
            let mut changed = false;
            for &idx in &relevant {
                let p = &graph.productions[idx];
                let mut total = Some(p.weight);
                for &c in &p.premisses {
                    total = match (total, max[c]) {
                        (Some(t), Some(v)) => Some(t.saturating_add(v)),
                        _ => None,
                    };
                }
                if let Some(t) = total {
                    if max[p.conclusion].is_none_or(|old| t > old) {
                        max[p.conclusion] = Some(t);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        max[goal].unwrap_or(0)
    }

    /// The least-counter derivation skeleton of a derivable class.
    pub fn min_plan(&self, graph: &Hypergraph, c: ClassId) -> Plan {
        let p = self.best[c].expect("class is derivable");
        Plan {
            production: p,
            children: graph.productions[p]
                .premisses
                .iter()
                .map(|&q| self.min_plan(graph, q))
                .collect(),
        }
    }

    fn positive_plan(&self, graph: &Hypergraph, c: ClassId) -> Plan {
        let (p, pos) = self.positive_reason[c].expect("class can be positive");
        Plan {
            production: p,
            children: graph.productions[p]
                .premisses
                .iter()
                .enumerate()
                .map(|(i, &q)| {
                    if Some(i) == pos {
                        self.positive_plan(graph, q)
                    } else {
                        self.min_plan(graph, q)
                    }
                })
                .collect(),
        }
    }

    /// Shortest chain of productions from `from` down to `to` using only
    /// derivable productions, optionally staying in one component. Returns
    /// (production, premiss position) steps.
    fn chain(&self, graph: &Hypergraph, from: ClassId, to: ClassId, within: Option<usize>) -> Option<Vec<(usize, usize)>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut prev: HashMap<ClassId, (ClassId, usize, usize)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            for &p in &graph.by_conclusion[c] {
                if !self.derivable(graph, p) {
                    continue;
                }
                for (j, &q) in graph.productions[p].premisses.iter().enumerate() {
                    if within.is_some_and(|s| self.component[q] != s) || q == from || prev.contains_key(&q) {
                        continue;
                    }
                    prev.insert(q, (c, p, j));
                    if q == to {
                        let mut steps = Vec::new();
                        let mut cur = to;
                        while cur != from {
                            let (parent, p, j) = prev[&cur];
                            steps.push((p, j));
                            cur = parent;
                        }
                        steps.reverse();
                        return Some(steps);
                    }
                    queue.push_back(q);
                }
            }
        }
        None
    }

    /// Follows `steps`, filling side premisses with least derivations, and
    /// puts `tail` at the end.
    fn along(&self, graph: &Hypergraph, steps: &[(usize, usize)], tail: Plan) -> Plan {
        let mut plan = tail;
        for &(p, j) in steps.iter().rev() {
            let children = graph.productions[p]
                .premisses
                .iter()
                .enumerate()
                .map(|(i, &q)| if i == j { plan.clone() } else { self.min_plan(graph, q) })
                .collect();
            plan = Plan { production: p, children };
        }
        plan
    }

    /// A skeleton for goal that passes the gainful cycle through
    /// `edge` `rounds` times.
    pub fn pump_plan(&self, graph: &Hypergraph, goal: ClassId, edge: (usize, usize), rounds: usize) -> Option<Plan> {
        let (p, j) = edge;
        let prod = &graph.productions[p];
        let top = prod.conclusion;
        let next = prod.premisses[j];
        let to_top = self.chain(graph, goal, top, None)?;
        let back = self.chain(graph, next, top, Some(self.component[top]))?;
        let gain_at = if prod.weight > 0 {
            None
        } else {
            prod.premisses
                .iter()
                .enumerate()
                .position(|(i, &z)| i != j && self.positive[z])
        };
        let mut inner = self.min_plan(graph, top);
        for _ in 0..rounds {
            let below = self.along(graph, &back, inner);
            let children = prod
                .premisses
                .iter()
                .enumerate()
                .map(|(i, &q)| {
                    if i == j {
                        below.clone()
                    } else if Some(i) == gain_at {
                        self.positive_plan(graph, q)
                    } else {
                        self.min_plan(graph, q)
                    }
                })
                .collect();
            inner = Plan { production: p, children };
        }
        Some(self.along(graph, &to_top, inner))
    }
}

/// Knuth's generalisation of Dijkstra's algorithm: counters are a weight
/// plus the sum of the premisses, so the least counter of each class is
/// settled in increasing order.
fn least_counters(graph: &Hypergraph) -> (Vec<Option<u64>>, Vec<Option<usize>>) {
    let n = graph.classes.len();
    let mut min = vec![None; n];
    let mut best = vec![None; n];
    let mut waiting: Vec<usize> = graph.productions.iter().map(|p| p.premisses.len()).collect();
    let mut uses: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, p) in graph.productions.iter().enumerate() {
        for &c in &p.premisses {
            uses[c].push(idx);
        }
    }
    let mut heap = BinaryHeap::new();
    for (idx, p) in graph.productions.iter().enumerate() {
        if p.premisses.is_empty() {
            heap.push(Reverse((p.weight, p.conclusion, idx)));
        }
    }
    while let Some(Reverse((value, c, p))) = heap.pop() {
        if min[c].is_some() {
            continue;
        }
        min[c] = Some(value);
        best[c] = Some(p);
        for &q in &uses[c] {
            waiting[q] -= 1;
            if waiting[q] == 0 {
                let prod = &graph.productions[q];
                if min[prod.conclusion].is_none() {
                    let total = prod
                        .premisses
                        .iter()
                        .fold(prod.weight, |acc, &x| acc.saturating_add(min[x].unwrap()));
                    heap.push(Reverse((total, prod.conclusion, q)));
                }
            }
        }
    }
    (min, best)
}

/// Tarjan's algorithm over useful classes, iteratively.
fn components(graph: &Hypergraph, useful: &[bool], min: &[Option<u64>]) -> Vec<usize> {
    let n = graph.classes.len();
    let succ: Vec<Vec<ClassId>> = (0..n)
        .map(|c| {
            if !useful[c] {
                return Vec::new();
            }
            graph.by_conclusion[c]
                .iter()
                .filter(|&&p| graph.productions[p].premisses.iter().all(|&q| min[q].is_some()))
                .flat_map(|&p| graph.productions[p].premisses.iter().copied())
                .collect()
        })
        .collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut next_comp = 0;
    for start in 0..n {
        if !useful[start] || index[start] != usize::MAX {
            continue;
        }
        let mut work: Vec<(ClassId, usize)> = vec![(start, 0)];
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Turns a skeleton into a derivation through the rule constructors and
/// checks each conclusion against the hypergraph.
pub(crate) fn materialize(store: &TermStore, graph: &Hypergraph, plan: &Plan) -> Result<Derivation, TypeError> {
    let prod = &graph.productions[plan.production];
    let premisses = plan
        .children
        .iter()
        .map(|c| materialize(store, graph, c))
        .collect::<Result<Vec<_>, _>>()?;
    let class = &graph.classes[prod.conclusion];
    let rule = match &prod.step {
        Step::Br(which) => Rule::Br { which: *which },
        Step::Var(stored) => Rule::Var { stored: stored.clone() },
        Step::Lambda => Rule::Lambda,
        Step::Con(leaf) => Rule::Con { leaf_markers: *leaf },
        Step::App => Rule::App,
    };
    let counter = premisses.iter().map(|p| p.conclusion.counter).sum::<u64>() + prod.weight;
    let shell = Derivation {
        conclusion: Judgment {
            env: class.env.clone(),
            subject: class.subject,
            fulltype: class.fulltype.clone(),
            counter,
        },
        rule,
        premisses: Vec::new(),
    };
    let judgments: Vec<Judgment> = premisses.iter().map(|p| p.conclusion.clone()).collect();
    let conclusion = shell.apply(store, &judgments)?;
    if conclusion != shell.conclusion {
        return Err(TypeError::PreconditionViolation(format!(
            "rule produced {} ▷ {} where {} ▷ {} was expected",
            conclusion.fulltype, conclusion.counter, shell.conclusion.fulltype, counter
        )));
    }
    Ok(Derivation {
        conclusion,
        rule: shell.rule,
        premisses,
    })
}
