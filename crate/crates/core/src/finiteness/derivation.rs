use std::collections::HashMap;
use std::fmt;

use crate::oracle::RankedTree;
use crate::term::{NodeKind, TermStore};
use crate::types::{
    markers_of, rule_app, rule_br, rule_con, rule_lambda, rule_var, FullType, Judgment, JudgmentClass, OrderSet,
    TypeError,
};

/// Which rule concluded a derivation node, with the rule's free parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Br { which: u8 },
    Var { stored: FullType },
    Lambda,
    Con { leaf_markers: OrderSet },
    App,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Br { which } => write!(f, "br{which}"),
            Rule::Var { .. } => write!(f, "var"),
            Rule::Lambda => write!(f, "lambda"),
            Rule::Con { .. } => write!(f, "con"),
            Rule::App => write!(f, "app"),
        }
    }
}

/// A derivation tree. Premisses are ordered as the rules expect them: the
/// operator first for applications, arguments in order for constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub conclusion: Judgment,
    pub rule: Rule,
    pub premisses: Vec<Derivation>,
}

/// Two nodes of one derivation, one above the other, with the same class
/// and different counters. Paths are premiss indices from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pump {
    pub ancestor: Judgment,
    pub descendant: Judgment,
    pub ancestor_path: Vec<usize>,
    pub descendant_path: Vec<usize>,
}

impl Derivation {
    /// Applies this node's rule to the given premisses, reusing the
    /// node's environment, subject and parameters.
    pub fn apply(&self, store: &TermStore, premisses: &[Judgment]) -> Result<Judgment, TypeError> {
        let c = &self.conclusion;
        let arity_error = || TypeError::ShapeMismatch(format!("{} with {} premisses", self.rule, premisses.len()));
        match &self.rule {
            Rule::Br { which } => {
                let [p] = premisses else { return Err(arity_error()) };
                rule_br(store, c.subject, *which, p)
            }
            Rule::Var { stored } => {
                if !premisses.is_empty() {
                    return Err(arity_error());
                }
                rule_var(store, &c.env, c.subject, stored, c.fulltype.order, c.fulltype.markers)
            }
            Rule::Lambda => {
                let [p] = premisses else { return Err(arity_error()) };
                rule_lambda(store, &c.env, c.subject, p)
            }
            Rule::Con { leaf_markers } => {
                rule_con(store, &c.env, c.subject, c.fulltype.order, *leaf_markers, premisses)
            }
            Rule::App => {
                let Some((op, operands)) = premisses.split_first() else {
                    return Err(arity_error());
                };
                rule_app(store, &c.env, c.subject, op, operands)
            }
        }
    }

    /// Recomputes every conclusion bottom-up through the rule constructors.
    pub fn rebuild(&self, store: &TermStore) -> Result<Derivation, TypeError> {
        let premisses = self
            .premisses
            .iter()
            .map(|p| p.rebuild(store))
            .collect::<Result<Vec<_>, _>>()?;
        let judgments: Vec<Judgment> = premisses.iter().map(|p| p.conclusion.clone()).collect();
        let conclusion = self.apply(store, &judgments)?;
        Ok(Derivation {
            conclusion,
            rule: self.rule.clone(),
            premisses,
        })
    }

    /// Checks that every node is exactly what its rule produces.
    pub fn check(&self, store: &TermStore) -> Result<(), TypeError> {
        let rebuilt = self.rebuild(store)?;
        if rebuilt != *self {
            return Err(TypeError::PreconditionViolation(
                "a stored conclusion differs from what its rule derives".into(),
            ));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        1 + self.premisses.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.premisses.iter().map(Derivation::depth).max().unwrap_or(0)
    }

    /// All conclusions in preorder.
    pub fn judgments(&self) -> Vec<&Judgment> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            out.push(&d.conclusion);
            stack.extend(d.premisses.iter().rev());
        }
        out
    }

    pub fn at(&self, path: &[usize]) -> Option<&Derivation> {
        path.iter().try_fold(self, |d, &i| d.premisses.get(i))
    }

    /// Largest number of times one class occurs on a root-to-leaf branch.
    pub fn max_branch_multiplicity(&self) -> usize {
        fn walk(d: &Derivation, counts: &mut HashMap<JudgmentClass, usize>) -> usize {
            let class = d.conclusion.class();
            let n = {
                let e = counts.entry(class.clone()).or_insert(0);
                *e += 1;
                *e
            };
            let below = d.premisses.iter().map(|p| walk(p, counts)).max().unwrap_or(0);
            *counts.get_mut(&class).unwrap() -= 1;
            n.max(below)
        }
        walk(self, &mut HashMap::new())
    }

    /// The restrictions defining the searched derivation space: no class
    /// more than `cap` times on a branch, distinct operand classes, and
    /// environments mentioning only variables of the subject.
    pub fn within_search_space(&self, store: &TermStore, cap: usize) -> bool {
        if self.max_branch_multiplicity() > cap {
            return false;
        }
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            let free = store.free_vars(d.conclusion.subject);
            if d.conclusion.env.vars().any(|v| !free.contains(&v)) {
                return false;
            }
            if d.rule == Rule::App {
                let mut classes: Vec<JudgmentClass> = d.premisses[1..].iter().map(|p| p.conclusion.class()).collect();
                classes.sort();
                if classes.windows(2).any(|w| w[0] == w[1]) {
                    return false;
                }
            }
            stack.extend(d.premisses.iter());
        }
        true
    }
}

/// The first pump in root-to-leaf, leftmost order: nodes are visited in
/// preorder and each is compared with its ancestors from the root down.
pub fn detect_pump(d: &Derivation) -> Option<Pump> {
    fn walk<'a>(
        d: &'a Derivation,
        path: &mut Vec<usize>,
        branch: &mut Vec<(&'a Judgment, Vec<usize>)>,
    ) -> Option<Pump> {
        let here = &d.conclusion;
        for (anc, anc_path) in branch.iter() {
            if anc.env == here.env
                && anc.subject == here.subject
                && anc.fulltype == here.fulltype
                && anc.counter != here.counter
            {
                return Some(Pump {
                    ancestor: (*anc).clone(),
                    descendant: here.clone(),
                    ancestor_path: anc_path.clone(),
                    descendant_path: path.clone(),
                });
            }
        }
        branch.push((here, path.clone()));
        for (i, p) in d.premisses.iter().enumerate() {
            path.push(i);
            let found = walk(p, path, branch);
            path.pop();
            if found.is_some() {
                return found;
            }
        }
        branch.pop();
        None
    }
    walk(d, &mut Vec::new(), &mut Vec::new())
}

/// Replaces the descendant subtree of `pump` by a copy of the ancestor
/// subtree and recomputes the conclusions above it.
pub fn splice(store: &TermStore, d: &Derivation, pump: &Pump) -> Result<Derivation, TypeError> {
    let bad = || TypeError::ShapeMismatch("pump paths do not fit the derivation".into());
    if !pump.descendant_path.starts_with(&pump.ancestor_path) || pump.descendant_path == pump.ancestor_path {
        return Err(bad());
    }
    let upper = d.at(&pump.ancestor_path).ok_or_else(bad)?.clone();
    let mut out = d.clone();
    let mut slot = &mut out;
    for &i in &pump.descendant_path {
        slot = slot.premisses.get_mut(i).ok_or_else(bad)?;
    }
    *slot = upper;
    out.rebuild(store)
}

/// The tree generated by an order-0 derivation: constants become nodes and
/// branch choices follow the derived child.
pub fn extract_tree_order0(store: &TermStore, d: &Derivation) -> Result<RankedTree, TypeError> {
    if d.conclusion.fulltype.order != 0 || !d.conclusion.env.is_empty() {
        return Err(TypeError::PreconditionViolation(
            "tree extraction needs a closed order-0 derivation".into(),
        ));
    }
    match &d.rule {
        Rule::Br { .. } => extract_tree_order0(store, &d.premisses[0]),
        Rule::Con { .. } => {
            let NodeKind::Symbol { symbol, .. } = store.kind(d.conclusion.subject) else {
                unreachable!("constant rule on a non-symbol")
            };
            let children = d
                .premisses
                .iter()
                .map(|p| extract_tree_order0(store, p))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RankedTree::node(&store.symbol(*symbol).name, children))
        }
        other => Err(TypeError::PreconditionViolation(format!(
            "rule {other} cannot occur in an order-0 derivation"
        ))),
    }
}

/// A judgment whose top order carries no marker and whose subject has
/// order below the top has counter 0.
pub fn counter_vanishes_without_top_marker(store: &TermStore, j: &Judgment) -> bool {
    let m = j.fulltype.order;
    if m == 0 || j.fulltype.markers.contains(m - 1) || store.order(j.subject) > m - 1 {
        return true;
    }
    j.counter == 0
}

/// Marker orders supplied by the environment reappear in the full type,
/// and different variables supply disjoint marker orders.
pub fn env_markers_accounted(j: &Judgment) -> bool {
    markers_of(&j.env).is_subset(j.fulltype.markers) && j.env.markers_disjoint_across_vars()
}
