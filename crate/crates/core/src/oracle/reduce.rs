use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::term::{NodeId, NodeKind, Sort, SymbolId, TermStore};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("cannot substitute a term of sort {found} for a variable of sort {expected}")]
    SortMismatch { expected: Sort, found: Sort },
}

/// Adds `delta` to every free index of `node` that is at least `cutoff`.
pub fn shift(store: &mut TermStore, node: NodeId, delta: i64, cutoff: u32) -> NodeId {
    let mut memo = HashMap::new();
    shift_rec(store, node, delta, cutoff, &mut memo)
}

fn shift_rec(
    store: &mut TermStore,
    node: NodeId,
    delta: i64,
    cutoff: u32,
    memo: &mut HashMap<(NodeId, u32), NodeId>,
) -> NodeId {
    if delta == 0 || store.free_bound(node) <= cutoff {
        return node;
    }
    if let Some(&done) = memo.get(&(node, cutoff)) {
        return done;
    }
    let out = match store.kind(node).clone() {
        NodeKind::Var { index } => {
            let moved = u32::try_from(index as i64 + delta).expect("shift below zero");
            let sort = store.sort(node).clone();
            store.mk_var(moved, sort)
        }
        NodeKind::Symbol { symbol, args } => {
            let args = args
                .into_iter()
                .map(|a| shift_rec(store, a, delta, cutoff, memo))
                .collect();
            store.mk_symbol(symbol, args)
        }
        NodeKind::App { operator, operand } => {
            let f = shift_rec(store, operator, delta, cutoff, memo);
            let a = shift_rec(store, operand, delta, cutoff, memo);
            store.mk_app(f, a)
        }
        NodeKind::Abs { body } => {
            let b = shift_rec(store, body, delta, cutoff + 1, memo);
            rebuild_abs(store, node, b)
        }
    };
    memo.insert((node, cutoff), out);
    out
}

fn rebuild_abs(store: &mut TermStore, original: NodeId, body: NodeId) -> NodeId {
    let binder = store.binder_sort(original).expect("abstraction").clone();
    let hint = store.binder_hint(original).map(str::to_string);
    let id = store.mk_abs(binder, body);
    if let Some(h) = hint {
        store.set_binder_hint(id, &h);
    }
    id
}

/// Capture-avoiding substitution in de Bruijn form: replaces the free
/// variable `var` of `body` by `value` and removes it from the context, so
/// free indices above `var` move down by one. `value` lives in that reduced
/// context and is lifted whenever it goes under a binder.
pub fn substitute(
    store: &mut TermStore,
    body: NodeId,
    var: u32,
    var_sort: &Sort,
    value: NodeId,
) -> Result<NodeId, OracleError> {
    if store.sort(value) != var_sort {
        return Err(OracleError::SortMismatch {
            expected: var_sort.clone(),
            found: store.sort(value).clone(),
        });
    }
    let mut memo = HashMap::new();
    Ok(subst_rec(store, body, var, value, 0, &mut memo))
}

fn subst_rec(
    store: &mut TermStore,
    node: NodeId,
    var: u32,
    value: NodeId,
    depth: u32,
    memo: &mut HashMap<(NodeId, u32), NodeId>,
) -> NodeId {
    if store.free_bound(node) <= var + depth {
        return node;
    }
    if let Some(&done) = memo.get(&(node, depth)) {
        return done;
    }
    let out = match store.kind(node).clone() {
        NodeKind::Var { index } => {
            let target = var + depth;
            if index == target {
                shift(store, value, depth as i64, 0)
            } else if index > target {
                let sort = store.sort(node).clone();
                store.mk_var(index - 1, sort)
            } else {
                node
            }
        }
        NodeKind::Symbol { symbol, args } => {
            let args = args
                .into_iter()
                .map(|a| subst_rec(store, a, var, value, depth, memo))
                .collect();
            store.mk_symbol(symbol, args)
        }
        NodeKind::App { operator, operand } => {
            let f = subst_rec(store, operator, var, value, depth, memo);
            let a = subst_rec(store, operand, var, value, depth, memo);
            store.mk_app(f, a)
        }
        NodeKind::Abs { body } => {
            let b = subst_rec(store, body, var, value, depth + 1, memo);
            rebuild_abs(store, node, b)
        }
    };
    memo.insert((node, depth), out);
    out
}

/// Contracts the redex `(\x. body) argument`.
pub fn beta(store: &mut TermStore, abstraction: NodeId, argument: NodeId) -> NodeId {
    let NodeKind::Abs { body } = *store.kind(abstraction) else {
        panic!("beta on a non-abstraction");
    };
    let sort = store.binder_sort(abstraction).expect("abstraction").clone();
    substitute(store, body, 0, &sort, argument).expect("redex is well sorted")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeadForm {
    Constructor(SymbolId, Vec<NodeId>),
    /// No symbol-headed form was reached; contributes nothing to the language.
    Diverged,
}

/// Result of a single head normalisation, with the steps it took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct HeadRun {
    pub form: HeadForm,
    pub steps: u64,
    /// The reduction provably loops: a state repeated exactly.
    pub looped: bool,
}

/// Leftmost-outermost reduction of a closed ground term until its head is a
/// symbol, giving up after `max_steps` β-steps.
pub fn head_reduce(store: &mut TermStore, term: NodeId, max_steps: u64) -> HeadForm {
    head_run(store, term, max_steps).form
}

pub(crate) fn head_run(store: &mut TermStore, term: NodeId, max_steps: u64) -> HeadRun {
    let mut head = term;
    // arguments in application order, innermost first at the end
    let mut spine: Vec<NodeId> = Vec::new();
    let mut seen: HashSet<(NodeId, Vec<NodeId>)> = HashSet::new();
    let mut steps = 0u64;
    loop {
        match store.kind(head).clone() {
            NodeKind::App { operator, operand } => {
                spine.push(operand);
                head = operator;
            }
            NodeKind::Symbol { symbol, args } => {
                debug_assert!(spine.is_empty(), "symbols are fully applied");
                return HeadRun {
                    form: HeadForm::Constructor(symbol, args),
                    steps,
                    looped: false,
                };
            }
            NodeKind::Abs { .. } => {
                let Some(arg) = spine.pop() else {
                    // not of ground sort
                    return HeadRun {
                        form: HeadForm::Diverged,
                        steps,
                        looped: false,
                    };
                };
                if !seen.insert((head, {
                    let mut s = spine.clone();
                    s.push(arg);
                    s
                })) {
                    return HeadRun {
                        form: HeadForm::Diverged,
                        steps,
                        looped: true,
                    };
                }
                if steps >= max_steps {
                    return HeadRun {
                        form: HeadForm::Diverged,
                        steps,
                        looped: false,
                    };
                }
                steps += 1;
                head = beta(store, head, arg);
            }
            NodeKind::Var { .. } => {
                // open term: no head form
                return HeadRun {
                    form: HeadForm::Diverged,
                    steps,
                    looped: false,
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{elaborate, parse_program, Symbol};

    fn store() -> (TermStore, SymbolId, SymbolId) {
        let s = TermStore::new(vec![
            Symbol {
                name: "br".into(),
                rank: 2,
            },
            Symbol {
                name: "a".into(),
                rank: 1,
            },
            Symbol {
                name: "e".into(),
                rank: 0,
            },
        ]);
        (s, SymbolId(1), SymbolId(2))
    }

    #[test]
    fn substitute_variable_and_symbol_argument() {
        let (mut s, a, e) = store();
        let x = s.mk_var(0, Sort::Ground);
        let en = s.mk_symbol(e, vec![]);
        assert_eq!(substitute(&mut s, x, 0, &Sort::Ground, en).unwrap(), en);
        let ax = s.mk_symbol(a, vec![x]);
        let ae = s.mk_symbol(a, vec![en]);
        assert_eq!(substitute(&mut s, ax, 0, &Sort::Ground, en).unwrap(), ae);
    }

    #[test]
    fn substitute_rejects_wrong_sort() {
        let (mut s, _, e) = store();
        let x = s.mk_var(0, Sort::first_order(1));
        let en = s.mk_symbol(e, vec![]);
        let err = substitute(&mut s, x, 0, &Sort::first_order(1), en).unwrap_err();
        assert!(matches!(err, OracleError::SortMismatch { .. }));
    }

    #[test]
    fn substitution_under_binder_lifts_the_value() {
        let (mut s, _, _) = store();
        // \y. x   with x = index 0 outside, i.e. Var 1 inside
        let x_inside = s.mk_var(1, Sort::Ground);
        let lam = s.mk_abs(Sort::Ground, x_inside);
        // value: a free variable of the outer context (index 0 after removal)
        let free = s.mk_var(0, Sort::Ground);
        let out = substitute(&mut s, lam, 0, &Sort::Ground, free).unwrap();
        let NodeKind::Abs { body } = *s.kind(out) else {
            panic!()
        };
        // must not be captured by the inner binder
        assert_eq!(*s.kind(body), NodeKind::Var { index: 1 });
    }

    #[test]
    fn head_reduce_examples() {
        let (mut s, a, e) = store();
        let en = s.mk_symbol(e, vec![]);
        assert_eq!(head_reduce(&mut s, en, 10), HeadForm::Constructor(e, vec![]));
        let x = s.mk_var(0, Sort::Ground);
        let ax = s.mk_symbol(a, vec![x]);
        let lam = s.mk_abs(Sort::Ground, ax);
        let redex = s.mk_app(lam, en);
        assert_eq!(head_reduce(&mut s, redex, 10), HeadForm::Constructor(a, vec![en]));
        assert_eq!(head_reduce(&mut s, redex, 0), HeadForm::Diverged);
    }

    #[test]
    fn self_loop_diverges_at_every_budget() {
        let p = parse_program("symbol e : 0\nN : o -> o = \\x:o. N x\nstart N e").unwrap();
        let mut el = elaborate(&p);
        for budget in [1, 2, 10, 1000] {
            let run = head_run(&mut el.store, el.root, budget);
            assert_eq!(run.form, HeadForm::Diverged);
        }
        // the reduct of `N e` is `N e` itself
        let run = head_run(&mut el.store, el.root, 1000);
        assert!(run.looped);
        assert!(run.steps <= 1);
    }
}
