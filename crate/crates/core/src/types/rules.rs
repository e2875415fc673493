//! Validating constructors for the five typing rules. Each takes the
//! premisses and the rule's free parameters, checks every side condition,
//! and returns the conclusion.

use std::collections::BTreeSet;

use super::{comp, markers_of, split, FullType, IType, Judgment, OrderSet, TypeEnv, TypeError};
use crate::term::{NodeId, NodeKind, TermStore, BR};

fn shape(msg: impl Into<String>) -> TypeError {
    TypeError::ShapeMismatch(msg.into())
}

fn violated(msg: impl Into<String>) -> TypeError {
    TypeError::PreconditionViolation(msg.into())
}

/// Rejects full types whose fields were assembled by hand and break the
/// range or disjointness conditions at their own order.
fn well_formed(ft: &FullType) -> Result<(), TypeError> {
    FullType::new(ft.order, ft.flags, ft.markers, IType::Ground).map(|_| ())
}

/// Nondeterministic choice: `br L R` gets whatever child `which` (1 or 2) gets.
pub fn rule_br(store: &TermStore, subject: NodeId, which: u8, premiss: &Judgment) -> Result<Judgment, TypeError> {
    let NodeKind::Symbol { symbol, args } = store.kind(subject) else {
        return Err(shape("subject is not a br node"));
    };
    if *symbol != BR {
        return Err(shape("subject is not a br node"));
    }
    let child = match which {
        1 => args[0],
        2 => args[1],
        _ => return Err(shape(format!("branch {which} does not exist"))),
    };
    if premiss.subject != child {
        return Err(shape(format!("premiss is not about child {which}")));
    }
    well_formed(&premiss.fulltype)?;
    Ok(Judgment {
        env: premiss.env.clone(),
        subject,
        fulltype: premiss.fulltype.clone(),
        counter: premiss.counter,
    })
}

/// A variable used at a full type `stored` from the environment, lifted to
/// order `order` with marker orders `markers`; orders at least the stored
/// order that are in `markers` are markers placed at this leaf.
pub fn rule_var(
    store: &TermStore,
    env: &TypeEnv,
    subject: NodeId,
    stored: &FullType,
    order: u32,
    markers: OrderSet,
) -> Result<Judgment, TypeError> {
    let NodeKind::Var { index } = *store.kind(subject) else {
        return Err(shape("subject is not a variable"));
    };
    if !stored.fits(store.sort(subject)) {
        return Err(violated(format!(
            "{stored} does not fit the variable's sort {}",
            store.sort(subject)
        )));
    }
    well_formed(stored)?;
    if stored.order > order {
        return Err(violated(format!(
            "stored order {} exceeds derivation order {order}",
            stored.order
        )));
    }
    let single = TypeEnv::singleton(index, stored.clone());
    if !split(env, &[&single]) {
        return Err(violated(format!(
            "environment {env} cannot be split into {single}"
        )));
    }
    if markers.restrict_below(stored.order) != stored.markers {
        return Err(violated(format!(
            "markers {markers} below {} differ from the stored {}",
            stored.order, stored.markers
        )));
    }
    let fulltype = FullType::new(order, stored.flags, markers, stored.itype.clone())?;
    Ok(Judgment {
        env: env.clone(),
        subject,
        fulltype,
        counter: 0,
    })
}

/// Abstraction: the premiss's binding of the bound variable becomes the
/// argument set, and the markers it provides are removed.
pub fn rule_lambda(store: &TermStore, env: &TypeEnv, subject: NodeId, premiss: &Judgment) -> Result<Judgment, TypeError> {
    let NodeKind::Abs { body } = *store.kind(subject) else {
        return Err(shape("subject is not an abstraction"));
    };
    if premiss.subject != body {
        return Err(shape("premiss is not about the abstraction body"));
    }
    well_formed(&premiss.fulltype)?;
    let (bound, inner) = premiss.env.unbind();
    let k = store.order(subject);
    let binder = store.binder_sort(subject).expect("abstraction");
    if let Some(t) = bound.iter().find(|t| t.order != k || !t.fits(binder)) {
        return Err(violated(format!(
            "{t} is not a full type of sort {binder} at order {k}"
        )));
    }
    if !split(env, &[&inner]) {
        return Err(violated(format!("environment {env} cannot be split into {inner}")));
    }
    let ft = &premiss.fulltype;
    let markers = ft.markers.difference(markers_of(&bound));
    let fulltype = FullType::new(ft.order, ft.flags, markers, IType::arrow(bound, ft.itype.clone()))?;
    Ok(Judgment {
        env: env.clone(),
        subject,
        fulltype,
        counter: premiss.counter,
    })
}

fn disjoint_union(sets: &[OrderSet]) -> Result<OrderSet, TypeError> {
    let mut acc = OrderSet::EMPTY;
    for s in sets {
        if !acc.is_disjoint(*s) {
            return Err(TypeError::DisjointnessViolation(format!(
                "marker orders {} occur twice",
                acc.intersection(*s)
            )));
        }
        acc = acc.union(*s);
    }
    Ok(acc)
}

/// The order-0 flag placed by every constant, as Comp input.
fn constant_flag(order: u32) -> (OrderSet, u64) {
    if order == 0 {
        (OrderSet::EMPTY, 1)
    } else {
        (OrderSet::singleton(0), 0)
    }
}

/// A symbol other than `br` applied to its arguments. `leaf_markers` are
/// markers placed at this node, allowed only for rank-0 symbols.
pub fn rule_con(
    store: &TermStore,
    env: &TypeEnv,
    subject: NodeId,
    order: u32,
    leaf_markers: OrderSet,
    premisses: &[Judgment],
) -> Result<Judgment, TypeError> {
    let NodeKind::Symbol { symbol, args } = store.kind(subject) else {
        return Err(shape("subject is not a symbol application"));
    };
    if *symbol == BR {
        return Err(shape("br is typed by choosing a branch"));
    }
    if args.len() != premisses.len() {
        return Err(shape(format!(
            "{} arguments but {} premisses",
            args.len(),
            premisses.len()
        )));
    }
    for (a, p) in args.iter().zip(premisses) {
        if p.subject != *a {
            return Err(shape("premisses must follow the argument order"));
        }
        well_formed(&p.fulltype)?;
        if p.fulltype.order != order || p.fulltype.itype != IType::Ground {
            return Err(violated(format!(
                "argument premiss {} is not a ground type at order {order}",
                p.fulltype
            )));
        }
    }
    if !args.is_empty() && !leaf_markers.is_empty() {
        return Err(violated("markers can only be placed at leaves"));
    }
    let mut marker_sets = vec![leaf_markers];
    marker_sets.extend(premisses.iter().map(|p| p.fulltype.markers));
    let markers = disjoint_union(&marker_sets)?;
    let parts: Vec<&TypeEnv> = premisses.iter().map(|p| &p.env).collect();
    if !split(env, &parts) {
        return Err(violated(format!("environment {env} cannot be split into the premisses")));
    }
    let mut inputs = vec![constant_flag(order)];
    inputs.extend(premisses.iter().map(|p| (p.fulltype.flags, p.counter)));
    let (flags, counter) = comp(order, markers, &inputs)?;
    let fulltype = FullType::new(order, flags, markers, IType::Ground)?;
    Ok(Judgment {
        env: env.clone(),
        subject,
        fulltype,
        counter,
    })
}

/// The argument full type an operand premiss contributes to the operator.
pub(crate) fn visible_to_operator(operand: &FullType, operator_order: u32) -> FullType {
    FullType {
        order: operator_order,
        flags: operand.flags.restrict_below(operator_order),
        markers: operand.markers.restrict_below(operator_order),
        itype: operand.itype.clone(),
    }
}

/// Application `P Q`: the operator premiss expects exactly the argument
/// full types contributed by the operand premisses, which must come from
/// pairwise distinct classes.
pub fn rule_app(
    store: &TermStore,
    env: &TypeEnv,
    subject: NodeId,
    operator: &Judgment,
    operands: &[Judgment],
) -> Result<Judgment, TypeError> {
    let NodeKind::App {
        operator: p,
        operand: q,
    } = *store.kind(subject)
    else {
        return Err(shape("subject is not an application"));
    };
    if operator.subject != p || operands.iter().any(|o| o.subject != q) {
        return Err(shape("premisses are not about the operator and operand"));
    }
    well_formed(&operator.fulltype)?;
    for o in operands {
        well_formed(&o.fulltype)?;
    }
    let m = operator.fulltype.order;
    let op_order = store.order(p);
    if op_order > m {
        return Err(violated(format!(
            "operator order {op_order} exceeds derivation order {m}"
        )));
    }
    if let Some(o) = operands.iter().find(|o| o.fulltype.order != m) {
        return Err(violated(format!(
            "operand premiss {} is not at order {m}",
            o.fulltype
        )));
    }
    let Some((expected, result)) = operator.fulltype.itype.as_arrow() else {
        return Err(violated("operator type is not an arrow"));
    };
    let classes: BTreeSet<_> = operands.iter().map(|o| (&o.env, &o.fulltype)).collect();
    if classes.len() != operands.len() {
        return Err(violated("two operand premisses are from the same class"));
    }
    let built: BTreeSet<FullType> = operands
        .iter()
        .map(|o| visible_to_operator(&o.fulltype, op_order))
        .collect();
    if &built != expected {
        return Err(TypeError::ArgumentTypeMismatch(format!(
            "operands provide {:?}, operator expects {:?}",
            built, expected
        )));
    }
    let mut marker_sets = vec![operator.fulltype.markers];
    marker_sets.extend(operands.iter().map(|o| o.fulltype.markers));
    let markers = disjoint_union(&marker_sets)?;
    let mut parts = vec![&operator.env];
    parts.extend(operands.iter().map(|o| &o.env));
    if !split(env, &parts) {
        return Err(violated(format!("environment {env} cannot be split into the premisses")));
    }
    let mut inputs = vec![(operator.fulltype.flags, operator.counter)];
    inputs.extend(
        operands
            .iter()
            .map(|o| (o.fulltype.flags.restrict_from(op_order), o.counter)),
    );
    let (flags, counter) = comp(m, markers, &inputs)?;
    let fulltype = FullType::new(m, flags, markers, result.clone())?;
    Ok(Judgment {
        env: env.clone(),
        subject,
        fulltype,
        counter,
    })
}
