//! Bottom-up generation of every judgment class the search may need, with
//! the rule instances ("productions") that derive each class from others.
//!
//! Counters are additive: a rule instance's conclusion counter is a fixed
//! weight plus the sum of its premiss counters. Classes and weighted
//! productions therefore describe every derivation, and counter questions
//! become path questions on this hypergraph.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::SearchConfig;
use crate::term::{NodeId, NodeKind, Sort, TermStore, BR};
use crate::types::{
    comp, enumerate_full_types, markers_of, FullType, IType, JudgmentClass, OrderSet, TypeEnv, TypeError,
};

pub(crate) type ClassId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Step {
    Br(u8),
    Var(FullType),
    Lambda,
    Con(OrderSet),
    App,
}

#[derive(Clone, Debug)]
pub(crate) struct Production {
    pub conclusion: ClassId,
    pub step: Step,
    pub premisses: Vec<ClassId>,
    pub weight: u64,
}

#[derive(Clone, Debug)]
pub(crate) struct Hypergraph {
    pub classes: Vec<JudgmentClass>,
    pub index: HashMap<JudgmentClass, ClassId>,
    pub productions: Vec<Production>,
    pub by_conclusion: Vec<Vec<usize>>,
    /// Set when some limit cut the generation short.
    pub truncated: Option<String>,
}

impl Hypergraph {
    pub fn class_id(&self, class: &JudgmentClass) -> Option<ClassId> {
        self.index.get(class).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Branch(u8),
    Body,
    Argument(usize),
    Operator,
    Operand,
}

/// The full type an operand judgment contributes to an operator of order `k`.
pub(crate) fn visible(ft: &FullType, k: u32) -> FullType {
    FullType {
        order: k,
        flags: ft.flags.restrict_below(k),
        markers: ft.markers.restrict_below(k),
        itype: ft.itype.clone(),
    }
}

struct Engine<'a> {
    store: &'a TermStore,
    config: &'a SearchConfig,
    m: u32,
    free: HashMap<NodeId, BTreeSet<u32>>,
    parents: HashMap<NodeId, Vec<(NodeId, Slot)>>,
    binder_orders: HashMap<NodeId, BTreeSet<u32>>,
    vars_by_pool: HashMap<(Sort, u32), Vec<NodeId>>,
    pools: HashMap<(Sort, u32), BTreeSet<FullType>>,
    operand_sites: HashMap<NodeId, BTreeSet<u32>>,
    graph: Hypergraph,
    classes_at: HashMap<NodeId, Vec<ClassId>>,
    /// Processed operand classes of each application, by the argument type they provide.
    operands_by_visible: HashMap<NodeId, HashMap<FullType, Vec<ClassId>>>,
    /// Processed operator classes of each application, by each argument type they expect.
    operators_by_arg: HashMap<NodeId, HashMap<FullType, Vec<ClassId>>>,
    operators_done: HashMap<NodeId, Vec<ClassId>>,
    seen_productions: HashSet<(ClassId, Step, Vec<ClassId>)>,
    env_variants: HashMap<ClassId, Vec<(u32, BTreeSet<FullType>, ClassId)>>,
    abs_variants: HashMap<ClassId, Vec<(BTreeSet<FullType>, ClassId)>>,
    queue: VecDeque<ClassId>,
}

/// Generates the hypergraph for judgments of order `m` about subterms of `root`.
pub(crate) fn saturate(
    store: &TermStore,
    root: NodeId,
    m: u32,
    config: &SearchConfig,
) -> Result<Hypergraph, TypeError> {
    let universe = store.subterm_universe(root);
    let mut engine = Engine {
        store,
        config,
        m,
        free: HashMap::new(),
        parents: HashMap::new(),
        binder_orders: store.binder_orders(root),
        vars_by_pool: HashMap::new(),
        pools: HashMap::new(),
        operand_sites: HashMap::new(),
        graph: Hypergraph {
            classes: Vec::new(),
            index: HashMap::new(),
            productions: Vec::new(),
            by_conclusion: Vec::new(),
            truncated: None,
        },
        classes_at: HashMap::new(),
        operands_by_visible: HashMap::new(),
        operators_by_arg: HashMap::new(),
        operators_done: HashMap::new(),
        seen_productions: HashSet::new(),
        env_variants: HashMap::new(),
        abs_variants: HashMap::new(),
        queue: VecDeque::new(),
    };
    engine.index_universe(&universe)?;
    engine.seed(&universe)?;
    while let Some(c) = engine.queue.pop_front() {
        // an exhaustive run is useless once anything was cut off
        if config.exhaustive && engine.graph.truncated.is_some() {
            break;
        }
        engine.process(c)?;
    }
    Ok(engine.graph)
}

impl<'a> Engine<'a> {
    fn index_universe(&mut self, universe: &[NodeId]) -> Result<(), TypeError> {
        for &n in universe {
            self.free.insert(n, self.store.free_vars(n));
            match self.store.kind(n).clone() {
                NodeKind::Symbol { symbol, args } => {
                    for (i, a) in args.iter().enumerate() {
                        let slot = if symbol == BR {
                            Slot::Branch(i as u8 + 1)
                        } else {
                            Slot::Argument(i)
                        };
                        self.parents.entry(*a).or_default().push((n, slot));
                    }
                }
                NodeKind::Abs { body } => {
                    self.parents.entry(body).or_default().push((n, Slot::Body));
                }
                NodeKind::App { operator, operand } => {
                    self.parents.entry(operator).or_default().push((n, Slot::Operator));
                    self.parents.entry(operand).or_default().push((n, Slot::Operand));
                    let k = self.store.order(operator);
                    self.operand_sites.entry(operand).or_default().insert(k);
                }
                NodeKind::Var { .. } => {
                    let sort = self.store.sort(n).clone();
                    for &k in self.binder_orders.get(&n).into_iter().flatten() {
                        self.vars_by_pool.entry((sort.clone(), k)).or_default().push(n);
                    }
                }
            }
        }
        Ok(())
    }

    fn seed(&mut self, universe: &[NodeId]) -> Result<(), TypeError> {
        if self.config.exhaustive {
            let keys: Vec<(Sort, u32)> = self.vars_by_pool.keys().cloned().collect();
            for (sort, k) in keys {
                let all = enumerate_full_types(&sort, k, self.config.fulltype_enumeration_limit)?;
                for t in all {
                    self.add_to_pool(&sort, k, t)?;
                }
            }
        }
        for &n in universe {
            if let NodeKind::Symbol { symbol, args } = self.store.kind(n) {
                if *symbol != BR && args.is_empty() {
                    for bits in 0..(1u16 << self.m) {
                        let leaf = OrderSet::from_bits(bits);
                        let (flags, counter) = comp(self.m, leaf, &[constant_flag(self.m)])?;
                        let ft = FullType::new(self.m, flags, leaf, IType::Ground)?;
                        let class = JudgmentClass {
                            env: TypeEnv::empty(),
                            subject: n,
                            fulltype: ft,
                        };
                        if let Some(c) = self.add_class(class) {
                            self.add_production(c, Step::Con(leaf), vec![], counter);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn note_limit(&mut self, what: String) {
        if self.graph.truncated.is_none() {
            self.graph.truncated = Some(what);
        }
    }

    fn add_class(&mut self, class: JudgmentClass) -> Option<ClassId> {
        if let Some(&c) = self.graph.index.get(&class) {
            return Some(c);
        }
        if self.graph.classes.len() >= self.config.max_classes {
            self.note_limit(format!("more than {} judgment classes", self.config.max_classes));
            return None;
        }
        let id = self.graph.classes.len();
        self.classes_at.entry(class.subject).or_default().push(id);
        self.graph.index.insert(class.clone(), id);
        self.graph.classes.push(class);
        self.graph.by_conclusion.push(Vec::new());
        self.queue.push_back(id);
        Some(id)
    }

    fn add_production(&mut self, conclusion: ClassId, step: Step, premisses: Vec<ClassId>, weight: u64) {
        let key = (conclusion, step.clone(), premisses.clone());
        if !self.seen_productions.insert(key) {
            return;
        }
        let idx = self.graph.productions.len();
        self.graph.productions.push(Production {
            conclusion,
            step: step.clone(),
            premisses: premisses.clone(),
            weight,
        });
        self.graph.by_conclusion[conclusion].push(idx);
        // keep weakened copies of this class in sync
        let env_vars = self.env_variants.get(&conclusion).cloned().unwrap_or_default();
        for (var, extra, weak) in env_vars {
            self.derive_env_weak(weak, &step, &premisses, weight, var, &extra);
        }
        if step == Step::Lambda {
            let abs_vars = self.abs_variants.get(&conclusion).cloned().unwrap_or_default();
            for (extra, weak) in abs_vars {
                if let Some(body) = self.env_weak(premisses[0], 0, &extra) {
                    self.add_production(weak, Step::Lambda, vec![body], 0);
                }
            }
        }
    }

    fn derive_env_weak(
        &mut self,
        weak: ClassId,
        step: &Step,
        premisses: &[ClassId],
        weight: u64,
        var: u32,
        extra: &BTreeSet<FullType>,
    ) {
        match step {
            Step::Br(which) => {
                if let Some(child) = self.env_weak(premisses[0], var, extra) {
                    self.add_production(weak, Step::Br(*which), vec![child], 0);
                }
            }
            _ => self.add_production(weak, step.clone(), premisses.to_vec(), weight),
        }
    }

    /// The class of `base` with the marker-free `extra` added to variable
    /// `var` of its environment, if the variable occurs in the subject.
    fn env_weak(&mut self, base: ClassId, var: u32, extra: &BTreeSet<FullType>) -> Option<ClassId> {
        let class = self.graph.classes[base].clone();
        if !self.free[&class.subject].contains(&var) {
            return None;
        }
        let mut env = class.env.clone();
        for t in extra {
            env.insert(var, t.clone());
        }
        if env == class.env {
            return Some(base);
        }
        if let Some(list) = self.env_variants.get(&base) {
            if let Some((_, _, w)) = list.iter().find(|(v, e, _)| *v == var && e == extra) {
                return Some(*w);
            }
        }
        let weak = self.add_class(JudgmentClass {
            env,
            subject: class.subject,
            fulltype: class.fulltype,
        })?;
        self.env_variants
            .entry(base)
            .or_default()
            .push((var, extra.clone(), weak));
        let existing: Vec<Production> = self.graph.by_conclusion[base]
            .iter()
            .map(|&p| self.graph.productions[p].clone())
            .collect();
        for p in existing {
            self.derive_env_weak(weak, &p.step, &p.premisses, p.weight, var, extra);
        }
        Some(weak)
    }

    /// The class of abstraction class `base` whose argument set is enlarged
    /// by the marker-free `extra`.
    fn abs_weak(&mut self, base: ClassId, extra: &BTreeSet<FullType>) -> Option<ClassId> {
        let class = self.graph.classes[base].clone();
        let NodeKind::Abs { body } = *self.store.kind(class.subject) else {
            return None;
        };
        let (args, result) = class.fulltype.itype.as_arrow()?;
        let extra: BTreeSet<FullType> = extra.difference(args).cloned().collect();
        if extra.is_empty() {
            return Some(base);
        }
        if !markers_of(&extra).is_empty() || !self.free[&body].contains(&0) {
            return None;
        }
        if let Some(list) = self.abs_variants.get(&base) {
            if let Some((_, w)) = list.iter().find(|(e, _)| *e == extra) {
                return Some(*w);
            }
        }
        let mut all = args.clone();
        all.extend(extra.iter().cloned());
        let ft = FullType {
            itype: IType::arrow(all, result.clone()),
            ..class.fulltype.clone()
        };
        let weak = self.add_class(JudgmentClass {
            env: class.env.clone(),
            subject: class.subject,
            fulltype: ft,
        })?;
        self.abs_variants.entry(base).or_default().push((extra.clone(), weak));
        let existing: Vec<Production> = self.graph.by_conclusion[base]
            .iter()
            .map(|&p| self.graph.productions[p].clone())
            .collect();
        for p in existing {
            if p.step == Step::Lambda {
                if let Some(b) = self.env_weak(p.premisses[0], 0, &extra) {
                    self.add_production(weak, Step::Lambda, vec![b], 0);
                }
            }
        }
        Some(weak)
    }

    fn add_to_pool(&mut self, sort: &Sort, k: u32, t: FullType) -> Result<(), TypeError> {
        let key = (sort.clone(), k);
        if !self.pools.entry(key.clone()).or_default().insert(t.clone()) {
            return Ok(());
        }
        let vars = self.vars_by_pool.get(&key).cloned().unwrap_or_default();
        for x in vars {
            self.var_classes(x, &t)?;
        }
        Ok(())
    }

    fn var_classes(&mut self, x: NodeId, stored: &FullType) -> Result<(), TypeError> {
        let NodeKind::Var { index } = *self.store.kind(x) else {
            unreachable!()
        };
        let k = stored.order;
        if k > self.m || !stored.fits(self.store.sort(x)) {
            return Ok(());
        }
        let env = TypeEnv::singleton(index, stored.clone());
        let placeable = OrderSet::below(self.m).restrict_from(k);
        for bits in 0..(1u16 << self.m) {
            let placed = OrderSet::from_bits(bits);
            if !placed.is_subset(placeable) {
                continue;
            }
            let markers = stored.markers.union(placed);
            let ft = FullType::new(self.m, stored.flags, markers, stored.itype.clone())?;
            let class = JudgmentClass {
                env: env.clone(),
                subject: x,
                fulltype: ft,
            };
            if let Some(c) = self.add_class(class) {
                self.add_production(c, Step::Var(stored.clone()), vec![], 0);
            }
        }
        Ok(())
    }

    fn process(&mut self, c: ClassId) -> Result<(), TypeError> {
        let class = self.graph.classes[c].clone();
        let n = class.subject;
        if !self.config.exhaustive {
            let sites = self.operand_sites.get(&n).cloned().unwrap_or_default();
            let sort = self.store.sort(n).clone();
            for k in sites {
                self.add_to_pool(&sort, k, visible(&class.fulltype, k))?;
            }
        }
        let parents = self.parents.get(&n).cloned().unwrap_or_default();
        for (p, slot) in parents {
            match slot {
                Slot::Branch(which) => {
                    let concl = JudgmentClass {
                        env: class.env.clone(),
                        subject: p,
                        fulltype: class.fulltype.clone(),
                    };
                    if let Some(id) = self.add_class(concl) {
                        self.add_production(id, Step::Br(which), vec![c], 0);
                    }
                }
                Slot::Body => self.lambda(p, c)?,
                Slot::Argument(i) => self.constant(p, i, c)?,
                Slot::Operator => {
                    if let Some((args, _)) = class.fulltype.itype.as_arrow() {
                        let index = self.operators_by_arg.entry(p).or_default();
                        for t in args {
                            index.entry(t.clone()).or_default().push(c);
                        }
                    }
                    self.operators_done.entry(p).or_default().push(c);
                    self.application(p, c, None)?;
                }
                Slot::Operand => {
                    let NodeKind::App { operator, operand } = *self.store.kind(p) else {
                        unreachable!()
                    };
                    let vis = visible(&class.fulltype, self.store.order(operator));
                    self.operands_by_visible
                        .entry(p)
                        .or_default()
                        .entry(vis.clone())
                        .or_default()
                        .push(c);
                    let weakenable = matches!(self.store.kind(operand), NodeKind::Abs { .. })
                        || matches!(self.store.kind(operator), NodeKind::Abs { .. });
                    let ops: Vec<ClassId> = if weakenable {
                        self.operators_done.get(&p).cloned().unwrap_or_default()
                    } else {
                        self.operators_by_arg
                            .get(&p)
                            .and_then(|ix| ix.get(&vis))
                            .cloned()
                            .unwrap_or_default()
                    };
                    for o in ops {
                        self.application(p, o, Some(c))?;
                    }
                }
            }
        }
        Ok(())
    }

    fn lambda(&mut self, abs: NodeId, body: ClassId) -> Result<(), TypeError> {
        let class = self.graph.classes[body].clone();
        let (bound, outer) = class.env.unbind();
        let k = self.store.order(abs);
        let binder = self.store.binder_sort(abs).expect("abstraction").clone();
        if !bound.iter().all(|t| t.order == k && t.fits(&binder)) {
            return Ok(());
        }
        let ft = &class.fulltype;
        let markers = ft.markers.difference(markers_of(&bound));
        let fulltype = FullType::new(ft.order, ft.flags, markers, IType::arrow(bound, ft.itype.clone()))?;
        if let Some(id) = self.add_class(JudgmentClass {
            env: outer,
            subject: abs,
            fulltype,
        }) {
            self.add_production(id, Step::Lambda, vec![body], 0);
        }
        Ok(())
    }

    fn constant(&mut self, node: NodeId, fixed_pos: usize, fixed: ClassId) -> Result<(), TypeError> {
        let NodeKind::Symbol { args, .. } = self.store.kind(node).clone() else {
            unreachable!()
        };
        let candidates: Vec<Vec<ClassId>> = args
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i == fixed_pos {
                    vec![fixed]
                } else {
                    self.classes_at.get(a).cloned().unwrap_or_default()
                }
            })
            .collect();
        let mut chosen = Vec::with_capacity(args.len());
        let mut budget = self.config.max_combinations;
        let mut combos = Vec::new();
        self.pick_disjoint(&candidates, 0, OrderSet::EMPTY, &mut chosen, &mut combos, &mut budget);
        if budget == 0 {
            self.note_limit("too many argument combinations for a constant".into());
        }
        for premisses in combos {
            let mut env = TypeEnv::empty();
            let mut markers = OrderSet::EMPTY;
            let mut inputs = vec![constant_flag(self.m)];
            for &p in &premisses {
                let pc = &self.graph.classes[p];
                env = env.union(&pc.env);
                markers = markers.union(pc.fulltype.markers);
                inputs.push((pc.fulltype.flags, 0));
            }
            let (flags, weight) = comp(self.m, markers, &inputs)?;
            let ft = FullType::new(self.m, flags, markers, IType::Ground)?;
            if let Some(id) = self.add_class(JudgmentClass {
                env,
                subject: node,
                fulltype: ft,
            }) {
                self.add_production(id, Step::Con(OrderSet::EMPTY), premisses, weight);
            }
        }
        Ok(())
    }

    /// One class per position with pairwise disjoint markers.
    fn pick_disjoint(
        &self,
        candidates: &[Vec<ClassId>],
        pos: usize,
        used: OrderSet,
        chosen: &mut Vec<ClassId>,
        out: &mut Vec<Vec<ClassId>>,
        budget: &mut usize,
    ) {
        if *budget == 0 {
            return;
        }
        if pos == candidates.len() {
            out.push(chosen.clone());
            *budget -= 1;
            return;
        }
        for &c in &candidates[pos] {
            let mk = self.graph.classes[c].fulltype.markers;
            if !mk.is_disjoint(used) {
                continue;
            }
            chosen.push(c);
            self.pick_disjoint(candidates, pos + 1, used.union(mk), chosen, out, budget);
            chosen.pop();
        }
    }

    /// Rule instances for `app` with operator class `op`. When `must` is
    /// set, only instances using that operand class (possibly weakened) are
    /// generated.
    fn application(&mut self, app: NodeId, op: ClassId, must: Option<ClassId>) -> Result<(), TypeError> {
        let NodeKind::App { operator, operand } = *self.store.kind(app) else {
            unreachable!()
        };
        let op_class = self.graph.classes[op].clone();
        let Some((expected, result)) = op_class.fulltype.itype.as_arrow() else {
            return Ok(());
        };
        let expected: Vec<FullType> = expected.iter().cloned().collect();
        let result = result.clone();
        let k = self.store.order(operator);
        let operand_is_abs = matches!(self.store.kind(operand), NodeKind::Abs { .. });
        let operand_classes = self.classes_at.get(&operand).cloned().unwrap_or_default();

        // candidates per expected argument type: (class used, class it came from)
        let mut per_arg: Vec<Vec<(ClassId, ClassId)>> = Vec::with_capacity(expected.len());
        for t in &expected {
            let mut cands: Vec<(ClassId, ClassId)> = self
                .operands_by_visible
                .get(&app)
                .and_then(|ix| ix.get(t))
                .map(|v| v.iter().map(|&c| (c, c)).collect())
                .unwrap_or_default();
            if operand_is_abs {
                for &c in &operand_classes {
                    let ft = self.graph.classes[c].fulltype.clone();
                    let vis = visible(&ft, k);
                    if vis == *t || vis.flags != t.flags || vis.markers != t.markers {
                        continue;
                    }
                    if let (Some((have, r1)), Some((want, r2))) = (ft.itype.as_arrow(), t.itype.as_arrow()) {
                        if r1 == r2 && have.is_subset(want) {
                            let extra: BTreeSet<FullType> = want.difference(have).cloned().collect();
                            if markers_of(&extra).is_empty() {
                                if let Some(w) = self.abs_weak(c, &extra) {
                                    cands.push((w, c));
                                }
                            }
                        }
                    }
                }
            }
            if cands.is_empty() {
                return Ok(());
            }
            per_arg.push(cands);
        }

        // marker-free operand contributions that could enlarge an abstraction operator
        let mut extras: Vec<(FullType, ClassId)> = Vec::new();
        let operator_is_abs = matches!(self.store.kind(operator), NodeKind::Abs { .. });
        let extra_cap = self.config.max_weakening_extras;
        if operator_is_abs && extra_cap > 0 {
            if let Some(ix) = self.operands_by_visible.get(&app) {
                for (vis, cs) in ix {
                    if vis.markers.is_empty() && !expected.contains(vis) {
                        extras.extend(cs.iter().map(|&c| (vis.clone(), c)));
                    }
                }
            }
            extras.sort();
        }

        // Each variant pins where `must` is used, so only new combinations are built.
        let mut variants: Vec<(Vec<Vec<(ClassId, ClassId)>>, Option<ClassId>)> = Vec::new();
        match must {
            None => variants.push((per_arg.clone(), None)),
            Some(m) => {
                for i in 0..per_arg.len() {
                    let pinned: Vec<(ClassId, ClassId)> =
                        per_arg[i].iter().copied().filter(|&(_, origin)| origin == m).collect();
                    if !pinned.is_empty() {
                        let mut v = per_arg.clone();
                        v[i] = pinned;
                        variants.push((v, None));
                    }
                }
                if extras.iter().any(|&(_, c)| c == m) {
                    variants.push((per_arg.clone(), Some(m)));
                }
            }
        }

        let mut combos: Vec<(Vec<(ClassId, ClassId)>, Vec<(FullType, ClassId)>)> = Vec::new();
        let mut budget = self.config.max_combinations;
        for (per_arg, need_extra) in &variants {
            let mut chosen = Vec::new();
            self.pick_operands(
                per_arg,
                0,
                op_class.fulltype.markers,
                &mut chosen,
                &mut |this: &Engine, chosen: &Vec<(ClassId, ClassId)>, used: OrderSet| {
                    let mut ext_chosen: Vec<(FullType, ClassId)> = Vec::new();
                    this.pick_extras(&extras, 0, extra_cap, used, chosen, &mut ext_chosen, &mut combos, &mut budget, *need_extra);
                },
            );
        }
        if budget == 0 {
            self.note_limit("too many operand combinations".into());
        }

        for (ops, ext) in combos {
            let operator_class = if ext.is_empty() {
                Some(op)
            } else {
                let set: BTreeSet<FullType> = ext.iter().map(|(t, _)| t.clone()).collect();
                self.abs_weak(op, &set)
            };
            let Some(operator_class) = operator_class else {
                continue;
            };
            let mut operands: Vec<ClassId> = ops.iter().map(|(c, _)| *c).collect();
            operands.extend(ext.iter().map(|(_, c)| *c));
            operands.sort_unstable();
            if operands.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let mut env = self.graph.classes[operator_class].env.clone();
            let mut markers = op_class.fulltype.markers;
            let mut inputs = vec![(op_class.fulltype.flags, 0)];
            for &o in &operands {
                let oc = &self.graph.classes[o];
                env = env.union(&oc.env);
                markers = markers.union(oc.fulltype.markers);
                inputs.push((oc.fulltype.flags.restrict_from(k), 0));
            }
            let (flags, weight) = comp(self.m, markers, &inputs)?;
            let ft = FullType::new(self.m, flags, markers, result.clone())?;
            if let Some(id) = self.add_class(JudgmentClass {
                env,
                subject: app,
                fulltype: ft,
            }) {
                let mut premisses = vec![operator_class];
                premisses.extend(operands);
                self.add_production(id, Step::App, premisses, weight);
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn pick_operands(
        &self,
        per_arg: &[Vec<(ClassId, ClassId)>],
        pos: usize,
        used: OrderSet,
        chosen: &mut Vec<(ClassId, ClassId)>,
        emit: &mut dyn FnMut(&Engine, &Vec<(ClassId, ClassId)>, OrderSet),
    ) {
        if pos == per_arg.len() {
            emit(self, chosen, used);
            return;
        }
        if self.config.exhaustive {
            // every nonempty subset of candidates for this argument type
            let cands = &per_arg[pos];
            let room = self.config.max_operand_premisses.saturating_sub(chosen.len());
            self.subsets(cands, 0, used, room, chosen, per_arg, pos, emit);
        } else {
            for &(c, origin) in &per_arg[pos] {
                let mk = self.graph.classes[c].fulltype.markers;
                if !mk.is_disjoint(used) {
                    continue;
                }
                chosen.push((c, origin));
                self.pick_operands(per_arg, pos + 1, used.union(mk), chosen, emit);
                chosen.pop();
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn subsets(
        &self,
        cands: &[(ClassId, ClassId)],
        from: usize,
        used: OrderSet,
        room: usize,
        chosen: &mut Vec<(ClassId, ClassId)>,
        per_arg: &[Vec<(ClassId, ClassId)>],
        pos: usize,
        emit: &mut dyn FnMut(&Engine, &Vec<(ClassId, ClassId)>, OrderSet),
    ) {
        for i in from..cands.len() {
            if room == 0 {
                return;
            }
            let (c, origin) = cands[i];
            let mk = self.graph.classes[c].fulltype.markers;
            if !mk.is_disjoint(used) {
                continue;
            }
            chosen.push((c, origin));
            // close this argument here, or keep adding
            self.pick_operands(per_arg, pos + 1, used.union(mk), chosen, emit);
            self.subsets(cands, i + 1, used.union(mk), room - 1, chosen, per_arg, pos, emit);
            chosen.pop();
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn pick_extras(
        &self,
        extras: &[(FullType, ClassId)],
        from: usize,
        room: usize,
        used: OrderSet,
        chosen: &Vec<(ClassId, ClassId)>,
        ext: &mut Vec<(FullType, ClassId)>,
        out: &mut Vec<(Vec<(ClassId, ClassId)>, Vec<(FullType, ClassId)>)>,
        budget: &mut usize,
        need_extra: Option<ClassId>,
    ) {
        if *budget == 0 {
            return;
        }
        if need_extra.is_none_or(|m| ext.iter().any(|(_, c)| *c == m)) {
            out.push((chosen.clone(), ext.clone()));
            *budget -= 1;
        }
        if room == 0 {
            return;
        }
        for i in from..extras.len() {
            let (t, c) = &extras[i];
            if ext.iter().any(|(u, _)| u == t) && !self.config.exhaustive {
                continue;
            }
            let mk = self.graph.classes[*c].fulltype.markers;
            if !mk.is_disjoint(used) {
                continue;
            }
            ext.push((t.clone(), *c));
            self.pick_extras(extras, i + 1, room - 1, used.union(mk), chosen, ext, out, budget, need_extra);
            ext.pop();
        }
    }
}

pub(crate) fn constant_flag(order: u32) -> (OrderSet, u64) {
    if order == 0 {
        (OrderSet::EMPTY, 1)
    } else {
        (OrderSet::singleton(0), 0)
    }
}
