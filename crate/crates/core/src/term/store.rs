//! Hash-consed storage for regular infinitary λ-terms.
//!
//! Terms live in a graph whose nodes are interned by their shape, with
//! variables written as de Bruijn indices so that α-equivalent subterms share
//! a node. A nonterminal is a reserved node whose contents are the root of its
//! body; references to the nonterminal point at that node, which makes the
//! graph cyclic exactly through nonterminals. The set of nodes reachable from
//! any node is finite.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use super::parse::{Expr, Program, Symbol, SymbolId, BR};
use super::sort::{ord_sort, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// A symbol applied to exactly `rank` ground arguments.
    Symbol { symbol: SymbolId, args: Vec<NodeId> },
    /// A de Bruijn index.
    Var { index: u32 },
    App { operator: NodeId, operand: NodeId },
    /// The binder's sort is the argument part of the node's sort.
    Abs { body: NodeId },
}

#[derive(Clone, Debug)]
struct NodeData {
    kind: NodeKind,
    sort: Sort,
    /// All free de Bruijn indices are below this bound.
    free_bound: u32,
}

#[derive(Clone, Debug)]
pub struct TermStore {
    symbols: Vec<Symbol>,
    nodes: Vec<NodeData>,
    table: HashMap<(NodeKind, Sort), NodeId>,
    binder_hints: HashMap<NodeId, String>,
    nonterminal_names: HashMap<NodeId, String>,
}

/// A program turned into a term graph.
#[derive(Clone, Debug)]
pub struct Elaborated {
    pub store: TermStore,
    pub root: NodeId,
    /// One node per nonterminal, in declaration order (aliases share nodes).
    pub nonterminals: Vec<NodeId>,
}

impl Elaborated {
    pub fn nonterminal(&self, program: &Program, name: &str) -> Option<NodeId> {
        program.nonterminal_index(name).map(|i| self.nonterminals[i])
    }
}

pub fn elaborate(program: &Program) -> Elaborated {
    let mut store = TermStore::new(program.symbols.clone());
    let slots: Vec<NodeId> = program
        .nonterminals
        .iter()
        .map(|nt| store.reserve(nt.sort.clone()))
        .collect();
    let resolved: Vec<NodeId> = (0..program.nonterminals.len())
        .map(|i| slots[program.resolve_alias(i)])
        .collect();
    for (i, nt) in program.nonterminals.iter().enumerate() {
        if program.resolve_alias(i) != i {
            continue;
        }
        let kind = store.expr_kind(&nt.body, &resolved);
        store.fill(slots[i], kind);
        store.nonterminal_names.insert(slots[i], nt.name.clone());
        if let Expr::Abs { name, .. } = &nt.body {
            store.binder_hints.insert(slots[i], name.clone());
        }
    }
    let root = store.intern_expr(&program.start, &resolved);
    debug_assert!(store.check_sorts(root).is_ok());
    Elaborated {
        store,
        root,
        nonterminals: resolved,
    }
}

impl TermStore {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        assert_eq!(symbols.first().map(|s| (s.name.as_str(), s.rank)), Some(("br", 2)));
        TermStore {
            symbols,
            nodes: Vec::new(),
            table: HashMap::new(),
            binder_hints: HashMap::new(),
            nonterminal_names: HashMap::new(),
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbols
            .iter()
            .position(|s| s.name == name)
            .map(|i| SymbolId(i as u32))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self, node: NodeId) -> &NodeKind {
        &self.nodes[node.index()].kind
    }

    pub fn sort(&self, node: NodeId) -> &Sort {
        &self.nodes[node.index()].sort
    }

    pub fn order(&self, node: NodeId) -> u32 {
        ord_sort(self.sort(node))
    }

    pub fn free_bound(&self, node: NodeId) -> u32 {
        self.nodes[node.index()].free_bound
    }

    pub fn is_closed(&self, node: NodeId) -> bool {
        self.free_bound(node) == 0
    }

    pub fn nonterminal_name(&self, node: NodeId) -> Option<&str> {
        self.nonterminal_names.get(&node).map(String::as_str)
    }

    pub fn binder_hint(&self, node: NodeId) -> Option<&str> {
        self.binder_hints.get(&node).map(String::as_str)
    }

    pub fn children(&self, node: NodeId) -> Vec<NodeId> {
        match self.kind(node) {
            NodeKind::Symbol { args, .. } => args.clone(),
            NodeKind::Var { .. } => Vec::new(),
            NodeKind::App { operator, operand } => vec![*operator, *operand],
            NodeKind::Abs { body } => vec![*body],
        }
    }

    /// Binder sort of an abstraction node.
    pub fn binder_sort(&self, node: NodeId) -> Option<&Sort> {
        match self.kind(node) {
            NodeKind::Abs { .. } => self.sort(node).split_arrow().map(|(a, _)| a),
            _ => None,
        }
    }

    pub fn is_br(&self, node: NodeId) -> bool {
        matches!(self.kind(node), NodeKind::Symbol { symbol, .. } if *symbol == BR)
    }

    /// Interns a node, computing its sort. Panics on ill-sorted input, which
    /// indicates a bug in the caller rather than bad user input.
    pub fn intern(&mut self, kind: NodeKind, var_sort: Option<Sort>) -> NodeId {
        let sort = match &kind {
            NodeKind::Symbol { symbol, args } => {
                assert_eq!(self.symbol(*symbol).rank, args.len(), "symbol arity");
                debug_assert!(args.iter().all(|a| self.sort(*a).is_ground()));
                Sort::Ground
            }
            NodeKind::Var { .. } => var_sort.expect("variables need a sort"),
            NodeKind::App { operator, operand } => {
                let (a, b) = self
                    .sort(*operator)
                    .split_arrow()
                    .expect("operator must have an arrow sort");
                assert_eq!(a, self.sort(*operand), "operand sort");
                b.clone()
            }
            NodeKind::Abs { body } => Sort::arrow(
                var_sort.expect("abstractions need a binder sort"),
                self.sort(*body).clone(),
            ),
        };
        let key = (kind, sort);
        if let Some(&id) = self.table.get(&key) {
            return id;
        }
        let (kind, sort) = key;
        let free_bound = self.free_bound_of(&kind);
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(NodeData {
            kind: kind.clone(),
            sort: sort.clone(),
            free_bound,
        });
        self.table.insert((kind, sort), id);
        id
    }

    pub fn mk_var(&mut self, index: u32, sort: Sort) -> NodeId {
        self.intern(NodeKind::Var { index }, Some(sort))
    }

    pub fn mk_app(&mut self, operator: NodeId, operand: NodeId) -> NodeId {
        self.intern(NodeKind::App { operator, operand }, None)
    }

    pub fn mk_abs(&mut self, binder: Sort, body: NodeId) -> NodeId {
        self.intern(NodeKind::Abs { body }, Some(binder))
    }

    pub fn mk_symbol(&mut self, symbol: SymbolId, args: Vec<NodeId>) -> NodeId {
        self.intern(NodeKind::Symbol { symbol, args }, None)
    }

    pub fn set_binder_hint(&mut self, node: NodeId, name: &str) {
        self.binder_hints
            .entry(node)
            .or_insert_with(|| name.to_string());
    }

    fn free_bound_of(&self, kind: &NodeKind) -> u32 {
        match kind {
            NodeKind::Symbol { args, .. } => {
                args.iter().map(|a| self.free_bound(*a)).max().unwrap_or(0)
            }
            NodeKind::Var { index } => index + 1,
            NodeKind::App { operator, operand } => {
                self.free_bound(*operator).max(self.free_bound(*operand))
            }
            NodeKind::Abs { body } => self.free_bound(*body).saturating_sub(1),
        }
    }

    fn reserve(&mut self, sort: Sort) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(NodeData {
            kind: NodeKind::Var { index: u32::MAX },
            sort,
            free_bound: 0,
        });
        id
    }

    fn fill(&mut self, slot: NodeId, kind: NodeKind) {
        let data = &mut self.nodes[slot.index()];
        data.kind = kind.clone();
        self.table.entry((kind, data.sort.clone())).or_insert(slot);
    }

    fn expr_kind(&mut self, expr: &Expr, nonterminals: &[NodeId]) -> NodeKind {
        match expr {
            Expr::Var { index, .. } => NodeKind::Var { index: *index },
            Expr::Nonterminal(_) => unreachable!("aliases are resolved before elaboration"),
            Expr::Symbol { symbol, args } => NodeKind::Symbol {
                symbol: *symbol,
                args: args
                    .iter()
                    .map(|a| self.intern_expr(a, nonterminals))
                    .collect(),
            },
            Expr::App(f, a) => NodeKind::App {
                operator: self.intern_expr(f, nonterminals),
                operand: self.intern_expr(a, nonterminals),
            },
            Expr::Abs { body, .. } => NodeKind::Abs {
                body: self.intern_expr(body, nonterminals),
            },
        }
    }

    fn intern_expr(&mut self, expr: &Expr, nonterminals: &[NodeId]) -> NodeId {
        match expr {
            Expr::Nonterminal(i) => nonterminals[*i],
            Expr::Var { sort, .. } => {
                let kind = self.expr_kind(expr, nonterminals);
                self.intern(kind, Some(sort.clone()))
            }
            Expr::Abs { name, sort, .. } => {
                let kind = self.expr_kind(expr, nonterminals);
                let id = self.intern(kind, Some(sort.clone()));
                self.set_binder_hint(id, name);
                id
            }
            _ => {
                let kind = self.expr_kind(expr, nonterminals);
                self.intern(kind, None)
            }
        }
    }

    /// The de Bruijn indices occurring free in `node`.
    pub fn free_vars(&self, node: NodeId) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_free(node, 0, &mut out);
        out
    }

    fn collect_free(&self, node: NodeId, depth: u32, out: &mut BTreeSet<u32>) {
        if self.free_bound(node) <= depth {
            return;
        }
        match self.kind(node) {
            NodeKind::Var { index } => {
                out.insert(index - depth);
            }
            NodeKind::Abs { body } => self.collect_free(*body, depth + 1, out),
            _ => {
                for c in self.children(node) {
                    self.collect_free(c, depth, out);
                }
            }
        }
    }

    /// Every node reachable from `root`, in breadth-first discovery order.
    pub fn subterm_universe(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root]);
        seen[root.index()] = true;
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for c in self.children(n) {
                if !seen[c.index()] {
                    seen[c.index()] = true;
                    queue.push_back(c);
                }
            }
        }
        order
    }

    /// Largest order of a reachable subterm.
    pub fn complexity(&self, root: NodeId) -> u32 {
        self.subterm_universe(root)
            .into_iter()
            .map(|n| self.order(n))
            .max()
            .unwrap_or(0)
    }

    /// Re-checks the sorting discipline on every reachable node.
    pub fn check_sorts(&self, root: NodeId) -> Result<(), String> {
        for n in self.subterm_universe(root) {
            let sort = self.sort(n);
            match self.kind(n) {
                NodeKind::Symbol { symbol, args } => {
                    if self.symbol(*symbol).rank != args.len() || !sort.is_ground() {
                        return Err(format!("{n}: bad symbol application"));
                    }
                    if args.iter().any(|a| !self.sort(*a).is_ground()) {
                        return Err(format!("{n}: symbol argument not of sort o"));
                    }
                }
                NodeKind::Var { index } => {
                    if *index == u32::MAX {
                        return Err(format!("{n}: unfilled nonterminal slot"));
                    }
                }
                NodeKind::App { operator, operand } => match self.sort(*operator).split_arrow() {
                    Some((a, b)) if a == self.sort(*operand) && b == sort => {}
                    _ => return Err(format!("{n}: ill-sorted application")),
                },
                NodeKind::Abs { body } => match sort.split_arrow() {
                    Some((_, b)) if b == self.sort(*body) => {}
                    _ => return Err(format!("{n}: ill-sorted abstraction")),
                },
            }
        }
        Ok(())
    }

    /// For every variable node reachable from `root`, the orders of the
    /// abstractions that bind it somewhere in the graph.
    pub fn binder_orders(&self, root: NodeId) -> HashMap<NodeId, BTreeSet<u32>> {
        let mut out: HashMap<NodeId, BTreeSet<u32>> = HashMap::new();
        for abs in self.subterm_universe(root) {
            let NodeKind::Abs { body } = self.kind(abs) else {
                continue;
            };
            let order = self.order(abs);
            let mut seen = std::collections::HashSet::new();
            let mut stack = vec![(*body, 0u32)];
            while let Some((n, depth)) = stack.pop() {
                if self.free_bound(n) <= depth || !seen.insert((n, depth)) {
                    continue;
                }
                match self.kind(n) {
                    NodeKind::Var { index } if *index == depth => {
                        out.entry(n).or_default().insert(order);
                    }
                    NodeKind::Var { .. } => {}
                    NodeKind::Abs { body } => stack.push((*body, depth + 1)),
                    _ => stack.extend(self.children(n).into_iter().map(|c| (c, depth))),
                }
            }
        }
        out
    }

    /// Whether two nodes (possibly in different stores) denote the same
    /// regular tree, by bisimulation.
    pub fn bisimilar(&self, a: NodeId, other: &TermStore, b: NodeId) -> bool {
        let mut assumed = std::collections::HashSet::new();
        let mut stack = vec![(a, b)];
        while let Some((x, y)) = stack.pop() {
            if !assumed.insert((x, y)) {
                continue;
            }
            if self.sort(x) != other.sort(y) {
                return false;
            }
            match (self.kind(x), other.kind(y)) {
                (
                    NodeKind::Symbol { symbol: s, args: xs },
                    NodeKind::Symbol { symbol: t, args: ys },
                ) => {
                    if self.symbol(*s) != other.symbol(*t) || xs.len() != ys.len() {
                        return false;
                    }
                    stack.extend(xs.iter().copied().zip(ys.iter().copied()));
                }
                (NodeKind::Var { index: i }, NodeKind::Var { index: j }) => {
                    if i != j {
                        return false;
                    }
                }
                (
                    NodeKind::App { operator: f, operand: x1 },
                    NodeKind::App { operator: g, operand: y1 },
                ) => {
                    stack.push((*f, *g));
                    stack.push((*x1, *y1));
                }
                (NodeKind::Abs { body: p }, NodeKind::Abs { body: q }) => stack.push((*p, *q)),
                _ => return false,
            }
        }
        true
    }

    /// A readable rendering. Nonterminal nodes below the top are printed by
    /// name, which keeps cyclic terms finite.
    pub fn display(&self, node: NodeId) -> String {
        let mut out = String::new();
        let mut names = Vec::new();
        self.write_term(&mut out, node, &mut names, true, 0);
        out
    }

    fn fresh_name(&self, node: NodeId, names: &[String]) -> String {
        let base = self.binder_hint(node).unwrap_or("x").to_string();
        let mut candidate = base.clone();
        let mut i = 1;
        while names.contains(&candidate) {
            candidate = format!("{base}{i}");
            i += 1;
        }
        candidate
    }

    fn write_term(
        &self,
        out: &mut String,
        node: NodeId,
        names: &mut Vec<String>,
        top: bool,
        depth: usize,
    ) {
        if !top {
            if let Some(name) = self.nonterminal_name(node) {
                out.push_str(name);
                return;
            }
        }
        if depth > 64 {
            out.push_str("...");
            return;
        }
        match self.kind(node) {
            NodeKind::Var { index } => {
                let i = *index as usize;
                if i < names.len() {
                    out.push_str(&names[names.len() - 1 - i]);
                } else {
                    let _ = write!(out, "_{}", i - names.len());
                }
            }
            NodeKind::Symbol { symbol, args } => {
                out.push_str(&self.symbol(*symbol).name);
                for a in args {
                    out.push(' ');
                    self.write_atom(out, *a, names, depth + 1);
                }
            }
            NodeKind::App { operator, operand } => {
                if matches!(self.kind(*operator), NodeKind::Abs { .. })
                    && self.nonterminal_name(*operator).is_none()
                {
                    out.push('(');
                    self.write_term(out, *operator, names, false, depth + 1);
                    out.push(')');
                } else {
                    self.write_term(out, *operator, names, false, depth + 1);
                }
                out.push(' ');
                self.write_atom(out, *operand, names, depth + 1);
            }
            NodeKind::Abs { body } => {
                let name = self.fresh_name(node, names);
                let sort = self.binder_sort(node).expect("abstraction");
                let _ = write!(out, "\\{name}:{sort}. ");
                names.push(name);
                self.write_term(out, *body, names, false, depth + 1);
                names.pop();
            }
        }
    }

    fn write_atom(&self, out: &mut String, node: NodeId, names: &mut Vec<String>, depth: usize) {
        let simple = self.nonterminal_name(node).is_some()
            || matches!(self.kind(node), NodeKind::Var { .. })
            || matches!(self.kind(node), NodeKind::Symbol { args, .. } if args.is_empty());
        if simple {
            self.write_term(out, node, names, false, depth);
        } else {
            out.push('(');
            self.write_term(out, node, names, false, depth);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse::parse_program;

    const DOUBLING: &str = "symbol a : 1\nsymbol e : 0\n\
        R : (o -> o) -> o = \\f:o->o. br (f e) (R (\\x:o. f (f x)))\n\
        start R (\\x:o. a x)\n";
    const IDENTITY_ITERATED: &str = "symbol a : 1\nsymbol e : 0\n\
        R : (o -> o) -> o = \\f:o->o. br (f e) (R (\\x:o. f (f x)))\n\
        start R (\\x:o. x)\n";

    fn build(src: &str) -> (Program, Elaborated) {
        let p = parse_program(src).unwrap();
        let e = elaborate(&p);
        (p, e)
    }

    #[test]
    fn p1_root_is_application_of_cyclic_r() {
        let (p, e) = build(DOUBLING);
        let r = e.nonterminal(&p, "R").unwrap();
        let NodeKind::App { operator, operand } = e.store.kind(e.root).clone() else {
            panic!("root should be an application");
        };
        assert_eq!(operator, r);
        assert_eq!(e.store.display(operand), "\\x:o. a x");
        // R's body reaches R again
        assert!(e.store.subterm_universe(r).contains(&r));
        let inner: Vec<_> = e
            .store
            .subterm_universe(r)
            .into_iter()
            .filter(|&n| n != r && e.store.children(n).contains(&r))
            .collect();
        assert_eq!(inner.len(), 1);
        assert_eq!(e.store.complexity(e.root), 2);
        assert!(e.store.check_sorts(e.root).is_ok());
    }

    #[test]
    fn constant_program_has_single_node() {
        let (_, e) = build("symbol e : 0\nstart e");
        assert_eq!(e.store.subterm_universe(e.root), vec![e.root]);
        assert_eq!(e.store.complexity(e.root), 0);
    }

    #[test]
    fn ground_loop_universe() {
        let (p, e) = build("symbol a : 1\nsymbol e : 0\nZ : o = br e (a Z)\nstart Z");
        let z = e.nonterminal(&p, "Z").unwrap();
        assert_eq!(e.root, z);
        let universe = e.store.subterm_universe(e.root);
        assert_eq!(universe.len(), 3);
        assert!(universe.iter().all(|n| e.store.order(*n) == 0));
        assert_eq!(e.store.complexity(e.root), 0);
    }

    #[test]
    fn universe_is_closed_under_children() {
        let (_, e) = build(DOUBLING);
        let u = e.store.subterm_universe(e.root);
        for n in &u {
            for c in e.store.children(*n) {
                assert!(u.contains(&c));
            }
        }
        let names: Vec<String> = u.iter().map(|n| e.store.display(*n)).collect();
        assert!(names.iter().any(|s| s == "\\x:o. a x"));
        assert!(names.iter().any(|s| s == "\\x:o. _0 (_0 x)"));
    }

    #[test]
    fn shared_definition_is_bisimilar_across_programs() {
        let (prog1, e1) = build(DOUBLING);
        let (prog3, e3) = build(IDENTITY_ITERATED);
        let r1 = e1.nonterminal(&prog1, "R").unwrap();
        let r3 = e3.nonterminal(&prog3, "R").unwrap();
        assert!(e1.store.bisimilar(r1, &e3.store, r3));
        assert!(!e1.store.bisimilar(e1.root, &e3.store, e3.root));
    }

    #[test]
    fn elaboration_is_idempotent() {
        let (p, e) = build(DOUBLING);
        let again = elaborate(&p);
        assert_eq!(
            e.store.subterm_universe(e.root).len(),
            again.store.subterm_universe(again.root).len()
        );
        assert!(e.store.bisimilar(e.root, &again.store, again.root));
    }

    #[test]
    fn alpha_equivalent_terms_share_nodes() {
        let (_, e) = build(
            "symbol a : 1\nsymbol e : 0\nF : (o -> o) -> o = \\g:o->o. g e\n\
             start br (F (\\x:o. a x)) (F (\\y:o. a y))",
        );
        let NodeKind::Symbol { args, .. } = e.store.kind(e.root) else {
            panic!()
        };
        assert_eq!(args[0], args[1]);
    }

    #[test]
    fn binder_orders_are_collected() {
        let (_, e) = build(DOUBLING);
        let orders = e.store.binder_orders(e.root);
        let mut all: Vec<u32> = orders.values().flatten().copied().collect();
        all.sort();
        all.dedup();
        // f is bound by R (order 2), x by the order-1 abstractions
        assert_eq!(all, vec![1, 2]);
    }
}
