use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use super::reduce::{head_run, HeadForm, HeadRun};
use crate::term::{NodeId, TermStore, BR};

/// A finite tree over the ranked alphabet, without `br` nodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankedTree {
    pub label: String,
    pub children: Vec<RankedTree>,
}

impl RankedTree {
    pub fn leaf(label: &str) -> Self {
        RankedTree {
            label: label.to_string(),
            children: Vec::new(),
        }
    }

    pub fn node(label: &str, children: Vec<RankedTree>) -> Self {
        RankedTree {
            label: label.to_string(),
            children,
        }
    }

    pub fn size(&self) -> usize {
        tree_size(self)
    }
}

pub fn tree_size(tree: &RankedTree) -> usize {
    1 + tree.children.iter().map(tree_size).sum::<usize>()
}

impl fmt::Display for RankedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Limits for [`enumerate_language`].
///
/// `max_beta_steps` bounds the β-steps spent along any single exploration
/// path, counted from the root through every head reduction performed on
/// the way (including the `br` spine). Because the bound is per path, a
/// tree is found or not independently of how large the other budget is,
/// which keeps the sample monotone in both fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_beta_steps: u64,
    pub max_tree_size: usize,
}

impl Budget {
    pub fn new(max_tree_size: usize, max_beta_steps: u64) -> Self {
        Budget {
            max_beta_steps,
            max_tree_size,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_beta_steps: 200,
            max_tree_size: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageSample {
    pub trees: BTreeSet<RankedTree>,
    /// No exploration path was cut by a budget.
    pub complete: bool,
    /// Number of head reductions that provably loop forever.
    pub diverged_branches: usize,
}

impl LanguageSample {
    pub fn sizes(&self) -> BTreeSet<usize> {
        self.trees.iter().map(tree_size).collect()
    }
}

const MAX_NESTING: usize = 1000;

/// Enumerates the `br`-free trees of the language of the closed ground term
/// `root` with at most `budget.max_tree_size` nodes.
pub fn enumerate_language(store: &mut TermStore, root: NodeId, budget: Budget) -> LanguageSample {
    let mut run = Enumeration {
        store,
        budget,
        heads: HashMap::new(),
        memo: HashMap::new(),
        active: HashSet::new(),
        complete: true,
        diverged: HashSet::new(),
        nesting: 0,
    };
    let (trees, _) = run.language(root, budget.max_tree_size, budget.max_beta_steps);
    debug_assert!(trees.iter().all(|t| tree_size(t) <= budget.max_tree_size));
    LanguageSample {
        trees,
        complete: run.complete,
        diverged_branches: run.diverged.len(),
    }
}

struct Enumeration<'s> {
    store: &'s mut TermStore,
    budget: Budget,
    heads: HashMap<NodeId, HeadRun>,
    memo: HashMap<(NodeId, usize, u64), BTreeSet<RankedTree>>,
    active: HashSet<(NodeId, usize)>,
    complete: bool,
    diverged: HashSet<NodeId>,
    nesting: usize,
}

enum Head {
    Symbol(crate::term::SymbolId, Vec<NodeId>, u64),
    Nothing,
}

impl Enumeration<'_> {
    fn head(&mut self, node: NodeId, fuel: u64) -> Head {
        let run = match self.heads.get(&node) {
            Some(r) => r.clone(),
            None => {
                let r = head_run(self.store, node, self.budget.max_beta_steps);
                self.heads.insert(node, r.clone());
                r
            }
        };
        match run.form {
            HeadForm::Constructor(symbol, args) if run.steps <= fuel => {
                Head::Symbol(symbol, args, fuel - run.steps)
            }
            HeadForm::Diverged if run.looped => {
                self.diverged.insert(node);
                Head::Nothing
            }
            _ => {
                self.complete = false;
                Head::Nothing
            }
        }
    }

    /// Trees of size at most `limit`; the flag reports that a cycle cut
    /// short the result, which then must not be memoised.
    fn language(&mut self, node: NodeId, limit: usize, fuel: u64) -> (BTreeSet<RankedTree>, bool) {
        if limit == 0 || self.nesting >= MAX_NESTING {
            self.complete = false;
            return (BTreeSet::new(), false);
        }
        if let Some(done) = self.memo.get(&(node, limit, fuel)) {
            return (done.clone(), false);
        }
        if self.active.contains(&(node, limit)) {
            // Revisiting with no progress in size: anything found from here
            // is also found by the enclosing visit.
            return (BTreeSet::new(), true);
        }
        self.nesting += 1;
        let mut entered = vec![(node, limit)];
        self.active.insert((node, limit));
        let mut out = BTreeSet::new();
        let mut tainted = false;
        let mut current = node;
        let mut fuel_left = fuel;
        loop {
            let Head::Symbol(symbol, args, rest) = self.head(current, fuel_left) else {
                break;
            };
            fuel_left = rest;
            if symbol == BR {
                let (left, t) = self.language(args[0], limit, fuel_left);
                out.extend(left);
                tainted |= t;
                current = args[1];
                if !self.active.insert((current, limit)) {
                    tainted = true;
                    break;
                }
                entered.push((current, limit));
                continue;
            }
            let label = self.store.symbol(symbol).name.clone();
            let (trees, t) = self.constructor(&label, &args, limit, fuel_left);
            out.extend(trees);
            tainted |= t;
            break;
        }
        for key in entered {
            self.active.remove(&key);
        }
        self.nesting -= 1;
        if !tainted {
            self.memo.insert((node, limit, fuel), out.clone());
        }
        (out, tainted)
    }

    fn constructor(
        &mut self,
        label: &str,
        args: &[NodeId],
        limit: usize,
        fuel: u64,
    ) -> (BTreeSet<RankedTree>, bool) {
        if args.is_empty() {
            return (BTreeSet::from([RankedTree::leaf(label)]), false);
        }
        if limit <= args.len() {
            self.complete = false;
            return (BTreeSet::new(), false);
        }
        let child_limit = limit - args.len();
        let mut tainted = false;
        let mut options = Vec::with_capacity(args.len());
        for &a in args {
            let (set, t) = self.language(a, child_limit, fuel);
            tainted |= t;
            if set.is_empty() {
                return (BTreeSet::new(), tainted);
            }
            options.push(set);
        }
        // combine child choices, keeping the total size within the limit
        let mut partial: Vec<(Vec<RankedTree>, usize)> = vec![(Vec::new(), 1)];
        for set in &options {
            let mut next = Vec::new();
            for (prefix, size) in &partial {
                for t in set {
                    let s = size + tree_size(t);
                    if s <= limit {
                        let mut v = prefix.clone();
                        v.push(t.clone());
                        next.push((v, s));
                    } else {
                        self.complete = false;
                    }
                }
            }
            partial = next;
        }
        let trees = partial
            .into_iter()
            .map(|(children, _)| RankedTree::node(label, children))
            .collect();
        (trees, tainted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{elaborate, parse_program};

    fn sample(src: &str, budget: Budget) -> LanguageSample {
        let p = parse_program(src).unwrap();
        let mut el = elaborate(&p);
        enumerate_language(&mut el.store, el.root, budget)
    }

    const DOUBLING: &str = "symbol a : 1\nsymbol e : 0\n\
        R : (o -> o) -> o = \\f:o->o. br (f e) (R (\\x:o. f (f x)))\n\
        start R (\\x:o. a x)\n";

    #[test]
    fn sizes_of_trees() {
        let e = RankedTree::leaf("e");
        assert_eq!(tree_size(&e), 1);
        assert_eq!(tree_size(&RankedTree::node("a", vec![e.clone()])), 2);
        let b = RankedTree::node("b", vec![e.clone(), e]);
        assert_eq!(tree_size(&b), 3);
        assert_eq!(b.to_string(), "b(e,e)");
    }

    #[test]
    fn single_leaf_is_complete() {
        let s = sample("symbol e : 0\nstart e", Budget::default());
        assert_eq!(s.trees, BTreeSet::from([RankedTree::leaf("e")]));
        assert!(s.complete);
    }

    #[test]
    fn finite_choice_is_exact() {
        let s = sample("symbol a : 1\nsymbol e : 0\nstart br e (a e)", Budget::default());
        let e = RankedTree::leaf("e");
        let ae = RankedTree::node("a", vec![e.clone()]);
        assert_eq!(s.trees, BTreeSet::from([e, ae]));
        assert!(s.complete);
    }

    #[test]
    fn doubling_chains() {
        let s = sample(DOUBLING, Budget::default());
        assert_eq!(s.sizes(), BTreeSet::from([2, 3, 5, 9]));
        assert!(!s.complete);
        for t in &s.trees {
            // a^n e
            let mut cur = t;
            while cur.label == "a" {
                cur = &cur.children[0];
            }
            assert_eq!(cur, &RankedTree::leaf("e"));
        }
    }

    #[test]
    fn identity_chains_collapse() {
        let src = "symbol a : 1\nsymbol e : 0\n\
            R : (o -> o) -> o = \\f:o->o. br (f e) (R (\\x:o. f (f x)))\n\
            start R (\\x:o. x)\n";
        let s = sample(src, Budget::default());
        assert_eq!(s.trees, BTreeSet::from([RankedTree::leaf("e")]));
    }

    #[test]
    fn divergence_contributes_nothing() {
        let s = sample("symbol e : 0\nN : o -> o = \\x:o. N x\nstart N e", Budget::default());
        assert!(s.trees.is_empty());
        assert_eq!(s.diverged_branches, 1);
        assert!(s.complete);
    }

    #[test]
    fn ground_loop_grows() {
        let s = sample(
            "symbol a : 1\nsymbol e : 0\nZ : o = br e (a Z)\nstart Z",
            Budget::new(6, 100),
        );
        assert_eq!(s.sizes(), (1..=6).collect());
        assert!(!s.complete);
    }

    #[test]
    fn binary_doubling() {
        let src = "symbol b : 2\nsymbol e : 0\n\
            R : (o -> o) -> o = \\f:o->o. br (f e) (R (\\x:o. f (f x)))\n\
            start R (\\x:o. b x x)\n";
        // f_k e is a complete binary tree with 2^(2^k) leaves
        let s = sample(src, Budget::new(31, 100));
        assert_eq!(s.sizes(), BTreeSet::from([3, 7, 31]));
    }
}
