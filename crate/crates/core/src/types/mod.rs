//! Intersection types with flags and markers.
//!
//! A full type `(k, F, M, τ)` pairs a type `τ` with an order `k` and two
//! disjoint sets of orders below `k`: the flag orders `F` and the marker
//! orders `M`. A judgment `Γ ⊢ P : (m, F, M, τ) ▷ c` additionally carries a
//! flag counter `c`, the number of order-`m` flags placed in its derivation.
//!
//! Variables in environments are de Bruijn indices relative to the subject of
//! the judgment, so judgments about the same subterm in different contexts
//! compare structurally.

mod comp;
mod enumerate;
mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{NodeId, Sort};

pub use comp::{comp, split};
pub use enumerate::{count_full_types, enumerate_full_types, enumerate_itypes};
pub use rules::{rule_app, rule_br, rule_con, rule_lambda, rule_var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    /// The subject does not have the syntactic form the rule needs.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("side condition violated: {0}")]
    PreconditionViolation(String),
    #[error("marker orders overlap: {0}")]
    DisjointnessViolation(String),
    #[error("operand types do not match the operator's argument set: {0}")]
    ArgumentTypeMismatch(String),
    #[error("resource limit reached: {0}")]
    ResourceLimit(String),
}

/// Largest order representable in an [`OrderSet`].
pub const MAX_ORDER: u32 = 15;

/// A set of small naturals stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderSet(u16);

impl OrderSet {
    pub const EMPTY: OrderSet = OrderSet(0);

    pub fn from_bits(bits: u16) -> Self {
        OrderSet(bits)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    /// `{0, ..., k-1}`.
    pub fn below(k: u32) -> Self {
        assert!(k <= MAX_ORDER + 1, "order {k} too large");
        OrderSet(((1u32 << k) - 1) as u16)
    }

    pub fn singleton(n: u32) -> Self {
        assert!(n <= MAX_ORDER, "order {n} too large");
        OrderSet(1 << n)
    }

    pub fn contains(self, n: u32) -> bool {
        n <= MAX_ORDER && self.0 & (1 << n) != 0
    }

    pub fn insert(&mut self, n: u32) {
        *self = self.union(OrderSet::singleton(n));
    }

    pub fn union(self, other: OrderSet) -> Self {
        OrderSet(self.0 | other.0)
    }

    pub fn intersection(self, other: OrderSet) -> Self {
        OrderSet(self.0 & other.0)
    }

    pub fn difference(self, other: OrderSet) -> Self {
        OrderSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: OrderSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: OrderSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    /// Elements smaller than `k`.
    pub fn restrict_below(self, k: u32) -> Self {
        self.intersection(OrderSet::below(k.min(MAX_ORDER + 1)))
    }

    /// Elements at least `k`.
    pub fn restrict_from(self, k: u32) -> Self {
        self.difference(OrderSet::below(k.min(MAX_ORDER + 1)))
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        (0..=MAX_ORDER).filter(move |n| self.contains(*n))
    }
}

impl FromIterator<u32> for OrderSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = OrderSet::EMPTY;
        for n in iter {
            s.insert(n);
        }
        s
    }
}

impl fmt::Display for OrderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("{")?;
        for (i, n) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for OrderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A type: `o`, or `T -> τ` where `T` is a set of full types for the argument.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IType {
    Ground,
    Arrow(Arc<ArrowType>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowType {
    pub args: BTreeSet<FullType>,
    pub result: IType,
}

impl IType {
    pub fn arrow(args: BTreeSet<FullType>, result: IType) -> Self {
        IType::Arrow(Arc::new(ArrowType { args, result }))
    }

    pub fn as_arrow(&self) -> Option<(&BTreeSet<FullType>, &IType)> {
        match self {
            IType::Ground => None,
            IType::Arrow(a) => Some((&a.args, &a.result)),
        }
    }

    /// Whether this type is shaped by `sort`; argument full types must have
    /// the order of the arrow sort they belong to.
    pub fn fits(&self, sort: &Sort) -> bool {
        match (self, sort) {
            (IType::Ground, Sort::Ground) => true,
            (IType::Arrow(a), Sort::Arrow(arg, res)) => {
                let k = sort.order();
                a.result.fits(res) && a.args.iter().all(|t| t.order == k && t.fits(arg))
            }
            _ => false,
        }
    }
}

impl fmt::Display for IType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IType::Ground => f.write_str("o"),
            IType::Arrow(a) => {
                f.write_str("{")?;
                for (i, t) in a.args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, "}} → {}", a.result)
            }
        }
    }
}

impl fmt::Debug for IType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FullType {
    pub order: u32,
    pub flags: OrderSet,
    pub markers: OrderSet,
    pub itype: IType,
}

impl FullType {
    pub fn new(order: u32, flags: OrderSet, markers: OrderSet, itype: IType) -> Result<Self, TypeError> {
        if order > MAX_ORDER {
            return Err(TypeError::ResourceLimit(format!(
                "order {order} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        let range = OrderSet::below(order);
        if !flags.is_subset(range) || !markers.is_subset(range) {
            return Err(TypeError::PreconditionViolation(format!(
                "flags {flags} and markers {markers} must lie below order {order}"
            )));
        }
        if !flags.is_disjoint(markers) {
            return Err(TypeError::PreconditionViolation(format!(
                "flags {flags} and markers {markers} overlap"
            )));
        }
        Ok(FullType {
            order,
            flags,
            markers,
            itype,
        })
    }

    /// `(order, ∅, ∅, o)`.
    pub fn ground(order: u32) -> Self {
        FullType::new(order, OrderSet::EMPTY, OrderSet::EMPTY, IType::Ground).expect("valid")
    }

    /// The root goal type `(m, ∅, {0..m-1}, o)`.
    pub fn goal(m: u32) -> Self {
        FullType::new(m, OrderSet::EMPTY, OrderSet::below(m), IType::Ground).expect("valid")
    }

    pub fn fits(&self, sort: &Sort) -> bool {
        self.itype.fits(sort)
    }
}

impl fmt::Display for FullType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.order, self.flags, self.markers, self.itype)
    }
}

impl fmt::Debug for FullType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Things that provide markers.
pub trait Markers {
    fn markers(&self) -> OrderSet;
}

impl Markers for FullType {
    fn markers(&self) -> OrderSet {
        self.markers
    }
}

impl Markers for BTreeSet<FullType> {
    fn markers(&self) -> OrderSet {
        self.iter().fold(OrderSet::EMPTY, |acc, t| acc.union(t.markers))
    }
}

impl Markers for TypeEnv {
    fn markers(&self) -> OrderSet {
        self.bindings
            .values()
            .fold(OrderSet::EMPTY, |acc, s| acc.union(s.markers()))
    }
}

pub fn markers_of<T: Markers + ?Sized>(x: &T) -> OrderSet {
    x.markers()
}

/// Maps de Bruijn indices to sets of full types; absent means empty.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeEnv {
    bindings: BTreeMap<u32, BTreeSet<FullType>>,
}

impl TypeEnv {
    pub fn empty() -> Self {
        TypeEnv::default()
    }

    pub fn singleton(var: u32, ft: FullType) -> Self {
        let mut env = TypeEnv::empty();
        env.insert(var, ft);
        env
    }

    pub fn from_sets(sets: impl IntoIterator<Item = (u32, BTreeSet<FullType>)>) -> Self {
        let mut env = TypeEnv::empty();
        for (v, s) in sets {
            for t in s {
                env.insert(v, t);
            }
        }
        env
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, var: u32) -> Option<&BTreeSet<FullType>> {
        self.bindings.get(&var)
    }

    /// The set bound to `var`, empty if unbound.
    pub fn types_of(&self, var: u32) -> BTreeSet<FullType> {
        self.bindings.get(&var).cloned().unwrap_or_default()
    }

    pub fn insert(&mut self, var: u32, ft: FullType) {
        self.bindings.entry(var).or_default().insert(ft);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BTreeSet<FullType>)> {
        self.bindings.iter().map(|(v, s)| (*v, s))
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.bindings.keys().copied()
    }

    pub fn union(&self, other: &TypeEnv) -> TypeEnv {
        let mut out = self.clone();
        for (v, s) in other.iter() {
            for t in s {
                out.insert(v, t.clone());
            }
        }
        out
    }

    pub fn is_subset(&self, other: &TypeEnv) -> bool {
        self.iter().all(|(v, s)| {
            other
                .get(v)
                .is_some_and(|o| s.iter().all(|t| o.contains(t)))
        })
    }

    /// Splits off the binder of an abstraction body: returns the set of
    /// index 0 and the rest with every index moved down by one.
    pub fn unbind(&self) -> (BTreeSet<FullType>, TypeEnv) {
        let bound = self.types_of(0);
        let rest = TypeEnv {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| **v > 0)
                .map(|(v, s)| (v - 1, s.clone()))
                .collect(),
        };
        (bound, rest)
    }

    /// Inverse of [`TypeEnv::unbind`].
    pub fn bind(&self, bound: &BTreeSet<FullType>) -> TypeEnv {
        let mut bindings: BTreeMap<u32, BTreeSet<FullType>> =
            self.bindings.iter().map(|(v, s)| (v + 1, s.clone())).collect();
        if !bound.is_empty() {
            bindings.insert(0, bound.clone());
        }
        TypeEnv { bindings }
    }

    /// Keeps only the variables in `vars`.
    pub fn restrict(&self, vars: &BTreeSet<u32>) -> TypeEnv {
        TypeEnv {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, s)| (*v, s.clone()))
                .collect(),
        }
    }

    /// Marker orders of distinct variables are pairwise disjoint.
    pub fn markers_disjoint_across_vars(&self) -> bool {
        let mut seen = OrderSet::EMPTY;
        for s in self.bindings.values() {
            let m = s.markers();
            if !seen.is_disjoint(m) {
                return false;
            }
            seen = seen.union(m);
        }
        true
    }
}

impl fmt::Display for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        f.write_str("ε[")?;
        for (i, (v, s)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "#{v} ↦ {{")?;
            for (j, t) in s.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Judgment {
    pub env: TypeEnv,
    pub subject: NodeId,
    pub fulltype: FullType,
    pub counter: u64,
}

impl Judgment {
    pub fn class(&self) -> JudgmentClass {
        class_of(self)
    }
}

/// A judgment with its counter erased.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JudgmentClass {
    pub env: TypeEnv,
    pub subject: NodeId,
    pub fulltype: FullType,
}

impl JudgmentClass {
    pub fn with_counter(&self, counter: u64) -> Judgment {
        Judgment {
            env: self.env.clone(),
            subject: self.subject,
            fulltype: self.fulltype.clone(),
            counter,
        }
    }
}

pub fn class_of(j: &Judgment) -> JudgmentClass {
    JudgmentClass {
        env: j.env.clone(),
        subject: j.subject,
        fulltype: j.fulltype.clone(),
    }
}
