//! Three-valued semantics: truth values, semantic values and domains,
//! interpretations, states, and the evaluator for terms, goals and clauses.

mod enumerate;
mod eval;
mod universe;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::ast::{PredId, Term};

pub use enumerate::for_each_product;
pub use enumerate::{count_states, enumerate_states, enumerate_typed_states, StateIter};
pub use eval::{eval_body, eval_call, eval_clause, eval_seq, eval_term, eval_unify, Evaluator};
pub use universe::{ArgDomains, Constructor, Universe, UniverseBuilder};

/// Default cap on enumerated states (and on materialized universe sizes).
pub const DEFAULT_MAX_STATES: u64 = 1_000_000;

/// Default nesting bound for tree domains.
pub const DEFAULT_DEPTH: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TruthValue {
    True,
    False,
    Wrong,
}

use TruthValue::{False, True, Wrong};

impl TruthValue {
    pub const ALL: [TruthValue; 3] = [True, False, Wrong];

    pub fn from_bool(b: bool) -> TruthValue {
        if b {
            True
        } else {
            False
        }
    }

    pub fn and(self, other: TruthValue) -> TruthValue {
        match (self, other) {
            (Wrong, _) | (_, Wrong) => Wrong,
            (True, True) => True,
            _ => False,
        }
    }

    pub fn or(self, other: TruthValue) -> TruthValue {
        match (self, other) {
            (Wrong, _) | (_, Wrong) => Wrong,
            (False, False) => False,
            _ => True,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> TruthValue {
        match self {
            True => False,
            False => True,
            Wrong => Wrong,
        }
    }

    pub fn implies(self, other: TruthValue) -> TruthValue {
        self.not().or(other)
    }

    pub fn is_wrong(self) -> bool {
        self == Wrong
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            True => "true",
            False => "false",
            Wrong => "wrong",
        })
    }
}

pub fn tv_and(a: TruthValue, b: TruthValue) -> TruthValue {
    a.and(b)
}

pub fn tv_or(a: TruthValue, b: TruthValue) -> TruthValue {
    a.or(b)
}

pub fn tv_not(a: TruthValue) -> TruthValue {
    a.not()
}

pub fn tv_implies(a: TruthValue, b: TruthValue) -> TruthValue {
    a.implies(b)
}

/// Index of a domain in its universe. `BOOL` and `WRONG` are fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DomainId(pub u32);

impl DomainId {
    pub const BOOL: DomainId = DomainId(u32::MAX - 1);
    pub const WRONG: DomainId = DomainId(u32::MAX);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub type DomainSet = BTreeSet<DomainId>;

pub type Sym = Arc<str>;

/// A semantic value. Functions live in [`Func`], not here, since states and
/// tables never hold them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Base {
        domain: DomainId,
        token: Sym,
    },
    /// The domain is cached so that `domain()` needs no universe lookup.
    Tree {
        domain: DomainId,
        ctor: Sym,
        children: Arc<[Value]>,
    },
    Bool(bool),
    Wrong,
}

impl Value {
    pub fn base(domain: DomainId, token: &str) -> Value {
        Value::Base {
            domain,
            token: token.into(),
        }
    }

    pub fn tree(domain: DomainId, ctor: &str, children: Vec<Value>) -> Value {
        Value::Tree {
            domain,
            ctor: ctor.into(),
            children: children.into(),
        }
    }

    pub fn domain(&self) -> DomainId {
        match self {
            Value::Base { domain, .. } | Value::Tree { domain, .. } => *domain,
            Value::Bool(_) => DomainId::BOOL,
            Value::Wrong => DomainId::WRONG,
        }
    }

    pub fn is_wrong(&self) -> bool {
        matches!(self, Value::Wrong)
    }

    /// Constructor nesting; leaves are 0.
    pub fn depth(&self) -> usize {
        match self {
            Value::Tree { children, .. } if !children.is_empty() => {
                1 + children.iter().map(Value::depth).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// The ground term this value prints as.
    pub fn to_term(&self) -> Term {
        match self {
            Value::Base { token, .. } => Term::Const(String::from(&**token)),
            Value::Tree { ctor, children, .. } => {
                Term::compound(ctor, children.iter().map(Value::to_term).collect())
            }
            Value::Bool(b) => Term::Const(if *b { "true" } else { "false" }.into()),
            Value::Wrong => Term::Const("wrong".into()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DomainKind {
    Basic,
    Tree,
}

/// A finite term domain. `Bool` and the wrong singleton are implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub id: DomainId,
    pub name: String,
    pub kind: DomainKind,
    /// Sorted, duplicate-free.
    pub members: Vec<Value>,
}

impl Domain {
    pub fn contains(&self, v: &Value) -> bool {
        v.domain() == self.id && self.members.binary_search(v).is_ok()
    }
}

/// Argument domains (each position a union of domains) and result domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub params: Vec<DomainSet>,
    pub result: DomainId,
}

impl Signature {
    pub fn accepts(&self, args: &[Value]) -> bool {
        args.len() == self.params.len()
            && args
                .iter()
                .zip(&self.params)
                .all(|(v, ds)| ds.contains(&v.domain()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FuncBody {
    /// Free tree building, undefined beyond the depth bound.
    Constructor {
        depth_bound: usize,
    },
    Table(BTreeMap<Vec<Value>, Value>),
}

/// A semantic function: the value an interpretation gives a functor or a
/// predicate symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Func {
    pub name: Sym,
    pub signature: Signature,
    pub body: FuncBody,
}

/// Result of applying a [`Func`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applied {
    Value(Value),
    /// Some argument lies outside the signature.
    OutOfSignature,
    /// Arguments fit the signature but the finite table has no entry.
    Undefined,
}

impl Func {
    pub fn apply(&self, args: &[Value]) -> Applied {
        if !self.signature.accepts(args) {
            return Applied::OutOfSignature;
        }
        match &self.body {
            FuncBody::Constructor { depth_bound } => {
                let v = Value::Tree {
                    domain: self.signature.result,
                    ctor: self.name.clone(),
                    children: args.into(),
                };
                if v.depth() > *depth_bound {
                    Applied::Undefined
                } else {
                    Applied::Value(v)
                }
            }
            FuncBody::Table(t) => t
                .get(args)
                .cloned()
                .map_or(Applied::Undefined, Applied::Value),
        }
    }

    pub fn is_constructor(&self) -> bool {
        matches!(self.body, FuncBody::Constructor { .. })
    }

    pub fn table(&self) -> Option<&BTreeMap<Vec<Value>, Value>> {
        match &self.body {
            FuncBody::Table(t) => Some(t),
            FuncBody::Constructor { .. } => None,
        }
    }
}

/// The function `I` together with the universe it draws values from.
#[derive(Clone, Debug)]
pub struct Interpretation {
    pub universe: Universe,
    pub constants: BTreeMap<String, Value>,
    pub functions: BTreeMap<(String, usize), Func>,
    pub predicates: BTreeMap<PredId, Func>,
}

impl Interpretation {
    pub fn new(universe: Universe) -> Interpretation {
        Interpretation {
            universe,
            constants: BTreeMap::new(),
            functions: BTreeMap::new(),
            predicates: BTreeMap::new(),
        }
    }

    /// Interprets every constructor of the universe freely: nullary ones as
    /// leaf trees, the rest as constructor functions.
    pub fn with_free_constructors(universe: Universe) -> Interpretation {
        let mut i = Interpretation::new(universe);
        let depth = i.universe.depth();
        let ctors: Vec<Constructor> = i.universe.constructors().cloned().collect();
        for c in ctors {
            if c.params.is_empty() {
                i.constants
                    .insert(c.name.clone(), Value::tree(c.result, &c.name, Vec::new()));
            } else {
                i.functions.insert(
                    (c.name.clone(), c.params.len()),
                    Func {
                        name: c.name.as_str().into(),
                        signature: Signature {
                            params: c.params.clone(),
                            result: c.result,
                        },
                        body: FuncBody::Constructor { depth_bound: depth },
                    },
                );
            }
        }
        for d in i.universe.domains() {
            if d.kind == DomainKind::Basic {
                for m in &d.members {
                    if let Value::Base { token, .. } = m {
                        i.constants.insert(String::from(&**token), m.clone());
                    }
                }
            }
        }
        i
    }

    pub fn constant(&self, k: &str) -> Option<&Value> {
        self.constants.get(k)
    }

    pub fn function(&self, f: &str, arity: usize) -> Option<&Func> {
        self.functions.get(&(String::from(f), arity))
    }

    pub fn predicate(&self, p: &PredId) -> Option<&Func> {
        self.predicates.get(p)
    }

    /// Installs a predicate table with `Bool` results.
    pub fn set_predicate(
        &mut self,
        p: PredId,
        params: Vec<DomainSet>,
        table: BTreeMap<Vec<Value>, bool>,
    ) {
        let func = Func {
            name: p.name.as_str().into(),
            signature: Signature {
                params,
                result: DomainId::BOOL,
            },
            body: FuncBody::Table(
                table
                    .into_iter()
                    .map(|(k, b)| (k, Value::Bool(b)))
                    .collect(),
            ),
        };
        self.predicates.insert(p, func);
    }
}

/// Variable valuation.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct State(pub BTreeMap<String, Value>);

impl State {
    pub fn new() -> State {
        State::default()
    }

    pub fn get(&self, x: &str) -> Option<&Value> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: &str, v: Value) {
        self.0.insert(x.into(), v);
    }

    pub fn with(mut self, x: &str, v: Value) -> State {
        self.insert(x, v);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }
}

impl FromIterator<(String, Value)> for State {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> State {
        State(iter.into_iter().collect())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} = {v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("expected {expected} states, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("{what}: {count} exceeds the cap of {cap}")]
    UniverseTooLarge { what: String, count: u128, cap: u64 },
    #[error("domain `{0}` is empty")]
    EmptyDomain(String),
    #[error("domain `{0}` is declared twice")]
    DuplicateDomain(String),
    #[error("token `{token}` belongs to both `{first}` and `{second}`")]
    DuplicateToken {
        token: String,
        first: String,
        second: String,
    },
    #[error("constructor {0}/{1} is declared twice")]
    DuplicateConstructor(String, usize),
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(c: char) -> TruthValue {
        match c {
            't' => True,
            'f' => False,
            _ => Wrong,
        }
    }

    // Rows and columns ordered true, false, wrong.
    const AND: [&str; 3] = ["tfw", "ffw", "www"];
    const OR: [&str; 3] = ["ttw", "tfw", "www"];

    #[test]
    fn connective_tables() {
        for (i, a) in TruthValue::ALL.into_iter().enumerate() {
            for (j, b) in TruthValue::ALL.into_iter().enumerate() {
                assert_eq!(tv_and(a, b), tv(AND[i].as_bytes()[j] as char));
                assert_eq!(tv_or(a, b), tv(OR[i].as_bytes()[j] as char));
            }
        }
        assert_eq!(tv_not(True), False);
        assert_eq!(tv_not(False), True);
        assert_eq!(tv_not(Wrong), Wrong);
        assert_eq!(tv_implies(False, Wrong), Wrong);
        assert_eq!(tv_implies(False, False), True);
    }

    #[test]
    fn algebraic_laws_hold_on_all_values() {
        for a in TruthValue::ALL {
            assert_eq!(a.and(a), a);
            assert_eq!(a.or(a), a);
            assert_eq!(a.and(Wrong), Wrong);
            assert_eq!(Wrong.or(a), Wrong);
            for b in TruthValue::ALL {
                assert_eq!(a.and(b), b.and(a));
                assert_eq!(a.or(b), b.or(a));
                assert_eq!(a.implies(b), a.not().or(b));
                for c in TruthValue::ALL {
                    assert_eq!(a.and(b).and(c), a.and(b.and(c)));
                    assert_eq!(a.or(b).or(c), a.or(b.or(c)));
                }
            }
        }
    }

    #[test]
    fn classical_on_booleans() {
        for a in [false, true] {
            assert_eq!(TruthValue::from_bool(a).not(), TruthValue::from_bool(!a));
            for b in [false, true] {
                let (x, y) = (TruthValue::from_bool(a), TruthValue::from_bool(b));
                assert_eq!(x.and(y), TruthValue::from_bool(a && b));
                assert_eq!(x.or(y), TruthValue::from_bool(a || b));
            }
        }
    }

    #[test]
    fn values_print_as_terms() {
        let nil = Value::tree(DomainId(1), "[]", Vec::new());
        let one = Value::base(DomainId(0), "1");
        let l = Value::tree(DomainId(1), "[|]", alloc::vec![one.clone(), nil.clone()]);
        assert_eq!(alloc::format!("{l}"), "[1]");
        assert_eq!(l.depth(), 1);
        assert_eq!(nil.depth(), 0);
        assert_eq!(alloc::format!("{}", Value::Wrong), "wrong");
    }
}
