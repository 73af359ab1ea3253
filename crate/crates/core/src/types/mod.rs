//! The type language: simple types with sums, recursive types and type
//! functions; predicate types and schemes; declaration tables; and the
//! set-of-values semantics of types over a finite universe.

mod decls;
mod matching;
mod sem;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write};

use crate::ast::{quote_atom, CONS};

pub use decls::{literal_base, CtorType, DeclInfo, DomainClass, TypeDeclError, TypeDeclTable};
pub use matching::match_type;
pub use sem::{
    assoc_domain, domains_of, ground_types, psem_member, psem_member_scheme, tsem, tsem_iterates,
    TsemError, TypeEnv, ValueSet,
};

/// Base types with a predefined basic domain.
pub const BASE_TYPES: [&str; 3] = ["int", "float", "atom"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimpleType {
    Var(String),
    /// A type constant such as `1`, `[]` or `c`, denoting one value.
    Const(String),
    Base(String),
    /// Only valid as a predicate result and in semantic checks.
    Bool,
    Sum(Vec<SimpleType>),
    Mu(String, Box<SimpleType>),
    App(String, Vec<SimpleType>),
}

pub type Subst = BTreeMap<String, SimpleType>;

impl SimpleType {
    pub fn var(v: &str) -> SimpleType {
        SimpleType::Var(v.into())
    }

    pub fn base(b: &str) -> SimpleType {
        SimpleType::Base(b.into())
    }

    pub fn constant(c: &str) -> SimpleType {
        SimpleType::Const(c.into())
    }

    pub fn app(f: &str, args: Vec<SimpleType>) -> SimpleType {
        SimpleType::App(f.into(), args)
    }

    pub fn mu(binder: &str, body: SimpleType) -> SimpleType {
        SimpleType::Mu(binder.into(), Box::new(body))
    }

    /// A normalized sum of the given types.
    pub fn sum(items: Vec<SimpleType>) -> SimpleType {
        normalize_sum(&SimpleType::Sum(items))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, SimpleType::Var(_))
    }

    pub fn summands(&self) -> &[SimpleType] {
        match self {
            SimpleType::Sum(items) => items,
            other => core::slice::from_ref(other),
        }
    }

    pub fn collect_free_vars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            SimpleType::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            SimpleType::Const(_) | SimpleType::Base(_) | SimpleType::Bool => {}
            SimpleType::Sum(items) | SimpleType::App(_, items) => {
                items.iter().for_each(|t| t.collect_free_vars(bound, out))
            }
            SimpleType::Mu(b, body) => {
                bound.push(b.clone());
                body.collect_free_vars(bound, out);
                bound.pop();
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars_ordered(&self, out: &mut Vec<String>) {
        fn go(t: &SimpleType, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                SimpleType::Var(v) => {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                SimpleType::Const(_) | SimpleType::Base(_) | SimpleType::Bool => {}
                SimpleType::Sum(items) | SimpleType::App(_, items) => {
                    items.iter().for_each(|t| go(t, bound, out))
                }
                SimpleType::Mu(b, body) => {
                    bound.push(b.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        go(self, &mut Vec::new(), out)
    }

    pub fn is_ground(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn contains_bool(&self) -> bool {
        match self {
            SimpleType::Bool => true,
            SimpleType::Sum(items) | SimpleType::App(_, items) => {
                items.iter().any(SimpleType::contains_bool)
            }
            SimpleType::Mu(_, body) => body.contains_bool(),
            _ => false,
        }
    }

    /// One unfolding: `mu a. t` becomes `t[mu a. t / a]`.
    pub fn unfold(&self) -> SimpleType {
        match self {
            SimpleType::Mu(b, body) => {
                let mut phi = Subst::new();
                phi.insert(b.clone(), self.clone());
                normalize_sum(&subst(body, &phi))
            }
            other => other.clone(),
        }
    }
}

/// Capture-avoiding simultaneous substitution.
pub fn subst(t: &SimpleType, phi: &Subst) -> SimpleType {
    if phi.is_empty() {
        return t.clone();
    }
    match t {
        SimpleType::Var(v) => phi.get(v).cloned().unwrap_or_else(|| t.clone()),
        SimpleType::Const(_) | SimpleType::Base(_) | SimpleType::Bool => t.clone(),
        SimpleType::Sum(items) => SimpleType::Sum(items.iter().map(|i| subst(i, phi)).collect()),
        SimpleType::App(f, items) => {
            SimpleType::App(f.clone(), items.iter().map(|i| subst(i, phi)).collect())
        }
        SimpleType::Mu(b, body) => {
            let mut inner = phi.clone();
            inner.remove(b);
            let body_free = body.free_vars();
            inner.retain(|k, _| body_free.contains(k));
            let captured = inner.values().any(|r| r.free_vars().contains(b));
            if !captured {
                return SimpleType::Mu(b.clone(), Box::new(subst(body, &inner)));
            }
            let mut avoid = body_free;
            for r in inner.values() {
                avoid.extend(r.free_vars());
            }
            let fresh = fresh_name(b, &avoid);
            inner.insert(b.clone(), SimpleType::Var(fresh.clone()));
            SimpleType::Mu(fresh, Box::new(subst(body, &inner)))
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !avoid.contains(n))
        .unwrap_or_default()
}

fn rank(t: &SimpleType) -> u8 {
    match t {
        SimpleType::Base(b) => match b.as_str() {
            "int" => 0,
            "float" => 1,
            "atom" => 2,
            _ => 3,
        },
        SimpleType::Const(_) => 4,
        SimpleType::App(..) => 5,
        SimpleType::Var(_) => 6,
        SimpleType::Mu(..) => 7,
        SimpleType::Bool => 8,
        SimpleType::Sum(_) => 9,
    }
}

/// The fixed total order used to sort summands.
pub fn type_cmp(a: &SimpleType, b: &SimpleType) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (SimpleType::App(f, xs), SimpleType::App(g, ys)) => f
            .cmp(g)
            .then(xs.len().cmp(&ys.len()))
            .then_with(|| list_cmp(xs, ys)),
        (SimpleType::Sum(xs), SimpleType::Sum(ys)) => list_cmp(xs, ys),
        (SimpleType::Mu(x, s), SimpleType::Mu(y, t)) => type_cmp(s, t).then(x.cmp(y)),
        _ => a.cmp(b),
    })
}

fn list_cmp(xs: &[SimpleType], ys: &[SimpleType]) -> Ordering {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| type_cmp(x, y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| xs.len().cmp(&ys.len()))
}

/// Flattens nested sums, drops duplicate summands and sorts them, at every
/// level of the type. A sum with one summand becomes that summand.
pub fn normalize_sum(t: &SimpleType) -> SimpleType {
    match t {
        SimpleType::Sum(items) => {
            let mut flat = Vec::new();
            for i in items {
                match normalize_sum(i) {
                    SimpleType::Sum(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            flat.sort_by(type_cmp);
            flat.dedup();
            if flat.len() == 1 {
                flat.pop().unwrap_or(SimpleType::Sum(Vec::new()))
            } else {
                SimpleType::Sum(flat)
            }
        }
        SimpleType::App(f, args) => {
            SimpleType::App(f.clone(), args.iter().map(normalize_sum).collect())
        }
        SimpleType::Mu(b, body) => SimpleType::Mu(b.clone(), Box::new(normalize_sum(body))),
        other => other.clone(),
    }
}

/// Renames binders to `#0`, `#1`, ... by nesting level and normalizes sums.
pub fn canonical(t: &SimpleType) -> SimpleType {
    fn go(t: &SimpleType, level: usize) -> SimpleType {
        match t {
            SimpleType::Mu(b, body) => {
                let fresh = format!("#{level}");
                let mut phi = Subst::new();
                phi.insert(b.clone(), SimpleType::Var(fresh.clone()));
                SimpleType::Mu(fresh, Box::new(go(&subst(body, &phi), level + 1)))
            }
            SimpleType::Sum(items) => SimpleType::Sum(items.iter().map(|i| go(i, level)).collect()),
            SimpleType::App(f, items) => {
                SimpleType::App(f.clone(), items.iter().map(|i| go(i, level)).collect())
            }
            other => other.clone(),
        }
    }
    // Normalizing first and after keeps summand order independent of binder names.
    normalize_sum(&go(&normalize_sum(t), 0))
}

/// Structural equality modulo sum normalization and binder renaming.
pub fn alpha_eq(a: &SimpleType, b: &SimpleType) -> bool {
    a == b || canonical(a) == canonical(b)
}

/// `t1 * ... * tn -> bool`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PredicateType {
    pub args: Vec<SimpleType>,
}

impl PredicateType {
    pub fn new(args: Vec<SimpleType>) -> PredicateType {
        PredicateType { args }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.args.iter().flat_map(SimpleType::free_vars).collect()
    }

    pub fn subst(&self, phi: &Subst) -> PredicateType {
        PredicateType::new(
            self.args
                .iter()
                .map(|a| normalize_sum(&subst(a, phi)))
                .collect(),
        )
    }

    pub fn alpha_eq(&self, other: &PredicateType) -> bool {
        self.args.len() == other.args.len()
            && self
                .args
                .iter()
                .zip(&other.args)
                .all(|(a, b)| alpha_eq(a, b))
    }
}

/// A predicate type with its free variables universally quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeScheme {
    pub quantified: BTreeSet<String>,
    pub body: PredicateType,
}

impl TypeScheme {
    pub fn generalize(body: PredicateType) -> TypeScheme {
        TypeScheme {
            quantified: body.free_vars(),
            body,
        }
    }

    pub fn mono(body: PredicateType) -> TypeScheme {
        TypeScheme {
            quantified: BTreeSet::new(),
            body,
        }
    }

    /// Replaces quantified variables with names produced by `fresh`.
    pub fn instantiate(&self, fresh: &mut impl FnMut() -> String) -> PredicateType {
        let phi: Subst = self
            .quantified
            .iter()
            .map(|v| (v.clone(), SimpleType::Var(fresh())))
            .collect();
        self.body.subst(&phi)
    }
}

/// Wraps sums and recursive types in parentheses.
struct Atomic<'a>(&'a SimpleType);

impl fmt::Display for Atomic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SimpleType::Sum(_) | SimpleType::Mu(..) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Var(v) => f.write_str(v),
            SimpleType::Const(c) => f.write_str(&quote_atom(c)),
            SimpleType::Base(b) => f.write_str(b),
            SimpleType::Bool => f.write_str("bool"),
            SimpleType::Sum(items) => {
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}", Atomic(t))?;
                }
                Ok(())
            }
            SimpleType::Mu(b, body) => write!(f, "mu {b}. {}", Atomic(body)),
            SimpleType::App(c, args) if c == CONS && args.len() == 2 => {
                write!(f, "[{}|{}]", Atomic(&args[0]), args[1])
            }
            SimpleType::App(c, args) => {
                let name = if c == crate::ast::NIL {
                    "'[]'".into()
                } else {
                    quote_atom(c)
                };
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_char(')')
            }
        }
    }
}

impl fmt::Display for PredicateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [only] = self.args.as_slice() {
            return write!(f, "{only} -> bool");
        }
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{}", Atomic(a))?;
        }
        if self.args.is_empty() {
            f.write_str("bool")
        } else {
            f.write_str(" -> bool")
        }
    }
}

impl fmt::Display for TypeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}
