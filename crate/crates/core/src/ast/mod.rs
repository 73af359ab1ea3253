//! Abstract syntax of the mini logic language.
//!
//! Programs are sets of clauses plus optional `:- type` declarations. Raw
//! programs may define a predicate by several clauses; the normalizer turns
//! them into the single-clause form where every head argument is a distinct
//! variable and the body is a disjunction of goal sequences.

mod parse;
mod pretty;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use parse::{parse_pred_type_expr, parse_program, parse_term, parse_type_expr, ParseError};
pub use pretty::{pretty, quote_atom};

/// Functor used for list cells; `[H|T]` is sugar for `'[|]'(H, T)`.
pub const CONS: &str = "[|]";
/// The empty list constant.
pub const NIL: &str = "[]";

/// Whether an identifier starts with a Greek letter. Such identifiers are
/// type variables in type expressions, as in `list(α)`.
pub fn is_greek(s: &str) -> bool {
    s.chars()
        .next()
        .is_some_and(|c| ('\u{0391}'..='\u{03C9}').contains(&c))
}

/// Source position of a clause or declaration.
///
/// Spans are diagnostics only and never participate in structural equality.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    /// 0-ary symbol: atom, integer or float literal, or `[]`.
    Const(String),
    /// `f(t1, ..., tn)` with `n >= 1`.
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.into())
    }

    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Const(functor.into())
        } else {
            Term::Compound(functor.into(), args)
        }
    }

    /// Builds a proper list term from its elements.
    pub fn list(items: Vec<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(Term::Const(NIL.into()), |tail, head| {
                Term::Compound(CONS.into(), alloc::vec![head, tail])
            })
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Renames variables through `f`, leaving everything else untouched.
    pub fn rename(&self, f: &mut impl FnMut(&str) -> String) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::Const(c) => Term::Const(c.clone()),
            Term::Compound(g, args) => {
                Term::Compound(g.clone(), args.iter().map(|a| a.rename(f)).collect())
            }
        }
    }

    /// Constant symbols occurring in the term.
    pub fn collect_constants(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(_) => {}
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_constants(out)),
        }
    }

    /// Functor symbols `(name, arity)` occurring in the term.
    pub fn collect_functors(&self, out: &mut BTreeSet<(String, usize)>) {
        if let Term::Compound(g, args) = self {
            out.insert((g.clone(), args.len()));
            args.iter().for_each(|a| a.collect_functors(out));
        }
    }

    /// Nesting depth of function symbols; variables and constants are 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Goal {
    Unify(Term, Term),
    Call(String, Vec<Term>),
}

impl Goal {
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Goal::Unify(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Goal::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn rename(&self, f: &mut impl FnMut(&str) -> String) -> Goal {
        match self {
            Goal::Unify(l, r) => Goal::Unify(l.rename(f), r.rename(f)),
            Goal::Call(p, args) => {
                Goal::Call(p.clone(), args.iter().map(|a| a.rename(f)).collect())
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        let (a, b): (&[Term], &[Term]) = match self {
            Goal::Unify(l, r) => (core::slice::from_ref(l), core::slice::from_ref(r)),
            Goal::Call(_, args) => (args.as_slice(), &[]),
        };
        a.iter().chain(b.iter())
    }

    pub fn call_target(&self) -> Option<PredId> {
        match self {
            Goal::Call(p, args) => Some(PredId::new(p, args.len())),
            Goal::Unify(..) => None,
        }
    }
}

/// A conjunction `g1, ..., gn`. The empty sequence denotes `true`.
pub type GoalSeq = Vec<Goal>;

pub fn seq_vars(seq: &[Goal]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    seq.iter().for_each(|g| g.collect_vars(&mut out));
    out
}

/// Predicate identity: name plus arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredId {
    pub name: String,
    pub arity: usize,
}

impl PredId {
    pub fn new(name: &str, arity: usize) -> PredId {
        PredId {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for PredId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// `head(args) :- sg1 ; ... ; sgm.` A fact has a single empty sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub name: String,
    pub head: Vec<Term>,
    pub body: Vec<GoalSeq>,
    pub span: Span,
}

impl Clause {
    pub fn new(name: &str, head: Vec<Term>, body: Vec<GoalSeq>) -> Clause {
        Clause {
            name: name.into(),
            head,
            body,
            span: Span::default(),
        }
    }

    pub fn pred(&self) -> PredId {
        PredId::new(&self.name, self.head.len())
    }

    pub fn is_fact(&self) -> bool {
        self.body.len() == 1 && self.body[0].is_empty()
    }

    /// Head arguments as variable names, if they are all variables.
    pub fn head_vars(&self) -> Option<Vec<&str>> {
        self.head.iter().map(Term::as_var).collect()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.head.iter().for_each(|t| t.collect_vars(&mut out));
        self.body
            .iter()
            .flatten()
            .for_each(|g| g.collect_vars(&mut out));
        out
    }

    /// Whether some branch calls the clause's own predicate.
    pub fn is_recursive(&self) -> bool {
        let me = self.pred();
        self.body
            .iter()
            .flatten()
            .any(|g| g.call_target().as_ref() == Some(&me))
    }

    pub fn goals(&self) -> impl Iterator<Item = &Goal> {
        self.body.iter().flatten()
    }
}

/// Surface syntax of a type expression, before declared names are resolved.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TypeExpr {
    Var(String),
    /// Identifier or literal, optionally applied: base types, declared type
    /// names, type constants and constructors all parse to this.
    Sym(String, Vec<TypeExpr>),
    Sum(Vec<TypeExpr>),
    Mu(String, Box<TypeExpr>),
}

/// `:- type name(params) = s1 + ... + sk.`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub params: Vec<String>,
    pub summands: Vec<TypeExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub type_decls: Vec<TypeDecl>,
}

impl Program {
    pub fn new() -> Program {
        Program::default()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty() && self.type_decls.is_empty()
    }

    /// Clauses grouped by predicate, in order of first appearance.
    pub fn predicates(&self) -> Vec<(PredId, Vec<&Clause>)> {
        let mut order: Vec<(PredId, Vec<&Clause>)> = Vec::new();
        let mut index: BTreeMap<PredId, usize> = BTreeMap::new();
        for c in &self.clauses {
            let id = c.pred();
            match index.get(&id) {
                Some(&i) => order[i].1.push(c),
                None => {
                    index.insert(id.clone(), order.len());
                    order.push((id, alloc::vec![c]));
                }
            }
        }
        order
    }

    pub fn pred_ids(&self) -> BTreeSet<PredId> {
        self.clauses.iter().map(Clause::pred).collect()
    }

    /// The single clause defining `id` in a normalized program.
    pub fn clause(&self, id: &PredId) -> Option<&Clause> {
        self.clauses
            .iter()
            .find(|c| c.name == id.name && c.head.len() == id.arity)
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            c.head.iter().for_each(|t| t.collect_constants(&mut out));
            c.goals()
                .flat_map(Goal::terms)
                .for_each(|t| t.collect_constants(&mut out));
        }
        out
    }

    pub fn functors(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            c.head.iter().for_each(|t| t.collect_functors(&mut out));
            c.goals()
                .flat_map(Goal::terms)
                .for_each(|t| t.collect_functors(&mut out));
        }
        out
    }
}

/// Number of environments a syntactic object needs for evaluation.
pub trait OrDegree {
    fn or_degree(&self) -> usize;
}

impl OrDegree for Term {
    fn or_degree(&self) -> usize {
        1
    }
}

impl OrDegree for Goal {
    fn or_degree(&self) -> usize {
        1
    }
}

impl OrDegree for [GoalSeq] {
    fn or_degree(&self) -> usize {
        self.len().max(1)
    }
}

impl OrDegree for Clause {
    fn or_degree(&self) -> usize {
        self.body.as_slice().or_degree()
    }
}

pub fn or_degree<M: OrDegree + ?Sized>(m: &M) -> usize {
    m.or_degree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn or_degree_counts_disjuncts() {
        let p = parse_program("p(X) :- X = 1 ; X = a.").unwrap();
        assert_eq!(or_degree(&p.clauses[0]), 2);
        assert_eq!(or_degree(&Term::var("X")), 1);
        let q = parse_program("q(X) :- X = 1, X = 2.").unwrap();
        assert_eq!(or_degree(&q.clauses[0]), 1);
        assert_eq!(or_degree(&q.clauses[0].body[0][0]), 1);
    }

    #[test]
    fn list_builder_nests_cons_cells() {
        let l = Term::list(vec![Term::constant("1"), Term::constant("2")]);
        assert_eq!(l.depth(), 2);
        assert_eq!(
            l,
            Term::Compound(
                CONS.into(),
                vec![
                    Term::constant("1"),
                    Term::Compound(CONS.into(), vec![Term::constant("2"), Term::constant(NIL)])
                ]
            )
        );
    }

    #[test]
    fn predicates_group_in_first_appearance_order() {
        let p = parse_program("b(1). a(2). b(3).").unwrap();
        let groups = p.predicates();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0, PredId::new("b", 1));
        assert_eq!(groups[0].1.len(), 2);
    }

    #[test]
    fn spans_do_not_affect_equality() {
        let mut a = Clause::new("p", vec![], vec![vec![]]);
        let b = a.clone();
        a.span = Span { line: 9, column: 4 };
        assert_eq!(a, b);
    }
}
