//! Prescriptive type checking of normalized programs. Branch contexts are
//! reconstructed by unification, turned into a derivation tree by the
//! checking rules, and the tree is re-verified by an independent validator.

mod reconstruct;
mod unify;
mod validate;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::ast::{Clause, Goal, GoalSeq, PredId, Program, Span, Term};
use crate::normalize::is_normal_clause;
use crate::subtyping::explain_subtype;
use crate::types::{
    alpha_eq, normalize_sum, subst, PredicateType, SimpleType, TypeDeclError, TypeDeclTable,
    TypeScheme,
};
use unify::{Unifier, UnifyFail};

pub use reconstruct::{reconstruct_branch_context, reconstruct_clause_contexts};
pub use validate::validate_derivation;

/// Assumptions `X : τ` with distinct subjects.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context(pub BTreeMap<String, SimpleType>);

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn get(&self, x: &str) -> Option<&SimpleType> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: &str, t: SimpleType) {
        self.0.insert(x.into(), t);
    }

    pub fn with(mut self, x: &str, t: SimpleType) -> Context {
        self.insert(x, t);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SimpleType)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Same subjects with α-equivalent types.
    pub fn equiv(&self, other: &Context) -> bool {
        self.len() == other.len()
            && self
                .iter()
                .zip(other.iter())
                .all(|((x, s), (y, t))| x == y && alpha_eq(s, t))
    }
}

impl FromIterator<(String, SimpleType)> for Context {
    fn from_iter<I: IntoIterator<Item = (String, SimpleType)>>(iter: I) -> Self {
        Context(iter.into_iter().collect())
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}: {t}")?;
        }
        f.write_str("}")
    }
}

fn sum2(a: &SimpleType, b: &SimpleType) -> SimpleType {
    if alpha_eq(a, b) {
        return a.clone();
    }
    normalize_sum(&SimpleType::Sum(alloc::vec![a.clone(), b.clone()]))
}

/// `Γ1 ⊕ Γ2`: subjects of one side are copied, shared subjects get the sum
/// of their types.
pub fn context_sum(g1: &Context, g2: &Context) -> Context {
    let mut out = g1.clone();
    for (x, t) in g2.iter() {
        let merged = match out.get(x) {
            Some(s) => sum2(s, t),
            None => t.clone(),
        };
        out.insert(x, merged);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    Var,
    Cst,
    Cpl,
    Unf,
    Cll,
    Con,
    Cls,
    Rcls,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Var => "VAR",
            Rule::Cst => "CST",
            Rule::Cpl => "CPL",
            Rule::Unf => "UNF",
            Rule::Cll => "CLL",
            Rule::Con => "CON",
            Rule::Cls => "CLS",
            Rule::Rcls => "RCLS",
        })
    }
}

/// The syntax a judgment is about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    Term(Term),
    Goal(Goal),
    Seq(GoalSeq),
    Clause(Clause),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Term(t) => write!(f, "{t}"),
            Subject::Goal(g) => write!(f, "{g}"),
            Subject::Seq(gs) if gs.is_empty() => f.write_str("true"),
            Subject::Seq(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
            Subject::Clause(c) => {
                let head = Term::compound(&c.name, c.head.clone());
                write!(f, "{head} :- ...")
            }
        }
    }
}

/// One node of a derivation: `context ⊢ subject : ty`, where `ty` is `None`
/// for `bool`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub context: Context,
    pub subject: Subject,
    pub ty: Option<SimpleType>,
    /// For calls: the callee argument types each argument was checked
    /// against.
    pub required: Vec<SimpleType>,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn leaf(rule: Rule, context: &Context, subject: Subject, ty: Option<SimpleType>) -> Derivation {
        Derivation {
            rule,
            context: context.clone(),
            subject,
            ty,
            required: Vec::new(),
            premises: Vec::new(),
        }
    }

    /// Pre-order walk.
    pub fn nodes(&self) -> Vec<&Derivation> {
        let mut out = alloc::vec![self];
        for p in &self.premises {
            out.extend(p.nodes());
        }
        out
    }

    pub fn rules(&self) -> BTreeSet<Rule> {
        self.nodes().into_iter().map(|n| n.rule).collect()
    }

    fn map_types(&mut self, f: &impl Fn(&SimpleType) -> SimpleType) {
        if let Some(t) = &self.ty {
            self.ty = Some(f(t));
        }
        for r in &mut self.required {
            *r = f(r);
        }
        self.premises.iter_mut().for_each(|p| p.map_types(f));
    }

    /// Indented tree, types shown with declared names folded back in.
    pub fn render(&self, table: &TypeDeclTable) -> String {
        let mut out = String::new();
        self.render_into(table, 0, &mut out);
        out
    }

    fn render_into(&self, table: &TypeDeclTable, depth: usize, out: &mut String) {
        let ty = match &self.ty {
            Some(t) => table.show(t),
            None => "bool".into(),
        };
        let ctx: Vec<String> = self
            .context
            .iter()
            .map(|(x, t)| format!("{x}: {}", table.show(t)))
            .collect();
        out.push_str(&format!(
            "{}{} {{{}}} |- {} : {}\n",
            "  ".repeat(depth),
            self.rule,
            ctx.join(", "),
            self.subject,
            ty
        ));
        for p in &self.premises {
            p.render_into(table, depth + 1, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("variable `{0}` has no type in the context")]
    UnboundVariable(String),
    #[error("symbol `{symbol}/{arity}` has no declared type")]
    UndeclaredSymbol { symbol: String, arity: usize },
    #[error("argument {position} of `{functor}` has type {found}, expected {expected}")]
    ArgumentTypeMismatch {
        functor: String,
        position: usize,
        expected: SimpleType,
        found: SimpleType,
    },
    #[error("the sides of `=` have types {left} and {right}")]
    UnifyTypeMismatch { left: SimpleType, right: SimpleType },
    #[error("`=` at type {ty} compares values of several domains")]
    UnifyAcrossDomains { ty: SimpleType },
    #[error(
        "argument {position} of `{callee}` has type {found}, which is not a subtype of {required}"
    )]
    CallArgNotSubtype {
        callee: PredId,
        position: usize,
        found: SimpleType,
        required: SimpleType,
    },
    #[error("predicate `{0}` is not defined")]
    UndefinedPredicate(PredId),
    #[error("predicate `{0}` did not type check")]
    CalleeRejected(PredId),
    #[error("recursive call argument {position} has type {found}, but the head has {expected}")]
    MonomorphismViolation {
        position: usize,
        found: SimpleType,
        expected: SimpleType,
    },
    #[error("branch {branch}: {error}")]
    BranchTypeError {
        branch: usize,
        error: Box<TypeError>,
    },
    #[error("cannot solve {left} = {right}")]
    UnsatisfiableConstraints { left: SimpleType, right: SimpleType },
    #[error("type variable {var} would have to contain itself: {ty}")]
    OccursCheck { var: String, ty: SimpleType },
    #[error("mutual recursion between {} is not supported", join_preds(.0))]
    CyclicCallGraph(Vec<PredId>),
    #[error("clause for `{0}` is not in normal form")]
    NotNormal(PredId),
    #[error("expected {expected} branch contexts, found {found}")]
    BranchCount { expected: usize, found: usize },
    #[error("derivation rejected by the validator: {0}")]
    InvalidDerivation(String),
    #[error(transparent)]
    Decl(#[from] TypeDeclError),
}

fn join_preds(ps: &[PredId]) -> String {
    ps.iter()
        .map(|p| format!("{p}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl TypeError {
    /// Stable identifier of the error kind, innermost first for branch errors.
    pub fn kind(&self) -> &'static str {
        match self {
            TypeError::UnboundVariable(_) => "unbound_variable",
            TypeError::UndeclaredSymbol { .. } => "undeclared_symbol",
            TypeError::ArgumentTypeMismatch { .. } => "argument_type_mismatch",
            TypeError::UnifyTypeMismatch { .. } => "unify_type_mismatch",
            TypeError::UnifyAcrossDomains { .. } => "unify_across_domains",
            TypeError::CallArgNotSubtype { .. } => "call_arg_not_subtype",
            TypeError::UndefinedPredicate(_) => "undefined_predicate",
            TypeError::CalleeRejected(_) => "callee_rejected",
            TypeError::MonomorphismViolation { .. } => "monomorphism_violation",
            TypeError::BranchTypeError { error, .. } => error.kind(),
            TypeError::UnsatisfiableConstraints { .. } => "unsatisfiable_constraints",
            TypeError::OccursCheck { .. } => "occurs_check",
            TypeError::CyclicCallGraph(_) => "cyclic_call_graph",
            TypeError::NotNormal(_) => "not_normal",
            TypeError::BranchCount { .. } => "branch_count",
            TypeError::InvalidDerivation(_) => "invalid_derivation",
            TypeError::Decl(_) => "type_declaration",
        }
    }

    pub fn branch(&self) -> Option<usize> {
        match self {
            TypeError::BranchTypeError { branch, .. } => Some(*branch),
            _ => None,
        }
    }

    /// The innermost error.
    pub fn root(&self) -> &TypeError {
        match self {
            TypeError::BranchTypeError { error, .. } => error.root(),
            other => other,
        }
    }

    /// `(expected, found)` types, where the error has them.
    pub fn expected_found(&self) -> Option<(&SimpleType, &SimpleType)> {
        match self.root() {
            TypeError::ArgumentTypeMismatch {
                expected, found, ..
            }
            | TypeError::MonomorphismViolation {
                expected, found, ..
            } => Some((expected, found)),
            TypeError::CallArgNotSubtype {
                required, found, ..
            } => Some((required, found)),
            TypeError::UnifyTypeMismatch { left, right }
            | TypeError::UnsatisfiableConstraints { left, right } => Some((left, right)),
            _ => None,
        }
    }

    fn in_branch(self, branch: usize) -> TypeError {
        match self {
            e @ TypeError::BranchTypeError { .. } => e,
            e => TypeError::BranchTypeError {
                branch,
                error: Box::new(e),
            },
        }
    }
}

pub type Schemes = BTreeMap<PredId, TypeScheme>;

/// Builds derivations against given contexts. Constants and constructors
/// get fresh instances of their declared types, aligned by unification.
pub(crate) struct Checker<'a> {
    table: &'a TypeDeclTable,
    schemes: &'a Schemes,
    u: Unifier,
    /// The predicate being defined and the head types of the current branch.
    recursion: Option<(PredId, Vec<SimpleType>)>,
}

impl<'a> Checker<'a> {
    pub(crate) fn new(table: &'a TypeDeclTable, schemes: &'a Schemes) -> Checker<'a> {
        Checker {
            table,
            schemes,
            u: Unifier::new("_C"),
            recursion: None,
        }
    }

    fn term(&mut self, ctx: &Context, t: &Term) -> Result<Derivation, TypeError> {
        match t {
            Term::Var(x) => {
                let ty = ctx
                    .get(x)
                    .cloned()
                    .ok_or_else(|| TypeError::UnboundVariable(x.clone()))?;
                Ok(Derivation::leaf(
                    Rule::Var,
                    ctx,
                    Subject::Term(t.clone()),
                    Some(ty),
                ))
            }
            Term::Const(c) => {
                let ty = self.u.instantiate(&self.table.type_of_constant(c));
                Ok(Derivation::leaf(
                    Rule::Cst,
                    ctx,
                    Subject::Term(t.clone()),
                    Some(ty),
                ))
            }
            Term::Compound(f, args) => {
                let ctor = self.table.type_of_functor(f, args.len()).ok_or_else(|| {
                    TypeError::UndeclaredSymbol {
                        symbol: f.clone(),
                        arity: args.len(),
                    }
                })?;
                let mut sig = ctor.args.clone();
                sig.push(ctor.result.clone());
                let inst = self.u.instantiate_all(&sig);
                let mut premises = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    let d = self.term(ctx, a)?;
                    let found = d.ty.clone().unwrap_or(SimpleType::Bool);
                    if self.u.unify(&found, &inst[i]).is_err() {
                        return Err(TypeError::ArgumentTypeMismatch {
                            functor: f.clone(),
                            position: i + 1,
                            expected: self.u.resolve(&inst[i]),
                            found: self.u.resolve(&found),
                        });
                    }
                    premises.push(d);
                }
                let mut d = Derivation::leaf(
                    Rule::Cpl,
                    ctx,
                    Subject::Term(t.clone()),
                    inst.last().cloned(),
                );
                d.premises = premises;
                Ok(d)
            }
        }
    }

    fn resolved(&self, mut d: Derivation) -> Derivation {
        let u = &self.u;
        d.map_types(&|t| u.resolve(t));
        d
    }

    fn goal(&mut self, ctx: &Context, g: &Goal) -> Result<Derivation, TypeError> {
        match g {
            Goal::Unify(l, r) => {
                let dl = self.term(ctx, l)?;
                let dr = self.term(ctx, r)?;
                let (tl, tr) = (dl.ty.clone().unwrap(), dr.ty.clone().unwrap());
                if self.u.unify(&tl, &tr).is_err() {
                    return Err(TypeError::UnifyTypeMismatch {
                        left: self.u.resolve(&tl),
                        right: self.u.resolve(&tr),
                    });
                }
                let ty = self.u.resolve(&tl);
                if self.table.domain_classes(&ty).len() > 1 {
                    return Err(TypeError::UnifyAcrossDomains { ty });
                }
                let mut d = Derivation::leaf(Rule::Unf, ctx, Subject::Goal(g.clone()), None);
                d.premises = alloc::vec![dl, dr];
                Ok(self.resolved(d))
            }
            Goal::Call(p, args) => {
                let id = PredId::new(p, args.len());
                let mut premises = Vec::new();
                for a in args {
                    let d = self.term(ctx, a)?;
                    premises.push(self.resolved(d));
                }
                let mut required = Vec::new();
                if let Some((me, heads)) = self.recursion.as_ref().filter(|(me, _)| *me == id) {
                    let _ = me;
                    for (i, (d, h)) in premises.iter().zip(heads).enumerate() {
                        let found = d.ty.clone().unwrap();
                        if !alpha_eq(&found, h) {
                            return Err(TypeError::MonomorphismViolation {
                                position: i + 1,
                                found,
                                expected: h.clone(),
                            });
                        }
                    }
                    required = heads.clone();
                } else {
                    let scheme = self
                        .schemes
                        .get(&id)
                        .ok_or_else(|| TypeError::UndefinedPredicate(id.clone()))?;
                    for (i, (d, param)) in premises.iter().zip(&scheme.body.args).enumerate() {
                        let req = self.u.instantiate(param);
                        let found = d.ty.clone().unwrap();
                        let trace = explain_subtype(&found, &req);
                        if !trace.holds {
                            return Err(TypeError::CallArgNotSubtype {
                                callee: id.clone(),
                                position: i + 1,
                                found,
                                required: param.clone(),
                            });
                        }
                        required.push(normalize_sum(&subst(&req, &trace.subst)));
                    }
                }
                let mut d = Derivation::leaf(Rule::Cll, ctx, Subject::Goal(g.clone()), None);
                d.premises = premises;
                d.required = required;
                Ok(d)
            }
        }
    }

    fn seq(&mut self, ctx: &Context, goals: &[Goal]) -> Result<Derivation, TypeError> {
        let mut d = Derivation::leaf(Rule::Con, ctx, Subject::Seq(goals.to_vec()), None);
        for g in goals {
            d.premises.push(self.goal(ctx, g)?);
        }
        Ok(d)
    }

    fn clause(&mut self, c: &Clause, contexts: &[Context]) -> Result<Derivation, TypeError> {
        if !is_normal_clause(c) {
            return Err(TypeError::NotNormal(c.pred()));
        }
        if contexts.len() != c.body.len() {
            return Err(TypeError::BranchCount {
                expected: c.body.len(),
                found: contexts.len(),
            });
        }
        let heads: Vec<&str> = c.head_vars().unwrap_or_default();
        let recursive = c.is_recursive();
        let mut premises = Vec::new();
        for (k, (seq, ctx)) in c.body.iter().zip(contexts).enumerate() {
            let head_types = heads
                .iter()
                .map(|x| {
                    ctx.get(x)
                        .cloned()
                        .ok_or_else(|| TypeError::UnboundVariable((*x).into()).in_branch(k + 1))
                })
                .collect::<Result<Vec<_>, _>>()?;
            self.recursion = recursive.then(|| (c.pred(), head_types));
            let d = self.seq(ctx, seq).map_err(|e| e.in_branch(k + 1));
            self.recursion = None;
            premises.push(d?);
        }
        let conclusion = contexts
            .iter()
            .fold(Context::new(), |acc, g| context_sum(&acc, g));
        let rule = if recursive { Rule::Rcls } else { Rule::Cls };
        let mut d = Derivation::leaf(rule, &conclusion, Subject::Clause(c.clone()), None);
        d.premises = premises;
        Ok(d)
    }
}

/// The type of a term under a context.
pub fn check_term(g: &Context, t: &Term, decls: &TypeDeclTable) -> Result<SimpleType, TypeError> {
    Ok(derive_term(g, t, decls)?.ty.unwrap_or(SimpleType::Bool))
}

/// [`check_term`] with its derivation.
pub fn derive_term(g: &Context, t: &Term, decls: &TypeDeclTable) -> Result<Derivation, TypeError> {
    let schemes = Schemes::new();
    let mut ch = Checker::new(decls, &schemes);
    let d = ch.term(g, t)?;
    Ok(ch.resolved(d))
}

/// A `bool` derivation for one goal; calls are checked against `schemes`.
pub fn check_goal(
    g: &Context,
    goal: &Goal,
    schemes: &Schemes,
    decls: &TypeDeclTable,
) -> Result<Derivation, TypeError> {
    Checker::new(decls, schemes).goal(g, goal)
}

/// A CLS or RCLS derivation of a normal clause from one context per branch.
pub fn check_clause(
    contexts: &[Context],
    c: &Clause,
    schemes: &Schemes,
    decls: &TypeDeclTable,
) -> Result<Derivation, TypeError> {
    Checker::new(decls, schemes).clause(c, contexts)
}

/// The predicate type read off a clause derivation's conclusion.
pub fn predicate_type(c: &Clause, d: &Derivation) -> PredicateType {
    let heads = c.head_vars().unwrap_or_default();
    PredicateType::new(
        heads
            .iter()
            .map(|x| {
                d.context
                    .get(x)
                    .cloned()
                    .unwrap_or_else(|| SimpleType::var(x))
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateCheck {
    pub pred: PredId,
    pub scheme: TypeScheme,
    pub branch_contexts: Vec<Context>,
    pub derivation: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateError {
    pub pred: PredId,
    pub error: TypeError,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProgramCheck {
    pub checked: BTreeMap<PredId, PredicateCheck>,
    pub errors: Vec<PredicateError>,
}

impl ProgramCheck {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn schemes(&self) -> Schemes {
        self.checked
            .iter()
            .map(|(p, c)| (p.clone(), c.scheme.clone()))
            .collect()
    }

    pub fn scheme(&self, p: &PredId) -> Option<&TypeScheme> {
        self.checked.get(p).map(|c| &c.scheme)
    }
}

/// Callees before callers. Predicates on a cycle through other predicates
/// are returned separately, one list per cycle.
fn call_order(p: &Program) -> (Vec<PredId>, Vec<Vec<PredId>>) {
    let ids = p.pred_ids();
    let edges: BTreeMap<PredId, BTreeSet<PredId>> = ids
        .iter()
        .map(|id| {
            let callees = p
                .clause(id)
                .map(|c| {
                    c.goals()
                        .filter_map(Goal::call_target)
                        .filter(|t| t != id && ids.contains(t))
                        .collect()
                })
                .unwrap_or_default();
            (id.clone(), callees)
        })
        .collect();
    // Tarjan's algorithm; components come out callees first.
    struct St<'e> {
        edges: &'e BTreeMap<PredId, BTreeSet<PredId>>,
        index: BTreeMap<PredId, usize>,
        low: BTreeMap<PredId, usize>,
        stack: Vec<PredId>,
        on: BTreeSet<PredId>,
        comps: Vec<Vec<PredId>>,
    }
    fn visit(s: &mut St<'_>, v: &PredId) {
        let i = s.index.len();
        s.index.insert(v.clone(), i);
        s.low.insert(v.clone(), i);
        s.stack.push(v.clone());
        s.on.insert(v.clone());
        for w in s.edges[v].clone() {
            if !s.index.contains_key(&w) {
                visit(s, &w);
                let lw = s.low[&w];
                let lv = s.low.get_mut(v).unwrap();
                *lv = (*lv).min(lw);
            } else if s.on.contains(&w) {
                let iw = s.index[&w];
                let lv = s.low.get_mut(v).unwrap();
                *lv = (*lv).min(iw);
            }
        }
        if s.low[v] == s.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = s.stack.pop() {
                s.on.remove(&w);
                let done = &w == v;
                comp.push(w);
                if done {
                    break;
                }
            }
            comp.sort();
            s.comps.push(comp);
        }
    }
    let mut s = St {
        edges: &edges,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on: BTreeSet::new(),
        comps: Vec::new(),
    };
    for id in &ids {
        if !s.index.contains_key(id) {
            visit(&mut s, id);
        }
    }
    let mut order = Vec::new();
    let mut cycles = Vec::new();
    for comp in s.comps {
        if comp.len() == 1 {
            order.extend(comp);
        } else {
            cycles.push(comp);
        }
    }
    (order, cycles)
}

fn check_predicate(
    c: &Clause,
    table: &TypeDeclTable,
    schemes: &Schemes,
    annotated: Option<&Vec<Context>>,
) -> Result<(Vec<Context>, Derivation), TypeError> {
    let attempt = |contexts: Vec<Context>| -> Result<(Vec<Context>, Derivation), TypeError> {
        let d = check_clause(&contexts, c, schemes, table)?;
        validate_derivation(&d, table, schemes).map_err(TypeError::InvalidDerivation)?;
        Ok((contexts, d))
    };
    if let Some(ctxs) = annotated {
        return attempt(ctxs.clone());
    }
    let harmonized = reconstruct_clause_contexts(c, schemes, table, true)?;
    match attempt(harmonized) {
        Ok(r) => Ok(r),
        Err(first) => {
            let plain = reconstruct_clause_contexts(c, schemes, table, false)?;
            attempt(plain).map_err(|_| first)
        }
    }
}

/// Checks every predicate, callees first. Branch contexts come from
/// `annotations` where given and are reconstructed otherwise; each
/// predicate's type is generalized over its free variables.
pub fn check_program(
    p: &Program,
    table: &TypeDeclTable,
    annotations: Option<&BTreeMap<PredId, Vec<Context>>>,
) -> ProgramCheck {
    let mut out = ProgramCheck::default();
    let (order, cycles) = call_order(p);
    let span_of = |id: &PredId| p.clause(id).map(|c| c.span).unwrap_or_default();
    for cycle in cycles {
        for id in &cycle {
            out.errors.push(PredicateError {
                pred: id.clone(),
                error: TypeError::CyclicCallGraph(cycle.clone()),
                span: span_of(id),
            });
        }
    }
    let mut schemes = Schemes::new();
    for id in order {
        let Some(c) = p.clause(&id) else { continue };
        let rejected = c
            .goals()
            .filter_map(Goal::call_target)
            .find(|t| *t != id && !schemes.contains_key(t));
        let result = match rejected {
            Some(t) if p.pred_ids().contains(&t) => Err(TypeError::CalleeRejected(t)),
            Some(t) => Err(TypeError::UndefinedPredicate(t)),
            None => check_predicate(c, table, &schemes, annotations.and_then(|a| a.get(&id))),
        };
        match result {
            Ok((contexts, derivation)) => {
                let scheme = TypeScheme::generalize(predicate_type(c, &derivation));
                schemes.insert(id.clone(), scheme.clone());
                out.checked.insert(
                    id.clone(),
                    PredicateCheck {
                        pred: id,
                        scheme,
                        branch_contexts: contexts,
                        derivation,
                    },
                );
            }
            Err(error) => out.errors.push(PredicateError {
                span: c.span,
                pred: id,
                error,
            }),
        }
    }
    out
}

/// Checks a query, a goal sequence over arbitrary terms, against checked
/// predicate types. Variables of the query get reconstructed types.
pub fn check_query(
    goals: &[Goal],
    schemes: &Schemes,
    table: &TypeDeclTable,
) -> Result<Derivation, TypeError> {
    let ctx = reconstruct_branch_context(goals, &[], schemes, table)?;
    let d = Checker::new(table, schemes).seq(&ctx, goals)?;
    validate_derivation(&d, table, schemes).map_err(TypeError::InvalidDerivation)?;
    Ok(d)
}

impl From<UnifyFail> for TypeError {
    fn from(f: UnifyFail) -> TypeError {
        match f {
            UnifyFail::Occurs(var, ty) => TypeError::OccursCheck { var, ty },
            UnifyFail::Clash => TypeError::InvalidDerivation("unification clash".into()),
        }
    }
}

#[cfg(test)]
mod tests;
