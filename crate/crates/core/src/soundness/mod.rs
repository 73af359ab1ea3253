//! Semantic typing on finite universes: a canonical interpretation for a
//! checked program and an exhaustive search for `wrong` under it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::ast::{seq_vars, Clause, Goal, PredId, Program, Term};
use crate::normalize::is_normal_clause;
use crate::semantics::{
    count_states, for_each_product, Evaluator, Interpretation, SemanticsError, State, TruthValue,
    Value,
};
use crate::typeck::{check_program, Context, PredicateError};
use crate::types::{tsem, SimpleType, TsemError, TypeDeclTable, TypeEnv};

mod generate;
mod interp;

pub use generate::{fit_universe, generate_labeled, generate_program, SizeParams};
pub use interp::{
    build_interpretation, build_interpretation_traced, build_universe, clause_true_tuples,
    clause_true_tuples_brute, interpret_over, BasicDomainConfig, FixpointTrace, UniverseConfig,
};

/// Alternative context splits tried per clause before giving up.
pub const MAX_SPLITS: usize = 4096;
/// Largest clause state space enumerated as a whole; bigger ones are
/// checked goal by goal.
pub const EXHAUSTIVE_LIMIT: u64 = 20_000;
/// Type variable assignments tried per split.
pub const MAX_ASSIGNMENTS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SoundnessError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Tsem(#[from] TsemError),
    #[error("clause for {0} is not in normal form")]
    NotNormal(PredId),
    #[error("the program is not well-typed ({} predicate(s) rejected)", .0.len())]
    IllTyped(Vec<PredicateError>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    /// Some state evaluates to `wrong` for a reason other than the depth
    /// bound.
    Violation,
    /// Every `wrong` seen came from a constructor leaving the universe.
    Truncated,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Violation => "violation",
            Status::Truncated => "truncated",
        }
    }
}

/// A state under which something evaluated to `wrong`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// Domain chosen for each type variable.
    pub assignment: BTreeMap<String, String>,
    /// 1-based branch, or 0 for a term or goal judgement.
    pub branch: usize,
    /// The offending goal, head call, or term.
    pub location: String,
    pub state: State,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Tally {
    states: u64,
    wrong: u64,
    truncated: u64,
    counterexample: Option<Counterexample>,
}

impl Tally {
    fn add(&mut self, other: Tally) {
        self.states += other.states;
        self.wrong += other.wrong;
        self.truncated += other.truncated;
        if self.counterexample.is_none() {
            self.counterexample = other.counterexample;
        }
    }

    fn status(&self) -> Status {
        if self.wrong > 0 {
            Status::Violation
        } else if self.truncated > 0 {
            Status::Truncated
        } else {
            Status::Ok
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypingReport {
    pub status: Status,
    pub states_checked: u64,
    pub wrong_count: u64,
    pub truncation_count: u64,
    /// For clauses, the per-branch contexts under which the check held.
    pub witness_split: Option<Vec<Context>>,
    pub splits_tried: usize,
    pub counterexample: Option<Counterexample>,
}

impl TypingReport {
    fn from_tally(t: Tally, witness_split: Option<Vec<Context>>, splits_tried: usize) -> Self {
        TypingReport {
            status: t.status(),
            states_checked: t.states,
            wrong_count: t.wrong,
            truncation_count: t.truncated,
            witness_split,
            splits_tried,
            counterexample: t.counterexample,
        }
    }
}

/// What is claimed to hold semantically under a context.
#[derive(Clone, Copy, Debug)]
pub enum Judgement<'a> {
    /// The term's value lies in the type's meaning.
    Term(&'a Term, &'a SimpleType),
    /// The goal is never `wrong`.
    Goal(&'a Goal),
    /// The clause is never `wrong` for some split of the context over its
    /// branches; the given splits are tried first.
    Clause(&'a Clause, &'a [Vec<Context>]),
}

/// Whether a value lies in the meaning of a type; `wrong` has no type.
pub fn value_has_type(
    v: &Value,
    t: &SimpleType,
    i: &Interpretation,
    env: &TypeEnv,
) -> Result<bool, SoundnessError> {
    if v.is_wrong() {
        return Ok(false);
    }
    Ok(tsem(t, i, env)?.contains(v))
}

/// Every assumption of the context holds for the state's values.
pub fn context_holds(
    g: &Context,
    i: &Interpretation,
    env: &TypeEnv,
    s: &State,
) -> Result<bool, SoundnessError> {
    for (x, t) in g.iter() {
        let v = s.get(x).cloned().unwrap_or(Value::Wrong);
        if !value_has_type(&v, t, i, env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn free_type_vars<'c>(ctxs: impl IntoIterator<Item = &'c Context>) -> Vec<String> {
    let mut out = BTreeSet::new();
    for c in ctxs {
        for (_, t) in c.iter() {
            out.extend(t.free_vars());
        }
    }
    out.into_iter().collect()
}

/// Each type variable read as the values of one term domain.
fn assignments(vars: &[String], i: &Interpretation) -> Vec<(TypeEnv, BTreeMap<String, String>)> {
    let domains = i.universe.domains();
    let choices: Vec<Vec<usize>> = vars.iter().map(|_| (0..domains.len()).collect()).collect();
    let mut out = Vec::new();
    for_each_product(&choices, |pick| {
        if out.len() >= MAX_ASSIGNMENTS {
            return;
        }
        let mut env = TypeEnv::new();
        let mut names = BTreeMap::new();
        for (v, &d) in vars.iter().zip(pick) {
            env.insert(v.clone(), domains[d].members.iter().cloned().collect());
            names.insert(v.clone(), domains[d].name.clone());
        }
        out.push((env, names));
    });
    out
}

struct Run<'a> {
    i: &'a Interpretation,
    ev: Evaluator<'a>,
    max_states: u64,
    all: Vec<Value>,
}

impl<'a> Run<'a> {
    fn new(i: &'a Interpretation, max_states: u64) -> Self {
        Run {
            i,
            ev: Evaluator::new(i),
            max_states,
            all: i.universe.values().cloned().collect(),
        }
    }

    fn candidates(
        &self,
        vars: &BTreeSet<String>,
        ctx: &Context,
        env: &TypeEnv,
    ) -> Result<Vec<(String, Vec<Value>)>, SoundnessError> {
        vars.iter()
            .map(|x| {
                let vals = match ctx.get(x) {
                    Some(t) => tsem(t, self.i, env)?.into_iter().collect(),
                    None => self.all.clone(),
                };
                Ok((x.clone(), vals))
            })
            .collect()
    }

    fn guard(
        &self,
        what: impl ToString,
        sizes: impl IntoIterator<Item = usize>,
    ) -> Result<(), SoundnessError> {
        let count = count_states(sizes);
        if count > u128::from(self.max_states) {
            return Err(SemanticsError::UniverseTooLarge {
                what: what.to_string(),
                count,
                cap: self.max_states,
            }
            .into());
        }
        Ok(())
    }

    /// Runs `f` on every state over `cands`; `f` returns whether the state
    /// evaluated to `wrong`, and the evaluator's truncation counter decides
    /// which bucket it falls in.
    fn sweep(
        &self,
        cands: &[(String, Vec<Value>)],
        what: &str,
        mut f: impl FnMut(&State) -> Option<(usize, String)>,
        names: &BTreeMap<String, String>,
    ) -> Result<Tally, SoundnessError> {
        self.guard(what, cands.iter().map(|(_, v)| v.len()))?;
        let sets: Vec<Vec<Value>> = cands.iter().map(|(_, v)| v.clone()).collect();
        let mut t = Tally::default();
        for_each_product(&sets, |vals| {
            let s = State(
                cands
                    .iter()
                    .map(|(x, _)| x.clone())
                    .zip(vals.iter().cloned())
                    .collect(),
            );
            self.ev.reset();
            t.states += 1;
            if let Some((branch, location)) = f(&s) {
                if self.ev.truncations() > 0 {
                    t.truncated += 1;
                } else {
                    t.wrong += 1;
                    if t.counterexample.is_none() {
                        t.counterexample = Some(Counterexample {
                            assignment: names.clone(),
                            branch,
                            location,
                            state: s,
                        });
                    }
                }
            }
        });
        Ok(t)
    }

    fn locate(&self, c: &Clause, k: usize, s: &State) -> String {
        c.body[k]
            .iter()
            .find(|g| self.ev.goal(g, s).is_wrong())
            .map(|g| g.to_string())
            .unwrap_or_else(|| Goal::Call(c.name.clone(), c.head.clone()).to_string())
    }

    fn clause_split(&self, c: &Clause, split: &[Context]) -> Result<Tally, SoundnessError> {
        let head_vars: BTreeSet<String> = c.head.iter().flat_map(Term::vars).collect();
        let limit = u128::from(self.max_states.min(EXHAUSTIVE_LIMIT));
        let mut runs = Vec::new();
        let mut size = 0u128;
        for (env, names) in assignments(&free_type_vars(split), self.i) {
            let mut per_branch = Vec::new();
            for (seq, ctx) in c.body.iter().zip(split) {
                let mut vars = seq_vars(seq);
                vars.extend(head_vars.iter().cloned());
                per_branch.push(self.candidates(&vars, ctx, &env)?);
            }
            // An empty variable range makes the statement vacuous.
            if per_branch.iter().flatten().any(|(_, v)| v.is_empty()) {
                continue;
            }
            size += per_branch
                .iter()
                .flatten()
                .fold(1u128, |acc, (_, v)| acc.saturating_mul(v.len() as u128));
            if size > limit {
                return self.per_goal(c, split);
            }
            runs.push((per_branch, names));
        }
        let mut total = Tally::default();
        for (per_branch, names) in runs {
            total.add(self.exhaustive(c, &per_branch, &names)?);
        }
        Ok(total)
    }

    fn exhaustive(
        &self,
        c: &Clause,
        per_branch: &[Vec<(String, Vec<Value>)>],
        names: &BTreeMap<String, String>,
    ) -> Result<Tally, SoundnessError> {
        let mut states: Vec<Vec<State>> = Vec::new();
        for cands in per_branch {
            let mut list = Vec::new();
            let sets: Vec<Vec<Value>> = cands.iter().map(|(_, v)| v.clone()).collect();
            for_each_product(&sets, |vals| {
                list.push(State(
                    cands
                        .iter()
                        .map(|(x, _)| x.clone())
                        .zip(vals.iter().cloned())
                        .collect(),
                ))
            });
            states.push(list);
        }
        let mut t = Tally::default();
        let mut err = None;
        for_each_product(&states, |ss| {
            self.ev.reset();
            t.states += 1;
            match self.ev.clause(c, ss) {
                Ok(TruthValue::Wrong) if self.ev.truncations() > 0 => t.truncated += 1,
                Ok(TruthValue::Wrong) => {
                    t.wrong += 1;
                    if t.counterexample.is_none() {
                        let k = (0..ss.len())
                            .find(|&k| {
                                self.ev.seq(&c.body[k], &ss[k]).is_wrong()
                                    || self.ev.call(&c.name, &c.head, &ss[k]).is_wrong()
                            })
                            .unwrap_or(0);
                        t.counterexample = Some(Counterexample {
                            assignment: names.clone(),
                            branch: k + 1,
                            location: self.locate(c, k, &ss[k]),
                            state: ss[k].clone(),
                        });
                    }
                }
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        });
        match err {
            Some(e) => Err(e.into()),
            None => Ok(t),
        }
    }

    /// `wrong` is absorbing in every connective, so a clause is `wrong` for
    /// some list of states exactly when one goal or head call is `wrong` for
    /// the part of one state it reads.
    /// Each goal only sees the type variables of its own variables' types.
    /// Vacuity is judged on those variables alone, which can only add
    /// states to the check.
    fn per_goal(&self, c: &Clause, split: &[Context]) -> Result<Tally, SoundnessError> {
        let mut t = Tally::default();
        let head = Goal::Call(c.name.clone(), c.head.clone());
        for (k, (seq, ctx)) in c.body.iter().zip(split).enumerate() {
            for g in seq.iter().chain(core::iter::once(&head)) {
                let vars = g.vars();
                let local: Context = vars
                    .iter()
                    .filter_map(|x| ctx.get(x).map(|ty| (x.clone(), ty.clone())))
                    .collect();
                let label = g.to_string();
                for (env, names) in assignments(&free_type_vars([&local]), self.i) {
                    let cands = self.candidates(&vars, ctx, &env)?;
                    if cands.iter().any(|(_, v)| v.is_empty()) {
                        continue;
                    }
                    t.add(self.sweep(
                        &cands,
                        &label,
                        |s| {
                            self.ev
                                .goal(g, s)
                                .is_wrong()
                                .then(|| (k + 1, label.clone()))
                        },
                        &names,
                    )?);
                }
            }
        }
        Ok(t)
    }
}

/// Other ways of dividing a clause context among the branches: each head
/// variable of sum type gets a non-empty subset of its summands per branch,
/// covering all of them; locals keep their type in their own branch.
fn alternative_splits(c: &Clause, gamma: &Context) -> Vec<Vec<Context>> {
    let heads: Vec<String> = c
        .head
        .iter()
        .filter_map(|t| t.as_var().map(String::from))
        .collect();
    let m = c.body.len();
    let mut per_var: Vec<(String, Vec<Vec<SimpleType>>)> = Vec::new();
    for h in &heads {
        let Some(t) = gamma.get(h) else { continue };
        let items = match t {
            SimpleType::Sum(items) => items.clone(),
            other => alloc::vec![other.clone()],
        };
        let subsets: Vec<SimpleType> = (1u32..(1 << items.len().min(12)))
            .map(|mask| {
                SimpleType::sum(
                    items
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| mask & (1 << j) != 0)
                        .map(|(_, t)| t.clone())
                        .collect(),
                )
            })
            .collect();
        per_var.push((h.clone(), alloc::vec![subsets; m]));
    }
    let mut choices: Vec<Vec<SimpleType>> = Vec::new();
    let mut owners: Vec<(usize, usize)> = Vec::new();
    for (v, (_, branches)) in per_var.iter().enumerate() {
        for (k, subsets) in branches.iter().enumerate() {
            choices.push(subsets.clone());
            owners.push((v, k));
        }
    }
    let mut out = Vec::new();
    for_each_product(&choices, |pick| {
        if out.len() >= MAX_SPLITS {
            return;
        }
        let mut split: Vec<Context> = c
            .body
            .iter()
            .map(|seq| {
                seq_vars(seq)
                    .into_iter()
                    .filter(|x| !heads.contains(x))
                    .filter_map(|x| gamma.get(&x).map(|t| (x, t.clone())))
                    .collect()
            })
            .collect();
        for (&(v, k), t) in owners.iter().zip(pick) {
            split[k].insert(&per_var[v].0, t.clone());
        }
        let covered = split
            .iter()
            .fold(Context::new(), |acc, g| crate::typeck::context_sum(&acc, g));
        if covered.equiv(gamma) {
            out.push(split);
        }
    });
    out
}

/// Checks a judgement by enumeration over `i`. Type variables range over
/// single term domains; clause contexts are tried split by split until one
/// yields no `wrong`.
pub fn semantic_typing_check(
    gamma: &Context,
    j: Judgement<'_>,
    i: &Interpretation,
    max_states: u64,
) -> Result<TypingReport, SoundnessError> {
    let run = Run::new(i, max_states);
    match j {
        Judgement::Term(t, ty) => {
            let mut tally = Tally::default();
            let mut ctxs = alloc::vec![gamma.clone()];
            ctxs.push(core::iter::once(("_".to_string(), ty.clone())).collect());
            for (env, names) in assignments(&free_type_vars(&ctxs), i) {
                let meaning = tsem(ty, i, &env)?;
                let cands = run.candidates(&t.vars(), gamma, &env)?;
                let label = t.to_string();
                tally.add(run.sweep(
                    &cands,
                    &label,
                    |s| (!meaning.contains(&run.ev.term(t, s))).then(|| (0, label.clone())),
                    &names,
                )?);
            }
            Ok(TypingReport::from_tally(tally, None, 0))
        }
        Judgement::Goal(g) => {
            let mut tally = Tally::default();
            for (env, names) in assignments(&free_type_vars([gamma]), i) {
                let cands = run.candidates(&g.vars(), gamma, &env)?;
                let label = g.to_string();
                tally.add(run.sweep(
                    &cands,
                    &label,
                    |s| run.ev.goal(g, s).is_wrong().then(|| (0, label.clone())),
                    &names,
                )?);
            }
            Ok(TypingReport::from_tally(tally, None, 0))
        }
        Judgement::Clause(c, given) => {
            let mut first: Option<Tally> = None;
            let mut tried = 0;
            let given = given.iter().filter(|s| s.len() == c.body.len()).cloned();
            let mut splits: Vec<Vec<Context>> = given.collect();
            let fallback_from = splits.len();
            let mut generated = false;
            let mut idx = 0;
            loop {
                if idx == splits.len() {
                    if generated {
                        break;
                    }
                    generated = true;
                    splits.extend(alternative_splits(c, gamma));
                    if idx == splits.len() {
                        break;
                    }
                }
                let split = &splits[idx];
                idx += 1;
                if idx > fallback_from && splits[..fallback_from].contains(split) {
                    continue;
                }
                tried += 1;
                let tally = run.clause_split(c, split)?;
                if tally.status() != Status::Violation {
                    return Ok(TypingReport::from_tally(tally, Some(split.clone()), tried));
                }
                first.get_or_insert(tally);
            }
            Ok(TypingReport::from_tally(
                first.unwrap_or_default(),
                None,
                tried,
            ))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateReport {
    pub predicate: PredId,
    pub report: TypingReport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessReport {
    pub depth: usize,
    pub universe_size: usize,
    pub predicates: Vec<PredicateReport>,
    /// Whether each constant's value lies in the meaning of its type.
    pub constants: Vec<(String, bool)>,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.predicates
            .iter()
            .all(|p| p.report.status != Status::Violation)
            && self.constants.iter().all(|(_, ok)| *ok)
    }

    pub fn states_checked(&self) -> u64 {
        self.predicates
            .iter()
            .map(|p| p.report.states_checked)
            .sum()
    }

    pub fn truncation_count(&self) -> u64 {
        self.predicates
            .iter()
            .map(|p| p.report.truncation_count)
            .sum()
    }
}

/// Every constant of the program and the declarations denotes a value of
/// its own type.
pub fn constant_typing_check(
    p: &Program,
    table: &TypeDeclTable,
    i: &Interpretation,
) -> Result<Vec<(String, bool)>, SoundnessError> {
    let mut names: BTreeSet<String> = p.constants();
    names.extend(table.declared_constants().map(|(c, _, _)| String::from(c)));
    names
        .into_iter()
        .map(|c| {
            let ok = match i.constant(&c) {
                Some(v) => tsem(&table.type_of_constant(&c), i, &TypeEnv::new())?.contains(v),
                None => false,
            };
            Ok((c, ok))
        })
        .collect()
}

fn require_normal(p: &Program) -> Result<(), SoundnessError> {
    for c in &p.clauses {
        if !is_normal_clause(c) || p.clauses.iter().filter(|d| d.pred() == c.pred()).count() > 1 {
            return Err(SoundnessError::NotNormal(c.pred()));
        }
    }
    Ok(())
}

/// Checks a normal program, builds its canonical interpretation and
/// verifies semantic typing of every clause under its checked context.
pub fn verify_soundness(
    p: &Program,
    table: &TypeDeclTable,
    cfg: &UniverseConfig,
) -> Result<SoundnessReport, SoundnessError> {
    require_normal(p)?;
    let check = check_program(p, table, None);
    if !check.is_ok() {
        return Err(SoundnessError::IllTyped(check.errors));
    }
    let i = build_interpretation(p, table, Some(&check), cfg)?;
    let mut predicates = Vec::new();
    for (id, pc) in &check.checked {
        let Some(c) = p.clause(id) else { continue };
        let report = semantic_typing_check(
            &pc.derivation.context,
            Judgement::Clause(c, core::slice::from_ref(&pc.branch_contexts)),
            &i,
            cfg.max_states,
        )?;
        predicates.push(PredicateReport {
            predicate: id.clone(),
            report,
        });
    }
    Ok(SoundnessReport {
        depth: i.universe.depth(),
        universe_size: i.universe.value_count(),
        predicates,
        constants: constant_typing_check(p, table, &i)?,
    })
}

/// Evaluates every goal and head call of a normal program over all values,
/// ignoring types. Predicates are interpreted on every domain, so only
/// equations across domains and constructor misuse can produce `wrong`.
pub fn evaluate_untyped(
    p: &Program,
    table: &TypeDeclTable,
    cfg: &UniverseConfig,
) -> Result<TypingReport, SoundnessError> {
    require_normal(p)?;
    let i = build_interpretation(p, table, None, cfg)?;
    let run = Run::new(&i, cfg.max_states);
    let mut tally = Tally::default();
    let none = BTreeMap::new();
    for c in &p.clauses {
        let head = Goal::Call(c.name.clone(), c.head.clone());
        for (k, seq) in c.body.iter().enumerate() {
            for g in seq.iter().chain(core::iter::once(&head)) {
                let cands = run.candidates(&g.vars(), &Context::new(), &TypeEnv::new())?;
                let label = g.to_string();
                tally.add(run.sweep(
                    &cands,
                    &label,
                    |s| run.ev.goal(g, s).is_wrong().then(|| (k + 1, label.clone())),
                    &none,
                )?);
            }
        }
    }
    Ok(TypingReport::from_tally(tally, None, 0))
}

#[cfg(test)]
mod tests;
