use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::SoundnessError;
use crate::ast::{seq_vars, Clause, Goal, PredId, Program, Term};
use crate::semantics::{
    count_states, ArgDomains, DomainSet, Evaluator, Interpretation, State, TruthValue, Universe,
    UniverseBuilder, Value, DEFAULT_DEPTH, DEFAULT_MAX_STATES,
};
use crate::typeck::ProgramCheck;
use crate::types::{
    domains_of, literal_base, tsem, DomainClass, SimpleType, TypeDeclTable, TypeEnv,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicDomainConfig {
    pub name: String,
    pub base_type: Option<String>,
    pub tokens: Vec<String>,
}

/// Size of the finite universe verification runs over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniverseConfig {
    pub depth: usize,
    /// Extra basic domains or tokens; program constants are added to the
    /// domain of their base type automatically.
    pub basic: Vec<BasicDomainConfig>,
    pub max_values: u64,
    pub max_states: u64,
}

impl Default for UniverseConfig {
    fn default() -> Self {
        UniverseConfig {
            depth: DEFAULT_DEPTH,
            basic: Vec::new(),
            max_values: 100_000,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl UniverseConfig {
    pub fn with_depth(depth: usize) -> UniverseConfig {
        UniverseConfig {
            depth,
            ..UniverseConfig::default()
        }
    }
}

fn collect_bases(t: &SimpleType, out: &mut BTreeSet<String>) {
    match t {
        SimpleType::Base(b) => {
            out.insert(b.clone());
        }
        SimpleType::Sum(items) | SimpleType::App(_, items) => {
            items.iter().for_each(|i| collect_bases(i, out))
        }
        SimpleType::Mu(_, body) => collect_bases(body, out),
        _ => {}
    }
}

fn placeholder(base: &str, taken: &BTreeSet<String>) -> String {
    (0..)
        .map(|i| match base {
            "int" => format!("{i}"),
            "float" => format!("{i}.5"),
            _ => format!("{}{}", base.chars().next().unwrap_or('k'), i),
        })
        .find(|t| !taken.contains(t))
        .unwrap_or_default()
}

/// The universe of the canonical interpretation: a basic domain per base
/// type holding the program's undeclared constants, and a tree domain per
/// declared type holding its constants as leaves and its constructors'
/// trees up to the depth bound.
pub fn build_universe(
    p: &Program,
    table: &TypeDeclTable,
    check: Option<&ProgramCheck>,
    cfg: &UniverseConfig,
) -> Result<Universe, SoundnessError> {
    let mut basic: Vec<BasicDomainConfig> = cfg.basic.clone();
    let mut taken: BTreeSet<String> = p.constants();
    taken.extend(table.declared_constants().map(|(c, _, _)| String::from(c)));
    basic
        .iter()
        .for_each(|b| taken.extend(b.tokens.iter().cloned()));

    fn domain_for<'b>(
        basic: &'b mut Vec<BasicDomainConfig>,
        base: &str,
    ) -> &'b mut BasicDomainConfig {
        if let Some(i) = basic
            .iter()
            .position(|b| b.base_type.as_deref() == Some(base))
        {
            return &mut basic[i];
        }
        basic.push(BasicDomainConfig {
            name: base.into(),
            base_type: Some(base.into()),
            tokens: Vec::new(),
        });
        basic.last_mut().unwrap()
    }

    for c in p.constants() {
        if table.declared_constant(&c).is_some() || basic.iter().any(|b| b.tokens.contains(&c)) {
            continue;
        }
        domain_for(&mut basic, literal_base(&c)).tokens.push(c);
    }
    let mut needed = BTreeSet::new();
    for (_, ct) in table.constructors() {
        ct.args.iter().for_each(|a| collect_bases(a, &mut needed));
    }
    if let Some(check) = check {
        for pc in check.checked.values() {
            pc.scheme
                .body
                .args
                .iter()
                .for_each(|a| collect_bases(a, &mut needed));
            for ctx in &pc.branch_contexts {
                ctx.iter().for_each(|(_, t)| collect_bases(t, &mut needed));
            }
        }
    }
    for b in needed {
        domain_for(&mut basic, &b);
    }
    for b in basic.iter_mut() {
        if b.tokens.is_empty() {
            let tok = placeholder(b.base_type.as_deref().unwrap_or(&b.name), &taken);
            taken.insert(tok.clone());
            b.tokens.push(tok);
        }
    }

    let mut builder = UniverseBuilder::new(cfg.depth).max_values(cfg.max_values);
    for b in &basic {
        builder = builder.basic_owned(b.name.clone(), b.base_type.clone(), b.tokens.clone());
    }
    let base_domain = |b: &str| -> String {
        basic
            .iter()
            .find(|d| d.base_type.as_deref() == Some(b))
            .map(|d| d.name.clone())
            .unwrap_or_else(|| b.into())
    };
    for d in table.decls() {
        let mut ctors: Vec<(String, Vec<ArgDomains>)> = d
            .constants
            .iter()
            .map(|c| (c.clone(), Vec::new()))
            .collect();
        for key in &d.constructors {
            let Some(ct) = table.type_of_functor(&key.0, key.1) else {
                continue;
            };
            let args = ct
                .args
                .iter()
                .map(|a| {
                    let classes = table.domain_classes(a);
                    if classes.iter().any(|c| matches!(c, DomainClass::Var(_))) {
                        return ArgDomains::Any;
                    }
                    ArgDomains::Named(
                        classes
                            .iter()
                            .filter_map(|c| match c {
                                DomainClass::Base(b) => Some(base_domain(b)),
                                DomainClass::Decl(n) => Some(n.clone()),
                                _ => None,
                            })
                            .collect(),
                    )
                })
                .collect();
            ctors.push((key.0.clone(), args));
        }
        builder = builder.tree(&d.name, ctors);
    }
    Ok(builder.build()?)
}

/// Signature domains of a predicate: those of its checked type, where a
/// type variable stands for every value; every domain if it is unchecked.
fn signature(
    id: &PredId,
    i: &Interpretation,
    check: Option<&ProgramCheck>,
) -> Result<Vec<DomainSet>, SoundnessError> {
    match check.and_then(|c| c.scheme(id)) {
        Some(s) => s
            .body
            .args
            .iter()
            .map(|a| Ok(domains_of(&tsem(a, i, &TypeEnv::new())?)))
            .collect(),
        None => Ok((0..id.arity).map(|_| i.universe.all_domain_ids()).collect()),
    }
}

/// True sets of every predicate after each round of the least fixpoint.
pub type FixpointTrace = Vec<BTreeMap<PredId, BTreeSet<Vec<Value>>>>;

/// The canonical interpretation: free constructors over [`build_universe`]
/// and predicate tables from least-fixpoint iteration of the clauses,
/// starting from all-`false` over each predicate's signature domains.
pub fn build_interpretation(
    p: &Program,
    table: &TypeDeclTable,
    check: Option<&ProgramCheck>,
    cfg: &UniverseConfig,
) -> Result<Interpretation, SoundnessError> {
    Ok(build_interpretation_traced(p, table, check, cfg)?.0)
}

pub fn build_interpretation_traced(
    p: &Program,
    table: &TypeDeclTable,
    check: Option<&ProgramCheck>,
    cfg: &UniverseConfig,
) -> Result<(Interpretation, FixpointTrace), SoundnessError> {
    let u = build_universe(p, table, check, cfg)?;
    interpret_over(p, u, check, cfg.max_states)
}

/// Free constructors over a given universe plus least-fixpoint predicate
/// tables for the program's predicates.
pub fn interpret_over(
    p: &Program,
    u: Universe,
    check: Option<&ProgramCheck>,
    max_states: u64,
) -> Result<(Interpretation, FixpointTrace), SoundnessError> {
    let mut i = Interpretation::with_free_constructors(u);
    let mut tuples: BTreeMap<PredId, (Vec<DomainSet>, Vec<Vec<Value>>)> = BTreeMap::new();
    for id in p.pred_ids() {
        let sig = signature(&id, &i, check)?;
        let cands: Vec<Vec<Value>> = sig.iter().map(|ds| i.universe.members_of(ds)).collect();
        let total = count_states(cands.iter().map(Vec::len));
        if total > u128::from(max_states) {
            return Err(SoundnessError::Semantics(
                crate::semantics::SemanticsError::UniverseTooLarge {
                    what: format!("table of {id}"),
                    count: total,
                    cap: max_states,
                },
            ));
        }
        let mut all = Vec::new();
        crate::semantics::for_each_product(&cands, |t| all.push(t.to_vec()));
        tuples.insert(id, (sig, all));
    }
    let mut truth: BTreeMap<PredId, BTreeSet<Vec<Value>>> = tuples
        .keys()
        .map(|k| (k.clone(), BTreeSet::new()))
        .collect();
    let install = |i: &mut Interpretation, truth: &BTreeMap<PredId, BTreeSet<Vec<Value>>>| {
        for (id, (sig, all)) in &tuples {
            let t = all
                .iter()
                .map(|a| (a.clone(), truth[id].contains(a)))
                .collect();
            i.set_predicate(id.clone(), sig.clone(), t);
        }
    };
    install(&mut i, &truth);
    let mut trace = alloc::vec![truth.clone()];
    loop {
        let mut next = truth.clone();
        for (id, clauses) in p.predicates() {
            let (_, all) = &tuples[&id];
            let allowed: BTreeSet<&Vec<Value>> = all.iter().collect();
            for c in clauses {
                for tuple in clause_true_tuples(c, &i) {
                    if allowed.contains(&tuple) {
                        next.get_mut(&id).unwrap().insert(tuple);
                    }
                }
            }
        }
        if next == truth {
            return Ok((i, trace));
        }
        truth = next;
        install(&mut i, &truth);
        trace.push(truth.clone());
    }
}

/// Goals grouped by shared variables.
fn components(seq: &[Goal]) -> Vec<Vec<usize>> {
    let mut comps: Vec<(BTreeSet<String>, Vec<usize>)> = Vec::new();
    for (g, goal) in seq.iter().enumerate() {
        let mut vars = goal.vars();
        let mut members = alloc::vec![g];
        let mut k = 0;
        while k < comps.len() {
            if comps[k].0.is_disjoint(&vars) {
                k += 1;
            } else {
                let (v, m) = comps.swap_remove(k);
                vars.extend(v);
                members.extend(m);
            }
        }
        comps.push((vars, members));
    }
    comps
        .into_iter()
        .map(|(_, mut m)| {
            m.sort_unstable();
            m
        })
        .collect()
}

/// Head tuples for which some branch of the clause is `true`. Each group
/// of goals linked by variables is solved on its own: groups without head
/// variables need one solution, the others are projected on the head.
pub fn clause_true_tuples(c: &Clause, i: &Interpretation) -> BTreeSet<Vec<Value>> {
    let ev = Evaluator::new(i);
    let values: Vec<Value> = i.universe.values().cloned().collect();
    let head_vars: BTreeSet<String> = c.head.iter().flat_map(Term::vars).collect();
    let mut out = BTreeSet::new();
    'branch: for seq in &c.body {
        let mut parts: Vec<(Vec<String>, Vec<Vec<Value>>)> = Vec::new();
        let mut covered = BTreeSet::new();
        for comp in components(seq) {
            let goals: Vec<Goal> = comp.iter().map(|&g| seq[g].clone()).collect();
            let proj: Vec<String> = seq_vars(&goals).intersection(&head_vars).cloned().collect();
            let solver = Solver {
                ev: &ev,
                values: &values,
                first_only: proj.is_empty(),
                proj: &proj,
            };
            let mut found = BTreeSet::new();
            solver.search(
                &goals,
                &mut State::new(),
                &mut (0..goals.len()).collect(),
                &mut found,
            );
            if found.is_empty() {
                continue 'branch;
            }
            covered.extend(proj.iter().cloned());
            if !proj.is_empty() {
                parts.push((proj, found.into_iter().collect()));
            }
        }
        for x in head_vars.difference(&covered) {
            parts.push((
                alloc::vec![x.clone()],
                values.iter().map(|v| alloc::vec![v.clone()]).collect(),
            ));
        }
        let rows: Vec<Vec<Vec<Value>>> = parts.iter().map(|(_, r)| r.clone()).collect();
        crate::semantics::for_each_product(&rows, |pick| {
            let mut st = State::new();
            for ((names, _), vals) in parts.iter().zip(pick) {
                for (x, v) in names.iter().zip(vals) {
                    st.insert(x, v.clone());
                }
            }
            let tuple: Vec<Value> = c.head.iter().map(|t| ev.term(t, &st)).collect();
            if !tuple.iter().any(Value::is_wrong) {
                out.insert(tuple);
            }
        });
    }
    out
}

/// The same tuples by exhaustive enumeration of the branch variables.
pub fn clause_true_tuples_brute(c: &Clause, i: &Interpretation) -> BTreeSet<Vec<Value>> {
    let ev = Evaluator::new(i);
    let mut out = BTreeSet::new();
    for seq in &c.body {
        let mut vars: BTreeSet<String> = seq_vars(seq);
        c.head.iter().for_each(|t| t.collect_vars(&mut vars));
        let vars: Vec<String> = vars.into_iter().collect();
        let Ok(states) = crate::semantics::enumerate_states(&vars, i.universe.domains(), u64::MAX)
        else {
            continue;
        };
        for s in states {
            if ev.seq(seq, &s) == TruthValue::True {
                let head: Vec<Value> = c.head.iter().map(|t| ev.term(t, &s)).collect();
                if !head.iter().any(Value::is_wrong) {
                    out.insert(head);
                }
            }
        }
    }
    out
}

struct Solver<'a> {
    ev: &'a Evaluator<'a>,
    values: &'a [Value],
    /// Variables whose values are collected at each solution.
    proj: &'a [String],
    first_only: bool,
}

fn bound(t: &Term, s: &State) -> bool {
    t.vars().iter().all(|v| s.get(v).is_some())
}

/// Bindings making `t` denote `v` under free constructors, if any.
fn match_value(t: &Term, v: &Value, s: &State, i: &Interpretation, out: &mut State) -> bool {
    match t {
        Term::Var(x) => match s.get(x).or_else(|| out.get(x)) {
            Some(w) => w == v,
            None => {
                out.insert(x, v.clone());
                true
            }
        },
        Term::Const(c) => i.constant(c) == Some(v),
        Term::Compound(f, args) => match v {
            Value::Tree { ctor, children, .. }
                if **ctor == *f.as_str() && children.len() == args.len() =>
            {
                args.iter()
                    .zip(children.iter())
                    .all(|(a, c)| match_value(a, c, s, i, out))
            }
            _ => false,
        },
    }
}

impl Solver<'_> {
    fn search(
        &self,
        goals: &[Goal],
        s: &mut State,
        pending: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<Value>>,
    ) {
        if self.first_only && !out.is_empty() {
            return;
        }
        let before = pending.clone();
        let mut ok = true;
        pending.retain(|&g| {
            if !ok || !goals[g].terms().all(|t| bound(t, s)) {
                return true;
            }
            ok &= self.ev.goal(&goals[g], s) == TruthValue::True;
            false
        });
        if ok {
            self.expand(goals, s, pending, out);
        }
        *pending = before;
    }

    fn with(
        &self,
        goals: &[Goal],
        s: &State,
        pending: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<Value>>,
        extra: State,
    ) {
        let mut next = s.clone();
        for (x, v) in extra.iter() {
            next.insert(x, v.clone());
        }
        self.search(goals, &mut next, pending, out);
    }

    fn expand(
        &self,
        goals: &[Goal],
        s: &mut State,
        pending: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<Value>>,
    ) {
        let i = self.ev.interpretation();
        if pending.is_empty() {
            out.insert(
                self.proj
                    .iter()
                    .map(|x| s.get(x).cloned().unwrap_or(Value::Wrong))
                    .collect(),
            );
            return;
        }
        // An equation with one side known fixes the other side's variables.
        for &g in pending.iter() {
            if let Goal::Unify(l, r) = &goals[g] {
                for (known, open) in [(l, r), (r, l)] {
                    if bound(known, s) {
                        let v = self.ev.term(known, s);
                        if v.is_wrong() {
                            return;
                        }
                        let mut extra = State::new();
                        if match_value(open, &v, s, i, &mut extra) {
                            self.with(goals, s, pending, out, extra);
                        }
                        return;
                    }
                }
            }
        }
        // A call can only be true on the true rows of its table.
        for &g in pending.iter() {
            if let Goal::Call(p, args) = &goals[g] {
                let Some(func) = i.predicate(&PredId::new(p, args.len())) else {
                    return;
                };
                let Some(rows) = func.table() else { return };
                for (row, res) in rows {
                    if *res != Value::Bool(true) {
                        continue;
                    }
                    let mut extra = State::new();
                    if args
                        .iter()
                        .zip(row)
                        .all(|(a, v)| match_value(a, v, s, i, &mut extra))
                    {
                        self.with(goals, s, pending, out, extra);
                    }
                }
                return;
            }
        }
        let x = pending
            .iter()
            .flat_map(|&g| goals[g].vars())
            .find(|x| s.get(x).is_none());
        if let Some(x) = x {
            for v in self.values {
                self.with(goals, s, pending, out, State::new().with(&x, v.clone()));
            }
        }
    }
}
