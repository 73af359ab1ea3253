//! Clause normalization.
//!
//! Every predicate `p/n` ends up defined by exactly one clause
//! `p(_A1, ..., _An) :- sg1 ; ... ; sgm.` where each original clause (and each
//! disjunct of its body) contributes one goal sequence. A sequence starts with
//! the unifications `_Aj = tj` for the original head arguments, keeps the
//! original goals in order, and passes every call argument through a fresh
//! variable `_Fk`. Original variables are renamed apart per sequence by
//! suffixing the sequence index, so sequences only share `_A1.._An`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ast::{seq_vars, Clause, Goal, GoalSeq, PredId, Program, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("{caller} calls undefined predicate {callee}")]
    UndefinedPredicate { caller: PredId, callee: PredId },
}

/// Name of the `i`-th (1-based) head variable of a normalized clause.
pub fn head_var(i: usize) -> String {
    format!("_A{i}")
}

pub fn normalize(raw: &Program) -> Result<Program, NormalizeError> {
    let defined = raw.pred_ids();
    for c in &raw.clauses {
        for callee in c.goals().filter_map(Goal::call_target) {
            if !defined.contains(&callee) {
                return Err(NormalizeError::UndefinedPredicate {
                    caller: c.pred(),
                    callee,
                });
            }
        }
    }
    let clauses = raw
        .predicates()
        .into_iter()
        .map(|(id, group)| match group.as_slice() {
            [only] if is_normal_clause(only) => (*only).clone(),
            _ => normalize_group(&id, &group),
        })
        .collect();
    Ok(Program {
        clauses,
        type_decls: raw.type_decls.clone(),
    })
}

fn normalize_group(id: &PredId, group: &[&Clause]) -> Clause {
    let heads: Vec<Term> = (1..=id.arity).map(|i| Term::Var(head_var(i))).collect();
    let mut body = Vec::new();
    let mut fresh = 0usize;
    for clause in group {
        for seq in &clause.body {
            let suffix = body.len() + 1;
            let mut rename = |v: &str| format!("{v}_{suffix}");
            let mut goals: GoalSeq = clause
                .head
                .iter()
                .zip(&heads)
                .map(|(arg, h)| Goal::Unify(h.clone(), arg.rename(&mut rename)))
                .collect();
            for goal in seq {
                match goal.rename(&mut rename) {
                    Goal::Call(p, args) => {
                        let mut flat = Vec::with_capacity(args.len());
                        for arg in args {
                            fresh += 1;
                            let v = Term::Var(format!("_F{fresh}"));
                            goals.push(Goal::Unify(v.clone(), arg));
                            flat.push(v);
                        }
                        goals.push(Goal::Call(p, flat));
                    }
                    unify => goals.push(unify),
                }
            }
            body.push(goals);
        }
    }
    let span = group.first().map(|c| c.span).unwrap_or_default();
    Clause {
        name: id.name.clone(),
        head: heads,
        body,
        span,
    }
}

/// Head arguments are distinct variables, calls take only variables, and
/// distinct sequences share no variables besides the head's.
pub fn is_normal_clause(c: &Clause) -> bool {
    let Some(heads) = c.head_vars() else {
        return false;
    };
    let head_set: BTreeSet<&str> = heads.iter().copied().collect();
    if head_set.len() != heads.len() {
        return false;
    }
    let calls_flat = c.goals().all(|g| match g {
        Goal::Call(_, args) => args.iter().all(Term::is_var),
        Goal::Unify(..) => true,
    });
    if !calls_flat {
        return false;
    }
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for seq in &c.body {
        let locals: BTreeSet<String> = seq_vars(seq)
            .into_iter()
            .filter(|v| !head_set.contains(v.as_str()))
            .collect();
        if locals.iter().any(|v| seen.contains(v)) {
            return false;
        }
        seen.extend(locals);
    }
    true
}

/// One clause per predicate, each in normal form.
pub fn is_normal(p: &Program) -> bool {
    p.predicates()
        .iter()
        .all(|(_, group)| group.len() == 1 && is_normal_clause(group[0]))
}

/// Renames variables to `V0, V1, ...` in order of first occurrence.
pub fn canonical_clause(c: &Clause) -> Clause {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut rename = |v: &str| {
        let n = names.len();
        names
            .entry(v.into())
            .or_insert_with(|| format!("V{n}"))
            .clone()
    };
    let head = c.head.iter().map(|t| t.rename(&mut rename)).collect();
    let body = c
        .body
        .iter()
        .map(|seq| seq.iter().map(|g| g.rename(&mut rename)).collect())
        .collect();
    Clause {
        name: c.name.clone(),
        head,
        body,
        span: c.span,
    }
}

pub fn alpha_equivalent_clauses(a: &Clause, b: &Clause) -> bool {
    canonical_clause(a) == canonical_clause(b)
}

/// Same declarations and clause-wise α-equivalent clauses, in order.
pub fn alpha_equivalent(a: &Program, b: &Program) -> bool {
    a.type_decls == b.type_decls
        && a.clauses.len() == b.clauses.len()
        && a.clauses
            .iter()
            .zip(&b.clauses)
            .all(|(x, y)| alpha_equivalent_clauses(x, y))
}
