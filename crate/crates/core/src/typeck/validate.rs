//! An independent re-check of derivation trees against the rule schemas.
//! It shares no code with the checker beyond the type utilities.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{context_sum, Context, Derivation, Rule, Schemes, Subject};
use crate::ast::{Goal, PredId, Term};
use crate::normalize::is_normal_clause;
use crate::subtyping::is_subtype;
use crate::types::{alpha_eq, match_type, SimpleType, Subst, TypeDeclTable};

struct V<'a> {
    table: &'a TypeDeclTable,
    schemes: &'a Schemes,
}

fn fail<T>(d: &Derivation, why: &str) -> Result<T, String> {
    Err(format!("{} node for `{}`: {why}", d.rule, d.subject))
}

fn instance_of(general: &SimpleType, t: &SimpleType, phi: &mut Subst) -> bool {
    match_type(general, t, &general.free_vars(), phi)
}

impl V<'_> {
    fn same_context(&self, d: &Derivation, p: &Derivation) -> Result<(), String> {
        if !d.context.equiv(&p.context) {
            return fail(p, "premise context differs from the conclusion's");
        }
        Ok(())
    }

    fn term(&self, d: &Derivation, t: &Term) -> Result<SimpleType, String> {
        if d.subject != Subject::Term(t.clone()) {
            return fail(d, "subject does not match the syntax");
        }
        let Some(ty) = d.ty.clone() else {
            return fail(d, "a term must have a term type");
        };
        match (d.rule, t) {
            (Rule::Var, Term::Var(x)) => match d.context.get(x) {
                Some(s) if alpha_eq(s, &ty) => Ok(ty),
                _ => fail(d, "type differs from the context's assumption"),
            },
            (Rule::Cst, Term::Const(c)) => {
                if instance_of(&self.table.type_of_constant(c), &ty, &mut Subst::new()) {
                    Ok(ty)
                } else {
                    fail(d, "type is not an instance of the constant's type")
                }
            }
            (Rule::Cpl, Term::Compound(f, args)) => {
                let Some(ctor) = self.table.type_of_functor(f, args.len()) else {
                    return fail(d, "functor has no declared type");
                };
                if d.premises.len() != args.len() {
                    return fail(d, "one premise per argument expected");
                }
                let mut flexible: BTreeSet<String> = ctor.result.free_vars();
                ctor.args
                    .iter()
                    .for_each(|a| flexible.extend(a.free_vars()));
                let mut phi = Subst::new();
                for ((p, a), declared) in d.premises.iter().zip(args).zip(&ctor.args) {
                    self.same_context(d, p)?;
                    let found = self.term(p, a)?;
                    if !match_type(declared, &found, &flexible, &mut phi) {
                        return fail(d, "argument type does not fit the functor's type");
                    }
                }
                if !match_type(&ctor.result, &ty, &flexible, &mut phi) {
                    return fail(d, "result is not the functor's instantiated result");
                }
                Ok(ty)
            }
            _ => fail(d, "rule does not apply to this syntax"),
        }
    }

    fn goal(
        &self,
        d: &Derivation,
        g: &Goal,
        rec: Option<(&PredId, &[SimpleType])>,
    ) -> Result<(), String> {
        if d.subject != Subject::Goal(g.clone()) {
            return fail(d, "subject does not match the syntax");
        }
        if d.ty.is_some() {
            return fail(d, "a goal has type bool");
        }
        match (d.rule, g) {
            (Rule::Unf, Goal::Unify(l, r)) => {
                let [pl, pr] = d.premises.as_slice() else {
                    return fail(d, "two premises expected");
                };
                self.same_context(d, pl)?;
                self.same_context(d, pr)?;
                let (tl, tr) = (self.term(pl, l)?, self.term(pr, r)?);
                if !alpha_eq(&tl, &tr) {
                    return fail(d, "the two sides have different types");
                }
                if self.table.domain_classes(&tl).len() > 1 {
                    return fail(d, "the common type spans several domains");
                }
                Ok(())
            }
            (Rule::Cll, Goal::Call(p, args)) => {
                let id = PredId::new(p, args.len());
                if d.premises.len() != args.len() || d.required.len() != args.len() {
                    return fail(d, "one premise and one required type per argument expected");
                }
                let recursive = rec.filter(|(me, _)| **me == id);
                for (i, (prem, a)) in d.premises.iter().zip(args).enumerate() {
                    self.same_context(d, prem)?;
                    let found = self.term(prem, a)?;
                    let req = &d.required[i];
                    if let Some((_, heads)) = recursive {
                        if !alpha_eq(&found, &heads[i]) || !alpha_eq(req, &heads[i]) {
                            return fail(d, "recursive call types differ from the head's");
                        }
                        continue;
                    }
                    let Some(scheme) = self.schemes.get(&id) else {
                        return fail(d, "callee has no checked type");
                    };
                    if !instance_of(&scheme.body.args[i], req, &mut Subst::new()) {
                        return fail(d, "required type is not an instance of the callee's");
                    }
                    if !is_subtype(&found, req) {
                        return fail(d, "argument type is not a subtype of the required type");
                    }
                }
                Ok(())
            }
            _ => fail(d, "rule does not apply to this goal"),
        }
    }

    fn seq(
        &self,
        d: &Derivation,
        goals: &[Goal],
        rec: Option<(&PredId, &[SimpleType])>,
    ) -> Result<(), String> {
        if d.rule != Rule::Con || d.subject != Subject::Seq(goals.to_vec()) {
            return fail(d, "expected a CON node for the goal sequence");
        }
        if d.premises.len() != goals.len() {
            return fail(d, "one premise per goal expected");
        }
        for (p, g) in d.premises.iter().zip(goals) {
            self.same_context(d, p)?;
            self.goal(p, g, rec)?;
        }
        Ok(())
    }

    fn node(&self, d: &Derivation) -> Result<(), String> {
        match &d.subject {
            Subject::Term(t) => self.term(d, t).map(|_| ()),
            Subject::Goal(g) => self.goal(d, g, None),
            Subject::Seq(gs) => self.seq(d, gs, None),
            Subject::Clause(c) => {
                if !is_normal_clause(c) {
                    return fail(d, "clause is not normal");
                }
                let recursive = c.is_recursive();
                if d.rule != if recursive { Rule::Rcls } else { Rule::Cls } {
                    return fail(d, "CLS is for non-recursive and RCLS for recursive clauses");
                }
                if d.premises.len() != c.body.len() {
                    return fail(d, "one premise per branch expected");
                }
                let heads = c.head_vars().unwrap_or_default();
                let me = c.pred();
                let mut sum = Context::new();
                for (p, seq) in d.premises.iter().zip(&c.body) {
                    let head_types: Vec<SimpleType> = match heads
                        .iter()
                        .map(|x| p.context.get(x).cloned())
                        .collect::<Option<Vec<_>>>()
                    {
                        Some(ts) => ts,
                        None => return fail(p, "branch context lacks a head variable"),
                    };
                    let rec = recursive.then_some((&me, head_types.as_slice()));
                    self.seq(p, seq, rec)?;
                    sum = context_sum(&sum, &p.context);
                }
                if !sum.equiv(&d.context) {
                    return fail(
                        d,
                        "conclusion context is not the sum of the branch contexts",
                    );
                }
                Ok(())
            }
        }
    }
}

/// Re-verifies every node of a derivation: subjects match the syntax, each
/// node instantiates its rule, and side conditions hold.
pub fn validate_derivation(
    d: &Derivation,
    table: &TypeDeclTable,
    schemes: &Schemes,
) -> Result<(), String> {
    V { table, schemes }.node(d)
}
