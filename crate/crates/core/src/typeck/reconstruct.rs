use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::unify::{Unifier, UnifyFail};
use super::{Context, Schemes, TypeError};
use crate::ast::{seq_vars, Clause, Goal, PredId, Term};
use crate::normalize::is_normal_clause;
use crate::subtyping::is_subtype;
use crate::types::{SimpleType, TypeDeclTable};

struct Recon<'a> {
    table: &'a TypeDeclTable,
    schemes: &'a Schemes,
    u: Unifier,
}

type Env = BTreeMap<String, SimpleType>;

impl Recon<'_> {
    fn term(&mut self, env: &mut Env, t: &Term) -> Result<SimpleType, TypeError> {
        match t {
            Term::Var(x) => {
                if let Some(ty) = env.get(x) {
                    return Ok(ty.clone());
                }
                let ty = self.u.fresh();
                env.insert(x.clone(), ty.clone());
                Ok(ty)
            }
            Term::Const(c) => Ok(self.u.instantiate(&self.table.type_of_constant(c))),
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
                for (i, a) in args.iter().enumerate() {
                    let found = self.term(env, a)?;
                    if let Err(e) = self.u.unify(&found, &inst[i]) {
                        return Err(match e {
                            UnifyFail::Occurs(var, ty) => TypeError::OccursCheck { var, ty },
                            UnifyFail::Clash => TypeError::ArgumentTypeMismatch {
                                functor: f.clone(),
                                position: i + 1,
                                expected: self.u.resolve(&inst[i]),
                                found: self.u.resolve(&found),
                            },
                        });
                    }
                }
                Ok(inst[args.len()].clone())
            }
        }
    }

    fn solve(&mut self, l: &SimpleType, r: &SimpleType) -> Result<(), TypeError> {
        self.u.unify(l, r).map_err(|e| match e {
            UnifyFail::Occurs(var, ty) => TypeError::OccursCheck { var, ty },
            UnifyFail::Clash => TypeError::UnsatisfiableConstraints {
                left: self.u.resolve(l),
                right: self.u.resolve(r),
            },
        })
    }

    fn unifications(&mut self, env: &mut Env, goals: &[Goal]) -> Result<(), TypeError> {
        for g in goals {
            if let Goal::Unify(l, r) = g {
                let tl = self.term(env, l)?;
                let tr = self.term(env, r)?;
                self.solve(&tl, &tr)?;
            }
        }
        Ok(())
    }

    fn calls(
        &mut self,
        env: &mut Env,
        goals: &[Goal],
        me: Option<&PredId>,
    ) -> Result<(), TypeError> {
        for g in goals {
            let Goal::Call(p, args) = g else { continue };
            let id = PredId::new(p, args.len());
            if Some(&id) == me {
                continue;
            }
            let scheme = self
                .schemes
                .get(&id)
                .ok_or_else(|| TypeError::UndefinedPredicate(id.clone()))?;
            for (i, (a, param)) in args.iter().zip(&scheme.body.args).enumerate() {
                let found = self.term(env, a)?;
                let required = self.u.instantiate(param);
                let current = self.u.resolve(&found);
                let ok = match &current {
                    SimpleType::Var(_) if self.u.unify(&current, &required).is_ok() => true,
                    _ if is_subtype(&current, &required) => true,
                    _ => self.u.unify(&current, &required).is_ok(),
                };
                if !ok {
                    return Err(TypeError::CallArgNotSubtype {
                        callee: id.clone(),
                        position: i + 1,
                        found: current,
                        required: param.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    fn recursive_calls(
        &mut self,
        env: &mut Env,
        goals: &[Goal],
        me: &PredId,
        heads: &[&str],
    ) -> Result<(), TypeError> {
        for g in goals {
            let Goal::Call(p, args) = g else { continue };
            if PredId::new(p, args.len()) != *me {
                continue;
            }
            for (i, (a, h)) in args.iter().zip(heads).enumerate() {
                let found = self.term(env, a)?;
                let expected = env[*h].clone();
                if self.u.unify(&found, &expected).is_err() {
                    return Err(TypeError::MonomorphismViolation {
                        position: i + 1,
                        found: self.u.resolve(&found),
                        expected: self.u.resolve(&expected),
                    });
                }
            }
        }
        Ok(())
    }

    fn context(&self, env: &Env) -> Context {
        env.iter()
            .map(|(x, t)| (x.clone(), self.u.resolve(t)))
            .collect()
    }
}

fn branch_env(r: &mut Recon<'_>, goals: &[Goal], heads: &[&str]) -> Env {
    let mut env = Env::new();
    for h in heads {
        env.insert((*h).into(), r.u.fresh());
    }
    for x in seq_vars(goals) {
        env.entry(x).or_insert_with(|| r.u.fresh());
    }
    env
}

/// Solves the constraints of one branch: `=` sides share a type,
/// constructor arguments follow their declared types, and call arguments
/// fit the callee's type. Unconstrained variables keep fresh variables.
pub fn reconstruct_branch_context(
    branch: &[Goal],
    head_vars: &[&str],
    schemes: &Schemes,
    table: &TypeDeclTable,
) -> Result<Context, TypeError> {
    let mut r = Recon {
        table,
        schemes,
        u: Unifier::new("_T"),
    };
    let mut env = branch_env(&mut r, branch, head_vars);
    r.unifications(&mut env, branch)?;
    r.calls(&mut env, branch, None)?;
    Ok(r.context(&env))
}

/// One context per branch of a normal clause. Recursive calls take the head
/// types of their branch. With `harmonize`, each head position is unified
/// across branches where that succeeds, so shared structure is not summed
/// needlessly.
pub fn reconstruct_clause_contexts(
    c: &Clause,
    schemes: &Schemes,
    table: &TypeDeclTable,
    harmonize: bool,
) -> Result<Vec<Context>, TypeError> {
    if !is_normal_clause(c) {
        return Err(TypeError::NotNormal(c.pred()));
    }
    let me = c.pred();
    let heads = c.head_vars().unwrap_or_default();
    let mut r = Recon {
        table,
        schemes,
        u: Unifier::new("_T"),
    };
    let mut envs = Vec::new();
    for (k, seq) in c.body.iter().enumerate() {
        let mut env = branch_env(&mut r, seq, &heads);
        r.unifications(&mut env, seq)
            .and_then(|_| r.calls(&mut env, seq, Some(&me)))
            .map_err(|e| e.in_branch(k + 1))?;
        envs.push(env);
    }
    for (k, (seq, env)) in c.body.iter().zip(envs.iter_mut()).enumerate() {
        r.recursive_calls(env, seq, &me, &heads)
            .map_err(|e| e.in_branch(k + 1))?;
    }
    if harmonize && envs.len() > 1 {
        for h in &heads {
            let saved = r.u.clone();
            let first = envs[0][*h].clone();
            if !envs[1..].iter().all(|e| r.u.unify(&first, &e[*h]).is_ok()) {
                r.u = saved;
            }
        }
    }
    Ok(envs.iter().map(|e| r.context(e)).collect())
}
