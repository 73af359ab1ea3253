use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::{subst, PredicateType, SimpleType, Subst, TypeDeclTable};
use crate::semantics::{Applied, DomainSet, Func, Interpretation, Value};

pub type ValueSet = BTreeSet<Value>;

/// Meaning of free type variables. A variable missing from the map stands
/// for every term value of the universe.
pub type TypeEnv = BTreeMap<String, ValueSet>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TsemError {
    #[error("the interpretation has no meaning for `{0}`")]
    MissingSymbol(String),
    #[error("the universe has no domain for base type `{0}`")]
    UnknownBaseType(String),
}

/// The set of values a type denotes. Recursive types are computed as the
/// least fixpoint of their body, reached by iteration from the empty set.
pub fn tsem(t: &SimpleType, i: &Interpretation, env: &TypeEnv) -> Result<ValueSet, TsemError> {
    match t {
        SimpleType::Var(v) => Ok(match env.get(v) {
            Some(s) => s.clone(),
            None => i.universe.values().cloned().collect(),
        }),
        SimpleType::Base(b) => {
            let id = i
                .universe
                .base_domain(b)
                .ok_or_else(|| TsemError::UnknownBaseType(b.clone()))?;
            Ok(i.universe
                .members_of(&[id].into_iter().collect())
                .into_iter()
                .collect())
        }
        SimpleType::Bool => Ok([Value::Bool(false), Value::Bool(true)]
            .into_iter()
            .collect()),
        SimpleType::Const(c) => i
            .constant(c)
            .map(|v| [v.clone()].into_iter().collect())
            .ok_or_else(|| TsemError::MissingSymbol(c.clone())),
        SimpleType::App(f, args) => {
            let func = i
                .function(f, args.len())
                .ok_or_else(|| TsemError::MissingSymbol(f.clone()))?;
            let sets = args
                .iter()
                .map(|a| tsem(a, i, env).map(|s| s.into_iter().collect::<Vec<_>>()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(apply_all(func, &sets))
        }
        SimpleType::Sum(items) => {
            let mut out = ValueSet::new();
            for it in items {
                out.extend(tsem(it, i, env)?);
            }
            Ok(out)
        }
        SimpleType::Mu(b, body) => {
            let mut env = env.clone();
            let mut cur = ValueSet::new();
            loop {
                env.insert(b.clone(), cur.clone());
                let next = tsem(body, i, &env)?;
                if next == cur {
                    return Ok(cur);
                }
                cur = next;
            }
        }
    }
}

fn apply_all(func: &Func, sets: &[Vec<Value>]) -> ValueSet {
    let mut out = ValueSet::new();
    crate::semantics::for_each_product(sets, |args| {
        if let Applied::Value(v) = func.apply(args) {
            out.insert(v);
        }
    });
    out
}

/// `F^0(∅), ..., F^n(∅)` for a recursive type `mu b. body`; other types
/// give their meaning once.
pub fn tsem_iterates(
    t: &SimpleType,
    n: usize,
    i: &Interpretation,
    env: &TypeEnv,
) -> Result<Vec<ValueSet>, TsemError> {
    let SimpleType::Mu(b, body) = t else {
        return Ok(alloc::vec![tsem(t, i, env)?]);
    };
    let mut env = env.clone();
    let mut out = alloc::vec![ValueSet::new()];
    for _ in 0..n {
        env.insert(b.clone(), out.last().cloned().unwrap_or_default());
        out.push(tsem(body, i, &env)?);
    }
    Ok(out)
}

/// Domains meeting a set of values.
pub fn domains_of(vs: &ValueSet) -> DomainSet {
    vs.iter().map(Value::domain).collect()
}

/// The domains a type's values belong to.
pub fn assoc_domain(
    t: &SimpleType,
    i: &Interpretation,
    env: &TypeEnv,
) -> Result<DomainSet, TsemError> {
    Ok(domains_of(&tsem(t, i, env)?))
}

/// Ground types the universe can interpret: the base types it has a domain
/// for and every declared type instantiated at those base types.
pub fn ground_types(table: &TypeDeclTable, i: &Interpretation) -> Vec<SimpleType> {
    let bases: Vec<SimpleType> = i
        .universe
        .base_types()
        .map(|(b, _)| SimpleType::base(b))
        .collect();
    let mut out = bases.clone();
    for d in table.decls() {
        let choices: Vec<Vec<SimpleType>> = d.params.iter().map(|_| bases.clone()).collect();
        crate::semantics::for_each_product(&choices, |args| {
            if let Some(t) = table.instantiate_decl(&d.name, args) {
                if tsem(&t, i, &TypeEnv::new()).is_ok() {
                    out.push(t);
                }
            }
        });
    }
    out
}

/// Whether a predicate's meaning returns a truth value on every argument
/// tuple the type allows.
pub fn psem_member(
    pt: &PredicateType,
    func: &Func,
    i: &Interpretation,
    env: &TypeEnv,
) -> Result<bool, TsemError> {
    let sets = pt
        .args
        .iter()
        .map(|a| tsem(a, i, env).map(|s| s.into_iter().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ok = true;
    crate::semantics::for_each_product(&sets, |args| {
        if ok && !matches!(func.apply(args), Applied::Value(Value::Bool(_))) {
            ok = false;
        }
    });
    Ok(ok)
}

/// [`psem_member`] at every instance of the free variables by ground types.
pub fn psem_member_scheme(
    pt: &PredicateType,
    func: &Func,
    i: &Interpretation,
    table: &TypeDeclTable,
) -> Result<bool, TsemError> {
    let vars: Vec<String> = pt.free_vars().into_iter().collect();
    let grounds = ground_types(table, i);
    let choices: Vec<Vec<SimpleType>> = vars.iter().map(|_| grounds.clone()).collect();
    let mut result = Ok(true);
    crate::semantics::for_each_product(&choices, |ts| {
        if !matches!(result, Ok(true)) {
            return;
        }
        let phi: Subst = vars.iter().cloned().zip(ts.iter().cloned()).collect();
        let inst = PredicateType::new(pt.args.iter().map(|a| subst(a, &phi)).collect());
        result = psem_member(&inst, func, i, &TypeEnv::new());
    });
    result
}
