//! The `≤` relation on simple and predicate types, and its check against the
//! set semantics of types.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::semantics::{Applied, Func, FuncBody, Interpretation, Signature, Value};
use crate::types::{
    alpha_eq, canonical, domains_of, match_type, normalize_sum, psem_member, tsem, PredicateType,
    SimpleType, Subst, TsemError, TypeEnv,
};

/// Outcome of a subtype query together with the rules that established it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtypeTrace {
    pub holds: bool,
    /// Instantiation of the supertype's variables found along the way.
    pub subst: Subst,
    pub steps: Vec<String>,
}

struct Decider {
    flexible: BTreeSet<String>,
    assumptions: BTreeSet<(SimpleType, SimpleType)>,
    steps: Vec<String>,
    depth: usize,
}

impl Decider {
    fn log(&mut self, rule: &str, a: &SimpleType, b: &SimpleType) {
        let indent = "  ".repeat(self.depth);
        self.steps.push(format!("{indent}{rule}: {a} <= {b}"));
    }

    fn sub(&mut self, a: &SimpleType, b: &SimpleType, phi: &mut Subst) -> bool {
        let mark = self.steps.len();
        self.depth += 1;
        let ok = self.try_rules(a, b, phi);
        self.depth -= 1;
        if !ok {
            self.steps.truncate(mark);
        }
        ok
    }

    fn try_rules(&mut self, a: &SimpleType, b: &SimpleType, phi: &mut Subst) -> bool {
        if alpha_eq(a, b) {
            self.log("Reflexivity", a, b);
            return true;
        }
        if match_type(b, a, &self.flexible, phi) {
            self.log("Instance", a, b);
            return true;
        }
        if let SimpleType::Sum(items) = a {
            self.log("Left Union", a, b);
            let mut trial = phi.clone();
            if items.iter().all(|s| self.sub(s, b, &mut trial)) {
                *phi = trial;
                return true;
            }
            self.steps.pop();
        }
        if let SimpleType::Sum(items) = b {
            self.log("Right Union", a, b);
            for s in items {
                let mut trial = phi.clone();
                if self.sub(a, s, &mut trial) {
                    *phi = trial;
                    return true;
                }
            }
            self.steps.pop();
        }
        if matches!(a, SimpleType::Mu(..)) || matches!(b, SimpleType::Mu(..)) {
            let key = (canonical(a), canonical(b));
            if self.assumptions.contains(&key) {
                self.log("Assumption", a, b);
                return true;
            }
            self.assumptions.insert(key.clone());
            let (ua, ub) = (a.unfold(), b.unfold());
            self.log("Unfold", a, b);
            let mut trial = phi.clone();
            let ok = self.sub(&ua, &ub, &mut trial);
            self.assumptions.remove(&key);
            if ok {
                *phi = trial;
                return true;
            }
            self.steps.pop();
        }
        false
    }
}

/// Decides `a ≤ b`, recording the derivation.
pub fn explain_subtype(a: &SimpleType, b: &SimpleType) -> SubtypeTrace {
    let (a, b) = (normalize_sum(a), normalize_sum(b));
    let mut d = Decider {
        flexible: b.free_vars(),
        assumptions: BTreeSet::new(),
        steps: Vec::new(),
        depth: 0,
    };
    let mut phi = Subst::new();
    let holds = d.sub(&a, &b, &mut phi);
    SubtypeTrace {
        holds,
        subst: if holds { phi } else { Subst::new() },
        steps: d.steps,
    }
}

pub fn is_subtype(a: &SimpleType, b: &SimpleType) -> bool {
    explain_subtype(a, b).holds
}

/// `τ → bool ≤ τ' → bool` holds when each argument of `τ'` is a subtype of
/// the matching argument of `τ`.
pub fn explain_pred_subtype(a: &PredicateType, b: &PredicateType) -> SubtypeTrace {
    let mut steps = Vec::new();
    if a.args.len() != b.args.len() {
        steps.push(format!("arity differs: {a} vs {b}"));
        return SubtypeTrace {
            holds: false,
            subst: Subst::new(),
            steps,
        };
    }
    steps.push(format!("Contravariance: {a} <= {b}"));
    for (x, y) in a.args.iter().zip(&b.args) {
        let t = explain_subtype(y, x);
        steps.extend(t.steps.into_iter().map(|s| format!("  {s}")));
        if !t.holds {
            steps.push(format!("  fails: {y} is not <= {x}"));
            return SubtypeTrace {
                holds: false,
                subst: Subst::new(),
                steps,
            };
        }
    }
    SubtypeTrace {
        holds: true,
        subst: Subst::new(),
        steps,
    }
}

pub fn is_pred_subtype(a: &PredicateType, b: &PredicateType) -> bool {
    explain_pred_subtype(a, b).holds
}

/// Evidence that a decided subtyping did not match set containment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    /// A value of the subtype missing from the supertype.
    Value(Value),
    /// An argument tuple of the supertype on which a member of the subtype's
    /// meaning is not a truth value.
    Tuple(Vec<Value>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtypeSoundnessReport {
    pub derivable: bool,
    /// False only when `derivable` is true and containment fails.
    pub sound: bool,
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

/// If `a ≤ b` is derivable, checks that the meaning of `a` is contained in
/// the meaning of `b` over the interpretation. Free variables denote every
/// term value.
pub fn check_subtype_soundness(
    a: &SimpleType,
    b: &SimpleType,
    i: &Interpretation,
) -> Result<SubtypeSoundnessReport, TsemError> {
    let derivable = is_subtype(a, b);
    let mut report = SubtypeSoundnessReport {
        derivable,
        sound: true,
        checked: 0,
        counterexample: None,
    };
    if !derivable {
        return Ok(report);
    }
    let env = TypeEnv::new();
    let sb = tsem(b, i, &env)?;
    for v in tsem(a, i, &env)? {
        report.checked += 1;
        if !sb.contains(&v) {
            report.sound = false;
            report.counterexample = Some(Counterexample::Value(v));
            break;
        }
    }
    Ok(report)
}

/// The smallest member of the meaning of a predicate type: `false` on every
/// argument tuple the type allows, undefined elsewhere.
pub fn minimal_predicate(
    name: &str,
    pt: &PredicateType,
    i: &Interpretation,
) -> Result<Func, TsemError> {
    let env = TypeEnv::new();
    let sets = pt
        .args
        .iter()
        .map(|t| tsem(t, i, &env).map(|s| s.into_iter().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    let params = sets
        .iter()
        .map(|s| domains_of(&s.iter().cloned().collect()))
        .collect();
    let mut table = BTreeMap::new();
    crate::semantics::for_each_product(&sets, |args| {
        table.insert(args.to_vec(), Value::Bool(false));
    });
    Ok(Func {
        name: name.into(),
        signature: Signature {
            params,
            result: crate::semantics::DomainId::BOOL,
        },
        body: FuncBody::Table(table),
    })
}

/// Predicate-level version of [`check_subtype_soundness`] with a pluggable
/// decision procedure, so variants of the rules can be tested. The witness
/// is the minimal member of the subtype's meaning.
pub fn check_pred_subtype_soundness(
    a: &PredicateType,
    b: &PredicateType,
    i: &Interpretation,
    decide: impl Fn(&PredicateType, &PredicateType) -> bool,
) -> Result<SubtypeSoundnessReport, TsemError> {
    let derivable = decide(a, b);
    let mut report = SubtypeSoundnessReport {
        derivable,
        sound: true,
        checked: 0,
        counterexample: None,
    };
    if !derivable {
        return Ok(report);
    }
    let f = minimal_predicate("p", a, i)?;
    if psem_member(b, &f, i, &TypeEnv::new())? {
        report.checked = 1;
        return Ok(report);
    }
    let env = TypeEnv::new();
    let sets = b
        .args
        .iter()
        .map(|t| tsem(t, i, &env).map(|s| s.into_iter().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    crate::semantics::for_each_product(&sets, |args| {
        report.checked += 1;
        if report.counterexample.is_none()
            && !matches!(f.apply(args), Applied::Value(Value::Bool(_)))
        {
            report.counterexample = Some(Counterexample::Tuple(args.to_vec()));
        }
    });
    report.sound = false;
    Ok(report)
}
