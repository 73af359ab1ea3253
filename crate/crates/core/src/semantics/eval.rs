use alloc::vec::Vec;
use core::cell::Cell;

use super::{Applied, Interpretation, SemanticsError, State, TruthValue, Value};
use crate::ast::{or_degree, Clause, Goal, GoalSeq, PredId, Term};

/// Evaluates syntax under a fixed interpretation, counting how often a free
/// constructor produced `wrong` only because its result would exceed the
/// depth bound of the universe.
#[derive(Debug)]
pub struct Evaluator<'a> {
    interp: &'a Interpretation,
    truncations: Cell<usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(interp: &'a Interpretation) -> Evaluator<'a> {
        Evaluator {
            interp,
            truncations: Cell::new(0),
        }
    }

    pub fn interpretation(&self) -> &'a Interpretation {
        self.interp
    }

    /// Depth-bound incidents since creation or the last reset.
    pub fn truncations(&self) -> usize {
        self.truncations.get()
    }

    pub fn reset(&self) {
        self.truncations.set(0);
    }

    /// Unbound variables and uninterpreted symbols evaluate to `wrong`.
    pub fn term(&self, t: &Term, s: &State) -> Value {
        match t {
            Term::Var(x) => s.get(x).cloned().unwrap_or(Value::Wrong),
            Term::Const(k) => self.interp.constant(k).cloned().unwrap_or(Value::Wrong),
            Term::Compound(f, args) => {
                let vals: Vec<Value> = args.iter().map(|a| self.term(a, s)).collect();
                let Some(func) = self.interp.function(f, args.len()) else {
                    return Value::Wrong;
                };
                match func.apply(&vals) {
                    Applied::Value(v) => v,
                    Applied::OutOfSignature => Value::Wrong,
                    Applied::Undefined => {
                        if func.is_constructor() {
                            self.truncations.set(self.truncations.get() + 1);
                        }
                        Value::Wrong
                    }
                }
            }
        }
    }

    pub fn unify(&self, l: &Term, r: &Term, s: &State) -> TruthValue {
        unify_values(&self.term(l, s), &self.term(r, s))
    }

    pub fn call(&self, p: &str, args: &[Term], s: &State) -> TruthValue {
        let vals: Vec<Value> = args.iter().map(|a| self.term(a, s)).collect();
        self.call_values(&PredId::new(p, args.len()), &vals)
    }

    pub fn call_values(&self, p: &PredId, vals: &[Value]) -> TruthValue {
        let Some(func) = self.interp.predicate(p) else {
            return TruthValue::Wrong;
        };
        match func.apply(vals) {
            Applied::Value(Value::Bool(b)) => TruthValue::from_bool(b),
            _ => TruthValue::Wrong,
        }
    }

    pub fn goal(&self, g: &Goal, s: &State) -> TruthValue {
        match g {
            Goal::Unify(l, r) => self.unify(l, r, s),
            Goal::Call(p, args) => self.call(p, args, s),
        }
    }

    /// Conjunction of the goals; the empty sequence is `true`.
    pub fn seq(&self, goals: &[Goal], s: &State) -> TruthValue {
        let mut acc = TruthValue::True;
        for g in goals {
            acc = acc.and(self.goal(g, s));
            if acc.is_wrong() {
                break;
            }
        }
        acc
    }

    pub fn body(&self, body: &[GoalSeq], ss: &[State]) -> Result<TruthValue, SemanticsError> {
        let expected = or_degree(body);
        if ss.len() != expected {
            return Err(SemanticsError::ArityMismatch {
                expected,
                found: ss.len(),
            });
        }
        Ok(body
            .iter()
            .zip(ss)
            .map(|(sg, s)| self.seq(sg, s))
            .fold(TruthValue::False, TruthValue::or))
    }

    /// `body => head(s1) and ... and head(sm)`.
    pub fn clause(&self, c: &Clause, ss: &[State]) -> Result<TruthValue, SemanticsError> {
        let body = self.body(&c.body, ss)?;
        let heads = ss
            .iter()
            .map(|s| self.call(&c.name, &c.head, s))
            .fold(TruthValue::True, TruthValue::and);
        Ok(body.implies(heads))
    }
}

/// The equality equation on two already evaluated sides.
pub(crate) fn unify_values(a: &Value, b: &Value) -> TruthValue {
    if a.is_wrong() {
        TruthValue::Wrong
    } else if a == b {
        TruthValue::True
    } else if a.domain() == b.domain() {
        TruthValue::False
    } else {
        TruthValue::Wrong
    }
}

pub fn eval_term(t: &Term, i: &Interpretation, s: &State) -> Value {
    Evaluator::new(i).term(t, s)
}

pub fn eval_unify(l: &Term, r: &Term, i: &Interpretation, s: &State) -> TruthValue {
    Evaluator::new(i).unify(l, r, s)
}

/// Evaluates `goal`, which must be a call.
pub fn eval_call(goal: &Goal, i: &Interpretation, s: &State) -> TruthValue {
    match goal {
        Goal::Call(p, args) => Evaluator::new(i).call(p, args, s),
        Goal::Unify(..) => TruthValue::Wrong,
    }
}

pub fn eval_seq(goals: &[Goal], i: &Interpretation, s: &State) -> TruthValue {
    Evaluator::new(i).seq(goals, s)
}

pub fn eval_body(
    body: &[GoalSeq],
    i: &Interpretation,
    ss: &[State],
) -> Result<TruthValue, SemanticsError> {
    Evaluator::new(i).body(body, ss)
}

pub fn eval_clause(
    c: &Clause,
    i: &Interpretation,
    ss: &[State],
) -> Result<TruthValue, SemanticsError> {
    Evaluator::new(i).clause(c, ss)
}

#[cfg(test)]
mod tests {
    use super::super::{enumerate_states, ArgDomains, DomainId, UniverseBuilder};
    use super::*;
    use crate::ast::parse_program;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn int_atom() -> Interpretation {
        let u = UniverseBuilder::new(2)
            .basic("int", Some("int"), &["1", "2"])
            .basic("atom", Some("atom"), &["a"])
            .tree(
                "nat",
                vec![
                    ("0".into(), vec![]),
                    ("s".into(), vec![ArgDomains::Named(vec!["nat".into()])]),
                ],
            )
            .build()
            .unwrap();
        Interpretation::with_free_constructors(u)
    }

    fn int(tok: &str) -> Value {
        Value::base(DomainId(0), tok)
    }

    #[test]
    fn terms_evaluate_per_equations() {
        let i = int_atom();
        let s = State::new().with("X", int("1"));
        assert_eq!(eval_term(&Term::var("X"), &i, &s), int("1"));
        let zero = eval_term(&Term::constant("0"), &i, &s);
        assert_eq!(zero.domain(), DomainId(2));
        let sx = Term::compound("s", vec![Term::var("X")]);
        let a = State::new().with("X", Value::base(DomainId(1), "a"));
        assert_eq!(eval_term(&sx, &i, &a), Value::Wrong);
        let s0 = State::new().with("X", zero);
        assert_eq!(eval_term(&sx, &i, &s0).depth(), 1);
        // Wrong propagates through enclosing constructors.
        let ssx = Term::compound("s", vec![sx]);
        assert_eq!(eval_term(&ssx, &i, &a), Value::Wrong);
    }

    #[test]
    fn depth_overflow_is_counted() {
        let i = int_atom();
        let t = parse_program("p(s(s(s(0)))).").unwrap().clauses[0].head[0].clone();
        let ev = Evaluator::new(&i);
        assert_eq!(ev.term(&t, &State::new()), Value::Wrong);
        assert_eq!(ev.truncations(), 1);
    }

    #[test]
    fn unification_cases() {
        let i = int_atom();
        let s = State::new().with("X", int("1"));
        let (x, one, two, a) = (
            Term::var("X"),
            Term::constant("1"),
            Term::constant("2"),
            Term::constant("a"),
        );
        assert_eq!(eval_unify(&one, &one, &i, &s), TruthValue::True);
        assert_eq!(eval_unify(&x, &two, &i, &s), TruthValue::False);
        assert_eq!(eval_unify(&x, &a, &i, &s), TruthValue::Wrong);
        let bad = Term::compound("s", vec![a.clone()]);
        assert_eq!(eval_unify(&bad, &bad, &i, &s), TruthValue::Wrong);
    }

    #[test]
    fn calls_check_signatures() {
        let mut i = int_atom();
        let p = PredId::new("p", 1);
        let table: BTreeMap<Vec<Value>, bool> = [(vec![int("1")], true), (vec![int("2")], false)]
            .into_iter()
            .collect();
        i.set_predicate(p, vec![[DomainId(0)].into_iter().collect()], table);
        let call = |t: Term| Goal::Call("p".into(), vec![t]);
        let s = State::new();
        assert_eq!(
            eval_call(&call(Term::constant("1")), &i, &s),
            TruthValue::True
        );
        assert_eq!(
            eval_call(&call(Term::constant("2")), &i, &s),
            TruthValue::False
        );
        assert_eq!(
            eval_call(&call(Term::constant("a")), &i, &s),
            TruthValue::Wrong
        );
        let wrong_arg = Term::compound("s", vec![Term::constant("a")]);
        assert_eq!(eval_call(&call(wrong_arg), &i, &s), TruthValue::Wrong);
    }

    #[test]
    fn sequences_and_bodies() {
        let i = int_atom();
        let p =
            parse_program("p(X) :- X = 1, X = 2.\nq(X) :- X = 1, X = a.\nr(X) :- X = 1 ; X = 2.")
                .unwrap();
        let s = State::new().with("X", int("1"));
        assert_eq!(eval_seq(&p.clauses[0].body[0], &i, &s), TruthValue::False);
        assert_eq!(eval_seq(&p.clauses[1].body[0], &i, &s), TruthValue::Wrong);
        assert_eq!(eval_seq(&[], &i, &s), TruthValue::True);
        let r = &p.clauses[2].body;
        let t = State::new().with("X", int("2"));
        assert_eq!(
            eval_body(r, &i, &[s.clone(), s.clone()]),
            Ok(TruthValue::True)
        );
        assert_eq!(
            eval_body(r, &i, &[t.clone(), s.clone()]),
            Ok(TruthValue::False)
        );
        assert_eq!(
            eval_body(r, &i, &[s]),
            Err(SemanticsError::ArityMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn clause_value_is_an_implication() {
        let mut i = int_atom();
        let int_only = vec![[DomainId(0)].into_iter().collect()];
        let all_true = [(vec![int("1")], true), (vec![int("2")], true)]
            .into_iter()
            .collect();
        i.set_predicate(PredId::new("p", 1), int_only, all_true);
        let c = &parse_program("p(X) :- X = 1.").unwrap().clauses[0];
        let s = State::new().with("X", int("1"));
        assert_eq!(eval_clause(c, &i, &[s]), Ok(TruthValue::True));
        let a = State::new().with("X", Value::base(DomainId(1), "a"));
        assert_eq!(eval_clause(c, &i, &[a]), Ok(TruthValue::Wrong));
    }

    #[test]
    fn unify_is_symmetric_over_small_universe() {
        let i = int_atom();
        let terms = [
            Term::var("X"),
            Term::var("Y"),
            Term::constant("1"),
            Term::constant("a"),
            Term::compound("s", vec![Term::var("X")]),
        ];
        for s in enumerate_states(&["X", "Y"], i.universe.domains(), 1000).unwrap() {
            for l in &terms {
                for r in &terms {
                    assert_eq!(eval_unify(l, r, &i, &s), eval_unify(r, l, &i, &s));
                }
            }
        }
    }
}
