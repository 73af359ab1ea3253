use super::*;
use crate::ast::{parse_program, parse_term};
use crate::normalize::normalize;
use alloc::string::ToString;
use alloc::vec;

fn checked(src: &str) -> (Program, TypeDeclTable, ProgramCheck) {
    let p = normalize(&parse_program(src).unwrap()).unwrap();
    let t = TypeDeclTable::from_program(&p).unwrap();
    let c = check_program(&p, &t, None);
    (p, t, c)
}

fn shown(src: &str, name: &str, arity: usize) -> String {
    let (_, t, c) = checked(src);
    assert!(c.is_ok(), "{:?}", c.errors);
    t.show_pred(&c.scheme(&PredId::new(name, arity)).unwrap().body)
}

const APPEND: &str = "append([], L, L).\nappend([H|T], L, [H|R]) :- append(T, L, R).\n";

#[test]
fn sum_of_contexts() {
    let int = SimpleType::base("int");
    let atom = SimpleType::base("atom");
    let x_int = Context::new().with("X", int.clone());
    let x_atom = Context::new().with("X", atom.clone());
    let y_atom = Context::new().with("Y", atom.clone());
    assert_eq!(
        context_sum(&x_int, &x_atom),
        Context::new().with("X", SimpleType::sum(vec![int.clone(), atom.clone()]))
    );
    assert_eq!(
        context_sum(&x_int, &y_atom),
        Context::new().with("X", int.clone()).with("Y", atom)
    );
    assert_eq!(context_sum(&x_int, &Context::new()), x_int);
    assert_eq!(context_sum(&x_int, &x_int), x_int);
}

#[test]
fn two_branch_predicate_gets_a_sum_type() {
    let (p, t, c) = checked("p(X) :- X = 1 ; X = a.");
    let pc = &c.checked[&PredId::new("p", 1)];
    assert_eq!(t.show_pred(&pc.scheme.body), "int + atom -> bool");
    assert_eq!(pc.derivation.rule, Rule::Cls);
    let rules = pc.derivation.rules();
    for r in [Rule::Var, Rule::Cst, Rule::Unf, Rule::Con, Rule::Cls] {
        assert!(rules.contains(&r), "{r} missing");
    }
    assert_eq!(
        pc.branch_contexts[0].get("X"),
        Some(&SimpleType::base("int"))
    );
    assert_eq!(
        pc.branch_contexts[1].get("X"),
        Some(&SimpleType::base("atom"))
    );
    validate_derivation(&pc.derivation, &t, &c.schemes()).unwrap();
    let _ = p;
}

#[test]
fn append_with_list_declaration() {
    let src = alloc::format!(":- type list(A) = [] + [A|list(A)].\n{APPEND}");
    assert_eq!(
        shown(&src, "append", 3),
        "list(A) * list(A) * list(A) -> bool"
    );
    let (_, t, c) = checked(&src);
    assert_eq!(
        c.checked[&PredId::new("append", 3)].derivation.rule,
        Rule::Rcls
    );
    let query = vec![Goal::Call(
        "append".into(),
        vec![
            Term::constant("[]"),
            Term::constant("1"),
            Term::constant("1"),
        ],
    )];
    let err = check_query(&query, &c.schemes(), &t).unwrap_err();
    assert_eq!(err.kind(), "call_arg_not_subtype");
    let ok = vec![Goal::Call(
        "append".into(),
        vec![
            parse_term("[1]").unwrap(),
            Term::var("L"),
            parse_term("[1, 2]").unwrap(),
        ],
    )];
    check_query(&ok, &c.schemes(), &t).unwrap();
}

#[test]
fn append_with_dummy_declaration() {
    let src = alloc::format!(":- type dummy(A) = 1 + [] + [A|dummy(A)].\n{APPEND}");
    assert_eq!(
        shown(&src, "append", 3),
        "dummy(A) * dummy(A) * dummy(A) -> bool"
    );
    let (_, t, c) = checked(&src);
    let query = vec![Goal::Call(
        "append".into(),
        vec![
            Term::constant("[]"),
            Term::constant("1"),
            Term::constant("1"),
        ],
    )];
    check_query(&query, &c.schemes(), &t).unwrap();
}

#[test]
fn add_over_naturals() {
    let src = ":- type nat = 0 + s(nat).\nadd(0, X, X).\nadd(s(X), Y, s(Z)) :- add(X, Y, Z).";
    assert_eq!(shown(src, "add", 3), "nat * nat * nat -> bool");
}

#[test]
fn ill_typed_programs_are_rejected() {
    let (_, _, c) = checked("q(X) :- X = 1, X = a.");
    assert_eq!(c.errors.len(), 1);
    let e = &c.errors[0].error;
    assert_eq!(e.kind(), "unsatisfiable_constraints");
    assert_eq!(e.branch(), Some(1));
    let (_, _, c) = checked("p(X) :- X = f(1).");
    assert_eq!(c.errors[0].error.kind(), "undeclared_symbol");
}

#[test]
fn callers_see_callee_types() {
    let src = "p(X) :- X = 1 ; X = a.\nr(Y) :- Y = 1, p(Y).\ns(Y) :- p(Y).\nt(Y) :- Y = 2.5, p(Y).";
    let (_, t, c) = checked(src);
    assert_eq!(
        t.show_pred(&c.scheme(&PredId::new("r", 1)).unwrap().body),
        "int -> bool"
    );
    assert_eq!(
        t.show_pred(&c.scheme(&PredId::new("s", 1)).unwrap().body),
        "int + atom -> bool"
    );
    let bad = c.errors.iter().find(|e| e.pred.name == "t").unwrap();
    assert_eq!(bad.error.kind(), "call_arg_not_subtype");
}

#[test]
fn sums_are_not_unified_across_domains() {
    let src = "p(X) :- X = 1 ; X = a.\nr(X, Y) :- p(X), p(Y), X = Y.";
    let (_, _, c) = checked(src);
    let e = c.errors.iter().find(|e| e.pred.name == "r").unwrap();
    assert_eq!(e.error.kind(), "unify_across_domains");
}

#[test]
fn mutual_recursion_is_reported() {
    let (_, _, c) = checked("even(X) :- X = 0 ; odd(X).\nodd(X) :- even(X).");
    assert_eq!(c.errors.len(), 2);
    assert!(c
        .errors
        .iter()
        .all(|e| e.error.kind() == "cyclic_call_graph"));
}

#[test]
fn polymorphic_recursion_is_rejected() {
    let src = ":- type list(A) = [] + [A|list(A)].\np(X) :- X = 1 ; X = [Y], p(Y).";
    let (_, _, c) = checked(src);
    assert!(!c.is_ok());
}

#[test]
fn annotations_are_checked_not_trusted() {
    let p = normalize(&parse_program("p(X) :- X = 1 ; X = a.").unwrap()).unwrap();
    let t = TypeDeclTable::empty();
    let int = SimpleType::base("int");
    let good = vec![
        Context::new().with("X", int.clone()),
        Context::new().with("X", SimpleType::base("atom")),
    ];
    let bad = vec![Context::new().with("X", int.clone()); 2];
    let id = PredId::new("p", 1);
    let ok = check_program(&p, &t, Some(&[(id.clone(), good)].into_iter().collect()));
    assert!(ok.is_ok(), "{:?}", ok.errors);
    let ko = check_program(&p, &t, Some(&[(id, bad)].into_iter().collect()));
    assert_eq!(ko.errors[0].error.kind(), "unify_type_mismatch");
}

#[test]
fn terms_and_goals() {
    let t =
        TypeDeclTable::from_program(&parse_program(":- type list(A) = [] + [A|list(A)].").unwrap())
            .unwrap();
    let g = Context::new().with("X", SimpleType::base("int"));
    assert_eq!(
        check_term(&g, &Term::var("X"), &t).unwrap(),
        SimpleType::base("int")
    );
    let nil = check_term(&Context::new(), &Term::constant("[]"), &t).unwrap();
    assert_eq!(t.show(&nil), "list(A)");
    let one = check_term(&Context::new(), &parse_term("[1]").unwrap(), &t).unwrap();
    assert_eq!(t.show(&one), "list(int)");
    assert!(matches!(
        check_term(&Context::new(), &Term::var("Y"), &t),
        Err(TypeError::UnboundVariable(_))
    ));
    let unify = |r: &str| Goal::Unify(Term::var("X"), Term::constant(r));
    assert!(check_goal(&g, &unify("1"), &Schemes::new(), &t).is_ok());
    assert_eq!(
        check_goal(&g, &unify("a"), &Schemes::new(), &t)
            .unwrap_err()
            .kind(),
        "unify_type_mismatch"
    );
}

#[test]
fn reconstruction_of_single_branches() {
    let t = TypeDeclTable::empty();
    let s = Schemes::new();
    let b = parse_program("p :- X = 1, Y = Y.").unwrap().clauses[0].body[0].clone();
    let ctx = reconstruct_branch_context(&b, &[], &s, &t).unwrap();
    assert_eq!(ctx.get("X"), Some(&SimpleType::base("int")));
    assert!(matches!(ctx.get("Y"), Some(SimpleType::Var(_))));
    let bad = parse_program("p :- X = 1, X = a.").unwrap().clauses[0].body[0].clone();
    assert!(matches!(
        reconstruct_branch_context(&bad, &[], &s, &t),
        Err(TypeError::UnsatisfiableConstraints { .. })
    ));
}

#[test]
fn validator_rejects_tampered_trees() {
    let (_, t, c) = checked("p(X) :- X = 1 ; X = a.");
    let mut d = c.checked[&PredId::new("p", 1)].derivation.clone();
    d.context.insert("X", SimpleType::base("int"));
    assert!(validate_derivation(&d, &t, &c.schemes()).is_err());
    let mut d = c.checked[&PredId::new("p", 1)].derivation.clone();
    d.premises[0].premises[0].premises[1].ty = Some(SimpleType::base("atom"));
    assert!(validate_derivation(&d, &t, &c.schemes()).is_err());
}

#[test]
fn derivations_render() {
    let (_, t, c) = checked("p(X) :- X = 1 ; X = a.");
    let text = c.checked[&PredId::new("p", 1)].derivation.render(&t);
    assert!(text.starts_with("CLS {X: int + atom} |- p(X) :- ... : bool"));
    assert!(text.contains("UNF {X: int} |- X = 1 : bool"));
    assert_eq!(
        TypeError::UnboundVariable("X".into()).to_string(),
        "variable `X` has no type in the context"
    );
}
