use super::*;
use crate::ast::parse_program;
use crate::normalize::normalize;
use crate::typeck::check_program;
use alloc::format;
use alloc::vec;

fn prog(src: &str) -> (Program, TypeDeclTable) {
    let p = normalize(&parse_program(src).unwrap()).unwrap();
    let t = TypeDeclTable::from_program(&p).unwrap();
    (p, t)
}

fn interp(src: &str, depth: usize) -> (Program, TypeDeclTable, Interpretation, FixpointTrace) {
    let (p, t) = prog(src);
    let c = check_program(&p, &t, None);
    let (i, trace) =
        build_interpretation_traced(&p, &t, Some(&c), &UniverseConfig::with_depth(depth)).unwrap();
    (p, t, i, trace)
}

fn truth(i: &Interpretation, name: &str, args: &[&str]) -> Option<bool> {
    let id = PredId::new(name, args.len());
    let vals: Vec<Value> = args
        .iter()
        .map(|a| crate::semantics::eval_term(&crate::ast::parse_term(a).unwrap(), i, &State::new()))
        .collect();
    match i.predicate(&id)?.table()?.get(&vals)? {
        Value::Bool(b) => Some(*b),
        _ => None,
    }
}

const ADD: &str = ":- type nat = 0 + s(nat).\nadd(0, X, X).\nadd(s(X), Y, s(Z)) :- add(X, Y, Z).";
const APPEND: &str = ":- type list(A) = [] + [A|list(A)].\nappend([], L, L).\nappend([H|T], L, [H|R]) :- append(T, L, R).";

#[test]
fn two_branch_table() {
    let (_, _, i, _) = interp("p(X) :- X = 1 ; X = a.", 3);
    assert_eq!(truth(&i, "p", &["1"]), Some(true));
    assert_eq!(truth(&i, "p", &["a"]), Some(true));
}

#[test]
fn add_fixpoint_is_monotone_and_contains_zero_rows() {
    let (_, _, i, trace) = interp(ADD, 3);
    let id = PredId::new("add", 3);
    for w in trace.windows(2) {
        assert!(w[0][&id].is_subset(&w[1][&id]));
    }
    for x in ["0", "s(0)", "s(s(0))", "s(s(s(0)))"] {
        assert_eq!(
            truth(&i, "add", &["0", x, x]),
            Some(true),
            "add(0, {x}, {x})"
        );
    }
    assert_eq!(truth(&i, "add", &["s(0)", "s(0)", "s(s(0))"]), Some(true));
    assert_eq!(truth(&i, "add", &["s(0)", "s(0)", "s(0)"]), Some(false));
}

#[test]
fn solver_agrees_with_brute_force() {
    for (src, depth) in [
        (ADD, 3),
        (APPEND, 1),
        (
            "p(X) :- X = 1 ; X = a.\nr(X, Y) :- p(X), Y = X ; X = a, p(Y).",
            2,
        ),
        (
            ":- type nat = z + s(nat).\nq(X, Y) :- X = s(Y), Y = s(Z), Z = z.",
            3,
        ),
    ] {
        let (p, _, i, _) = interp(src, depth);
        for c in &p.clauses {
            assert_eq!(
                clause_true_tuples(c, &i),
                clause_true_tuples_brute(c, &i),
                "{src}"
            );
        }
    }
}

#[test]
fn examples_are_semantically_typed() {
    for src in [
        ADD,
        APPEND,
        ":- type dummy(A) = 1 + [] + [A|dummy(A)].\nappend([], L, L).\nappend([H|T], L, [H|R]) :- append(T, L, R).",
        "p(X) :- X = 1 ; X = a.\ns(Y) :- p(Y).",
    ] {
        let (p, t) = prog(src);
        let r = verify_soundness(&p, &t, &UniverseConfig::with_depth(2)).unwrap();
        assert!(r.is_sound(), "{src}: {r:?}");
        assert!(r.states_checked() > 0);
    }
}

#[test]
fn recursion_past_the_depth_bound_is_truncation() {
    let (p, t) = prog(ADD);
    let r = verify_soundness(&p, &t, &UniverseConfig::with_depth(2)).unwrap();
    let add = &r.predicates[0].report;
    assert_eq!(add.status, Status::Truncated);
    assert!(add.truncation_count > 0);
    assert_eq!(add.wrong_count, 0);
}

#[test]
fn ill_typed_programs_are_refused_and_go_wrong_untyped() {
    let (p, t) = prog("q(X) :- X = 1, X = a.");
    assert!(matches!(
        verify_soundness(&p, &t, &UniverseConfig::default()),
        Err(SoundnessError::IllTyped(_))
    ));
    let r = evaluate_untyped(&p, &t, &UniverseConfig::default()).unwrap();
    assert!(r.wrong_count > 0);
    let cx = r.counterexample.unwrap();
    assert_eq!(cx.branch, 1);
}

#[test]
fn the_wrong_split_is_detected_and_a_better_one_found() {
    let (p, t, i, _) = interp("p(X) :- X = 1 ; X = a.", 1);
    let c = &p.clauses[0];
    let gamma = Context::new().with(
        "X",
        SimpleType::sum(vec![SimpleType::base("int"), SimpleType::base("atom")]),
    );
    // Both branches at the full sum: `X = 1` meets atoms.
    let bad = vec![gamma.clone(), gamma.clone()];
    let r = semantic_typing_check(&gamma, Judgement::Clause(c, &[bad]), &i, 1000).unwrap();
    assert_eq!(r.status, Status::Ok);
    assert!(r.splits_tried > 1);
    let w = r.witness_split.unwrap();
    assert_eq!(w[0].get("X"), Some(&SimpleType::base("int")));
    let _ = t;
}

#[test]
fn terms_and_goals() {
    let (_, t, i, _) = interp(APPEND, 1);
    let list = t
        .resolve(&crate::ast::parse_type_expr("list(A)").unwrap())
        .unwrap();
    let g = Context::new()
        .with("H", SimpleType::var("A"))
        .with("T", list.clone());
    let term = crate::ast::parse_term("[H|T]").unwrap();
    let ok = semantic_typing_check(&g, Judgement::Term(&term, &list), &i, 100_000).unwrap();
    assert_ne!(ok.status, Status::Violation);
    let ko = semantic_typing_check(
        &g,
        Judgement::Term(&term, &SimpleType::constant("[]")),
        &i,
        100_000,
    )
    .unwrap();
    assert_eq!(ko.status, Status::Violation);
    let goal = Goal::Unify(Term::var("H"), Term::constant("1"));
    let g2 = Context::new().with("H", SimpleType::base("atom"));
    let (_, _, i2, _) = interp("p(X) :- X = 1 ; X = a.", 1);
    let r = semantic_typing_check(&g2, Judgement::Goal(&goal), &i2, 1000).unwrap();
    assert_eq!(r.status, Status::Violation);
    assert_eq!(
        r.counterexample
            .unwrap()
            .state
            .get("H")
            .unwrap()
            .to_string(),
        "a"
    );
    let fine = Context::new().with("H", SimpleType::base("int"));
    let r = semantic_typing_check(&fine, Judgement::Goal(&goal), &i2, 1000).unwrap();
    assert_eq!((r.status, r.states_checked), (Status::Ok, 1));
}

#[test]
fn empty_assumptions_hold_vacuously() {
    let (p, _, i, _) = interp(":- type nat = z + s(nat).\nr(X, Y) :- X = z, Y = 1.", 1);
    // `s` only builds naturals, so `s(int)` denotes nothing.
    let nothing = SimpleType::app("s", vec![SimpleType::base("int")]);
    assert!(tsem(&nothing, &i, &TypeEnv::new()).unwrap().is_empty());
    let g = Context::new()
        .with("X", nothing)
        .with("Y", SimpleType::base("int"));
    let c = &p.clauses[0];
    let r = semantic_typing_check(&g, Judgement::Clause(c, &[vec![g.clone()]]), &i, 1000);
    let r = r.unwrap();
    assert_eq!((r.status, r.states_checked), (Status::Ok, 0));
}

#[test]
fn wrong_has_no_type() {
    let (_, _, i, _) = interp("p(X) :- X = 1 ; X = a.", 1);
    let int = SimpleType::base("int");
    let one = i.constant("1").unwrap().clone();
    let a = i.constant("a").unwrap().clone();
    assert!(value_has_type(&one, &int, &i, &TypeEnv::new()).unwrap());
    assert!(!value_has_type(&a, &int, &i, &TypeEnv::new()).unwrap());
    assert!(!value_has_type(&Value::Wrong, &SimpleType::var("A"), &i, &TypeEnv::new()).unwrap());
    let g = Context::new().with("X", int);
    assert!(context_holds(&g, &i, &TypeEnv::new(), &State::new().with("X", one)).unwrap());
    assert!(!context_holds(&g, &i, &TypeEnv::new(), &State::new().with("X", a.clone())).unwrap());
    assert!(context_holds(
        &Context::new(),
        &i,
        &TypeEnv::new(),
        &State::new().with("X", a)
    )
    .unwrap());
}

#[test]
fn constants_denote_their_types() {
    let (p, t, i, _) = interp(APPEND, 2);
    let cs = constant_typing_check(&p, &t, &i).unwrap();
    assert!(cs.iter().any(|(c, _)| c == "[]"));
    assert!(cs.iter().all(|(_, ok)| *ok));
}

#[test]
fn generator_is_deterministic_and_normal() {
    let size = SizeParams::default();
    assert_eq!(generate_program(7, &size), generate_program(7, &size));
    assert!(generate_program(3, &SizeParams::zero()).is_empty());
    for seed in 0..50 {
        let p = generate_program(seed, &size);
        assert!(crate::normalize::is_normal(&p), "seed {seed}");
    }
}

#[test]
fn generated_well_typed_programs_do_not_go_wrong() {
    let size = SizeParams::default();
    let (mut accepted, mut rejected) = (0, 0);
    for seed in 0..200 {
        let (p, ok) = generate_labeled(seed, &size);
        let t = TypeDeclTable::from_program(&p).unwrap();
        if !ok {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let cfg = fit_universe(&p, &t);
        let r = verify_soundness(&p, &t, &cfg).unwrap();
        assert!(
            r.is_sound(),
            "seed {seed}\n{}\n{r:?}",
            crate::ast::pretty(&p)
        );
        assert!(
            r.universe_size <= generate::MAX_GENERATED_VALUES + 2,
            "seed {seed}"
        );
    }
    assert!(accepted >= 60, "{accepted} accepted");
    assert!(rejected >= 20, "{rejected} rejected");
    let _ = format!("{accepted}");
}

#[test]
fn seed_zero_matches_the_golden_file() {
    let golden = include_str!("../../fixtures/seed0.pl");
    let p = generate_program(0, &SizeParams::default());
    assert_eq!(crate::ast::pretty(&p), golden);
}

#[test]
fn most_generated_programs_are_well_typed() {
    let size = SizeParams::default();
    let ok = (0..1000)
        .filter(|&seed| generate_labeled(seed, &size).1)
        .count();
    assert!(ok >= 300, "{ok} of 1000 well-typed");
}
