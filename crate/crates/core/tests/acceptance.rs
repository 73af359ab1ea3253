//! Acceptance suite. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trilog_core::ast::{parse_program, parse_type_expr, GoalSeq, Program, Term};
use trilog_core::normalize::{alpha_equivalent, is_normal, normalize};
use trilog_core::semantics::{
    enumerate_states, ArgDomains, Evaluator, Interpretation, TruthValue, Universe, UniverseBuilder,
    Value,
};
use trilog_core::soundness::{
    build_interpretation, constant_typing_check, evaluate_untyped, fit_universe, generate_labeled,
    interpret_over, verify_soundness, SizeParams, UniverseConfig,
};
use trilog_core::subtyping::{check_subtype_soundness, is_pred_subtype, is_subtype};
use trilog_core::typeck::{check_program, check_query, Rule};
use trilog_core::types::{
    alpha_eq, tsem, tsem_iterates, PredicateType, SimpleType, TypeDeclTable, TypeEnv,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn load(src: &str) -> (Program, TypeDeclTable) {
    let p = normalize(&parse_program(src).unwrap()).unwrap();
    let t = TypeDeclTable::from_program(&p).unwrap();
    (p, t)
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap()
}

/// Evaluates every body sequence and the clause itself over all states.
/// Returns (true, false, wrong) counts.
fn eval_everywhere(p: &Program, u: Universe) -> Result<[usize; 3], String> {
    let (i, _) = interpret_over(p, u, None, 1_000_000).map_err(|e| e.to_string())?;
    let ev = Evaluator::new(&i);
    let mut counts = [0; 3];
    let mut tally = |v: TruthValue| match v {
        TruthValue::True => counts[0] += 1,
        TruthValue::False => counts[1] += 1,
        TruthValue::Wrong => counts[2] += 1,
    };
    for c in &p.clauses {
        let vars: Vec<String> = c.vars().into_iter().collect();
        for s in enumerate_states(&vars, i.universe.domains(), 1_000_000).unwrap() {
            for seq in &c.body {
                tally(ev.seq(seq, &s));
            }
            let ss = vec![s.clone(); c.body.len()];
            tally(ev.clause(c, &ss).map_err(|e| e.to_string())?);
        }
    }
    Ok(counts)
}

fn truth_tables() -> Check {
    use TruthValue::{False as F, True as T, Wrong as W};
    let start = Instant::now();
    let vals = [T, F, W];
    let and = [[T, F, W], [F, F, W], [W, W, W]];
    let or = [[T, T, W], [T, F, W], [W, W, W]];
    let not = [F, T, W];
    // not(a) or b, written out.
    let implies = [[T, F, W], [T, T, W], [W, W, W]];
    let mut n = 0;
    for (x, &a) in vals.iter().enumerate() {
        ensure(a.not() == not[x], || format!("not {a}"))?;
        n += 1;
        for (y, &b) in vals.iter().enumerate() {
            ensure(a.and(b) == and[x][y], || format!("{a} and {b}"))?;
            ensure(a.or(b) == or[x][y], || format!("{a} or {b}"))?;
            ensure(a.implies(b) == implies[x][y], || format!("{a} implies {b}"))?;
            n += 3;
        }
    }
    within(start, Duration::from_millis(1))?;
    Ok(format!("{n} entries"))
}

fn example_1() -> Check {
    let start = Instant::now();
    let (p, _) = load(&fixture("ex1.pl"));
    let one = UniverseBuilder::new(0)
        .basic("int", Some("int"), &["1", "2"])
        .build()
        .unwrap();
    let [t, f, w] = eval_everywhere(&p, one)?;
    ensure(w == 0 && t + f > 0, || {
        format!("shared int domain: {t}/{f}/{w}")
    })?;
    let split = UniverseBuilder::new(0)
        .basic("d1", Some("int"), &["1"])
        .basic("d2", None, &["2"])
        .build()
        .unwrap();
    let [t2, f2, w2] = eval_everywhere(&p, split)?;
    ensure(t2 == 0 && f2 == 0 && w2 > 0, || {
        format!("singleton domains: {t2}/{f2}/{w2}")
    })?;
    within(start, Duration::from_secs(1))?;
    Ok(format!(
        "one domain: {} evaluations, 0 wrong; singletons: {w2} of {w2} wrong",
        t + f
    ))
}

fn example_2() -> Check {
    let start = Instant::now();
    let (p, _) = load(&fixture("ex2.pl"));
    let typed = UniverseBuilder::new(0)
        .basic("int", Some("int"), &["1"])
        .basic("atom", Some("atom"), &["a"])
        .build()
        .unwrap();
    let [t, f, w] = eval_everywhere(&p, typed)?;
    ensure(t == 0 && f == 0 && w > 0, || {
        format!("int/atom: {t}/{f}/{w}")
    })?;
    let herbrand = UniverseBuilder::new(0)
        .basic("herbrand", None, &["1", "a"])
        .build()
        .unwrap();
    let [t2, f2, w2] = eval_everywhere(&p, herbrand)?;
    ensure(w2 == 0 && t2 + f2 > 0, || {
        format!("herbrand: {t2}/{f2}/{w2}")
    })?;
    within(start, Duration::from_secs(1))?;
    Ok(format!(
        "int/atom: {w} of {w} wrong; herbrand: 0 of {} wrong",
        t2 + f2
    ))
}

fn normalization_golden() -> Check {
    let start = Instant::now();
    let (p, _) = load(&fixture("add.pl"));
    let expected = parse_program(
        ":- type nat = 0 + s(nat).
         add(X1, X2, X3) :- ( X1 = 0, X2 = X, X3 = X )
                          ; ( X1 = s(X0), X2 = Y, X3 = s(Z), X4 = X0, X5 = Y, X6 = Z, add(X4, X5, X6) ).",
    )
    .unwrap();
    ensure(is_normal(&p), || "normalized add is not normal".into())?;
    ensure(is_normal(&expected), || {
        "expected form is not normal".into()
    })?;
    ensure(alpha_equivalent(&p, &expected), || {
        format!("got\n{}", trilog_core::ast::pretty(&p))
    })?;
    // A swapped equation is a different program.
    let swapped = parse_program(
        "add(X1, X2, X3) :- ( X1 = 0, X2 = X, X3 = X )
                          ; ( X1 = s(X0), X2 = Y, X3 = s(Z), X4 = X0, X5 = Z, X6 = Y, add(X4, X5, X6) ).",
    )
    .unwrap();
    ensure(!alpha_equivalent(&p, &swapped), || {
        "alpha check is too loose".into()
    })?;
    within(start, Duration::from_secs(1))?;
    Ok("add/3 matches up to renaming".into())
}

/// Independent membership test for integer lists.
fn is_int_list(v: &Value, int: &BTreeSet<Value>) -> bool {
    match v {
        Value::Tree { ctor, children, .. } if &**ctor == "[]" => children.is_empty(),
        Value::Tree { ctor, children, .. } if &**ctor == "[|]" => {
            children.len() == 2 && int.contains(&children[0]) && is_int_list(&children[1], int)
        }
        _ => false,
    }
}

fn list_fixpoint() -> Check {
    let start = Instant::now();
    let u = UniverseBuilder::new(2)
        .basic("int", Some("int"), &["1", "2"])
        .tree(
            "list",
            vec![
                ("[]".into(), vec![]),
                (
                    "[|]".into(),
                    vec![ArgDomains::Any, ArgDomains::Named(vec!["list".into()])],
                ),
            ],
        )
        .build()
        .unwrap();
    let i = Interpretation::with_free_constructors(u);
    let ty = SimpleType::mu(
        "a",
        SimpleType::sum(vec![
            SimpleType::constant("[]"),
            SimpleType::app("[|]", vec![SimpleType::base("int"), SimpleType::var("a")]),
        ]),
    );
    let decl =
        TypeDeclTable::from_program(&parse_program(":- type list(A) = [] + [A|list(A)].").unwrap())
            .unwrap();
    let resolved = decl
        .resolve(&parse_type_expr("list(int)").unwrap())
        .unwrap();
    ensure(alpha_eq(&resolved, &ty), || {
        format!("list(int) resolves to {resolved}")
    })?;

    let env = TypeEnv::new();
    let meaning = tsem(&ty, &i, &env).map_err(|e| e.to_string())?;
    let ints: BTreeSet<Value> = i
        .universe
        .domain_by_name("int")
        .unwrap()
        .members
        .iter()
        .cloned()
        .collect();
    let oracle: BTreeSet<Value> = i
        .universe
        .values()
        .filter(|v| is_int_list(v, &ints))
        .cloned()
        .collect();
    let expected_count: usize = (0..=2).map(|n| ints.len().pow(n)).sum();
    ensure(meaning.len() == 7 && expected_count == 7, || {
        format!("{} members", meaning.len())
    })?;
    ensure(meaning == oracle, || {
        "fixpoint differs from the closure oracle".into()
    })?;

    let its = tsem_iterates(&ty, 4, &i, &env).map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = its.iter().map(BTreeSet::len).collect();
    ensure(its[0].is_empty(), || "F^0 is not empty".into())?;
    ensure(
        its[1].len() < its[2].len()
            && its[2].len() < its[3].len()
            && its[1].is_subset(&its[2])
            && its[2].is_subset(&its[3]),
        || format!("iterates not strictly increasing: {sizes:?}"),
    )?;
    ensure(its[3] == meaning && its[4] == its[3], || {
        format!("no fixpoint at F^3: {sizes:?}")
    })?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("7 members, iterate sizes {sizes:?}"))
}

fn typing_regression() -> Check {
    let (p, t) = load(&fixture("p_int_atom.pl"));
    let c = check_program(&p, &t, None);
    ensure(c.is_ok(), || format!("{:?}", c.errors))?;
    let pc = c.checked.values().next().unwrap();
    let shown = t.show_pred(&pc.scheme.body);
    ensure(shown == "int + atom -> bool", || shown.clone())?;
    let rules = pc.derivation.rules();
    for r in [Rule::Var, Rule::Cst, Rule::Unf, Rule::Cls] {
        ensure(rules.contains(&r), || format!("derivation lacks {r}"))?;
    }
    ensure(pc.derivation.rule == Rule::Cls, || {
        format!("root is {}", pc.derivation.rule)
    })?;
    Ok(format!(
        "p : {shown}, {} derivation nodes",
        pc.derivation.nodes().len()
    ))
}

fn append_query() -> GoalSeq {
    vec![trilog_core::ast::Goal::Call(
        "append".into(),
        vec![
            Term::constant("[]"),
            Term::constant("1"),
            Term::constant("1"),
        ],
    )]
}

fn append_declarations() -> Check {
    let (p, t) = load(&fixture("append.pl"));
    let c = check_program(&p, &t, None);
    let pc = c.checked.values().next().ok_or("append rejected")?;
    let shown = t.show_pred(&pc.scheme.body);
    ensure(shown == "list(A) * list(A) * list(A) -> bool", || {
        shown.clone()
    })?;
    let err = check_query(&append_query(), &c.schemes(), &t);
    ensure(err.is_err(), || {
        "append([], 1, 1) accepted with lists".into()
    })?;

    let (p2, t2) = load(&fixture("append_dummy.pl"));
    let c2 = check_program(&p2, &t2, None);
    let pc2 = c2
        .checked
        .values()
        .next()
        .ok_or("append rejected with dummy")?;
    let shown2 = t2.show_pred(&pc2.scheme.body);
    ensure(shown2 == "dummy(A) * dummy(A) * dummy(A) -> bool", || {
        shown2.clone()
    })?;
    check_query(&append_query(), &c2.schemes(), &t2).map_err(|e| format!("dummy query: {e}"))?;
    Ok("list: query rejected; dummy: query accepted".into())
}

struct TypeGen {
    rng: ChaCha8Rng,
    list_int: SimpleType,
}

impl TypeGen {
    fn leaf(&mut self) -> SimpleType {
        let leaves = [
            SimpleType::base("int"),
            SimpleType::base("atom"),
            SimpleType::constant("1"),
            SimpleType::constant("2"),
            SimpleType::constant("a"),
            SimpleType::constant("[]"),
            self.list_int.clone(),
        ];
        leaves.choose(&mut self.rng).unwrap().clone()
    }

    fn ty(&mut self, depth: usize) -> SimpleType {
        match if depth == 0 {
            0
        } else {
            self.rng.gen_range(0..4)
        } {
            0 | 1 => self.leaf(),
            2 => {
                let n = self.rng.gen_range(2..=3);
                SimpleType::sum((0..n).map(|_| self.ty(depth - 1)).collect())
            }
            _ => {
                let head = self.ty(depth - 1);
                SimpleType::app("[|]", vec![head, self.list_int.clone()])
            }
        }
    }
}

fn subtyping_suite() -> Check {
    let start = Instant::now();
    let int = SimpleType::base("int");
    let atom = SimpleType::base("atom");
    let int_atom = SimpleType::sum(vec![int.clone(), atom.clone()]);
    ensure(is_subtype(&int, &int_atom), || "int <= int + atom".into())?;
    ensure(!is_subtype(&int_atom, &int), || "int + atom <= int".into())?;
    let wide = PredicateType::new(vec![int_atom.clone()]);
    let narrow = PredicateType::new(vec![int.clone()]);
    ensure(is_pred_subtype(&wide, &narrow), || {
        "(int + atom) -> bool <= int -> bool".into()
    })?;
    ensure(!is_pred_subtype(&narrow, &wide), || {
        "int -> bool <= (int + atom) -> bool".into()
    })?;

    let decl =
        TypeDeclTable::from_program(&parse_program(":- type list(A) = [] + [A|list(A)].").unwrap())
            .unwrap();
    let list_int = decl
        .resolve(&parse_type_expr("list(int)").unwrap())
        .unwrap();
    let u = UniverseBuilder::new(1)
        .basic("int", Some("int"), &["1", "2"])
        .basic("atom", Some("atom"), &["a"])
        .tree(
            "list",
            vec![
                ("[]".into(), vec![]),
                (
                    "[|]".into(),
                    vec![
                        ArgDomains::Named(vec!["int".into()]),
                        ArgDomains::Named(vec!["list".into()]),
                    ],
                ),
            ],
        )
        .build()
        .unwrap();
    ensure(u.value_count() == 6, || {
        format!("universe has {} values", u.value_count())
    })?;
    let i = Interpretation::with_free_constructors(u);

    let mut g = TypeGen {
        rng: ChaCha8Rng::seed_from_u64(2024),
        list_int,
    };
    for k in 0..100 {
        let t = g.ty(3);
        ensure(is_subtype(&t, &t), || format!("reflexivity #{k}: {t}"))?;
    }
    let (mut pairs, mut tries, mut values) = (0, 0, 0);
    while pairs < 100 {
        tries += 1;
        ensure(tries < 100_000, || {
            format!("only {pairs} derivable pairs found")
        })?;
        let a = g.ty(2);
        let b = if g.rng.gen_bool(0.5) {
            let other = g.ty(2);
            SimpleType::sum(vec![a.clone(), other])
        } else {
            g.ty(2)
        };
        let r = check_subtype_soundness(&a, &b, &i).map_err(|e| e.to_string())?;
        if !r.derivable {
            continue;
        }
        pairs += 1;
        values += r.checked;
        ensure(r.sound, || {
            format!("{a} <= {b} but {:?} is missing", r.counterexample)
        })?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "100 reflexive types, {pairs} pairs ({values} member checks) sound"
    ))
}

fn generated_soundness() -> Check {
    let start = Instant::now();
    let size = SizeParams::default();
    let (mut accepted, mut truncated, mut states, mut largest) = (0, 0, 0u64, 0);
    for seed in 0..200 {
        let (p, ok) = generate_labeled(seed, &size);
        if !ok {
            continue;
        }
        accepted += 1;
        let t = TypeDeclTable::from_program(&p).unwrap();
        let cfg = fit_universe(&p, &t);
        ensure(cfg.depth <= 3, || {
            format!("seed {seed}: depth {}", cfg.depth)
        })?;
        ensure(p.pred_ids().iter().all(|id| id.arity <= 3), || {
            format!("seed {seed}: arity")
        })?;
        let r = verify_soundness(&p, &t, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        largest = largest.max(r.universe_size);
        ensure(r.universe_size <= 6, || {
            format!("seed {seed}: {} values", r.universe_size)
        })?;
        for pr in &r.predicates {
            ensure(pr.report.wrong_count == 0, || {
                format!(
                    "seed {seed}: {} went wrong: {:?}",
                    pr.predicate, pr.report.counterexample
                )
            })?;
        }
        ensure(r.is_sound(), || format!("seed {seed}: constants"))?;
        states += r.states_checked();
        truncated += r
            .predicates
            .iter()
            .filter(|pr| pr.report.truncation_count > 0)
            .count();
    }
    ensure(accepted > 0, || "no accepted programs".into())?;
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{accepted} well-typed programs, {states} states, 0 wrong ({truncated} predicates with truncation), universes <= {largest} values"
    ))
}

fn negative_control() -> Check {
    let start = Instant::now();
    let size = SizeParams::default();
    let (mut rejected, mut wrong) = (0, 0);
    for seed in 0..200 {
        let (p, ok) = generate_labeled(seed, &size);
        if ok {
            continue;
        }
        rejected += 1;
        let t = TypeDeclTable::from_program(&p).unwrap();
        let r = evaluate_untyped(&p, &t, &fit_universe(&p, &t))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        if r.wrong_count > 0 {
            wrong += 1;
        }
    }
    ensure(rejected >= 20, || {
        format!("only {rejected} rejected programs")
    })?;
    ensure(2 * wrong >= rejected, || {
        format!("{wrong} of {rejected} show wrong")
    })?;
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "{wrong} of {rejected} rejected programs reach wrong"
    ))
}

fn constants_denote() -> Check {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pl"))
        .collect();
    files.sort();
    let mut total = 0;
    for f in &files {
        let name = f.file_name().unwrap().to_string_lossy().into_owned();
        let (p, t) = load(&std::fs::read_to_string(f).unwrap());
        let c = check_program(&p, &t, None);
        let check = c.is_ok().then_some(&c);
        let mut cfg = UniverseConfig::with_depth(2);
        cfg.max_states = 1_000_000;
        let i = build_interpretation(&p, &t, check, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let cs = constant_typing_check(&p, &t, &i).map_err(|e| format!("{name}: {e}"))?;
        for (k, ok) in &cs {
            ensure(*ok, || format!("{name}: constant {k} outside its type"))?;
        }
        total += cs.len();
    }
    Ok(format!("{total} constants across {} fixtures", files.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 11] = [
        ("truth tables", truth_tables),
        ("one int domain never goes wrong", example_1),
        ("int/atom clash always goes wrong", example_2),
        ("normal form of add", normalization_golden),
        ("list type fixpoint", list_fixpoint),
        ("typing of p", typing_regression),
        ("append under two declarations", append_declarations),
        ("subtyping", subtyping_suite),
        ("generated programs do not go wrong", generated_soundness),
        ("rejected programs go wrong", negative_control),
        ("constants denote their types", constants_denote),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
