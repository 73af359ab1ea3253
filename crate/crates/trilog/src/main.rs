use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value as Json};
use trilog_core::ast::{
    parse_pred_type_expr, parse_program, parse_type_expr, pretty, PredId, Program,
};
use trilog_core::normalize::{is_normal, normalize};
use trilog_core::semantics::{
    enumerate_states, Evaluator, Interpretation, SemanticsError, State, TruthValue,
    DEFAULT_MAX_STATES,
};
use trilog_core::soundness::{
    evaluate_untyped, fit_universe, generate_program, verify_soundness, Counterexample, SizeParams,
    SoundnessError, TypingReport,
};
use trilog_core::subtyping::{explain_pred_subtype, explain_subtype, SubtypeTrace};
use trilog_core::typeck::{check_program, Context, ProgramCheck};
use trilog_core::types::{PredicateType, TypeDeclTable};

mod universe;

use universe::{InterpretError, UniverseFile};

#[derive(Parser)]
#[command(
    name = "trilog",
    version,
    about = "Types and three-valued semantics for logic programs"
)]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a program and print it back.
    Parse { file: PathBuf },
    /// Rewrite a program into one clause per predicate.
    Normalize { file: PathBuf },
    /// Type check every predicate.
    Check {
        file: PathBuf,
        /// Print each predicate's derivation tree.
        #[arg(long)]
        derivation: bool,
    },
    /// Decide a subtyping between two types or two predicate types.
    Subtype {
        left: String,
        right: String,
        /// Program whose type declarations the types may use.
        #[arg(long)]
        decls: Option<PathBuf>,
    },
    /// Evaluate clauses or a goal over every state of a finite universe.
    Eval {
        file: PathBuf,
        /// A goal sequence such as `X = 1, p(X)`; clauses are evaluated otherwise.
        #[arg(long)]
        goal: Option<String>,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Print the value of every state.
        #[arg(long)]
        states: bool,
    },
    /// Check that a well-typed program never evaluates to `wrong`.
    Verify {
        /// Program to verify; a generated one is used when omitted.
        file: Option<PathBuf>,
        /// Seed of the generated program.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Evaluate every goal over all values, ignoring types.
        #[arg(long)]
        untyped: bool,
    },
    /// Print the truth tables of the connectives.
    Tables,
}

#[derive(clap::Args)]
struct UniverseArgs {
    /// Universe description (JSON).
    #[arg(long)]
    universe: Option<PathBuf>,
    /// Depth bound of tree domains.
    #[arg(long)]
    depth: Option<usize>,
    /// Enumeration cap; defaults to TRILOG_MAX_STATES or 1000000.
    #[arg(long)]
    max_states: Option<u64>,
}

enum Failure {
    /// Bad input, unreadable files, malformed syntax.
    Usage(String),
    /// The input is fine but the answer is negative.
    Domain,
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let result = match cli.cmd {
        Cmd::Parse { file } => cmd_parse(&file, json),
        Cmd::Normalize { file } => cmd_normalize(&file, json),
        Cmd::Check { file, derivation } => cmd_check(&file, derivation, json),
        Cmd::Subtype { left, right, decls } => cmd_subtype(&left, &right, decls.as_deref(), json),
        Cmd::Eval {
            file,
            goal,
            universe,
            states,
        } => cmd_eval(&file, goal.as_deref(), &universe, states, json),
        Cmd::Verify {
            file,
            seed,
            universe,
            untyped,
        } => cmd_verify(file.as_deref(), seed, &universe, untyped, json),
        Cmd::Tables => cmd_tables(json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            if json {
                println!("{}", json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
    }
}

fn emit(v: Json) {
    println!("{}", serde_json::to_string_pretty(&v).unwrap_or_default());
}

fn read_program(path: &Path) -> Result<Program, Failure> {
    let src = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_program(&src).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(Program, TypeDeclTable), Failure> {
    let raw = read_program(path)?;
    let p = normalize(&raw).map_err(usage)?;
    let t = TypeDeclTable::from_program(&p).map_err(usage)?;
    Ok((p, t))
}

fn cmd_parse(file: &Path, json: bool) -> Outcome {
    let p = read_program(file)?;
    if json {
        emit(json!({
            "type_decls": p.type_decls.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "clauses": p.clauses.iter().map(|c| json!({
                "predicate": c.pred().to_string(),
                "text": c.to_string(),
                "line": c.span.line,
            })).collect::<Vec<_>>(),
        }));
    } else {
        print!("{}", pretty(&p));
    }
    Ok(())
}

fn cmd_normalize(file: &Path, json: bool) -> Outcome {
    let p = normalize(&read_program(file)?).map_err(usage)?;
    if json {
        emit(json!({ "normal": is_normal(&p), "program": pretty(&p) }));
    } else {
        print!("{}", pretty(&p));
    }
    Ok(())
}

/// Predicate names, with arities only where a name is overloaded.
fn label(id: &PredId, all: &[PredId]) -> String {
    if all.iter().filter(|o| o.name == id.name).count() > 1 {
        id.to_string()
    } else {
        id.name.clone()
    }
}

fn diagnostics(c: &ProgramCheck, t: &TypeDeclTable) -> Vec<Json> {
    c.errors
        .iter()
        .map(|e| {
            let (expected, found) = match e.error.expected_found() {
                Some((x, f)) => (json!(t.show(x)), json!(t.show(f))),
                None => (Json::Null, Json::Null),
            };
            json!({
                "predicate": e.pred.to_string(),
                "branch": e.error.branch(),
                "error_kind": e.error.kind(),
                "expected": expected,
                "found": found,
                "message": e.error.to_string(),
                "source_span": { "line": e.span.line, "column": e.span.column },
            })
        })
        .collect()
}

fn cmd_check(file: &Path, derivation: bool, json: bool) -> Outcome {
    let (p, t) = load(file)?;
    let c = check_program(&p, &t, None);
    let ids: Vec<PredId> = p.pred_ids().into_iter().collect();
    if json {
        emit(json!({
            "ok": c.is_ok(),
            "predicates": c.checked.values().map(|pc| {
                let mut o = json!({
                    "predicate": pc.pred.to_string(),
                    "type": t.show_pred(&pc.scheme.body),
                });
                if derivation {
                    o["derivation"] = json!(pc.derivation.render(&t));
                }
                o
            }).collect::<Vec<_>>(),
            "diagnostics": diagnostics(&c, &t),
        }));
    } else {
        for pc in c.checked.values() {
            println!(
                "{} : {}",
                label(&pc.pred, &ids),
                t.show_pred(&pc.scheme.body)
            );
            if derivation {
                for line in pc.derivation.render(&t).lines() {
                    println!("    {line}");
                }
            }
        }
        for e in &c.errors {
            eprintln!("{}:{}: {}: {}", file.display(), e.span, e.pred, e.error);
        }
    }
    if c.is_ok() {
        Ok(())
    } else {
        Err(Failure::Domain)
    }
}

fn cmd_subtype(left: &str, right: &str, decls: Option<&Path>, json: bool) -> Outcome {
    let table = match decls {
        Some(path) => TypeDeclTable::from_program(&read_program(path)?).map_err(usage)?,
        None => TypeDeclTable::empty(),
    };
    let trace: SubtypeTrace = if left.contains("->") || right.contains("->") {
        let pred = |s: &str| -> Result<PredicateType, Failure> {
            let es = parse_pred_type_expr(s).map_err(|e| usage(format!("`{s}`: {e}")))?;
            table.resolve_pred(&es).map_err(usage)
        };
        explain_pred_subtype(&pred(left)?, &pred(right)?)
    } else {
        let ty = |s: &str| {
            let e = parse_type_expr(s).map_err(|e| usage(format!("`{s}`: {e}")))?;
            table.resolve(&e).map_err(usage)
        };
        explain_subtype(&ty(left)?, &ty(right)?)
    };
    if json {
        emit(json!({
            "holds": trace.holds,
            "steps": trace.steps,
            "subst": trace.subst.iter().map(|(v, t)| (v.clone(), json!(t.to_string()))).collect::<serde_json::Map<_, _>>(),
        }));
    } else {
        println!("{}", trace.holds);
        for s in &trace.steps {
            println!("  {s}");
        }
        if trace.steps.is_empty() && !trace.holds {
            println!("  no rule applies");
        }
    }
    Ok(())
}

/// The flag, then the universe file, then `TRILOG_MAX_STATES`, then the default.
fn max_states(flag: Option<u64>, uf: &UniverseFile) -> Result<u64, Failure> {
    if let Some(n) = flag.or(uf.max_states) {
        return Ok(n);
    }
    match std::env::var("TRILOG_MAX_STATES") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("TRILOG_MAX_STATES=`{v}` is not a number"))),
        Err(_) => Ok(DEFAULT_MAX_STATES),
    }
}

fn universe_file(args: &UniverseArgs) -> Result<UniverseFile, Failure> {
    match &args.universe {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            UniverseFile::parse(&text).map_err(usage)
        }
        None => Ok(UniverseFile::default()),
    }
}

#[derive(Default)]
struct Counts {
    t: u64,
    f: u64,
    w: u64,
    truncations: u64,
    rows: Vec<Json>,
    lines: Vec<String>,
}

impl Counts {
    fn add(
        &mut self,
        v: TruthValue,
        truncated: bool,
        keep: bool,
        shown: impl Fn() -> (String, Json),
    ) {
        match v {
            TruthValue::True => self.t += 1,
            TruthValue::False => self.f += 1,
            TruthValue::Wrong => self.w += 1,
        }
        if truncated {
            self.truncations += 1;
        }
        if keep {
            let (text, j) = shown();
            self.lines.push(format!("{text} {v}"));
            self.rows
                .push(json!({ "state": j, "value": v.to_string() }));
        }
    }

    fn json(&self, keep: bool) -> Json {
        let mut o = json!({
            "count_true": self.t,
            "count_false": self.f,
            "count_wrong": self.w,
            "truncations": self.truncations,
        });
        if keep {
            o["states"] = json!(self.rows);
        }
        o
    }

    fn print(&self, indent: &str) {
        for l in &self.lines {
            println!("{indent}{l}");
        }
        println!(
            "{indent}true: {}  false: {}  wrong: {}  (truncated: {})",
            self.t, self.f, self.w, self.truncations
        );
    }
}

fn state_json(s: &State) -> Json {
    Json::Object(
        s.iter()
            .map(|(x, v)| (x.clone(), json!(v.to_string())))
            .collect(),
    )
}

fn states_over(
    vars: &std::collections::BTreeSet<String>,
    i: &Interpretation,
    cap: u64,
) -> Result<Vec<State>, Failure> {
    let vars: Vec<&String> = vars.iter().collect();
    Ok(enumerate_states(&vars, i.universe.domains(), cap)
        .map_err(usage)?
        .collect())
}

fn cmd_eval(
    file: &Path,
    goal: Option<&str>,
    args: &UniverseArgs,
    keep: bool,
    json: bool,
) -> Outcome {
    let (p, t) = load(file)?;
    let uf = universe_file(args)?;
    let cfg = uf.config(args.depth, max_states(args.max_states, &uf)?);
    let i = match uf.interpret(&p, &t, None, &cfg) {
        Ok(i) => i,
        Err(InterpretError::Invalid(e)) => return Err(usage(e)),
        Err(InterpretError::Limit(e)) => {
            eprintln!("error: {e}");
            return Err(Failure::Domain);
        }
    };
    let ev = Evaluator::new(&i);
    if let Some(goal) = goal {
        let wrapped = parse_program(&format!("'$goal' :- {goal}."))
            .map_err(|e| usage(format!("goal: {e}")))?;
        let body = &wrapped.clauses[0].body;
        if body.len() != 1 {
            return Err(usage("the goal must be a single sequence without `;`"));
        }
        let seq = &body[0];
        let mut counts = Counts::default();
        for s in states_over(&trilog_core::ast::seq_vars(seq), &i, cfg.max_states)? {
            ev.reset();
            let v = ev.seq(seq, &s);
            counts.add(v, ev.truncations() > 0, keep, || {
                (s.to_string(), state_json(&s))
            });
        }
        if json {
            emit(counts.json(keep));
        } else {
            counts.print("");
        }
        return Ok(());
    }
    let mut out = Vec::new();
    for c in &p.clauses {
        let mut per_branch = Vec::new();
        for seq in &c.body {
            let mut vars = trilog_core::ast::seq_vars(seq);
            c.head.iter().for_each(|h| h.collect_vars(&mut vars));
            per_branch.push(states_over(&vars, &i, cfg.max_states)?);
        }
        let total = trilog_core::semantics::count_states(per_branch.iter().map(Vec::len));
        if total > u128::from(cfg.max_states) {
            eprintln!(
                "error: {}: {total} state lists exceed the cap of {}; lower --depth or raise --max-states",
                c.pred(),
                cfg.max_states
            );
            return Err(Failure::Domain);
        }
        let mut counts = Counts::default();
        trilog_core::semantics::for_each_product(&per_branch, |ss| {
            ev.reset();
            let v = ev.clause(c, ss).unwrap_or(TruthValue::Wrong);
            counts.add(v, ev.truncations() > 0, keep, || {
                let text: Vec<String> = ss.iter().map(State::to_string).collect();
                (
                    text.join(" "),
                    json!(ss.iter().map(state_json).collect::<Vec<_>>()),
                )
            });
        });
        out.push((c.pred(), counts));
    }
    if json {
        emit(json!({
            "universe_size": i.universe.value_count(),
            "clauses": out.iter().map(|(id, c)| {
                let mut o = c.json(keep);
                o["predicate"] = json!(id.to_string());
                o
            }).collect::<Vec<_>>(),
        }));
    } else {
        for (id, counts) in &out {
            println!("{id}:");
            counts.print("  ");
        }
    }
    Ok(())
}

fn split_json(split: &[Context], t: &TypeDeclTable) -> Json {
    json!(split
        .iter()
        .map(|g| g
            .iter()
            .map(|(x, ty)| (x.clone(), json!(t.show(ty))))
            .collect::<serde_json::Map<_, _>>())
        .collect::<Vec<_>>())
}

fn counterexample_json(c: &Counterexample) -> Json {
    json!({
        "assignment": c.assignment,
        "branch": c.branch,
        "location": c.location,
        "state": state_json(&c.state),
    })
}

fn report_json(r: &TypingReport, t: &TypeDeclTable) -> Json {
    json!({
        "status": r.status.as_str(),
        "states_checked": r.states_checked,
        "wrong_count": r.wrong_count,
        "truncation_count": r.truncation_count,
        "witness_split": r.witness_split.as_deref().map(|s| split_json(s, t)),
        "counterexample": r.counterexample.as_ref().map(counterexample_json),
    })
}

fn show_counterexample(c: &Counterexample) -> String {
    let rho: Vec<String> = c
        .assignment
        .iter()
        .map(|(v, d)| format!("{v} in {d}"))
        .collect();
    let mut s = format!(
        "branch {}: {} is wrong under {}",
        c.branch, c.location, c.state
    );
    if !rho.is_empty() {
        s.push_str(&format!(" with {}", rho.join(", ")));
    }
    s
}

fn cmd_verify(
    file: Option<&Path>,
    seed: u64,
    args: &UniverseArgs,
    untyped: bool,
    json: bool,
) -> Outcome {
    let uf = universe_file(args)?;
    let cap = max_states(args.max_states, &uf)?;
    let (p, t, cfg) = match file {
        Some(path) => {
            let (p, t) = load(path)?;
            let cfg = uf.config(args.depth, cap);
            (p, t, cfg)
        }
        None => {
            let p = generate_program(seed, &SizeParams::default());
            let t = TypeDeclTable::from_program(&p).map_err(usage)?;
            let mut cfg = fit_universe(&p, &t);
            cfg.max_states = cap;
            if let Some(d) = args.depth.or(uf.depth) {
                cfg.depth = d;
            }
            if !uf.domains.is_empty() {
                cfg.basic = uf.config(None, cap).basic;
            }
            (p, t, cfg)
        }
    };
    if uf.trees.is_some() || !uf.predicates.is_empty() {
        return Err(usage(
            "verify builds its own interpretation; only `domains` and `depth` apply",
        ));
    }
    if untyped {
        let r = evaluate_untyped(&p, &t, &cfg).map_err(usage)?;
        if json {
            emit(report_json(&r, &t));
        } else {
            println!(
                "states: {}  wrong: {}  truncated: {}",
                r.states_checked, r.wrong_count, r.truncation_count
            );
            if let Some(c) = &r.counterexample {
                println!("first: {}", show_counterexample(c));
            }
        }
        return Ok(());
    }
    let report = match verify_soundness(&p, &t, &cfg) {
        Ok(r) => r,
        Err(SoundnessError::IllTyped(errors)) => {
            let c = ProgramCheck {
                checked: BTreeMap::new(),
                errors,
            };
            if json {
                emit(json!({ "sound": Json::Null, "diagnostics": diagnostics(&c, &t) }));
            } else {
                eprintln!("the program is not well-typed; nothing to verify");
                for e in &c.errors {
                    eprintln!("  {}: {}", e.pred, e.error);
                }
            }
            return Err(Failure::Domain);
        }
        Err(e @ SoundnessError::Semantics(SemanticsError::UniverseTooLarge { .. })) => {
            eprintln!("error: {e}");
            return Err(Failure::Domain);
        }
        Err(e) => return Err(usage(e)),
    };
    if json {
        emit(json!({
            "interpretation": "canonical",
            "depth": report.depth,
            "universe_size": report.universe_size,
            "program": file.is_none().then(|| pretty(&p)),
            "sound": report.is_sound(),
            "predicates": report.predicates.iter().map(|pr| {
                let mut o = report_json(&pr.report, &t);
                o["predicate"] = json!(pr.predicate.to_string());
                o
            }).collect::<Vec<_>>(),
            "constants": report.constants.iter().map(|(c, ok)| json!({ "constant": c, "typed": ok })).collect::<Vec<_>>(),
        }));
    } else {
        if file.is_none() {
            println!("program (seed {seed}):");
            for line in pretty(&p).lines() {
                println!("    {line}");
            }
        }
        println!(
            "canonical interpretation: {} values, depth {}",
            report.universe_size, report.depth
        );
        for pr in &report.predicates {
            let r = &pr.report;
            println!(
                "{}: {}  states {}  wrong {}  truncated {}",
                pr.predicate,
                r.status.as_str(),
                r.states_checked,
                r.wrong_count,
                r.truncation_count
            );
            if let Some(split) = &r.witness_split {
                let parts: Vec<String> = split
                    .iter()
                    .map(|g| {
                        let items: Vec<String> = g
                            .iter()
                            .map(|(x, ty)| format!("{x}: {}", t.show(ty)))
                            .collect();
                        format!("{{{}}}", items.join(", "))
                    })
                    .collect();
                println!("    split {}", parts.join(" "));
            }
            if let Some(c) = &r.counterexample {
                println!("    {}", show_counterexample(c));
            }
        }
        let bad: Vec<&str> = report
            .constants
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(c, _)| c.as_str())
            .collect();
        if bad.is_empty() {
            println!(
                "constants: all {} denote values of their types",
                report.constants.len()
            );
        } else {
            println!("constants outside their types: {}", bad.join(", "));
        }
        println!(
            "{}",
            if report.is_sound() {
                "sound"
            } else {
                "VIOLATION"
            }
        );
    }
    if report.is_sound() {
        Ok(())
    } else {
        Err(Failure::Domain)
    }
}

fn cmd_tables(json: bool) -> Outcome {
    let all = TruthValue::ALL;
    type Connective = fn(TruthValue, TruthValue) -> TruthValue;
    let binary: [(&str, Connective); 3] = [
        ("and", TruthValue::and),
        ("or", TruthValue::or),
        ("implies", TruthValue::implies),
    ];
    if json {
        let mut o = serde_json::Map::new();
        for (name, f) in binary {
            let rows: Vec<Json> = all
                .iter()
                .flat_map(|&a| all.iter().map(move |&b| (a, b)))
                .map(|(a, b)| json!({ "a": a.to_string(), "b": b.to_string(), "value": f(a, b).to_string() }))
                .collect();
            o.insert(name.into(), json!(rows));
        }
        o.insert(
            "not".into(),
            json!(all
                .iter()
                .map(|a| json!({ "a": a.to_string(), "value": a.not().to_string() }))
                .collect::<Vec<_>>()),
        );
        emit(Json::Object(o));
        return Ok(());
    }
    for (name, f) in binary {
        print!("{name:<8}|");
        for b in all {
            print!(" {:<6}", b.to_string());
        }
        println!();
        println!("{}", "-".repeat(8) + "+" + &"-".repeat(21));
        for a in all {
            print!("{:<8}|", a.to_string());
            for b in all {
                print!(" {:<6}", f(a, b).to_string());
            }
            println!();
        }
        println!();
    }
    println!("{:<8}|", "not");
    println!("{}", "-".repeat(8) + "+" + &"-".repeat(7));
    for a in all {
        println!("{:<8}| {}", a.to_string(), a.not());
    }
    Ok(())
}
