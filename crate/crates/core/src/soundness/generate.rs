//! Seeded random normal-form programs over small declared types.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::interp::{build_universe, BasicDomainConfig, UniverseConfig};
use crate::ast::{parse_program, Program};
use crate::typeck::check_program;
use crate::types::TypeDeclTable;

/// Largest universe the generator aims for.
pub const MAX_GENERATED_VALUES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeParams {
    pub predicates: usize,
    pub max_arity: usize,
    pub max_branches: usize,
    pub max_goals: usize,
    /// Chance that a goal deliberately uses a value of the wrong type.
    pub mistake_rate: f64,
}

impl Default for SizeParams {
    fn default() -> Self {
        SizeParams {
            predicates: 3,
            max_arity: 3,
            max_branches: 3,
            max_goals: 4,
            mistake_rate: 0.12,
        }
    }
}

impl SizeParams {
    /// Generates the empty program.
    pub fn zero() -> Self {
        SizeParams {
            predicates: 0,
            ..SizeParams::default()
        }
    }
}

struct Template {
    decl: &'static str,
    constants: &'static [&'static str],
    /// Constructor and its argument types; `None` is the declared type.
    ctor: Option<(&'static str, &'static [Option<Ty>])>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Ty {
    Int,
    Atom,
    Decl,
}

const TEMPLATES: [Template; 4] = [
    Template {
        decl: ":- type nat = z + s(nat).",
        constants: &["z"],
        ctor: Some(("s", &[None])),
    },
    Template {
        decl: ":- type color = red + green + blue.",
        constants: &["red", "green", "blue"],
        ctor: None,
    },
    Template {
        decl: ":- type opt = none + some(int).",
        constants: &["none"],
        ctor: Some(("some", &[Some(Ty::Int)])),
    },
    Template {
        decl: ":- type ilist = nil + cons(int, ilist).",
        constants: &["nil"],
        ctor: Some(("cons", &[Some(Ty::Int), None])),
    },
];

struct Branch<'r> {
    rng: &'r mut ChaCha8Rng,
    vars: BTreeMap<String, Ty>,
    prefix: String,
    fresh: usize,
    decl: Option<&'r Template>,
}

impl Branch<'_> {
    fn types(&self) -> Vec<Ty> {
        let mut ts = alloc::vec![Ty::Int, Ty::Atom];
        if self.decl.is_some() {
            ts.push(Ty::Decl);
        }
        ts
    }

    fn local(&mut self, ty: Ty) -> String {
        self.fresh += 1;
        let name = format!("{}{}", self.prefix, self.fresh);
        self.vars.insert(name.clone(), ty);
        name
    }

    /// A variable of type `ty`, reusing one when the coin says so.
    fn var_of(&mut self, ty: Ty) -> String {
        let existing: Vec<String> = self
            .vars
            .iter()
            .filter(|(_, t)| **t == ty)
            .map(|(x, _)| x.clone())
            .collect();
        if !existing.is_empty() && self.rng.gen_bool(0.6) {
            return existing.choose(self.rng).unwrap().clone();
        }
        self.local(ty)
    }

    fn maybe_wrong(&mut self, ty: Ty, rate: f64) -> Ty {
        if self.rng.gen_bool(rate) {
            *self.types().choose(self.rng).unwrap()
        } else {
            ty
        }
    }

    fn term_of(&mut self, ty: Ty) -> String {
        match ty {
            Ty::Int => ["1", "2"].choose(self.rng).unwrap().to_string(),
            Ty::Atom => String::from("a"),
            Ty::Decl => {
                let t = self.decl.unwrap();
                match t.ctor {
                    Some((f, args)) if self.rng.gen_bool(0.5) => {
                        let args: Vec<String> = args
                            .iter()
                            .map(|a| self.var_of(a.unwrap_or(Ty::Decl)))
                            .collect();
                        format!("{f}({})", args.join(", "))
                    }
                    _ => t.constants.choose(self.rng).unwrap().to_string(),
                }
            }
        }
    }
}

/// A random program in normal form. Predicates call only earlier ones or
/// themselves, so the call graph is acyclic apart from self-loops.
pub fn generate_program(seed: u64, size: &SizeParams) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if size.predicates == 0 {
        return Program::new();
    }
    let decl = rng
        .gen_bool(0.7)
        .then(|| &TEMPLATES[rng.gen_range(0..TEMPLATES.len())]);
    let mut src = String::new();
    if let Some(t) = decl {
        src.push_str(t.decl);
        src.push('\n');
    }
    let n = rng.gen_range(1..=size.predicates);
    let mut sigs: Vec<Vec<Ty>> = Vec::new();
    for p in 0..n {
        let arity = rng.gen_range(1..=size.max_arity.max(1));
        let mut kinds = alloc::vec![Ty::Int, Ty::Atom];
        if decl.is_some() {
            kinds.push(Ty::Decl);
            kinds.push(Ty::Decl);
        }
        let sig: Vec<Ty> = (0..arity)
            .map(|_| *kinds.choose(&mut rng).unwrap())
            .collect();
        let heads: Vec<String> = (1..=arity).map(|j| format!("_A{j}")).collect();
        let branches = rng.gen_range(1..=size.max_branches.max(1));
        let mut bodies = Vec::new();
        for k in 0..branches {
            let mut b = Branch {
                rng: &mut rng,
                vars: heads.iter().cloned().zip(sig.iter().copied()).collect(),
                prefix: format!("V{}_", k + 1),
                fresh: 0,
                decl,
            };
            let mut goals: Vec<String> = Vec::new();
            let count = b.rng.gen_range(1..=size.max_goals.max(1));
            for _ in 0..count {
                let roll: u32 = b.rng.gen_range(0..100);
                if roll < 50 {
                    let x = heads.choose(b.rng).unwrap().clone();
                    let ty = b.maybe_wrong(b.vars[&x], size.mistake_rate);
                    let t = b.term_of(ty);
                    goals.push(format!("{x} = {t}"));
                } else if roll < 65 {
                    let x = heads.choose(b.rng).unwrap().clone();
                    let ty = b.maybe_wrong(b.vars[&x], size.mistake_rate);
                    let y = b.var_of(ty);
                    if x != y {
                        goals.push(format!("{x} = {y}"));
                    }
                } else if roll < 88 && p > 0 {
                    let callee = b.rng.gen_range(0..p);
                    let args: Vec<String> = sigs[callee]
                        .clone()
                        .into_iter()
                        .map(|ty| {
                            let ty = b.maybe_wrong(ty, size.mistake_rate);
                            b.var_of(ty)
                        })
                        .collect();
                    goals.push(format!("p{callee}({})", args.join(", ")));
                } else if k > 0 {
                    let args: Vec<String> = sig.iter().map(|&ty| b.local(ty)).collect();
                    goals.push(format!("p{p}({})", args.join(", ")));
                }
            }
            if goals.is_empty() {
                let x = heads[0].clone();
                let t = b.term_of(sig[0]);
                goals.push(format!("{x} = {t}"));
            }
            bodies.push(goals.join(", "));
        }
        src.push_str(&format!(
            "p{p}({}) :- {}.\n",
            heads.join(", "),
            bodies.join(" ; ")
        ));
        sigs.push(sig);
    }
    parse_program(&src).expect("generated source parses")
}

/// A generated program and whether the checker accepts it.
pub fn generate_labeled(seed: u64, size: &SizeParams) -> (Program, bool) {
    let p = generate_program(seed, size);
    let ok = TypeDeclTable::from_program(&p)
        .map(|t| check_program(&p, &t, None).is_ok())
        .unwrap_or(false);
    (p, ok)
}

/// Universe settings for a generated program: ints 1 and 2, the atom `a`,
/// and the deepest depth bound (at most 3) keeping the universe within
/// [`MAX_GENERATED_VALUES`] values.
pub fn fit_universe(p: &Program, table: &TypeDeclTable) -> UniverseConfig {
    let basic = alloc::vec![
        BasicDomainConfig {
            name: "int".into(),
            base_type: Some("int".into()),
            tokens: alloc::vec!["1".into(), "2".into()],
        },
        BasicDomainConfig {
            name: "atom".into(),
            base_type: Some("atom".into()),
            tokens: alloc::vec!["a".into()],
        },
    ];
    let cfg = |depth| UniverseConfig {
        depth,
        basic: basic.clone(),
        ..UniverseConfig::default()
    };
    (0..=3)
        .rev()
        .map(cfg)
        .find(|c| {
            build_universe(p, table, None, c)
                .map(|u| u.value_count() <= MAX_GENERATED_VALUES)
                .unwrap_or(false)
        })
        .unwrap_or_else(|| cfg(0))
}
