//! The universe description file.

use std::collections::BTreeMap;

use serde::Deserialize;
use trilog_core::ast::{parse_term, PredId, Program};
use trilog_core::semantics::SemanticsError;
use trilog_core::semantics::{
    count_states, eval_term, for_each_product, ArgDomains, Interpretation, State, UniverseBuilder,
};
use trilog_core::soundness::{
    build_universe, interpret_over, BasicDomainConfig, SoundnessError, UniverseConfig,
};
use trilog_core::typeck::ProgramCheck;
use trilog_core::types::TypeDeclTable;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseFile {
    pub depth: Option<usize>,
    pub max_states: Option<u64>,
    #[serde(default)]
    pub domains: Vec<DomainSpec>,
    /// Replaces the tree domains derived from the type declarations.
    pub trees: Option<Vec<TreeSpec>>,
    /// Rows that are `true`, keyed by `name/arity`; other rows are `false`.
    #[serde(default)]
    pub predicates: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub name: String,
    #[serde(default)]
    pub base_type: Option<String>,
    pub tokens: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub name: String,
    pub constructors: Vec<CtorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtorSpec {
    pub name: String,
    #[serde(default)]
    pub args: Vec<ArgSpec>,
}

/// `"*"` for any domain, a domain name, or a list of names.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ArgSpec {
    One(String),
    Many(Vec<String>),
}

impl ArgSpec {
    fn domains(&self) -> ArgDomains {
        match self {
            ArgSpec::One(s) if s == "*" => ArgDomains::Any,
            ArgSpec::One(s) => ArgDomains::Named(vec![s.clone()]),
            ArgSpec::Many(v) => ArgDomains::Named(v.clone()),
        }
    }
}

impl UniverseFile {
    pub fn parse(text: &str) -> Result<UniverseFile, String> {
        serde_json::from_str(text).map_err(|e| format!("universe file: {e}"))
    }

    /// A depth flag overrides the file's depth. `max_states` is already resolved.
    pub fn config(&self, depth: Option<usize>, max_states: u64) -> UniverseConfig {
        let mut cfg = UniverseConfig::default();
        if let Some(d) = depth.or(self.depth) {
            cfg.depth = d;
        }
        cfg.max_states = max_states;
        cfg.basic = self
            .domains
            .iter()
            .map(|d| BasicDomainConfig {
                name: d.name.clone(),
                base_type: d.base_type.clone(),
                tokens: d.tokens.clone(),
            })
            .collect();
        cfg
    }

    pub fn interpret(
        &self,
        p: &Program,
        table: &TypeDeclTable,
        check: Option<&ProgramCheck>,
        cfg: &UniverseConfig,
    ) -> Result<Interpretation, InterpretError> {
        let universe = match &self.trees {
            None => build_universe(p, table, check, cfg)?,
            Some(trees) => {
                let mut b = UniverseBuilder::new(cfg.depth).max_values(cfg.max_values);
                for d in &cfg.basic {
                    b = b.basic_owned(d.name.clone(), d.base_type.clone(), d.tokens.clone());
                }
                for t in trees {
                    let ctors = t
                        .constructors
                        .iter()
                        .map(|c| {
                            (
                                c.name.clone(),
                                c.args.iter().map(ArgSpec::domains).collect(),
                            )
                        })
                        .collect();
                    b = b.tree(&t.name, ctors);
                }
                b.build()?
            }
        };
        let (mut i, _) = interpret_over(p, universe, check, cfg.max_states)?;
        for (key, rows) in &self.predicates {
            let id = parse_pred_key(key)?;
            let mut table = BTreeMap::new();
            let params = vec![i.universe.all_domain_ids(); id.arity];
            let values: Vec<_> = i.universe.values().cloned().collect();
            let total = count_states(std::iter::repeat_n(values.len(), id.arity));
            if total > u128::from(cfg.max_states) {
                return Err(InterpretError::Limit(format!(
                    "table of {key}: {total} rows exceed the cap of {}",
                    cfg.max_states
                )));
            }
            for_each_product(&vec![values; id.arity], |t| {
                table.insert(t.to_vec(), false);
            });
            for row in rows {
                if row.len() != id.arity {
                    return Err(format!("row {row:?} of {key} has the wrong length").into());
                }
                let mut vals = Vec::new();
                for cell in row {
                    let t = parse_term(cell).map_err(|e| format!("{key}: {e}"))?;
                    let v = eval_term(&t, &i, &State::new());
                    if v.is_wrong() {
                        return Err(
                            format!("{key}: `{cell}` is not a value of the universe").into()
                        );
                    }
                    vals.push(v);
                }
                table.insert(vals, true);
            }
            i.set_predicate(id, params, table);
        }
        Ok(i)
    }
}

#[derive(Debug)]
pub enum InterpretError {
    /// The universe or a table is larger than the state cap.
    Limit(String),
    Invalid(String),
}

impl From<String> for InterpretError {
    fn from(s: String) -> Self {
        InterpretError::Invalid(s)
    }
}

impl From<SemanticsError> for InterpretError {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::UniverseTooLarge { .. } => InterpretError::Limit(e.to_string()),
            e => InterpretError::Invalid(e.to_string()),
        }
    }
}

impl From<SoundnessError> for InterpretError {
    fn from(e: SoundnessError) -> Self {
        match e {
            SoundnessError::Semantics(e) => e.into(),
            e => InterpretError::Invalid(e.to_string()),
        }
    }
}

pub fn parse_pred_key(key: &str) -> Result<PredId, String> {
    let (name, arity) = key
        .rsplit_once('/')
        .ok_or_else(|| format!("predicate key `{key}` must look like name/arity"))?;
    let arity = arity
        .parse()
        .map_err(|_| format!("predicate key `{key}` has a bad arity"))?;
    Ok(PredId::new(name, arity))
}
