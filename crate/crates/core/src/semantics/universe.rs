use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::enumerate::for_each_product;
use super::{
    Domain, DomainId, DomainKind, DomainSet, SemanticsError, Value, DEFAULT_DEPTH,
    DEFAULT_MAX_STATES,
};

/// Which domains a constructor argument may come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgDomains {
    /// Every basic and tree domain.
    Any,
    Named(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constructor {
    pub name: String,
    pub params: Vec<DomainSet>,
    pub result: DomainId,
}

/// The finite set of term values, split into disjoint domains. Tree domains
/// hold every constructor tree up to the depth bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    domains: Vec<Domain>,
    base_types: BTreeMap<String, DomainId>,
    ctors: BTreeMap<(String, usize), Constructor>,
    depth: usize,
}

impl Universe {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain(&self, id: DomainId) -> Option<&Domain> {
        self.domains.get(id.index())
    }

    pub fn domain_by_name(&self, name: &str) -> Option<&Domain> {
        self.domains.iter().find(|d| d.name == name)
    }

    pub fn domain_name(&self, id: DomainId) -> &str {
        match id {
            DomainId::BOOL => "Bool",
            DomainId::WRONG => "W",
            _ => self.domain(id).map_or("?", |d| d.name.as_str()),
        }
    }

    /// The basic domain a base type is associated with.
    pub fn base_domain(&self, base_type: &str) -> Option<DomainId> {
        self.base_types.get(base_type).copied()
    }

    pub fn base_types(&self) -> impl Iterator<Item = (&str, DomainId)> {
        self.base_types.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn constructors(&self) -> impl Iterator<Item = &Constructor> {
        self.ctors.values()
    }

    pub fn constructor(&self, name: &str, arity: usize) -> Option<&Constructor> {
        self.ctors.get(&(String::from(name), arity))
    }

    pub fn all_domain_ids(&self) -> DomainSet {
        self.domains.iter().map(|d| d.id).collect()
    }

    /// Every term value, domain by domain.
    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.domains.iter().flat_map(|d| d.members.iter())
    }

    pub fn value_count(&self) -> usize {
        self.domains.iter().map(|d| d.members.len()).sum()
    }

    pub fn members_of(&self, ids: &DomainSet) -> Vec<Value> {
        ids.iter()
            .filter_map(|id| self.domain(*id))
            .flat_map(|d| d.members.iter().cloned())
            .collect()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.domain(v.domain()).is_some_and(|d| d.contains(v))
    }
}

/// Describes basic domains by their tokens and tree domains by their
/// constructors, then materializes the members.
#[derive(Clone, Debug)]
pub struct UniverseBuilder {
    depth: usize,
    max_values: u64,
    basic: Vec<(String, Option<String>, Vec<String>)>,
    trees: Vec<(String, Vec<CtorSpec>)>,
}

type CtorSpec = (String, Vec<ArgDomains>);

impl Default for UniverseBuilder {
    fn default() -> Self {
        UniverseBuilder::new(DEFAULT_DEPTH)
    }
}

impl UniverseBuilder {
    pub fn new(depth: usize) -> UniverseBuilder {
        UniverseBuilder {
            depth,
            max_values: DEFAULT_MAX_STATES,
            basic: Vec::new(),
            trees: Vec::new(),
        }
    }

    pub fn max_values(mut self, cap: u64) -> Self {
        self.max_values = cap;
        self
    }

    /// A basic domain, optionally associated with a base type.
    pub fn basic(mut self, name: &str, base_type: Option<&str>, tokens: &[&str]) -> Self {
        self.basic.push((
            name.into(),
            base_type.map(String::from),
            tokens.iter().map(|t| String::from(*t)).collect(),
        ));
        self
    }

    pub fn basic_owned(
        mut self,
        name: String,
        base_type: Option<String>,
        tokens: Vec<String>,
    ) -> Self {
        self.basic.push((name, base_type, tokens));
        self
    }

    /// A tree domain generated by the given constructors.
    pub fn tree(mut self, name: &str, ctors: Vec<(String, Vec<ArgDomains>)>) -> Self {
        self.trees.push((name.into(), ctors));
        self
    }

    pub fn build(self) -> Result<Universe, SemanticsError> {
        let mut names: BTreeMap<String, DomainId> = BTreeMap::new();
        let all_names = self
            .basic
            .iter()
            .map(|b| &b.0)
            .chain(self.trees.iter().map(|t| &t.0));
        for (i, n) in all_names.enumerate() {
            if names.insert(n.clone(), DomainId(i as u32)).is_some() {
                return Err(SemanticsError::DuplicateDomain(n.clone()));
            }
        }

        let mut domains = Vec::new();
        let mut base_types = BTreeMap::new();
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        let mut sets: Vec<BTreeSet<Value>> = Vec::new();
        for (name, base, tokens) in &self.basic {
            let id = names[name];
            if let Some(b) = base {
                if base_types.insert(b.clone(), id).is_some() {
                    return Err(SemanticsError::DuplicateDomain(format!("base type {b}")));
                }
            }
            for t in tokens {
                if let Some(prev) = owner.insert(t, name) {
                    if prev != name {
                        return Err(SemanticsError::DuplicateToken {
                            token: t.clone(),
                            first: prev.into(),
                            second: name.clone(),
                        });
                    }
                }
            }
            sets.push(tokens.iter().map(|t| Value::base(id, t)).collect());
            domains.push((name.clone(), DomainKind::Basic));
        }

        let every: DomainSet = names.values().copied().collect();
        let mut ctors = BTreeMap::new();
        for (dname, cs) in &self.trees {
            let result = names[dname];
            sets.push(BTreeSet::new());
            domains.push((dname.clone(), DomainKind::Tree));
            for (cname, args) in cs {
                let mut params = Vec::new();
                for a in args {
                    params.push(match a {
                        ArgDomains::Any => every.clone(),
                        ArgDomains::Named(ns) => ns
                            .iter()
                            .map(|n| {
                                names
                                    .get(n)
                                    .copied()
                                    .ok_or_else(|| SemanticsError::UnknownDomain(n.clone()))
                            })
                            .collect::<Result<_, _>>()?,
                    });
                }
                let key = (cname.clone(), params.len());
                if ctors.contains_key(&key)
                    || (params.is_empty() && owner.contains_key(cname.as_str()))
                {
                    return Err(SemanticsError::DuplicateConstructor(
                        cname.clone(),
                        params.len(),
                    ));
                }
                let c = Constructor {
                    name: cname.clone(),
                    params,
                    result,
                };
                if c.params.is_empty() {
                    sets[result.index()].insert(Value::tree(result, cname, Vec::new()));
                }
                ctors.insert(key, c);
            }
        }

        let cap = self.max_values;
        let too_large = |count: u128| SemanticsError::UniverseTooLarge {
            what: "universe values".into(),
            count,
            cap,
        };
        for _ in 0..self.depth {
            let snapshot = sets.clone();
            let mut changed = false;
            for c in ctors.values().filter(|c| !c.params.is_empty()) {
                let cands: Vec<Vec<Value>> = c
                    .params
                    .iter()
                    .map(|ds| {
                        ds.iter()
                            .flat_map(|d| snapshot[d.index()].iter().cloned())
                            .collect()
                    })
                    .collect();
                let product = cands
                    .iter()
                    .fold(1u128, |acc, v| acc.saturating_mul(v.len() as u128));
                if product > u128::from(cap) {
                    return Err(too_large(product));
                }
                let target = &mut sets[c.result.index()];
                for_each_product(&cands, |tuple| {
                    changed |= target.insert(Value::tree(c.result, &c.name, tuple.to_vec()));
                });
            }
            let total: usize = sets.iter().map(BTreeSet::len).sum();
            if total as u128 > u128::from(cap) {
                return Err(too_large(total as u128));
            }
            if !changed {
                break;
            }
        }

        let domains: Vec<Domain> = domains
            .into_iter()
            .zip(sets)
            .enumerate()
            .map(|(i, ((name, kind), members))| Domain {
                id: DomainId(i as u32),
                name,
                kind,
                members: members.into_iter().collect(),
            })
            .collect();
        if let Some(d) = domains.iter().find(|d| d.members.is_empty()) {
            return Err(SemanticsError::EmptyDomain(d.name.clone()));
        }
        Ok(Universe {
            domains,
            base_types,
            ctors,
            depth: self.depth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn int_lists(depth: usize) -> Universe {
        UniverseBuilder::new(depth)
            .basic("int", Some("int"), &["0", "1"])
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
            .unwrap()
    }

    #[test]
    fn list_domain_counts_by_depth() {
        // 1 + 2 + 4 + 8 lists of length <= depth.
        for (d, n) in [(0, 1), (1, 3), (2, 7), (3, 15)] {
            let u = int_lists(d);
            assert_eq!(u.domain_by_name("list").unwrap().members.len(), n);
            assert!(u.values().all(|v| v.depth() <= d));
        }
    }

    #[test]
    fn domains_are_disjoint_and_nonempty() {
        let u = int_lists(2);
        let mut seen = BTreeSet::new();
        for v in u.values() {
            assert!(seen.insert(v.clone()));
            assert!(u.contains(v));
        }
        let r = UniverseBuilder::new(2)
            .tree(
                "t",
                vec![("f".into(), vec![ArgDomains::Named(vec!["t".into()])])],
            )
            .build();
        assert_eq!(r.unwrap_err(), SemanticsError::EmptyDomain("t".into()));
    }

    #[test]
    fn shared_tokens_are_rejected() {
        let r = UniverseBuilder::new(1)
            .basic("a", None, &["1"])
            .basic("b", None, &["1"])
            .build();
        assert!(matches!(r, Err(SemanticsError::DuplicateToken { .. })));
    }

    #[test]
    fn materialization_respects_cap() {
        let r = UniverseBuilder::new(3)
            .max_values(100)
            .basic("int", Some("int"), &["0", "1", "2"])
            .tree(
                "t",
                vec![
                    ("[]".into(), vec![]),
                    ("f".into(), vec![ArgDomains::Any, ArgDomains::Any]),
                ],
            )
            .build();
        assert!(matches!(r, Err(SemanticsError::UniverseTooLarge { .. })));
    }
}
