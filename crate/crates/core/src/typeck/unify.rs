use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::types::{normalize_sum, subst, SimpleType, Subst};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum UnifyFail {
    Clash,
    Occurs(String, SimpleType),
}

/// First-order unification over types whose unknowns are the variables it
/// created itself; every other variable is rigid.
#[derive(Clone, Debug)]
pub(crate) struct Unifier {
    prefix: &'static str,
    next: usize,
    unknowns: BTreeSet<String>,
    bindings: Subst,
}

impl Unifier {
    pub(crate) fn new(prefix: &'static str) -> Unifier {
        Unifier {
            prefix,
            next: 0,
            unknowns: BTreeSet::new(),
            bindings: Subst::new(),
        }
    }

    pub(crate) fn fresh(&mut self) -> SimpleType {
        self.next += 1;
        let name = format!("{}{}", self.prefix, self.next);
        self.unknowns.insert(name.clone());
        SimpleType::Var(name)
    }

    /// Renames every free variable of the types to a fresh unknown, one
    /// renaming shared by all of them.
    pub(crate) fn instantiate_all(&mut self, ts: &[SimpleType]) -> Vec<SimpleType> {
        let mut vars = Vec::new();
        ts.iter().for_each(|t| t.free_vars_ordered(&mut vars));
        let phi: Subst = vars.into_iter().map(|v| (v, self.fresh())).collect();
        ts.iter().map(|t| subst(t, &phi)).collect()
    }

    pub(crate) fn instantiate(&mut self, t: &SimpleType) -> SimpleType {
        self.instantiate_all(core::slice::from_ref(t)).remove(0)
    }

    fn is_unknown(&self, v: &str) -> bool {
        self.unknowns.contains(v)
    }

    fn walk<'t>(&'t self, mut t: &'t SimpleType) -> &'t SimpleType {
        while let SimpleType::Var(v) = t {
            match self.bindings.get(v) {
                Some(b) => t = b,
                None => break,
            }
        }
        t
    }

    /// Applies all bindings.
    pub(crate) fn resolve(&self, t: &SimpleType) -> SimpleType {
        fn go(u: &Unifier, t: &SimpleType) -> SimpleType {
            match u.walk(t) {
                SimpleType::Sum(items) => SimpleType::Sum(items.iter().map(|i| go(u, i)).collect()),
                SimpleType::App(f, args) => {
                    SimpleType::App(f.clone(), args.iter().map(|a| go(u, a)).collect())
                }
                SimpleType::Mu(b, body) => SimpleType::mu(b, go(u, body)),
                other => other.clone(),
            }
        }
        normalize_sum(&go(self, t))
    }

    pub(crate) fn unify(&mut self, a: &SimpleType, b: &SimpleType) -> Result<(), UnifyFail> {
        let saved = self.bindings.clone();
        let r = self.go(a, b, &mut Vec::new());
        if r.is_err() {
            self.bindings = saved;
        }
        r
    }

    fn bind(
        &mut self,
        v: &str,
        t: &SimpleType,
        binders: &[(String, String)],
    ) -> Result<(), UnifyFail> {
        let t = self.resolve(t);
        if let SimpleType::Var(w) = &t {
            if w == v {
                return Ok(());
            }
        }
        let free = t.free_vars();
        if free.contains(v) {
            return Err(UnifyFail::Occurs(v.into(), t));
        }
        if binders
            .iter()
            .any(|(l, r)| free.contains(l) || free.contains(r))
        {
            return Err(UnifyFail::Clash);
        }
        self.bindings.insert(v.into(), t);
        Ok(())
    }

    fn go(
        &mut self,
        a: &SimpleType,
        b: &SimpleType,
        binders: &mut Vec<(String, String)>,
    ) -> Result<(), UnifyFail> {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (SimpleType::Var(v), SimpleType::Var(w)) if v == w => Ok(()),
            (SimpleType::Var(v), SimpleType::Var(w))
                if binders.iter().rev().any(|(l, r)| l == v || r == w) =>
            {
                match binders.iter().rev().find(|(l, r)| l == v || r == w) {
                    Some((l, r)) if l == v && r == w => Ok(()),
                    _ => Err(UnifyFail::Clash),
                }
            }
            (SimpleType::Var(v), _) if self.is_unknown(v) => self.bind(v, &b, binders),
            (_, SimpleType::Var(w)) if self.is_unknown(w) => self.bind(w, &a, binders),
            (SimpleType::App(f, xs), SimpleType::App(g, ys)) if f == g && xs.len() == ys.len() => {
                xs.iter()
                    .zip(ys)
                    .try_for_each(|(x, y)| self.go(x, y, binders))
            }
            (SimpleType::Sum(xs), SimpleType::Sum(ys)) if xs.len() == ys.len() => xs
                .iter()
                .zip(ys)
                .try_for_each(|(x, y)| self.go(x, y, binders)),
            (SimpleType::Mu(p, x), SimpleType::Mu(q, y)) => {
                binders.push((p.clone(), q.clone()));
                let r = self.go(x, y, binders);
                binders.pop();
                r
            }
            _ if a == b => Ok(()),
            _ => Err(UnifyFail::Clash),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::CONS;
    use alloc::vec;

    fn list_of(e: SimpleType, b: &str) -> SimpleType {
        SimpleType::mu(
            b,
            SimpleType::sum(vec![
                SimpleType::constant("[]"),
                SimpleType::app(CONS, vec![e, SimpleType::var(b)]),
            ]),
        )
    }

    #[test]
    fn binds_through_recursive_types() {
        let mut u = Unifier::new("_U");
        let x = u.fresh();
        u.unify(
            &list_of(x.clone(), "a"),
            &list_of(SimpleType::base("int"), "b"),
        )
        .unwrap();
        assert_eq!(u.resolve(&x), SimpleType::base("int"));
    }

    #[test]
    fn rigid_variables_and_clashes() {
        let mut u = Unifier::new("_U");
        assert!(u
            .unify(&SimpleType::var("A"), &SimpleType::base("int"))
            .is_err());
        assert!(u
            .unify(&SimpleType::base("atom"), &SimpleType::base("int"))
            .is_err());
        let x = u.fresh();
        let fx = SimpleType::app("f", vec![x.clone()]);
        assert!(matches!(u.unify(&x, &fx), Err(UnifyFail::Occurs(..))));
    }

    #[test]
    fn failed_unification_leaves_no_bindings() {
        let mut u = Unifier::new("_U");
        let x = u.fresh();
        let l = SimpleType::app("f", vec![x.clone(), SimpleType::base("int")]);
        let r = SimpleType::app(
            "f",
            vec![SimpleType::base("atom"), SimpleType::base("atom")],
        );
        assert!(u.unify(&l, &r).is_err());
        assert_eq!(u.resolve(&x), x);
    }

    #[test]
    fn binders_do_not_escape() {
        let mut u = Unifier::new("_U");
        let x = u.fresh();
        let a = SimpleType::mu("a", SimpleType::app("f", vec![x]));
        let b = SimpleType::mu("b", SimpleType::app("f", vec![SimpleType::var("b")]));
        assert!(u.unify(&a, &b).is_err());
    }
}
