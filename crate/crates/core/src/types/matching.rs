use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{alpha_eq, normalize_sum, SimpleType, Subst};

struct Matcher<'a> {
    flexible: &'a BTreeSet<String>,
    /// Pairs of binders entered so far: (pattern side, target side).
    binders: Vec<(String, String)>,
}

/// One-sided matching: extends `phi`, binding only `flexible` variables of
/// `pattern`, so that `phi(pattern)` equals `target` up to sum normalization
/// and binder renaming. A flexible summand of a sum may absorb several
/// summands of the target. On failure `phi` is left untouched.
pub fn match_type(
    pattern: &SimpleType,
    target: &SimpleType,
    flexible: &BTreeSet<String>,
    phi: &mut Subst,
) -> bool {
    let mut m = Matcher {
        flexible,
        binders: Vec::new(),
    };
    let mut trial = phi.clone();
    if m.go(&normalize_sum(pattern), &normalize_sum(target), &mut trial) {
        *phi = trial;
        true
    } else {
        false
    }
}

impl Matcher<'_> {
    fn escapes(&self, t: &SimpleType) -> bool {
        let free = t.free_vars();
        self.binders.iter().any(|(_, tb)| free.contains(tb))
    }

    fn is_target_binder(&self, v: &str) -> bool {
        self.binders.iter().any(|(_, tb)| tb == v)
    }

    fn flexible_unbound(&self, t: &SimpleType, phi: &Subst) -> Option<String> {
        match t {
            SimpleType::Var(v)
                if self.flexible.contains(v)
                    && !phi.contains_key(v)
                    && !self.binders.iter().any(|(pb, _)| pb == v) =>
            {
                Some(v.clone())
            }
            _ => None,
        }
    }

    fn go(&mut self, p: &SimpleType, t: &SimpleType, phi: &mut Subst) -> bool {
        match (p, t) {
            (SimpleType::Var(v), _) => {
                if let Some((_, tb)) = self.binders.iter().rev().find(|(pb, _)| pb == v) {
                    return matches!(t, SimpleType::Var(w) if w == tb);
                }
                if self.flexible.contains(v) {
                    if let Some(bound) = phi.get(v) {
                        return alpha_eq(bound, t);
                    }
                    if self.escapes(t) {
                        return false;
                    }
                    phi.insert(v.clone(), t.clone());
                    return true;
                }
                matches!(t, SimpleType::Var(w) if w == v && !self.is_target_binder(w))
            }
            (SimpleType::Const(_) | SimpleType::Base(_) | SimpleType::Bool, _) => p == t,
            (SimpleType::App(f, ps), SimpleType::App(g, ts)) => {
                f == g && ps.len() == ts.len() && self.all(ps, ts, phi)
            }
            (SimpleType::Mu(pb, pbody), SimpleType::Mu(tb, tbody)) => {
                self.binders.push((pb.clone(), tb.clone()));
                let ok = self.go(pbody, tbody, phi);
                self.binders.pop();
                ok
            }
            (SimpleType::Sum(ps), SimpleType::Sum(ts)) => self.sums(ps, ts, phi),
            _ => false,
        }
    }

    fn all(&mut self, ps: &[SimpleType], ts: &[SimpleType], phi: &mut Subst) -> bool {
        let mut trial = phi.clone();
        if ps.iter().zip(ts).all(|(p, t)| self.go(p, t, &mut trial)) {
            *phi = trial;
            true
        } else {
            false
        }
    }

    fn sums(&mut self, ps: &[SimpleType], ts: &[SimpleType], phi: &mut Subst) -> bool {
        let flex_pos = ps
            .iter()
            .position(|p| self.flexible_unbound(p, phi).is_some());
        let fixed: Vec<&SimpleType> = ps
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != flex_pos)
            .map(|(_, p)| p)
            .collect();
        let mut used = alloc::vec![false; ts.len()];
        self.assign(&fixed, ts, &mut used, flex_pos.map(|i| &ps[i]), phi)
    }

    fn assign(
        &mut self,
        fixed: &[&SimpleType],
        ts: &[SimpleType],
        used: &mut Vec<bool>,
        flex: Option<&SimpleType>,
        phi: &mut Subst,
    ) -> bool {
        let Some((first, rest)) = fixed.split_first() else {
            return self.finish(ts, used, flex, phi);
        };
        for j in 0..ts.len() {
            if used[j] {
                continue;
            }
            let mut trial = phi.clone();
            if self.go(first, &ts[j], &mut trial) {
                used[j] = true;
                if self.assign(rest, ts, used, flex, &mut trial) {
                    *phi = trial;
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }

    fn finish(
        &mut self,
        ts: &[SimpleType],
        used: &[bool],
        flex: Option<&SimpleType>,
        phi: &mut Subst,
    ) -> bool {
        let rest: Vec<SimpleType> = ts
            .iter()
            .zip(used)
            .filter(|(_, u)| !**u)
            .map(|(t, _)| t.clone())
            .collect();
        let Some(SimpleType::Var(v)) = flex else {
            return rest.is_empty();
        };
        let candidates: Vec<SimpleType> = if rest.is_empty() {
            // The variable duplicates a summand that is already covered.
            ts.to_vec()
        } else {
            alloc::vec![SimpleType::sum(rest)]
        };
        for c in candidates {
            if !self.escapes(&c) {
                phi.insert(v.clone(), c);
                return true;
            }
        }
        false
    }
}
