use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Domain, SemanticsError, State, Value};

/// Calls `f` on every tuple of the cartesian product, last position fastest.
pub fn for_each_product<T: Clone>(cands: &[Vec<T>], mut f: impl FnMut(&[T])) {
    if cands.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; cands.len()];
    let mut tuple: Vec<T> = cands.iter().map(|c| c[0].clone()).collect();
    loop {
        f(&tuple);
        let mut pos = cands.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                tuple[pos] = cands[pos][idx[pos]].clone();
                break;
            }
            idx[pos] = 0;
            tuple[pos] = cands[pos][0].clone();
        }
    }
}

/// Size of a cartesian product, saturating.
pub fn count_states(sizes: impl IntoIterator<Item = usize>) -> u128 {
    sizes
        .into_iter()
        .fold(1u128, |acc, n| acc.saturating_mul(n as u128))
}

/// Odometer over total assignments of the given variables.
#[derive(Clone, Debug)]
pub struct StateIter {
    vars: Vec<String>,
    cands: Vec<Vec<Value>>,
    idx: Vec<usize>,
    done: bool,
    total: u128,
}

impl StateIter {
    fn new(vars: Vec<(String, Vec<Value>)>) -> StateIter {
        let (vars, cands): (Vec<String>, Vec<Vec<Value>>) = vars.into_iter().unzip();
        let total = count_states(cands.iter().map(Vec::len));
        StateIter {
            idx: vec![0; vars.len()],
            done: total == 0,
            vars,
            cands,
            total,
        }
    }

    /// Number of states the iterator yields in total.
    pub fn total(&self) -> u128 {
        self.total
    }
}

impl Iterator for StateIter {
    type Item = State;

    fn next(&mut self) -> Option<State> {
        if self.done {
            return None;
        }
        let state = self
            .vars
            .iter()
            .zip(&self.idx)
            .zip(&self.cands)
            .map(|((x, &i), c)| (x.clone(), c[i].clone()))
            .collect();
        let mut pos = self.idx.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.cands[pos].len() {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(state)
    }
}

fn capped(iter: StateIter, cap: u64) -> Result<StateIter, SemanticsError> {
    if iter.total > u128::from(cap) {
        return Err(SemanticsError::UniverseTooLarge {
            what: "states".into(),
            count: iter.total,
            cap,
        });
    }
    Ok(iter)
}

/// Every assignment of `vars` to members of the given term domains.
pub fn enumerate_states<S: AsRef<str>>(
    vars: &[S],
    domains: &[Domain],
    cap: u64,
) -> Result<StateIter, SemanticsError> {
    let values: Vec<Value> = domains
        .iter()
        .flat_map(|d| d.members.iter().cloned())
        .collect();
    let vars = vars
        .iter()
        .map(|x| (String::from(x.as_ref()), values.clone()))
        .collect();
    capped(StateIter::new(vars), cap)
}

/// Every assignment drawing each variable from its own candidate set.
pub fn enumerate_typed_states(
    vars: Vec<(String, Vec<Value>)>,
    cap: u64,
) -> Result<StateIter, SemanticsError> {
    capped(StateIter::new(vars), cap)
}
