use std::collections::BTreeSet;

use super::{Model, ModelError, StateId};

/// A finite path, or a lasso `stem[..loop_index] · (stem[loop_index..])^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub stem: Vec<StateId>,
    pub loop_index: Option<usize>,
}

impl Path {
    pub fn finite(stem: Vec<StateId>) -> Path {
        Path {
            stem,
            loop_index: None,
        }
    }

    pub fn lasso(stem: Vec<StateId>, loop_index: usize) -> Path {
        assert!(loop_index < stem.len(), "loop index out of range");
        Path {
            stem,
            loop_index: Some(loop_index),
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.loop_index.is_some()
    }

    /// Number of positions; `None` for infinite paths.
    pub fn len(&self) -> Option<usize> {
        match self.loop_index {
            Some(_) => None,
            None => Some(self.stem.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.stem.is_empty()
    }

    /// The state at position `i` of the (possibly unrolled) path.
    pub fn at(&self, i: usize) -> Option<&StateId> {
        match self.loop_index {
            _ if i < self.stem.len() => Some(&self.stem[i]),
            None => None,
            Some(k) => {
                let period = self.stem.len() - k;
                Some(&self.stem[k + (i - k) % period])
            }
        }
    }

    /// True if every step is a transition of `m` and, for finite paths,
    /// the last state is a deadlock of `m`.
    pub fn is_maximal_in(&self, m: &Model) -> bool {
        let Some(last) = self.stem.last() else {
            return false;
        };
        if !self.stem.iter().all(|s| m.contains_state(s)) {
            return false;
        }
        if !self.stem.windows(2).all(|w| m.has_transition(&w[0], &w[1])) {
            return false;
        }
        match self.loop_index {
            Some(k) => m.has_transition(last, &self.stem[k]),
            None => m.successors(last).is_ok_and(BTreeSet::is_empty),
        }
    }
}

impl Model {
    /// Maximal paths from `s` whose stems repeat no state: finite paths
    /// ending in a deadlock, and lassos whose stem is simple. Stems longer
    /// than `max_len` are not explored.
    ///
    /// Every maximal path agrees with one of these on any prefix-closed or
    /// suffix-periodic path condition, since a repeated state can always be
    /// short-cut into a loop; so a bound of `|S|` already loses nothing.
    pub fn maximal_lassos(&self, s: &str, max_len: usize) -> Result<Vec<Path>, ModelError> {
        let root = self
            .state(s)
            .ok_or_else(|| ModelError::UnknownState(StateId::new(s)))?;
        let mut out = Vec::new();
        let mut stem = vec![root.clone()];
        self.extend_lassos(&mut stem, max_len, &mut out);
        Ok(out)
    }

    fn extend_lassos(&self, stem: &mut Vec<StateId>, max_len: usize, out: &mut Vec<Path>) {
        let last = stem.last().expect("nonempty stem");
        let targets = &self.succ[last];
        if targets.is_empty() {
            out.push(Path::finite(stem.clone()));
            return;
        }
        for t in targets {
            if let Some(k) = stem.iter().position(|x| x == t) {
                out.push(Path::lasso(stem.clone(), k));
            } else if stem.len() < max_len {
                stem.push(t.clone());
                self.extend_lassos(stem, max_len, out);
                stem.pop();
            }
        }
    }
}
