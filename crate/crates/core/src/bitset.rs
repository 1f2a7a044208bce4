use serde::{Deserialize, Serialize};

use crate::model::BeamId;

/// Fixed-capacity set of beam ids. Used as the placed set of assembly states
/// and as the memoisation key of the exhaustive oracles.
#[derive(Clone, Default, Serialize, Deserialize)]
pub struct BeamSet {
    words: Vec<u64>,
    len: usize,
}

impl BeamSet {
    pub fn new(capacity: usize) -> Self {
        BeamSet { words: vec![0; capacity.div_ceil(64)], len: 0 }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::new(capacity);
        for b in 0..capacity {
            s.insert(BeamId(b));
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.words.len() * 64
    }

    pub fn contains(&self, b: BeamId) -> bool {
        let (w, bit) = (b.0 / 64, b.0 % 64);
        w < self.words.len() && self.words[w] & (1 << bit) != 0
    }

    /// Returns true if the beam was not already present.
    pub fn insert(&mut self, b: BeamId) -> bool {
        let (w, bit) = (b.0 / 64, b.0 % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        let fresh = self.words[w] & (1 << bit) == 0;
        self.words[w] |= 1 << bit;
        self.len += fresh as usize;
        fresh
    }

    pub fn remove(&mut self, b: BeamId) -> bool {
        let (w, bit) = (b.0 / 64, b.0 % 64);
        if w >= self.words.len() {
            return false;
        }
        let present = self.words[w] & (1 << bit) != 0;
        self.words[w] &= !(1 << bit);
        self.len -= present as usize;
        present
    }

    pub fn with(&self, b: BeamId) -> Self {
        let mut s = self.clone();
        s.insert(b);
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = BeamId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(BeamId(wi * 64 + t))
            })
        })
    }

    pub fn is_subset(&self, other: &BeamSet) -> bool {
        self.words.iter().enumerate().all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn union_with(&mut self, other: &BeamSet) {
        for b in other.iter() {
            self.insert(b);
        }
    }
}

impl BeamSet {
    fn significant(&self) -> &[u64] {
        let n = self.words.iter().rposition(|&w| w != 0).map_or(0, |i| i + 1);
        &self.words[..n]
    }
}

impl PartialEq for BeamSet {
    fn eq(&self, other: &Self) -> bool {
        self.significant() == other.significant()
    }
}

impl Eq for BeamSet {}

impl std::hash::Hash for BeamSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.significant().hash(state);
    }
}

impl std::fmt::Debug for BeamSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter().map(|b| b.0)).finish()
    }
}

impl FromIterator<BeamId> for BeamSet {
    fn from_iter<I: IntoIterator<Item = BeamId>>(iter: I) -> Self {
        let mut s = BeamSet::new(0);
        for b in iter {
            s.insert(b);
        }
        s
    }
}
