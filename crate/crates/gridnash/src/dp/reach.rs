//! Reachable partial-sum sets, canonicalized up to an additive constant.
//!
//! A partial-sum vector has one lattice index per action of the owning
//! player. Both the best-response check and the chain step are invariant
//! under adding a constant to all components, so states are stored with their
//! minimum shifted to zero. For two-action players the canonical state is a
//! single signed difference and the sets are dense bitsets, which makes the
//! per-child propagation a handful of shifted word-ORs.

use std::collections::BTreeSet;

/// Canonical form: subtract the minimum component.
pub fn canonicalize(mut v: Vec<i64>) -> Vec<i64> {
    let min = *v.iter().min().expect("nonempty vector");
    for x in &mut v {
        *x -= min;
    }
    v
}

/// Difference key for two-action vectors: `v[1] - v[0]`.
fn delta_of(v: &[i64]) -> i64 {
    debug_assert_eq!(v.len(), 2);
    v[1] - v[0]
}

fn vec_of_delta(delta: i64) -> Vec<i64> {
    if delta >= 0 {
        vec![0, delta]
    } else {
        vec![-delta, 0]
    }
}

/// Dense set of signed deltas over a window `[base, base + bits)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSet {
    base: i64,
    bits: usize,
    words: Vec<u64>,
}

impl DeltaSet {
    pub fn new(base: i64, bits: usize) -> Self {
        DeltaSet { base, bits, words: vec![0; bits.div_ceil(64)] }
    }

    pub fn singleton_zero() -> Self {
        let mut s = DeltaSet::new(0, 1);
        s.insert(0);
        s
    }

    pub fn insert(&mut self, delta: i64) {
        let off = (delta - self.base) as usize;
        debug_assert!(off < self.bits);
        self.words[off / 64] |= 1 << (off % 64);
    }

    pub fn contains(&self, delta: i64) -> bool {
        if delta < self.base || delta >= self.base + self.bits as i64 {
            return false;
        }
        let off = (delta - self.base) as usize;
        self.words[off / 64] >> (off % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// OR `src` into `self`, with every element shifted by `shift`.
    pub fn or_shifted(&mut self, src: &DeltaSet, shift: i64) {
        let offset = src.base + shift - self.base;
        debug_assert!(offset >= 0);
        let offset = offset as usize;
        let word_shift = offset / 64;
        let bit_shift = offset % 64;
        for (w, &sw) in src.words.iter().enumerate() {
            if sw == 0 {
                continue;
            }
            let lo = w + word_shift;
            if bit_shift == 0 {
                self.words[lo] |= sw;
            } else {
                self.words[lo] |= sw << bit_shift;
                if lo + 1 < self.words.len() {
                    self.words[lo + 1] |= sw >> (64 - bit_shift);
                }
            }
        }
    }

    /// Deltas within `[lo, hi]`, ascending.
    pub fn iter_range(&self, lo: i64, hi: i64) -> impl Iterator<Item = i64> + '_ {
        let start = lo.max(self.base);
        let end = hi.min(self.base + self.bits as i64 - 1);
        (start..=end).filter(move |&d| self.contains(d))
    }

    pub fn any_in_range(&self, lo: i64, hi: i64) -> bool {
        self.iter_range(lo, hi).next().is_some()
    }

    /// All deltas in the order induced by lexicographic order of the
    /// canonical vectors: `0, 1, 2, ...` then `-1, -2, ...`.
    pub fn iter_lex(&self) -> impl Iterator<Item = i64> + '_ {
        let hi = self.base + self.bits as i64 - 1;
        (0..=hi.max(-1))
            .filter(move |&d| self.contains(d))
            .chain((self.base.min(0)..0).rev().filter(move |&d| self.contains(d)))
    }
}

/// A set of canonical partial-sum vectors for one `(node, p_node)` slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachSet {
    /// Two-action fast path keyed by the signed component difference.
    Delta(DeltaSet),
    /// General case: canonical vectors in lexicographic order.
    Table(BTreeSet<Vec<i64>>),
}

impl ReachSet {
    /// The singleton zero state (boundary of the chain).
    pub fn zero(num_actions: usize) -> Self {
        if num_actions == 2 {
            ReachSet::Delta(DeltaSet::singleton_zero())
        } else {
            ReachSet::Table(BTreeSet::from([vec![0; num_actions]]))
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ReachSet::Delta(d) => d.len(),
            ReachSet::Table(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ReachSet::Delta(d) => d.is_empty(),
            ReachSet::Table(t) => t.is_empty(),
        }
    }

    pub fn contains(&self, state: &[i64]) -> bool {
        match self {
            ReachSet::Delta(d) => d.contains(delta_of(state)),
            ReachSet::Table(t) => t.contains(state),
        }
    }

    /// States in deterministic (lexicographic canonical) order.
    pub fn iter_states(&self) -> Box<dyn Iterator<Item = Vec<i64>> + '_> {
        match self {
            ReachSet::Delta(d) => Box::new(d.iter_lex().map(vec_of_delta)),
            ReachSet::Table(t) => Box::new(t.iter().cloned()),
        }
    }

    /// One propagation step: `next = { canon(S + d) : S in self, d in deltas }`.
    ///
    /// `deltas` are the per-choice increment vectors (one per feasible child
    /// strategy), not yet canonicalized.
    pub fn step(&self, deltas: &[Vec<i64>]) -> ReachSet {
        match self {
            ReachSet::Delta(prev) => {
                let mut dds: Vec<i64> = deltas.iter().map(|d| delta_of(d)).collect();
                dds.sort_unstable();
                dds.dedup();
                if dds.is_empty() {
                    return ReachSet::Delta(DeltaSet::new(0, 1));
                }
                let lo = prev.base + dds[0];
                let hi_bits = prev.bits + (dds[dds.len() - 1] - dds[0]) as usize;
                let mut next = DeltaSet::new(lo, hi_bits.max(1));
                for &dd in &dds {
                    next.or_shifted(prev, dd);
                }
                ReachSet::Delta(next)
            }
            ReachSet::Table(prev) => {
                let mut canon_deltas: Vec<Vec<i64>> =
                    deltas.iter().map(|d| canonicalize(d.clone())).collect();
                canon_deltas.sort();
                canon_deltas.dedup();
                let mut next = BTreeSet::new();
                for s in prev {
                    for d in &canon_deltas {
                        let sum: Vec<i64> = s.iter().zip(d).map(|(a, b)| a + b).collect();
                        next.insert(canonicalize(sum));
                    }
                }
                ReachSet::Table(next)
            }
        }
    }
}
