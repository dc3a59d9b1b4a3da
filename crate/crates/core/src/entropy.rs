//! Candidate-set tracking and the bits-remaining metric.
//!
//! A [`CandidateSet`] is a bitset over one pool's index space. Filtering uses
//! a precomputed [`FeedbackTable`] (guess-major, one byte per entry) when the
//! target pool is the solution list, and falls back to computing feedback
//! directly otherwise.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::word::{feedback, FeedbackPattern, Lexicon, PoolKind, Word, PATTERN_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EntropyError {
    /// The feedback history is inconsistent: no pool word survives it.
    #[error("no candidate is consistent with the feedback history")]
    EmptyCandidateSet,
}

/// Members of one pool that remain consistent with a feedback history.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CandidateSet {
    pool: PoolKind,
    universe: u32,
    count: u32,
    blocks: Vec<u64>,
}

impl core::fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CandidateSet")
            .field("pool", &self.pool)
            .field("universe", &self.universe)
            .field("count", &self.count)
            .finish()
    }
}

impl CandidateSet {
    pub fn empty(pool: PoolKind, universe: usize) -> Self {
        CandidateSet {
            pool,
            universe: universe as u32,
            count: 0,
            blocks: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(pool: PoolKind, universe: usize) -> Self {
        let mut set = Self::empty(pool, universe);
        for (i, block) in set.blocks.iter_mut().enumerate() {
            let lo = i * 64;
            let n = (universe - lo).min(64);
            *block = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        }
        set.count = universe as u32;
        set
    }

    /// Builds a set from pool indices; indices outside the universe are ignored.
    pub fn from_indices<I: IntoIterator<Item = usize>>(pool: PoolKind, universe: usize, indices: I) -> Self {
        let mut set = Self::empty(pool, universe);
        for i in indices {
            if i < universe {
                set.insert(i);
            }
        }
        set
    }

    pub fn pool_kind(&self) -> PoolKind {
        self.pool
    }

    pub fn universe(&self) -> usize {
        self.universe as usize
    }

    pub fn count(&self) -> usize {
        self.count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe() && self.blocks[index / 64] & (1 << (index % 64)) != 0
    }

    /// Returns true when the index was not already present.
    pub fn insert(&mut self, index: usize) -> bool {
        assert!(index < self.universe(), "index {index} outside pool of {}", self.universe);
        let block = &mut self.blocks[index / 64];
        let bit = 1u64 << (index % 64);
        let fresh = *block & bit == 0;
        if fresh {
            *block |= bit;
            self.count += 1;
        }
        fresh
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(i, &block)| {
            let mut bits = block;
            core::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(i * 64 + tz)
                }
            })
        })
    }

    /// Raw bitset words; stable and suitable as a map key.
    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn is_subset_of(&self, other: &CandidateSet) -> bool {
        self.universe == other.universe && self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }
}

/// `log2(w)` for the current candidate count.
pub fn bits_remaining(candidates: &CandidateSet) -> Result<f64, EntropyError> {
    if candidates.is_empty() {
        return Err(EntropyError::EmptyCandidateSet);
    }
    Ok(libm::log2(candidates.count() as f64))
}

/// Feedback codes for every (guess, solution) pair, guess-major.
#[derive(Clone, PartialEq, Eq)]
pub struct FeedbackTable {
    guesses: usize,
    solutions: usize,
    codes: Vec<u8>,
}

impl core::fmt::Debug for FeedbackTable {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "FeedbackTable({}x{})", self.guesses, self.solutions)
    }
}

impl FeedbackTable {
    pub fn build(lexicon: &Lexicon) -> Self {
        let guesses = lexicon.guesses().words();
        let solutions = lexicon.solutions().words();
        let mut codes = Vec::with_capacity(guesses.len() * solutions.len());
        for g in guesses {
            codes.extend(solutions.iter().map(|s| feedback(g, s).code()));
        }
        FeedbackTable {
            guesses: guesses.len(),
            solutions: solutions.len(),
            codes,
        }
    }

    /// Wraps raw codes (e.g. read from a cache file). Returns `None` if the
    /// length does not match or a code is out of range.
    pub fn from_raw(guesses: usize, solutions: usize, codes: Vec<u8>) -> Option<Self> {
        if codes.len() != guesses * solutions || codes.iter().any(|&c| c as usize >= PATTERN_COUNT) {
            return None;
        }
        Some(FeedbackTable {
            guesses,
            solutions,
            codes,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.guesses, self.solutions)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.codes
    }

    #[inline]
    pub fn row(&self, guess_index: usize) -> &[u8] {
        &self.codes[guess_index * self.solutions..(guess_index + 1) * self.solutions]
    }

    #[inline]
    pub fn get(&self, guess_index: usize, solution_index: usize) -> FeedbackPattern {
        FeedbackPattern::from_code(self.codes[guess_index * self.solutions + solution_index]).expect("validated code")
    }
}

/// One point on a round's entropy trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyObservation {
    /// 1-based guess index.
    pub guess_index: u32,
    /// Candidates remaining after this guess.
    pub remaining: u32,
    pub bits: f64,
    pub pool: PoolKind,
}

/// Candidate filtering and partition statistics over a lexicon.
#[derive(Debug, Clone)]
pub struct EntropyEngine {
    lexicon: Lexicon,
    table: Option<FeedbackTable>,
}

impl EntropyEngine {
    /// Engine without a precomputed table; every lookup computes feedback.
    pub fn new(lexicon: Lexicon) -> Self {
        EntropyEngine { lexicon, table: None }
    }

    /// Engine backed by a table. Panics if the table shape does not match.
    pub fn with_table(lexicon: Lexicon, table: FeedbackTable) -> Self {
        assert_eq!(
            table.dims(),
            (lexicon.guesses().len(), lexicon.solutions().len()),
            "feedback table shape does not match lexicon"
        );
        EntropyEngine {
            lexicon,
            table: Some(table),
        }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn table(&self) -> Option<&FeedbackTable> {
        self.table.as_ref()
    }

    pub fn full(&self, pool: PoolKind) -> CandidateSet {
        CandidateSet::full(pool, self.lexicon.pool(pool).len())
    }

    fn table_row(&self, pool: PoolKind, guess: &Word) -> Option<&[u8]> {
        match (pool, &self.table) {
            (PoolKind::Solutions, Some(table)) => {
                self.lexicon.guesses().index_of(guess).map(|g| table.row(g))
            }
            _ => None,
        }
    }

    /// Feedback code of `guess` against every member, in member order.
    fn for_each_code(&self, candidates: &CandidateSet, guess: &Word, mut f: impl FnMut(usize, u8)) {
        if let Some(row) = self.table_row(candidates.pool_kind(), guess) {
            for i in candidates.iter() {
                f(i, row[i]);
            }
        } else {
            let words = self.lexicon.pool(candidates.pool_kind()).words();
            for i in candidates.iter() {
                f(i, feedback(guess, &words[i]).code());
            }
        }
    }

    /// Members `c` with `feedback(guess, c) == pattern`. The input is untouched.
    pub fn filter(&self, candidates: &CandidateSet, guess: &Word, pattern: FeedbackPattern) -> CandidateSet {
        let mut out = CandidateSet::empty(candidates.pool_kind(), candidates.universe());
        let want = pattern.code();
        self.for_each_code(candidates, guess, |i, code| {
            if code == want {
                out.insert(i);
            }
        });
        out
    }

    /// Size of each of the 243 feedback classes induced by `guess`.
    pub fn partition_counts(&self, candidates: &CandidateSet, guess: &Word) -> [u32; PATTERN_COUNT] {
        let mut counts = [0u32; PATTERN_COUNT];
        self.for_each_code(candidates, guess, |_, code| counts[code as usize] += 1);
        counts
    }

    /// Splits the candidates into their non-empty feedback classes.
    pub fn partition(&self, candidates: &CandidateSet, guess: &Word) -> Vec<(FeedbackPattern, CandidateSet)> {
        let mut classes: Vec<Option<CandidateSet>> = vec![None; PATTERN_COUNT];
        self.for_each_code(candidates, guess, |i, code| {
            classes[code as usize]
                .get_or_insert_with(|| CandidateSet::empty(candidates.pool_kind(), candidates.universe()))
                .insert(i);
        });
        classes
            .into_iter()
            .enumerate()
            .filter_map(|(code, set)| set.map(|s| (FeedbackPattern::from_code(code as u8).expect("code < 243"), s)))
            .collect()
    }

    /// Mean size of the surviving set when the solution is drawn uniformly
    /// from `candidates`: `sum(class_size^2) / |candidates|`.
    pub fn expected_remaining(&self, candidates: &CandidateSet, guess: &Word) -> Result<f64, EntropyError> {
        if candidates.is_empty() {
            return Err(EntropyError::EmptyCandidateSet);
        }
        let counts = self.partition_counts(candidates, guess);
        let sum_sq: u64 = counts.iter().map(|&c| c as u64 * c as u64).sum();
        Ok(sum_sq as f64 / candidates.count() as f64)
    }

    /// Observation `k` describes the set after applying guesses `1..=k`.
    pub fn trajectory(
        &self,
        history: &[(Word, FeedbackPattern)],
        pool: PoolKind,
    ) -> Result<Vec<EntropyObservation>, EntropyError> {
        let mut set = self.full(pool);
        let mut out = Vec::with_capacity(history.len());
        for (k, (guess, pattern)) in history.iter().enumerate() {
            set = self.filter(&set, guess, *pattern);
            let bits = bits_remaining(&set)?;
            out.push(EntropyObservation {
                guess_index: k as u32 + 1,
                remaining: set.count() as u32,
                bits,
                pool,
            });
        }
        Ok(out)
    }

    /// Guess-pool index minimizing [`expected_remaining`](Self::expected_remaining)
    /// over all acceptable guesses, earliest index on ties.
    ///
    /// The per-guess sum of squared class sizes only grows as candidates are
    /// added, so a guess is abandoned as soon as its partial sum exceeds the
    /// best complete one. Returns the index and its sum of squares.
    pub fn min_expected_remaining(&self, candidates: &CandidateSet) -> Option<(usize, u64)> {
        if candidates.is_empty() {
            return None;
        }
        let members: Vec<usize> = candidates.iter().collect();
        let n = members.len() as u64;
        let guesses = self.lexicon.guesses().words();
        let targets = self.lexicon.pool(candidates.pool_kind()).words();
        let use_table = candidates.pool_kind() == PoolKind::Solutions && self.table.is_some();

        let mut counts = [0u32; PATTERN_COUNT];
        let mut score = |g: usize, bound: u64| -> Option<u64> {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut sum_sq = 0u64;
            if use_table {
                let row = self.table.as_ref().expect("checked").row(g);
                for &m in &members {
                    let c = &mut counts[row[m] as usize];
                    sum_sq += 2 * *c as u64 + 1;
                    *c += 1;
                    if sum_sq > bound {
                        return None;
                    }
                }
            } else {
                let guess = &guesses[g];
                for &m in &members {
                    let c = &mut counts[feedback(guess, &targets[m]).code() as usize];
                    sum_sq += 2 * *c as u64 + 1;
                    *c += 1;
                    if sum_sq > bound {
                        return None;
                    }
                }
            }
            Some(sum_sq)
        };

        // Seed the bound with a few candidate words so pruning bites early.
        let mut bound = u64::MAX;
        for &m in members.iter().take(8) {
            let g = match candidates.pool_kind() {
                PoolKind::Solutions => self.lexicon.solution_guess_index(m),
                PoolKind::Guesses => m,
            };
            if let Some(s) = score(g, bound) {
                bound = bound.min(s);
            }
        }

        let mut best: Option<(usize, u64)> = None;
        for g in 0..guesses.len() {
            // A later guess can only win with a strictly smaller sum.
            let limit = best.map_or(bound, |(_, s)| s.saturating_sub(1).min(bound));
            if let Some(s) = score(g, limit) {
                if best.is_none_or(|(_, b)| s < b) {
                    best = Some((g, s));
                    if s == n {
                        break;
                    }
                }
            }
        }
        best
    }
}
