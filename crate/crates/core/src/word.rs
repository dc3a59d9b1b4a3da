//! Game semantics: words, word pools, guess validation and letter feedback.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of letters in every word of the game.
pub const WORD_LEN: usize = 5;

/// Number of distinct feedback patterns (3^5).
pub const PATTERN_COUNT: usize = 243;

/// A five letter lowercase ASCII word.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word([u8; WORD_LEN]);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("expected 5 letters, got {0}")]
    Length(usize),
    #[error("word contains a character outside a-z")]
    Alphabet,
}

impl Word {
    /// Strict constructor: exactly five characters, each in `a..=z`.
    pub fn new(text: &str) -> Result<Self, WordError> {
        let bytes = text.as_bytes();
        if bytes.len() != WORD_LEN {
            return Err(WordError::Length(text.chars().count()));
        }
        let mut letters = [0u8; WORD_LEN];
        for (slot, &b) in letters.iter_mut().zip(bytes) {
            if !b.is_ascii_lowercase() {
                return Err(WordError::Alphabet);
            }
            *slot = b;
        }
        Ok(Word(letters))
    }

    pub fn as_bytes(&self) -> &[u8; WORD_LEN] {
        &self.0
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII lowercase bytes are ever stored.
        core::str::from_utf8(&self.0).expect("ascii word")
    }

    /// Letter at `pos` as an index in `0..26`.
    #[inline]
    pub fn letter_index(&self, pos: usize) -> usize {
        (self.0[pos] - b'a') as usize
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.as_str())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Word {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::new(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        Word::new(&text).map_err(serde::de::Error::custom)
    }
}

/// Per-letter feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Trit {
    Absent = 0,
    Present = 1,
    Correct = 2,
}

impl Trit {
    fn from_digit(d: u8) -> Trit {
        match d {
            0 => Trit::Absent,
            1 => Trit::Present,
            _ => Trit::Correct,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Trit::Absent => 'A',
            Trit::Present => 'P',
            Trit::Correct => 'C',
        }
    }
}

/// Feedback for a whole guess, stored as its base-3 code.
///
/// `code = sum(cells[i] * 3^i)` with `Absent = 0`, `Present = 1`,
/// `Correct = 2`; position 0 is the least significant digit. Export files
/// and the feedback table depend on this encoding bit-for-bit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FeedbackPattern(u8);

impl TryFrom<u8> for FeedbackPattern {
    type Error = PatternError;
    fn try_from(code: u8) -> Result<Self, Self::Error> {
        FeedbackPattern::from_code(code)
    }
}

impl From<FeedbackPattern> for u8 {
    fn from(p: FeedbackPattern) -> u8 {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern code {0} is outside 0..243")]
    CodeOutOfRange(u32),
    #[error("pattern must be 5 symbols from C/P/A (or G/Y/B/-), got {0:?}")]
    BadSymbols(String),
}

impl FeedbackPattern {
    pub const ALL_CORRECT: FeedbackPattern = FeedbackPattern(242);
    pub const ALL_ABSENT: FeedbackPattern = FeedbackPattern(0);

    pub fn from_code(code: u8) -> Result<Self, PatternError> {
        if (code as usize) < PATTERN_COUNT {
            Ok(FeedbackPattern(code))
        } else {
            Err(PatternError::CodeOutOfRange(code as u32))
        }
    }

    pub fn from_cells(cells: [Trit; WORD_LEN]) -> Self {
        let code = cells.iter().rev().fold(0u8, |acc, &t| acc * 3 + t as u8);
        FeedbackPattern(code)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn cells(self) -> [Trit; WORD_LEN] {
        let mut code = self.0;
        let mut cells = [Trit::Absent; WORD_LEN];
        for cell in cells.iter_mut() {
            *cell = Trit::from_digit(code % 3);
            code /= 3;
        }
        cells
    }

    pub fn is_win(self) -> bool {
        self == Self::ALL_CORRECT
    }

    /// Iterates all 243 patterns in code order.
    pub fn all() -> impl Iterator<Item = FeedbackPattern> {
        (0..PATTERN_COUNT as u8).map(FeedbackPattern)
    }
}

impl fmt::Debug for FeedbackPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeedbackPattern({} = {})", self.0, self)
    }
}

impl fmt::Display for FeedbackPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.cells() {
            write!(f, "{}", t.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for FeedbackPattern {
    type Err = PatternError;

    /// Accepts either a decimal code or five symbols: `C`/`G` correct,
    /// `P`/`Y` present, `A`/`B`/`-`/`X` absent (case-insensitive).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
            let code: u32 = s.parse().map_err(|_| PatternError::CodeOutOfRange(u32::MAX))?;
            return if (code as usize) < PATTERN_COUNT {
                Ok(FeedbackPattern(code as u8))
            } else {
                Err(PatternError::CodeOutOfRange(code))
            };
        }
        let bad = || PatternError::BadSymbols(String::from(s));
        if s.chars().count() != WORD_LEN {
            return Err(bad());
        }
        let mut cells = [Trit::Absent; WORD_LEN];
        for (cell, ch) in cells.iter_mut().zip(s.chars()) {
            *cell = match ch.to_ascii_uppercase() {
                'C' | 'G' => Trit::Correct,
                'P' | 'Y' => Trit::Present,
                'A' | 'B' | 'X' | '-' => Trit::Absent,
                _ => return Err(bad()),
            };
        }
        Ok(FeedbackPattern::from_cells(cells))
    }
}

const POW3: [u8; WORD_LEN] = [1, 3, 9, 27, 81];

/// Scores `guess` against `solution` with the two-pass letter budget.
///
/// Pass one marks exact matches; every unmatched solution letter adds one
/// to that letter's budget. Pass two walks the remaining guess positions
/// left to right and marks a letter present while its budget lasts.
pub fn feedback(guess: &Word, solution: &Word) -> FeedbackPattern {
    let g = guess.as_bytes();
    let s = solution.as_bytes();
    let mut budget = [0u8; 26];
    let mut code = 0u8;
    for i in 0..WORD_LEN {
        if g[i] == s[i] {
            code += 2 * POW3[i];
        } else {
            budget[(s[i] - b'a') as usize] += 1;
        }
    }
    for i in 0..WORD_LEN {
        if g[i] != s[i] {
            let slot = &mut budget[(g[i] - b'a') as usize];
            if *slot > 0 {
                *slot -= 1;
                code += POW3[i];
            }
        }
    }
    FeedbackPattern(code)
}

/// Which canonical list a pool represents.
///
/// `Guesses` is the full list of acceptable guesses (the "words" pool in
/// analysis output); `Solutions` is the answer list, a subset of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolKind {
    #[serde(alias = "words")]
    Guesses,
    Solutions,
}

impl PoolKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolKind::Guesses => "words",
            PoolKind::Solutions => "solutions",
        }
    }
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoolKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "words" | "guesses" => Ok(PoolKind::Guesses),
            "solutions" => Ok(PoolKind::Solutions),
            other => Err(alloc::format!("unknown pool {other:?} (expected solutions|words)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolError {
    #[error("line {line}: malformed entry {content:?}")]
    MalformedEntry { line: usize, content: String },
    #[error("line {line}: duplicate entry {word}")]
    DuplicateEntry { line: usize, word: Word },
    #[error("solution {0} is not an acceptable guess")]
    NotSubset(Word),
}

/// An ordered, duplicate-free list of words with index lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPool {
    kind: PoolKind,
    words: Vec<Word>,
    index: BTreeMap<Word, u32>,
}

impl WordPool {
    /// Parses newline-delimited pool text. Line numbers in errors are 1-based.
    pub fn parse(kind: PoolKind, text: &str) -> Result<Self, PoolError> {
        let mut words = Vec::new();
        let mut index = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let word = Word::new(line).map_err(|_| PoolError::MalformedEntry {
                line: n + 1,
                content: String::from(line),
            })?;
            if index.insert(word, words.len() as u32).is_some() {
                return Err(PoolError::DuplicateEntry { line: n + 1, word });
            }
            words.push(word);
        }
        Ok(WordPool { kind, words, index })
    }

    pub fn from_words<I: IntoIterator<Item = Word>>(kind: PoolKind, iter: I) -> Result<Self, PoolError> {
        let mut words = Vec::new();
        let mut index = BTreeMap::new();
        for (n, word) in iter.into_iter().enumerate() {
            if index.insert(word, words.len() as u32).is_some() {
                return Err(PoolError::DuplicateEntry { line: n + 1, word });
            }
            words.push(word);
        }
        Ok(WordPool { kind, words, index })
    }

    pub fn kind(&self) -> PoolKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn get(&self, index: usize) -> Option<&Word> {
        self.words.get(index)
    }

    pub fn index_of(&self, word: &Word) -> Option<usize> {
        self.index.get(word).map(|&i| i as usize)
    }

    pub fn contains(&self, word: &Word) -> bool {
        self.index.contains_key(word)
    }

    /// Serializes back to the on-disk format (LF-terminated lines).
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.words.len() * (WORD_LEN + 1));
        for w in &self.words {
            out.push_str(w.as_str());
            out.push('\n');
        }
        out
    }
}

/// Why a raw guess was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidGuess {
    #[error("guess must have exactly 5 letters")]
    NotFiveLetters,
    #[error("guess may only contain the letters a-z")]
    NonAlphabetic,
    #[error("not in word list")]
    NotInWordList,
}

/// Normalizes (trim, lowercase) and checks a raw guess against the pool.
pub fn validate_guess(raw: &str, pool: &WordPool) -> Result<Word, InvalidGuess> {
    let trimmed = raw.trim();
    if trimmed.chars().count() != WORD_LEN {
        return Err(InvalidGuess::NotFiveLetters);
    }
    if !trimmed.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(InvalidGuess::NonAlphabetic);
    }
    let lower = trimmed.to_ascii_lowercase();
    let word = Word::new(&lower).map_err(|_| InvalidGuess::NonAlphabetic)?;
    if pool.contains(&word) {
        Ok(word)
    } else {
        Err(InvalidGuess::NotInWordList)
    }
}

/// The guess pool together with the solution pool it contains.
#[derive(Debug, Clone)]
pub struct Lexicon {
    guesses: WordPool,
    solutions: WordPool,
    solution_to_guess: Vec<u32>,
}

impl Lexicon {
    pub fn new(guesses: WordPool, solutions: WordPool) -> Result<Self, PoolError> {
        let solution_to_guess = solutions
            .words()
            .iter()
            .map(|w| guesses.index_of(w).map(|i| i as u32).ok_or(PoolError::NotSubset(*w)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Lexicon {
            guesses,
            solutions,
            solution_to_guess,
        })
    }

    pub fn guesses(&self) -> &WordPool {
        &self.guesses
    }

    pub fn solutions(&self) -> &WordPool {
        &self.solutions
    }

    pub fn pool(&self, kind: PoolKind) -> &WordPool {
        match kind {
            PoolKind::Guesses => &self.guesses,
            PoolKind::Solutions => &self.solutions,
        }
    }

    /// Position of the `i`th solution inside the guess pool.
    pub fn solution_guess_index(&self, solution_index: usize) -> usize {
        self.solution_to_guess[solution_index] as usize
    }
}
