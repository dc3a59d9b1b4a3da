use serde::{Deserialize, Serialize};

use crate::word::{FeedbackPattern, Trit, Word, WORD_LEN};

/// Tracks which letters a player has uncovered during a round.
///
/// A guess reveals something new when it shows a letter in the word for the
/// first time, or pins a letter to a position not previously known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealTracker {
    letters_in_word: u32,
    pinned_positions: u8,
}

impl RevealTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a scored guess; returns true if it revealed anything new.
    pub fn observe(&mut self, guess: &Word, pattern: FeedbackPattern) -> bool {
        let mut revealed = false;
        for (pos, cell) in pattern.cells().into_iter().enumerate().take(WORD_LEN) {
            if cell == Trit::Absent {
                continue;
            }
            let letter_bit = 1u32 << guess.letter_index(pos);
            if self.letters_in_word & letter_bit == 0 {
                self.letters_in_word |= letter_bit;
                revealed = true;
            }
            if cell == Trit::Correct && self.pinned_positions & (1 << pos) == 0 {
                self.pinned_positions |= 1 << pos;
                revealed = true;
            }
        }
        revealed
    }

    pub fn known_letters(&self) -> u32 {
        self.letters_in_word.count_ones()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::feedback;

    fn w(s: &str) -> Word {
        Word::new(s).unwrap()
    }

    #[test]
    fn first_hits_and_upgrades_count_as_new() {
        let solution = w("plant");
        let mut t = RevealTracker::new();
        assert!(t.observe(&w("salet"), feedback(&w("salet"), &solution)));
        // Same letters, same places: nothing new.
        assert!(!t.observe(&w("salet"), feedback(&w("salet"), &solution)));
        // 'a' moves from present to its correct slot.
        assert!(t.observe(&w("clank"), feedback(&w("clank"), &solution)));
        assert!(!t.observe(&w("shrub"), feedback(&w("shrub"), &solution)));
    }
}
