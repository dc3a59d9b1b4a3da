//! The bundled canonical word lists and reaction catalog.

use crate::agent::Catalog;
use crate::word::{Lexicon, PoolKind, WordPool};

pub const GUESSES_TEXT: &str = include_str!("../data/guesses.txt");
pub const SOLUTIONS_TEXT: &str = include_str!("../data/solutions.txt");
pub const CATALOG_TEXT: &str = include_str!("../data/reactions.tsv");

pub const GUESS_COUNT: usize = 12_972;
pub const SOLUTION_COUNT: usize = 2_315;

/// Fixed solutions of the four main rounds, in play order.
pub const MAIN_ROUND_SOLUTIONS: [&str; 4] = ["plant", "fuzzy", "diner", "image"];

pub fn guesses() -> WordPool {
    WordPool::parse(PoolKind::Guesses, GUESSES_TEXT).expect("bundled guess list is well formed")
}

pub fn solutions() -> WordPool {
    WordPool::parse(PoolKind::Solutions, SOLUTIONS_TEXT).expect("bundled solution list is well formed")
}

pub fn lexicon() -> Lexicon {
    Lexicon::new(guesses(), solutions()).expect("bundled solutions are acceptable guesses")
}

pub fn catalog() -> Catalog {
    Catalog::parse(CATALOG_TEXT).expect("bundled catalog is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;

    #[test]
    fn bundled_pools_have_canonical_sizes() {
        let lex = lexicon();
        assert_eq!(lex.guesses().len(), GUESS_COUNT);
        assert_eq!(lex.solutions().len(), SOLUTION_COUNT);
        for w in MAIN_ROUND_SOLUTIONS {
            assert!(lex.solutions().contains(&Word::new(w).unwrap()));
        }
    }
}
