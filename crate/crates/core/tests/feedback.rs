use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordlab_core::canonical;
use wordlab_core::{feedback, validate_guess, FeedbackPattern, InvalidGuess, Trit, Word};

/// Straightforward reference: mark greens, then scan yellows by searching
/// for an unconsumed matching letter in the solution.
fn naive(guess: &str, solution: &str) -> String {
    let g: Vec<char> = guess.chars().collect();
    let mut s: Vec<Option<char>> = solution.chars().map(Some).collect();
    let mut out = vec!['A'; 5];
    for i in 0..5 {
        if Some(g[i]) == s[i] {
            out[i] = 'C';
            s[i] = None;
        }
    }
    for i in 0..5 {
        if out[i] == 'C' {
            continue;
        }
        if let Some(j) = (0..5).find(|&j| s[j] == Some(g[i])) {
            out[i] = 'P';
            s[j] = None;
        }
    }
    out.into_iter().collect()
}

pub const DUPLICATE_SUITE: [(&str, &str, &str); 25] = [
    ("eerie", "diner", "PAPPA"),
    ("lolly", "world", "ACACA"),
    ("speed", "abide", "AAPAP"),
    ("speed", "erase", "PAPPA"),
    ("speed", "steal", "CACAA"),
    ("speed", "crepe", "APCPA"),
    ("geese", "these", "AACCC"),
    ("geese", "eerie", "ACPAC"),
    ("eerie", "geese", "PCAAC"),
    ("allee", "eagle", "PPAPC"),
    ("mamma", "maxim", "CCPAA"),
    ("hello", "llama", "AAPPA"),
    ("sassy", "essay", "PPCAC"),
    ("essay", "sassy", "APCPC"),
    ("array", "rayon", "PPAAP"),
    ("abbey", "babes", "PPCCA"),
    ("kayak", "yakka", "PCPPP"),
    ("level", "revel", "ACCCC"),
    ("teeth", "theme", "CPCAP"),
    ("nanny", "annoy", "PPCAC"),
    ("otter", "toast", "PPPAA"),
    ("booby", "oboes", "PPCAA"),
    ("added", "dread", "PPAPC"),
    ("error", "rower", "PPAPC"),
    ("mummy", "human", "ACCAA"),
];

fn w(s: &str) -> Word {
    Word::new(s).unwrap()
}

#[test]
fn duplicate_letter_suite() {
    for (g, s, want) in DUPLICATE_SUITE {
        assert_eq!(naive(g, s), want, "reference disagrees on {g}/{s}");
        assert_eq!(feedback(&w(g), &w(s)).to_string(), want, "{g}/{s}");
    }
}

#[test]
fn eerie_against_diner_cells() {
    use Trit::*;
    assert_eq!(feedback(&w("eerie"), &w("diner")).cells(), [Present, Absent, Present, Present, Absent]);
}

#[test]
fn spec_examples() {
    assert_eq!(feedback(&w("plant"), &w("plant")), FeedbackPattern::ALL_CORRECT);
    assert_eq!(feedback(&w("plant"), &w("plant")).code(), 242);
    assert_eq!(feedback(&w("shrub"), &w("plant")), FeedbackPattern::ALL_ABSENT);
}

#[test]
fn random_pairs_match_reference() {
    let guesses = canonical::guesses();
    let solutions = canonical::solutions();
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    for _ in 0..10_000 {
        let g = &guesses.words()[rng.random_range(0..guesses.len())];
        let s = &solutions.words()[rng.random_range(0..solutions.len())];
        assert_eq!(feedback(g, s).to_string(), naive(g.as_str(), s.as_str()), "{g}/{s}");
    }
}

#[test]
fn every_guess_matches_itself() {
    for word in canonical::guesses().words() {
        assert!(feedback(word, word).is_win(), "{word}");
    }
}

#[test]
fn validation_examples() {
    let pool = canonical::guesses();
    assert_eq!(validate_guess("plant", &pool).unwrap(), w("plant"));
    assert_eq!(validate_guess("  PLANT\n", &pool).unwrap(), w("plant"));
    assert_eq!(validate_guess("qqqqq", &pool), Err(InvalidGuess::NotInWordList));
    assert_eq!(validate_guess("plan", &pool), Err(InvalidGuess::NotFiveLetters));
    assert_eq!(validate_guess("pl4nt", &pool), Err(InvalidGuess::NonAlphabetic));
    assert_eq!(validate_guess("plänt", &pool), Err(InvalidGuess::NonAlphabetic));
}

#[test]
fn validation_accepts_exactly_the_pool() {
    let pool = canonical::guesses();
    let mut accepted = 0;
    for word in pool.words() {
        if validate_guess(word.as_str(), &pool).is_ok() {
            accepted += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut outside = 0;
    for _ in 0..20_000 {
        let s: String = (0..5).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
        let in_pool = pool.contains(&w(&s));
        match validate_guess(&s, &pool) {
            Ok(_) => assert!(in_pool, "{s} accepted but not in pool"),
            Err(e) => {
                assert!(!in_pool);
                assert_eq!(e, InvalidGuess::NotInWordList);
                outside += 1;
            }
        }
    }
    assert_eq!(accepted, 12_972);
    assert!(outside > 0);
}

fn arb_word() -> impl Strategy<Value = Word> {
    // A small alphabet makes repeated letters common.
    proptest::collection::vec(prop::sample::select(b"aelnrst".to_vec()), 5)
        .prop_map(|bytes| Word::new(std::str::from_utf8(&bytes).unwrap()).unwrap())
}

proptest! {
    #[test]
    fn matches_reference(g in arb_word(), s in arb_word()) {
        prop_assert_eq!(feedback(&g, &s).to_string(), naive(g.as_str(), s.as_str()));
    }

    #[test]
    fn marked_letters_never_exceed_solution_counts(g in arb_word(), s in arb_word()) {
        let cells = feedback(&g, &s).cells();
        for letter in b'a'..=b'z' {
            let marked = (0..5).filter(|&i| g.as_bytes()[i] == letter && cells[i] != Trit::Absent).count();
            let available = s.as_bytes().iter().filter(|&&b| b == letter).count();
            prop_assert!(marked <= available);
        }
    }

    #[test]
    fn code_round_trips(code in 0u8..243) {
        let p = FeedbackPattern::from_code(code).unwrap();
        prop_assert_eq!(FeedbackPattern::from_cells(p.cells()), p);
        prop_assert_eq!(p.to_string().parse::<FeedbackPattern>().unwrap(), p);
        prop_assert_eq!(p.is_win(), code == 242);
    }
}
