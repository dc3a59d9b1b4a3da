use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordlab_core::agent::{
    control_status, detect_contexts, select_reaction, AgentEvent, AgentState, Catalog, CatalogError, ContextSet,
    Expression, GameContext, Personality, Rotation, Thresholds,
};
use wordlab_core::canonical;

use Expression as X;
use GameContext as C;

/// The reaction table, row by row.
const TABLE: [(GameContext, Expression, &str); 39] = [
    (C::FewerThan6Remaining, X::WaveShort, "You're so, so close. You got this!"),
    (C::FastGuess, X::WaveShort, "Wow, you're so fast! Incredible!"),
    (C::SlowGuess, X::WaveShort, "Taking your time really paid off!"),
    (C::FirstGuess, X::WaveShort, "Good luck! You got this!"),
    (C::FirstGuess, X::WaveShort, "Another round! You can do this!"),
    (C::FirstGuess, X::WaveShort, "You've got the hang of this!"),
    (C::FirstGuess, X::WaveShort, "I know you can get this one!"),
    (C::FifthGuess, X::Idle, "Two guesses left, that's plenty of time!"),
    (C::FifthGuess, X::Idle, "Last two guesses! Trust yourself, you got this."),
    (C::FifthGuess, X::Idle, "This is a tough one, but you're close!"),
    (C::FifthGuess, X::Idle, "This one can be hard, but I believe in you!"),
    (C::SixthGuess, X::Wave, "Just breathe and think it through. You got this!"),
    (C::SixthGuess, X::Wave, "Stay calm and use all the facts you uncovered."),
    (C::SixthGuess, X::Wave, "You final chance. You can do it!"),
    (C::SixthGuess, X::Wave, "Don't give up now! Stay calm and breathe."),
    (C::FewerThan101Remaining, X::WaveShort, "You're getting closer!"),
    (C::FewerThan101Remaining, X::WaveShort, "Oh nice, that really narrowed the field!"),
    (C::FewerThan101Remaining, X::WaveShort, "Ooh, you're getting close now!"),
    (C::FewerThan101Remaining, X::WaveShort, "That was a really good guess!"),
    (C::AdditionalLettersRevealed, X::Success, "Wow! What a great guess!"),
    (C::AdditionalLettersRevealed, X::Success, "Ooh nice one! I didn't think of that."),
    (C::AdditionalLettersRevealed, X::Success, "You learned more information! Nice work!"),
    (C::AdditionalLettersRevealed, X::Success, "Great guess!"),
    (C::NoAdditionalLettersRevealed, X::SlightlyHappy, "Okay! Well now we know what doesn't work."),
    (C::NoAdditionalLettersRevealed, X::SlightlyHappy, "Nice! Now we know what to avoid"),
    (C::NoAdditionalLettersRevealed, X::Sadness, "Aww, I was sure that would be it."),
    (C::NoAdditionalLettersRevealed, X::Sadness, "Hmm, what could it be?!"),
    (C::Invalid, X::Sadness, "Oops! I don't know that word! Give it another try."),
    (C::Win, X::Win, "This must be your lucky day"),
    (C::Win, X::Win, "Two guesses?! Are you a wizard?!"),
    (C::Win, X::Win, "Three guesses? You're a rock star!"),
    (C::Win, X::Win, "Great job! You won in four guesses!"),
    (C::Win, X::Success, "You did it! You won in five guesses!"),
    (C::Win, X::Success, "That was close, but you did it!"),
    (C::Loss, X::Sadness, "You almost had it! Let's try again."),
    (C::Idle90s, X::WaveShort, "It's good to think it through carefully."),
    (C::Idle90s, X::WaveShort, "I believe in you!"),
    (C::Idle90s, X::WaveShort, "It's okay to feel stumped. You'll get it!"),
    (C::Idle90s, X::Sadness, "This one is a toughy, isn't it?"),
];

#[test]
fn default_catalog_matches_the_reaction_table() {
    let cat = canonical::catalog();
    assert_eq!(cat.rules().len(), 39);
    for (rule, (ctx, expr, msg)) in cat.rules().iter().zip(TABLE) {
        assert_eq!((rule.context, rule.expression, rule.message.as_str()), (ctx, expr, msg));
    }
    assert_eq!(cat.contexts().len(), 13);
    let exprs = cat.expressions();
    assert!(exprs.len() == 6 || exprs.len() == 7);
    assert_eq!(Expression::ALL.len(), 7);
    for n in 1..=6u8 {
        assert_eq!(cat.win_rule(n).unwrap().message, TABLE[27 + n as usize].2);
    }
    let mut counts = BTreeMap::new();
    for r in cat.rules() {
        *counts.entry(r.context).or_insert(0usize) += 1;
    }
    assert!(counts.values().all(|c| [1, 4, 6].contains(c)));
}

#[test]
fn catalog_missing_a_win_rule_is_invalid() {
    let text: String = canonical::CATALOG_TEXT
        .lines()
        .filter(|l| !l.starts_with("win@6"))
        .map(|l| format!("{l}\n"))
        .collect();
    assert!(matches!(Catalog::parse(&text), Err(CatalogError::CatalogInvalid(_))));
}

fn state_in_round(cat: &Catalog, seed: u64, guesses_used: u8) -> AgentState {
    let rotation = Rotation::shuffled(cat, &mut ChaCha8Rng::seed_from_u64(seed));
    let mut s = AgentState::new(Personality::Empathic, rotation, 0);
    s.observe(&AgentEvent::RoundStarted { round_index: 1, at: 0 });
    if guesses_used > 0 {
        s.observe(&AgentEvent::GuessEvaluated {
            guess_index: guesses_used,
            response_time_s: 10.0,
            remaining_solutions: 50,
            revealed_new_letters: true,
            at: 10_000,
        });
    }
    s
}

#[test]
fn priority_picks_min_rank_over_random_subsets() {
    let cat = canonical::catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..10_000u64 {
        let bits: u16 = rng.random_range(1..(1 << 13));
        let set: ContextSet = GameContext::ALL.into_iter().filter(|c| bits & (1 << c.rank()) != 0).collect();
        let want = GameContext::ALL.into_iter().filter(|c| bits & (1 << c.rank()) != 0).min_by_key(|c| c.rank());
        assert_eq!(set.highest_priority(), want);
        let mut state = state_in_round(&cat, trial, 3);
        let reaction = select_reaction(&set, &mut state, &cat).expect("fresh round has every message");
        assert_eq!(reaction.context, want);
    }
}

#[test]
fn spec_selection_examples() {
    let cat = canonical::catalog();
    let mut state = state_in_round(&cat, 1, 0);
    let set: ContextSet = [C::FewerThan6Remaining, C::FastGuess].into_iter().collect();
    let r = select_reaction(&set, &mut state, &cat).unwrap();
    assert_eq!((r.expression, r.message.as_str()), (X::WaveShort, "You're so, so close. You got this!"));
    assert!(select_reaction(&set, &mut state, &cat).is_none());

    let mut state = state_in_round(&cat, 1, 2);
    let r = select_reaction(&[C::Win].into_iter().collect(), &mut state, &cat).unwrap();
    assert_eq!((r.expression, r.message.as_str()), (X::Win, "Two guesses?! Are you a wizard?!"));

    let state = state_in_round(&cat, 1, 0);
    let event = AgentEvent::GuessEvaluated {
        guess_index: 2,
        response_time_s: 3.0,
        remaining_solutions: 5,
        revealed_new_letters: true,
        at: 3_000,
    };
    let set = detect_contexts(&event, &state, &Thresholds::default());
    let want: ContextSet = [C::FewerThan6Remaining, C::FastGuess, C::AdditionalLettersRevealed, C::FewerThan101Remaining]
        .into_iter()
        .collect();
    assert_eq!(set, want);
    assert!(detect_contexts(&AgentEvent::IdleTick { at: 89_000 }, &state, &Thresholds::default()).is_empty());
}

/// A guess event whose top context is `ctx`.
fn trigger(ctx: GameContext, at: u64) -> AgentEvent {
    let guess = |guess_index, remaining, revealed| AgentEvent::GuessEvaluated {
        guess_index,
        response_time_s: 10.0,
        remaining_solutions: remaining,
        revealed_new_letters: revealed,
        at,
    };
    match ctx {
        C::FifthGuess => guess(4, 500, true),
        C::SixthGuess => guess(5, 500, true),
        C::FewerThan101Remaining => guess(2, 50, true),
        C::AdditionalLettersRevealed => guess(2, 500, true),
        C::NoAdditionalLettersRevealed => guess(2, 500, false),
        C::Idle90s => AgentEvent::IdleTick { at },
        other => panic!("no trigger for {other:?}"),
    }
}

#[test]
fn four_message_contexts_rotate_through_all_messages() {
    let cat = canonical::catalog();
    let th = Thresholds::default();
    let four: Vec<GameContext> = GameContext::ALL.into_iter().filter(|c| c.message_count() == 4).collect();
    assert_eq!(four.len(), 7);
    for seed in 0..50 {
        for &ctx in &four {
            let rotation = Rotation::shuffled(&cat, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut state = AgentState::new(Personality::Empathic, rotation, 0);
            let mut seen = BTreeSet::new();
            for round in 1..=4u32 {
                let start = round as u64 * 1_000_000;
                let opening = state.react(&cat, &th, &AgentEvent::RoundStarted { round_index: round, at: start });
                if ctx == C::FirstGuess {
                    seen.insert(opening.unwrap().message);
                    continue;
                }
                let at = start + if ctx == C::Idle90s { 95_000 } else { 10_000 };
                let r = state.react(&cat, &th, &trigger(ctx, at)).unwrap();
                assert_eq!(r.context, Some(ctx));
                seen.insert(r.message);
            }
            let all: BTreeSet<String> = cat.ids_for(ctx).map(|id| cat.rule(id).message.clone()).collect();
            assert_eq!(seen, all, "context {ctx:?} seed {seed}");
        }
    }
}

fn random_event(rng: &mut ChaCha8Rng, clock: &mut u64, guesses: &mut u8) -> Option<AgentEvent> {
    *clock += rng.random_range(500..120_000);
    let at = *clock;
    Some(match rng.random_range(0..10) {
        0 if *guesses < 6 => AgentEvent::GuessRejectedInvalid { pending_guess: *guesses + 1, at },
        0..=2 => AgentEvent::IdleTick { at },
        _ => {
            if *guesses >= 6 {
                return None;
            }
            *guesses += 1;
            AgentEvent::GuessEvaluated {
                guess_index: *guesses,
                response_time_s: rng.random_range(0.5..120.0),
                remaining_solutions: rng.random_range(1..2_315),
                revealed_new_letters: rng.random_bool(0.5),
                at,
            }
        }
    })
}

#[test]
fn fuzzed_sessions_never_repeat_within_a_round() {
    let cat = canonical::catalog();
    let th = Thresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..500 {
        let rotation = Rotation::shuffled(&cat, &mut rng);
        assert!(rotation.is_valid_for(&cat));
        let mut state = AgentState::new(Personality::Empathic, rotation, 0);
        let mut clock = 0u64;
        for round in 1..=4u32 {
            let mut said = BTreeSet::new();
            let mut guesses = 0u8;
            let mut emit = |r: Option<wordlab_core::agent::AgentReaction>| {
                if let Some(r) = r {
                    assert!(said.insert(r.message.clone()), "repeated {:?} in round {round}", r.message);
                }
            };
            emit(state.react(&cat, &th, &AgentEvent::RoundStarted { round_index: round, at: clock }));
            for _ in 0..rng.random_range(5..40) {
                match random_event(&mut rng, &mut clock, &mut guesses) {
                    Some(e) => emit(state.react(&cat, &th, &e)),
                    None => break,
                }
            }
            let won = rng.random_bool(0.5) && guesses > 0;
            let ended = AgentEvent::RoundEnded {
                won,
                guesses_used: if won { guesses } else { 6 },
                at: clock,
            };
            emit(state.react(&cat, &th, &ended));
        }
    }
}

fn is_control_template(s: &str) -> bool {
    let n_in = |n: &str, lo: u8| !n.starts_with('0') && n.parse::<u8>().is_ok_and(|v| (lo..=6).contains(&v));
    if let Some(rest) = s.strip_prefix("Guess ") {
        return rest.strip_suffix(" of 6").is_some_and(|n| n_in(n, 1));
    }
    if let Some(rest) = s.strip_prefix("You won after ") {
        return rest.strip_suffix(" guesses").is_some_and(|n| n_in(n, 1));
    }
    s == "You lost after 6 guesses"
}

#[test]
fn control_agent_emits_only_status_templates() {
    let cat = canonical::catalog();
    let th = Thresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut state = AgentState::new(Personality::Control, Rotation::identity(&cat), 0);
    let mut clock = 0;
    let mut lines = 0;
    for round in 1..=200u32 {
        let mut guesses = 0;
        let mut check = |r: Option<wordlab_core::agent::AgentReaction>| {
            if let Some(r) = r {
                assert_eq!(r.expression, X::Idle);
                assert!(is_control_template(&r.message), "{:?}", r.message);
                lines += 1;
            }
        };
        check(state.react(&cat, &th, &AgentEvent::RoundStarted { round_index: round, at: clock }));
        while let Some(e) = random_event(&mut rng, &mut clock, &mut guesses) {
            check(state.react(&cat, &th, &e));
        }
        let won = rng.random_bool(0.5);
        check(state.react(&cat, &th, &AgentEvent::RoundEnded { won, guesses_used: if won { 4 } else { 6 }, at: clock }));
    }
    assert!(lines > 1_000);
    assert_eq!(control_status(&AgentEvent::GuessEvaluated {
        guess_index: 1,
        response_time_s: 1.0,
        remaining_solutions: 9,
        revealed_new_letters: false,
        at: 0
    }).as_deref(), Some("Guess 2 of 6"));
    assert_eq!(
        control_status(&AgentEvent::RoundEnded { won: true, guesses_used: 4, at: 0 }).as_deref(),
        Some("You won after 4 guesses")
    );
    assert_eq!(
        control_status(&AgentEvent::RoundEnded { won: false, guesses_used: 6, at: 0 }).as_deref(),
        Some("You lost after 6 guesses")
    );
}

proptest! {
    #[test]
    fn exactly_one_reveal_context_per_valid_guess(
        g in 1u8..=6, rt in 0.0f64..200.0, remaining in 1u32..2_315, revealed: bool
    ) {
        let cat = canonical::catalog();
        let state = state_in_round(&cat, 0, 0);
        let e = AgentEvent::GuessEvaluated { guess_index: g, response_time_s: rt, remaining_solutions: remaining, revealed_new_letters: revealed, at: 1 };
        let set = detect_contexts(&e, &state, &Thresholds::default());
        prop_assert!(set.contains(C::AdditionalLettersRevealed) ^ set.contains(C::NoAdditionalLettersRevealed));
    }
}
