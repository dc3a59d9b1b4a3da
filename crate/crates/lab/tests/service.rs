mod common;

use std::sync::Arc;
use std::thread;

use common::*;
use wordlab::export::{self, Format, TableKind};
use wordlab::service::session::{draw_assignment, Phase, RoundOutcome};
use wordlab::service::{Lab, ServiceError};
use wordlab_core::agent::Expression;
use wordlab_core::InvalidGuess;

const IDLE_MESSAGES: [&str; 4] = [
    "It's good to think it through carefully.",
    "I believe in you!",
    "It's okay to feel stumped. You'll get it!",
    "This one is a toughy, isn't it?",
];

#[test]
fn assignment_cells_are_balanced_and_independent() {
    let n = 10_000;
    let mut cells = [[0usize; 2]; 2];
    let (mut sa, mut se, mut sae) = (0.0, 0.0, 0.0);
    for serial in 0..n {
        let (a, _) = draw_assignment(7, serial);
        cells[a.anger as usize][a.empathy as usize] += 1;
        let (x, y) = (a.anger as u8 as f64, a.empathy as u8 as f64);
        sa += x;
        se += y;
        sae += x * y;
    }
    for row in cells {
        for c in row {
            let share = c as f64 / n as f64;
            assert!((share - 0.25).abs() <= 0.02, "cell share {share}");
        }
    }
    let n = n as f64;
    let (ma, me) = (sa / n, se / n);
    let corr = (sae / n - ma * me) / (ma * (1.0 - ma) * me * (1.0 - me)).sqrt();
    assert!(corr.abs() <= 0.03, "corr {corr}");
}

#[test]
fn sessions_in_the_store_follow_the_draws() {
    let lab = lab(11);
    for serial in 0..50 {
        let c = lab.create_session(intake(), Some(0)).unwrap();
        assert_eq!(c.assignment, draw_assignment(11, serial).0);
    }
    assert_eq!(lab.len(), 50);
}

#[test]
fn prompts_match_condition() {
    let lab = lab(1);
    let anger = session_where(&lab, |a| a.anger);
    assert!(anger.elicitation_prompts[0].contains("fill you with anger"));
    assert!(anger.elicitation_prompts[1].contains("experience the most anger"));
    let control = session_where(&lab, |a| !a.anger);
    assert!(control.elicitation_prompts[0].contains("activities that you did today"));
    assert!(control.elicitation_prompts[1].contains("spend your evenings"));
    assert!(control.elicitation_prompts.iter().all(|p| !p.contains("anger")));
}

#[test]
fn elicitation_gate_counts_characters() {
    let lab = lab(2);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    let short = lab.submit_elicitation(&id, 0, &chars(149), Some(10)).unwrap();
    assert!(!short.accepted);
    assert_eq!((short.characters, short.required), (149, 150));
    assert!(lab.submit_elicitation(&id, 0, &chars(150), Some(20)).unwrap().accepted);
    let multibyte: String = "é".repeat(150);
    let out = lab.submit_elicitation(&id, 1, &multibyte, Some(30)).unwrap();
    assert!(out.accepted);
    assert_eq!(out.round.unwrap().round_index, 1);
    assert_eq!(lab.state(&id).unwrap().phase, Phase::Rounds);
}

#[test]
fn elicitation_after_rounds_began_is_rejected() {
    let lab = lab(3);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 100);
    let before = lab.state(&id).unwrap();
    assert!(matches!(
        lab.submit_elicitation(&id, 0, &chars(200), Some(200)),
        Err(ServiceError::RoundsAlreadyStarted)
    ));
    assert_eq!(lab.state(&id).unwrap(), before);
}

#[test]
fn unknown_session() {
    let lab = lab(3);
    assert!(matches!(lab.state("nope"), Err(ServiceError::SessionNotFound(_))));
    assert!(matches!(lab.submit_guess("nope", "plant", None, None), Err(ServiceError::SessionNotFound(_))));
    assert!(matches!(lab.idle_ping("nope", None), Err(ServiceError::SessionNotFound(_))));
}

#[test]
fn win_on_third_guess() {
    let lab = lab(4);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    for (i, w) in ["crane", "salet"].iter().enumerate() {
        let out = lab.submit_guess(&id, w, None, Some(10_000 * (i as u64 + 1))).unwrap();
        assert_eq!(out.round.status, RoundOutcome::InProgress);
    }
    let out = lab.submit_guess(&id, "plant", None, Some(30_000)).unwrap();
    assert_eq!(out.round.status, RoundOutcome::Won);
    assert_eq!(out.round.guesses_used, 3);
    assert!(out.pattern.unwrap().is_win());
    assert_eq!(out.next_round.unwrap().round_index, 2);
    let view = lab.state(&id).unwrap();
    assert_eq!(view.rounds[0].solution.unwrap().as_str(), "plant");
    assert_eq!(view.rounds[1].solution, None);
}

#[test]
fn sixth_wrong_guess_loses() {
    let lab = lab(5);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    let words = ["crane", "salet", "fuzzy", "image", "diner", "house"];
    for (i, w) in words.iter().enumerate() {
        let out = lab.submit_guess(&id, w, None, Some(1_000 * (i as u64 + 1))).unwrap();
        let expect = if i == 5 { RoundOutcome::Lost } else { RoundOutcome::InProgress };
        assert_eq!(out.round.status, expect);
        assert_eq!(out.round.guesses_used as usize, i + 1);
    }
    let s = &lab.snapshot()[0];
    assert_eq!(s.rounds[0].valid_guesses(), 6);
    assert_eq!(s.rounds[1].solution.as_str(), "fuzzy");
}

#[test]
fn invalid_guess_keeps_counter_and_candidates() {
    let lab = lab(6);
    let id = session_where(&lab, |a| a.empathy).session_id;
    elicit(&lab, &id, 0);
    lab.submit_guess(&id, "crane", None, Some(10_000)).unwrap();
    let out = lab.submit_guess(&id, "qqqqq", None, Some(20_000)).unwrap();
    assert!(!out.valid);
    assert_eq!(out.invalid_reason, Some(InvalidGuess::NotInWordList));
    assert_eq!(out.pattern, None);
    assert_eq!(out.round.guesses_used, 1);
    let r = out.agent_reaction.unwrap();
    assert!(r.message.starts_with("Oops! I don't know that word!"));
    assert_eq!(r.expression, Expression::Sadness);

    let s = lab.snapshot().into_iter().find(|s| s.id == id).unwrap();
    let g = &s.rounds[0].guesses;
    assert_eq!(g[1].guess_index, 2);
    assert_eq!(g[1].remaining_solutions_after, g[0].remaining_solutions_after);
    assert_eq!(g[1].remaining_words_after, g[0].remaining_words_after);

    let next = lab.submit_guess(&id, "plant", None, Some(30_000)).unwrap();
    assert_eq!(next.round.guesses_used, 2);
}

#[test]
fn invalid_attempts_are_unlimited() {
    let lab = lab(6);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    for i in 0..40 {
        let out = lab.submit_guess(&id, "zzzzz", None, Some(i * 100)).unwrap();
        assert_eq!(out.round.status, RoundOutcome::InProgress);
    }
    assert!(lab.submit_guess(&id, "plant", None, None).unwrap().valid);
}

#[test]
fn control_invalid_reports_status() {
    let lab = lab(6);
    let id = session_where(&lab, |a| !a.empathy).session_id;
    elicit(&lab, &id, 0);
    let out = lab.submit_guess(&id, "qqqqq", None, Some(5_000)).unwrap();
    assert_eq!(out.agent_reaction.unwrap().message, "Guess 1 of 6");
}

#[test]
fn idle_reactions_follow_personality_and_threshold() {
    let lab = lab(8);
    let empathic = session_where(&lab, |a| a.empathy).session_id;
    elicit(&lab, &empathic, 1_000);
    assert_eq!(lab.idle_ping(&empathic, Some(31_000)).unwrap(), None);
    let r = lab.idle_ping(&empathic, Some(92_000)).unwrap().unwrap();
    assert!(IDLE_MESSAGES.contains(&r.message.as_str()), "{}", r.message);

    let control = session_where(&lab, |a| !a.empathy).session_id;
    elicit(&lab, &control, 1_000);
    assert_eq!(lab.idle_ping(&control, Some(201_000)).unwrap(), None);
}

#[test]
fn idle_before_rounds_is_silent() {
    let lab = lab(8);
    let id = session_where(&lab, |a| a.empathy).session_id;
    assert_eq!(lab.idle_ping(&id, Some(500_000)).unwrap(), None);
}

#[test]
fn questionnaire_scoring_and_ranges() {
    let lab = lab(9);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    assert!(matches!(
        lab.submit_questionnaire(&id, 61.0, 64.0, crt_right(), None),
        Err(ServiceError::RoundsIncomplete)
    ));
    let at = play_main_rounds(&lab, &id, 0);
    assert_eq!(lab.state(&id).unwrap().phase, Phase::Questionnaire);
    let before = lab.state(&id).unwrap();
    assert!(matches!(
        lab.submit_questionnaire(&id, 101.0, 64.0, crt_right(), Some(at)),
        Err(ServiceError::OutOfRange(_))
    ));
    assert!(matches!(
        lab.submit_questionnaire(&id, 50.0, -0.5, crt_right(), Some(at)),
        Err(ServiceError::OutOfRange(_))
    ));
    assert_eq!(lab.state(&id).unwrap(), before);
    assert_eq!(lab.submit_questionnaire(&id, 61.0, 64.0, crt_right(), Some(at)).unwrap(), 3);
    assert!(matches!(
        lab.submit_questionnaire(&id, 61.0, 64.0, crt_right(), Some(at)),
        Err(ServiceError::QuestionnaireAlreadySubmitted)
    ));
    let view = lab.state(&id).unwrap();
    assert_eq!((view.phase, view.crt_score), (Phase::Bonus, Some(3)));
}

#[test]
fn intuitive_answers_score_zero() {
    let lab = lab(9);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    play_main_rounds(&lab, &id, 0);
    let wrong = vec!["10 cents".to_owned(), "100".to_owned(), "24".to_owned()];
    assert_eq!(lab.submit_questionnaire(&id, 10.0, 90.0, wrong, None).unwrap(), 0);
}

#[test]
fn bonus_rounds() {
    let lab = lab(10);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    play_main_rounds(&lab, &id, 0);
    assert!(matches!(lab.start_bonus_round(&id, None), Err(ServiceError::QuestionnaireMissing)));
    lab.submit_questionnaire(&id, 61.0, 64.0, crt_right(), None).unwrap();
    let opening = lab.start_bonus_round(&id, None).unwrap();
    assert!(opening.is_bonus);
    assert_eq!(opening.round_index, 5);
    assert_eq!(lab.state(&id).unwrap().bonus_rounds_started, 1);
    assert!(matches!(lab.start_bonus_round(&id, None), Err(ServiceError::RoundInProgress)));

    let solution = lab.snapshot()[0].rounds[4].solution;
    assert!(!MAIN.contains(&solution.as_str()));
    let out = lab.submit_guess(&id, solution.as_str(), None, None).unwrap();
    assert_eq!(out.round.status, RoundOutcome::Won);
    assert!(out.round.is_bonus);
    assert_eq!(out.next_round, None);
    assert!(matches!(lab.submit_guess(&id, "plant", None, None), Err(ServiceError::RoundAlreadyOver)));
    lab.start_bonus_round(&id, None).unwrap();
    assert_eq!(lab.state(&id).unwrap().bonus_rounds_started, 2);
}

#[test]
fn bonus_solutions_avoid_main_words() {
    let lab = lab(12);
    for _ in 0..30 {
        let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
        complete_session(&lab, &id);
        for _ in 0..3 {
            lab.start_bonus_round(&id, None).unwrap();
            let s = lab.snapshot().into_iter().find(|s| s.id == id).unwrap();
            let sol = s.rounds.last().unwrap().solution;
            assert!(!MAIN.contains(&sol.as_str()));
            lab.submit_guess(&id, sol.as_str(), None, None).unwrap();
        }
    }
}

#[test]
fn out_of_order_calls_leave_state_unchanged() {
    let lab = lab(13);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    let before = lab.state(&id).unwrap();
    assert!(matches!(lab.submit_guess(&id, "plant", None, None), Err(ServiceError::NoActiveRound)));
    assert!(matches!(
        lab.submit_questionnaire(&id, 1.0, 1.0, crt_right(), None),
        Err(ServiceError::RoundsIncomplete)
    ));
    assert!(matches!(lab.start_bonus_round(&id, None), Err(ServiceError::QuestionnaireMissing)));
    assert!(matches!(
        lab.submit_elicitation(&id, 2, &chars(150), None),
        Err(ServiceError::OutOfRange(_))
    ));
    assert_eq!(lab.state(&id).unwrap(), before);
    assert_eq!(lab.snapshot()[0].submissions(), 0);
}

#[test]
fn sequence_numbers_make_guesses_idempotent() {
    let lab = lab(14);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    let first = lab.submit_guess(&id, "crane", Some(1), Some(5_000)).unwrap();
    let again = lab.submit_guess(&id, "crane", Some(1), Some(9_000)).unwrap();
    assert_eq!(first, again);
    assert_eq!(lab.snapshot()[0].rounds[0].guesses.len(), 1);
    assert!(matches!(
        lab.submit_guess(&id, "salet", Some(3), None),
        Err(ServiceError::SequenceGap { expected: 2, got: 3 })
    ));
    assert!(matches!(lab.submit_guess(&id, "salet", Some(0), None), Err(ServiceError::OutOfRange(_))));
    assert_eq!(lab.submit_guess(&id, "salet", Some(2), None).unwrap().seq, 2);
}

#[test]
fn timestamps_never_run_backwards() {
    let lab = lab(15);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 50_000);
    lab.submit_guess(&id, "crane", None, Some(10_000)).unwrap();
    lab.submit_guess(&id, "salet", None, Some(70_000)).unwrap();
    let s = &lab.snapshot()[0];
    let g = &s.rounds[0].guesses;
    assert_eq!(g[0].submitted_at, 50_000);
    assert_eq!(g[0].response_time_s, 0.0);
    assert_eq!(g[1].response_time_s, 20.0);
}

#[test]
fn response_time_of_first_guess_counts_from_round_start() {
    let lab = lab(15);
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 10_000);
    lab.submit_guess(&id, "crane", None, Some(17_500)).unwrap();
    lab.submit_guess(&id, "plant", None, Some(20_000)).unwrap();
    lab.submit_guess(&id, "crane", None, Some(29_000)).unwrap();
    let s = &lab.snapshot()[0];
    assert_eq!(s.rounds[0].guesses[0].response_time_s, 7.5);
    assert_eq!(s.rounds[1].guesses[0].response_time_s, 9.0);
}

#[test]
fn wall_clock_ignores_client_time_unless_simulated() {
    let mut config = config(16);
    config.simulated_clock = false;
    let lab = Lab::new(config, resources()).unwrap().with_clock(|| 42);
    let id = lab.create_session(intake(), Some(999)).unwrap().session_id;
    elicit(&lab, &id, 5_000);
    lab.submit_guess(&id, "crane", None, Some(9_999)).unwrap();
    let s = &lab.snapshot()[0];
    assert_eq!(s.created_at, 42);
    assert_eq!(s.rounds[0].guesses[0].submitted_at, 42);
}

#[test]
fn out_of_range_intake() {
    let lab = lab(17);
    let mut i = intake();
    i.age = 200;
    assert!(matches!(lab.create_session(i, None), Err(ServiceError::OutOfRange(_))));
    assert!(lab.is_empty());
}

#[test]
fn config_must_name_pool_solutions() {
    let mut c = config(0);
    c.main_solutions = vec!["plant".into(), "zzzzz".into()];
    assert!(matches!(Lab::new(c, resources()), Err(ServiceError::Config(_))));
}

fn scripted(lab: &Lab) {
    for k in 0..3u64 {
        let id = lab.create_session(intake(), Some(k)).unwrap().session_id;
        elicit(lab, &id, 1_000);
        lab.submit_guess(&id, "crane", Some(1), Some(5_000)).unwrap();
        lab.submit_guess(&id, "qqqqq", Some(2), Some(6_000)).unwrap();
        lab.idle_ping(&id, Some(100_000)).unwrap();
        lab.submit_guess(&id, "plant", Some(3), Some(120_000)).unwrap();
        if k > 0 {
            for w in ["fuzzy", "diner", "image"] {
                lab.submit_guess(&id, w, None, Some(130_000)).unwrap();
            }
            lab.submit_questionnaire(&id, 20.0, 30.0, crt_right(), Some(140_000)).unwrap();
            lab.start_bonus_round(&id, Some(150_000)).unwrap();
        }
    }
}

fn exports(lab: &Lab) -> Vec<String> {
    let sessions = lab.snapshot();
    TableKind::ALL.iter().map(|&k| export::table(&sessions, k).render(Format::Jsonl)).collect()
}

#[test]
fn log_replay_restores_every_session() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.log");
    let live = Lab::open(config(20), resources(), &path).unwrap();
    scripted(&live);
    let expected = exports(&live);
    let views: Vec<_> = live.snapshot().iter().map(|s| s.view()).collect();
    drop(live);

    let restored = Lab::open(config(20), resources(), &path).unwrap();
    assert_eq!(exports(&restored), expected);
    assert_eq!(restored.snapshot().iter().map(|s| s.view()).collect::<Vec<_>>(), views);

    let id = restored.snapshot()[0].id.clone();
    assert_eq!(restored.submit_guess(&id, "plant", Some(3), None).unwrap().seq, 3);
    restored.submit_guess(&id, "fuzzy", Some(4), Some(200_000)).unwrap();
    drop(restored);
    let again = Lab::open(config(20), resources(), &path).unwrap();
    assert_eq!(again.snapshot()[0].submissions(), 4);
}

#[test]
fn torn_final_record_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.log");
    let live = Lab::open(config(21), resources(), &path).unwrap();
    scripted(&live);
    let expected = exports(&live);
    drop(live);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.extend_from_slice(br#"{"session":"abc","at":5,"op":"gue"#);
    std::fs::write(&path, bytes).unwrap();

    let restored = Lab::open(config(21), resources(), &path).unwrap();
    assert_eq!(exports(&restored), expected);
    let id = restored.create_session(intake(), Some(0)).unwrap().session_id;
    drop(restored);
    let again = Lab::open(config(21), resources(), &path).unwrap();
    assert!(again.state(&id).is_ok());
}

#[test]
fn rejected_calls_are_not_logged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.log");
    let live = Lab::open(config(22), resources(), &path).unwrap();
    let id = live.create_session(intake(), Some(0)).unwrap().session_id;
    live.submit_elicitation(&id, 0, "short", Some(1)).unwrap();
    let _ = live.submit_guess(&id, "plant", None, None);
    let _ = live.start_bonus_round(&id, None);
    drop(live);
    let lines = std::fs::read_to_string(&path).unwrap().lines().count();
    assert_eq!(lines, 1);
}

#[test]
fn concurrent_sessions_are_isolated() {
    let lab = Arc::new(lab(23));
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let lab = Arc::clone(&lab);
            thread::spawn(move || {
                let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
                complete_session(&lab, &id);
                id
            })
        })
        .collect();
    let ids: Vec<String> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(lab.len(), 8);
    for id in ids {
        let v = lab.state(&id).unwrap();
        assert_eq!(v.phase, Phase::Bonus);
        assert!(v.rounds.iter().all(|r| r.status == RoundOutcome::Won));
    }
}

#[test]
fn concurrent_guesses_on_one_session_are_serialized() {
    let lab = Arc::new(lab(24));
    let id = lab.create_session(intake(), Some(0)).unwrap().session_id;
    elicit(&lab, &id, 0);
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let (lab, id) = (Arc::clone(&lab), id.clone());
            thread::spawn(move || {
                for _ in 0..10 {
                    lab.submit_guess(&id, "xxxxx", None, None).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let s = &lab.snapshot()[0];
    let seqs: Vec<u64> = s.rounds[0].guesses.iter().map(|g| g.seq).collect();
    assert_eq!(seqs, (1..=60).collect::<Vec<_>>());
}
