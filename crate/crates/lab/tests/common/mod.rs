#![allow(dead_code)]

use wordlab::config::ExperimentConfig;
use wordlab::service::{Assignment, Created, Intake, Lab, Resources, Sex, WordleExperience};
use wordlab_core::agent::{Millis, Thresholds};

pub const MAIN: [&str; 4] = ["plant", "fuzzy", "diner", "image"];

pub fn resources() -> Resources {
    Resources::canonical(Thresholds::default())
}

pub fn config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        simulated_clock: true,
        ..ExperimentConfig::default()
    }
}

pub fn lab(seed: u64) -> Lab {
    Lab::new(config(seed), resources()).unwrap()
}

pub fn intake() -> Intake {
    Intake {
        age: 34,
        sex: Sex::Female,
        native_english: true,
        wordle_experience: WordleExperience::UpToFifty,
    }
}

pub fn chars(n: usize) -> String {
    "abcdefghij".chars().cycle().take(n).collect()
}

/// Creates sessions until one lands in a cell matching `want`.
pub fn session_where(lab: &Lab, want: impl Fn(Assignment) -> bool) -> Created {
    loop {
        let c = lab.create_session(intake(), Some(0)).unwrap();
        if want(c.assignment) {
            return c;
        }
    }
}

/// Submits both elicitation texts; round 1 opens at `at`.
pub fn elicit(lab: &Lab, id: &str, at: Millis) {
    lab.submit_elicitation(id, 0, &chars(150), Some(at)).unwrap();
    let out = lab.submit_elicitation(id, 1, &chars(160), Some(at)).unwrap();
    assert!(out.round.is_some());
}

/// Wins every main round with its first guess, one minute apart.
pub fn play_main_rounds(lab: &Lab, id: &str, mut at: Millis) -> Millis {
    for w in MAIN {
        at += 60_000;
        lab.submit_guess(id, w, None, Some(at)).unwrap();
    }
    at
}

pub fn complete_session(lab: &Lab, id: &str) -> Millis {
    elicit(lab, id, 1_000);
    let at = play_main_rounds(lab, id, 1_000) + 30_000;
    lab.submit_questionnaire(id, 61.0, 64.0, crt_right(), Some(at)).unwrap();
    at
}

pub fn crt_right() -> Vec<String> {
    vec!["5 cents".into(), "5 minutes".into(), "47 days".into()]
}

/// Runs a cohort in a fresh lab and fits the main-effects model on did-win from its CSV export.
pub fn cohort_fit(
    strategist: &mut wordlab::sim::Strategist,
    spec: &wordlab::sim::CohortSpec,
) -> wordlab_core::stats::RegressionResult {
    use wordlab::analysis::{fit_round_dv, round_observations, Dataset, FitOptions, RoundDv, Spec};
    use wordlab::export::{Format, RawTable, TableKind};
    use wordlab::sim::{run_cohort, InProcess, LabClient};

    let mut client = InProcess(std::sync::Arc::new(lab(spec.seed)));
    run_cohort(&mut client, strategist, spec).unwrap();
    let events = client.export(TableKind::Events, Format::Csv).unwrap();
    let participants = client.export(TableKind::Participants, Format::Csv).unwrap();
    let data = Dataset::from_tables(
        &RawTable::parse_csv(&events).unwrap(),
        &RawTable::parse_csv(&participants).unwrap(),
    )
    .unwrap();
    let obs = round_observations(&data).unwrap();
    fit_round_dv(&data, &obs, Spec::Eq1, RoundDv::DidWin, FitOptions::default()).unwrap()
}
