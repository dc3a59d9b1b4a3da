//! Experiment configuration, loadable from TOML.

use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wordlab_core::agent::Thresholds;
use wordlab_core::canonical::MAIN_ROUND_SOLUTIONS;

const CONTROL_PROMPTS: [&str; 2] = [
    "What are three to five activities that you did today? Please write two-three sentences about each activity that you decide to share. (Examples of things you might write about include: walking, eating lunch, brushing your teeth, etc.)",
    "Now, we\u{2019}d like you to describe in more detail the way you typically spend your evenings. Begin by writing down a description of your activities and then figure out how much time you devote to each activity. Examples of things you might describe include eating dinner, studying for an exam, working, talking to friends, watching TV, etc. If you can, please write your description so that someone reading this might be able to reconstruct the way in which you, specifically, spend your evenings.",
];

const ANGER_PROMPTS: [&str; 2] = [
    "What are the three to five things that fill you with anger? Please write two-three sentences about each thing that fills you with anger. (Examples of things you might write about include: being treated unfairly by someone, being insulted or offended, etc.)",
    "Now, we\u{2019}d like you to describe in more detail the one situation that makes you (or has made you) experience the most anger. This could be something you are presently experiencing or something from the past. Begin by writing down what you remember of the anger-inducing event(s) and continue by writing as detailed a description of the event(s) as is possible. If you can, please write your description so that someone reading this might even feel anger just from learning about the situation. What is it like to be in this situation? Why does it make you so feel such anger?",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// The two writing prompts shown to each elicitation condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompts {
    pub control: [String; 2],
    pub anger: [String; 2],
}

impl Default for Prompts {
    fn default() -> Self {
        Prompts {
            control: CONTROL_PROMPTS.map(String::from),
            anger: ANGER_PROMPTS.map(String::from),
        }
    }
}

/// One reflection item; an answer scores if its number equals any accepted value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrtItem {
    pub question: String,
    pub accepted: Vec<f64>,
}

fn default_crt() -> Vec<CrtItem> {
    vec![
        CrtItem {
            question: "A bat and a ball cost $1.10 in total. The bat costs $1.00 more than the ball. How much does the ball cost? (in cents)".into(),
            accepted: vec![5.0, 0.05],
        },
        CrtItem {
            question: "If it takes 5 machines 5 minutes to make 5 widgets, how long would it take 100 machines to make 100 widgets? (in minutes)".into(),
            accepted: vec![5.0],
        },
        CrtItem {
            question: "In a lake, there is a patch of lily pads. Every day, the patch doubles in size. If it takes 48 days for the patch to cover the entire lake, how long would it take for the patch to cover half of the lake? (in days)".into(),
            accepted: vec![47.0],
        },
    ]
}

/// Paths overriding the built-in word lists and catalog.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcePaths {
    pub guesses: Option<PathBuf>,
    pub solutions: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub table_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed of the assignment and bonus-solution draws.
    pub seed: u64,
    /// Solutions of the main rounds, in play order.
    pub main_solutions: Vec<String>,
    pub prompts: Prompts,
    pub min_elicitation_chars: usize,
    pub thresholds: Thresholds,
    pub crt: Vec<CrtItem>,
    /// Accept client-supplied timestamps (`at_ms`) instead of the wall clock.
    pub simulated_clock: bool,
    pub resources: ResourcePaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            main_solutions: MAIN_ROUND_SOLUTIONS.map(String::from).to_vec(),
            prompts: Prompts::default(),
            min_elicitation_chars: 150,
            thresholds: Thresholds::default(),
            crt: default_crt(),
            simulated_clock: false,
            resources: ResourcePaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.main_solutions.is_empty() {
            return Err(ConfigError::Invalid("main_solutions is empty".into()));
        }
        if self.crt.iter().any(|i| i.accepted.is_empty()) {
            return Err(ConfigError::Invalid("every CRT item needs an accepted answer".into()));
        }
        Ok(())
    }

    /// Prompt pair for an elicitation condition.
    pub fn prompts_for(&self, anger: bool) -> &[String; 2] {
        if anger {
            &self.prompts.anger
        } else {
            &self.prompts.control
        }
    }

    /// Number of correct reflection answers. Answers are reduced to their
    /// first number, so "5 cents" and "$0.05" both read as numbers.
    pub fn score_crt(&self, answers: &[String]) -> u8 {
        self.crt
            .iter()
            .zip(answers)
            .filter(|(item, a)| parse_number(a).is_some_and(|v| item.accepted.iter().any(|k| (k - v).abs() < 1e-9)))
            .count() as u8
    }
}

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"-?(?:\d+(?:\.\d*)?|\.\d+)").expect("valid regex"));

/// First number in free text, ignoring thousands separators.
pub fn parse_number(text: &str) -> Option<f64> {
    let cleaned = text.replace(',', "");
    NUMBER.find(&cleaned)?.as_str().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompts_quote_both_conditions() {
        let cfg = ExperimentConfig::default();
        assert!(cfg.prompts_for(true)[0].contains("fill you with anger"));
        assert!(cfg.prompts_for(false)[0].contains("activities that you did today"));
    }

    #[test]
    fn crt_scoring_normalizes_numbers() {
        let cfg = ExperimentConfig::default();
        let a = |xs: [&str; 3]| xs.map(String::from).to_vec();
        assert_eq!(cfg.score_crt(&a(["5 cents", "5 minutes", "47 days"])), 3);
        assert_eq!(cfg.score_crt(&a(["$0.05", "5", "47"])), 3);
        assert_eq!(cfg.score_crt(&a(["10 cents", "100", "24"])), 0);
        assert_eq!(cfg.score_crt(&a(["", "five", "47"])), 1);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial = ExperimentConfig::from_toml("seed = 9\nsimulated_clock = true\n").unwrap();
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.main_solutions, ["plant", "fuzzy", "diner", "image"]);
        assert!(ExperimentConfig::from_toml("sede = 1").is_err());
    }
}
