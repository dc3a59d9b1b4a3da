use std::error::Error;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wordlab::analysis::{self, AnalysisRequest, Dataset, Dv, Feature, FitOptions, FrequencyTable, SentimentTable, Spec};
use wordlab::config::ExperimentConfig;
use wordlab::export::{self, Format, TableKind};
use wordlab::service::log::read_log;
use wordlab::service::{http, Lab, Resources};
use wordlab::sim::{self, CohortSpec, EffectInjection, HttpClient, InProcess, LabClient, PolicyKind, Strategist};
use wordlab_core::entropy::EntropyEngine;
use wordlab_core::stats::CovarianceKind;
use wordlab_core::{canonical, FeedbackPattern, PoolKind, Word};

type AnyResult<T = ()> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "wordlab", version, about = "Affective word-game lab: service, analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Candidate tracking utilities.
    Entropy {
        #[command(subcommand)]
        command: EntropyCommand,
    },
    /// Regression tables from exported telemetry.
    Analyze(AnalyzeArgs),
    /// Run a cohort of bots and export its data.
    Simulate(SimulateArgs),
    /// Serve the HTTP JSON API.
    Serve(ServeArgs),
    /// Export a persisted event log.
    Export(ExportArgs),
    /// Print the default configuration as TOML.
    DefaultConfig,
}

#[derive(Subcommand)]
enum EntropyCommand {
    /// Bits remaining after each guess of a history file.
    Trace {
        /// Lines of `guess pattern`, the pattern as five symbols or its code.
        #[arg(long)]
        history: PathBuf,
        #[arg(long, default_value = "solutions")]
        pool: PoolArg,
        #[arg(long, requires = "solutions")]
        guesses: Option<PathBuf>,
        #[arg(long, requires = "guesses")]
        solutions: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Solutions,
    Words,
}

impl From<PoolArg> for PoolKind {
    fn from(p: PoolArg) -> Self {
        match p {
            PoolArg::Solutions => PoolKind::Solutions,
            PoolArg::Words => PoolKind::Guesses,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpecArg {
    Eq1,
    Eq2,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureArg {
    Crt,
    NeverPlayed,
    Female,
}

#[derive(Clone, Copy, ValueEnum)]
enum DvArg {
    Didwin,
    Guesses,
    GuessesAdj,
    Bits,
}

#[derive(Clone, Copy, ValueEnum)]
enum CovArg {
    Cr1,
    Cr0,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Event export (.csv or .jsonl).
    #[arg(long)]
    events: PathBuf,
    /// Participant export (.csv or .jsonl).
    #[arg(long)]
    participants: PathBuf,
    /// Model; all models when omitted.
    #[arg(long)]
    spec: Option<SpecArg>,
    /// Heterogeneity feature for eq2.
    #[arg(long = "h")]
    feature: Option<FeatureArg>,
    /// Dependent variable; all when omitted.
    #[arg(long)]
    dv: Option<DvArg>,
    /// Pool for the bits DV; both when omitted.
    #[arg(long)]
    pool: Option<PoolArg>,
    #[arg(long)]
    round_fe: bool,
    /// `word,frequency` lines.
    #[arg(long)]
    freq_table: Option<PathBuf>,
    /// `word,label` lines with positive, neutral or negative labels.
    #[arg(long)]
    sentiment: Option<PathBuf>,
    #[arg(long, default_value = "cr1")]
    covariance: CovArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value = "noisy")]
    policy: String,
    #[arg(long, default_value_t = 0.7)]
    skill: f64,
    /// Skill offsets, e.g. `anger=-0.1,empathy=0.05,interaction=0.1`.
    #[arg(long, default_value = "")]
    inject: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Drive a running service instead of an in-process one.
    #[arg(long)]
    url: Option<String>,
    /// Experiment config for the in-process service.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: FormatArg,
    #[arg(long, default_value_t = 0.2)]
    bonus_rate: f64,
    #[arg(long, default_value_t = 0.05)]
    invalid_rate: f64,
    /// Elicitation minimum of the remote service.
    #[arg(long, default_value_t = 150)]
    min_chars: usize,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Append-only event log; replayed on start.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: FormatArg,
}

fn load_config(path: Option<&Path>) -> AnyResult<ExperimentConfig> {
    Ok(match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    })
}

fn trace(history: &Path, pool: PoolKind, guesses: Option<&Path>, solutions: Option<&Path>) -> AnyResult {
    let lexicon = match (guesses, solutions) {
        (Some(g), Some(s)) => wordlab::io::load_lexicon(g, s)?,
        _ => canonical::lexicon(),
    };
    let text = fs::read_to_string(history).map_err(|e| format!("{}: {e}", history.display()))?;
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (w, p) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("line {}: expected `guess pattern`", i + 1))?;
        let word = Word::new(&w.to_ascii_lowercase()).map_err(|e| format!("line {}: {e}", i + 1))?;
        let pattern: FeedbackPattern = p.parse().map_err(|e| format!("line {}: {e}", i + 1))?;
        steps.push((word, pattern));
    }
    let engine = EntropyEngine::new(lexicon);
    println!("guess\tword\tpattern\tremaining\tbits");
    for (obs, (w, p)) in engine.trajectory(&steps, pool)?.iter().zip(&steps) {
        println!("{}\t{w}\t{p}\t{}\t{:.4}", obs.guess_index, obs.remaining, obs.bits);
    }
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> AnyResult {
    let data = Dataset::load(&args.events, &args.participants)?;
    let spec = match (args.spec, args.feature) {
        (None, None) => None,
        (Some(SpecArg::Eq1), None) => Some(Spec::Eq1),
        (Some(SpecArg::Eq1), Some(_)) => return Err("--h applies only to --spec eq2".into()),
        (Some(SpecArg::Eq2) | None, Some(f)) => Some(Spec::Eq2(match f {
            FeatureArg::Crt => Feature::Crt,
            FeatureArg::NeverPlayed => Feature::NeverPlayed,
            FeatureArg::Female => Feature::Female,
        })),
        (Some(SpecArg::Eq2), None) => return Err("--spec eq2 needs --h crt|never-played|female".into()),
    };
    let dv = args.dv.map(|d| match d {
        DvArg::Didwin => Dv::Round(analysis::RoundDv::DidWin),
        DvArg::Guesses => Dv::Round(analysis::RoundDv::Guesses),
        DvArg::GuessesAdj => Dv::Round(analysis::RoundDv::GuessesAdjusted),
        DvArg::Bits => Dv::Bits,
    });
    let mut warnings = Vec::new();
    let frequency = analysis::load_lookup(args.freq_table.as_deref(), FrequencyTable::parse, &mut warnings);
    let sentiment = analysis::load_lookup(args.sentiment.as_deref(), SentimentTable::parse, &mut warnings);
    let req = AnalysisRequest {
        spec,
        dv,
        pool: args.pool.map(Into::into),
        options: FitOptions {
            covariance: match args.covariance {
                CovArg::Cr1 => CovarianceKind::Cr1,
                CovArg::Cr0 => CovarianceKind::Cr0,
            },
            round_fixed_effects: args.round_fe,
        },
        frequency,
        sentiment,
    };
    let mut report = analysis::analyze(&data, &req)?;
    warnings.append(&mut report.warnings);
    for w in &warnings {
        log::warn!("{w}");
    }
    for table in &report.tables {
        table.write(&args.out)?;
        println!("{}", table.to_text());
    }
    Ok(())
}

fn write_exports(client: &mut impl LabClient, out: &Path, format: Format) -> AnyResult {
    fs::create_dir_all(out)?;
    for kind in TableKind::ALL {
        let path = out.join(format!("{}.{}", kind.name(), format.extension()));
        fs::write(&path, client.export(kind, format)?)?;
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> AnyResult {
    let policy: PolicyKind = args.policy.parse()?;
    let injection: EffectInjection = args.inject.parse()?;
    let mut spec = CohortSpec::new(args.n, policy, args.skill, args.seed);
    spec.injection = injection;
    spec.bonus_rate = args.bonus_rate;
    spec.invalid_rate = args.invalid_rate;
    let format: Format = args.format.into();
    let mut config = load_config(args.config.as_deref())?;
    let resources = Resources::from_config(&config)?;
    let mut strategist = Strategist::new(&resources.engine);
    let summary = match &args.url {
        Some(url) => {
            let mut client = HttpClient::new(url, args.min_chars)?;
            let s = sim::run_cohort(&mut client, &mut strategist, &spec)?;
            write_exports(&mut client, &args.out, format)?;
            s
        }
        None => {
            config.seed = args.seed;
            config.simulated_clock = true;
            let lab = Arc::new(Lab::new(config, resources.clone())?);
            let mut client = InProcess(lab);
            let s = sim::run_cohort(&mut client, &mut strategist, &spec)?;
            write_exports(&mut client, &args.out, format)?;
            s
        }
    };
    println!(
        "{} sessions, {} of {} rounds won, {} invalid submissions, {} idle reactions",
        summary.sessions, summary.rounds_won, summary.rounds_played, summary.invalid_submissions, summary.idle_reactions
    );
    Ok(())
}

fn serve(args: &ServeArgs) -> AnyResult {
    let config = load_config(args.config.as_deref())?;
    let resources = Resources::from_config(&config)?;
    let lab = match &args.log {
        Some(p) => Lab::open(config, resources, p)?,
        None => Lab::new(config, resources)?,
    };
    log::info!("{} sessions restored", lab.len());
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(http::serve(Arc::new(lab), args.addr))?;
    Ok(())
}

fn export_log(args: &ExportArgs) -> AnyResult {
    let config = load_config(args.config.as_deref())?;
    let resources = Resources::from_config(&config)?;
    let lab = Lab::replay(config, resources, read_log(&args.log)?)?;
    for path in export::write_all(&lab.snapshot(), &args.out, args.format.into())? {
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> AnyResult {
    match cli.command {
        Command::Entropy {
            command:
                EntropyCommand::Trace {
                    history,
                    pool,
                    guesses,
                    solutions,
                },
        } => trace(&history, pool.into(), guesses.as_deref(), solutions.as_deref()),
        Command::Analyze(a) => analyze(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Serve(a) => serve(&a),
        Command::Export(a) => export_log(&a),
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default().to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
