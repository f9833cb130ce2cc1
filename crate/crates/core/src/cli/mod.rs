//! Command-line front end.
//!
//! ```text
//! gaopt solve  --problem {linear|onemax|xor} [--genes N] [--generations N] [--pop N]
//!              [--parents N] [--seed N] [--selection NAME] [--crossover NAME|none]
//!              [--mutation NAME|none] [--mutation-percent P] [--keep-parents K]
//!              [--config PATH] [--out PATH.csv] [--svg PATH.svg]
//! gaopt report --in PATH.csv --svg PATH.svg
//! ```
//!
//! Settings are layered: problem preset, then the `--config` file, then
//! flags. Exit codes: 0 success, 2 usage, 3 configuration, 4 runtime.

pub mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand as ClapSubcommand};
use thiserror::Error;

use crate::config::{
    ConfigError, CrossoverKind, GaConfig, Interval, MutationKind, ParentSelection, Rate, RateSpec,
    CONFIG_KEYS,
};
use crate::engine::{self, EngineError, FitnessFunction, LifecycleHooks, RunResult};
use crate::genome::Population;
use crate::problems::{ClassificationProblem, LinearEquationProblem, OneMaxProblem};

pub use report::{fitness_csv, parse_fitness_csv, render_fitness_svg, ReportError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("usage error: {message}")]
pub struct UsageError {
    /// The argument that could not be parsed.
    pub token: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config file line {line}: {reason}")]
pub struct ConfigFileError {
    pub line: usize,
    pub reason: String,
}

/// Every failure of a CLI command, each mapped to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] UsageError),
    #[error(transparent)]
    ConfigFile(#[from] ConfigFileError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("initial population: {0}")]
    InitialPopulation(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::ConfigFile(_) | Self::Config(_) | Self::InitialPopulation(_) => EXIT_CONFIG,
            Self::Engine(EngineError::Config(_)) => EXIT_CONFIG,
            Self::Engine(_) | Self::Report(_) | Self::Io { .. } => EXIT_RUNTIME,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Report,
}

/// A parsed command line. `flags` uses configuration-file key names
/// (`num_genes`, `sol_per_pop`, …) plus `problem`, `out`, `svg` and `in`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub subcommand: Subcommand,
    pub flags: BTreeMap<String, String>,
    pub config_path: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(name = "gaopt", version, about = "Genetic algorithm benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand, Debug)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run the genetic algorithm on a built-in problem.
    Solve(SolveArgs),
    /// Render an SVG chart from a fitness CSV.
    Report(ReportArgs),
}

fn operator_name<T: std::str::FromStr<Err = String>>(s: &str) -> Result<String, String> {
    crate::config::parse_optional::<T>(s).map(|_| s.to_string())
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_parser = ["linear", "onemax", "xor"])]
    problem: Option<String>,
    #[arg(long)]
    genes: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    parents: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = operator_name::<ParentSelection>)]
    selection: Option<String>,
    #[arg(long, value_parser = operator_name::<CrossoverKind>)]
    crossover: Option<String>,
    #[arg(long, value_parser = operator_name::<MutationKind>)]
    mutation: Option<String>,
    #[arg(long = "mutation-percent")]
    mutation_percent: Option<f64>,
    #[arg(long = "keep-parents", allow_hyphen_values = true)]
    keep_parents: Option<i64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    svg: PathBuf,
}

fn offending_token(err: &clap::Error) -> String {
    for kind in [
        ContextKind::InvalidValue,
        ContextKind::InvalidArg,
        ContextKind::InvalidSubcommand,
    ] {
        match err.get(kind) {
            Some(ContextValue::String(s)) => return s.clone(),
            Some(ContextValue::Strings(v)) if !v.is_empty() => return v[0].clone(),
            _ => {}
        }
    }
    String::new()
}

/// Parses `argv` (without the program name).
///
/// `Err(Ok(text))` carries help or version output that should be printed
/// with exit code 0.
pub fn parse_invocation<I, T>(argv: I) -> Result<CliInvocation, Result<String, UsageError>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = std::iter::once(OsString::from("gaopt")).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Err(Ok(e.render().to_string()))
        }
        Err(e) => {
            return Err(Err(UsageError {
                token: offending_token(&e),
                message: e.render().to_string().trim_end().to_string(),
            }))
        }
    };
    let mut flags = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            flags.insert(k.to_string(), v);
        }
    };
    let s = |v: Option<usize>| v.map(|v| v.to_string());
    Ok(match cli.command {
        Command::Solve(a) => {
            put("problem", a.problem);
            put("num_genes", s(a.genes));
            put("num_generations", s(a.generations));
            put("sol_per_pop", s(a.pop));
            put("num_parents_mating", s(a.parents));
            put("seed", a.seed.map(|v| v.to_string()));
            put("parent_selection", a.selection);
            put("crossover", a.crossover);
            put("mutation", a.mutation);
            put(
                "mutation_rate",
                a.mutation_percent.map(|p| format!("percent_genes:{p}")),
            );
            put("keep_parents", a.keep_parents.map(|v| v.to_string()));
            put("out", a.out.map(|p| p.display().to_string()));
            put("svg", a.svg.map(|p| p.display().to_string()));
            CliInvocation {
                subcommand: Subcommand::Solve,
                flags,
                config_path: a.config,
            }
        }
        Command::Report(a) => {
            put("in", Some(a.input.display().to_string()));
            put("svg", Some(a.svg.display().to_string()));
            CliInvocation {
                subcommand: Subcommand::Report,
                flags,
                config_path: None,
            }
        }
    })
}

/// Keys a configuration file may set.
pub fn is_config_key(key: &str) -> bool {
    key == "problem" || key == "initial_population" || CONFIG_KEYS.contains(&key)
}

/// Parses `key=value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config_str(text: &str) -> Result<BTreeMap<String, String>, ConfigFileError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigFileError {
                line,
                reason: "expected key=value".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigFileError {
                line,
                reason: "empty key".into(),
            });
        }
        if !is_config_key(key) {
            return Err(ConfigFileError {
                line,
                reason: format!("unknown key `{key}`"),
            });
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigFileError {
                line,
                reason: "duplicate".into(),
            });
        }
    }
    Ok(map)
}

pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::ConfigFile(ConfigFileError {
            line: 0,
            reason: format!("{}: {e}", path.display()),
        })
    })?;
    Ok(parse_config_str(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Linear,
    OneMax,
    Xor,
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "onemax" => Ok(Self::OneMax),
            "xor" => Ok(Self::Xor),
            _ => Err(format!("unknown problem `{s}`")),
        }
    }
}

impl ProblemKind {
    pub const DEFAULT_ADAPTIVE: RateSpec = RateSpec::AdaptivePair {
        high: Rate::PercentGenes(20.0),
        low: Rate::PercentGenes(5.0),
    };

    pub fn fitness(self, num_genes: usize) -> Box<dyn FitnessFunction> {
        match self {
            Self::Linear => Box::new(LinearEquationProblem::reference()),
            Self::OneMax => Box::new(OneMaxProblem::new(num_genes)),
            Self::Xor => Box::new(ClassificationProblem::xor()),
        }
    }

    /// Starting configuration for the problem.
    pub fn preset(self) -> GaConfig {
        match self {
            Self::Linear => GaConfig::new(100, 10, 5, 3),
            Self::OneMax => {
                let mut cfg = GaConfig::new(1000, 50, 10, 100);
                cfg.keep_parents = 2;
                cfg.mutation = Some(MutationKind::Adaptive);
                cfg.mutation_rate = Self::DEFAULT_ADAPTIVE;
                OneMaxProblem::new(100).configure(&mut cfg);
                cfg
            }
            Self::Xor => {
                let mut cfg = GaConfig::new(500, 50, 10, 9);
                cfg.keep_parents = 2;
                cfg.mutation = Some(MutationKind::Adaptive);
                cfg.mutation_rate = RateSpec::AdaptivePair {
                    high: Rate::PercentGenes(50.0),
                    low: Rate::PercentGenes(20.0),
                };
                cfg.random_delta_range = Interval::new(-2.0, 2.0);
                cfg
            }
        }
    }
}

/// Fully resolved `solve` settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub problem: ProblemKind,
    pub config: GaConfig,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Merges preset, config file and flags (flags win) and validates the result.
pub fn build_settings(
    file: &BTreeMap<String, String>,
    flags: &BTreeMap<String, String>,
) -> Result<SolveSettings, CliError> {
    let lookup = |k: &str| flags.get(k).or_else(|| file.get(k));
    let problem: ProblemKind = match lookup("problem") {
        Some(p) => p.parse().map_err(|reason: String| {
            if flags.contains_key("problem") {
                CliError::Usage(UsageError {
                    token: p.clone(),
                    message: reason,
                })
            } else {
                CliError::Config(ConfigError {
                    field: "problem".into(),
                    constraint: "linear, onemax or xor".into(),
                    got: p.clone(),
                })
            }
        })?,
        None => ProblemKind::Linear,
    };
    let mut cfg = problem.preset();
    let preset_rate = cfg.mutation_rate;
    for layer in [file, flags] {
        for (key, value) in layer {
            if CONFIG_KEYS.contains(&key.as_str()) {
                cfg.set(key, value)?;
            }
        }
    }
    if lookup("mutation_rate").is_none() {
        // keep the preset's rate only if it fits the chosen mutation kind
        cfg.mutation_rate = match (cfg.mutation, preset_rate) {
            (Some(MutationKind::Adaptive), RateSpec::Fixed(_)) => ProblemKind::DEFAULT_ADAPTIVE,
            (Some(k), RateSpec::AdaptivePair { .. }) if k != MutationKind::Adaptive => {
                RateSpec::Fixed(Rate::PercentGenes(10.0))
            }
            (_, rate) => rate,
        };
    }
    if let Some(path) = lookup("initial_population") {
        let pop = Population::read_csv(Path::new(path))
            .map_err(|e| CliError::InitialPopulation(e.to_string()))?;
        cfg.initial_population = Some(pop);
    }
    let config = cfg.validate()?;
    Ok(SolveSettings {
        problem,
        config,
        out: flags.get("out").map(PathBuf::from),
        svg: flags.get("svg").map(PathBuf::from),
    })
}

/// Runs the engine on the selected built-in problem.
pub fn solve(settings: &SolveSettings) -> Result<RunResult, EngineError> {
    let cfg = &settings.config;
    let fitness = settings.problem.fitness(cfg.num_genes);
    engine::run(cfg, fitness.as_ref(), LifecycleHooks::new())
}

/// `best=<genes> fitness=<f> index=<i>`.
pub fn summary_line(result: &RunResult) -> String {
    let (solution, fitness, index) = result.best_solution();
    format!("best={solution} fitness={fitness} index={index}")
}

pub fn run_solve(inv: &CliInvocation, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = match &inv.config_path {
        Some(p) => load_config_file(p)?,
        None => BTreeMap::new(),
    };
    let settings = build_settings(&file, &inv.flags)?;
    let result = solve(&settings)?;
    writeln!(stdout, "{}", summary_line(&result)).map_err(io_error(Path::new("<stdout>")))?;
    let csv = fitness_csv(&result.fitness_history());
    if let Some(path) = &settings.out {
        std::fs::write(path, &csv).map_err(io_error(path))?;
    }
    if let Some(path) = &settings.svg {
        // chart the values exactly as the CSV stores them
        let svg = render_fitness_svg(&parse_fitness_csv(&csv)?)?;
        std::fs::write(path, svg).map_err(io_error(path))?;
    }
    Ok(())
}

pub fn run_report(inv: &CliInvocation) -> Result<(), CliError> {
    let input = PathBuf::from(&inv.flags["in"]);
    let output = PathBuf::from(&inv.flags["svg"]);
    let text = std::fs::read_to_string(&input).map_err(io_error(&input))?;
    let svg = render_fitness_svg(&parse_fitness_csv(&text)?)?;
    std::fs::write(&output, svg).map_err(io_error(&output))?;
    Ok(())
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match parse_invocation(argv) {
        Ok(inv) => inv,
        Err(Ok(text)) => {
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
        Err(Err(usage)) => {
            let _ = writeln!(stderr, "{}", usage.message);
            return EXIT_USAGE;
        }
    };
    let outcome = match inv.subcommand {
        Subcommand::Solve => run_solve(&inv, stdout),
        Subcommand::Report => run_report(&inv),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
