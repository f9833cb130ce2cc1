//! Run parameters and their validation.
//!
//! [`GaConfig`] doubles as the unvalidated candidate and the validated
//! result: [`GaConfig::validate`] checks every invariant in field
//! declaration order, reports the first violation, and returns a
//! normalized copy (`keep_parents = -1` rewritten to `num_parents_mating`).
//! Field names are also the keys accepted by [`GaConfig::set`] and by the
//! CLI configuration file.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::genome::{GeneSpace, GeneSpaceSpec, GeneTypeSpec, Population};

/// A violated parameter constraint.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: expected {constraint}, got {got}")]
pub struct ConfigError {
    pub field: String,
    pub constraint: String,
    pub got: String,
}

impl ConfigError {
    fn new(field: &str, constraint: impl Into<String>, got: impl fmt::Display) -> Self {
        Self {
            field: field.to_string(),
            constraint: constraint.into(),
            got: got.to_string(),
        }
    }
}

/// Half-open real interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = rng.random_range(self.lo..self.hi);
        // random_range on floats may round up to the open bound.
        if v >= self.hi {
            self.lo
        } else {
            v
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.lo, self.hi)
    }
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
        let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
        let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentSelection {
    SteadyState,
    Roulette,
    StochasticUniversal,
    Rank,
    Tournament { k: usize },
    Random,
}

impl ParentSelection {
    pub const DEFAULT_TOURNAMENT_K: usize = 3;

    pub fn name(&self) -> &'static str {
        match self {
            Self::SteadyState => "steady_state",
            Self::Roulette => "roulette",
            Self::StochasticUniversal => "stochastic_universal",
            Self::Rank => "rank",
            Self::Tournament { .. } => "tournament",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for ParentSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tournament { k } => write!(f, "tournament:{k}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ParentSelection {
    type Err = String;

    /// `tournament` takes an optional `:K` suffix (default 3).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let kind = match (head, arg) {
            ("steady_state" | "sss", None) => Self::SteadyState,
            ("roulette" | "rws", None) => Self::Roulette,
            ("stochastic_universal" | "sus", None) => Self::StochasticUniversal,
            ("rank", None) => Self::Rank,
            ("random", None) => Self::Random,
            ("tournament", None) => Self::Tournament {
                k: Self::DEFAULT_TOURNAMENT_K,
            },
            ("tournament", Some(k)) => Self::Tournament {
                k: k.parse()
                    .map_err(|_| format!("bad tournament size `{k}`"))?,
            },
            _ => return Err(format!("unknown parent selection `{s}`")),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverKind {
    SinglePoint,
    TwoPoints,
    Uniform,
    Scattered,
}

impl CrossoverKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SinglePoint => "single_point",
            Self::TwoPoints => "two_points",
            Self::Uniform => "uniform",
            Self::Scattered => "scattered",
        }
    }
}

impl FromStr for CrossoverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single_point" => Ok(Self::SinglePoint),
            "two_points" => Ok(Self::TwoPoints),
            "uniform" => Ok(Self::Uniform),
            "scattered" => Ok(Self::Scattered),
            _ => Err(format!("unknown crossover `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    Random,
    Swap,
    Inversion,
    Scramble,
    Adaptive,
}

impl MutationKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Swap => "swap",
            Self::Inversion => "inversion",
            Self::Scramble => "scramble",
            Self::Adaptive => "adaptive",
        }
    }
}

impl FromStr for MutationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Self::Random),
            "swap" => Ok(Self::Swap),
            "inversion" => Ok(Self::Inversion),
            "scramble" => Ok(Self::Scramble),
            "adaptive" => Ok(Self::Adaptive),
            _ => Err(format!("unknown mutation `{s}`")),
        }
    }
}

/// Parses `none` as `None`, anything else through `T::from_str`.
pub fn parse_optional<T: FromStr<Err = String>>(s: &str) -> Result<Option<T>, String> {
    if s == "none" {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

/// How many genes of one offspring mutate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// Independent per-gene probability in `(0, 1]`.
    Probability(f64),
    /// Percentage of the chromosome in `(0, 100]`.
    PercentGenes(f64),
    /// Explicit count in `[1, num_genes]`.
    NumGenes(usize),
}

impl Rate {
    fn variant(&self) -> &'static str {
        match self {
            Self::Probability(_) => "probability",
            Self::PercentGenes(_) => "percent_genes",
            Self::NumGenes(_) => "num_genes",
        }
    }

    fn check(&self, num_genes: usize) -> Result<(), String> {
        match *self {
            Self::Probability(p) if !(p > 0.0 && p <= 1.0) => Err("probability in (0,1]".into()),
            Self::PercentGenes(p) if !(p > 0.0 && p <= 100.0) => {
                Err("percent_genes in (0,100]".into())
            }
            Self::NumGenes(n) if n == 0 || n > num_genes => {
                Err("num_genes in [1, num_genes]".into())
            }
            _ => Ok(()),
        }
    }

    /// Deterministic size used to order the two halves of an adaptive pair.
    fn nominal(&self, num_genes: usize) -> f64 {
        match *self {
            Self::Probability(p) => p,
            Self::PercentGenes(_) | Self::NumGenes(_) => {
                percent_or_fixed_count(*self, num_genes) as f64
            }
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Probability(p) => write!(f, "probability:{p}"),
            Self::PercentGenes(p) => write!(f, "percent_genes:{p}"),
            Self::NumGenes(n) => write!(f, "num_genes:{n}"),
        }
    }
}

impl FromStr for Rate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `kind:value`, got `{s}`"))?;
        let bad = |_| format!("bad rate value `{value}`");
        match kind {
            "probability" => value.parse().map(Self::Probability).map_err(bad),
            "percent_genes" | "percent" => value.parse().map(Self::PercentGenes).map_err(bad),
            "num_genes" | "num" => value
                .parse()
                .map(Self::NumGenes)
                .map_err(|_| format!("bad rate value `{value}`")),
            _ => Err(format!("unknown rate kind `{kind}`")),
        }
    }
}

/// Mutation rate: one fixed rate, or a high/low pair for adaptive mutation.
///
/// The pair cannot nest by construction; validation additionally requires
/// both halves to be the same variant and `high >= low`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSpec {
    Fixed(Rate),
    AdaptivePair { high: Rate, low: Rate },
}

impl fmt::Display for RateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(r) => r.fmt(f),
            Self::AdaptivePair { high, low } => write!(f, "{high}/{low}"),
        }
    }
}

impl FromStr for RateSpec {
    type Err = String;

    /// `percent_genes:10` or, for adaptive mutation, `percent_genes:20/percent_genes:5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            Some((high, low)) => Ok(Self::AdaptivePair {
                high: high.parse()?,
                low: low.parse()?,
            }),
            None => s.parse().map(Self::Fixed),
        }
    }
}

fn percent_or_fixed_count(rate: Rate, num_genes: usize) -> usize {
    match rate {
        Rate::NumGenes(n) => n,
        Rate::PercentGenes(pct) => {
            let raw = num_genes as f64 * pct / 100.0;
            ((raw + 0.5).floor() as usize).clamp(1, num_genes.max(1))
        }
        Rate::Probability(_) => unreachable!("probability has no fixed count"),
    }
}

/// Number of genes to mutate in one offspring, in `[0, num_genes]`.
///
/// `PercentGenes` rounds half-up and never drops below one gene.
/// `Probability` flips one coin per gene.
pub fn resolve_mutation_count<R: Rng + ?Sized>(rate: Rate, num_genes: usize, rng: &mut R) -> usize {
    match rate {
        Rate::Probability(p) => (0..num_genes)
            .filter(|_| rng.random_bool(p.clamp(0.0, 1.0)))
            .count(),
        fixed => percent_or_fixed_count(fixed, num_genes).min(num_genes),
    }
}

/// Complete parameter set of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub num_generations: usize,
    pub sol_per_pop: usize,
    pub num_parents_mating: usize,
    pub num_genes: usize,
    pub parent_selection: ParentSelection,
    /// `None` disables crossover.
    pub crossover: Option<CrossoverKind>,
    /// `None` disables mutation.
    pub mutation: Option<MutationKind>,
    pub mutation_rate: RateSpec,
    pub mutation_by_replacement: bool,
    pub random_delta_range: Interval,
    pub init_range: Interval,
    /// `-1` keeps every selected parent.
    pub keep_parents: i64,
    pub allow_duplicate_genes: bool,
    pub gene_space: Option<GeneSpaceSpec>,
    pub gene_type: GeneTypeSpec,
    pub initial_population: Option<Population>,
    pub seed: u64,
    pub parallel_fitness: bool,
}

impl GaConfig {
    /// Candidate with the four required sizes and defaults everywhere else.
    pub fn new(
        num_generations: usize,
        sol_per_pop: usize,
        num_parents_mating: usize,
        num_genes: usize,
    ) -> Self {
        Self {
            num_generations,
            sol_per_pop,
            num_parents_mating,
            num_genes,
            parent_selection: ParentSelection::SteadyState,
            crossover: Some(CrossoverKind::SinglePoint),
            mutation: Some(MutationKind::Random),
            mutation_rate: RateSpec::Fixed(Rate::PercentGenes(10.0)),
            mutation_by_replacement: false,
            random_delta_range: Interval::new(-1.0, 1.0),
            init_range: Interval::new(-4.0, 4.0),
            keep_parents: -1,
            allow_duplicate_genes: true,
            gene_space: None,
            gene_type: GeneTypeSpec::default(),
            initial_population: None,
            seed: 0,
            parallel_fitness: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of elites carried over; -1 means every selected parent.
    pub fn elite_count(&self) -> usize {
        if self.keep_parents < 0 {
            self.num_parents_mating
        } else {
            self.keep_parents as usize
        }
    }

    /// Checks every invariant and returns the normalized configuration.
    pub fn validate(&self) -> Result<GaConfig, ConfigError> {
        let mut cfg = self.clone();

        if cfg.sol_per_pop == 0 {
            return Err(ConfigError::new("sol_per_pop", "≥ 1", cfg.sol_per_pop));
        }
        if cfg.num_parents_mating == 0 {
            return Err(ConfigError::new(
                "num_parents_mating",
                "≥ 1",
                cfg.num_parents_mating,
            ));
        }
        if cfg.num_parents_mating > cfg.sol_per_pop {
            return Err(ConfigError::new(
                "num_parents_mating",
                "≤ sol_per_pop",
                cfg.num_parents_mating,
            ));
        }
        if cfg.num_genes == 0 {
            return Err(ConfigError::new("num_genes", "≥ 1", cfg.num_genes));
        }
        if let ParentSelection::Tournament { k } = cfg.parent_selection {
            if k == 0 || k > cfg.sol_per_pop {
                return Err(ConfigError::new(
                    "parent_selection",
                    "1 ≤ k ≤ sol_per_pop",
                    k,
                ));
            }
        }
        if cfg.crossover.is_some() {
            if cfg.num_parents_mating < 2 {
                return Err(ConfigError::new(
                    "crossover",
                    "num_parents_mating ≥ 2",
                    cfg.num_parents_mating,
                ));
            }
            if cfg.num_genes < 2 {
                return Err(ConfigError::new(
                    "crossover",
                    "num_genes ≥ 2",
                    cfg.num_genes,
                ));
            }
        }
        cfg.check_mutation_rate()?;
        if !cfg.random_delta_range.is_valid() {
            return Err(ConfigError::new(
                "random_delta_range",
                "finite lo < hi",
                cfg.random_delta_range,
            ));
        }
        if !cfg.init_range.is_valid() {
            return Err(ConfigError::new(
                "init_range",
                "finite lo < hi",
                cfg.init_range,
            ));
        }
        if cfg.keep_parents == -1 {
            cfg.keep_parents = cfg.num_parents_mating as i64;
        }
        if cfg.keep_parents < 0 || cfg.keep_parents > cfg.num_parents_mating as i64 {
            return Err(ConfigError::new(
                "keep_parents",
                "-1 or in [0, num_parents_mating]",
                cfg.keep_parents,
            ));
        }
        if let Some(spec) = &cfg.gene_space {
            if let GeneSpaceSpec::PerGene(spaces) = spec {
                if spaces.len() != cfg.num_genes {
                    return Err(ConfigError::new(
                        "gene_space",
                        "one entry per gene",
                        spaces.len(),
                    ));
                }
            }
            for space in spec.iter(cfg.num_genes) {
                if let Err(reason) = space.check() {
                    return Err(ConfigError::new("gene_space", reason, space));
                }
            }
        }
        if let GeneTypeSpec::PerGene(types) = &cfg.gene_type {
            if types.len() != cfg.num_genes {
                return Err(ConfigError::new(
                    "gene_type",
                    "one entry per gene",
                    types.len(),
                ));
            }
        }
        if let Some(pop) = &cfg.initial_population {
            if pop.len() != cfg.sol_per_pop || pop.rows().iter().any(|r| r.len() != cfg.num_genes) {
                return Err(ConfigError::new(
                    "initial_population",
                    format!("{} × {} matrix", cfg.sol_per_pop, cfg.num_genes),
                    format!("{} rows", pop.len()),
                ));
            }
            if pop
                .rows()
                .iter()
                .flat_map(|r| r.iter())
                .any(|v| !v.is_finite())
            {
                return Err(ConfigError::new(
                    "initial_population",
                    "finite genes",
                    "non-finite",
                ));
            }
        }
        Ok(cfg)
    }

    fn check_mutation_rate(&self) -> Result<(), ConfigError> {
        let err = |constraint: &str| {
            Err(ConfigError::new(
                "mutation_rate",
                constraint,
                self.mutation_rate,
            ))
        };
        let adaptive = self.mutation == Some(MutationKind::Adaptive);
        match self.mutation_rate {
            RateSpec::Fixed(rate) => {
                if adaptive {
                    return err("Adaptive requires AdaptivePair");
                }
                if let Err(c) = rate.check(self.num_genes) {
                    return err(&c);
                }
            }
            RateSpec::AdaptivePair { high, low } => {
                if self.mutation.is_some() && !adaptive {
                    return err("AdaptivePair requires Adaptive mutation");
                }
                if high.variant() != low.variant() {
                    return err("AdaptivePair halves of the same variant");
                }
                for half in [high, low] {
                    if let Err(c) = half.check(self.num_genes) {
                        return err(&c);
                    }
                }
                if high.nominal(self.num_genes) < low.nominal(self.num_genes) {
                    return err("AdaptivePair high ≥ low");
                }
            }
        }
        Ok(())
    }

    /// Sets one field from its textual `key=value` form.
    ///
    /// `initial_population` is not settable here since it needs file IO;
    /// the CLI loads it separately.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = |constraint: &str| ConfigError::new(key, constraint, format!("`{value}`"));
        fn num<T: FromStr>(v: &str) -> Option<T> {
            v.parse().ok()
        }
        fn boolean(v: &str) -> Option<bool> {
            match v {
                "true" | "1" | "yes" => Some(true),
                "false" | "0" | "no" => Some(false),
                _ => None,
            }
        }
        match key {
            "num_generations" => {
                self.num_generations = num(value).ok_or_else(|| bad("non-negative integer"))?
            }
            "sol_per_pop" => {
                self.sol_per_pop = num(value).ok_or_else(|| bad("positive integer"))?
            }
            "num_parents_mating" => {
                self.num_parents_mating = num(value).ok_or_else(|| bad("positive integer"))?
            }
            "num_genes" => self.num_genes = num(value).ok_or_else(|| bad("positive integer"))?,
            "parent_selection" => {
                self.parent_selection = value.parse().map_err(|e: String| bad(&e))?
            }
            "crossover" => self.crossover = parse_optional(value).map_err(|e| bad(&e))?,
            "mutation" => self.mutation = parse_optional(value).map_err(|e| bad(&e))?,
            "mutation_rate" => self.mutation_rate = value.parse().map_err(|e: String| bad(&e))?,
            "mutation_by_replacement" => {
                self.mutation_by_replacement = boolean(value).ok_or_else(|| bad("boolean"))?
            }
            "random_delta_range" => {
                self.random_delta_range = value.parse().map_err(|e: String| bad(&e))?
            }
            "init_range" => self.init_range = value.parse().map_err(|e: String| bad(&e))?,
            "keep_parents" => self.keep_parents = num(value).ok_or_else(|| bad("integer"))?,
            "allow_duplicate_genes" => {
                self.allow_duplicate_genes = boolean(value).ok_or_else(|| bad("boolean"))?
            }
            "gene_space" => {
                self.gene_space = if value == "none" {
                    None
                } else {
                    Some(value.parse().map_err(|e: String| bad(&e))?)
                }
            }
            "gene_type" => self.gene_type = value.parse().map_err(|e: String| bad(&e))?,
            "seed" => self.seed = num(value).ok_or_else(|| bad("64-bit unsigned integer"))?,
            "parallel_fitness" => {
                self.parallel_fitness = boolean(value).ok_or_else(|| bad("boolean"))?
            }
            _ => return Err(ConfigError::new(key, "a known configuration key", key)),
        }
        Ok(())
    }
}

/// Keys understood by [`GaConfig::set`], in declaration order.
pub const CONFIG_KEYS: &[&str] = &[
    "num_generations",
    "sol_per_pop",
    "num_parents_mating",
    "num_genes",
    "parent_selection",
    "crossover",
    "mutation",
    "mutation_rate",
    "mutation_by_replacement",
    "random_delta_range",
    "init_range",
    "keep_parents",
    "allow_duplicate_genes",
    "gene_space",
    "gene_type",
    "seed",
    "parallel_fitness",
];

impl GeneSpaceSpec {
    /// Space of every gene position, expanding a global spec.
    pub fn iter(&self, num_genes: usize) -> impl Iterator<Item = &GeneSpace> {
        (0..num_genes).filter_map(move |i| self.get(i))
    }
}
