//! Parent selection, crossover and mutation.
//!
//! All operators are pure functions of their inputs and an explicit RNG.
//! Ties always break toward the lower population index.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use thiserror::Error;

use crate::config::{
    resolve_mutation_count, CrossoverKind, GaConfig, MutationKind, ParentSelection, Rate, RateSpec,
};
use crate::genome::{
    coerce_gene, repair_duplicates, Chromosome, GeneDomain, GenomeError, Population,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("fitness-proportional selection needs positive fitness, solution {index} has {value}")]
    NonPositiveFitness { index: usize, value: f64 },
    #[error("fitness of solution {index} is not finite ({value})")]
    NonFiniteFitness { index: usize, value: f64 },
    #[error("chromosome lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("fitness vector has {fitness} entries for {population} solutions")]
    SizeMismatch { fitness: usize, population: usize },
    #[error("cannot breed from an empty parent set")]
    NoParents,
    #[error(transparent)]
    Genome(#[from] GenomeError),
}

/// Fitness of every solution, index-aligned with the population.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitnessVector(Vec<f64>);

impl FitnessVector {
    pub fn new(values: Vec<f64>) -> Result<Self, OperatorError> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(OperatorError::NonFiniteFitness { index, value });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Index of the maximum, lowest index on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.0.iter().enumerate() {
            if best.is_none_or(|b| v > self.0[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Selected parents and where they came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParentSet {
    rows: Vec<Chromosome>,
    indices: Vec<usize>,
}

impl ParentSet {
    pub fn from_indices(pop: &Population, indices: Vec<usize>) -> Self {
        let rows = indices.iter().map(|&i| pop.rows()[i].clone()).collect();
        Self { rows, indices }
    }

    pub fn rows(&self) -> &[Chromosome] {
        &self.rows
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Draws from a cumulative weight table; `cumulative` must be non-decreasing.
fn wheel_index(cumulative: &[f64], point: f64) -> usize {
    let i = cumulative.partition_point(|&c| c <= point);
    i.min(cumulative.len() - 1)
}

fn cumulative(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    weights
        .into_iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

fn require_positive(fit: &FitnessVector) -> Result<(), OperatorError> {
    match fit.values().iter().enumerate().find(|(_, &v)| v <= 0.0) {
        Some((index, &value)) => Err(OperatorError::NonPositiveFitness { index, value }),
        None => Ok(()),
    }
}

/// Picks `n` parent indices according to `kind`.
pub fn select_indices<R: Rng + ?Sized>(
    kind: ParentSelection,
    fit: &FitnessVector,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>, OperatorError> {
    let size = fit.len();
    let values = fit.values();
    let by_fitness_desc = || {
        let mut order: Vec<usize> = (0..size).collect();
        // stable sort keeps lower indices first among ties
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        order
    };
    let picked = match kind {
        ParentSelection::SteadyState => by_fitness_desc().into_iter().take(n).collect(),
        ParentSelection::Roulette => {
            require_positive(fit)?;
            let cum = cumulative(values.iter().copied());
            let total = cum[size - 1];
            (0..n)
                .map(|_| wheel_index(&cum, rng.random::<f64>() * total))
                .collect()
        }
        ParentSelection::StochasticUniversal => {
            require_positive(fit)?;
            let cum = cumulative(values.iter().copied());
            let spacing = cum[size - 1] / n as f64;
            let phase = rng.random::<f64>() * spacing;
            (0..n)
                .map(|i| wheel_index(&cum, phase + i as f64 * spacing))
                .collect()
        }
        ParentSelection::Rank => {
            let mut weight = vec![0.0; size];
            // best gets weight `size`, worst gets 1
            for (pos, i) in by_fitness_desc().into_iter().enumerate() {
                weight[i] = (size - pos) as f64;
            }
            let cum = cumulative(weight);
            let total = cum[size - 1];
            (0..n)
                .map(|_| wheel_index(&cum, rng.random::<f64>() * total))
                .collect()
        }
        ParentSelection::Tournament { k } => (0..n)
            .map(|_| {
                index::sample(rng, size, k.clamp(1, size))
                    .into_iter()
                    .reduce(|a, b| {
                        if values[b] > values[a] || (values[b] == values[a] && b < a) {
                            b
                        } else {
                            a
                        }
                    })
                    .expect("tournament has entrants")
            })
            .collect(),
        ParentSelection::Random => (0..n).map(|_| rng.random_range(0..size)).collect(),
    };
    Ok(picked)
}

/// Selects `n` parents from `pop`.
pub fn select_parents<R: Rng + ?Sized>(
    kind: ParentSelection,
    pop: &Population,
    fit: &FitnessVector,
    n: usize,
    rng: &mut R,
) -> Result<ParentSet, OperatorError> {
    if fit.len() != pop.len() {
        return Err(OperatorError::SizeMismatch {
            fitness: fit.len(),
            population: pop.len(),
        });
    }
    if pop.is_empty() {
        return Err(OperatorError::NoParents);
    }
    let indices = select_indices(kind, fit, n, rng)?;
    Ok(ParentSet::from_indices(pop, indices))
}

fn check_lengths(p1: &[f64], p2: &[f64]) -> Result<(), OperatorError> {
    if p1.len() != p2.len() {
        return Err(OperatorError::LengthMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    Ok(())
}

/// `p1[..cut] ++ p2[cut..]`.
pub fn single_point_at(p1: &[f64], p2: &[f64], cut: usize) -> Chromosome {
    p1[..cut]
        .iter()
        .chain(&p2[cut..])
        .copied()
        .collect::<Vec<_>>()
        .into()
}

/// `p2` inside `[start, end)`, `p1` elsewhere.
pub fn two_points_at(p1: &[f64], p2: &[f64], start: usize, end: usize) -> Chromosome {
    let mut child = p1.to_vec();
    child[start..end].copy_from_slice(&p2[start..end]);
    child.into()
}

/// Gene `i` from `p1` where `mask[i]`, from `p2` otherwise.
pub fn masked(p1: &[f64], p2: &[f64], mask: &[bool]) -> Chromosome {
    p1.iter()
        .zip(p2)
        .zip(mask)
        .map(|((&a, &b), &m)| if m { a } else { b })
        .collect::<Vec<_>>()
        .into()
}

/// Uniform pair `start < end` in `0..=len` with `end - start >= min_width`,
/// excluding the full span when `proper` is set.
fn segment<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    min_width: usize,
    proper: bool,
) -> (usize, usize) {
    loop {
        let a = rng.random_range(0..=len);
        let b = rng.random_range(0..=len);
        let (s, e) = if a < b { (a, b) } else { (b, a) };
        if e - s >= min_width && !(proper && s == 0 && e == len) {
            return (s, e);
        }
    }
}

/// One child from two parents.
pub fn crossover_pair<R: Rng + ?Sized>(
    kind: CrossoverKind,
    p1: &[f64],
    p2: &[f64],
    rng: &mut R,
) -> Result<Chromosome, OperatorError> {
    check_lengths(p1, p2)?;
    let len = p1.len();
    if len < 2 {
        return Ok(p1.to_vec().into());
    }
    let child = match kind {
        CrossoverKind::SinglePoint => single_point_at(p1, p2, rng.random_range(1..len)),
        CrossoverKind::TwoPoints => {
            let (s, e) = segment(rng, len, 1, true);
            two_points_at(p1, p2, s, e)
        }
        CrossoverKind::Uniform => p1
            .iter()
            .zip(p2)
            .map(|(&a, &b)| if rng.random_bool(0.5) { a } else { b })
            .collect::<Vec<_>>()
            .into(),
        CrossoverKind::Scattered => {
            let mask: Vec<bool> = (0..len).map(|_| rng.random()).collect();
            masked(p1, p2, &mask)
        }
    };
    Ok(child)
}

/// `count` children from rotating parent pairs, or cyclic copies when
/// crossover is disabled.
pub fn produce_offspring<R: Rng + ?Sized>(
    kind: Option<CrossoverKind>,
    parents: &ParentSet,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Chromosome>, OperatorError> {
    let rows = parents.rows();
    let p = rows.len();
    if p == 0 {
        return if count == 0 {
            Ok(Vec::new())
        } else {
            Err(OperatorError::NoParents)
        };
    }
    (0..count)
        .map(|i| match kind {
            Some(kind) => crossover_pair(kind, &rows[i % p], &rows[(i + 1) % p], rng),
            None => Ok(rows[i % p].clone()),
        })
        .collect()
}

/// Crossover stage of a run: offspring plus duplicate repair when required.
pub fn crossover_stage<R: Rng + ?Sized>(
    cfg: &GaConfig,
    parents: &ParentSet,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Chromosome>, OperatorError> {
    let children = produce_offspring(cfg.crossover, parents, count, rng)?;
    if cfg.allow_duplicate_genes {
        return Ok(children);
    }
    children
        .iter()
        .map(|c| {
            repair_duplicates(
                c,
                cfg.gene_space.as_ref(),
                &cfg.gene_type,
                cfg.init_range,
                rng,
            )
            .map_err(OperatorError::from)
        })
        .collect()
}

/// Values of every position except `skip`.
fn others(genes: &[f64], skip: usize) -> Vec<f64> {
    genes
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| (j != skip).then_some(v))
        .collect()
}

/// Ensures position `i` holds an admissible value, redrawing when it does not.
fn settle<R: Rng + ?Sized>(
    genes: &mut [f64],
    i: usize,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<(), GenomeError> {
    let domain = GeneDomain::from_config(cfg, i);
    if cfg.allow_duplicate_genes {
        if !domain.contains(genes[i]) {
            genes[i] = domain.sample(rng, i)?;
        }
        return Ok(());
    }
    let rest = others(genes, i);
    if !domain.contains(genes[i]) || rest.contains(&genes[i]) {
        genes[i] = domain.sample_excluding(rng, i, &rest)?;
    }
    Ok(())
}

fn random_mutation<R: Rng + ?Sized>(
    genes: &mut [f64],
    rate: Rate,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<(), GenomeError> {
    let len = genes.len();
    let count = resolve_mutation_count(rate, len, rng);
    for i in index::sample(rng, len, count) {
        let domain = GeneDomain::from_config(cfg, i);
        let original = genes[i];
        let delta = cfg.random_delta_range.sample(rng);
        let proposal = if cfg.mutation_by_replacement {
            if domain.is_unconstrained() {
                coerce_gene(delta, domain.ty)
            } else {
                domain.sample(rng, i)
            }
        } else {
            coerce_gene(original + delta, domain.ty)
        };
        genes[i] = proposal.unwrap_or(original);
        if settle(genes, i, cfg, rng).is_err() {
            // the original value was admissible, fall back to it
            genes[i] = original;
        }
    }
    Ok(())
}

/// Mutates one offspring.
///
/// `own_fitness` drives adaptive mutation: the high rate applies when it is
/// below `pop_mean_fitness`, the low rate otherwise (and when absent).
pub fn mutate<R: Rng + ?Sized>(
    kind: MutationKind,
    c: &Chromosome,
    cfg: &GaConfig,
    pop_mean_fitness: f64,
    own_fitness: Option<f64>,
    rng: &mut R,
) -> Result<Chromosome, OperatorError> {
    let mut genes = c.clone().into_genes();
    let len = genes.len();
    match kind {
        MutationKind::Random => {
            let rate = match cfg.mutation_rate {
                RateSpec::Fixed(r) => r,
                RateSpec::AdaptivePair { low, .. } => low,
            };
            random_mutation(&mut genes, rate, cfg, rng)?;
        }
        MutationKind::Adaptive => {
            let below_mean = own_fitness.is_some_and(|f| f < pop_mean_fitness);
            let rate = match cfg.mutation_rate {
                RateSpec::Fixed(r) => r,
                RateSpec::AdaptivePair { high, low } => {
                    if below_mean {
                        high
                    } else {
                        low
                    }
                }
            };
            random_mutation(&mut genes, rate, cfg, rng)?;
        }
        MutationKind::Swap if len >= 2 => {
            let pair = index::sample(rng, len, 2);
            let (a, b) = (pair.index(0), pair.index(1));
            genes.swap(a, b);
            settle(&mut genes, a, cfg, rng)?;
            settle(&mut genes, b, cfg, rng)?;
        }
        MutationKind::Inversion | MutationKind::Scramble if len >= 2 => {
            let (s, e) = segment(rng, len, 2, false);
            if kind == MutationKind::Inversion {
                genes[s..e].reverse();
            } else {
                genes[s..e].shuffle(rng);
            }
            for i in s..e {
                settle(&mut genes, i, cfg, rng)?;
            }
        }
        MutationKind::Swap | MutationKind::Inversion | MutationKind::Scramble => {}
    }
    Ok(genes.into())
}

/// Reverses `c[start..end]`.
pub fn inversion_at(c: &[f64], start: usize, end: usize) -> Chromosome {
    let mut genes = c.to_vec();
    genes[start..end].reverse();
    genes.into()
}

/// Mutation stage of a run. `proxies[i]` is the fitness used for offspring `i`
/// by adaptive mutation.
pub fn mutation_stage<R: Rng + ?Sized>(
    cfg: &GaConfig,
    offspring: &[Chromosome],
    proxies: &[f64],
    pop_mean_fitness: f64,
    rng: &mut R,
) -> Result<Vec<Chromosome>, OperatorError> {
    let Some(kind) = cfg.mutation else {
        return Ok(offspring.to_vec());
    };
    offspring
        .iter()
        .enumerate()
        .map(|(i, c)| mutate(kind, c, cfg, pop_mean_fitness, proxies.get(i).copied(), rng))
        .collect()
}
