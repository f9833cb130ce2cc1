//! The evolution loop and its lifecycle hooks.
//!
//! One call to [`run`] fires `on_start`, then per generation `on_fitness`,
//! `on_parents`, `on_crossover`, `on_mutation` and `on_generation`, and
//! finally `on_stop`. Hooks see the in-progress [`GaState`] and may replace
//! the offspring arrays before the next stage consumes them.

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, GaConfig};
use crate::genome::{init_population, Chromosome, GenomeError, Population};
use crate::operators::{self, FitnessVector, OperatorError, ParentSet};
use crate::rng::{substream, Stage};

/// User objective; higher is better.
///
/// Any `Fn(&[f64], usize) -> f64 + Sync` closure is a fitness function.
pub trait FitnessFunction: Sync {
    fn fitness(&self, solution: &[f64], solution_idx: usize) -> Result<f64, String>;
}

impl<F> FitnessFunction for F
where
    F: Fn(&[f64], usize) -> f64 + Sync,
{
    fn fitness(&self, solution: &[f64], solution_idx: usize) -> Result<f64, String> {
        Ok(self(solution, solution_idx))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("fitness of solution {solution_index} in generation {generation}: {reason}")]
pub struct FitnessError {
    pub generation: usize,
    pub solution_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error(transparent)]
    Genome(#[from] GenomeError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("next population has {got} solutions, expected {expected}")]
    PopulationSize { expected: usize, got: usize },
}

/// Returned by `on_generation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Control {
    #[default]
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Exhausted,
    CallbackStop,
}

/// Outcome of one generation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GenerationRecord {
    pub generation_index: usize,
    pub fitness: FitnessVector,
    pub parents: ParentSet,
    pub offspring_crossover: Vec<Chromosome>,
    pub offspring_mutation: Vec<Chromosome>,
    pub best_solution: Chromosome,
    pub best_fitness: f64,
    pub best_index: usize,
}

impl GenerationRecord {
    fn scored(generation_index: usize, population: &Population, fitness: FitnessVector) -> Self {
        let best_index = fitness.argmax().unwrap_or(0);
        Self {
            generation_index,
            best_solution: population.rows()[best_index].clone(),
            best_fitness: fitness.values()[best_index],
            best_index,
            fitness,
            ..Self::default()
        }
    }
}

/// Engine state visible to hooks.
pub struct GaState<'c> {
    cfg: &'c GaConfig,
    generation: usize,
    population: Population,
    record: GenerationRecord,
    history: History,
}

impl GaState<'_> {
    pub fn config(&self) -> &GaConfig {
        self.cfg
    }

    /// Zero-based index of the generation in progress.
    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn record(&self) -> &GenerationRecord {
        &self.record
    }

    pub fn last_generation_fitness(&self) -> &FitnessVector {
        &self.record.fitness
    }

    pub fn last_generation_parents(&self) -> &ParentSet {
        &self.record.parents
    }

    pub fn last_generation_offspring_crossover(&self) -> &[Chromosome] {
        &self.record.offspring_crossover
    }

    /// Replacing these rows feeds the mutation stage with them.
    pub fn last_generation_offspring_crossover_mut(&mut self) -> &mut Vec<Chromosome> {
        &mut self.record.offspring_crossover
    }

    pub fn last_generation_offspring_mutation(&self) -> &[Chromosome] {
        &self.record.offspring_mutation
    }

    /// Replacing these rows changes what enters the next population.
    pub fn last_generation_offspring_mutation_mut(&mut self) -> &mut Vec<Chromosome> {
        &mut self.record.offspring_mutation
    }

    /// Best solution, fitness and index of the current generation.
    pub fn last_generation_best(&self) -> (&Chromosome, f64, usize) {
        (
            &self.record.best_solution,
            self.record.best_fitness,
            self.record.best_index,
        )
    }

    pub fn best_solutions(&self) -> &[Chromosome] {
        &self.history.best_solutions
    }

    pub fn best_solutions_fitness(&self) -> &[f64] {
        &self.history.best_fitness
    }
}

type Hook<'h> = Box<dyn FnMut(&mut GaState<'_>) + 'h>;
type GenerationHook<'h> = Box<dyn FnMut(&mut GaState<'_>) -> Control + 'h>;

/// The seven optional lifecycle callbacks.
#[derive(Default)]
pub struct LifecycleHooks<'h> {
    on_start: Option<Hook<'h>>,
    on_fitness: Option<Hook<'h>>,
    on_parents: Option<Hook<'h>>,
    on_crossover: Option<Hook<'h>>,
    on_mutation: Option<Hook<'h>>,
    on_generation: Option<GenerationHook<'h>>,
    on_stop: Option<Hook<'h>>,
}

impl<'h> LifecycleHooks<'h> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn on_start(mut self, f: impl FnMut(&mut GaState<'_>) + 'h) -> Self {
        self.on_start = Some(Box::new(f));
        self
    }

    pub fn on_fitness(mut self, f: impl FnMut(&mut GaState<'_>) + 'h) -> Self {
        self.on_fitness = Some(Box::new(f));
        self
    }

    pub fn on_parents(mut self, f: impl FnMut(&mut GaState<'_>) + 'h) -> Self {
        self.on_parents = Some(Box::new(f));
        self
    }

    pub fn on_crossover(mut self, f: impl FnMut(&mut GaState<'_>) + 'h) -> Self {
        self.on_crossover = Some(Box::new(f));
        self
    }

    pub fn on_mutation(mut self, f: impl FnMut(&mut GaState<'_>) + 'h) -> Self {
        self.on_mutation = Some(Box::new(f));
        self
    }

    pub fn on_generation(mut self, f: impl FnMut(&mut GaState<'_>) -> Control + 'h) -> Self {
        self.on_generation = Some(Box::new(f));
        self
    }

    pub fn on_stop(mut self, f: impl FnMut(&mut GaState<'_>) + 'h) -> Self {
        self.on_stop = Some(Box::new(f));
        self
    }
}

fn fire(hook: &mut Option<Hook<'_>>, state: &mut GaState<'_>) {
    if let Some(f) = hook {
        f(state);
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
struct History {
    best_solutions: Vec<Chromosome>,
    best_fitness: Vec<f64>,
    mean_fitness: Vec<f64>,
    best_indices: Vec<usize>,
}

impl History {
    fn push(&mut self, record: &GenerationRecord) {
        self.best_solutions.push(record.best_solution.clone());
        self.best_fitness.push(record.best_fitness);
        self.mean_fitness.push(record.fitness.mean());
        self.best_indices.push(record.best_index);
    }
}

/// Best solution over all generations.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSolution {
    pub solution: Chromosome,
    pub fitness: f64,
    /// Row in the final population, or -1 when found in an earlier generation.
    pub index: i64,
    pub generation: usize,
}

/// One row of the fitness curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Entry 0 is the initial population; one more entry per completed generation.
    pub best_solutions: Vec<Chromosome>,
    pub best_solutions_fitness: Vec<f64>,
    pub mean_fitness: Vec<f64>,
    pub best_indices: Vec<usize>,
    pub overall_best: BestSolution,
    pub completed_generations: usize,
    pub stop_reason: StopReason,
    pub final_population: Population,
}

impl RunResult {
    /// Earliest generation holding the maximum fitness.
    pub fn best_generation(&self) -> usize {
        let mut best = 0;
        for (g, &f) in self.best_solutions_fitness.iter().enumerate() {
            if f > self.best_solutions_fitness[best] {
                best = g;
            }
        }
        best
    }

    /// Best solution across the history, its fitness, and its row index
    /// within the population it was found in.
    pub fn best_solution(&self) -> (Chromosome, f64, usize) {
        let g = self.best_generation();
        (
            self.best_solutions[g].clone(),
            self.best_solutions_fitness[g],
            self.best_indices[g],
        )
    }

    pub fn fitness_history(&self) -> Vec<HistoryRow> {
        self.best_solutions_fitness
            .iter()
            .zip(&self.mean_fitness)
            .enumerate()
            .map(|(generation, (&best_fitness, &mean_fitness))| HistoryRow {
                generation,
                best_fitness,
                mean_fitness,
            })
            .collect()
    }

    /// First generation whose best fitness reaches `threshold`.
    pub fn generations_to_reach(&self, threshold: f64) -> Option<usize> {
        self.best_solutions_fitness
            .iter()
            .position(|&f| f >= threshold)
    }
}

pub fn best_solution(r: &RunResult) -> (Chromosome, f64, usize) {
    r.best_solution()
}

pub fn fitness_history(r: &RunResult) -> Vec<HistoryRow> {
    r.fitness_history()
}

/// Scores every row; `parallel` fans the calls out without changing results.
///
/// The reported `generation` of a failure is 0; [`run`] fills in the real one.
pub fn evaluate_population<F: FitnessFunction + ?Sized>(
    pop: &Population,
    fitness: &F,
    parallel: bool,
) -> Result<FitnessVector, FitnessError> {
    let score = |(i, row): (usize, &Chromosome)| -> Result<f64, FitnessError> {
        let fail = |reason: String| FitnessError {
            generation: 0,
            solution_index: i,
            reason,
        };
        let v = fitness.fitness(row, i).map_err(fail)?;
        if !v.is_finite() {
            return Err(fail(format!("non-finite fitness {v}")));
        }
        Ok(v)
    };
    let scores: Vec<Result<f64, FitnessError>> = if parallel {
        pop.rows().par_iter().enumerate().map(score).collect()
    } else {
        pop.rows().iter().enumerate().map(score).collect()
    };
    let values = scores.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(FitnessVector::new(values).expect("scores are finite"))
}

/// Runs the genetic algorithm.
pub fn run<F: FitnessFunction + ?Sized>(
    cfg: &GaConfig,
    fitness: &F,
    mut hooks: LifecycleHooks<'_>,
) -> Result<RunResult, EngineError> {
    let cfg = cfg.validate()?;
    let seed = cfg.seed;
    let evaluate = |pop: &Population, generation: usize| {
        evaluate_population(pop, fitness, cfg.parallel_fitness)
            .map_err(|e| FitnessError { generation, ..e })
    };

    let population = init_population(&cfg, &mut substream(seed, 0, Stage::Init))?;
    let mut state = GaState {
        cfg: &cfg,
        generation: 0,
        population,
        record: GenerationRecord::default(),
        history: History::default(),
    };
    fire(&mut hooks.on_start, &mut state);

    let keep = cfg.elite_count();
    let offspring_count = cfg.sol_per_pop - keep;
    let mut completed = 0;
    let mut stop_reason = StopReason::Exhausted;

    for g in 0..cfg.num_generations {
        let gen = g as u64;
        state.generation = g;

        let fit = evaluate(&state.population, g)?;
        state.record = GenerationRecord::scored(g, &state.population, fit);
        state.history.push(&state.record);
        fire(&mut hooks.on_fitness, &mut state);

        let parents = operators::select_parents(
            cfg.parent_selection,
            &state.population,
            &state.record.fitness,
            cfg.num_parents_mating,
            &mut substream(seed, gen, Stage::Selection),
        )?;
        state.record.parents = parents;
        fire(&mut hooks.on_parents, &mut state);

        state.record.offspring_crossover = operators::crossover_stage(
            &cfg,
            &state.record.parents,
            offspring_count,
            &mut substream(seed, gen, Stage::Crossover),
        )?;
        fire(&mut hooks.on_crossover, &mut state);

        let parent_count = state.record.parents.len().max(1);
        let proxies: Vec<f64> = (0..state.record.offspring_crossover.len())
            .map(|i| {
                state
                    .record
                    .parents
                    .indices()
                    .get(i % parent_count)
                    .map_or(f64::NAN, |&p| state.record.fitness.values()[p])
            })
            .collect();
        state.record.offspring_mutation = operators::mutation_stage(
            &cfg,
            &state.record.offspring_crossover,
            &proxies,
            state.record.fitness.mean(),
            &mut substream(seed, gen, Stage::Mutation),
        )?;
        fire(&mut hooks.on_mutation, &mut state);

        let next: Vec<Chromosome> = state.record.parents.rows()[..keep]
            .iter()
            .cloned()
            .chain(state.record.offspring_mutation.iter().cloned())
            .collect();
        if next.len() != cfg.sol_per_pop {
            return Err(EngineError::PopulationSize {
                expected: cfg.sol_per_pop,
                got: next.len(),
            });
        }
        state.population = Population::new(next)?;
        completed = g + 1;

        let control = match &mut hooks.on_generation {
            Some(f) => f(&mut state),
            None => Control::Continue,
        };
        if control == Control::Stop {
            stop_reason = StopReason::CallbackStop;
            break;
        }
    }

    let fit = evaluate(&state.population, completed)?;
    let last = GenerationRecord::scored(completed, &state.population, fit);
    state.history.push(&last);
    state.record.generation_index = completed;
    state.record.fitness = last.fitness;
    state.record.best_solution = last.best_solution;
    state.record.best_fitness = last.best_fitness;
    state.record.best_index = last.best_index;
    state.generation = completed;
    fire(&mut hooks.on_stop, &mut state);

    let GaState {
        history,
        population,
        ..
    } = state;
    let mut result = RunResult {
        best_solutions: history.best_solutions,
        best_solutions_fitness: history.best_fitness,
        mean_fitness: history.mean_fitness,
        best_indices: history.best_indices,
        overall_best: BestSolution {
            solution: Chromosome::default(),
            fitness: f64::NAN,
            index: -1,
            generation: 0,
        },
        completed_generations: completed,
        stop_reason,
        final_population: population,
    };
    let g = result.best_generation();
    result.overall_best = BestSolution {
        solution: result.best_solutions[g].clone(),
        fitness: result.best_solutions_fitness[g],
        index: if g == completed {
            result.best_indices[g] as i64
        } else {
            -1
        },
        generation: g,
    };
    Ok(result)
}
