//! A single-objective genetic algorithm engine.
//!
//! The crate is organised around the classic evolution loop: a validated
//! [`GaConfig`] describes the run, [`genome`] builds and repairs
//! chromosomes under per-gene value spaces and data types, [`operators`]
//! implements parent selection, crossover and mutation, and [`engine`]
//! drives the generations while firing seven lifecycle hooks
//! (`on_start`, `on_fitness`, `on_parents`, `on_crossover`, `on_mutation`,
//! `on_generation`, `on_stop`).
//!
//! ```
//! use gaopt::{engine, GaConfig, LifecycleHooks};
//! use gaopt::problems::LinearEquationProblem;
//!
//! let cfg = GaConfig::new(100, 10, 5, 3).with_seed(7).validate().unwrap();
//! let problem = LinearEquationProblem::new(vec![4.0, -2.0, 3.5], 44.0);
//! let result = engine::run(&cfg, &problem, LifecycleHooks::default()).unwrap();
//! let (solution, fitness, _index) = result.best_solution();
//! assert_eq!(solution.len(), 3);
//! assert!(fitness > 0.0);
//! ```

pub mod cli;
pub mod config;
pub mod engine;
pub mod genome;
pub mod operators;
pub mod problems;
pub mod rng;

pub use config::{
    ConfigError, CrossoverKind, GaConfig, Interval, MutationKind, ParentSelection, RateSpec,
};
pub use engine::{
    Control, EngineError, FitnessError, FitnessFunction, GaState, GenerationRecord, LifecycleHooks,
    RunResult, StopReason,
};
pub use genome::{
    Chromosome, GeneSpace, GeneSpaceSpec, GeneType, GeneTypeSpec, GenomeError, Population,
};
pub use operators::{FitnessVector, OperatorError, ParentSet};
