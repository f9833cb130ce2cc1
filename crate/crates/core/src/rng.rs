//! Deterministic random streams.
//!
//! Every stage of a run draws from its own ChaCha stream keyed by
//! `(seed, generation, stage)`, so switching one operator off never shifts
//! the draws seen by another stage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator state handed to every stochastic operation.
pub type RngState = ChaCha8Rng;

/// Stage tag mixed into the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Stage {
    Init = 1,
    Selection = 2,
    Crossover = 3,
    Mutation = 4,
}

/// Independent stream for one `(generation, stage)` pair of a seeded run.
pub fn substream(seed: u64, generation: u64, stage: Stage) -> RngState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((generation << 8) | stage as u64);
    rng
}

/// Plain seeded stream, for tests and one-off draws outside a run.
pub fn seeded(seed: u64) -> RngState {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_stream() {
        let a: Vec<u64> = (0..8)
            .map({
                let mut r = substream(9, 3, Stage::Mutation);
                move |_| r.random()
            })
            .collect();
        let b: Vec<u64> = (0..8)
            .map({
                let mut r = substream(9, 3, Stage::Mutation);
                move |_| r.random()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn stages_and_generations_are_independent() {
        let first = |g, s| substream(9, g, s).random::<u64>();
        assert_ne!(first(0, Stage::Selection), first(0, Stage::Crossover));
        assert_ne!(first(0, Stage::Selection), first(1, Stage::Selection));
    }
}
