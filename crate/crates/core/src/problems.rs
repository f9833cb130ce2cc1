//! Built-in benchmark problems.
//!
//! * [`LinearEquationProblem`]: find weights with `Σ wᵢ·Xᵢ = Y`.
//! * [`OneMaxProblem`]: maximise the number of ones in a binary string.
//! * [`ClassificationProblem`]: evolve the weights of a small dense network.

use std::io;
use std::path::Path;

use thiserror::Error;

use crate::config::GaConfig;
use crate::engine::FitnessFunction;
use crate::genome::{GeneSpace, GeneSpaceSpec, GeneType, GeneTypeSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid network: {0}")]
    InvalidSpec(String),
    #[error("dataset: {0}")]
    Dataset(String),
}

fn check_len(expected: usize, got: usize) -> Result<(), ProblemError> {
    if expected != got {
        return Err(ProblemError::LengthMismatch { expected, got });
    }
    Ok(())
}

/// `fitness = 1 / (|Σ sᵢ·Xᵢ − Y| + 10⁻⁶)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEquationProblem {
    pub inputs: Vec<f64>,
    pub target: f64,
}

impl LinearEquationProblem {
    pub fn new(inputs: Vec<f64>, target: f64) -> Self {
        assert!(
            !inputs.is_empty(),
            "linear problem needs at least one input"
        );
        Self { inputs, target }
    }

    /// `Y = 4·w1 − 2·w2 + 3.5·w3` with `Y = 44`.
    pub fn reference() -> Self {
        Self::new(vec![4.0, -2.0, 3.5], 44.0)
    }

    pub fn output(&self, solution: &[f64]) -> Result<f64, ProblemError> {
        check_len(self.inputs.len(), solution.len())?;
        Ok(solution.iter().zip(&self.inputs).map(|(w, x)| w * x).sum())
    }

    pub fn evaluate(&self, solution: &[f64]) -> Result<f64, ProblemError> {
        let out = self.output(solution)?;
        Ok(1.0 / ((out - self.target).abs() + 0.000001))
    }
}

impl FitnessFunction for LinearEquationProblem {
    fn fitness(&self, solution: &[f64], _: usize) -> Result<f64, String> {
        self.evaluate(solution).map_err(|e| e.to_string())
    }
}

/// Fitness closure for a linear problem.
pub fn linear_fitness(p: &LinearEquationProblem) -> impl FitnessFunction + '_ {
    p
}

impl FitnessFunction for &LinearEquationProblem {
    fn fitness(&self, solution: &[f64], idx: usize) -> Result<f64, String> {
        (**self).fitness(solution, idx)
    }
}

/// Count of ones in an `n`-gene binary (`Int8`, `{0, 1}`) chromosome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneMaxProblem {
    pub n: usize,
}

impl OneMaxProblem {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn optimum(&self) -> f64 {
        self.n as f64
    }

    /// Binary genes: `{0, 1}` space, `Int8` type, mutation by replacement.
    pub fn configure(&self, cfg: &mut GaConfig) {
        cfg.num_genes = self.n;
        cfg.gene_space = Some(GeneSpaceSpec::Global(GeneSpace::DiscreteSet(vec![
            0.0, 1.0,
        ])));
        cfg.gene_type = GeneTypeSpec::Global(GeneType::Int8);
        cfg.mutation_by_replacement = true;
    }

    pub fn evaluate(&self, solution: &[f64]) -> Result<f64, ProblemError> {
        check_len(self.n, solution.len())?;
        Ok(solution.iter().sum())
    }
}

impl FitnessFunction for OneMaxProblem {
    fn fitness(&self, solution: &[f64], _: usize) -> Result<f64, String> {
        self.evaluate(solution).map_err(|e| e.to_string())
    }
}

pub fn onemax_fitness(p: OneMaxProblem) -> impl FitnessFunction {
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Self::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Self::Relu => z.max(0.0),
        }
    }
}

/// Fully connected network shape. The output layer is always sigmoid.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    layer_sizes: Vec<usize>,
    hidden: Vec<Activation>,
}

/// One dense layer: `weights` is `fan_out × fan_in`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl MlpSpec {
    /// `hidden` holds one activation per hidden layer.
    pub fn new(layer_sizes: Vec<usize>, hidden: Vec<Activation>) -> Result<Self, ProblemError> {
        if layer_sizes.len() < 2 {
            return Err(ProblemError::InvalidSpec(
                "at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(ProblemError::InvalidSpec(
                "layer sizes must be positive".into(),
            ));
        }
        if hidden.len() != layer_sizes.len() - 2 {
            return Err(ProblemError::InvalidSpec(format!(
                "{} hidden layers but {} activations",
                layer_sizes.len() - 2,
                hidden.len()
            )));
        }
        Ok(Self {
            layer_sizes,
            hidden,
        })
    }

    /// Same activation on every hidden layer.
    pub fn uniform(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self, ProblemError> {
        let hidden = vec![activation; layer_sizes.len().saturating_sub(2)];
        Self::new(layer_sizes, hidden)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    fn activation(&self, layer: usize) -> Activation {
        self.hidden
            .get(layer)
            .copied()
            .unwrap_or(Activation::Sigmoid)
    }

    /// Splits a flat weight vector into layers: per layer, the weight
    /// matrix row by row, then the bias vector.
    pub fn unflatten(&self, flat: &[f64]) -> Result<Vec<DenseLayer>, ProblemError> {
        check_len(self.parameter_count(), flat.len())?;
        let mut rest = flat;
        let layers = self
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let (weights, tail) = rest.split_at(fan_in * fan_out);
                let (bias, tail) = tail.split_at(fan_out);
                rest = tail;
                DenseLayer {
                    fan_in,
                    fan_out,
                    weights: weights.to_vec(),
                    bias: bias.to_vec(),
                }
            })
            .collect();
        Ok(layers)
    }

    pub fn flatten(layers: &[DenseLayer]) -> Vec<f64> {
        layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn forward_layers(
        &self,
        layers: &[DenseLayer],
        x: &[f64],
    ) -> Result<Vec<f64>, ProblemError> {
        check_len(self.inputs(), x.len())?;
        let mut signal = x.to_vec();
        for (k, layer) in layers.iter().enumerate() {
            let act = self.activation(k);
            signal = layer
                .weights
                .chunks(layer.fan_in)
                .zip(&layer.bias)
                .map(|(row, b)| {
                    act.apply(row.iter().zip(&signal).map(|(w, s)| w * s).sum::<f64>() + b)
                })
                .collect();
        }
        Ok(signal)
    }

    pub fn forward(&self, weights: &[f64], x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.forward_layers(&self.unflatten(weights)?, x)
    }
}

pub fn mlp_parameter_count(spec: &MlpSpec) -> usize {
    spec.parameter_count()
}

pub fn mlp_forward(spec: &MlpSpec, weights: &[f64], x: &[f64]) -> Result<Vec<f64>, ProblemError> {
    spec.forward(weights, x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self, ProblemError> {
        let first = samples
            .first()
            .ok_or_else(|| ProblemError::Dataset("no samples".into()))?;
        let dims = (first.features.len(), first.label.len());
        if samples
            .iter()
            .any(|s| (s.features.len(), s.label.len()) != dims)
        {
            return Err(ProblemError::Dataset("samples differ in dimensions".into()));
        }
        Ok(Self { samples })
    }

    /// The four XOR points.
    pub fn xor() -> Self {
        let samples = [
            (0.0, 0.0, 0.0),
            (0.0, 1.0, 1.0),
            (1.0, 0.0, 1.0),
            (1.0, 1.0, 0.0),
        ]
        .into_iter()
        .map(|(a, b, y)| Sample {
            features: vec![a, b],
            label: vec![y],
        })
        .collect();
        Self { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// CSV with a header naming feature columns `x0, x1, …` and label
    /// columns `y0, y1, …`, features first.
    pub fn from_csv_reader<R: io::Read>(reader: R) -> Result<Self, ProblemError> {
        let bad = |e: csv::Error| ProblemError::Dataset(e.to_string());
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers().map_err(bad)?.clone();
        let kinds: Vec<char> = header
            .iter()
            .map(|h| match h.chars().next() {
                Some(c @ ('x' | 'y')) if h[1..].parse::<usize>().is_ok() => Ok(c),
                _ => Err(ProblemError::Dataset(format!("bad column name `{h}`"))),
            })
            .collect::<Result<_, _>>()?;
        let n_x = kinds.iter().take_while(|&&c| c == 'x').count();
        if n_x == 0 || n_x == kinds.len() || kinds[n_x..].iter().any(|&c| c != 'y') {
            return Err(ProblemError::Dataset(
                "expected x columns followed by y columns".into(),
            ));
        }
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(bad)?;
            let values = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| ProblemError::Dataset(format!("bad number `{f}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (features, label) = values.split_at(n_x);
            samples.push(Sample {
                features: features.to_vec(),
                label: label.to_vec(),
            });
        }
        Self::new(samples)
    }

    pub fn read_csv(path: &Path) -> Result<Self, ProblemError> {
        let file = std::fs::File::open(path)
            .map_err(|e| ProblemError::Dataset(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }
}

/// Accuracy of a network whose weights are the chromosome.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationProblem {
    pub spec: MlpSpec,
    pub data: Dataset,
}

impl ClassificationProblem {
    pub fn new(spec: MlpSpec, data: Dataset) -> Result<Self, ProblemError> {
        let s = &data.samples[0];
        check_len(spec.inputs(), s.features.len())?;
        check_len(spec.outputs(), s.label.len())?;
        Ok(Self { spec, data })
    }

    /// XOR with a `[2, 2, 1]` sigmoid network.
    pub fn xor() -> Self {
        let spec = MlpSpec::uniform(vec![2, 2, 1], Activation::Sigmoid).expect("valid shape");
        Self::new(spec, Dataset::xor()).expect("xor matches the network")
    }

    /// Outputs at or above 0.5 count as class 1.
    pub fn predict(&self, layers: &[DenseLayer], x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        Ok(self
            .spec
            .forward_layers(layers, x)?
            .into_iter()
            .map(|o| if o >= 0.5 { 1.0 } else { 0.0 })
            .collect())
    }

    pub fn accuracy(&self, weights: &[f64]) -> Result<f64, ProblemError> {
        let layers = self.spec.unflatten(weights)?;
        let mut correct = 0usize;
        for s in &self.data.samples {
            if self.predict(&layers, &s.features)? == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / self.data.samples.len() as f64)
    }
}

impl FitnessFunction for ClassificationProblem {
    fn fitness(&self, solution: &[f64], _: usize) -> Result<f64, String> {
        self.accuracy(solution).map_err(|e| e.to_string())
    }
}

pub fn classification_fitness(
    spec: MlpSpec,
    data: Dataset,
) -> Result<ClassificationProblem, ProblemError> {
    ClassificationProblem::new(spec, data)
}
