//! Chromosomes, populations and per-gene constraints.
//!
//! Genes are stored as `f64` whatever their declared [`GeneType`]; the type
//! is enforced by [`coerce_gene`] whenever a gene is created or changed.
//! The admissible set of one gene is its [`GeneSpace`] seen through its
//! type: integer types keep only the integral members inside their bounds,
//! `Float32` rounds members to single precision.

use std::fmt;
use std::io;
use std::ops::{Deref, DerefMut};
use std::path::Path;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::config::{GaConfig, Interval};

/// Largest lattice or integer range enumerated eagerly during sampling.
const ENUMERATION_CAP: usize = 1 << 16;
/// Redraws allowed before a continuous draw gives up.
const REDRAW_BUDGET: usize = 100;
/// Integers beyond this magnitude are not exact in an `f64`.
const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenomeError {
    #[error("gene {gene}: admissible value set is empty")]
    EmptySpace { gene: usize },
    #[error("non-finite or unrepresentable gene value {value}")]
    NonFiniteGene { value: f64 },
    #[error("gene {gene}: not enough value space to keep genes unique")]
    InsufficientSpace { gene: usize },
    #[error("population shape mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("population csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneType {
    Float32,
    Float64,
    Int8,
    Int16,
    Int32,
    Int64,
    UInt8,
    UInt16,
    UInt32,
    UInt64,
    /// Arbitrary-width integer; exact only while `|v| ≤ 2^53`.
    PyInt,
}

impl GeneType {
    /// Representable range of integer types, as the nearest enclosed doubles.
    pub fn integer_bounds(self) -> Option<(f64, f64)> {
        let b = match self {
            Self::Float32 | Self::Float64 => return None,
            Self::Int8 => (i8::MIN as f64, i8::MAX as f64),
            Self::Int16 => (i16::MIN as f64, i16::MAX as f64),
            Self::Int32 => (i32::MIN as f64, i32::MAX as f64),
            Self::Int64 => (-9_223_372_036_854_775_808.0, 9_223_372_036_854_774_784.0),
            Self::UInt8 => (0.0, u8::MAX as f64),
            Self::UInt16 => (0.0, u16::MAX as f64),
            Self::UInt32 => (0.0, u32::MAX as f64),
            Self::UInt64 => (0.0, 18_446_744_073_709_549_568.0),
            Self::PyInt => (-MAX_EXACT_INT, MAX_EXACT_INT),
        };
        Some(b)
    }

    pub fn is_integer(self) -> bool {
        self.integer_bounds().is_some()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Float32 => "float32",
            Self::Float64 => "float64",
            Self::Int8 => "int8",
            Self::Int16 => "int16",
            Self::Int32 => "int32",
            Self::Int64 => "int64",
            Self::UInt8 => "uint8",
            Self::UInt16 => "uint16",
            Self::UInt32 => "uint32",
            Self::UInt64 => "uint64",
            Self::PyInt => "int",
        }
    }

    /// Whether `v` is already a valid value of this type.
    pub fn admits(self, v: f64) -> bool {
        coerce_gene(v, self) == Ok(v)
    }

    /// Image of a space member under this type, `None` when the type
    /// cannot hold it without changing it (integer types only).
    fn project(self, v: f64) -> Option<f64> {
        match self {
            Self::Float64 => Some(v),
            Self::Float32 => coerce_gene(v, self).ok(),
            _ => self.admits(v).then_some(v),
        }
    }
}

impl fmt::Display for GeneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "float32" => Self::Float32,
            "float64" | "float" => Self::Float64,
            "int8" => Self::Int8,
            "int16" => Self::Int16,
            "int32" => Self::Int32,
            "int64" => Self::Int64,
            "uint8" => Self::UInt8,
            "uint16" => Self::UInt16,
            "uint32" => Self::UInt32,
            "uint64" => Self::UInt64,
            "int" | "pyint" => Self::PyInt,
            other => return Err(format!("unknown gene type `{other}`")),
        })
    }
}

/// Converts `v` into a valid value of type `ty`.
///
/// Integer types round half away from zero and clamp into range; `PyInt`
/// rounds without clamping and rejects values it cannot hold exactly.
pub fn coerce_gene(v: f64, ty: GeneType) -> Result<f64, GenomeError> {
    if !v.is_finite() {
        return Err(GenomeError::NonFiniteGene { value: v });
    }
    match ty {
        GeneType::Float64 => Ok(v),
        GeneType::Float32 => Ok(v.clamp(f32::MIN as f64, f32::MAX as f64) as f32 as f64),
        GeneType::PyInt => {
            let r = v.round();
            if r.abs() > MAX_EXACT_INT {
                Err(GenomeError::NonFiniteGene { value: v })
            } else {
                Ok(r)
            }
        }
        int => {
            let (lo, hi) = int.integer_bounds().expect("integer type");
            Ok(v.round().clamp(lo, hi))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneSpace {
    Unconstrained,
    DiscreteSet(Vec<f64>),
    /// Half-open `[lo, hi)`; with a step, the lattice `lo + k·step` inside it.
    Range {
        lo: f64,
        hi: f64,
        step: Option<f64>,
    },
}

impl GeneSpace {
    pub fn check(&self) -> Result<(), String> {
        match self {
            Self::Unconstrained => Ok(()),
            Self::DiscreteSet(values) => {
                if values.is_empty() {
                    return Err("non-empty value set".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err("finite values".into());
                }
                for (i, a) in values.iter().enumerate() {
                    if values[..i].contains(a) {
                        return Err("distinct values".into());
                    }
                }
                Ok(())
            }
            Self::Range { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err("finite lo < hi".into());
                }
                match step {
                    Some(s) if !(s.is_finite() && *s > 0.0) => Err("positive step".into()),
                    _ => Ok(()),
                }
            }
        }
    }

    /// Number of lattice points of a stepped range.
    fn lattice_len(lo: f64, hi: f64, step: f64) -> usize {
        let mut n = ((hi - lo) / step).ceil().max(0.0) as usize;
        while n > 0 && lo + (n - 1) as f64 * step >= hi {
            n -= 1;
        }
        while lo + n as f64 * step < hi {
            n += 1;
        }
        n
    }
}

impl fmt::Display for GeneSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unconstrained => f.write_str("unconstrained"),
            Self::DiscreteSet(values) => {
                f.write_str("set:")?;
                write_list(f, values)
            }
            Self::Range { lo, hi, step: None } => write!(f, "range:{lo},{hi}"),
            Self::Range {
                lo,
                hi,
                step: Some(s),
            } => write!(f, "range:{lo},{hi},{s}"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl FromStr for GeneSpace {
    type Err = String;

    /// `unconstrained`, `set:0,1,2`, `range:lo,hi` or `range:lo,hi,step`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "unconstrained" {
            return Ok(Self::Unconstrained);
        }
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| format!("bad gene space `{s}`"))?;
        let nums = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad number `{t}`"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match (kind, nums.as_slice()) {
            ("set", _) => Ok(Self::DiscreteSet(nums)),
            ("range", [lo, hi]) => Ok(Self::Range {
                lo: *lo,
                hi: *hi,
                step: None,
            }),
            ("range", [lo, hi, step]) => Ok(Self::Range {
                lo: *lo,
                hi: *hi,
                step: Some(*step),
            }),
            _ => Err(format!("bad gene space `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneSpaceSpec {
    Global(GeneSpace),
    PerGene(Vec<GeneSpace>),
}

impl GeneSpaceSpec {
    pub fn get(&self, gene: usize) -> Option<&GeneSpace> {
        match self {
            Self::Global(s) => Some(s),
            Self::PerGene(v) => v.get(gene),
        }
    }
}

impl FromStr for GeneSpaceSpec {
    type Err = String;

    /// One space for all genes, or `;`-separated spaces, one per gene.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<GeneSpace>, _>>()?;
        Ok(if parts.len() == 1 {
            Self::Global(parts.into_iter().next().expect("one part"))
        } else {
            Self::PerGene(parts)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneTypeSpec {
    Global(GeneType),
    PerGene(Vec<GeneType>),
}

impl Default for GeneTypeSpec {
    fn default() -> Self {
        Self::Global(GeneType::Float64)
    }
}

impl GeneTypeSpec {
    pub fn get(&self, gene: usize) -> GeneType {
        match self {
            Self::Global(t) => *t,
            Self::PerGene(v) => v.get(gene).copied().unwrap_or(GeneType::Float64),
        }
    }
}

impl FromStr for GeneTypeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<GeneType>, _>>()?;
        Ok(if parts.len() == 1 {
            Self::Global(parts[0])
        } else {
            Self::PerGene(parts)
        })
    }
}

static UNCONSTRAINED: GeneSpace = GeneSpace::Unconstrained;

/// Everything that decides which values one gene position may take.
#[derive(Debug, Clone, Copy)]
pub struct GeneDomain<'a> {
    pub space: &'a GeneSpace,
    pub ty: GeneType,
    pub init_range: Interval,
}

impl<'a> GeneDomain<'a> {
    pub fn new(space: &'a GeneSpace, ty: GeneType, init_range: Interval) -> Self {
        Self {
            space,
            ty,
            init_range,
        }
    }

    /// Domain of gene `gene` under a space/type specification.
    pub fn of(
        spec: Option<&'a GeneSpaceSpec>,
        types: &GeneTypeSpec,
        init_range: Interval,
        gene: usize,
    ) -> Self {
        let space = spec.and_then(|s| s.get(gene)).unwrap_or(&UNCONSTRAINED);
        Self::new(space, types.get(gene), init_range)
    }

    /// Domain of gene `gene` in a validated configuration.
    pub fn from_config(cfg: &'a GaConfig, gene: usize) -> Self {
        Self::of(
            cfg.gene_space.as_ref(),
            &cfg.gene_type,
            cfg.init_range,
            gene,
        )
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self.space, GeneSpace::Unconstrained)
    }

    /// Membership in the admissible set.
    pub fn contains(&self, v: f64) -> bool {
        if !self.ty.admits(v) {
            return false;
        }
        match self.space {
            GeneSpace::Unconstrained => true,
            GeneSpace::DiscreteSet(values) => values.iter().any(|&x| self.ty.project(x) == Some(v)),
            GeneSpace::Range { lo, hi, step: None } => *lo <= v && v < *hi,
            GeneSpace::Range {
                lo,
                hi,
                step: Some(step),
            } => {
                let k = ((v - lo) / step).round();
                [k - 1.0, k, k + 1.0].iter().any(|&k| {
                    let x = lo + k * step;
                    k >= 0.0 && x < *hi && self.ty.project(x) == Some(v)
                })
            }
        }
    }

    /// The whole admissible set, when it is finite and small enough to list.
    pub fn finite_values(&self) -> Option<Vec<f64>> {
        let mut out: Vec<f64> = match self.space {
            GeneSpace::Unconstrained => return None,
            GeneSpace::DiscreteSet(values) => {
                values.iter().filter_map(|&x| self.ty.project(x)).collect()
            }
            GeneSpace::Range { lo, hi, step: None } => {
                let (a, b) = self.integer_span(*lo, *hi)?;
                if b < a {
                    return Some(Vec::new());
                }
                if b - a >= ENUMERATION_CAP as f64 {
                    return None;
                }
                (0..=(b - a) as usize).map(|k| a + k as f64).collect()
            }
            GeneSpace::Range {
                lo,
                hi,
                step: Some(step),
            } => {
                let n = GeneSpace::lattice_len(*lo, *hi, *step);
                if n > ENUMERATION_CAP {
                    return None;
                }
                (0..n)
                    .filter_map(|k| self.ty.project(lo + k as f64 * step))
                    .collect()
            }
        };
        // Float32 rounding can merge neighbouring members.
        let mut i = 0;
        while i < out.len() {
            if out[..i].contains(&out[i]) {
                out.remove(i);
            } else {
                i += 1;
            }
        }
        Some(out)
    }

    /// Integers of `[lo, hi)` representable by an integer type.
    fn integer_span(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let (tmin, tmax) = self.ty.integer_bounds()?;
        Some((lo.ceil().max(tmin), (hi.ceil() - 1.0).min(tmax)))
    }

    /// Uniform draw from the admissible set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, gene: usize) -> Result<f64, GenomeError> {
        let empty = GenomeError::EmptySpace { gene };
        match self.space {
            GeneSpace::Unconstrained => coerce_gene(self.init_range.sample(rng), self.ty),
            GeneSpace::DiscreteSet(_) => {
                let values = self.finite_values().expect("discrete sets are finite");
                values.choose(rng).copied().ok_or(empty)
            }
            GeneSpace::Range { lo, hi, step: None } => {
                if let Some((a, b)) = self.integer_span(*lo, *hi) {
                    if b < a {
                        return Err(empty);
                    }
                    let v = (a + (rng.random::<f64>() * (b - a + 1.0)).floor()).min(b);
                    return Ok(v);
                }
                let range = Interval::new(*lo, *hi);
                for _ in 0..REDRAW_BUDGET {
                    let v = coerce_gene(range.sample(rng), self.ty)?;
                    if self.contains(v) {
                        return Ok(v);
                    }
                }
                Err(empty)
            }
            GeneSpace::Range {
                lo,
                hi,
                step: Some(step),
            } => {
                let n = GeneSpace::lattice_len(*lo, *hi, *step);
                if n == 0 {
                    return Err(empty);
                }
                for _ in 0..REDRAW_BUDGET {
                    let k = rng.random_range(0..n);
                    if let Some(v) = self.ty.project(lo + k as f64 * step) {
                        return Ok(v);
                    }
                }
                self.finite_values()
                    .and_then(|values| values.choose(rng).copied())
                    .ok_or(empty)
            }
        }
    }

    /// Uniform draw from the admissible set minus `exclude`.
    pub fn sample_excluding<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        gene: usize,
        exclude: &[f64],
    ) -> Result<f64, GenomeError> {
        let insufficient = GenomeError::InsufficientSpace { gene };
        if let Some(values) = self.finite_values() {
            let free: Vec<f64> = values
                .into_iter()
                .filter(|v| !exclude.contains(v))
                .collect();
            return free.choose(rng).copied().ok_or(insufficient);
        }
        for _ in 0..REDRAW_BUDGET {
            let v = self.sample(rng, gene).map_err(|_| insufficient.clone())?;
            if !exclude.contains(&v) {
                return Ok(v);
            }
        }
        Err(insufficient)
    }
}

/// Uniform draw for one gene; see [`GeneDomain::sample`].
pub fn sample_gene<R: Rng + ?Sized>(
    space: &GeneSpace,
    ty: GeneType,
    init_range: Interval,
    rng: &mut R,
) -> Result<f64, GenomeError> {
    GeneDomain::new(space, ty, init_range).sample(rng, 0)
}

/// One candidate solution: a fixed-length vector of gene values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Chromosome(Vec<f64>);

impl Chromosome {
    pub fn new(genes: Vec<f64>) -> Self {
        Self(genes)
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub fn into_genes(self) -> Vec<f64> {
        self.0
    }

    /// Whether any value repeats.
    pub fn has_duplicates(&self) -> bool {
        self.0
            .iter()
            .enumerate()
            .any(|(i, v)| self.0[..i].contains(v))
    }
}

impl Deref for Chromosome {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Chromosome {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Chromosome {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        write_list(f, &self.0)?;
        f.write_str("]")
    }
}

/// Rectangular set of chromosomes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    rows: Vec<Chromosome>,
}

impl Population {
    pub fn new(rows: Vec<Chromosome>) -> Result<Self, GenomeError> {
        if let Some(first) = rows.first() {
            if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
                return Err(GenomeError::DimensionMismatch {
                    expected: format!("{} genes per row", first.len()),
                    got: format!("{} genes", bad.len()),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GenomeError> {
        Self::new(rows.into_iter().map(Chromosome::new).collect())
    }

    pub fn rows(&self) -> &[Chromosome] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Chromosome> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_genes(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// One chromosome per line, genes as shortest round-trip decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|g| g.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv_reader<R: io::Read>(reader: R) -> Result<Self, GenomeError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| GenomeError::Csv(e.to_string()))?;
            let genes = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| {
                        GenomeError::Csv(format!("line {}: bad gene `{field}`", line + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(Chromosome::new(genes));
        }
        Self::new(rows)
    }

    pub fn read_csv(path: &Path) -> Result<Self, GenomeError> {
        let file = std::fs::File::open(path)
            .map_err(|e| GenomeError::Csv(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }
}

/// Rewrites later duplicates so that every gene value is unique.
///
/// Genes are scanned left to right; the first occurrence of a value stays,
/// each later occurrence is redrawn from its admissible set minus every value
/// currently in the chromosome.
pub fn repair_duplicates<R: Rng + ?Sized>(
    c: &Chromosome,
    spec: Option<&GeneSpaceSpec>,
    types: &GeneTypeSpec,
    init_range: Interval,
    rng: &mut R,
) -> Result<Chromosome, GenomeError> {
    let mut genes = c.clone().into_genes();
    for i in 0..genes.len() {
        if genes[..i].contains(&genes[i]) {
            let domain = GeneDomain::of(spec, types, init_range, i);
            genes[i] = domain.sample_excluding(rng, i, &genes)?;
        }
    }
    Ok(Chromosome::new(genes))
}

/// Starting population: the user's, coerced and de-duplicated, or a fresh draw.
pub fn init_population<R: Rng + ?Sized>(
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Population, GenomeError> {
    let rows = match &cfg.initial_population {
        Some(user) => {
            if user.len() != cfg.sol_per_pop || user.num_genes() != cfg.num_genes {
                return Err(GenomeError::DimensionMismatch {
                    expected: format!("{} × {}", cfg.sol_per_pop, cfg.num_genes),
                    got: format!("{} × {}", user.len(), user.num_genes()),
                });
            }
            user.rows()
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(i, &g)| coerce_gene(g, cfg.gene_type.get(i)))
                        .collect::<Result<Vec<_>, _>>()
                        .map(Chromosome::new)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => (0..cfg.sol_per_pop)
            .map(|_| {
                (0..cfg.num_genes)
                    .map(|i| GeneDomain::from_config(cfg, i).sample(rng, i))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Chromosome::new)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let rows = if cfg.allow_duplicate_genes {
        rows
    } else {
        rows.iter()
            .map(|row| {
                repair_duplicates(
                    row,
                    cfg.gene_space.as_ref(),
                    &cfg.gene_type,
                    cfg.init_range,
                    rng,
                )
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    Population::new(rows)
}

/// Whether every gene of `c` is admissible and, if required, unique.
pub fn satisfies_constraints(c: &[f64], cfg: &GaConfig) -> bool {
    let admissible = c
        .iter()
        .enumerate()
        .all(|(i, &v)| GeneDomain::from_config(cfg, i).contains(v));
    let unique = cfg.allow_duplicate_genes || !Chromosome::new(c.to_vec()).has_duplicates();
    admissible && unique
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    const ALL_TYPES: [GeneType; 11] = [
        GeneType::Float32,
        GeneType::Float64,
        GeneType::Int8,
        GeneType::Int16,
        GeneType::Int32,
        GeneType::Int64,
        GeneType::UInt8,
        GeneType::UInt16,
        GeneType::UInt32,
        GeneType::UInt64,
        GeneType::PyInt,
    ];

    fn default_range() -> Interval {
        Interval::new(-4.0, 4.0)
    }

    #[test]
    fn coerce_examples() {
        assert_eq!(coerce_gene(2.5, GeneType::Int32), Ok(3.0));
        assert_eq!(coerce_gene(-2.5, GeneType::Int32), Ok(-3.0));
        assert_eq!(coerce_gene(-1.0, GeneType::UInt8), Ok(0.0));
        assert_eq!(coerce_gene(300.0, GeneType::UInt8), Ok(255.0));
        assert_eq!(coerce_gene(0.1, GeneType::Float32), Ok(0.1f32 as f64));
        assert_eq!(
            coerce_gene(1.0e300, GeneType::Int64).map(|v| v < 9.3e18),
            Ok(true)
        );
        assert!(matches!(
            coerce_gene(f64::NAN, GeneType::Float64),
            Err(GenomeError::NonFiniteGene { .. })
        ));
        assert!(coerce_gene(1.0e17, GeneType::PyInt).is_err());
        assert_eq!(coerce_gene(-7.4, GeneType::PyInt), Ok(-7.0));
    }

    #[test]
    fn singleton_set_always_sampled() {
        let space = GeneSpace::DiscreteSet(vec![7.0]);
        let mut rng = seeded(3);
        for _ in 0..50 {
            assert_eq!(
                sample_gene(&space, GeneType::Float64, default_range(), &mut rng),
                Ok(7.0)
            );
        }
    }

    #[test]
    fn stepped_range_hits_lattice() {
        let space = GeneSpace::Range {
            lo: 0.0,
            hi: 10.0,
            step: Some(5.0),
        };
        let mut rng = seeded(4);
        let mut seen = [false; 2];
        for _ in 0..200 {
            let v = sample_gene(&space, GeneType::Int32, default_range(), &mut rng).unwrap();
            assert!(v == 0.0 || v == 5.0, "{v}");
            seen[(v / 5.0) as usize] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn unconstrained_draws_stay_in_init_range() {
        let mut rng = seeded(5);
        for _ in 0..10_000 {
            let v = sample_gene(
                &GeneSpace::Unconstrained,
                GeneType::Float64,
                default_range(),
                &mut rng,
            )
            .unwrap();
            assert!((-4.0..4.0).contains(&v));
        }
    }

    #[test]
    fn empty_lattice_after_typing() {
        let space = GeneSpace::Range {
            lo: 0.25,
            hi: 1.0,
            step: Some(0.5),
        };
        let err = sample_gene(&space, GeneType::Int8, default_range(), &mut seeded(0));
        assert_eq!(err, Err(GenomeError::EmptySpace { gene: 0 }));
        let space = GeneSpace::Range {
            lo: 0.2,
            hi: 0.8,
            step: None,
        };
        assert!(sample_gene(&space, GeneType::UInt8, default_range(), &mut seeded(0)).is_err());
        let space = GeneSpace::DiscreteSet(vec![0.5, 1.5]);
        assert!(sample_gene(&space, GeneType::Int16, default_range(), &mut seeded(0)).is_err());
    }

    #[test]
    fn integer_range_respects_bounds() {
        let space = GeneSpace::Range {
            lo: -10.0,
            hi: 300.0,
            step: None,
        };
        let mut rng = seeded(8);
        for _ in 0..1000 {
            let v = sample_gene(&space, GeneType::UInt8, default_range(), &mut rng).unwrap();
            assert!((0.0..=255.0).contains(&v) && v.fract() == 0.0);
        }
    }

    #[test]
    fn lattice_length() {
        assert_eq!(GeneSpace::lattice_len(0.0, 10.0, 5.0), 2);
        assert_eq!(GeneSpace::lattice_len(0.0, 10.0, 3.0), 4);
        assert_eq!(GeneSpace::lattice_len(0.0, 1.0, 0.1), 10);
    }

    #[test]
    fn repair_keeps_first_occurrence() {
        let spec = GeneSpaceSpec::Global(GeneSpace::DiscreteSet(vec![1.0, 2.0, 3.0, 4.0]));
        let types = GeneTypeSpec::default();
        for seed in 0..20 {
            let out = repair_duplicates(
                &Chromosome::new(vec![2.0, 2.0, 3.0]),
                Some(&spec),
                &types,
                default_range(),
                &mut seeded(seed),
            )
            .unwrap();
            assert_eq!(out[0], 2.0);
            assert_eq!(out[2], 3.0);
            assert!(out[1] == 1.0 || out[1] == 4.0);
        }
    }

    #[test]
    fn repair_identity_and_pigeonhole() {
        let types = GeneTypeSpec::default();
        let c = Chromosome::new(vec![1.0, 2.0]);
        assert_eq!(
            repair_duplicates(&c, None, &types, default_range(), &mut seeded(0)),
            Ok(c)
        );

        let spec = GeneSpaceSpec::Global(GeneSpace::DiscreteSet(vec![1.0, 2.0]));
        let c = Chromosome::new(vec![1.0, 1.0, 2.0]);
        assert_eq!(
            repair_duplicates(&c, Some(&spec), &types, default_range(), &mut seeded(0)),
            Err(GenomeError::InsufficientSpace { gene: 1 })
        );
    }

    #[test]
    fn init_population_shapes() {
        let cfg = GaConfig::new(10, 10, 5, 3).validate().unwrap();
        let pop = init_population(&cfg, &mut seeded(1)).unwrap();
        assert_eq!((pop.len(), pop.num_genes()), (10, 3));
        assert!(pop
            .rows()
            .iter()
            .flat_map(|r| r.iter())
            .all(|v| (-4.0..4.0).contains(v)));

        let mut cfg = GaConfig::new(10, 10, 5, 5);
        cfg.gene_space = Some(GeneSpaceSpec::Global(GeneSpace::DiscreteSet(vec![
            0.0, 1.0,
        ])));
        let pop = init_population(&cfg.validate().unwrap(), &mut seeded(1)).unwrap();
        assert!(pop
            .rows()
            .iter()
            .flat_map(|r| r.iter())
            .all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn user_population_passes_through() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let mut cfg = GaConfig::new(1, 2, 2, 2);
        cfg.initial_population = Some(Population::from_rows(rows.clone()).unwrap());
        let pop = init_population(&cfg.validate().unwrap(), &mut seeded(0)).unwrap();
        assert_eq!(pop, Population::from_rows(rows).unwrap());
    }

    #[test]
    fn csv_roundtrip() {
        let pop = Population::from_rows(vec![vec![0.1, -2.0, 1e-12], vec![3.5, 4.0, 5.0]]).unwrap();
        let text = pop.to_csv_string();
        assert_eq!(text.lines().next(), Some("0.1,-2,0.000000000001"));
        assert_eq!(Population::from_csv_reader(text.as_bytes()).unwrap(), pop);
        assert!(Population::from_csv_reader("1,2\n3\n".as_bytes()).is_err());
    }

    #[test]
    fn spec_strings() {
        assert_eq!(
            "range:0,10,5".parse::<GeneSpaceSpec>(),
            Ok(GeneSpaceSpec::Global(GeneSpace::Range {
                lo: 0.0,
                hi: 10.0,
                step: Some(5.0)
            }))
        );
        assert_eq!(
            "set:0,1;unconstrained".parse::<GeneSpaceSpec>(),
            Ok(GeneSpaceSpec::PerGene(vec![
                GeneSpace::DiscreteSet(vec![0.0, 1.0]),
                GeneSpace::Unconstrained
            ]))
        );
        assert_eq!(
            "int8;float32".parse::<GeneTypeSpec>(),
            Ok(GeneTypeSpec::PerGene(vec![
                GeneType::Int8,
                GeneType::Float32
            ]))
        );
        assert!("range:1".parse::<GeneSpace>().is_err());
        for t in ALL_TYPES {
            assert_eq!(t.name().parse::<GeneType>(), Ok(t));
        }
    }

    fn arb_space() -> impl Strategy<Value = GeneSpace> {
        prop_oneof![
            Just(GeneSpace::Unconstrained),
            proptest::collection::vec(-50i32..50, 1..12).prop_map(|v| {
                let mut v: Vec<f64> = v.into_iter().map(|x| x as f64 * 0.5).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                GeneSpace::DiscreteSet(v)
            }),
            (-20.0f64..20.0, 0.5f64..40.0).prop_map(|(lo, w)| GeneSpace::Range {
                lo,
                hi: lo + w,
                step: None
            }),
            (-20i32..20, 1i32..40, 1i32..8).prop_map(|(lo, w, s)| GeneSpace::Range {
                lo: lo as f64,
                hi: (lo + w) as f64,
                step: Some(s as f64 * 0.5),
            }),
        ]
    }

    proptest! {
        #[test]
        fn coerce_is_idempotent(v in -1.0e20f64..1.0e20, t in 0usize..11) {
            let ty = ALL_TYPES[t];
            if let Ok(once) = coerce_gene(v, ty) {
                prop_assert_eq!(coerce_gene(once, ty), Ok(once));
                prop_assert!(ty.admits(once));
            }
        }

        #[test]
        fn samples_are_members(space in arb_space(), t in 0usize..11, seed in any::<u64>()) {
            let domain = GeneDomain::new(&space, ALL_TYPES[t], default_range());
            let mut rng = seeded(seed);
            for _ in 0..20 {
                match domain.sample(&mut rng, 0) {
                    Ok(v) => prop_assert!(domain.contains(v), "{} not in {}", v, space),
                    Err(e) => {
                        prop_assert_eq!(e, GenomeError::EmptySpace { gene: 0 });
                        prop_assert_eq!(domain.finite_values().map(|v| v.len()), Some(0));
                        break;
                    }
                }
            }
        }

        #[test]
        fn repair_is_minimal_and_unique(
            genes in proptest::collection::vec(0i32..6, 1..8),
            seed in any::<u64>(),
        ) {
            let c = Chromosome::new(genes.iter().map(|&g| g as f64).collect());
            let spec = GeneSpaceSpec::Global(GeneSpace::Range { lo: 0.0, hi: 20.0, step: Some(1.0) });
            let types = GeneTypeSpec::Global(GeneType::Int32);
            let out = repair_duplicates(&c, Some(&spec), &types, default_range(), &mut seeded(seed)).unwrap();
            prop_assert!(!out.has_duplicates());
            for i in 0..c.len() {
                let was_dup = c[..i].contains(&c[i]);
                if !was_dup {
                    prop_assert_eq!(out[i], c[i]);
                }
                prop_assert!(GeneDomain::of(Some(&spec), &types, default_range(), i).contains(out[i]));
            }
        }
    }
}
