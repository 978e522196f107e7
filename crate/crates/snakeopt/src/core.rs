//! Shared optimization substrate: search spaces, populations, the objective
//! contract, seeded RNG streams, and run results.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guard added to fitness-ratio denominators so shifted (possibly negative
/// or zero) objective values cannot blow up the exponential ability terms.
pub const FITNESS_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid bounds at index {index}: lower {lower} must be < upper {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("population size {got} below minimum {min}")]
    PopulationTooSmall { got: usize, min: usize },
    #[error("objective returned non-finite value {value} at {position:?}")]
    NonFiniteObjective { value: f64, position: Vec<f64> },
    #[error("max_iter must be positive")]
    ZeroIterations,
}

/// Box-constrained optimization domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, CoreError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(CoreError::DimensionMismatch {
                expected: lower.len().max(1),
                got: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // rejects NaN bounds as well as inverted ones
            if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return Err(CoreError::InvalidBounds {
                    index: i,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Same bounds in every dimension.
    pub fn symmetric(dim: usize, lower: f64, upper: f64) -> Result<Self, CoreError> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((&v, &lo), &hi)| v >= lo && v <= hi)
    }

    /// Uniform draw inside the box.
    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.lower[i] + rng.uniform() * self.width(i))
            .collect()
    }
}

/// Deterministic scalar objective over fixed-length real vectors.
///
/// Implementations must be pure: the same input always yields the same
/// output, and evaluation from concurrent runs must be safe.
pub trait Objective: Sync {
    fn arity(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for (usize, F) {
    fn arity(&self) -> usize {
        self.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.1)(x)
    }
}

/// Per-run evaluation wrapper enforcing finiteness and counting calls.
pub struct Evaluator<'a> {
    obj: &'a dyn Objective,
    count: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(obj: &'a dyn Objective) -> Self {
        Self { obj, count: 0 }
    }

    pub fn eval(&mut self, x: &[f64]) -> Result<f64, CoreError> {
        self.count += 1;
        let v = self.obj.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CoreError::NonFiniteObjective {
                value: v,
                position: x.to_vec(),
            })
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

/// Candidate solution with cached fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub position: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(position: Vec<f64>) -> Self {
        Self {
            position,
            fitness: None,
        }
    }

    pub fn fitness(&self) -> f64 {
        self.fitness.expect("individual not evaluated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
}

impl Population {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Index of the member with lowest fitness.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, m) in self.members.iter().enumerate() {
            if m.fitness() < self.members[best].fitness() {
                best = i;
            }
        }
        best
    }

    /// Index of the member with highest fitness.
    pub fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (i, m) in self.members.iter().enumerate() {
            if m.fitness() > self.members[worst].fitness() {
                worst = i;
            }
        }
        worst
    }
}

/// Seeded RNG stream with reproducible substream derivation.
///
/// Substreams for (trial, algorithm, function) label tuples are derived by
/// mixing the labels into the master seed, so paired trials share function
/// instances without sharing randomness.
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mix a master seed with label words into a derived seed.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut acc = splitmix64(master);
    for &l in labels {
        acc = splitmix64(acc ^ splitmix64(l.wrapping_add(0xa5a5_a5a5_5a5a_5a5a)));
    }
    acc
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn substream(master: u64, labels: &[u64]) -> Self {
        Self::new(derive_seed(master, labels))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Random sign, + with probability 0.5.
    pub fn sign(&mut self) -> f64 {
        if self.rng.gen::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness per iteration; monotone nonincreasing.
    pub history: Vec<f64>,
    pub evaluations: u64,
}

/// Saturate a position onto the box bounds.
pub fn clamp(position: &[f64], space: &SearchSpace) -> Result<Vec<f64>, CoreError> {
    if position.len() != space.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: space.dim(),
            got: position.len(),
        });
    }
    Ok(position
        .iter()
        .enumerate()
        .map(|(i, &v)| v.clamp(space.lower()[i], space.upper()[i]))
        .collect())
}

/// In-place clamp for positions already known to match the space dimension.
pub fn clamp_in_place(position: &mut [f64], space: &SearchSpace) {
    for (i, v) in position.iter_mut().enumerate() {
        *v = v.clamp(space.lower()[i], space.upper()[i]);
    }
}

/// Uniform random initialization inside the box.
pub fn random_init(
    space: &SearchSpace,
    n: usize,
    rng: &mut RngStream,
) -> Result<Population, CoreError> {
    if n < 2 {
        return Err(CoreError::PopulationTooSmall { got: n, min: 2 });
    }
    let members = (0..n).map(|_| Individual::new(space.sample(rng))).collect();
    Ok(Population { members })
}

/// Evaluate every member, filling in cached fitness.
pub fn evaluate(pop: &mut Population, eval: &mut Evaluator) -> Result<(), CoreError> {
    for m in &mut pop.members {
        m.fitness = Some(eval.eval(&m.position)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(dim: usize) -> (usize, impl Fn(&[f64]) -> f64 + Sync) {
        (dim, |x: &[f64]| x.iter().map(|v| v * v).sum())
    }

    #[test]
    fn clamp_saturates() {
        let space = SearchSpace::symmetric(2, -100.0, 100.0).unwrap();
        assert_eq!(clamp(&[150.0, -150.0], &space).unwrap(), vec![100.0, -100.0]);
        assert_eq!(clamp(&[0.0, 0.0], &space).unwrap(), vec![0.0, 0.0]);
        assert_eq!(clamp(&[99.5, 101.0], &space).unwrap(), vec![99.5, 100.0]);
    }

    #[test]
    fn clamp_rejects_dim_mismatch() {
        let space = SearchSpace::symmetric(2, -1.0, 1.0).unwrap();
        assert!(matches!(
            clamp(&[0.0], &space),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_init_is_deterministic() {
        let space = SearchSpace::symmetric(2, 0.0, 1.0).unwrap();
        let a = random_init(&space, 5, &mut RngStream::new(42)).unwrap();
        let b = random_init(&space, 5, &mut RngStream::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_init_within_bounds() {
        let space = SearchSpace::symmetric(20, -100.0, 100.0).unwrap();
        let pop = random_init(&space, 30, &mut RngStream::new(7)).unwrap();
        for m in &pop.members {
            assert!(space.contains(&m.position));
        }
    }

    #[test]
    fn random_init_uniform_mean() {
        let space = SearchSpace::symmetric(1, 0.0, 1.0).unwrap();
        let pop = random_init(&space, 10_000, &mut RngStream::new(3)).unwrap();
        let mean: f64 =
            pop.members.iter().map(|m| m.position[0]).sum::<f64>() / pop.size() as f64;
        assert!((0.48..=0.52).contains(&mean), "mean {mean}");
    }

    #[test]
    fn random_init_rejects_tiny() {
        let space = SearchSpace::symmetric(2, 0.0, 1.0).unwrap();
        assert!(random_init(&space, 1, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn evaluate_sets_fitness_and_counts() {
        let space = SearchSpace::symmetric(2, -5.0, 5.0).unwrap();
        let obj = sphere(2);
        let mut pop = random_init(&space, 30, &mut RngStream::new(1)).unwrap();
        let mut eval = Evaluator::new(&obj);
        evaluate(&mut pop, &mut eval).unwrap();
        assert_eq!(eval.count(), 30);
        assert!(pop.members.iter().all(|m| m.fitness.is_some()));
    }

    #[test]
    fn evaluate_known_values() {
        let obj = sphere(2);
        let mut pop = Population {
            members: vec![
                Individual::new(vec![1.0, 1.0]),
                Individual::new(vec![2.0, 2.0]),
            ],
        };
        let mut eval = Evaluator::new(&obj);
        evaluate(&mut pop, &mut eval).unwrap();
        assert_eq!(pop.members[0].fitness(), 2.0);
        assert_eq!(pop.members[1].fitness(), 8.0);
    }

    #[test]
    fn evaluate_rejects_non_finite() {
        let obj = (1usize, |_: &[f64]| f64::NAN);
        let mut pop = Population {
            members: vec![Individual::new(vec![0.5]), Individual::new(vec![0.5])],
        };
        let mut eval = Evaluator::new(&obj);
        let err = evaluate(&mut pop, &mut eval).unwrap_err();
        assert!(matches!(err, CoreError::NonFiniteObjective { .. }));
    }

    #[test]
    fn substreams_differ_per_label() {
        let mut a = RngStream::substream(9, &[0, 1, 2]);
        let mut b = RngStream::substream(9, &[0, 1, 3]);
        let da: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let db: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        assert_ne!(da, db);
    }
}
