//! Shifted/rotated/hybrid/composition benchmark functions over the
//! [-100, 100]^D box, built from seeded synthetic shift vectors and
//! orthogonal rotation matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Objective, RngStream, SearchSpace};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unsupported dimension {0}; the suite supports 2, 10 and 20")]
    UnsupportedDim(usize),
}

/// Analytic base functions, each with global minimum 0 at a known optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseFunction {
    Sphere,
    Zakharov,
    Rosenbrock,
    SchafferF6Expanded,
    LevyFn,
    Rastrigin,
    HighConditionedElliptic,
}

impl BaseFunction {
    /// Canonical optimum component (the optimum is this value in every
    /// dimension).
    pub fn optimum_component(self) -> f64 {
        match self {
            BaseFunction::Rosenbrock | BaseFunction::LevyFn => 1.0,
            _ => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Zakharov => "zakharov",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::SchafferF6Expanded => "schaffer_f6_expanded",
            BaseFunction::LevyFn => "levy",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::HighConditionedElliptic => "high_conditioned_elliptic",
        }
    }
}

/// Standard closed-form value of a base function.
pub fn eval_base(id: BaseFunction, x: &[f64]) -> f64 {
    match id {
        BaseFunction::Sphere => x.iter().map(|v| v * v).sum(),
        BaseFunction::Zakharov => {
            let s1: f64 = x.iter().map(|v| v * v).sum();
            let s2: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| 0.5 * (i + 1) as f64 * v)
                .sum();
            s1 + s2 * s2 + s2.powi(4)
        }
        BaseFunction::Rosenbrock => x
            .windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum(),
        BaseFunction::SchafferF6Expanded => {
            let g = |a: f64, b: f64| {
                let r2 = a * a + b * b;
                0.5 + (r2.sqrt().sin().powi(2) - 0.5) / (1.0 + 0.001 * r2).powi(2)
            };
            if x.len() == 1 {
                return g(x[0], x[0]);
            }
            let mut total = 0.0;
            for i in 0..x.len() {
                total += g(x[i], x[(i + 1) % x.len()]);
            }
            total
        }
        BaseFunction::LevyFn => {
            let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
            let d = w.len();
            let mut total = (PI * w[0]).sin().powi(2);
            for i in 0..d - 1 {
                total += (w[i] - 1.0).powi(2) * (1.0 + 10.0 * (PI * w[i] + 1.0).sin().powi(2));
            }
            total + (w[d - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[d - 1]).sin().powi(2))
        }
        BaseFunction::Rastrigin => x
            .iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
            .sum(),
        BaseFunction::HighConditionedElliptic => {
            let d = x.len();
            x.iter()
                .enumerate()
                .map(|(i, v)| {
                    let exp = if d > 1 { i as f64 / (d - 1) as f64 } else { 0.0 };
                    1e6f64.powf(exp) * v * v
                })
                .sum()
        }
    }
}

/// Row-major square matrix for rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    dim: usize,
    data: Vec<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// Seeded random orthogonal matrix: QR of a Gaussian matrix with the
    /// sign of R's diagonal folded into Q.
    pub fn random(dim: usize, rng: &mut RngStream) -> Self {
        use rand_distr::{Distribution, StandardNormal};
        let g = DMatrix::from_fn(dim, dim, |_, _| -> f64 { StandardNormal.sample(rng.rng()) });
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                for i in 0..dim {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = q[(i, j)];
            }
        }
        Self { dim, data }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Max-norm of R^T R - I.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut dot = 0.0;
                for k in 0..self.dim {
                    dot += self.data[k * self.dim + i] * self.data[k * self.dim + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Dimension partition for hybrid functions: after rotation and
/// permutation, each chunk of coordinates feeds one base function.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSpec {
    pub components: Vec<(BaseFunction, f64)>,
    pub permutation: Vec<usize>,
    /// Chunk sizes resolved from the fractions; sums to dim.
    pub chunk_sizes: Vec<usize>,
}

impl HybridSpec {
    fn new(components: Vec<(BaseFunction, f64)>, dim: usize, rng: &mut RngStream) -> Self {
        // largest-remainder allocation of dim slots to fractional shares
        let mut sizes: Vec<usize> = components
            .iter()
            .map(|&(_, f)| (f * dim as f64).floor() as usize)
            .collect();
        let mut assigned: usize = sizes.iter().sum();
        let mut remainders: Vec<(usize, f64)> = components
            .iter()
            .enumerate()
            .map(|(i, &(_, f))| (i, f * dim as f64 - sizes[i] as f64))
            .collect();
        remainders.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut ri = 0;
        while assigned < dim {
            sizes[remainders[ri % remainders.len()].0] += 1;
            assigned += 1;
            ri += 1;
        }
        let mut permutation: Vec<usize> = (0..dim).collect();
        for i in (1..dim).rev() {
            let j = rng.index(i + 1);
            permutation.swap(i, j);
        }
        Self {
            components,
            permutation,
            chunk_sizes: sizes,
        }
    }
}

/// One mixture component of a composition function.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionComponent {
    pub base: BaseFunction,
    pub shift: Vec<f64>,
    pub rotation: Rotation,
    pub sigma: f64,
    pub lambda: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionSpec {
    pub components: Vec<CompositionComponent>,
}

/// Distance-weighted mixture of shifted component landscapes. Exactly at
/// a component's shift the weight degenerates to that component alone.
pub fn eval_composition(spec: &CompositionSpec, x: &[f64]) -> f64 {
    let dim = x.len() as f64;
    let mut weights = Vec::with_capacity(spec.components.len());
    for comp in &spec.components {
        let d2: f64 = x
            .iter()
            .zip(&comp.shift)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d2 < 1e-24 {
            // weight degeneracy: sit exactly on this component
            let z = comp.rotation.apply(
                &x.iter()
                    .zip(&comp.shift)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<f64>>(),
            );
            let zo: Vec<f64> = z
                .iter()
                .map(|&v| v + comp.base.optimum_component())
                .collect();
            return comp.lambda * eval_base(comp.base, &zo) + comp.bias;
        }
        let d = d2.sqrt();
        let w = (-d2 / (2.0 * dim * comp.sigma * comp.sigma)).exp() / d;
        weights.push(w);
    }
    let total: f64 = weights.iter().sum();
    let mut value = 0.0;
    for (comp, w) in spec.components.iter().zip(&weights) {
        let diff: Vec<f64> = x.iter().zip(&comp.shift).map(|(a, b)| a - b).collect();
        let z = comp.rotation.apply(&diff);
        let zo: Vec<f64> = z
            .iter()
            .map(|&v| v + comp.base.optimum_component())
            .collect();
        value += w / total * (comp.lambda * eval_base(comp.base, &zo) + comp.bias);
    }
    value
}

#[derive(Debug, Clone, PartialEq)]
pub enum Landscape {
    Single {
        base: BaseFunction,
        rotation: Rotation,
    },
    Hybrid {
        spec: HybridSpec,
        rotation: Rotation,
    },
    Composition(CompositionSpec),
}

/// A benchmark function: base landscape composed with a shift vector, an
/// orthogonal rotation, and a bias offset, minimized at `optimum()` where
/// it attains exactly `bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub name: String,
    pub slot: usize,
    pub dim: usize,
    pub bias: f64,
    pub seed: u64,
    shift: Vec<f64>,
    landscape: Landscape,
}

impl TestFunction {
    pub fn space(&self) -> SearchSpace {
        SearchSpace::symmetric(self.dim, -100.0, 100.0).expect("fixed bounds")
    }

    /// Position where the function attains its bias.
    pub fn optimum(&self) -> &[f64] {
        &self.shift
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.landscape {
            Landscape::Single { base, rotation } => {
                let diff: Vec<f64> = x.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
                let z = rotation.apply(&diff);
                let zo: Vec<f64> = z.iter().map(|&v| v + base.optimum_component()).collect();
                eval_base(*base, &zo) + self.bias
            }
            Landscape::Hybrid { spec, rotation } => {
                let diff: Vec<f64> = x.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
                let z = rotation.apply(&diff);
                let permuted: Vec<f64> = spec.permutation.iter().map(|&i| z[i]).collect();
                let mut total = 0.0;
                let mut offset = 0;
                for (&(base, _), &size) in spec.components.iter().zip(&spec.chunk_sizes) {
                    if size == 0 {
                        continue;
                    }
                    let chunk: Vec<f64> = permuted[offset..offset + size]
                        .iter()
                        .map(|&v| v + base.optimum_component())
                        .collect();
                    total += eval_base(base, &chunk);
                    offset += size;
                }
                total + self.bias
            }
            Landscape::Composition(spec) => eval_composition(spec, x),
        }
    }

    pub fn rotation_defect(&self) -> f64 {
        match &self.landscape {
            Landscape::Single { rotation, .. } | Landscape::Hybrid { rotation, .. } => {
                rotation.orthogonality_defect()
            }
            Landscape::Composition(spec) => spec
                .components
                .iter()
                .map(|c| c.rotation.orthogonality_defect())
                .fold(0.0, f64::max),
        }
    }

    fn manifest_bases(&self) -> Vec<String> {
        match &self.landscape {
            Landscape::Single { base, .. } => vec![base.name().to_string()],
            Landscape::Hybrid { spec, .. } => spec
                .components
                .iter()
                .map(|(b, f)| format!("{}:{}", b.name(), f))
                .collect(),
            Landscape::Composition(spec) => spec
                .components
                .iter()
                .map(|c| {
                    format!(
                        "{}:sigma={},lambda={},bias={}",
                        c.base.name(),
                        c.sigma,
                        c.lambda,
                        c.bias
                    )
                })
                .collect(),
        }
    }
}

impl Objective for TestFunction {
    fn arity(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

/// Auditable description of one suite slot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteManifestEntry {
    pub slot: usize,
    pub name: String,
    pub kind: String,
    pub bases: Vec<String>,
    pub seed: u64,
    pub bias: f64,
    pub dim: usize,
}

pub fn suite_manifest(suite: &[TestFunction]) -> Vec<SuiteManifestEntry> {
    suite
        .iter()
        .map(|f| SuiteManifestEntry {
            slot: f.slot,
            name: f.name.clone(),
            kind: match &f.landscape {
                Landscape::Single { .. } => "shifted_rotated".to_string(),
                Landscape::Hybrid { .. } => "hybrid".to_string(),
                Landscape::Composition(_) => "composition".to_string(),
            },
            bases: f.manifest_bases(),
            seed: f.seed,
            bias: f.bias,
            dim: f.dim,
        })
        .collect()
}

fn draw_shift(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..dim).map(|_| rng.uniform_in(-80.0, 80.0)).collect()
}

/// Seeded shifted-rotated wrapper: f(x) = base(R (x - shift) + opt) + bias.
pub fn make_shifted_rotated(
    base: BaseFunction,
    dim: usize,
    bias: f64,
    seed: u64,
) -> TestFunction {
    let mut rng = RngStream::new(seed);
    let shift = draw_shift(dim, &mut rng);
    let rotation = Rotation::random(dim, &mut rng);
    TestFunction {
        name: format!("shifted_rotated_{}", base.name()),
        slot: 0,
        dim,
        bias,
        seed,
        shift,
        landscape: Landscape::Single { base, rotation },
    }
}

fn make_hybrid(dim: usize, bias: f64, seed: u64) -> TestFunction {
    let mut rng = RngStream::new(seed);
    let shift = draw_shift(dim, &mut rng);
    let rotation = Rotation::random(dim, &mut rng);
    let components = vec![
        (BaseFunction::Sphere, 0.1),
        (BaseFunction::Zakharov, 0.2),
        (BaseFunction::Rosenbrock, 0.2),
        (BaseFunction::SchafferF6Expanded, 0.1),
        (BaseFunction::LevyFn, 0.2),
        (BaseFunction::Rastrigin, 0.2),
    ];
    let spec = HybridSpec::new(components, dim, &mut rng);
    TestFunction {
        name: "hybrid_6".to_string(),
        slot: 0,
        dim,
        bias,
        seed,
        shift,
        landscape: Landscape::Hybrid { spec, rotation },
    }
}

fn make_composition(dim: usize, bias: f64, n: usize, seed: u64) -> TestFunction {
    let mut rng = RngStream::new(seed);
    let pool = [
        BaseFunction::Rastrigin,
        BaseFunction::Sphere,
        BaseFunction::HighConditionedElliptic,
        BaseFunction::SchafferF6Expanded,
        BaseFunction::Zakharov,
        BaseFunction::LevyFn,
    ];
    let mut components = Vec::with_capacity(n);
    for k in 0..n {
        let shift = draw_shift(dim, &mut rng);
        let rotation = Rotation::random(dim, &mut rng);
        components.push(CompositionComponent {
            base: pool[k % pool.len()],
            shift,
            rotation,
            sigma: 10.0 * (k + 1) as f64,
            lambda: 1.0 / (k + 1) as f64,
            bias: bias + 100.0 * k as f64,
        });
    }
    let shift = components[0].shift.clone();
    TestFunction {
        name: format!("composition_{n}"),
        slot: 0,
        dim,
        bias,
        seed,
        shift,
        landscape: Landscape::Composition(CompositionSpec { components }),
    }
}

const SUITE_SEED_BASE: u64 = 0x5eed_cec2;

/// The ten-function suite: shifted/rotated Zakharov, Rosenbrock, expanded
/// Schaffer F6 and a Levy function, one six-part hybrid, and five
/// compositions, with fixed per-slot seeds and biases 300..2700.
pub fn make_suite(dim: usize) -> Result<Vec<TestFunction>, SuiteError> {
    if ![2, 10, 20].contains(&dim) {
        return Err(SuiteError::UnsupportedDim(dim));
    }
    let seed = |slot: u64| crate::core::derive_seed(SUITE_SEED_BASE, &[slot, dim as u64]);
    let mut suite = vec![
        make_shifted_rotated(BaseFunction::Zakharov, dim, 300.0, seed(0)),
        make_shifted_rotated(BaseFunction::Rosenbrock, dim, 400.0, seed(1)),
        make_shifted_rotated(BaseFunction::SchafferF6Expanded, dim, 600.0, seed(2)),
        make_shifted_rotated(BaseFunction::LevyFn, dim, 900.0, seed(3)),
        make_hybrid(dim, 2000.0, seed(4)),
        make_composition(dim, 2200.0, 3, seed(5)),
        make_composition(dim, 2300.0, 5, seed(6)),
        make_composition(dim, 2400.0, 4, seed(7)),
        make_composition(dim, 2600.0, 5, seed(8)),
        make_composition(dim, 2700.0, 6, seed(9)),
    ];
    for (i, f) in suite.iter_mut().enumerate() {
        f.slot = i;
        f.name = format!("F{}_{}", i + 1, f.name);
    }
    Ok(suite)
}
