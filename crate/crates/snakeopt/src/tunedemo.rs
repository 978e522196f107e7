//! Desk-scale hyperparameter-tuning demo: the optimizers tune batch size,
//! learning rate, and hidden-node count of a tiny feedforward trajectory
//! surrogate over fixed ranges, with validation MSE as the black-box
//! objective.

use serde::{Deserialize, Serialize};

use crate::core::{Objective, RngStream, SearchSpace};
use crate::rivals::{run_rival, RivalConfig, RivalKind};
use crate::snake::{run_snake, SnakeConfig, StrategyToggles};

/// Loss returned when training diverges to a non-finite value.
pub const DIVERGENCE_PENALTY: f64 = 1e6;

pub const BATCH_RANGE: (f64, f64) = (16.0, 128.0);
pub const LR_RANGE: (f64, f64) = (0.0001, 0.02);
pub const NODES_RANGE: (f64, f64) = (50.0, 200.0);

const WINDOW: usize = 6;
const FEATURES: usize = 3;
const EPOCHS: usize = 30;

/// A concrete hyperparameter point. Integer fields are round-to-nearest
/// with clamping into their ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperPoint {
    pub batch: usize,
    pub nodes: usize,
    /// Learning rate scaled by 1e7 for exact equality; use `lr()`.
    lr_fixed: u64,
}

impl HyperPoint {
    pub fn new(batch: usize, lr: f64, nodes: usize) -> Self {
        Self {
            batch,
            nodes,
            lr_fixed: (lr * 1e7).round() as u64,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr_fixed as f64 / 1e7
    }

    pub fn in_range(&self) -> bool {
        (BATCH_RANGE.0..=BATCH_RANGE.1).contains(&(self.batch as f64))
            && (LR_RANGE.0 - 1e-12..=LR_RANGE.1 + 1e-12).contains(&self.lr())
            && (NODES_RANGE.0..=NODES_RANGE.1).contains(&(self.nodes as f64))
    }
}

/// Continuous 3-dim search box the optimizers work in:
/// (batch, lr, nodes).
pub fn hyper_space() -> SearchSpace {
    SearchSpace::new(
        vec![BATCH_RANGE.0, LR_RANGE.0, NODES_RANGE.0],
        vec![BATCH_RANGE.1, LR_RANGE.1, NODES_RANGE.1],
    )
    .expect("fixed ranges")
}

/// Round a continuous optimizer point into a valid hyperparameter point.
pub fn decode(x: &[f64]) -> HyperPoint {
    let clampi = |v: f64, lo: f64, hi: f64| v.round().clamp(lo, hi) as usize;
    HyperPoint::new(
        clampi(x[0], BATCH_RANGE.0, BATCH_RANGE.1),
        x[1].clamp(LR_RANGE.0, LR_RANGE.1),
        clampi(x[2], NODES_RANGE.0, NODES_RANGE.1),
    )
}

pub fn encode(hp: &HyperPoint) -> Vec<f64> {
    vec![hp.batch as f64, hp.lr(), hp.nodes as f64]
}

/// Synthetic (altitude, longitude, latitude) sequences from seeded smooth
/// curves plus noise, windowed into (6x3 input, 3 output) samples and
/// min-max normalized to [0, 1].
#[derive(Debug, Clone)]
pub struct SurrogateDataset {
    pub train: Vec<(Vec<f64>, [f64; 3])>,
    pub validation: Vec<(Vec<f64>, [f64; 3])>,
}

pub fn gen_dataset(seed: u64, n_sequences: usize) -> SurrogateDataset {
    assert!(n_sequences >= 10, "need at least 10 sequences");
    let mut rng = RngStream::substream(seed, &[0x9a7a]);
    let seq_len = 24;
    let mut raw: Vec<Vec<[f64; 3]>> = Vec::with_capacity(n_sequences);
    for _ in 0..n_sequences {
        // smooth flight-like profile: climb/cruise/descend altitude, two
        // drifting coordinates, small measurement noise
        let alt_peak = rng.uniform_in(8000.0, 12000.0);
        let lon0 = rng.uniform_in(108.0, 110.0);
        let lat0 = rng.uniform_in(34.0, 36.0);
        let dlon = rng.uniform_in(0.05, 0.12);
        let dlat = rng.uniform_in(0.03, 0.08);
        let phase = rng.uniform_in(0.0, std::f64::consts::TAU);
        let mut seq = Vec::with_capacity(seq_len);
        for t in 0..seq_len {
            let u = t as f64 / (seq_len - 1) as f64;
            let alt = alt_peak * (std::f64::consts::PI * u).sin().max(0.05)
                + 50.0 * (3.0 * u * std::f64::consts::TAU + phase).sin()
                + rng.uniform_in(-20.0, 20.0);
            let lon = lon0 + dlon * t as f64 + 0.01 * (phase + u * 4.0).cos()
                + rng.uniform_in(-0.002, 0.002);
            let lat = lat0 + dlat * t as f64 + 0.008 * (phase + u * 3.0).sin()
                + rng.uniform_in(-0.002, 0.002);
            seq.push([alt, lon, lat]);
        }
        raw.push(seq);
    }
    // global min-max normalization per feature
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for seq in &raw {
        for p in seq {
            for f in 0..FEATURES {
                lo[f] = lo[f].min(p[f]);
                hi[f] = hi[f].max(p[f]);
            }
        }
    }
    let norm = |p: &[f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for f in 0..FEATURES {
            out[f] = (p[f] - lo[f]) / (hi[f] - lo[f]);
        }
        out
    };
    let mut samples = Vec::new();
    for seq in &raw {
        for start in 0..seq.len() - WINDOW {
            let mut input = Vec::with_capacity(WINDOW * FEATURES);
            for t in start..start + WINDOW {
                input.extend_from_slice(&norm(&seq[t]));
            }
            samples.push((input, norm(&seq[start + WINDOW])));
        }
    }
    // deterministic shuffle, then 80/20 split
    for i in (1..samples.len()).rev() {
        let j = rng.index(i + 1);
        samples.swap(i, j);
    }
    let n_val = samples.len() / 5;
    let validation = samples.split_off(samples.len() - n_val);
    SurrogateDataset {
        train: samples,
        validation,
    }
}

/// Train the one-hidden-layer surrogate (tanh hidden, linear output) with
/// mini-batch gradient descent and return the validation MSE.
/// Deterministic given (hp, data, seed); non-finite losses return the
/// divergence penalty.
pub fn train_eval(hp: &HyperPoint, data: &SurrogateDataset, seed: u64) -> f64 {
    let n_in = WINDOW * FEATURES;
    let n_hidden = hp.nodes;
    let lr = hp.lr();
    let mut rng = RngStream::substream(seed, &[hp.batch as u64, hp.lr_fixed, hp.nodes as u64]);

    // Xavier-style init
    let scale_in = (1.0 / n_in as f64).sqrt();
    let scale_h = (1.0 / n_hidden as f64).sqrt();
    let mut w1: Vec<f64> = (0..n_hidden * n_in)
        .map(|_| rng.uniform_in(-scale_in, scale_in))
        .collect();
    let mut b1 = vec![0.0; n_hidden];
    let mut w2: Vec<f64> = (0..FEATURES * n_hidden)
        .map(|_| rng.uniform_in(-scale_h, scale_h))
        .collect();
    let mut b2 = vec![0.0; FEATURES];

    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut hidden = vec![0.0; n_hidden];
    let mut grad_hidden = vec![0.0; n_hidden];
    for _ in 0..EPOCHS {
        for i in (1..order.len()).rev() {
            let j = rng.index(i + 1);
            order.swap(i, j);
        }
        for chunk in order.chunks(hp.batch) {
            let mut gw1 = vec![0.0; w1.len()];
            let mut gb1 = vec![0.0; b1.len()];
            let mut gw2 = vec![0.0; w2.len()];
            let mut gb2 = vec![0.0; b2.len()];
            for &si in chunk {
                let (x, y) = &data.train[si];
                for h in 0..n_hidden {
                    let mut z = b1[h];
                    let row = &w1[h * n_in..(h + 1) * n_in];
                    for (wi, xi) in row.iter().zip(x) {
                        z += wi * xi;
                    }
                    hidden[h] = z.tanh();
                }
                let mut delta_out = [0.0; FEATURES];
                for o in 0..FEATURES {
                    let mut z = b2[o];
                    let row = &w2[o * n_hidden..(o + 1) * n_hidden];
                    for (wi, hi) in row.iter().zip(&hidden) {
                        z += wi * hi;
                    }
                    delta_out[o] = 2.0 * (z - y[o]) / FEATURES as f64;
                }
                for h in 0..n_hidden {
                    let mut g = 0.0;
                    for o in 0..FEATURES {
                        g += delta_out[o] * w2[o * n_hidden + h];
                    }
                    grad_hidden[h] = g * (1.0 - hidden[h] * hidden[h]);
                }
                for o in 0..FEATURES {
                    gb2[o] += delta_out[o];
                    for h in 0..n_hidden {
                        gw2[o * n_hidden + h] += delta_out[o] * hidden[h];
                    }
                }
                for h in 0..n_hidden {
                    gb1[h] += grad_hidden[h];
                    for (gi, xi) in gw1[h * n_in..(h + 1) * n_in].iter_mut().zip(x) {
                        *gi += grad_hidden[h] * xi;
                    }
                }
            }
            let inv = lr / chunk.len() as f64;
            for (w, g) in w1.iter_mut().zip(&gw1) {
                *w -= inv * g;
            }
            for (w, g) in b1.iter_mut().zip(&gb1) {
                *w -= inv * g;
            }
            for (w, g) in w2.iter_mut().zip(&gw2) {
                *w -= inv * g;
            }
            for (w, g) in b2.iter_mut().zip(&gb2) {
                *w -= inv * g;
            }
        }
    }

    let mut sse = 0.0;
    for (x, y) in &data.validation {
        for h in 0..n_hidden {
            let mut z = b1[h];
            for (wi, xi) in w1[h * n_in..(h + 1) * n_in].iter().zip(x) {
                z += wi * xi;
            }
            hidden[h] = z.tanh();
        }
        for o in 0..FEATURES {
            let mut z = b2[o];
            for (wi, hi) in w2[o * n_hidden..(o + 1) * n_hidden].iter().zip(&hidden) {
                z += wi * hi;
            }
            sse += (z - y[o]) * (z - y[o]);
        }
    }
    let mse = sse / (data.validation.len() * FEATURES) as f64;
    if mse.is_finite() {
        mse
    } else {
        DIVERGENCE_PENALTY
    }
}

/// Tuning algorithms exposed by the demo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TuneAlgorithm {
    SoFull,
    SoVanilla,
    Rival(RivalKind),
    RandomSearch,
}

impl TuneAlgorithm {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "so" | "so-full" => Some(TuneAlgorithm::SoFull),
            "so-vanilla" => Some(TuneAlgorithm::SoVanilla),
            "pso" => Some(TuneAlgorithm::Rival(RivalKind::Pso)),
            "de" => Some(TuneAlgorithm::Rival(RivalKind::De)),
            "ga" => Some(TuneAlgorithm::Rival(RivalKind::Ga)),
            "gwo" => Some(TuneAlgorithm::Rival(RivalKind::Gwo)),
            "woa" => Some(TuneAlgorithm::Rival(RivalKind::Woa)),
            "random" => Some(TuneAlgorithm::RandomSearch),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            TuneAlgorithm::SoFull => "so-full".to_string(),
            TuneAlgorithm::SoVanilla => "so-vanilla".to_string(),
            TuneAlgorithm::Rival(k) => k.name().to_string(),
            TuneAlgorithm::RandomSearch => "random".to_string(),
        }
    }
}

/// Iteration index at which each hyperparameter last changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizingIterations {
    pub batch: usize,
    pub lr: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneResult {
    pub algorithm: String,
    pub best: HyperPoint,
    pub loss: f64,
    /// Best-loss-so-far per outer iteration; monotone nonincreasing.
    pub trace: Vec<f64>,
    pub stabilizing: StabilizingIterations,
    pub evaluations: u64,
}

struct TuneObjective {
    data: SurrogateDataset,
    seed: u64,
    /// Log of (loss bits, decoded point) for every evaluation, used to
    /// recover which hyperparameters the best-so-far trace corresponds to.
    log: std::sync::Mutex<Vec<(u64, HyperPoint)>>,
}

impl Objective for TuneObjective {
    fn arity(&self) -> usize {
        3
    }

    fn value(&self, x: &[f64]) -> f64 {
        let hp = decode(x);
        let v = train_eval(&hp, &self.data, self.seed);
        self.log.lock().expect("log lock").push((v.to_bits(), hp));
        v
    }
}

/// Tune the surrogate's hyperparameters with the given algorithm under an
/// evaluation budget. Population algorithms use a small population with
/// the iteration count sized to stay within the budget; random search
/// spends the budget directly.
pub fn tune(algorithm: TuneAlgorithm, budget: u64, seed: u64) -> TuneResult {
    assert!(budget >= 20, "budget must be at least 20");
    let data = gen_dataset(seed, 16);
    let obj = TuneObjective {
        data,
        seed,
        log: std::sync::Mutex::new(Vec::new()),
    };
    let space = hyper_space();
    let mut rng = RngStream::substream(seed, &[hash_algo(&algorithm)]);

    let (history, best_position, evaluations) = match algorithm {
        TuneAlgorithm::RandomSearch => {
            let mut best = f64::INFINITY;
            let mut best_pos = Vec::new();
            let mut history = Vec::with_capacity(budget as usize);
            for _ in 0..budget {
                let x = space.sample(&mut rng);
                let v = obj.value(&x);
                if v < best {
                    best = v;
                    best_pos = x;
                }
                history.push(best);
            }
            (history, best_pos, budget)
        }
        TuneAlgorithm::SoFull | TuneAlgorithm::SoVanilla => {
            let pop = 6;
            // per-iteration cost: one evaluation per individual plus a
            // handful of mutation evaluations; sized to stay under budget
            let per_iter = pop as u64 + 4;
            let iters = ((budget - pop as u64) / per_iter).max(1) as usize;
            let cfg = SnakeConfig {
                pop_size: pop,
                max_iter: iters,
                toggles: if algorithm == TuneAlgorithm::SoFull {
                    StrategyToggles::all()
                } else {
                    StrategyToggles::default()
                },
                ..SnakeConfig::default()
            };
            let r = run_snake(&obj, &space, &cfg, &mut rng).expect("tune run");
            (r.history, r.best_position, r.evaluations)
        }
        TuneAlgorithm::Rival(kind) => {
            let pop = 6;
            let iters = ((budget - pop as u64) / pop as u64).max(1) as usize;
            let config = RivalConfig::new(kind, pop, iters);
            let r = run_rival(&obj, &space, &config, &mut rng).expect("tune run");
            (r.history, r.best_position, r.evaluations)
        }
    };

    let stabilizing = stabilizing_from_trace(&history, &obj.log.lock().expect("log lock"));

    TuneResult {
        algorithm: algorithm.name(),
        best: decode(&best_position),
        loss: *history.last().expect("non-empty trace"),
        trace: history,
        stabilizing,
        evaluations,
    }
}

// The optimizers report only the best-so-far loss per iteration, so the
// per-iteration best point is looked up in the evaluation log by the loss
// value; each hyperparameter's stabilizing iteration is the last one at
// which it changed.
fn stabilizing_from_trace(trace: &[f64], log: &[(u64, HyperPoint)]) -> StabilizingIterations {
    let lookup: std::collections::HashMap<u64, HyperPoint> = log
        .iter()
        .rev()
        .map(|&(bits, hp)| (bits, hp))
        .collect();
    let mut prev: Option<HyperPoint> = None;
    let mut out = StabilizingIterations {
        batch: 0,
        lr: 0,
        nodes: 0,
    };
    for (i, v) in trace.iter().enumerate() {
        let Some(&hp) = lookup.get(&v.to_bits()) else {
            continue;
        };
        if let Some(p) = prev {
            if hp.batch != p.batch {
                out.batch = i;
            }
            if hp.lr_fixed != p.lr_fixed {
                out.lr = i;
            }
            if hp.nodes != p.nodes {
                out.nodes = i;
            }
        }
        prev = Some(hp);
    }
    out
}

fn hash_algo(a: &TuneAlgorithm) -> u64 {
    a.name().bytes().fold(0xcbf29ce484222325u64, |acc, b| {
        (acc ^ b as u64).wrapping_mul(0x100000001b3)
    })
}
