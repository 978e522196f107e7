//! Classical comparison optimizers with the reference parameter settings:
//! PSO, DE (rand/1/bin), GA, GWO, and WOA. Canonical textbook
//! formulations; each honors the same run contracts as the snake
//! optimizer (seeded determinism, clamped positions, monotone best-so-far
//! history, evaluation accounting).

use serde::{Deserialize, Serialize};

use crate::core::{
    clamp_in_place, evaluate, random_init, CoreError, Evaluator, Objective, RngStream, RunResult,
    SearchSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RivalKind {
    Pso,
    De,
    Ga,
    Gwo,
    Woa,
}

impl RivalKind {
    pub fn name(self) -> &'static str {
        match self {
            RivalKind::Pso => "pso",
            RivalKind::De => "de",
            RivalKind::Ga => "ga",
            RivalKind::Gwo => "gwo",
            RivalKind::Woa => "woa",
        }
    }

    /// Reference default population size (PSO/GWO/WOA 30, DE 50, GA 10).
    pub fn default_pop_size(self) -> usize {
        match self {
            RivalKind::De => 50,
            RivalKind::Ga => 10,
            _ => 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.5,
            cognitive: 1.5,
            social: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub f: f64,
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self { f: 0.5, cr: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Gaussian mutation scale as a fraction of the box width.
    pub mutation_sigma: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_prob: 0.5,
            mutation_prob: 0.2,
            mutation_sigma: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WoaParams {
    /// Spiral shape constant.
    pub b: f64,
}

impl Default for WoaParams {
    fn default() -> Self {
        Self { b: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RivalParams {
    Pso(PsoParams),
    De(DeParams),
    Ga(GaParams),
    Gwo,
    Woa(WoaParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RivalConfig {
    pub kind: RivalKind,
    pub pop_size: usize,
    pub max_iter: usize,
    pub params: RivalParams,
}

impl RivalConfig {
    pub fn new(kind: RivalKind, pop_size: usize, max_iter: usize) -> Self {
        let params = match kind {
            RivalKind::Pso => RivalParams::Pso(PsoParams::default()),
            RivalKind::De => RivalParams::De(DeParams::default()),
            RivalKind::Ga => RivalParams::Ga(GaParams::default()),
            RivalKind::Gwo => RivalParams::Gwo,
            RivalKind::Woa => RivalParams::Woa(WoaParams::default()),
        };
        Self {
            kind,
            pop_size,
            max_iter,
            params,
        }
    }

    /// Reference defaults with the per-algorithm population sizes.
    pub fn defaults(kind: RivalKind, max_iter: usize) -> Self {
        Self::new(kind, kind.default_pop_size(), max_iter)
    }
}

pub fn run_rival(
    obj: &dyn Objective,
    space: &SearchSpace,
    config: &RivalConfig,
    rng: &mut RngStream,
) -> Result<RunResult, CoreError> {
    match config.params {
        RivalParams::Pso(p) => run_pso(obj, space, config, p, rng),
        RivalParams::De(p) => run_de(obj, space, config, p, rng),
        RivalParams::Ga(p) => run_ga(obj, space, config, p, rng),
        RivalParams::Gwo => run_gwo(obj, space, config, rng),
        RivalParams::Woa(p) => run_woa(obj, space, config, p, rng),
    }
}

struct BestTracker {
    position: Vec<f64>,
    fitness: f64,
    history: Vec<f64>,
}

impl BestTracker {
    fn new(position: Vec<f64>, fitness: f64, max_iter: usize) -> Self {
        Self {
            position,
            fitness,
            history: Vec::with_capacity(max_iter),
        }
    }

    fn observe(&mut self, position: &[f64], fitness: f64) {
        if fitness < self.fitness {
            self.fitness = fitness;
            self.position = position.to_vec();
        }
    }

    fn tick(&mut self) {
        self.history.push(self.fitness);
    }

    fn finish(self, evaluations: u64) -> RunResult {
        RunResult {
            best_position: self.position,
            best_fitness: self.fitness,
            history: self.history,
            evaluations,
        }
    }
}

/// Global-best PSO with velocity clamping to half the box width.
pub fn run_pso(
    obj: &dyn Objective,
    space: &SearchSpace,
    config: &RivalConfig,
    params: PsoParams,
    rng: &mut RngStream,
) -> Result<RunResult, CoreError> {
    let mut eval = Evaluator::new(obj);
    let mut pop = random_init(space, config.pop_size, rng)?;
    evaluate(&mut pop, &mut eval)?;
    let dim = space.dim();
    let vmax: Vec<f64> = (0..dim).map(|i| space.width(i) / 2.0).collect();
    let mut velocity = vec![vec![0.0; dim]; config.pop_size];
    let mut pbest: Vec<(Vec<f64>, f64)> = pop
        .members
        .iter()
        .map(|m| (m.position.clone(), m.fitness()))
        .collect();
    let gi = pop.best_index();
    let mut best = BestTracker::new(
        pop.members[gi].position.clone(),
        pop.members[gi].fitness(),
        config.max_iter,
    );

    for _ in 0..config.max_iter {
        for i in 0..config.pop_size {
            for d in 0..dim {
                let r1 = rng.uniform();
                let r2 = rng.uniform();
                let v = params.inertia * velocity[i][d]
                    + params.cognitive * r1 * (pbest[i].0[d] - pop.members[i].position[d])
                    + params.social * r2 * (best.position[d] - pop.members[i].position[d]);
                velocity[i][d] = v.clamp(-vmax[d], vmax[d]);
                pop.members[i].position[d] += velocity[i][d];
            }
            clamp_in_place(&mut pop.members[i].position, space);
            let f = eval.eval(&pop.members[i].position)?;
            pop.members[i].fitness = Some(f);
            if f < pbest[i].1 {
                pbest[i] = (pop.members[i].position.clone(), f);
            }
            best.observe(&pop.members[i].position, f);
        }
        best.tick();
    }
    Ok(best.finish(eval.count()))
}

/// DE/rand/1/bin with greedy selection.
pub fn run_de(
    obj: &dyn Objective,
    space: &SearchSpace,
    config: &RivalConfig,
    params: DeParams,
    rng: &mut RngStream,
) -> Result<RunResult, CoreError> {
    if config.pop_size < 4 {
        return Err(CoreError::PopulationTooSmall {
            got: config.pop_size,
            min: 4,
        });
    }
    let mut eval = Evaluator::new(obj);
    let mut pop = random_init(space, config.pop_size, rng)?;
    evaluate(&mut pop, &mut eval)?;
    let dim = space.dim();
    let gi = pop.best_index();
    let mut best = BestTracker::new(
        pop.members[gi].position.clone(),
        pop.members[gi].fitness(),
        config.max_iter,
    );

    for _ in 0..config.max_iter {
        for i in 0..config.pop_size {
            // three distinct indices, all different from i
            let mut idx = [0usize; 3];
            let mut k = 0;
            while k < 3 {
                let cand = rng.index(config.pop_size);
                if cand != i && !idx[..k].contains(&cand) {
                    idx[k] = cand;
                    k += 1;
                }
            }
            let [a, b, c] = idx;
            let j_rand = rng.index(dim);
            let mut trial = pop.members[i].position.clone();
            for d in 0..dim {
                if rng.uniform() < params.cr || d == j_rand {
                    trial[d] = pop.members[a].position[d]
                        + params.f * (pop.members[b].position[d] - pop.members[c].position[d]);
                }
            }
            clamp_in_place(&mut trial, space);
            let f = eval.eval(&trial)?;
            if f <= pop.members[i].fitness() {
                pop.members[i].position = trial;
                pop.members[i].fitness = Some(f);
            }
            best.observe(
                &pop.members[i].position,
                pop.members[i].fitness(),
            );
        }
        best.tick();
    }
    Ok(best.finish(eval.count()))
}

/// GA with size-2 tournament selection, arithmetic (linear) crossover,
/// Gaussian mutation, and elitism of one.
pub fn run_ga(
    obj: &dyn Objective,
    space: &SearchSpace,
    config: &RivalConfig,
    params: GaParams,
    rng: &mut RngStream,
) -> Result<RunResult, CoreError> {
    let mut eval = Evaluator::new(obj);
    let mut pop = random_init(space, config.pop_size, rng)?;
    evaluate(&mut pop, &mut eval)?;
    let dim = space.dim();
    let gi = pop.best_index();
    let mut best = BestTracker::new(
        pop.members[gi].position.clone(),
        pop.members[gi].fitness(),
        config.max_iter,
    );

    for _ in 0..config.max_iter {
        let elite = pop.members[pop.best_index()].clone();
        let mut next = Vec::with_capacity(config.pop_size);
        next.push(elite);
        while next.len() < config.pop_size {
            let tournament = |rng: &mut RngStream, pop: &crate::core::Population| {
                let a = rng.index(config.pop_size);
                let b = rng.index(config.pop_size);
                if pop.members[a].fitness() <= pop.members[b].fitness() {
                    pop.members[a].position.clone()
                } else {
                    pop.members[b].position.clone()
                }
            };
            let p1 = tournament(rng, &pop);
            let p2 = tournament(rng, &pop);
            let mut child = if rng.uniform() < params.crossover_prob {
                let lam = rng.uniform();
                p1.iter()
                    .zip(&p2)
                    .map(|(a, b)| lam * a + (1.0 - lam) * b)
                    .collect::<Vec<f64>>()
            } else {
                p1
            };
            if rng.uniform() < params.mutation_prob {
                use rand_distr::{Distribution, Normal};
                for d in 0..dim {
                    let sigma = params.mutation_sigma * space.width(d);
                    child[d] += Normal::new(0.0, sigma).unwrap().sample(rng.rng());
                }
            }
            clamp_in_place(&mut child, space);
            let f = eval.eval(&child)?;
            best.observe(&child, f);
            next.push(crate::core::Individual {
                position: child,
                fitness: Some(f),
            });
        }
        pop.members = next;
        best.tick();
    }
    Ok(best.finish(eval.count()))
}

/// Standard grey wolf optimizer; the control coefficient decays linearly
/// from 2 to 0.
pub fn run_gwo(
    obj: &dyn Objective,
    space: &SearchSpace,
    config: &RivalConfig,
    rng: &mut RngStream,
) -> Result<RunResult, CoreError> {
    let mut eval = Evaluator::new(obj);
    let mut pop = random_init(space, config.pop_size, rng)?;
    evaluate(&mut pop, &mut eval)?;
    let dim = space.dim();
    let gi = pop.best_index();
    let mut best = BestTracker::new(
        pop.members[gi].position.clone(),
        pop.members[gi].fitness(),
        config.max_iter,
    );

    let leaders = |pop: &crate::core::Population| {
        let mut order: Vec<usize> = (0..pop.size()).collect();
        order.sort_by(|&a, &b| pop.members[a].fitness().total_cmp(&pop.members[b].fitness()));
        (
            pop.members[order[0]].position.clone(),
            pop.members[order[1]].position.clone(),
            pop.members[order[2]].position.clone(),
        )
    };

    for t in 0..config.max_iter {
        let a_coef = gwo_a(t, config.max_iter);
        let (alpha, beta, delta) = leaders(&pop);
        for i in 0..config.pop_size {
            let mut pos = vec![0.0; dim];
            for d in 0..dim {
                let x = pop.members[i].position[d];
                let mut acc = 0.0;
                for leader in [&alpha, &beta, &delta] {
                    let a1 = 2.0 * a_coef * rng.uniform() - a_coef;
                    let c1 = 2.0 * rng.uniform();
                    let dist = (c1 * leader[d] - x).abs();
                    acc += leader[d] - a1 * dist;
                }
                pos[d] = acc / 3.0;
            }
            clamp_in_place(&mut pos, space);
            let f = eval.eval(&pos)?;
            pop.members[i].position = pos;
            pop.members[i].fitness = Some(f);
            best.observe(&pop.members[i].position, f);
        }
        best.tick();
    }
    Ok(best.finish(eval.count()))
}

/// GWO control coefficient: 2 at iteration 0, linearly down to 0.
pub fn gwo_a(iter: usize, max_iter: usize) -> f64 {
    2.0 - 2.0 * iter as f64 / max_iter as f64
}

/// Standard whale optimization: shrinking encirclement or logarithmic
/// spiral around the best, random search while the coefficient is large.
pub fn run_woa(
    obj: &dyn Objective,
    space: &SearchSpace,
    config: &RivalConfig,
    params: WoaParams,
    rng: &mut RngStream,
) -> Result<RunResult, CoreError> {
    let mut eval = Evaluator::new(obj);
    let mut pop = random_init(space, config.pop_size, rng)?;
    evaluate(&mut pop, &mut eval)?;
    let dim = space.dim();
    let gi = pop.best_index();
    let mut best = BestTracker::new(
        pop.members[gi].position.clone(),
        pop.members[gi].fitness(),
        config.max_iter,
    );

    for t in 0..config.max_iter {
        let a_coef = gwo_a(t, config.max_iter);
        for i in 0..config.pop_size {
            let x = pop.members[i].position.clone();
            let mut pos = vec![0.0; dim];
            if rng.uniform() < 0.5 {
                let a1 = 2.0 * a_coef * rng.uniform() - a_coef;
                let c1 = 2.0 * rng.uniform();
                if a1.abs() < 1.0 {
                    for d in 0..dim {
                        let dist = (c1 * best.position[d] - x[d]).abs();
                        pos[d] = best.position[d] - a1 * dist;
                    }
                } else {
                    let j = rng.index(config.pop_size);
                    let target = pop.members[j].position.clone();
                    for d in 0..dim {
                        let dist = (c1 * target[d] - x[d]).abs();
                        pos[d] = target[d] - a1 * dist;
                    }
                }
            } else {
                let l = rng.uniform_in(-1.0, 1.0);
                for d in 0..dim {
                    let dist = (best.position[d] - x[d]).abs();
                    pos[d] = dist * (params.b * l).exp() * (std::f64::consts::TAU * l).cos()
                        + best.position[d];
                }
            }
            clamp_in_place(&mut pos, space);
            let f = eval.eval(&pos)?;
            pop.members[i].position = pos;
            pop.members[i].fitness = Some(f);
            best.observe(&pop.members[i].position, f);
        }
        best.tick();
    }
    Ok(best.finish(eval.count()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(dim: usize) -> (usize, impl Fn(&[f64]) -> f64 + Sync) {
        (dim, |x: &[f64]| x.iter().map(|v| v * v).sum())
    }

    fn median_final(kind: RivalKind, pop: usize, iters: usize) -> f64 {
        let obj = sphere(2);
        let space = SearchSpace::symmetric(2, -100.0, 100.0).unwrap();
        let config = RivalConfig::new(kind, pop, iters);
        let mut finals: Vec<f64> = (0..20)
            .map(|s| {
                run_rival(&obj, &space, &config, &mut RngStream::new(s))
                    .unwrap()
                    .best_fitness
            })
            .collect();
        finals.sort_by(f64::total_cmp);
        0.5 * (finals[9] + finals[10])
    }

    #[test]
    fn pso_sphere_convergence() {
        assert!(median_final(RivalKind::Pso, 30, 200) < 1e-4);
    }

    #[test]
    fn de_sphere_convergence() {
        assert!(median_final(RivalKind::De, 50, 200) < 1e-4);
    }

    #[test]
    fn ga_sphere_convergence() {
        assert!(median_final(RivalKind::Ga, 30, 200) < 1e-2);
    }

    #[test]
    fn gwo_sphere_convergence() {
        assert!(median_final(RivalKind::Gwo, 30, 200) < 1e-4);
    }

    #[test]
    fn woa_sphere_convergence() {
        assert!(median_final(RivalKind::Woa, 30, 200) < 1e-3);
    }

    #[test]
    fn gwo_coefficient_endpoints() {
        assert_eq!(gwo_a(0, 500), 2.0);
        assert_eq!(gwo_a(500, 500), 0.0);
    }

    #[test]
    fn de_rejects_tiny_population() {
        let obj = sphere(2);
        let space = SearchSpace::symmetric(2, -1.0, 1.0).unwrap();
        let config = RivalConfig::new(RivalKind::De, 3, 10);
        assert!(run_rival(&obj, &space, &config, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn all_rivals_deterministic_monotone_bounded() {
        let obj = sphere(3);
        let space = SearchSpace::symmetric(3, -100.0, 100.0).unwrap();
        for kind in [
            RivalKind::Pso,
            RivalKind::De,
            RivalKind::Ga,
            RivalKind::Gwo,
            RivalKind::Woa,
        ] {
            let config = RivalConfig::defaults(kind, 50);
            let a = run_rival(&obj, &space, &config, &mut RngStream::new(11)).unwrap();
            let b = run_rival(&obj, &space, &config, &mut RngStream::new(11)).unwrap();
            assert_eq!(a, b, "{}", kind.name());
            assert_eq!(a.history.len(), 50);
            for w in a.history.windows(2) {
                assert!(w[1] <= w[0], "{}", kind.name());
            }
            assert!(space.contains(&a.best_position), "{}", kind.name());
            assert_eq!(a.best_fitness, *a.history.last().unwrap());
            assert!(a.evaluations > 0);
        }
    }

    #[test]
    fn table_defaults() {
        assert_eq!(RivalKind::De.default_pop_size(), 50);
        assert_eq!(RivalKind::Ga.default_pop_size(), 10);
        assert_eq!(RivalKind::Pso.default_pop_size(), 30);
    }
}
