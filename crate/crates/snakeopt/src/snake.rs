//! The snake optimizer: sex-partitioned swarm whose behavior (exploration,
//! food seeking, fighting, mating) is gated by simulated temperature and
//! food quantity, plus four independently toggleable improvement strategies:
//! good-point-set initialization, periodic adaptive parameters, a dual
//! mutation scheme, and an adaptive flight perturbation.

use serde::{Deserialize, Serialize};

use crate::core::{
    clamp_in_place, CoreError, Evaluator, Objective, Population, RngStream, RunResult,
    SearchSpace, FITNESS_EPS,
};
use crate::gps::gps_initialize;

/// On/off switches for the four improvement strategies. All false
/// reproduces the vanilla optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StrategyToggles {
    pub gps_init: bool,
    pub adaptive_params: bool,
    pub dual_mutation: bool,
    pub flight: bool,
}

impl StrategyToggles {
    pub fn all() -> Self {
        Self {
            gps_init: true,
            adaptive_params: true,
            dual_mutation: true,
            flight: true,
        }
    }
}

/// Dual-mutation constants: main schedule scales plus the auxiliary
/// operator schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationParams {
    pub cauchy_gamma: f64,
    pub gauss_sigma: f64,
    pub chaos_alpha: f64,
    /// Per-individual probability of an auxiliary mutation per iteration.
    pub aux_prob: f64,
    /// Fraction of each subpopulation (worst first) eligible for auxiliary
    /// mutation.
    pub aux_fraction: f64,
}

impl Default for MutationParams {
    fn default() -> Self {
        Self {
            cauchy_gamma: 0.05,
            gauss_sigma: 0.1,
            chaos_alpha: 0.1,
            aux_prob: 0.2,
            aux_fraction: 0.1,
        }
    }
}

/// Flight perturbation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightParams {
    pub beta: f64,
    /// Step scale as a fraction of the box width.
    pub walk_sigma: f64,
    /// Fraction of max_iter at which heavy-tailed steps hand off to the
    /// bounded random walk (also the main-mutation schedule boundary).
    pub switch_point: f64,
}

impl Default for FlightParams {
    fn default() -> Self {
        Self {
            beta: 1.5,
            walk_sigma: 0.1,
            switch_point: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnakeConfig {
    pub pop_size: usize,
    pub max_iter: usize,
    pub c1_base: f64,
    pub c2: f64,
    pub c3_base: f64,
    pub food_threshold_base: f64,
    pub temp_threshold_base: f64,
    pub fight_prob: f64,
    pub toggles: StrategyToggles,
    pub mutation: MutationParams,
    pub flight: FlightParams,
}

impl Default for SnakeConfig {
    fn default() -> Self {
        Self {
            pop_size: 30,
            max_iter: 500,
            c1_base: 0.5,
            c2: 0.05,
            c3_base: 2.0,
            food_threshold_base: 0.25,
            temp_threshold_base: 0.6,
            fight_prob: 0.6,
            toggles: StrategyToggles::default(),
            mutation: MutationParams::default(),
            flight: FlightParams::default(),
        }
    }
}

impl SnakeConfig {
    pub fn with_toggles(toggles: StrategyToggles) -> Self {
        Self {
            toggles,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.pop_size < 4 {
            return Err(CoreError::PopulationTooSmall {
                got: self.pop_size,
                min: 4,
            });
        }
        if self.max_iter == 0 {
            return Err(CoreError::ZeroIterations);
        }
        Ok(())
    }
}

/// Instrumentation counters for the improvement strategies. With all
/// toggles off every counter stays at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SnakeTrace {
    pub gps_inits: u64,
    pub adaptive_updates: u64,
    pub mutation_ops: u64,
    pub flight_steps: u64,
}

/// Temp = exp(-iter / max_iter), in (0, 1].
pub fn temperature(iter: usize, max_iter: usize) -> Result<f64, CoreError> {
    if max_iter == 0 {
        return Err(CoreError::ZeroIterations);
    }
    Ok((-(iter as f64) / max_iter as f64).exp())
}

/// Q = c1 * exp((iter - max_iter) / max_iter), in [c1/e, c1].
pub fn food_quantity(iter: usize, max_iter: usize, c1: f64) -> Result<f64, CoreError> {
    if max_iter == 0 {
        return Err(CoreError::ZeroIterations);
    }
    Ok(c1 * ((iter as f64 - max_iter as f64) / max_iter as f64).exp())
}

/// Periodic adaptive parameters with period T = max_iter / 2:
/// returns (c1, c3, food_threshold, temp_threshold).
pub fn adaptive_params(iter: usize, max_iter: usize) -> (f64, f64, f64, f64) {
    let period = max_iter as f64 / 2.0;
    let angle = std::f64::consts::TAU * iter as f64 / period;
    let c1 = 0.5 * (1.0 + angle.cos());
    let c3 = 2.0 * (1.0 + angle.sin());
    let food_threshold = 0.5 + 0.25 * angle.sin();
    let temp_threshold = 0.5 + 0.2 * angle.cos();
    (c1, c3, food_threshold, temp_threshold)
}

/// Ability ratio exp(-|num| / (|den| + eps)); the guard keeps shifted
/// (possibly nonpositive) objective values from flipping the sign.
pub fn ability(num: f64, den: f64) -> f64 {
    (-(num.abs()) / (den.abs() + FITNESS_EPS)).exp()
}

/// Split into (males, females): first floor(N/2) members are male.
pub fn split_population(pop: Population) -> Result<(Population, Population), CoreError> {
    if pop.size() < 4 {
        return Err(CoreError::PopulationTooSmall {
            got: pop.size(),
            min: 4,
        });
    }
    let n_male = pop.size() / 2;
    let mut members = pop.members;
    let females = members.split_off(n_male);
    Ok((Population { members }, Population { members: females }))
}

/// One component of the food-seeking move:
/// x_food + sign * c3 * temp * rand * (x_food - x).
pub fn food_move(food: f64, x: f64, c3: f64, temp: f64, rand: f64, sign: f64) -> f64 {
    food + sign * c3 * temp * rand * (food - x)
}

/// Cauchy(0, gamma) perturbation per component.
pub fn cauchy_mutate(x: &[f64], gamma: f64, rng: &mut RngStream) -> Vec<f64> {
    use rand_distr::{Cauchy, Distribution};
    let dist = Cauchy::new(0.0, gamma).expect("gamma must be positive");
    x.iter().map(|&v| v + dist.sample(rng.rng())).collect()
}

/// Normal(0, sigma^2) perturbation per component.
pub fn gaussian_mutate(x: &[f64], sigma: f64, rng: &mut RngStream) -> Vec<f64> {
    use rand_distr::{Distribution, Normal};
    let dist = Normal::new(0.0, sigma).expect("sigma must be positive");
    x.iter().map(|&v| v + dist.sample(rng.rng())).collect()
}

/// Logistic-map perturbation of the head segment (first ceil(dim/3)
/// components). Components are normalized to the unit box so the
/// x * (1 - x) term is meaningful on arbitrary domains.
pub fn chaos_head_mutate(x: &[f64], alpha: f64, space: &SearchSpace) -> Vec<f64> {
    let head = x.len().div_ceil(3);
    let mut out = x.to_vec();
    for i in 0..head {
        let u = (x[i] - space.lower()[i]) / space.width(i);
        let u2 = u + alpha * u * (1.0 - u);
        out[i] = space.lower()[i] + u2 * space.width(i);
    }
    out
}

/// Component-wise midpoint of two positions.
pub fn body_fusion_mutate(x1: &[f64], x2: &[f64]) -> Result<Vec<f64>, CoreError> {
    if x1.len() != x2.len() {
        return Err(CoreError::DimensionMismatch {
            expected: x1.len(),
            got: x2.len(),
        });
    }
    Ok(x1.iter().zip(x2).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// Last (dim - m) components of x1 followed by the first m of x2.
pub fn tail_splice_mutate(x1: &[f64], x2: &[f64], m: usize) -> Result<Vec<f64>, CoreError> {
    let dim = x1.len();
    if x2.len() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: x2.len(),
        });
    }
    if m > dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: m,
        });
    }
    let mut out = Vec::with_capacity(dim);
    out.extend_from_slice(&x1[m..]);
    out.extend_from_slice(&x2[..m]);
    Ok(out)
}

/// Mantegna scale for the heavy-tailed step numerator.
fn mantegna_sigma(beta: f64) -> f64 {
    use statrs::function::gamma::gamma;
    let num = gamma(1.0 + beta) * (std::f64::consts::PI * beta / 2.0).sin();
    let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    (num / den).powf(1.0 / beta)
}

/// Heavy-tailed flight displacement u / |v|^beta scaled by the decay
/// factor (1 - iter/max_iter)^beta. Note the literal exponent beta in the
/// denominator (Mantegna's construction uses 1/beta); the scale is still
/// drawn from the standard Mantegna formula.
pub fn levy_step(
    dim: usize,
    iter: usize,
    max_iter: usize,
    params: &FlightParams,
    rng: &mut RngStream,
) -> Vec<f64> {
    use rand_distr::{Distribution, Normal};
    let decay = (1.0 - iter as f64 / max_iter as f64).powf(params.beta);
    let sigma_u = mantegna_sigma(params.beta);
    let nu = Normal::new(0.0, sigma_u).unwrap();
    let nv = Normal::new(0.0, 1.0).unwrap();
    (0..dim)
        .map(|_| {
            let u = nu.sample(rng.rng());
            let v: f64 = nv.sample(rng.rng());
            decay * u / v.abs().powf(params.beta)
        })
        .collect()
}

/// Bounded uniform displacement: each component uniform in
/// [-sigma_eff, sigma_eff] with sigma_eff = walk_sigma * width / 2.
pub fn random_walk_step(space: &SearchSpace, params: &FlightParams, rng: &mut RngStream) -> Vec<f64> {
    (0..space.dim())
        .map(|i| {
            let sigma_eff = params.walk_sigma * space.width(i) / 2.0;
            rng.uniform_in(-sigma_eff, sigma_eff)
        })
        .collect()
}

enum Sex {
    Male,
    Female,
}

struct SnakeRun<'a> {
    space: &'a SearchSpace,
    cfg: &'a SnakeConfig,
    males: Population,
    females: Population,
    trace: SnakeTrace,
    best_position: Vec<f64>,
    best_fitness: f64,
}

impl<'a> SnakeRun<'a> {
    fn pop(&mut self, sex: &Sex) -> &mut Population {
        match sex {
            Sex::Male => &mut self.males,
            Sex::Female => &mut self.females,
        }
    }

    fn pop_ref(&self, sex: &Sex) -> &Population {
        match sex {
            Sex::Male => &self.males,
            Sex::Female => &self.females,
        }
    }

    fn update_best(&mut self) {
        for pop in [&self.males, &self.females] {
            let b = &pop.members[pop.best_index()];
            if b.fitness() < self.best_fitness {
                self.best_fitness = b.fitness();
                self.best_position = b.position.clone();
            }
        }
    }

    /// Move one individual to a new position; clamps and re-evaluates.
    fn place(
        &mut self,
        sex: &Sex,
        idx: usize,
        mut position: Vec<f64>,
        eval: &mut Evaluator,
    ) -> Result<(), CoreError> {
        clamp_in_place(&mut position, self.space);
        let fitness = eval.eval(&position)?;
        let m = &mut self.pop(sex).members[idx];
        m.position = position;
        m.fitness = Some(fitness);
        Ok(())
    }

    /// Exploration phase (food scarce): each individual restarts around a
    /// random same-sex peer, scaled by the peer's foraging ability; the
    /// flight toggle adds a heavy-tailed or random-walk displacement.
    fn exploration_step(
        &mut self,
        iter: usize,
        eval: &mut Evaluator,
        rng: &mut RngStream,
    ) -> Result<(), CoreError> {
        for sex in [Sex::Male, Sex::Female] {
            let n = self.pop_ref(&sex).size();
            for i in 0..n {
                let pop = self.pop_ref(&sex);
                let j = rng.index(n);
                let a = ability(pop.members[j].fitness(), pop.members[i].fitness());
                let sign = rng.sign();
                let early = (iter as f64)
                    < self.cfg.flight.switch_point * self.cfg.max_iter as f64;
                if self.cfg.toggles.flight && !early {
                    // late flight: bounded random-walk refinement around the
                    // individual's own position instead of a peer restart;
                    // refinement steps are only kept when they improve
                    self.trace.flight_steps += 1;
                    let walk = random_walk_step(self.space, &self.cfg.flight, rng);
                    let mut candidate: Vec<f64> = self.pop_ref(&sex).members[i]
                        .position
                        .iter()
                        .zip(&walk)
                        .map(|(x, w)| x + w)
                        .collect();
                    clamp_in_place(&mut candidate, self.space);
                    let f = eval.eval(&candidate)?;
                    if f < self.pop_ref(&sex).members[i].fitness() {
                        let m = &mut self.pop(&sex).members[i];
                        m.position = candidate;
                        m.fitness = Some(f);
                    }
                    continue;
                }
                let pos: Vec<f64> = {
                    let mut pos: Vec<f64> = (0..self.space.dim())
                        .map(|d| {
                            let rand = rng.uniform();
                            self.pop_ref(&sex).members[j].position[d]
                                + sign
                                    * self.cfg.c2
                                    * a
                                    * (self.space.width(d) * rand + self.space.lower()[d])
                        })
                        .collect();
                    if self.cfg.toggles.flight {
                        self.trace.flight_steps += 1;
                        let raw = levy_step(
                            self.space.dim(),
                            iter,
                            self.cfg.max_iter,
                            &self.cfg.flight,
                            rng,
                        );
                        for (d, v) in pos.iter_mut().enumerate() {
                            *v += raw[d] * self.cfg.flight.walk_sigma * self.space.width(d);
                        }
                    }
                    pos
                };
                self.place(&sex, i, pos, eval)?;
            }
        }
        Ok(())
    }

    /// Food-seeking phase (hot): everyone moves relative to the food.
    fn food_step(
        &mut self,
        c3: f64,
        temp: f64,
        eval: &mut Evaluator,
        rng: &mut RngStream,
    ) -> Result<(), CoreError> {
        let food = self.best_position.clone();
        for sex in [Sex::Male, Sex::Female] {
            let n = self.pop_ref(&sex).size();
            for i in 0..n {
                let sign = rng.sign();
                let pos: Vec<f64> = (0..self.space.dim())
                    .map(|d| {
                        food_move(
                            food[d],
                            self.pop_ref(&sex).members[i].position[d],
                            c3,
                            temp,
                            rng.uniform(),
                            sign,
                        )
                    })
                    .collect();
                self.place(&sex, i, pos, eval)?;
            }
        }
        Ok(())
    }

    /// Fight phase: males move toward the best female scaled by their
    /// fighting ability, females symmetrically toward the best male.
    fn fight_step(
        &mut self,
        c3: f64,
        eval: &mut Evaluator,
        rng: &mut RngStream,
    ) -> Result<(), CoreError> {
        let best_m = self.males.members[self.males.best_index()].clone();
        let best_f = self.females.members[self.females.best_index()].clone();
        for (sex, target) in [(Sex::Male, &best_f), (Sex::Female, &best_m)] {
            let n = self.pop_ref(&sex).size();
            for i in 0..n {
                let f_i = self.pop_ref(&sex).members[i].fitness();
                let force = ability(target.fitness(), f_i);
                let sign = rng.sign();
                let pos: Vec<f64> = (0..self.space.dim())
                    .map(|d| {
                        let x = self.pop_ref(&sex).members[i].position[d];
                        x + sign * c3 * force * rng.uniform() * (target.position[d] - x)
                    })
                    .collect();
                self.place(&sex, i, pos, eval)?;
            }
        }
        Ok(())
    }

    /// Mate phase: paired males and females pull toward each other scaled
    /// by mating ability; on a hatch event the worst of each sex is
    /// replaced by a fresh uniform draw.
    fn mate_step(
        &mut self,
        c3: f64,
        q: f64,
        eval: &mut Evaluator,
        rng: &mut RngStream,
    ) -> Result<(), CoreError> {
        let pairs = self.males.size().min(self.females.size());
        for i in 0..pairs {
            let xm = self.males.members[i].position.clone();
            let xf = self.females.members[i].position.clone();
            let fm = self.males.members[i].fitness();
            let ff = self.females.members[i].fitness();
            let m_m = ability(ff, fm);
            let m_f = ability(fm, ff);
            let sign_m = rng.sign();
            let new_m: Vec<f64> = (0..self.space.dim())
                .map(|d| xm[d] + sign_m * c3 * m_m * rng.uniform() * (q * xf[d] - xm[d]))
                .collect();
            let sign_f = rng.sign();
            let new_f: Vec<f64> = (0..self.space.dim())
                .map(|d| xf[d] + sign_f * c3 * m_f * rng.uniform() * (q * xm[d] - xf[d]))
                .collect();
            self.place(&Sex::Male, i, new_m, eval)?;
            self.place(&Sex::Female, i, new_f, eval)?;
        }
        // hatch: replace the worst male and female with fresh uniform draws
        if rng.uniform() < 0.5 {
            for sex in [Sex::Male, Sex::Female] {
                let worst = self.pop_ref(&sex).worst_index();
                let fresh = self.space.sample(rng);
                self.place(&sex, worst, fresh, eval)?;
            }
        }
        Ok(())
    }

    /// Dual mutation: main schedule perturbs the best individual (Cauchy
    /// early, Gaussian late); auxiliary operators hit a fraction of the
    /// worst individuals. All acceptances are improvement-gated.
    fn dual_mutation(
        &mut self,
        iter: usize,
        eval: &mut Evaluator,
        rng: &mut RngStream,
    ) -> Result<(), CoreError> {
        let early = (iter as f64) < self.cfg.flight.switch_point * self.cfg.max_iter as f64;
        let mp = self.cfg.mutation;

        // main mutation on the stored best
        let candidate = if early {
            cauchy_mutate(&self.best_position, mp.cauchy_gamma, rng)
        } else {
            gaussian_mutate(&self.best_position, mp.gauss_sigma, rng)
        };
        self.trace.mutation_ops += 1;
        let mut candidate = candidate;
        clamp_in_place(&mut candidate, self.space);
        let f = eval.eval(&candidate)?;
        if f < self.best_fitness {
            self.best_fitness = f;
            self.best_position = candidate;
        }

        // auxiliary mutations on the worst slice of each subpopulation
        for sex in [Sex::Male, Sex::Female] {
            let n = self.pop_ref(&sex).size();
            let k = ((n as f64) * mp.aux_fraction).ceil() as usize;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                self.pop_ref(&sex).members[b]
                    .fitness()
                    .total_cmp(&self.pop_ref(&sex).members[a].fitness())
            });
            for &idx in order.iter().take(k) {
                if rng.uniform() >= mp.aux_prob {
                    continue;
                }
                let pop = self.pop_ref(&sex);
                let x = pop.members[idx].position.clone();
                let partner = {
                    let mut j = rng.index(n);
                    if j == idx && n > 1 {
                        j = (j + 1) % n;
                    }
                    pop.members[j].position.clone()
                };
                let dim = x.len();
                let mut candidate = match rng.index(3) {
                    0 => chaos_head_mutate(&x, mp.chaos_alpha, self.space),
                    1 => body_fusion_mutate(&x, &partner)?,
                    _ => {
                        let m = if dim > 1 { 1 + rng.index(dim - 1) } else { 0 };
                        tail_splice_mutate(&x, &partner, m)?
                    }
                };
                self.trace.mutation_ops += 1;
                clamp_in_place(&mut candidate, self.space);
                let f = eval.eval(&candidate)?;
                if f < self.pop_ref(&sex).members[idx].fitness() {
                    let m = &mut self.pop(&sex).members[idx];
                    m.position = candidate;
                    m.fitness = Some(f);
                }
            }
        }
        Ok(())
    }
}

/// Run the optimizer, additionally returning strategy instrumentation.
pub fn run_snake_traced(
    obj: &dyn Objective,
    space: &SearchSpace,
    cfg: &SnakeConfig,
    rng: &mut RngStream,
) -> Result<(RunResult, SnakeTrace), CoreError> {
    cfg.validate()?;
    if obj.arity() != space.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: space.dim(),
            got: obj.arity(),
        });
    }
    let mut eval = Evaluator::new(obj);
    let mut trace = SnakeTrace::default();

    let mut pop = if cfg.toggles.gps_init {
        trace.gps_inits += 1;
        gps_initialize(space, cfg.pop_size)?
    } else {
        crate::core::random_init(space, cfg.pop_size, rng)?
    };
    crate::core::evaluate(&mut pop, &mut eval)?;
    let best = pop.members[pop.best_index()].clone();
    let (males, females) = split_population(pop)?;

    let mut run = SnakeRun {
        space,
        cfg,
        males,
        females,
        trace,
        best_fitness: best.fitness(),
        best_position: best.position,
    };

    let mut history = Vec::with_capacity(cfg.max_iter);
    for iter in 0..cfg.max_iter {
        let (c1, c3, food_threshold, temp_threshold) = if cfg.toggles.adaptive_params {
            run.trace.adaptive_updates += 1;
            adaptive_params(iter, cfg.max_iter)
        } else {
            (
                cfg.c1_base,
                cfg.c3_base,
                cfg.food_threshold_base,
                cfg.temp_threshold_base,
            )
        };
        let temp = temperature(iter, cfg.max_iter)?;
        let q = food_quantity(iter, cfg.max_iter, c1)?;

        if q < food_threshold {
            run.exploration_step(iter, &mut eval, rng)?;
        } else if temp > temp_threshold {
            run.food_step(c3, temp, &mut eval, rng)?;
        } else if rng.uniform() < cfg.fight_prob {
            run.fight_step(c3, &mut eval, rng)?;
        } else {
            run.mate_step(c3, q, &mut eval, rng)?;
        }
        run.update_best();

        if cfg.toggles.dual_mutation {
            run.dual_mutation(iter, &mut eval, rng)?;
        }
        history.push(run.best_fitness);
    }

    let result = RunResult {
        best_position: run.best_position,
        best_fitness: run.best_fitness,
        history,
        evaluations: eval.count(),
    };
    Ok((result, run.trace))
}

pub fn run_snake(
    obj: &dyn Objective,
    space: &SearchSpace,
    cfg: &SnakeConfig,
    rng: &mut RngStream,
) -> Result<RunResult, CoreError> {
    run_snake_traced(obj, space, cfg, rng).map(|(r, _)| r)
}
