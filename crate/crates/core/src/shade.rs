//! Success-history based adaptive differential evolution (SHADE).
//!
//! Trial generation uses current-to-pbest/1 mutation with an external
//! archive, binomial crossover and midpoint bound repair. Control parameters
//! are drawn per individual from a ring memory of `H` (M_CR, M_F) pairs:
//!
//! * `F ~ Cauchy(M_F[k], 0.1)`, redrawn while `F <= 0`, capped at 1;
//! * `CR ~ Normal(M_CR[k], 0.1)`, clipped to `[0, 1]`.
//!
//! After each generation the successful parameters update one memory slot
//! with improvement-weighted means (Lehmer mean for F, arithmetic for CR).
//!
//! The state is orientation-aware so the same code can minimize fitness or
//! maximize fitness improvement without negating values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::problem::Bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Minimize,
    Maximize,
}

impl Orientation {
    /// `a` strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Orientation::Minimize => a < b,
            Orientation::Maximize => a > b,
        }
    }

    pub fn better_or_equal(self, a: f64, b: f64) -> bool {
        !self.better(b, a)
    }

    /// Magnitude of the gain of `new` over `old`, positive when better.
    pub fn gain(self, new: f64, old: f64) -> f64 {
        match self {
            Orientation::Minimize => old - new,
            Orientation::Maximize => new - old,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShadeConfig {
    /// Population size `p`.
    pub population: usize,
    /// History size `H`; `None` means `H = p`.
    pub memory_size: Option<usize>,
    /// Fraction of the population eligible as pbest.
    pub pbest_fraction: f64,
}

impl Default for ShadeConfig {
    fn default() -> Self {
        Self {
            population: 100,
            memory_size: None,
            pbest_fraction: 0.1,
        }
    }
}

impl ShadeConfig {
    pub fn memory_len(&self) -> usize {
        self.memory_size.unwrap_or(self.population)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(CcError::InvalidConfig(format!(
                "SHADE population must be >= 4, got {}",
                self.population
            )));
        }
        if self.memory_len() == 0 {
            return Err(CcError::InvalidConfig("SHADE memory size must be >= 1".into()));
        }
        if !(self.pbest_fraction > 0.0 && self.pbest_fraction <= 1.0) {
            return Err(CcError::InvalidConfig(format!(
                "pbest fraction must be in (0, 1], got {}",
                self.pbest_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub point: Vec<f64>,
    pub f: f64,
    pub cr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Success {
    pub f: f64,
    pub cr: f64,
    /// Positive gain of the trial over its parent.
    pub delta: f64,
}

/// `x + F (x_pbest - x) + F (x_r1 - x_r2)`.
pub fn current_to_pbest(x: &[f64], pbest: &[f64], r1: &[f64], r2: &[f64], f: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| x[j] + f * (pbest[j] - x[j]) + f * (r1[j] - r2[j]))
        .collect()
}

/// Midpoint repair: a coordinate outside its box is replaced by the midpoint
/// between the parent coordinate and the violated bound.
pub fn repair(parent: &[f64], trial: &mut [f64], bounds: &[Bounds]) {
    for ((t, &p), b) in trial.iter_mut().zip(parent).zip(bounds) {
        if *t < b.lower {
            *t = 0.5 * (p + b.lower);
        } else if *t > b.upper {
            *t = 0.5 * (p + b.upper);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShadeState {
    config: ShadeConfig,
    orientation: Orientation,
    bounds: Vec<Bounds>,
    pub population: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    memory_f: Vec<f64>,
    memory_cr: Vec<f64>,
    memory_index: usize,
    archive: Vec<Vec<f64>>,
    generation: u64,
    rng: ChaCha8Rng,
}

impl ShadeState {
    /// Empty state; fill with [`ShadeState::set_population`].
    pub fn new(config: ShadeConfig, bounds: Vec<Bounds>, orientation: Orientation, seed: u64) -> Result<Self> {
        config.validate()?;
        let h = config.memory_len();
        Ok(Self {
            config,
            orientation,
            bounds,
            population: Vec::new(),
            values: Vec::new(),
            memory_f: vec![0.5; h],
            memory_cr: vec![0.5; h],
            memory_index: 0,
            archive: Vec::new(),
            generation: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn config(&self) -> &ShadeConfig {
        &self.config
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn memory(&self) -> (&[f64], &[f64]) {
        (&self.memory_cr, &self.memory_f)
    }

    pub fn memory_index(&self) -> usize {
        self.memory_index
    }

    pub fn archive(&self) -> &[Vec<f64>] {
        &self.archive
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn set_population(&mut self, points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<()> {
        if points.len() != self.config.population || values.len() != points.len() {
            return Err(CcError::InvalidConfig(format!(
                "population needs {} members, got {} points / {} values",
                self.config.population,
                points.len(),
                values.len()
            )));
        }
        self.population = points;
        self.values = values;
        Ok(())
    }

    /// Uniform random points in the box (not evaluated).
    pub fn random_points(&mut self, count: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| {
                self.bounds
                    .iter()
                    .map(|b| b.lower + b.width() * self.rng.random::<f64>())
                    .collect()
            })
            .collect()
    }

    /// Index of the best member; ties go to the lower index.
    pub fn best_index(&self) -> usize {
        (1..self.values.len()).fold(0, |b, i| {
            if self.orientation.better(self.values[i], self.values[b]) {
                i
            } else {
                b
            }
        })
    }

    /// Index of the worst member; ties go to the lower index.
    pub fn worst_index(&self) -> usize {
        (1..self.values.len()).fold(0, |w, i| {
            if self.orientation.better(self.values[w], self.values[i]) {
                i
            } else {
                w
            }
        })
    }

    pub fn shift_values(&mut self, delta: f64) {
        for v in &mut self.values {
            *v += delta;
        }
    }

    /// Put a displaced parent into the archive, evicting a random entry
    /// when the archive already holds `p` points.
    pub fn archive_push(&mut self, point: Vec<f64>) {
        if self.archive.len() < self.config.population {
            self.archive.push(point);
        } else {
            let slot = self.rng.random_range(0..self.archive.len());
            self.archive[slot] = point;
        }
    }

    pub fn sample_f(&mut self, slot: usize) -> f64 {
        let cauchy = Cauchy::new(self.memory_f[slot], 0.1).expect("valid Cauchy scale");
        loop {
            let f: f64 = cauchy.sample(&mut self.rng);
            if f > 0.0 {
                return f.min(1.0);
            }
        }
    }

    pub fn sample_cr(&mut self, slot: usize) -> f64 {
        let normal = Normal::new(self.memory_cr[slot], 0.1).expect("valid normal sd");
        let cr: f64 = normal.sample(&mut self.rng);
        cr.clamp(0.0, 1.0)
    }

    fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        let o = self.orientation;
        idx.sort_by(|&a, &b| {
            if o.better(self.values[a], self.values[b]) {
                std::cmp::Ordering::Less
            } else if o.better(self.values[b], self.values[a]) {
                std::cmp::Ordering::Greater
            } else {
                a.cmp(&b)
            }
        });
        idx
    }

    /// Trial vector for member `i` with freshly sampled F and CR.
    pub fn generate_trial(&mut self, i: usize) -> Result<Trial> {
        self.generate_trial_ranked(i, &self.ranked())
    }

    fn generate_trial_ranked(&mut self, i: usize, ranked: &[usize]) -> Result<Trial> {
        let p = self.population.len();
        if p < 4 {
            return Err(CcError::InvalidConfig(format!(
                "mutation needs at least 4 members, population has {p}"
            )));
        }
        let slot = self.rng.random_range(0..self.memory_f.len());
        let cr = self.sample_cr(slot);
        let f = self.sample_f(slot);

        let top = ((self.config.pbest_fraction * p as f64).ceil() as usize).clamp(1, p);
        let pbest = ranked[self.rng.random_range(0..top)];
        let r1 = loop {
            let r = self.rng.random_range(0..p);
            if r != i {
                break r;
            }
        };
        let pool = p + self.archive.len();
        let r2 = loop {
            let r = self.rng.random_range(0..pool);
            if r != i && r != r1 {
                break r;
            }
        };
        let x = &self.population[i];
        let x_r2 = if r2 < p {
            &self.population[r2]
        } else {
            &self.archive[r2 - p]
        };
        let mutant = current_to_pbest(x, &self.population[pbest], &self.population[r1], x_r2, f);

        let dim = x.len();
        let j_rand = self.rng.random_range(0..dim);
        let mut point: Vec<f64> = (0..dim)
            .map(|j| {
                if j == j_rand || self.rng.random::<f64>() < cr {
                    mutant[j]
                } else {
                    x[j]
                }
            })
            .collect();
        repair(&self.population[i], &mut point, &self.bounds);
        Ok(Trial { point, f, cr })
    }

    /// One trial per member, all drawn from the current population.
    pub fn generate_trials(&mut self) -> Result<Vec<Trial>> {
        let ranked = self.ranked();
        (0..self.population.len())
            .map(|i| self.generate_trial_ranked(i, &ranked))
            .collect()
    }

    /// Write the weighted means of the successful parameters into the
    /// current memory slot and advance the ring. No-op when empty.
    pub fn update_history(&mut self, successes: &[Success]) {
        let total: f64 = successes.iter().map(|s| s.delta).sum();
        if successes.is_empty() || !(total > 0.0) {
            return;
        }
        let mut cr_mean = 0.0;
        let (mut f_num, mut f_den) = (0.0, 0.0);
        for s in successes {
            let w = s.delta / total;
            cr_mean += w * s.cr;
            f_num += w * s.f * s.f;
            f_den += w * s.f;
        }
        self.memory_cr[self.memory_index] = cr_mean.clamp(0.0, 1.0);
        if f_den > 0.0 {
            self.memory_f[self.memory_index] = (f_num / f_den).clamp(0.0, 1.0);
        }
        self.memory_index = (self.memory_index + 1) % self.memory_f.len();
    }

    pub fn advance_generation(&mut self) {
        self.generation += 1;
    }

    /// A plain generation: every trial is evaluated with `eval`, greedy
    /// one-to-one selection, history update. Exactly `p` evaluations.
    pub fn step<E>(&mut self, mut eval: E) -> Result<usize>
    where
        E: FnMut(&[f64]) -> Result<f64>,
    {
        let trials = self.generate_trials()?;
        let mut trial_values = Vec::with_capacity(trials.len());
        for t in &trials {
            trial_values.push(eval(&t.point)?);
        }
        let mut successes = Vec::new();
        for (i, (t, v)) in trials.into_iter().zip(trial_values).enumerate() {
            let old = self.values[i];
            if self.orientation.better_or_equal(v, old) {
                if self.orientation.better(v, old) {
                    successes.push(Success {
                        f: t.f,
                        cr: t.cr,
                        delta: self.orientation.gain(v, old),
                    });
                    let parent = std::mem::replace(&mut self.population[i], t.point);
                    self.archive_push(parent);
                } else {
                    self.population[i] = t.point;
                }
                self.values[i] = v;
            }
        }
        self.update_history(&successes);
        self.advance_generation();
        Ok(successes.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadeOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    pub evaluations: u64,
    pub generations: u64,
    /// Best value after initialization and after every generation.
    pub history: Vec<f64>,
}

/// Stand-alone SHADE minimizing/maximizing `objective` over `bounds` with at
/// most `budget` evaluations. Stops before a generation that would not fit.
pub fn shade_optimize<F>(
    objective: F,
    bounds: Vec<Bounds>,
    budget: u64,
    config: ShadeConfig,
    orientation: Orientation,
    seed: u64,
) -> Result<ShadeOutcome>
where
    F: Fn(&[f64]) -> f64,
{
    let p = config.population as u64;
    if budget < p {
        return Err(CcError::InvalidConfig(format!(
            "budget {budget} cannot evaluate an initial population of {p}"
        )));
    }
    let mut state = ShadeState::new(config, bounds, orientation, seed)?;
    let points = state.random_points(p as usize);
    let values: Vec<f64> = points.iter().map(|x| objective(x)).collect();
    state.set_population(points, values)?;
    let mut used = p;
    let mut history = vec![state.values[state.best_index()]];
    while budget - used >= p {
        state.step(|x| Ok(objective(x)))?;
        used += p;
        history.push(state.values[state.best_index()]);
    }
    let b = state.best_index();
    Ok(ShadeOutcome {
        best: state.population[b].clone(),
        value: state.values[b],
        evaluations: used,
        generations: state.generation(),
        history,
    })
}
