//! Surrogate-prescreened SHADE for one nonseparable group.
//!
//! Each generation fits a cubic RBF to the most recent real evaluations,
//! generates one trial per population member, and real-evaluates only the
//! `q` trials with the highest predicted improvement. Population members and
//! database entries store real improvements relative to the best overall
//! solution; when that solution advances, every stored improvement is
//! rebased so they stay comparable.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cc::{ContextVector, EvalBudget};
use crate::error::{CcError, Result};
use crate::problem::{Bounds, Problem};
use crate::shade::{Orientation, ShadeConfig, ShadeState, Success};
use crate::surrogates::{fit_rbf, pearson, SampleSet};

/// The best overall solution `x*` with its cached real fitness.
pub type BestSolution = ContextVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RbfShadeConfig {
    pub shade: ShadeConfig,
    /// Trials real-evaluated per generation.
    pub q: usize,
    /// Database capacity per group dimension (`d^n = factor * D_g`).
    pub db_factor: usize,
}

impl Default for RbfShadeConfig {
    fn default() -> Self {
        Self {
            shade: ShadeConfig::default(),
            q: 10,
            db_factor: 5,
        }
    }
}

impl RbfShadeConfig {
    pub fn validate(&self) -> Result<()> {
        self.shade.validate()?;
        if self.q == 0 || self.q > self.shade.population {
            return Err(CcError::InvalidConfig(format!(
                "q must be in 1..={}, got {}",
                self.shade.population, self.q
            )));
        }
        if self.db_factor == 0 {
            return Err(CcError::InvalidConfig("db_factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// Latin hypercube sample of `n` points in `bounds`.
pub fn latin_hypercube<R: Rng>(bounds: &[Bounds], n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; bounds.len()]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for (k, b) in bounds.iter().enumerate() {
        strata.shuffle(rng);
        for (p, &s) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            p[k] = b.lower + b.width() * (s as f64 + u) / n as f64;
        }
    }
    points
}

/// One line of the per-generation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: u64,
    pub selected: Vec<usize>,
    pub real_values: Vec<f64>,
    pub predicted_values: Vec<f64>,
    /// Spearman correlation of predicted vs real improvement over the
    /// reevaluated trials; `None` when either side is constant.
    pub rank_correlation: Option<f64>,
    pub fallback: bool,
    pub improved: bool,
    pub f_star: f64,
}

#[derive(Debug, Clone)]
pub struct SubproblemState {
    pub group: Vec<usize>,
    pub shade: ShadeState,
    pub recent_db: SampleSet,
    pub capacity: usize,
    q: usize,
}

/// Sample `db_factor * D_g` points by Latin hypercube, real-evaluate them
/// against `best`, keep them all in the database and the `p` best in the
/// population. When fewer than `p` were sampled, random extra points are
/// evaluated so the population is full.
pub fn init_subproblem(
    problem: &Problem,
    group: &[usize],
    best: &BestSolution,
    config: &RbfShadeConfig,
    budget: &mut EvalBudget,
    seed: u64,
) -> Result<SubproblemState> {
    config.validate()?;
    let p = config.shade.population;
    let dim = group.len();
    let capacity = config.db_factor * dim;
    let needed = capacity.max(p) as u64;
    if budget.remaining() < needed {
        return Err(CcError::BudgetExhausted {
            used: budget.used(),
            max: budget.max_fes(),
        });
    }
    let bounds: Vec<Bounds> = group.iter().map(|&i| problem.bounds()[i]).collect();
    let mut shade = ShadeState::new(config.shade.clone(), bounds.clone(), Orientation::Maximize, seed)?;

    let mut points = latin_hypercube(&bounds, capacity, shade.rng());
    if points.len() < p {
        let extra = shade.random_points(p - points.len());
        points.extend(extra);
    }
    let mut db = SampleSet::new(dim);
    let mut scratch = Vec::with_capacity(problem.dimension());
    let mut values = Vec::with_capacity(points.len());
    for x in &points {
        let e = best.improvement(problem, budget, group, x, &mut scratch)?;
        values.push(e);
        if db.len() < capacity {
            db.push(x, e);
        } else {
            db.replace_oldest(&[(x.clone(), e)]);
        }
    }

    // Highest improvement first; equal values keep sampling order.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(p);
    let pop: Vec<Vec<f64>> = order.iter().map(|&i| points[i].clone()).collect();
    let vals: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    shade.set_population(pop, vals)?;

    Ok(SubproblemState {
        group: group.to_vec(),
        shade,
        recent_db: db,
        capacity,
        q: config.q,
    })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Indices of the `q` largest scores, ties to the lower index.
pub fn top_q(scores: &[f64], q: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(q);
    idx
}

impl SubproblemState {
    pub fn dim(&self) -> usize {
        self.group.len()
    }

    pub fn generation(&self) -> u64 {
        self.shade.generation()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// One prescreened generation. Charges exactly `q` real evaluations.
    pub fn evolve_one_generation(
        &mut self,
        problem: &Problem,
        best: &mut BestSolution,
        budget: &mut EvalBudget,
    ) -> Result<GenerationReport> {
        let q = self.q;
        if budget.remaining() < q as u64 {
            return Err(CcError::BudgetExhausted {
                used: budget.used(),
                max: budget.max_fes(),
            });
        }

        let model = match fit_rbf(&self.recent_db) {
            Ok(m) => Some(m),
            Err(e) => {
                log::info!("group starting at {}: RBF fit failed ({e}); space-filling selection", self.group[0]);
                None
            }
        };

        let trials = self.shade.generate_trials()?;
        let (selected, predicted) = match &model {
            Some(m) => {
                let pred: Vec<f64> = trials.iter().map(|t| m.predict(&t.point)).collect();
                let sel = top_q(&pred, q);
                let p = sel.iter().map(|&i| pred[i]).collect();
                (sel, p)
            }
            None => {
                let spread: Vec<f64> = trials
                    .iter()
                    .map(|t| {
                        (0..self.recent_db.len())
                            .map(|k| {
                                self.recent_db
                                    .point(k)
                                    .iter()
                                    .zip(&t.point)
                                    .map(|(a, b)| (a - b) * (a - b))
                                    .sum::<f64>()
                            })
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect();
                let sel = top_q(&spread, q);
                (sel, vec![f64::NAN; q])
            }
        };

        let mut scratch = Vec::with_capacity(problem.dimension());
        let mut real = Vec::with_capacity(q);
        for &i in &selected {
            real.push(best.improvement(problem, budget, &self.group, &trials[i].point, &mut scratch)?);
        }

        // Parents always carry real (rebased) improvements.
        let successes: Vec<Success> = selected
            .iter()
            .zip(&real)
            .filter(|(&i, &e)| e > self.shade.values[i])
            .map(|(&i, &e)| Success {
                f: trials[i].f,
                cr: trials[i].cr,
                delta: e - self.shade.values[i],
            })
            .collect();
        self.shade.update_history(&successes);

        for (&i, &e) in selected.iter().zip(&real) {
            let point = trials[i].point.clone();
            if self.recent_db.len() < self.capacity {
                self.recent_db.push(&point, e);
            } else {
                self.recent_db.replace_oldest(&[(point, e)]);
            }
        }

        for (&i, &e) in selected.iter().zip(&real) {
            let w = self.shade.worst_index();
            if self.shade.values[w] < e {
                let old = std::mem::replace(&mut self.shade.population[w], trials[i].point.clone());
                self.shade.values[w] = e;
                self.shade.archive_push(old);
            }
        }

        let improved = self.commit_best(best);
        self.shade.advance_generation();

        let rank_correlation = if model.is_some() {
            pearson(&ranks(&predicted), &ranks(&real))
        } else {
            None
        };
        Ok(GenerationReport {
            generation: self.shade.generation(),
            selected,
            real_values: real,
            predicted_values: predicted,
            rank_correlation,
            fallback: model.is_none(),
            improved,
            f_star: best.fitness,
        })
    }

    /// If the best member improves on `best`, splice it in and rebase every
    /// stored improvement by its gain. Returns whether `best` moved.
    pub fn commit_best(&mut self, best: &mut BestSolution) -> bool {
        let b = self.shade.best_index();
        let gain = self.shade.values[b];
        if gain > 0.0 {
            best.commit(&self.group, &self.shade.population[b], gain);
            self.shade.shift_values(-gain);
            self.recent_db.shift_values(-gain);
            true
        } else {
            false
        }
    }

    /// Largest relative mismatch between `f(x* | m)` and `f* - e(m)` over
    /// the population, measured with direct evaluations outside any budget.
    pub fn consistency_error(&self, problem: &Problem, best: &BestSolution) -> Result<f64> {
        let mut scratch = Vec::with_capacity(problem.dimension());
        let scale = best.fitness.abs().max(1.0);
        let mut worst = 0.0f64;
        for (m, &e) in self.shade.population.iter().zip(&self.shade.values) {
            best.splice_into(&self.group, m, &mut scratch);
            let f = problem.evaluate(&scratch)?;
            worst = worst.max((f - (best.fitness - e)).abs() / scale);
        }
        Ok(worst)
    }
}
