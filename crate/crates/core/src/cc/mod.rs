//! The cooperative-coevolution driver.
//!
//! A run decomposes the problem, solves every separable variable by PR
//! search against one fixed random context vector, assembles the best
//! overall solution `x*` and then cycles through the nonseparable groups,
//! one generation per visit, until the evaluation budget cannot pay for
//! another generation.
//!
//! Three variants share this skeleton:
//!
//! | variant    | singletons      | groups          | FEs per generation |
//! |------------|-----------------|-----------------|--------------------|
//! | `asmcc`    | PR search       | RBF-SHADE       | `q`                |
//! | `ps-cc`    | PR search       | plain SHADE     | `p`                |
//! | `shade-cc` | plain SHADE     | plain SHADE     | `p`                |
//!
//! In `shade-cc` every singleton is a one-dimensional SHADE subproblem that
//! takes part in the same round-robin as the groups.

mod budget;
mod context;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use budget::{EvalBudget, Phase};
pub use context::ContextVector;

use crate::decomposition::{DecomposerRegistry, Decomposition};
use crate::error::{CcError, Result};
use crate::pr_search::{solve_1d, PrSearchConfig, PrTrace};
use crate::problem::{Bounds, Problem};
use crate::rbf_shade::{init_subproblem, BestSolution, GenerationReport, RbfShadeConfig, SubproblemState};
use crate::shade::{Orientation, ShadeState};

/// Default evaluation cap per run.
pub const DEFAULT_MAX_FES: u64 = 300_000;
/// Default cap on trace points kept in a [`RunResult`].
pub const DEFAULT_TRACE_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "shade-cc")]
    ShadeCc,
    #[serde(rename = "ps-cc")]
    PsCc,
    #[serde(rename = "asmcc")]
    Asmcc,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::ShadeCc, Variant::PsCc, Variant::Asmcc];

    pub fn tag(&self) -> &'static str {
        match self {
            Variant::ShadeCc => "shade-cc",
            Variant::PsCc => "ps-cc",
            Variant::Asmcc => "asmcc",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = CcError;

    /// Case-insensitive; the hyphen is optional (`SHADE-CC`, `shadecc`).
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_lowercase();
        match key.as_str() {
            "shadecc" => Ok(Variant::ShadeCc),
            "pscc" => Ok(Variant::PsCc),
            "asmcc" => Ok(Variant::Asmcc),
            _ => Err(CcError::InvalidConfig(format!("unknown variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CcConfig {
    pub max_fes: u64,
    /// Registered decomposer name, see [`DecomposerRegistry`].
    pub decomposer: String,
    /// Most FEs the decomposer may spend; `None` means the whole budget.
    pub decomposition_limit: Option<u64>,
    pub pr: PrSearchConfig,
    pub rbf: RbfShadeConfig,
    /// Keep the final `x*` in the result.
    pub keep_solution: bool,
    pub trace_points: usize,
    /// After every RBF-SHADE generation, re-evaluate `f(x* | m)` for each
    /// population member outside the budget and compare with `f* - e(m)`.
    /// Expensive; meant for tests.
    pub check_consistency: bool,
}

impl Default for CcConfig {
    fn default() -> Self {
        Self {
            max_fes: DEFAULT_MAX_FES,
            decomposer: "ideal".into(),
            decomposition_limit: None,
            pr: PrSearchConfig::default(),
            rbf: RbfShadeConfig::default(),
            keep_solution: false,
            trace_points: DEFAULT_TRACE_POINTS,
            check_consistency: false,
        }
    }
}

impl CcConfig {
    pub fn validate(&self) -> Result<()> {
        self.pr.validate()?;
        self.rbf.validate()?;
        if self.trace_points == 0 {
            return Err(CcError::InvalidConfig("trace_points must be >= 1".into()));
        }
        Ok(())
    }
}

/// Summary of the PR-search phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrSummary {
    pub solved: usize,
    /// Singletons left at their context value because the budget ran out.
    pub skipped: usize,
    pub quadratic: usize,
    pub quintic: usize,
    /// Layer-two winners that beat every layer sample.
    pub winners_accepted: usize,
    pub min_fes: u64,
    pub max_fes: u64,
}

impl PrSummary {
    fn record(&mut self, t: &PrTrace) {
        if self.solved == 0 {
            self.min_fes = t.fes;
            self.max_fes = t.fes;
        } else {
            self.min_fes = self.min_fes.min(t.fes);
            self.max_fes = self.max_fes.max(t.fes);
        }
        self.solved += 1;
        match t.degree {
            2 => self.quadratic += 1,
            5 => self.quintic += 1,
            _ => {}
        }
        if t.winner_accepted {
            self.winners_accepted += 1;
        }
    }
}

/// Debug-mode bookkeeping for the rebase invariants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub generations_checked: u64,
    /// Largest `|f(x* | m) - (f* - e(m))| / max(1, |f*|)` seen.
    pub max_relative_error: f64,
    /// Rebases after which the best stored improvement was not exactly 0.
    pub nonzero_after_rebase: u64,
    pub rebases: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub problem: String,
    pub variant: Variant,
    pub seed: u64,
    pub config: CcConfig,
    pub decomposition: Decomposition,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_star: Option<Vec<f64>>,
    pub f_star: f64,
    pub fes_used: u64,
    pub charge_log: BTreeMap<Phase, u64>,
    pub pr_summary: PrSummary,
    /// Generations executed per subproblem in round-robin order (groups for
    /// `asmcc`/`ps-cc`, singletons then groups for `shade-cc`).
    pub generations: Vec<u64>,
    /// Subproblems that could not be initialized within the budget.
    pub skipped_subproblems: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub consistency: Option<ConsistencyReport>,
    /// `(fe_count, best_fitness)`, downsampled.
    pub trace: Vec<(u64, f64)>,
}

impl RunResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Hooks into a run for logging and tests. Every method defaults to a no-op.
pub trait RunObserver {
    fn pr_search(&mut self, _trace: &PrTrace) {}
    fn generation(&mut self, _subproblem: usize, _report: &GenerationReport) {}
}

impl RunObserver for () {}

/// Plain SHADE on one subproblem, values are improvements against `x*`.
struct PlainSubproblem {
    indices: Vec<usize>,
    shade: ShadeState,
}

impl PlainSubproblem {
    fn init(
        problem: &Problem,
        indices: Vec<usize>,
        best: &BestSolution,
        config: &RbfShadeConfig,
        budget: &mut EvalBudget,
        seed: u64,
    ) -> Result<Self> {
        let bounds: Vec<Bounds> = indices.iter().map(|&i| problem.bounds()[i]).collect();
        let mut shade = ShadeState::new(config.shade.clone(), bounds, Orientation::Maximize, seed)?;
        let points = shade.random_points(config.shade.population);
        let mut scratch = Vec::with_capacity(problem.dimension());
        let mut values = Vec::with_capacity(points.len());
        for x in &points {
            values.push(best.improvement(problem, budget, &indices, x, &mut scratch)?);
        }
        shade.set_population(points, values)?;
        Ok(Self { indices, shade })
    }

    fn generation(&mut self, problem: &Problem, best: &mut BestSolution, budget: &mut EvalBudget) -> Result<()> {
        let mut scratch = Vec::with_capacity(problem.dimension());
        let indices = &self.indices;
        let snapshot: &BestSolution = best;
        self.shade
            .step(|u| snapshot.improvement(problem, budget, indices, u, &mut scratch))?;
        let b = self.shade.best_index();
        let gain = self.shade.values[b];
        if gain > 0.0 {
            best.commit(&self.indices, &self.shade.population[b], gain);
            self.shade.shift_values(-gain);
        }
        Ok(())
    }
}

enum Engine {
    Rbf(SubproblemState),
    Plain(PlainSubproblem),
}

/// Decompose with the configured decomposer, then run `variant`.
pub fn run_variant(variant: Variant, problem: &Problem, config: &CcConfig, seed: u64) -> Result<RunResult> {
    run_variant_with(variant, problem, config, seed, &DecomposerRegistry::default(), &mut ())
}

/// [`run_variant`] with a custom registry and observer.
pub fn run_variant_with(
    variant: Variant,
    problem: &Problem,
    config: &CcConfig,
    seed: u64,
    registry: &DecomposerRegistry,
    observer: &mut dyn RunObserver,
) -> Result<RunResult> {
    config.validate()?;
    let mut budget = EvalBudget::new(config.max_fes);
    let limit = config.decomposition_limit.unwrap_or(config.max_fes).min(config.max_fes);
    let decomposition = registry.decompose(&config.decomposer, problem, &mut budget, limit)?;
    run_decomposed(variant, problem, decomposition, config, budget, seed, observer)
}

/// The full ASMCC run on an existing decomposition.
pub fn run_asmcc(
    problem: &Problem,
    decomposition: Decomposition,
    config: &CcConfig,
    budget: EvalBudget,
    seed: u64,
) -> Result<RunResult> {
    run_decomposed(Variant::Asmcc, problem, decomposition, config, budget, seed, &mut ())
}

/// Run `variant` on a given decomposition with a (possibly part-used) budget.
pub fn run_decomposed(
    variant: Variant,
    problem: &Problem,
    decomposition: Decomposition,
    config: &CcConfig,
    mut budget: EvalBudget,
    seed: u64,
    observer: &mut dyn RunObserver,
) -> Result<RunResult> {
    config.validate()?;
    decomposition.validate(problem.dimension())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pr_summary = PrSummary::default();

    // Context vector: one random full solution.
    budget.set_phase(Phase::Context);
    let xc: Vec<f64> = problem
        .bounds()
        .iter()
        .map(|b| b.lower + b.width() * rng.random::<f64>())
        .collect();
    let context = ContextVector::evaluate(problem, &mut budget, xc)?;

    let mut best = match variant {
        Variant::Asmcc | Variant::PsCc => {
            budget.set_phase(Phase::PrSearch);
            // Keep one FE for evaluating the assembled x*.
            budget.set_reserve(1);
            let mut x_star = context.values.clone();
            for (k, &var) in decomposition.singletons.iter().enumerate() {
                if budget.remaining() == 0 {
                    pr_summary.skipped = decomposition.singletons.len() - k;
                    log::warn!(
                        "{}: budget exhausted after {k} singletons; {} keep their context values",
                        problem.name(),
                        pr_summary.skipped
                    );
                    break;
                }
                let out = solve_1d(problem, &context, var, &config.pr, &mut budget)?;
                observer.pr_search(&out.trace);
                if out.truncated {
                    log::warn!("{}: PR search on variable {var} truncated by the budget", problem.name());
                }
                pr_summary.record(&out.trace);
                x_star[var] = out.x;
            }
            budget.set_reserve(0);
            budget.set_phase(Phase::Assemble);
            if budget.remaining() == 0 {
                log::warn!("{}: no budget left to evaluate x*; returning the context", problem.name());
                context.clone()
            } else {
                ContextVector::evaluate(problem, &mut budget, x_star)?
            }
        }
        Variant::ShadeCc => context.clone(),
    };

    // Subproblem list in round-robin order.
    let mut subproblems: Vec<Vec<usize>> = Vec::new();
    if variant == Variant::ShadeCc {
        subproblems.extend(decomposition.singletons.iter().map(|&i| vec![i]));
    }
    subproblems.extend(decomposition.groups.iter().cloned());

    budget.set_phase(Phase::SubproblemInit);
    let mut engines: Vec<(usize, Engine)> = Vec::new();
    let mut skipped = 0;
    for (k, indices) in subproblems.iter().enumerate() {
        let sub_seed = rng.next_u64();
        let engine = match variant {
            Variant::Asmcc => {
                match init_subproblem(problem, indices, &best, &config.rbf, &mut budget, sub_seed) {
                    Ok(s) => Engine::Rbf(s),
                    Err(CcError::BudgetExhausted { .. }) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            Variant::PsCc | Variant::ShadeCc => {
                if budget.remaining() < config.rbf.shade.population as u64 {
                    skipped += 1;
                    continue;
                }
                Engine::Plain(PlainSubproblem::init(
                    problem,
                    indices.clone(),
                    &best,
                    &config.rbf,
                    &mut budget,
                    sub_seed,
                )?)
            }
        };
        engines.push((k, engine));
    }
    if skipped > 0 {
        log::warn!("{}: budget too small to initialize {skipped} of {} subproblems", problem.name(), subproblems.len());
    }

    budget.set_phase(Phase::Generations);
    let per_generation = match variant {
        Variant::Asmcc => config.rbf.q,
        _ => config.rbf.shade.population,
    } as u64;
    let mut generations = vec![0u64; subproblems.len()];
    let mut consistency = config.check_consistency.then(ConsistencyReport::default);
    'rounds: while !engines.is_empty() {
        for (k, engine) in engines.iter_mut() {
            if budget.remaining() < per_generation {
                break 'rounds;
            }
            match engine {
                Engine::Rbf(state) => {
                    let report = state.evolve_one_generation(problem, &mut best, &mut budget)?;
                    if let Some(c) = consistency.as_mut() {
                        c.generations_checked += 1;
                        if report.improved {
                            c.rebases += 1;
                            let top = state.shade.values[state.shade.best_index()];
                            if top != 0.0 {
                                c.nonzero_after_rebase += 1;
                            }
                        }
                        let err = state.consistency_error(problem, &best)?;
                        c.max_relative_error = c.max_relative_error.max(err);
                    }
                    observer.generation(*k, &report);
                }
                Engine::Plain(plain) => plain.generation(problem, &mut best, &mut budget)?,
            }
            generations[*k] += 1;
        }
    }

    Ok(RunResult {
        problem: problem.name().to_string(),
        variant,
        seed,
        config: config.clone(),
        decomposition,
        x_star: config.keep_solution.then(|| best.values.clone()),
        f_star: best.fitness,
        fes_used: budget.used(),
        charge_log: budget.charge_log().clone(),
        pr_summary,
        generations,
        skipped_subproblems: skipped,
        consistency,
        trace: budget.trace(config.trace_points),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build_benchmark, BenchmarkId};
    use crate::shade::ShadeConfig;

    fn small_config(max_fes: u64) -> CcConfig {
        CcConfig {
            max_fes,
            pr: PrSearchConfig {
                d_s: 24,
                ..PrSearchConfig::default()
            },
            rbf: RbfShadeConfig {
                shade: ShadeConfig {
                    population: 10,
                    ..ShadeConfig::default()
                },
                q: 2,
                db_factor: 5,
            },
            ..CcConfig::default()
        }
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("SHADE-CC".parse::<Variant>().unwrap(), Variant::ShadeCc);
        assert_eq!("ps_cc".parse::<Variant>().unwrap(), Variant::PsCc);
        assert_eq!("asmcc".parse::<Variant>().unwrap(), Variant::Asmcc);
        assert!("cc".parse::<Variant>().is_err());
        assert_eq!(serde_json::to_string(&Variant::PsCc).unwrap(), "\"ps-cc\"");
    }

    #[test]
    fn separable_run_accounting() {
        let p = build_benchmark(BenchmarkId::F1, 20, 5, 1).unwrap();
        let cfg = small_config(100_000);
        let r = run_variant(Variant::Asmcc, &p, &cfg, 7).unwrap();
        assert_eq!(r.charge_log.get(&Phase::Context), Some(&1));
        assert_eq!(r.charge_log.get(&Phase::Assemble), Some(&1));
        let pr = r.charge_log[&Phase::PrSearch];
        assert!(pr <= 20 * 49 && pr >= 20 * 25, "{pr}");
        assert_eq!(r.fes_used, 2 + pr);
        assert_eq!(r.generations, Vec::<u64>::new());
        assert_eq!(r.pr_summary.solved, 20);
    }

    #[test]
    fn round_robin_is_fair() {
        let p = build_benchmark(BenchmarkId::F9, 40, 5, 2).unwrap();
        let cfg = small_config(10_000);
        let r = run_variant(Variant::Asmcc, &p, &cfg, 3).unwrap();
        let g = &r.generations;
        assert_eq!(g.len(), 4);
        let (lo, hi) = (g.iter().min().unwrap(), g.iter().max().unwrap());
        assert!(hi - lo <= 1, "{g:?}");
        assert_eq!(r.charge_log[&Phase::SubproblemInit], 4 * 25);
        assert_eq!(r.charge_log[&Phase::Generations], g.iter().sum::<u64>() * 2);
        assert!(r.fes_used <= 10_000 && 10_000 - r.fes_used < 2);
        assert_eq!(r.fes_used, r.charge_log.values().sum::<u64>());
    }

    #[test]
    fn tiny_budget_degrades() {
        let p = build_benchmark(BenchmarkId::F9, 40, 5, 2).unwrap();
        let r = run_variant(Variant::Asmcc, &p, &small_config(30), 3).unwrap();
        assert_eq!(r.fes_used, 30);
        assert!(r.pr_summary.skipped > 0);
        assert_eq!(r.skipped_subproblems, 4);
    }

    #[test]
    fn shade_cc_includes_singletons() {
        let p = build_benchmark(BenchmarkId::F9, 40, 5, 2).unwrap();
        let r = run_variant(Variant::ShadeCc, &p, &small_config(2_000), 3).unwrap();
        assert_eq!(r.generations.len(), 24);
        assert_eq!(r.charge_log.get(&Phase::PrSearch), None);
        assert_eq!(r.charge_log[&Phase::SubproblemInit], 240);
        assert_eq!(r.charge_log[&Phase::Generations], r.generations.iter().sum::<u64>() * 10);
    }
}
