//! Partition of decision variables into 1-D separable subproblems and
//! nonseparable groups.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cc::{EvalBudget, Phase};
use crate::error::{CcError, Result};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Variables optimized one at a time, ascending.
    pub singletons: Vec<usize>,
    /// Nonseparable groups, each ascending, ordered by smallest member.
    pub groups: Vec<Vec<usize>>,
    /// Real evaluations the decomposer consumed.
    pub fe_cost: u64,
}

impl Decomposition {
    /// Build and normalize (sort) a decomposition, then validate it.
    pub fn new(mut singletons: Vec<usize>, mut groups: Vec<Vec<usize>>, fe_cost: u64, dimension: usize) -> Result<Self> {
        singletons.sort_unstable();
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort_by_key(|g| g.first().copied().unwrap_or(usize::MAX));
        let d = Self {
            singletons,
            groups,
            fe_cost,
        };
        d.validate(dimension)?;
        Ok(d)
    }

    /// Check the partition property over `0..dimension`.
    pub fn validate(&self, dimension: usize) -> Result<()> {
        let mut seen = vec![false; dimension];
        let mut mark = |i: usize| -> Result<()> {
            match seen.get_mut(i) {
                None => Err(CcError::InvalidDecomposition(format!(
                    "index {i} outside 0..{dimension}"
                ))),
                Some(true) => Err(CcError::InvalidDecomposition(format!("index {i} assigned twice"))),
                Some(s) => {
                    *s = true;
                    Ok(())
                }
            }
        };
        for &i in &self.singletons {
            mark(i)?;
        }
        for g in &self.groups {
            if g.len() < 2 {
                return Err(CcError::InvalidDecomposition(format!(
                    "group {g:?} has fewer than 2 members"
                )));
            }
            for &i in g {
                mark(i)?;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(CcError::InvalidDecomposition(format!("index {missing} not assigned")));
        }
        Ok(())
    }

    pub fn subproblem_count(&self) -> usize {
        self.singletons.len() + self.groups.len()
    }

    /// List-of-lists form used in run logs: singletons first, then groups.
    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.singletons
            .iter()
            .map(|&i| vec![i])
            .chain(self.groups.iter().cloned())
            .collect()
    }
}

/// Decomposition from the problem's true structure metadata. Costs no FEs.
pub fn ideal_decompose(problem: &Problem) -> Result<Decomposition> {
    let s = problem.structure().ok_or(CcError::MissingMetadata)?;
    Decomposition::new(s.separable.clone(), s.groups.clone(), 0, problem.dimension())
}

/// Evaluation handle given to decomposers: charges the run budget under
/// [`Phase::Decomposition`] and refuses to go past its own limit.
pub struct DecompositionEvaluator<'a> {
    problem: &'a Problem,
    budget: &'a mut EvalBudget,
    limit: u64,
    used: u64,
}

impl DecompositionEvaluator<'_> {
    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.used
    }

    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if self.used >= self.limit {
            return Err(CcError::BudgetExhausted {
                used: self.used,
                max: self.limit,
            });
        }
        let f = self.budget.evaluate(self.problem, x)?;
        self.used += 1;
        Ok(f)
    }
}

pub type DecomposerFn = dyn Fn(&mut DecompositionEvaluator<'_>) -> Result<Decomposition> + Send + Sync;

/// Named decomposers. Populated up front, read-only afterwards.
#[derive(Clone)]
pub struct DecomposerRegistry {
    entries: BTreeMap<String, Arc<DecomposerFn>>,
}

impl Default for DecomposerRegistry {
    /// `ideal`, `monolithic` (one group of everything) and `all-singleton`.
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("ideal", |ev| ideal_decompose(ev.problem()));
        r.register("monolithic", |ev| {
            let d = ev.problem().dimension();
            if d < 2 {
                Decomposition::new((0..d).collect(), Vec::new(), 0, d)
            } else {
                Decomposition::new(Vec::new(), vec![(0..d).collect()], 0, d)
            }
        });
        r.register("all-singleton", |ev| {
            let d = ev.problem().dimension();
            Decomposition::new((0..d).collect(), Vec::new(), 0, d)
        });
        r
    }
}

impl DecomposerRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: Fn(&mut DecompositionEvaluator<'_>) -> Result<Decomposition> + Send + Sync + 'static,
    {
        self.entries.insert(name.into(), Arc::new(f));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Run decomposer `name` with at most `limit` FEs taken from `budget`.
    /// The returned `fe_cost` is what was actually charged.
    pub fn decompose(&self, name: &str, problem: &Problem, budget: &mut EvalBudget, limit: u64) -> Result<Decomposition> {
        let f = self
            .entries
            .get(name)
            .ok_or_else(|| CcError::UnknownDecomposer(name.to_string()))?;
        let previous = budget.phase();
        budget.set_phase(Phase::Decomposition);
        let mut ev = DecompositionEvaluator {
            problem,
            budget,
            limit,
            used: 0,
        };
        let result = f(&mut ev);
        let used = ev.used;
        budget.set_phase(previous);
        let mut d = result?;
        d.validate(problem.dimension())?;
        d.fe_cost = used;
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build_benchmark, BenchmarkId};
    use crate::problem::Bounds;

    fn plain(d: usize) -> Problem {
        Problem::uniform("sum", d, Bounds::new(-1.0, 1.0), |x: &[f64]| x.iter().sum::<f64>())
    }

    #[test]
    fn ideal_counts() {
        let f1 = build_benchmark(BenchmarkId::F1, 1000, 50, 0).unwrap();
        let d = ideal_decompose(&f1).unwrap();
        assert_eq!((d.singletons.len(), d.groups.len(), d.fe_cost), (1000, 0, 0));

        let f4 = build_benchmark(BenchmarkId::F4, 1000, 50, 0).unwrap();
        let d = ideal_decompose(&f4).unwrap();
        assert_eq!((d.singletons.len(), d.groups.len()), (950, 1));
        assert_eq!(d.groups[0].len(), 50);

        let f9 = build_benchmark(BenchmarkId::F9, 1000, 50, 0).unwrap();
        let d = ideal_decompose(&f9).unwrap();
        assert_eq!((d.singletons.len(), d.groups.len()), (500, 10));
        assert!(d.groups.windows(2).all(|w| w[0][0] < w[1][0]));
    }

    #[test]
    fn ideal_needs_metadata() {
        assert_eq!(ideal_decompose(&plain(3)), Err(CcError::MissingMetadata));
    }

    #[test]
    fn ideal_is_idempotent() {
        let f9 = build_benchmark(BenchmarkId::F9, 100, 5, 4).unwrap();
        assert_eq!(ideal_decompose(&f9).unwrap(), ideal_decompose(&f9).unwrap());
    }

    #[test]
    fn registry_builtins() {
        let reg = DecomposerRegistry::default();
        let mut budget = EvalBudget::new(10);
        let p = plain(10);
        let mono = reg.decompose("monolithic", &p, &mut budget, 0).unwrap();
        assert_eq!((mono.singletons.len(), mono.groups.len()), (0, 1));
        assert_eq!(mono.groups[0].len(), 10);
        let single = reg.decompose("all-singleton", &p, &mut budget, 0).unwrap();
        assert_eq!(single.singletons.len(), 10);

        let f1 = build_benchmark(BenchmarkId::F1, 50, 5, 0).unwrap();
        assert_eq!(
            reg.decompose("ideal", &f1, &mut budget, 0).unwrap(),
            ideal_decompose(&f1).unwrap()
        );
        assert_eq!(budget.used(), 0);
        assert!(matches!(
            reg.decompose("vgda", &p, &mut budget, 0),
            Err(CcError::UnknownDecomposer(_))
        ));
    }

    #[test]
    fn custom_decomposer_is_charged_and_limited() {
        let mut reg = DecomposerRegistry::empty();
        reg.register("probe", |ev| {
            for i in 0..3 {
                let mut x = vec![0.0; ev.problem().dimension()];
                x[i] = 0.5;
                ev.evaluate(&x)?;
            }
            let d = ev.problem().dimension();
            Decomposition::new((0..d).collect(), Vec::new(), 0, d)
        });
        let p = plain(4);
        let mut budget = EvalBudget::new(100);
        let d = reg.decompose("probe", &p, &mut budget, 5).unwrap();
        assert_eq!(d.fe_cost, 3);
        assert_eq!(budget.charged(Phase::Decomposition), 3);

        let err = reg.decompose("probe", &p, &mut budget, 2).unwrap_err();
        assert!(matches!(err, CcError::BudgetExhausted { .. }));
    }

    #[test]
    fn validate_rejects_bad_partitions() {
        assert!(Decomposition::new(vec![0, 1], vec![vec![1, 2]], 0, 3).is_err());
        assert!(Decomposition::new(vec![0], vec![vec![1]], 0, 2).is_err());
        assert!(Decomposition::new(vec![0], vec![], 0, 2).is_err());
        assert!(Decomposition::new(vec![5], vec![], 0, 1).is_err());
        let ok = Decomposition::new(vec![2, 0], vec![vec![3, 1]], 0, 4).unwrap();
        assert_eq!(ok.to_lists(), vec![vec![0], vec![2], vec![1, 3]]);
    }
}
