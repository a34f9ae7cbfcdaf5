use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::problem::Problem;

/// Run phase a real evaluation is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Decomposition,
    Context,
    PrSearch,
    Assemble,
    SubproblemInit,
    Generations,
}

/// Monotone counter of real evaluations with a hard cap.
///
/// Every real evaluation in a run goes through [`EvalBudget::evaluate`], which
/// charges it to the current [`Phase`] and records the best value seen so far.
#[derive(Debug, Clone)]
pub struct EvalBudget {
    max_fes: u64,
    used: u64,
    phase: Phase,
    /// FEs held back from the current phase.
    reserved: u64,
    charges: BTreeMap<Phase, u64>,
    best: f64,
    history: Vec<f64>,
}

impl EvalBudget {
    pub fn new(max_fes: u64) -> Self {
        Self {
            max_fes,
            used: 0,
            phase: Phase::Context,
            reserved: 0,
            charges: BTreeMap::new(),
            best: f64::INFINITY,
            history: Vec::new(),
        }
    }

    pub fn max_fes(&self) -> u64 {
        self.max_fes
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    /// FEs still available to the current phase (the reserve excluded).
    pub fn remaining(&self) -> u64 {
        (self.max_fes - self.used).saturating_sub(self.reserved)
    }

    /// Hold back `n` FEs: [`EvalBudget::evaluate`] refuses to dip into them
    /// until the reserve is lowered again.
    pub fn set_reserve(&mut self, n: u64) {
        self.reserved = n;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn charge_log(&self) -> &BTreeMap<Phase, u64> {
        &self.charges
    }

    pub fn charged(&self, phase: Phase) -> u64 {
        self.charges.get(&phase).copied().unwrap_or(0)
    }

    /// Lowest fitness over all real evaluations so far.
    pub fn best(&self) -> f64 {
        self.best
    }

    /// Best-so-far value after each FE; entry `k` is the state after FE `k+1`.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// One real evaluation, charged to the current phase.
    pub fn evaluate(&mut self, problem: &Problem, x: &[f64]) -> Result<f64> {
        if self.remaining() == 0 {
            return Err(CcError::BudgetExhausted {
                used: self.used,
                max: self.max_fes,
            });
        }
        let f = problem.evaluate(x)?;
        self.used += 1;
        *self.charges.entry(self.phase).or_insert(0) += 1;
        if f < self.best {
            self.best = f;
        }
        self.history.push(self.best);
        Ok(f)
    }

    /// `(fe_count, best_so_far)` pairs at no more than `max_points` uniformly
    /// spaced FE checkpoints, always ending at the last FE.
    pub fn trace(&self, max_points: usize) -> Vec<(u64, f64)> {
        let n = self.history.len();
        if n == 0 || max_points == 0 {
            return Vec::new();
        }
        if n <= max_points {
            return self
                .history
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u64 + 1, v))
                .collect();
        }
        (1..=max_points)
            .map(|k| {
                let fe = (k * n).div_ceil(max_points);
                (fe as u64, self.history[fe - 1])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Bounds;

    fn line() -> Problem {
        Problem::uniform("line", 1, Bounds::new(-10.0, 10.0), |x: &[f64]| x[0])
    }

    #[test]
    fn reserve_is_held_back() {
        let p = line();
        let mut b = EvalBudget::new(2);
        b.set_reserve(1);
        b.evaluate(&p, &[0.0]).unwrap();
        assert!(b.evaluate(&p, &[0.0]).is_err());
        assert_eq!(b.remaining(), 0);
        b.set_reserve(0);
        b.evaluate(&p, &[0.0]).unwrap();
        assert_eq!(b.used(), 2);
    }

    #[test]
    fn charges_by_phase_and_caps() {
        let p = line();
        let mut b = EvalBudget::new(3);
        b.evaluate(&p, &[1.0]).unwrap();
        b.set_phase(Phase::PrSearch);
        b.evaluate(&p, &[2.0]).unwrap();
        b.evaluate(&p, &[-1.0]).unwrap();
        assert!(matches!(b.evaluate(&p, &[0.0]), Err(CcError::BudgetExhausted { .. })));
        assert_eq!(b.used(), 3);
        assert_eq!(b.charged(Phase::Context), 1);
        assert_eq!(b.charged(Phase::PrSearch), 2);
        assert_eq!(b.history(), &[1.0, 1.0, -1.0]);
    }

    #[test]
    fn failed_evaluation_is_not_charged() {
        let p = line();
        let mut b = EvalBudget::new(3);
        assert!(b.evaluate(&p, &[11.0]).is_err());
        assert_eq!(b.used(), 0);
    }

    #[test]
    fn trace_downsamples_with_last_point() {
        let p = line();
        let mut b = EvalBudget::new(1000);
        for i in 0..1000 {
            b.evaluate(&p, &[10.0 - i as f64 * 0.01]).unwrap();
        }
        let t = b.trace(30);
        assert_eq!(t.len(), 30);
        assert_eq!(t.last().unwrap().0, 1000);
        assert!(t.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
        assert_eq!(b.trace(5000).len(), 1000);
    }
}
