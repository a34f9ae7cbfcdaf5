use serde::{Deserialize, Serialize};

use super::budget::EvalBudget;
use crate::error::Result;
use crate::problem::Problem;

/// A complete solution with its cached real fitness. Sub-solutions are
/// spliced into a copy of it for evaluation; the vector itself only changes
/// through [`ContextVector::commit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextVector {
    pub values: Vec<f64>,
    pub fitness: f64,
}

impl ContextVector {
    /// Evaluate `values` (one FE) and wrap it.
    pub fn evaluate(problem: &Problem, budget: &mut EvalBudget, values: Vec<f64>) -> Result<Self> {
        let fitness = budget.evaluate(problem, &values)?;
        Ok(Self { values, fitness })
    }

    /// `f(x | sub)`: the fitness with `sub` written at `indices` (one FE).
    pub fn evaluate_with(
        &self,
        problem: &Problem,
        budget: &mut EvalBudget,
        indices: &[usize],
        sub: &[f64],
        scratch: &mut Vec<f64>,
    ) -> Result<f64> {
        self.splice_into(indices, sub, scratch);
        budget.evaluate(problem, scratch)
    }

    /// Fitness improvement `f(x) - f(x | sub)` (one FE); larger is better.
    pub fn improvement(
        &self,
        problem: &Problem,
        budget: &mut EvalBudget,
        indices: &[usize],
        sub: &[f64],
        scratch: &mut Vec<f64>,
    ) -> Result<f64> {
        Ok(self.fitness - self.evaluate_with(problem, budget, indices, sub, scratch)?)
    }

    pub fn splice_into(&self, indices: &[usize], sub: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(indices.len(), sub.len());
        out.clear();
        out.extend_from_slice(&self.values);
        for (&i, &v) in indices.iter().zip(sub) {
            out[i] = v;
        }
    }

    pub fn sub_vector(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.values[i]).collect()
    }

    /// Write `sub` at `indices` and lower the cached fitness by the known
    /// `improvement`. No evaluation.
    pub fn commit(&mut self, indices: &[usize], sub: &[f64], improvement: f64) {
        for (&i, &v) in indices.iter().zip(sub) {
            self.values[i] = v;
        }
        self.fitness -= improvement;
    }
}
