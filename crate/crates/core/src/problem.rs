//! Black-box problems over a box domain.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};

/// Closed interval `[lower, upper]` for one decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower < upper, "empty interval [{lower}, {upper}]");
        Self { lower, upper }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

/// True interaction structure of a problem: which variables are separable
/// and which form nonseparable groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStructure {
    pub separable: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
}

/// The objective behind a [`Problem`]. Implementations must be pure.
pub trait Objective: Send + Sync {
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn evaluate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A minimization problem: objective, box domain and optional structure
/// metadata. Cheap to clone; the objective is shared.
#[derive(Clone)]
pub struct Problem {
    name: String,
    bounds: Vec<Bounds>,
    structure: Option<GroupStructure>,
    objective: Arc<dyn Objective>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dimension", &self.bounds.len())
            .field("has_structure", &self.structure.is_some())
            .finish()
    }
}

impl Problem {
    pub fn new(name: impl Into<String>, bounds: Vec<Bounds>, objective: impl Objective + 'static) -> Self {
        Self {
            name: name.into(),
            bounds,
            structure: None,
            objective: Arc::new(objective),
        }
    }

    /// Same box on every coordinate.
    pub fn uniform(
        name: impl Into<String>,
        dimension: usize,
        bounds: Bounds,
        objective: impl Objective + 'static,
    ) -> Self {
        Self::new(name, vec![bounds; dimension], objective)
    }

    pub fn with_structure(mut self, structure: GroupStructure) -> Self {
        self.structure = Some(structure);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn structure(&self) -> Option<&GroupStructure> {
        self.structure.as_ref()
    }

    /// Checked evaluation: rejects wrong lengths and out-of-box coordinates.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.bounds.len() {
            return Err(CcError::DimensionMismatch {
                expected: self.bounds.len(),
                actual: x.len(),
            });
        }
        for (index, (&value, b)) in x.iter().zip(&self.bounds).enumerate() {
            if !b.contains(value) {
                return Err(CcError::OutOfBounds {
                    index,
                    value,
                    lower: b.lower,
                    upper: b.upper,
                });
            }
        }
        Ok(self.objective.evaluate(x))
    }
}
