//! Base functions of the suite. Each takes an already shifted (and, where
//! applicable, rotated) vector `z` whose optimum is the origin.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFunction {
    Elliptic,
    Rastrigin,
    Ackley,
    #[serde(rename = "schwefel1.2")]
    Schwefel12,
    Rosenbrock,
    Sphere,
}

impl BaseFunction {
    pub fn tag(&self) -> &'static str {
        match self {
            BaseFunction::Elliptic => "elliptic",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Schwefel12 => "schwefel1.2",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Sphere => "sphere",
        }
    }

    /// Offset added to `x - shift` before evaluation. Rosenbrock's optimum
    /// sits at the all-ones vector, so it is moved onto the shift.
    pub fn origin_offset(&self) -> f64 {
        match self {
            BaseFunction::Rosenbrock => 1.0,
            _ => 0.0,
        }
    }

    /// Evaluate on `z`. `weights` is only read by the elliptic function and
    /// must then hold [`elliptic_weights`] of matching length.
    pub fn eval(&self, z: &[f64], weights: &[f64]) -> f64 {
        match self {
            BaseFunction::Elliptic => elliptic(z, weights),
            BaseFunction::Rastrigin => rastrigin(z),
            BaseFunction::Ackley => ackley(z),
            BaseFunction::Schwefel12 => schwefel12(z),
            BaseFunction::Rosenbrock => rosenbrock(z),
            BaseFunction::Sphere => sphere(z),
        }
    }
}

/// Condition number of the elliptic function.
pub const ELLIPTIC_CONDITION: f64 = 1e6;

/// `10^(6 (i-1)/(n-1))` for `i = 1..=n`; a single weight of 1 when `n == 1`.
pub fn elliptic_weights(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| ELLIPTIC_CONDITION.powf(i as f64 / denom))
        .collect()
}

/// Neumaier-compensated sum. Keeps the rounding error of a large total
/// near one ulp, so changing one term moves the total by that term's change.
pub fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}

pub fn elliptic(z: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(z.len(), weights.len());
    compensated_sum(z.iter().zip(weights).map(|(v, w)| w * v * v))
}

pub fn sphere(z: &[f64]) -> f64 {
    compensated_sum(z.iter().map(|v| v * v))
}

pub fn rastrigin(z: &[f64]) -> f64 {
    compensated_sum(z.iter().map(|v| v * v + 10.0 * (1.0 - (2.0 * PI * v).cos())))
}

/// Ackley with a = 20, b = 0.2, c = 2π. Written as two nonnegative terms so
/// the optimum evaluates to exactly zero.
pub fn ackley(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let n = z.len() as f64;
    let sq = z.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    20.0 * (1.0 - (-0.2 * sq.sqrt()).exp()) + (E - cs.exp())
}

pub fn schwefel12(z: &[f64]) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for v in z {
        prefix += v;
        total += prefix * prefix;
    }
    total
}

pub fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| {
            let a = w[0] * w[0] - w[1];
            let b = w[0] - 1.0;
            100.0 * a * a + b * b
        })
        .sum()
}
