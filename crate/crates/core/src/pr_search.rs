//! Two-layer polynomial-regression search for one separable variable.
//!
//! Layer one samples the whole interval, picks the model degree from the
//! fitness distance correlation of the samples, fits one global polynomial
//! and shrinks the interval around its maximizer. Layer two resamples the
//! shrunken interval, fits a quintic per subregion and real-evaluates only
//! the best predicted subregion optimum.
//!
//! All values are fitness improvements `e(x) = f(x^c) - f(x^c | x)` against
//! a fixed context vector, so larger is better.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cc::{ContextVector, EvalBudget};
use crate::error::{CcError, Result};
use crate::problem::{Bounds, Problem};
use crate::shade::Orientation;
use crate::surrogates::{fdc, fit_pr_xy, maximize_poly, SampleSet};

/// Samples needed to fit a quintic.
pub const MIN_SUBREGION_SAMPLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Evenly spaced, both endpoints included.
    Grid,
    /// Seeded uniform random draws.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrSearchConfig {
    /// Samples per layer.
    pub d_s: usize,
    /// `|FDC|` above this selects the quadratic model.
    pub epsilon: f64,
    /// Shrink divisor after a quadratic fit.
    pub r2: f64,
    /// Shrink divisor after a quintic fit.
    pub r5: f64,
    pub sampling: Sampling,
}

impl Default for PrSearchConfig {
    fn default() -> Self {
        Self {
            d_s: 100,
            epsilon: 0.8,
            r2: 15.0,
            r5: 10.0,
            sampling: Sampling::Grid,
        }
    }
}

impl PrSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_s < 12 {
            return Err(CcError::InvalidConfig(format!("d_s must be >= 12, got {}", self.d_s)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CcError::InvalidConfig(format!(
                "epsilon must be in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.r2 > 1.0 && self.r5 > 1.0) {
            return Err(CcError::InvalidConfig(format!(
                "shrink divisors must exceed 1, got r2={} r5={}",
                self.r2, self.r5
            )));
        }
        Ok(())
    }

    /// Worst-case real evaluations for one variable.
    pub fn max_fes(&self) -> u64 {
        2 * self.d_s as u64 + 1
    }
}

/// The shrunken interval around `center`:
/// `[lb/r + center, ub/r + center]`, then clipped to `[lb, ub]`.
pub fn shrink_region(bounds: Bounds, r: f64, center: f64) -> (f64, f64) {
    let mut lo = bounds.lower / r + center;
    let mut hi = bounds.upper / r + center;
    if lo < bounds.lower {
        lo = bounds.lower;
    }
    if hi > bounds.upper {
        hi = bounds.upper;
    }
    (lo, hi)
}

/// `n` evenly spaced points on `[lo, hi]` including both ends.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Everything one 1-D search did, for the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrTrace {
    pub var_index: usize,
    pub layer1_x: Vec<f64>,
    pub layer1_e: Vec<f64>,
    pub fdc: f64,
    pub degree: usize,
    pub layer1_argmax: f64,
    pub region: (f64, f64),
    /// `false` when the shrunken interval does not contain the layer-one
    /// maximizer (possible for bounds not symmetric about zero).
    pub argmax_in_region: bool,
    pub reused: usize,
    pub top_ups: usize,
    pub subregions: usize,
    pub winner: Option<f64>,
    pub winner_predicted: Option<f64>,
    pub winner_improvement: Option<f64>,
    pub winner_accepted: bool,
    pub fes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrOutcome {
    pub x: f64,
    pub improvement: f64,
    /// The budget ran out before the search finished.
    pub truncated: bool,
    pub trace: PrTrace,
}

struct Incumbent {
    x: f64,
    e: f64,
}

impl Incumbent {
    fn offer(&mut self, x: f64, e: f64) -> bool {
        if e > self.e {
            self.x = x;
            self.e = e;
            true
        } else {
            false
        }
    }
}

/// Solve the 1-D subproblem of variable `var_index` against `context`.
///
/// Real evaluations: `d_s` in layer one, `d_s - |reused|` top-ups and one for
/// the layer-two winner. On budget exhaustion the best sample so far is
/// returned with `truncated = true`.
pub fn solve_1d(
    problem: &Problem,
    context: &ContextVector,
    var_index: usize,
    config: &PrSearchConfig,
    budget: &mut EvalBudget,
) -> Result<PrOutcome> {
    config.validate()?;
    let bounds = problem.bounds()[var_index];
    let start_fes = budget.used();
    let idx = [var_index];
    let mut scratch = Vec::with_capacity(problem.dimension());
    let mut rng = match config.sampling {
        Sampling::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed ^ var_index as u64)),
        Sampling::Grid => None,
    };
    let mut draw = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        match rng.as_mut() {
            None => grid(lo, hi, n),
            Some(r) => (0..n).map(|_| lo + (hi - lo) * r.random::<f64>()).collect(),
        }
    };

    let mut trace = PrTrace {
        var_index,
        layer1_x: Vec::new(),
        layer1_e: Vec::new(),
        fdc: f64::NAN,
        degree: 0,
        layer1_argmax: f64::NAN,
        region: (bounds.lower, bounds.upper),
        argmax_in_region: true,
        reused: 0,
        top_ups: 0,
        subregions: 0,
        winner: None,
        winner_predicted: None,
        winner_improvement: None,
        winner_accepted: false,
        fes: 0,
    };
    let mut inc = Incumbent {
        x: context.values[var_index],
        e: f64::NEG_INFINITY,
    };

    macro_rules! finish {
        ($truncated:expr) => {{
            trace.fes = budget.used() - start_fes;
            if inc.e == f64::NEG_INFINITY {
                // Nothing evaluated: keep the context value, no gain.
                inc.e = 0.0;
            }
            return Ok(PrOutcome {
                x: inc.x,
                improvement: inc.e,
                truncated: $truncated,
                trace,
            });
        }};
    }
    macro_rules! improvement_or_finish {
        ($x:expr) => {
            match context.improvement(problem, budget, &idx, &[$x], &mut scratch) {
                Ok(e) => e,
                Err(CcError::BudgetExhausted { .. }) => finish!(true),
                Err(other) => return Err(other),
            }
        };
    }

    // Layer one: global sample, degree choice, global fit.
    let xs1 = draw(bounds.lower, bounds.upper, config.d_s);
    let mut es1 = Vec::with_capacity(xs1.len());
    for &x in &xs1 {
        let e = improvement_or_finish!(x);
        inc.offer(x, e);
        es1.push(e);
        trace.layer1_x.push(x);
        trace.layer1_e.push(e);
    }
    let layer1 = SampleSet::from_1d(&xs1, &es1);
    let corr = fdc(&layer1, Orientation::Maximize);
    let (degree, r) = if corr.abs() > config.epsilon {
        (2, config.r2)
    } else {
        (5, config.r5)
    };
    trace.fdc = corr;
    trace.degree = degree;
    let global = fit_pr_xy(&xs1, &es1, degree)?;
    let x_s = maximize_poly(&global, bounds.lower, bounds.upper);
    trace.layer1_argmax = x_s;

    let (lo, hi) = shrink_region(bounds, r, x_s);
    trace.region = (lo, hi);
    trace.argmax_in_region = lo <= x_s && x_s <= hi;
    if !trace.argmax_in_region {
        log::debug!(
            "variable {var_index}: layer-one maximizer {x_s} outside shrunken region [{lo}, {hi}]"
        );
    }
    if !(hi > lo) {
        log::debug!("variable {var_index}: empty shrunken region, layer two skipped");
        finish!(false);
    }

    // Layer two: reuse in-region samples, top up, fit per subregion.
    let mut xs2: Vec<f64> = Vec::with_capacity(config.d_s);
    let mut es2: Vec<f64> = Vec::with_capacity(config.d_s);
    for (&x, &e) in xs1.iter().zip(&es1) {
        if x >= lo && x <= hi {
            xs2.push(x);
            es2.push(e);
        }
    }
    trace.reused = xs2.len();
    let need = config.d_s.saturating_sub(xs2.len());
    for x in draw(lo, hi, need) {
        let e = improvement_or_finish!(x);
        inc.offer(x, e);
        xs2.push(x);
        es2.push(e);
        trace.top_ups += 1;
    }

    let k = config.d_s / MIN_SUBREGION_SAMPLES;
    trace.subregions = k;
    let width = (hi - lo) / k as f64;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &x) in xs2.iter().enumerate() {
        let b = (((x - lo) / width).floor() as isize).clamp(0, k as isize - 1) as usize;
        buckets[b].push(i);
    }
    let distinct = |ids: &[usize]| {
        let mut v: Vec<f64> = ids.iter().map(|&i| xs2[i]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    };
    let all: Vec<usize> = (0..xs2.len()).collect();
    if distinct(&all) < MIN_SUBREGION_SAMPLES {
        log::debug!("variable {var_index}: fewer than 6 distinct layer-two samples");
        finish!(false);
    }

    let mut winner: Option<(f64, f64)> = None;
    for i in 0..k {
        // Grow the window one neighbour at a time, left first.
        let (mut a, mut b) = (i, i);
        let mut ids: Vec<usize> = buckets[i].clone();
        while distinct(&ids) < MIN_SUBREGION_SAMPLES {
            if a > 0 {
                a -= 1;
                ids.extend_from_slice(&buckets[a]);
                if distinct(&ids) >= MIN_SUBREGION_SAMPLES {
                    break;
                }
            }
            if b + 1 < k {
                b += 1;
                ids.extend_from_slice(&buckets[b]);
            }
        }
        let sx: Vec<f64> = ids.iter().map(|&j| xs2[j]).collect();
        let sy: Vec<f64> = ids.iter().map(|&j| es2[j]).collect();
        let model = fit_pr_xy(&sx, &sy, 5)?;
        let sub_lo = lo + width * i as f64;
        let sub_hi = if i + 1 == k { hi } else { lo + width * (i + 1) as f64 };
        let xi = maximize_poly(&model, sub_lo, sub_hi);
        let pred = model.predict(xi);
        if winner.is_none_or(|(_, best)| pred > best) {
            winner = Some((xi, pred));
        }
    }

    let (wx, wpred) = winner.expect("at least two subregions");
    trace.winner = Some(wx);
    trace.winner_predicted = Some(wpred);
    let we = improvement_or_finish!(wx);
    trace.winner_improvement = Some(we);
    trace.winner_accepted = inc.offer(wx, we);
    finish!(false);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_examples() {
        let b = Bounds::new(-10.0, 10.0);
        assert_eq!(shrink_region(b, 10.0, 0.0), (-1.0, 1.0));
        assert_eq!(shrink_region(b, 10.0, 9.5), (8.5, 10.0));
        assert_eq!(shrink_region(b, 10.0, -9.5), (-10.0, -8.5));
        assert_eq!(shrink_region(b, 15.0, 3.0), (-10.0 / 15.0 + 3.0, 10.0 / 15.0 + 3.0));
    }

    #[test]
    fn grid_has_endpoints() {
        let g = grid(-5.0, 5.0, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], -5.0);
        assert_eq!(g[10], 5.0);
        assert!((g[5]).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(PrSearchConfig::default().validate().is_ok());
        assert!(PrSearchConfig { d_s: 11, ..Default::default() }.validate().is_err());
        assert!(PrSearchConfig { epsilon: 1.0, ..Default::default() }.validate().is_err());
        assert!(PrSearchConfig { r2: 1.0, ..Default::default() }.validate().is_err());
    }
}
