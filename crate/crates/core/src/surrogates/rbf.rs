//! Cubic radial basis function interpolant with a linear polynomial tail.
//!
//! For centers `t_1..t_d` in `R^D` the model is
//! `s(x) = Σ ω_i ||x - t_i||³ + βᵀx + α`, with coefficients from the
//! augmented system
//!
//! ```text
//! [ Φ   P ] [ω]   [y]
//! [ Pᵀ  0 ] [c] = [0]       Φ_ij = ||t_i - t_j||³,  P_i = [t_iᵀ, 1]
//! ```
//!
//! The lower block enforces `Σ ω_i = 0` and `Σ ω_i t_i = 0`, which makes the
//! system uniquely solvable whenever the centers are not all on a hyperplane.

use serde::{Deserialize, Serialize};

use super::linalg::{LuFactors, PIVOT_GROWTH_WARN};
use super::samples::SampleSet;
use crate::error::{CcError, Result};

/// Centers closer than this are merged before fitting.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RbfDiagnostics {
    pub pivot_growth: f64,
    pub ill_conditioned: bool,
    pub dropped_duplicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfModel {
    pub dim: usize,
    /// Flat, `dim` coordinates per center.
    pub centers: Vec<f64>,
    pub weights: Vec<f64>,
    pub tail_linear: Vec<f64>,
    pub tail_const: f64,
    pub diagnostics: RbfDiagnostics,
}

#[inline]
fn cubic(r2: f64) -> f64 {
    r2 * r2.sqrt()
}

/// Squared distance with four independent accumulators so the loop
/// vectorizes.
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl RbfModel {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let kernel: f64 = self
            .centers
            .chunks_exact(self.dim)
            .zip(&self.weights)
            .map(|(c, w)| w * cubic(dist2(x, c)))
            .sum();
        let tail: f64 = self.tail_linear.iter().zip(x).map(|(b, v)| b * v).sum();
        kernel + tail + self.tail_const
    }
}

/// Fit the interpolant to `samples` (deduplicated first).
pub fn fit_rbf(samples: &SampleSet) -> Result<RbfModel> {
    let dim = samples.dim();
    let set = samples.deduplicated(DEDUP_TOL);
    let d = set.len();
    if d < dim + 2 {
        return Err(CcError::TooFewPoints {
            degree: 1,
            needed: dim + 2,
            have: d,
        });
    }

    // Translate and uniformly scale the centers into a unit box. The cubic
    // interpolant with a linear tail is equivariant under this map, so the
    // coefficients are mapped back exactly afterwards.
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for i in 0..d {
        for (k, &v) in set.point(i).iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    let shift: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let scale = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| 0.5 * (b - a))
        .fold(0.0f64, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let u: Vec<f64> = (0..d)
        .flat_map(|i| {
            set.point(i)
                .iter()
                .zip(&shift)
                .map(|(v, s)| (v - s) / scale)
                .collect::<Vec<_>>()
        })
        .collect();

    let n = d + dim + 1;
    let mut a = vec![0.0; n * n];
    for i in 0..d {
        let ui = &u[i * dim..(i + 1) * dim];
        for j in i + 1..d {
            let v = cubic(dist2(ui, &u[j * dim..(j + 1) * dim]));
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
        for k in 0..dim {
            a[i * n + d + k] = ui[k];
            a[(d + k) * n + i] = ui[k];
        }
        a[i * n + d + dim] = 1.0;
        a[(d + dim) * n + i] = 1.0;
    }
    let lu = LuFactors::factor(a, n).map_err(|e| match e {
        CcError::Singular(msg) => CcError::Singular(format!(
            "RBF system with {d} centers in R^{dim}: {msg}"
        )),
        other => other,
    })?;
    let ill = lu.pivot_growth > PIVOT_GROWTH_WARN;
    if ill {
        log::warn!(
            "RBF system with {d} centers has pivot growth {:.3e}",
            lu.pivot_growth
        );
    }
    let mut rhs = set.values().to_vec();
    rhs.resize(n, 0.0);
    let sol = lu.solve(&rhs);

    let s3 = scale * scale * scale;
    let weights: Vec<f64> = sol[..d].iter().map(|w| w / s3).collect();
    let tail_linear: Vec<f64> = sol[d..d + dim].iter().map(|b| b / scale).collect();
    let tail_const = sol[d + dim] - tail_linear.iter().zip(&shift).map(|(b, c)| b * c).sum::<f64>();

    Ok(RbfModel {
        dim,
        centers: set.points_flat().to_vec(),
        weights,
        tail_linear,
        tail_const,
        diagnostics: RbfDiagnostics {
            pivot_growth: lu.pivot_growth,
            ill_conditioned: ill,
            dropped_duplicates: samples.len() - d,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_samples() -> SampleSet {
        let mut s = SampleSet::new(2);
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 0.2), (0.3, 0.9)] {
            s.push(&[x, y], x * x + y * y);
        }
        s
    }

    #[test]
    fn zero_data_zero_model() {
        let mut s = square_samples();
        s.shift_values(0.0);
        let mut z = SampleSet::new(2);
        for i in 0..s.len() {
            z.push(s.point(i), 0.0);
        }
        let m = fit_rbf(&z).unwrap();
        assert!(m.predict(&[0.7, -0.4]).abs() < 1e-8);
    }

    #[test]
    fn interpolates_and_satisfies_side_conditions() {
        let s = square_samples();
        let m = fit_rbf(&s).unwrap();
        for i in 0..s.len() {
            assert!((m.predict(s.point(i)) - s.value(i)).abs() <= 1e-6 * s.value(i).abs().max(1.0));
        }
        assert!(m.weights.iter().sum::<f64>().abs() < 1e-8);
        for k in 0..2 {
            let moment: f64 = (0..m.len()).map(|i| m.weights[i] * m.center(i)[k]).sum();
            assert!(moment.abs() < 1e-8);
        }
    }

    #[test]
    fn collinear_centers_are_singular() {
        let mut s = SampleSet::new(2);
        for i in 0..6 {
            let t = i as f64;
            s.push(&[t, 2.0 * t], t);
        }
        assert!(matches!(fit_rbf(&s), Err(CcError::Singular(_))));
    }

    #[test]
    fn too_few_after_dedup() {
        let mut s = SampleSet::new(2);
        for _ in 0..5 {
            s.push(&[1.0, 1.0], 0.0);
        }
        assert!(matches!(fit_rbf(&s), Err(CcError::TooFewPoints { .. })));
    }
}
