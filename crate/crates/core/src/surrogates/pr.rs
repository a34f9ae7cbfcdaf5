//! Least-squares polynomial regression in one variable and exact bounded
//! maximization of the fitted polynomial.

use serde::{Deserialize, Serialize};

use super::samples::SampleSet;
use crate::error::{CcError, Result};
use crate::problem::Bounds;

/// Polynomial `P(x) = Σ c_k t^(N-k)` with `t = (x - center) / half_width`.
///
/// Coefficients live in the conditioned variable `t`, which maps the fit
/// interval onto `[-1, 1]`; [`PrModel::monomial_coefficients`] gives them in
/// the original variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrModel {
    pub degree: usize,
    /// Descending powers of `t`, `degree + 1` entries.
    pub coefficients: Vec<f64>,
    /// Interval spanned by the fit abscissae.
    pub domain: Bounds,
    pub center: f64,
    pub half_width: f64,
}

impl PrModel {
    fn to_t(&self, x: f64) -> f64 {
        (x - self.center) / self.half_width
    }

    pub fn predict(&self, x: f64) -> f64 {
        horner(&self.coefficients, self.to_t(x))
    }

    /// Coefficients in descending powers of the original variable `x`.
    pub fn monomial_coefficients(&self) -> Vec<f64> {
        // P(x) = Σ_j a_j ((x - c)/h)^j, expanded binomially.
        let n = self.degree;
        let ascending: Vec<f64> = self.coefficients.iter().rev().copied().collect();
        let mut out = vec![0.0; n + 1]; // ascending powers of x
        let c = self.center;
        let h = self.half_width;
        for (j, &a) in ascending.iter().enumerate() {
            let scale = a / h.powi(j as i32);
            // (x - c)^j = Σ_i C(j,i) x^i (-c)^(j-i)
            let mut binom = 1.0;
            for i in 0..=j {
                out[i] += scale * binom * (-c).powi((j - i) as i32);
                binom = binom * (j - i) as f64 / (i + 1) as f64;
            }
        }
        out.reverse();
        out
    }
}

fn horner(desc: &[f64], t: f64) -> f64 {
    desc.iter().fold(0.0, |acc, &c| acc * t + c)
}

fn derivative(desc: &[f64]) -> Vec<f64> {
    let n = desc.len().saturating_sub(1);
    desc.iter()
        .take(n)
        .enumerate()
        .map(|(k, &c)| c * (n - k) as f64)
        .collect()
}

fn distinct_count(xs: &[f64]) -> usize {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Least-squares fit of a degree-`degree` polynomial to 1-D samples.
pub fn fit_pr(samples: &SampleSet, degree: usize) -> Result<PrModel> {
    assert_eq!(samples.dim(), 1, "fit_pr takes 1-D samples");
    fit_pr_xy(&samples.abscissae(), samples.values(), degree)
}

/// [`fit_pr`] on parallel slices.
pub fn fit_pr_xy(xs: &[f64], ys: &[f64], degree: usize) -> Result<PrModel> {
    assert_eq!(xs.len(), ys.len());
    let k = degree + 1;
    let distinct = distinct_count(xs);
    if distinct < k {
        return Err(CcError::TooFewPoints {
            degree,
            needed: k,
            have: distinct,
        });
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let half_width = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };

    // Vandermonde in t, columns in descending powers, column-major.
    let n = xs.len();
    let mut a = vec![0.0; n * k];
    for (i, &x) in xs.iter().enumerate() {
        let t = (x - center) / half_width;
        let mut p = 1.0;
        for col in (0..k).rev() {
            a[col * n + i] = p;
            p *= t;
        }
    }
    let coefficients = householder_lstsq(&mut a, n, k, ys.to_vec())?;
    Ok(PrModel {
        degree,
        coefficients,
        domain: Bounds { lower: lo, upper: hi },
        center,
        half_width,
    })
}

/// Solve min ||A c - b|| for column-major `A` (n x k, n >= k).
fn householder_lstsq(a: &mut [f64], n: usize, k: usize, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let mut diag = vec![0.0; k];
    for j in 0..k {
        let col = &mut a[j * n..(j + 1) * n];
        let norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(CcError::Singular(format!("rank-deficient Vandermonde at column {j}")));
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        col[j] -= alpha;
        let vnorm2 = col[j..].iter().map(|v| v * v).sum::<f64>();
        diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let v: Vec<f64> = col[j..].to_vec();
        for jj in j + 1..k {
            let other = &mut a[jj * n + j..(jj + 1) * n];
            let s = 2.0 * v.iter().zip(other.iter()).map(|(x, y)| x * y).sum::<f64>() / vnorm2;
            for (o, vi) in other.iter_mut().zip(&v) {
                *o -= s * vi;
            }
        }
        let s = 2.0 * v.iter().zip(&b[j..]).map(|(x, y)| x * y).sum::<f64>() / vnorm2;
        for (o, vi) in b[j..].iter_mut().zip(&v) {
            *o -= s * vi;
        }
    }
    let scale = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut c = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = b[j];
        for jj in j + 1..k {
            s -= a[jj * n + j] * c[jj];
        }
        if diag[j].abs() <= scale * 1e-14 {
            return Err(CcError::Singular(format!("rank-deficient Vandermonde at column {j}")));
        }
        c[j] = s / diag[j];
    }
    Ok(c)
}

/// Real roots of the polynomial `desc` (descending powers) inside `[a, b]`,
/// ascending. Roots are isolated between the critical points, found
/// recursively, and refined by bisection to full precision.
pub fn real_roots_in(desc: &[f64], a: f64, b: f64) -> Vec<f64> {
    let start = desc.iter().position(|&c| c != 0.0);
    let Some(start) = start else {
        return Vec::new();
    };
    let p = &desc[start..];
    match p.len() {
        1 => Vec::new(),
        2 => {
            let r = -p[1] / p[0];
            if r >= a && r <= b {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut breaks = vec![a];
            breaks.extend(real_roots_in(&derivative(p), a, b));
            breaks.push(b);
            let mut roots = Vec::new();
            for w in breaks.windows(2) {
                let (l, r) = (w[0], w[1]);
                let (fl, fr) = (horner(p, l), horner(p, r));
                if fl == 0.0 {
                    roots.push(l);
                } else if fr != 0.0 && (fl < 0.0) != (fr < 0.0) {
                    roots.push(bisect(p, l, r, fl));
                }
            }
            if horner(p, b) == 0.0 {
                roots.push(b);
            }
            roots.dedup();
            roots
        }
    }
}

fn bisect(p: &[f64], mut l: f64, mut r: f64, mut fl: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        let fm = horner(p, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fl < 0.0) {
            l = m;
            fl = fm;
        } else {
            r = m;
        }
    }
    0.5 * (l + r)
}

/// Global maximizer of `model` on `[lb, ub]`: the best of both endpoints and
/// every stationary point inside. Ties go to the smaller `x`.
pub fn maximize_poly(model: &PrModel, lb: f64, ub: f64) -> f64 {
    assert!(lb <= ub, "empty interval [{lb}, {ub}]");
    let tl = (lb - model.center) / model.half_width;
    let tu = (ub - model.center) / model.half_width;
    let mut candidates = vec![lb];
    candidates.extend(
        real_roots_in(&derivative(&model.coefficients), tl, tu)
            .into_iter()
            .map(|t| (model.center + model.half_width * t).clamp(lb, ub)),
    );
    candidates.push(ub);
    candidates.sort_by(f64::total_cmp);
    let mut best_x = candidates[0];
    let mut best_v = model.predict(best_x);
    for &x in &candidates[1..] {
        let v = model.predict(x);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    best_x
}
