//! Dense LU factorization with partial pivoting.

use crate::error::{CcError, Result};

/// Pivot growth above which a factorization is reported as ill-conditioned.
pub const PIVOT_GROWTH_WARN: f64 = 1e12;

/// Column panel width of the blocked factorization.
pub const PANEL: usize = 32;

/// Row-major `n x n` LU factors, `P A = L U`, unit lower triangle implied.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    /// `max |U| / max |A|`.
    pub pivot_growth: f64,
}

impl LuFactors {
    /// Right-looking LU in column panels of [`PANEL`]. Every entry receives
    /// its updates in the same order as the textbook unblocked loop, so the
    /// factors are bitwise identical to it; the blocking only keeps each
    /// trailing row in cache while a whole panel is applied to it.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return Err(CcError::Singular(format!("matrix max-abs entry is {scale}")));
        }
        let tiny = scale * f64::EPSILON * n as f64;
        let mut perm: Vec<usize> = (0..n).collect();
        for kb in (0..n).step_by(PANEL) {
            let ke = (kb + PANEL).min(n);
            // Panel: pivot and eliminate inside columns kb..ke only.
            for k in kb..ke {
                let mut p = k;
                let mut best = a[k * n + k].abs();
                for i in k + 1..n {
                    let v = a[i * n + k].abs();
                    if v > best {
                        best = v;
                        p = i;
                    }
                }
                if best <= tiny {
                    return Err(CcError::Singular(format!(
                        "pivot {best:.3e} at column {k} below {tiny:.3e}"
                    )));
                }
                if p != k {
                    let (top, bottom) = a.split_at_mut(p * n);
                    top[k * n..(k + 1) * n].swap_with_slice(&mut bottom[..n]);
                    perm.swap(k, p);
                }
                let (top, bottom) = a.split_at_mut((k + 1) * n);
                let row_k = &top[k * n..(k + 1) * n];
                let pivot = row_k[k];
                for row in bottom.chunks_exact_mut(n) {
                    let f = row[k] / pivot;
                    row[k] = f;
                    if f != 0.0 {
                        for (r, u) in row[k + 1..ke].iter_mut().zip(&row_k[k + 1..ke]) {
                            *r -= f * u;
                        }
                    }
                }
            }
            if ke == n {
                break;
            }
            // Rows kb..ke right of the panel become U12, then every trailing
            // row takes all panel updates while it is hot.
            let (head, tail) = a.split_at_mut(ke * n);
            for i in kb + 1..ke {
                let (done, cur) = head.split_at_mut(i * n);
                let row_i = &mut cur[..n];
                for k in kb..i {
                    let f = row_i[k];
                    if f != 0.0 {
                        let row_k = &done[k * n..(k + 1) * n];
                        for (r, u) in row_i[ke..].iter_mut().zip(&row_k[ke..]) {
                            *r -= f * u;
                        }
                    }
                }
            }
            let panel_rows = &head[kb * n..ke * n];
            for row_i in tail.chunks_exact_mut(n) {
                trailing_update(row_i, panel_rows, n, kb, ke);
            }
        }
        let umax = (0..n).fold(0.0f64, |m, i| {
            a[i * n + i..(i + 1) * n].iter().fold(m, |m, v| m.max(v.abs()))
        });
        Ok(Self {
            n,
            lu: a,
            perm,
            pivot_growth: umax / scale,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

/// `row[ke..] -= Σ_k row[k] * panel[k][ke..]` for `k` in `kb..ke`, four
/// panel rows per pass, subtracting in increasing `k` for every entry.
fn trailing_update(row: &mut [f64], panel: &[f64], n: usize, kb: usize, ke: usize) {
    let (lower, rest) = row.split_at_mut(ke);
    let mut k = kb;
    while k + 4 <= ke {
        let f = [lower[k], lower[k + 1], lower[k + 2], lower[k + 3]];
        let base = (k - kb) * n;
        let u0 = &panel[base + ke..base + n];
        let u1 = &panel[base + n + ke..base + 2 * n];
        let u2 = &panel[base + 2 * n + ke..base + 3 * n];
        let u3 = &panel[base + 3 * n + ke..base + 4 * n];
        for ((((r, a), b), c), d) in rest.iter_mut().zip(u0).zip(u1).zip(u2).zip(u3) {
            *r = *r - f[0] * a - f[1] * b - f[2] * c - f[3] * d;
        }
        k += 4;
    }
    while k < ke {
        let f = lower[k];
        let base = (k - kb) * n;
        for (r, u) in rest.iter_mut().zip(&panel[base + ke..base + n]) {
            *r -= f * u;
        }
        k += 1;
    }
}
