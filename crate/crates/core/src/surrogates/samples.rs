use serde::{Deserialize, Serialize};

/// Real-evaluated sub-solutions with their values and insertion stamps.
///
/// Points are stored flat, `dim` coordinates each. Ages are strictly
/// increasing in insertion order and never reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    dim: usize,
    points: Vec<f64>,
    values: Vec<f64>,
    ages: Vec<u64>,
    next_age: u64,
}

impl SampleSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "sample dimension must be positive");
        Self {
            dim,
            points: Vec::new(),
            values: Vec::new(),
            ages: Vec::new(),
            next_age: 0,
        }
    }

    /// 1-D samples from parallel abscissa/value slices.
    pub fn from_1d(xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        let mut s = Self::new(1);
        for (&x, &y) in xs.iter().zip(ys) {
            s.push(&[x], y);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ages(&self) -> &[u64] {
        &self.ages
    }

    /// First coordinate of every point; meaningful for 1-D sets.
    pub fn abscissae(&self) -> Vec<f64> {
        self.points.iter().step_by(self.dim).copied().collect()
    }

    pub fn push(&mut self, point: &[f64], value: f64) -> u64 {
        assert_eq!(point.len(), self.dim);
        let age = self.next_age;
        self.next_age += 1;
        self.points.extend_from_slice(point);
        self.values.push(value);
        self.ages.push(age);
        age
    }

    /// Add `delta` to every stored value.
    pub fn shift_values(&mut self, delta: f64) {
        for v in &mut self.values {
            *v += delta;
        }
    }

    /// Indices of the `q` entries with the smallest ages, oldest first.
    pub fn oldest(&self, q: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| self.ages[i]);
        idx.truncate(q);
        idx
    }

    /// Overwrite the `entries.len()` oldest samples with `entries`, which
    /// receive fresh ages in the given order. Returns the overwritten slots.
    pub fn replace_oldest(&mut self, entries: &[(Vec<f64>, f64)]) -> Vec<usize> {
        assert!(entries.len() <= self.len(), "cannot replace more samples than stored");
        let slots = self.oldest(entries.len());
        for (&slot, (p, v)) in slots.iter().zip(entries) {
            assert_eq!(p.len(), self.dim);
            self.points[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(p);
            self.values[slot] = *v;
            self.ages[slot] = self.next_age;
            self.next_age += 1;
        }
        slots
    }

    /// Copy with coincident points (Euclidean distance <= `tol`) merged;
    /// the most recent value wins.
    pub fn deduplicated(&self, tol: f64) -> SampleSet {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.ages[i]));
        let tol2 = tol * tol;
        let mut kept: Vec<usize> = Vec::with_capacity(self.len());
        for i in order {
            let p = self.point(i);
            let dup = kept.iter().any(|&k| {
                let q = self.point(k);
                // Cheap rejection on the first coordinate.
                q.first().zip(p.first()).is_none_or(|(a, b)| (a - b).abs() <= tol)
                    && q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= tol2
            });
            if !dup {
                kept.push(i);
            }
        }
        kept.sort_by_key(|&i| self.ages[i]);
        let mut out = SampleSet::new(self.dim);
        for i in kept {
            out.points.extend_from_slice(self.point(i));
            out.values.push(self.values[i]);
            out.ages.push(self.ages[i]);
        }
        out.next_age = self.next_age;
        out
    }
}
