use super::samples::SampleSet;
use crate::shade::Orientation;

/// Fitness distance correlation of a sample set: the Pearson correlation
/// between sample values and Euclidean distances to the best sample.
///
/// `orientation` says which end of the values is best. A degenerate set
/// (fewer than two samples, or zero variance in values or distances)
/// yields `1.0`, which steers degree selection to the low-order model.
pub fn fdc(samples: &SampleSet, orientation: Orientation) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 1.0;
    }
    let values = samples.values();
    let best = (1..n).fold(0, |b, i| {
        if orientation.better(values[i], values[b]) {
            i
        } else {
            b
        }
    });
    let anchor = samples.point(best);
    let dist: Vec<f64> = (0..n)
        .map(|i| {
            samples
                .point(i)
                .iter()
                .zip(anchor)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    pearson(values, &dist).unwrap_or(1.0)
}

/// Pearson correlation, `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlations() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let s = SampleSet::from_1d(&xs, &xs);
        assert!((fdc(&s, Orientation::Minimize) - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| 10.0 - x).collect();
        // best is the max value at x = 0
        let s = SampleSet::from_1d(&xs, &neg);
        assert!((fdc(&s, Orientation::Maximize) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn five_point_example() {
        let s = SampleSet::from_1d(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 2.0, 1.0, 4.0, 3.0]);
        assert!((fdc(&s, Orientation::Minimize) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn flat_is_degenerate() {
        let s = SampleSet::from_1d(&[0.0, 1.0, 2.0], &[5.0, 5.0, 5.0]);
        assert_eq!(fdc(&s, Orientation::Maximize), 1.0);
    }
}
