/// Effect sizes at or above this magnitude count as a win or loss.
pub const EFFECT_THRESHOLD: f64 = 0.2;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Cohen's d of `a` against `b` with the pooled standard deviation.
///
/// `None` when either sample has fewer than two values. A zero pooled
/// deviation gives 0 for equal means and a signed infinity otherwise.
///
/// ```
/// use ccopt::harness::cohens_d;
/// assert_eq!(cohens_d(&[2.0, 4.0, 6.0], &[1.0, 3.0, 5.0]), Some(0.5));
/// assert_eq!(cohens_d(&[0.0, 0.0], &[1.0, 1.0]), Some(f64::NEG_INFINITY));
/// ```
pub fn cohens_d(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (a.len(), b.len());
    if na < 2 || nb < 2 {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let ssa: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let ssb: f64 = b.iter().map(|x| (x - mb) * (x - mb)).sum();
    let pooled = ((ssa + ssb) / (na + nb - 2) as f64).sqrt();
    let diff = ma - mb;
    Some(if pooled == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / pooled
    })
}

/// `+` when the compared variant is worse than the reference (larger final
/// fitness), `-` when it is better, `≈` for negligible effects.
pub fn mark(d: f64) -> &'static str {
    if d.is_nan() || d.abs() < EFFECT_THRESHOLD {
        "≈"
    } else if d > 0.0 {
        "+"
    } else {
        "-"
    }
}

/// Ranks of `scores` (1 = lowest), ties share their average rank.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Friedman mean ranks. `table[f][v]` is variant `v`'s score on function
/// `f`; functions with a missing score are left out with a warning.
///
/// `None` for fewer than two variants or when no function is complete.
pub fn friedman_ranks(table: &[Vec<Option<f64>>]) -> Option<Vec<f64>> {
    let v = table.first()?.len();
    if v < 2 {
        return None;
    }
    let mut sums = vec![0.0; v];
    let mut used = 0usize;
    for (f, row) in table.iter().enumerate() {
        assert_eq!(row.len(), v, "ragged score table");
        let Some(scores) = row.iter().copied().collect::<Option<Vec<f64>>>() else {
            log::warn!("function {f}: missing scores, left out of the ranking");
            continue;
        };
        for (s, r) in sums.iter_mut().zip(average_ranks(&scores)) {
            *s += r;
        }
        used += 1;
    }
    (used > 0).then(|| sums.into_iter().map(|s| s / used as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_examples() {
        assert_eq!(cohens_d(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]), Some(0.0));
        assert_eq!(cohens_d(&[3.0, 3.0], &[3.0, 3.0]), Some(0.0));
        assert_eq!(cohens_d(&[1.0, 1.0], &[0.0, 0.0]), Some(f64::INFINITY));
        assert_eq!(cohens_d(&[1.0], &[0.0, 0.0]), None);
    }

    #[test]
    fn marks() {
        assert_eq!(mark(0.0), "≈");
        assert_eq!(mark(0.19), "≈");
        assert_eq!(mark(-0.2), "-");
        assert_eq!(mark(f64::INFINITY), "+");
    }

    #[test]
    fn ranks_and_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        let always_best: Vec<Vec<Option<f64>>> = (0..13).map(|_| vec![Some(0.0), Some(1.0)]).collect();
        assert_eq!(friedman_ranks(&always_best), Some(vec![1.0, 2.0]));
        let tied: Vec<Vec<Option<f64>>> = (0..13).map(|_| vec![Some(2.0), Some(2.0)]).collect();
        assert_eq!(friedman_ranks(&tied), Some(vec![1.5, 1.5]));
        assert_eq!(friedman_ranks(&[vec![Some(1.0)]]), None);
        let gap = vec![vec![Some(1.0), None], vec![Some(2.0), Some(1.0)]];
        assert_eq!(friedman_ranks(&gap), Some(vec![2.0, 1.0]));
    }
}
