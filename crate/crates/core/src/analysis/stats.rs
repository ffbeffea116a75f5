use rand::seq::SliceRandom;
use rand::Rng;

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman's ρ as the Pearson correlation of average ranks. `None` when
/// either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    if x.len() < 2 {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// One-sided permutation p-value for ρ ≥ observed, `(1 + hits) / (1 + n)`.
pub fn spearman_permutation_p<R: Rng + ?Sized>(x: &[f64], y: &[f64], permutations: usize, rng: &mut R) -> Option<f64> {
    let rx = average_ranks(x);
    let mut ry = average_ranks(y);
    let observed = pearson(&rx, &ry)?;
    let mut hits = 0usize;
    for _ in 0..permutations {
        ry.shuffle(rng);
        if pearson(&rx, &ry).unwrap_or(0.0) >= observed - 1e-12 {
            hits += 1;
        }
    }
    Some((1 + hits) as f64 / (1 + permutations) as f64)
}

/// One-sided permutation p-value for accuracy of `predictions` against
/// `labels`: how often shuffled labels score at least as well.
pub fn accuracy_permutation_p<R: Rng + ?Sized>(labels: &[bool], predictions: &[bool], permutations: usize, rng: &mut R) -> f64 {
    let score = |l: &[bool]| l.iter().zip(predictions).filter(|(a, b)| a == b).count();
    let observed = score(labels);
    let mut shuffled = labels.to_vec();
    let mut hits = 0usize;
    for _ in 0..permutations {
        shuffled.shuffle(rng);
        if score(&shuffled) >= observed {
            hits += 1;
        }
    }
    (1 + hits) as f64 / (1 + permutations) as f64
}

/// Half-width of the normal-approximation binomial band around p = 0.5 for
/// `n` trials at z (2.576 for 99%).
pub fn chance_band_half_width(n: u64, z: f64) -> f64 {
    z * (0.25 / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SeedSpec;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn monotone_gives_one() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v + 3.0).collect();
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = y.iter().rev().copied().collect();
        assert!((spearman(&x, &rev).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_side_is_degenerate() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]), None);
    }

    #[test]
    fn matches_textbook_example() {
        // classic ten-pair example with no ties: d² sum 194, ρ = 1 - 6·194/(10·99)
        let x = [86.0, 97.0, 99.0, 100.0, 101.0, 103.0, 106.0, 110.0, 112.0, 113.0];
        let y = [0.0, 20.0, 28.0, 27.0, 50.0, 29.0, 7.0, 17.0, 6.0, 12.0];
        let expected = 1.0 - 6.0 * 194.0 / (10.0 * 99.0);
        assert!((spearman(&x, &y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn permutation_p_values() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let mut rng = SeedSpec::new(1, "perm").stream(0);
        let p = spearman_permutation_p(&x, &x, 999, &mut rng).unwrap();
        assert!((p - 0.001).abs() < 1e-12);
        let labels: Vec<bool> = (0..200).map(|i| i % 2 == 0).collect();
        assert!(accuracy_permutation_p(&labels, &labels, 999, &mut rng) < 0.01);
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        assert!(accuracy_permutation_p(&labels, &flipped, 99, &mut rng) > 0.9);
    }
}
