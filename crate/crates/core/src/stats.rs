//! Deterministic reductions and the normality / independence statistics used
//! by the Monte Carlo batteries.

use statrs::function::erf::erfc;

const LEAF: usize = 32;

/// Sum by a fixed binary tree over leaves of 32 values. The result depends only
/// on the input order, never on thread scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        // fold from +0.0; an empty float `sum()` yields -0.0
        return xs.iter().fold(0.0, |acc, x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance (0 for fewer than two values).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// First four moment summaries of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let m = mean(xs);
    let centered: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let pow = |p: i32| pairwise_sum(&centered.iter().map(|c| c.powi(p)).collect::<Vec<_>>()) / n;
    let m2 = pow(2);
    let m3 = pow(3);
    let m4 = pow(4);
    Moments {
        mean: m,
        variance: variance(xs),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    pairwise_sum(&prods) / (xs.len() as f64 - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (variance(xs) * variance(ys)).sqrt()
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and N(0,1).
pub fn ks_statistic_normal(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = standard_normal_cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn moments_of_symmetric_sample() {
        let m = moments(&[-1.0, 1.0, -1.0, 1.0]);
        assert_eq!(m.mean, 0.0);
        approx::assert_relative_eq!(m.variance, 4.0 / 3.0);
        assert_eq!(m.skewness, 0.0);
        assert_eq!(m.excess_kurtosis, -2.0);
    }

    #[test]
    fn normal_cdf_reference_points() {
        approx::assert_abs_diff_eq!(standard_normal_cdf(0.0), 0.5, epsilon = 1e-15);
        approx::assert_abs_diff_eq!(standard_normal_cdf(1.959963984540054), 0.975, epsilon = 1e-10);
        approx::assert_abs_diff_eq!(standard_normal_cdf(-1.0), 0.15865525393145707, epsilon = 1e-10);
    }

    #[test]
    fn ks_critical_value_at_one_percent() {
        approx::assert_abs_diff_eq!(ks_critical(0.01, 1), 1.6276, epsilon = 1e-4);
    }

    #[test]
    fn ks_of_single_point_at_median() {
        approx::assert_abs_diff_eq!(ks_statistic_normal(&[0.0]), 0.5, epsilon = 1e-15);
    }
}
