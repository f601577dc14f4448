//! Small statistical toolbox: normal CDF, two-sample Kolmogorov-Smirnov
//! test, medians and standard-error helpers used by the experiment gates.

/// Standard normal cumulative distribution function.
pub fn normal_cdf(y: f64) -> f64 {
    0.5 * libm::erfc(-y / std::f64::consts::SQRT_2)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the sample mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Median (average of the two central order statistics for even length).
pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Quantile by linear interpolation of order statistics, `q` in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quantile input"));
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        let w = pos - lo as f64;
        v[lo] * (1.0 - w) + v[hi] * w
    }
}

/// Binomial standard error for a proportion `p` estimated from `n` draws.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Result of a two-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy)]
pub struct KsTest {
    pub statistic: f64,
    pub critical_value: f64,
    pub level: f64,
    pub pass: bool,
}

/// Two-sample KS test at significance `level`, using the asymptotic
/// critical value `c(alpha) * sqrt((n + m) / (n m))` with
/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64], level: f64) -> KsTest {
    let statistic = ks_statistic(xs, ys);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    let critical_value = c * ((n + m) / (n * m)).sqrt();
    KsTest {
        statistic,
        critical_value,
        level,
        pass: statistic <= critical_value,
    }
}

/// Max absolute difference between the two empirical CDFs, by a merge walk
/// over both sorted samples (ties advance both sides together).
pub fn ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let mut x: Vec<f64> = xs.to_vec();
    let mut y: Vec<f64> = ys.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS input"));
    y.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS input"));
    let (x_inc, y_inc) = (1.0 / x.len() as f64, 1.0 / y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut diff = 0.0f64;
    let mut max_diff = 0.0f64;
    while i < x.len() || j < y.len() {
        let take_x = match (x.get(i), y.get(j)) {
            (Some(a), Some(b)) => a <= b,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_x {
            let v = x[i];
            while i < x.len() && x[i] == v {
                diff += x_inc;
                i += 1;
            }
            while j < y.len() && y[j] == v {
                diff -= y_inc;
                j += 1;
            }
        } else {
            let v = y[j];
            while j < y.len() && y[j] == v {
                diff -= y_inc;
                j += 1;
            }
        }
        max_diff = max_diff.max(diff.abs());
    }
    max_diff
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_matches_table_values() {
        // Standard normal table, 4+ decimals.
        let cases = [
            (0.0, 0.5),
            (1.0, 0.8413447460685429),
            (-1.0, 0.15865525393145707),
            (2.0, 0.9772498680518208),
            (-2.0, 0.022750131948179195),
        ];
        for (y, phi) in cases {
            assert!((normal_cdf(y) - phi).abs() < 1e-12, "Phi({y})");
        }
    }

    #[test]
    fn ks_statistic_on_disjoint_and_identical_samples() {
        let a = [1.0, 2.0, 3.0];
        let b = [10.0, 11.0, 12.0];
        assert!((ks_statistic(&a, &b) - 1.0).abs() < 1e-15);
        assert_eq!(ks_statistic(&a, &a), 0.0);
    }

    #[test]
    fn ks_handles_ties_across_samples() {
        let a = [1.0, 1.0, 2.0];
        let b = [1.0, 2.0, 2.0];
        // After value 1: |2/3 - 1/3| = 1/3; after 2: 0.
        assert!((ks_statistic(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ks_test_accepts_identical_distributions() {
        let xs: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.7133).sin()).collect();
        let ys: Vec<f64> = (0..2000).map(|i| ((i + 9000) as f64 * 0.7133).sin()).collect();
        let t = ks_two_sample(&xs, &ys, 0.01);
        assert!(t.pass, "D = {} > {}", t.statistic, t.critical_value);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&xs), 2.5);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
    }
}
