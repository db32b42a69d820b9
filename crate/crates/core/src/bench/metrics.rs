//! Error normalization and the paired-median advantage statistic.

use serde::{Deserialize, Serialize};

use super::BenchError;

/// `|found − fstar| / |fworst − fstar|`.
pub fn relative_error(found: f64, fstar: f64, fworst: f64) -> Result<f64, BenchError> {
    let range = (fworst - fstar).abs();
    if range == 0.0 || !range.is_finite() {
        return Err(BenchError::DegenerateRange { fstar, fworst });
    }
    Ok((found - fstar).abs() / range)
}

/// Linear-interpolation quantile of sorted data (`q ∈ [0, 1]`); the median
/// of an even-length list is the mean of the two central values.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty list");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(values: &[f64]) -> f64 {
    quantile_sorted(&sorted(values), 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `median(sa) − median(fv)`; positive when FV errors are smaller.
pub fn advantage(sa_errors: &[f64], fv_errors: &[f64]) -> f64 {
    median(sa_errors) - median(fv_errors)
}

/// Five-number summary for violin/box plots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        let s = sorted(values);
        Self {
            min: s[0],
            q1: quantile_sorted(&s, 0.25),
            median: quantile_sorted(&s, 0.5),
            q3: quantile_sorted(&s, 0.75),
            max: s[s.len() - 1],
        }
    }
}

/// Sample mean with the half-width of its normal-approximation 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let m = mean(values);
        let half_width = if n < 2 {
            f64::INFINITY
        } else {
            let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        };
        Some(Self { mean: m, half_width, n })
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn covers(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(-20.0, -20.0, 20.0).unwrap(), 0.0);
        assert_eq!(relative_error(20.0, -20.0, 20.0).unwrap(), 1.0);
        assert_eq!(relative_error(0.0, -20.0, 20.0).unwrap(), 0.5);
        assert_eq!(relative_error(3.0, 6.0, 0.0).unwrap(), 0.5);
        assert!(relative_error(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(advantage(&[0.3, 0.1, 0.2], &[0.3, 0.1, 0.2]), 0.0);
        assert!((advantage(&[0.6, 0.8], &[0.2, 0.4]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn spread_of_small_list() {
        let s = Spread::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (1.0, 2.0, 3.0, 4.0, 5.0));
    }

    #[test]
    fn slope_of_line() {
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn advantage_is_antisymmetric(
            a in prop::collection::vec(0.0f64..1.0, 1..20),
            b in prop::collection::vec(0.0f64..1.0, 1..20),
        ) {
            prop_assert_eq!(advantage(&a, &b), -advantage(&b, &a));
        }
    }
}
