//! Sample summaries with normal-approximation confidence intervals.

use serde::{Deserialize, Serialize};

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// Half-width of the 95% confidence interval of the mean.
    pub half_width: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Summary {
                count,
                mean: f64::NAN,
                std_dev: f64::NAN,
                half_width: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let std_dev = if count > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            count,
            mean,
            std_dev,
            half_width: Z95 * std_dev / (count as f64).sqrt(),
        }
    }

    pub fn of_u64(xs: &[u64]) -> Self {
        Self::of(&xs.iter().map(|&x| x as f64).collect::<Vec<_>>())
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    /// Half-width relative to the mean.
    pub fn relative_half_width(&self) -> f64 {
        self.half_width / self.mean
    }

    /// Coefficient of variation.
    pub fn cv(&self) -> f64 {
        self.std_dev / self.mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_known_sample() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.std_dev - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert!((s.half_width - Z95 * s.std_dev / 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single() {
        assert!(Summary::of(&[]).mean.is_nan());
        let s = Summary::of(&[3.0]);
        assert_eq!((s.mean, s.half_width), (3.0, 0.0));
    }
}
