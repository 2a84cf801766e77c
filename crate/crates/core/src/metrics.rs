//! Prediction scores: mean-squared error and Pearson correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Score of one prediction against one observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub mse: f64,
    /// `None` when either series has zero variance.
    pub r: Option<f64>,
    pub n: usize,
}

impl Score {
    pub fn compute(predicted: &[f64], observed: &[f64]) -> Result<Self> {
        let mse = mse(predicted, observed)?;
        let r = match pearson_r(predicted, observed) {
            Ok(r) => Some(r),
            Err(Error::DegenerateVariance) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { mse, r, n: observed.len() })
    }
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Argument("mse of empty sequences".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// Sample Pearson correlation. Errors with [`Error::DegenerateVariance`] on constant input.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::Argument("pearson_r needs at least two samples".into()));
    }
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
        return Err(Error::DegenerateVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd, n })
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 5.0);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn pearson_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let affine: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert_abs_diff_eq!(pearson_r(&a, &affine).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson_r(&a, &neg).unwrap(), -1.0, epsilon = 1e-15);
        // cov = (−1.5·−1.5 + −.5·.5 + .5·−.5 + 1.5·1.5) = 4, var = 5 each → 0.8
        assert_abs_diff_eq!(pearson_r(&a, &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn pearson_constant_input_is_an_error_not_zero() {
        assert!(matches!(pearson_r(&[2.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]), Err(Error::DegenerateVariance)));
        let s = Score::compute(&[0.0; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.r, None);
        assert_eq!(s.mse, 7.5);
    }

    #[test]
    fn summary_uses_sample_sd() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.mean, 2.5);
        assert_abs_diff_eq!(s.sd, (5.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_eq!(Summary::of(&[7.0]).unwrap().sd, 0.0);
        assert!(Summary::of(&[]).is_none());
    }
}
