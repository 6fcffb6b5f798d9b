use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Confidence level of the slope interval.
pub const RATE_CONFIDENCE: f64 = 0.95;

/// Least-squares fit `log e ≈ intercept + slope · log δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided Student-t interval at [`RATE_CONFIDENCE`].
    pub ci: (f64, f64),
    pub points: usize,
}

pub fn rate_estimate<T: Real>(deltas: &[T], errors: &[T]) -> Result<RateEstimate> {
    if deltas.len() != errors.len() {
        return Err(Error::Shape(format!("{} horizons vs {} errors", deltas.len(), errors.len())));
    }
    if deltas.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: deltas.len(),
        });
    }
    if let Some(e) = errors.iter().find(|e| !(**e > T::zero()) || !e.is_finite()) {
        return Err(Error::NonpositiveError(e.as_f64()));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > T::zero()) || !d.is_finite()) {
        return Err(Error::ParameterRange(format!("horizon {} must be positive", d.as_f64())));
    }
    let x: Vec<f64> = deltas.iter().map(|d| d.as_f64().ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.as_f64().ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::ParameterRange("horizons must not all coincide".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::ParameterRange(e.to_string()))?
        .inverse_cdf(0.5 + RATE_CONFIDENCE / 2.0);
    Ok(RateEstimate {
        slope,
        intercept,
        ci: (slope - t * se, slope + t * se),
        points: deltas.len(),
    })
}
