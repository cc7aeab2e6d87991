use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Transmission magnitudes of delay lines with different gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLineDataset {
    /// `(gap in wavelengths, |S21| linear)`
    pub runs: Vec<(f64, f64)>,
    /// Material damping used to generate the data, if known. Informational.
    pub damping_input: Option<f64>,
}

impl DelayLineDataset {
    pub fn new(runs: Vec<(f64, f64)>, damping_input: Option<f64>) -> Result<Self> {
        for &(gap, mag) in &runs {
            if !(gap.is_finite() && gap >= 0.0) {
                return Err(Error::Invalid(format!("gap {gap} must be a non-negative number")));
            }
            if !(mag > 0.0 && mag <= 1.0) {
                return Err(Error::Invalid(format!("|S21| = {mag} outside (0, 1]")));
            }
        }
        let first = runs.first().map(|r| r.0);
        if runs.len() < 2 || runs.iter().all(|r| Some(r.0) == first) {
            return Err(Error::Rank("delay-line fit needs at least two distinct gaps".into()));
        }
        Ok(DelayLineDataset { runs, damping_input })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLineFit {
    /// Amplitude decay per radian of propagation phase.
    pub delta: f64,
    /// Fitted zero-gap transmission (fixed transduction loss).
    pub a0: f64,
}

/// Least-squares fit of `|S21| = A0·exp(−δ·2π·gap)`.
pub fn fit_delay_line_loss(dataset: &DelayLineDataset) -> Result<DelayLineFit> {
    let n = dataset.runs.len() as f64;
    let xs: Vec<f64> = dataset.runs.iter().map(|r| 2.0 * PI * r.0).collect();
    let ys: Vec<f64> = dataset.runs.iter().map(|r| r.1.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Rank("all gaps are identical".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    Ok(DelayLineFit {
        delta: 0.0 - slope,
        a0: intercept.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_rounded_example() {
        let d = DelayLineDataset::new(vec![(50.0, 0.5335), (100.0, 0.2846), (200.0, 0.0810)], Some(0.002)).unwrap();
        let fit = fit_delay_line_loss(&d).unwrap();
        assert!((fit.delta - 0.00200).abs() < 5e-6, "{}", fit.delta);
    }

    #[test]
    fn exact_on_model_data() {
        let runs: Vec<(f64, f64)> = [20.0, 60.0, 150.0, 400.0]
            .iter()
            .map(|&g| (g, 0.9 * (-2.0 * PI * 0.0013 * g).exp()))
            .collect();
        let fit = fit_delay_line_loss(&DelayLineDataset::new(runs, None).unwrap()).unwrap();
        assert_relative_eq!(fit.delta, 0.0013, max_relative = 1e-12);
        assert_relative_eq!(fit.a0, 0.9, max_relative = 1e-12);
    }

    #[test]
    fn constant_loss_goes_to_intercept() {
        let base = vec![(50.0, 0.5335), (100.0, 0.2846), (200.0, 0.0810)];
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(g, m)| (g, 0.7 * m)).collect();
        let a = fit_delay_line_loss(&DelayLineDataset::new(base, None).unwrap()).unwrap();
        let b = fit_delay_line_loss(&DelayLineDataset::new(scaled, None).unwrap()).unwrap();
        assert_relative_eq!(a.delta, b.delta, max_relative = 1e-12);
        assert_relative_eq!(b.a0, 0.7 * a.a0, max_relative = 1e-12);
    }

    #[test]
    fn flat_line_has_no_loss() {
        let d = DelayLineDataset::new(vec![(10.0, 0.4), (90.0, 0.4)], None).unwrap();
        assert_eq!(fit_delay_line_loss(&d).unwrap().delta, 0.0);
    }

    #[test]
    fn identical_gaps_are_rank_deficient() {
        assert!(matches!(
            DelayLineDataset::new(vec![(10.0, 0.4), (10.0, 0.3)], None),
            Err(Error::Rank(_))
        ));
        assert!(DelayLineDataset::new(vec![(10.0, 1.4), (20.0, 0.3)], None).is_err());
    }
}
