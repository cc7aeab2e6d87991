//! Figures of merit and model parameters recovered from sweep data.

mod bode_q;
mod delay_line;
mod mbvd_fit;
mod resonance;

pub use bode_q::{bode_q, bode_q_with, BodeQOptions, QCurve};
pub use delay_line::{fit_delay_line_loss, DelayLineDataset, DelayLineFit};
pub use mbvd_fit::{fit_mbvd, fit_mbvd_admittance, FitOptions, FitReport};
pub use resonance::extract_fr_fa;

/// `k²·Qmax`.
pub fn figure_of_merit(k2: f64, qmax: f64) -> f64 {
    k2 * qmax
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fom_examples() {
        assert_relative_eq!(figure_of_merit(0.0867, 3680.0), 319.1, max_relative = 1e-3);
        assert_relative_eq!(figure_of_merit(0.1322, 3651.5), 482.8, max_relative = 1e-3);
        assert_eq!(figure_of_merit(0.0, 3651.5), 0.0);
    }
}
