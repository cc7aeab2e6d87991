use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::resonator::Resonances;

/// Resonance (|Y| maximum) and anti-resonance (first |Y| minimum above it)
/// of an admittance sweep, each refined by a three-point parabola.
///
/// Near a motional resonance `|Y|⁻²` is locally quadratic in frequency, and
/// near the anti-resonance `|Y|²` is; those are the quantities fitted, which
/// keeps the refinement exact to second order even for lossless data.
pub fn extract_fr_fa(grid: &[f64], y: &[Complex64]) -> Result<Resonances> {
    if grid.len() != y.len() {
        return Err(Error::Invalid(format!(
            "{} frequencies but {} admittance values",
            grid.len(),
            y.len()
        )));
    }
    let n = grid.len();
    if n < 3 {
        return Err(Error::Bracketing("need at least 3 points to bracket fr and fa".into()));
    }
    let mag: Vec<f64> = y.iter().map(|v| v.norm()).collect();

    let imax = argmax(&mag);
    if imax == 0 || imax == n - 1 {
        return Err(Error::Bracketing(format!(
            "|Y| maximum sits at the sweep edge ({} Hz)",
            grid[imax]
        )));
    }
    let imin = imax + 1 + argmin(&mag[imax + 1..]);
    if imin == n - 1 {
        return Err(Error::Bracketing(format!(
            "|Y| minimum above fr sits at the sweep edge ({} Hz)",
            grid[imin]
        )));
    }

    let fr = refine(grid, imax, |i| {
        let m = mag[i];
        if m.is_finite() {
            1.0 / (m * m)
        } else {
            0.0
        }
    });
    let fa = refine(grid, imin, |i| mag[i] * mag[i]);
    if !(fa > fr) {
        return Err(Error::Bracketing(format!("fa {fa} Hz not above fr {fr} Hz")));
    }
    Ok(Resonances { fr, fa })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

// Vertex of the parabola through (i−1, i, i+1); `g` must be minimal at `i`.
fn refine(grid: &[f64], i: usize, g: impl Fn(usize) -> f64) -> f64 {
    let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
    let (y0, y1, y2) = (g(i - 1), g(i), g(i + 1));
    let a = x1 - x0;
    let b = x1 - x2;
    let num = a * a * (y1 - y2) - b * b * (y1 - y0);
    let den = a * (y1 - y2) - b * (y1 - y0);
    if den == 0.0 || !num.is_finite() || !den.is_finite() {
        return x1;
    }
    (x1 - 0.5 * num / den).clamp(x0, x2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonator::ResonatorModel;

    fn sweep(m: &ResonatorModel, start: f64, stop: f64, step: f64) -> (Vec<f64>, Vec<Complex64>) {
        let n = ((stop - start) / step).round() as usize + 1;
        let grid: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        let y = grid.iter().map(|&f| m.admittance(f).unwrap()).collect();
        (grid, y)
    }

    #[test]
    fn lossless_sweep_matches_closed_form() {
        let m = ResonatorModel::bvd(1.0e-12, 100e-9, 0.12e-12, 0.0).unwrap();
        let want = m.resonance_frequencies();
        for offset in [0.0, 5e3, 2.5e3] {
            let (grid, y) = sweep(&m, 1.40e9 + offset, 1.60e9 + offset, 10e3);
            let got = extract_fr_fa(&grid, &y).unwrap();
            assert!(((got.fr - want.fr) / want.fr).abs() < 1e-6, "{got:?} vs {want:?}");
            assert!(((got.fa - want.fa) / want.fa).abs() < 1e-6, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn scale_invariant() {
        let m = ResonatorModel::bvd(1.0e-12, 100e-9, 0.12e-12, 0.5).unwrap();
        let (grid, y) = sweep(&m, 1.40e9, 1.60e9, 50e3);
        let base = extract_fr_fa(&grid, &y).unwrap();
        for k in [1e-3, 0.7, 42.0] {
            let scaled: Vec<Complex64> = y.iter().map(|v| v * k).collect();
            let r = extract_fr_fa(&grid, &scaled).unwrap();
            assert!(((r.fr - base.fr) / base.fr).abs() < 1e-12);
            assert!(((r.fa - base.fa) / base.fa).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_data_cannot_be_bracketed() {
        let grid: Vec<f64> = (1..100).map(|i| 1e9 * i as f64).collect();
        let y: Vec<Complex64> = grid.iter().map(|f| Complex64::new(0.0, f * 1e-12)).collect();
        assert!(matches!(extract_fr_fa(&grid, &y), Err(Error::Bracketing(_))));
    }

    #[test]
    fn window_ending_before_fa_is_rejected() {
        let m = ResonatorModel::bvd(1.0e-12, 100e-9, 0.12e-12, 0.25).unwrap();
        let (grid, y) = sweep(&m, 1.40e9, 1.50e9, 50e3);
        assert!(matches!(extract_fr_fa(&grid, &y), Err(Error::Bracketing(_))));
    }
}
