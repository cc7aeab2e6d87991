use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::network::SParameterSet;

/// Points where `1 − |S11|²` falls below this are treated as lossless.
const LOSSLESS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodeQOptions {
    /// Centered moving-average window (points) applied to the group delay.
    /// `None` leaves it unsmoothed.
    pub smoothing_window: Option<usize>,
    /// Largest wrapped phase step between neighbours before the grid is
    /// rejected as too coarse to unwrap.
    pub max_phase_step: f64,
}

impl Default for BodeQOptions {
    fn default() -> Self {
        BodeQOptions {
            smoothing_window: None,
            max_phase_step: 0.75 * PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QCurve {
    pub grid: Vec<f64>,
    /// `None` marks points with no finite Q.
    pub q: Vec<Option<f64>>,
    pub qmax: f64,
    pub f_at_qmax: f64,
}

pub fn bode_q(s11_set: &SParameterSet) -> Result<QCurve> {
    bode_q_with(s11_set, &BodeQOptions::default())
}

/// Bode-Q `ω·τ·|S11| / (1 − |S11|²)` with `τ = −dφ/dω` from central
/// differences of the unwrapped reflection phase.
pub fn bode_q_with(s11_set: &SParameterSet, opts: &BodeQOptions) -> Result<QCurve> {
    s11_set.require_ports(1)?;
    let n = s11_set.len();
    if n < 3 {
        return Err(Error::Domain(format!("Bode-Q needs at least 3 points (got {n})")));
    }
    let grid = s11_set.grid();
    let s = s11_set.s11();

    let mut phase = Vec::with_capacity(n);
    phase.push(s[0].arg());
    for i in 1..n {
        let step = (s[i] * s[i - 1].conj()).arg();
        if step.abs() >= opts.max_phase_step {
            return Err(Error::GridTooCoarse {
                step,
                f_lo: grid[i - 1],
                f_hi: grid[i],
            });
        }
        phase.push(phase[i - 1] + step);
    }

    let omega: Vec<f64> = grid.iter().map(|f| 2.0 * PI * f).collect();
    let mut tau: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            -(phase[b] - phase[a]) / (omega[b] - omega[a])
        })
        .collect();
    if let Some(w) = opts.smoothing_window.filter(|&w| w > 1) {
        tau = moving_average(&tau, w);
    }

    let q: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let mag = s[i].norm();
            let denom = 1.0 - mag * mag;
            if denom < LOSSLESS_FLOOR {
                None
            } else {
                Some(omega[i] * tau[i] * mag / denom)
            }
        })
        .collect();

    let (imax, qmax) = q
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .ok_or_else(|| Error::Extraction("no finite Bode-Q point (lossless data)".into()))?;

    Ok(QCurve {
        grid: grid.to_vec(),
        q,
        qmax,
        f_at_qmax: grid[imax],
    })
}

fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(v.len() - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::one_port_sweep;
    use crate::resonator::ResonatorModel;

    // Window centred on fr; the Bode-Q peak near fa is a different quantity.
    fn resonance_window(m: &ResonatorModel, points: usize) -> Vec<f64> {
        let r = m.resonance_frequencies();
        let half = 0.3 * (r.fa - r.fr);
        (0..points)
            .map(|i| r.fr - half + 2.0 * half * i as f64 / (points - 1) as f64)
            .collect()
    }

    #[test]
    fn matches_motional_q_near_resonance() {
        for (rm, q_expected) in [(0.25, 3651.5), (0.9129, 1000.0)] {
            let m = ResonatorModel::bvd(1.0e-12, 100e-9, 0.12e-12, rm).unwrap();
            let grid = resonance_window(&m, 4001);
            let curve = bode_q(&one_port_sweep(&m, &grid, 50.0).unwrap()).unwrap();
            let err = (curve.qmax - q_expected).abs() / q_expected;
            assert!(err < 0.02, "rm={rm}: qmax={} err={err}", curve.qmax);
            // the curve bottoms out at fr, where it equals the motional Q
            let fr = m.resonance_frequencies().fr;
            let i = grid.iter().position(|f| *f >= fr).unwrap();
            let at_fr = curve.q[i].unwrap();
            assert!((at_fr - q_expected).abs() / q_expected < 1e-3, "{at_fr}");
            assert!(curve.q.iter().flatten().all(|q| *q >= at_fr * (1.0 - 1e-3)));
        }
    }

    #[test]
    fn lossless_capacitor_has_no_finite_q() {
        // cm tiny and far away: effectively a bare capacitor
        let m = ResonatorModel::bvd(1.0e-12, 1e-3, 1e-21, 0.0).unwrap();
        let grid: Vec<f64> = (1..100).map(|i| 1e9 + 1e7 * i as f64).collect();
        let set = one_port_sweep(&m, &grid, 50.0).unwrap();
        assert!(matches!(bode_q(&set), Err(Error::Extraction(_))));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let m = ResonatorModel::bvd(1.0e-12, 100e-9, 0.12e-12, 0.25).unwrap();
        let r = m.resonance_frequencies();
        let grid = [r.fr * 0.999, r.fr, r.fr * 1.001, r.fa];
        let set = one_port_sweep(&m, &grid, 50.0).unwrap();
        assert!(matches!(bode_q(&set), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn needs_three_points_and_one_port() {
        let m = ResonatorModel::bvd(1.0e-12, 100e-9, 0.12e-12, 0.25).unwrap();
        let set = one_port_sweep(&m, &[1e9, 1.1e9], 50.0).unwrap();
        assert!(bode_q(&set).is_err());
    }

    #[test]
    fn smoothing_is_opt_in() {
        let m = ResonatorModel::bvd(1.0e-12, 100e-9, 0.12e-12, 0.25).unwrap();
        let clean = one_port_sweep(&m, &resonance_window(&m, 2001), 50.0).unwrap();
        // period-4 phase jitter stands in for measurement noise
        let data = clean
            .raw()
            .iter()
            .enumerate()
            .map(|(i, s)| s * num_complex::Complex64::from_polar(1.0, if i % 4 < 2 { 2e-5 } else { -2e-5 }))
            .collect();
        let set = SParameterSet::new(clean.grid().to_vec(), 1, data, 50.0).unwrap();
        let raw = bode_q(&set).unwrap();
        assert_eq!(raw, bode_q_with(&set, &BodeQOptions::default()).unwrap());
        let smooth = bode_q_with(
            &set,
            &BodeQOptions {
                smoothing_window: Some(5),
                ..Default::default()
            },
        )
        .unwrap();
        let roughness = |c: &QCurve| {
            let q: Vec<f64> = c.q.iter().map(|v| v.unwrap()).collect();
            q.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
        };
        assert!(roughness(&smooth) < 0.3 * roughness(&raw));
    }
}
