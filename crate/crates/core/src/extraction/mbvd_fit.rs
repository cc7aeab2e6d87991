//! Damped least-squares fit of the six mBVD parameters to an admittance
//! sweep.
//!
//! Parameters are fitted as logarithms so they stay positive without
//! constraints. The residual is the complex admittance misfit relative to
//! the measured magnitude at each point.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::resonance::extract_fr_fa;
use crate::error::{Error, Result};
use crate::network::SParameterSet;
use crate::resonator::{BranchKind, MotionalBranch, ResonatorModel};

const N_PARAMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Largest log-parameter step that counts as converged.
    pub step_tolerance: f64,
    /// Relative RMS residual that counts as converged.
    pub residual_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            step_tolerance: 1e-10,
            residual_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: ResonatorModel,
    /// Relative RMS of the complex admittance misfit.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits a one-port S-parameter set.
pub fn fit_mbvd(s11_set: &SParameterSet, opts: &FitOptions) -> Result<FitReport> {
    let y = s11_set.admittance()?;
    fit_mbvd_admittance(s11_set.grid(), &y, opts)
}

// [rs, r0, rm, lm, cm, c0]
#[derive(Debug, Clone, Copy)]
struct Params([f64; N_PARAMS]);

impl Params {
    fn from_log(p: &DVector<f64>) -> Self {
        let mut v = [0.0; N_PARAMS];
        for (k, x) in v.iter_mut().enumerate() {
            *x = p[k].exp();
        }
        Params(v)
    }

    fn to_log(self) -> DVector<f64> {
        DVector::from_iterator(N_PARAMS, self.0.iter().map(|v| v.ln()))
    }

    /// Admittance and its derivatives with respect to each log-parameter.
    fn eval(&self, f: f64) -> (Complex64, [Complex64; N_PARAMS]) {
        let [rs, r0, rm, lm, cm, c0] = self.0;
        let s = Complex64::new(0.0, 2.0 * PI * f);
        let one = Complex64::new(1.0, 0.0);

        let den_c = one + s * c0 * r0;
        let yc = s * c0 / den_c;
        let zm = rm + s * lm + one / (s * cm);
        let ym = one / zm;
        let core = yc + ym;
        let outer = one / (one + rs * core);
        let y = core * outer;
        let dy_dcore = outer * outer;

        let d_rs = -y * y;
        let d_c0 = dy_dcore * s / (den_c * den_c);
        let d_r0 = dy_dcore * (-yc * yc);
        let d_zm = dy_dcore * (-ym * ym);
        let d_rm = d_zm;
        let d_lm = d_zm * s;
        let d_cm = d_zm * (-one / (s * cm * cm));

        (y, [d_rs * rs, d_r0 * r0, d_rm * rm, d_lm * lm, d_cm * cm, d_c0 * c0])
    }

    fn model(&self) -> Result<ResonatorModel> {
        let [rs, r0, rm, lm, cm, c0] = self.0;
        let main = MotionalBranch::new(rm, lm, cm, BranchKind::Main)?;
        ResonatorModel::new(c0, r0, rs, main, Vec::new())
    }
}

struct Problem<'a> {
    grid: &'a [f64],
    y: &'a [Complex64],
    weight: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, p: &Params) -> DVector<f64> {
        let n = self.grid.len();
        let mut r = DVector::zeros(2 * n);
        for i in 0..n {
            let (ym, _) = p.eval(self.grid[i]);
            let e = (ym - self.y[i]) * self.weight[i];
            r[2 * i] = e.re;
            r[2 * i + 1] = e.im;
        }
        r
    }

    fn jacobian(&self, p: &Params) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.grid.len();
        let mut r = DVector::zeros(2 * n);
        let mut j = DMatrix::zeros(2 * n, N_PARAMS);
        for i in 0..n {
            let (ym, d) = p.eval(self.grid[i]);
            let w = self.weight[i];
            let e = (ym - self.y[i]) * w;
            r[2 * i] = e.re;
            r[2 * i + 1] = e.im;
            for (k, dk) in d.iter().enumerate() {
                j[(2 * i, k)] = dk.re * w;
                j[(2 * i + 1, k)] = dk.im * w;
            }
        }
        (r, j)
    }

    fn rms(&self, r: &DVector<f64>) -> f64 {
        (r.norm_squared() / self.grid.len() as f64).sqrt()
    }
}

/// Fits an admittance sweep that brackets both resonance and
/// anti-resonance.
pub fn fit_mbvd_admittance(grid: &[f64], y: &[Complex64], opts: &FitOptions) -> Result<FitReport> {
    let start = initial_guess(grid, y)?;
    let weight: Vec<f64> = y
        .iter()
        .map(|v| {
            let m = v.norm();
            if m > 0.0 && m.is_finite() {
                1.0 / m
            } else {
                0.0
            }
        })
        .collect();
    let problem = Problem { grid, y, weight };

    // Loss terms are poorly constrained by the initial guess; try a few
    // splits of the series loss and keep the best fit.
    let mut best: Option<FitReport> = None;
    for split in [0.05, 0.3, 0.01] {
        let mut p = start;
        let r_total = p.0[2];
        p.0[0] = split * r_total;
        p.0[2] = (1.0 - split) * r_total;
        let report = levenberg_marquardt(&problem, p, opts)?;
        let done = report.converged;
        if best.as_ref().is_none_or(|b| report.residual < b.residual) {
            best = Some(report);
        }
        if done {
            break;
        }
    }
    Ok(best.expect("at least one start"))
}

fn initial_guess(grid: &[f64], y: &[Complex64]) -> Result<Params> {
    let res = extract_fr_fa(grid, y).map_err(|e| match e {
        Error::Bracketing(msg) => Error::Extraction(format!("data does not bracket fr and fa: {msg}")),
        other => other,
    })?;
    let (fr, fa) = (res.fr, res.fa);
    let alpha = (fa / fr).powi(2) - 1.0;

    // Lowest point sits below fr: B = ω·c0·(1 + α / (1 − (f/fr)²)).
    let f_lo = grid[0];
    let w_lo = 2.0 * PI * f_lo;
    let b_lo = y[0].im;
    let c0 = b_lo / (w_lo * (1.0 + alpha / (1.0 - (f_lo / fr).powi(2))));
    if !(c0 > 0.0) {
        return Err(Error::Extraction(format!(
            "susceptance at {f_lo} Hz is not capacitive; cannot seed c0"
        )));
    }
    let cm = c0 * alpha;
    let lm = 1.0 / ((2.0 * PI * fr).powi(2) * cm);
    let g_max = y.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let r_series = if g_max > 0.0 { 1.0 / g_max } else { 1e-3 };

    // Off-resonance conductance ≈ ω²C²(r0 + rs).
    let c_lo = b_lo / w_lo;
    let r_lo = y[0].re / (w_lo * c_lo).powi(2);
    let r0 = if r_lo > 0.0 { r_lo } else { 1e-3 * r_series };

    Ok(Params([0.0, r0, r_series, lm, cm, c0]))
}

fn levenberg_marquardt(problem: &Problem<'_>, start: Params, opts: &FitOptions) -> Result<FitReport> {
    let mut p = start.to_log();
    let mut params = start;
    let mut residual = problem.rms(&problem.residuals(&params));
    let mut lambda = 1e-3;
    let mut converged = residual < opts.residual_tolerance;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let (r, j) = problem.jacobian(&params);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;

        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..N_PARAMS {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-30);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial = &p + &step;
            let trial_params = Params::from_log(&trial);
            let trial_res = problem.rms(&problem.residuals(&trial_params));
            if trial_res.is_finite() && trial_res < residual {
                let step_size = step.amax();
                p = trial;
                params = trial_params;
                residual = trial_res;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if step_size < opts.step_tolerance || residual < opts.residual_tolerance {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: a stationary point.
            converged = residual < opts.residual_tolerance;
            break;
        }
    }

    Ok(FitReport {
        model: params.model()?,
        residual,
        iterations,
        converged,
    })
}
