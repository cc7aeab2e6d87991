//! Nelder-Mead simplex minimization.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Stop once the largest vertex distance from the best vertex drops below this.
    pub diameter_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evaluations: 2000,
            diameter_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0` with an axis-aligned initial simplex of
/// edge `steps[k]` along coordinate `k`.
///
/// Vertices are kept sorted by value with ties broken by insertion order, so
/// runs are deterministic.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = x0.len();
    assert_eq!(steps.len(), n);
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += steps[k];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        // stable sort: equal values keep their order
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < opts.diameter_tolerance {
            converged = true;
            break;
        }
        if evals >= opts.max_evaluations {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for k in 0..n {
                centroid[k] += x[k] / n as f64;
            }
        }
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            (0..n).map(|k| centroid[k] + t * (worst[k] - centroid[k])).collect()
        };
        let worst = simplex[n].0.clone();
        let f_worst = simplex[n].1;
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let xr = along(-REFLECT, &worst);
        let fr = eval(&xr, &mut evals);
        if fr < f_best {
            let xe = along(-REFLECT * EXPAND, &worst);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = along(-REFLECT * CONTRACT, &worst);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(CONTRACT, &worst);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = (0..n).map(|k| anchor[k] + SHRINK * (vertex.0[k] - anchor[k])).collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }

    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evaluations: 5000,
            diameter_tolerance: 1e-10,
        };
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.1, 0.1], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn respects_evaluation_budget() {
        let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let opts = NelderMeadOptions {
            max_evaluations: 40,
            diameter_tolerance: 1e-15,
        };
        let m = nelder_mead(sphere, &[3.0, -2.0, 1.0, 0.5], &[1.0; 4], &opts);
        assert!(!m.converged);
        // one iteration may overrun by at most a shrink
        assert!(m.evaluations <= 40 + 5);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) };
        let m = nelder_mead(f, &[0.5], &[1.0], &NelderMeadOptions::default());
        assert!((m.x[0] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + 0.7).abs();
        let a = nelder_mead(f, &[1.0, 1.0], &[0.5, 0.5], &NelderMeadOptions::default());
        let b = nelder_mead(f, &[1.0, 1.0], &[0.5, 0.5], &NelderMeadOptions::default());
        assert_eq!(a, b);
    }
}
