use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::resonator_for_wavelength;
use super::spurs::SpurEnvironment;
use crate::dispersion::{select_mode, AcousticMode, DispersionTable, PlatformConstants, DEFAULT_MODE_THRESHOLD_HZ};
use crate::error::{Error, Result};
use crate::network::{filter_metrics, FilterMetrics, LadderStage, LadderTopology};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::resonator::frequency_ratio_for_coupling;

pub const SPEC_VERSION: u32 = 1;

/// Where a design target came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecSource {
    /// Published band target.
    Measured,
    /// Filler value with no published counterpart.
    Placeholder,
    #[default]
    User,
}

/// Band target for a ladder filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    #[serde(default = "default_spec_version")]
    pub spec_version: u32,
    #[serde(default)]
    pub name: String,
    pub fc_target: f64,
    pub fbw_target: f64,
    pub il_max_db: f64,
    pub stage_count: usize,
    pub q_assumed: f64,
    #[serde(default = "default_z0")]
    pub reference_impedance: f64,
    /// Absolute 3 dB bandwidth the target was derived from, when known (Hz).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bw3db: Option<f64>,
    #[serde(default)]
    pub source: SpecSource,
}

fn default_spec_version() -> u32 {
    SPEC_VERSION
}

fn default_z0() -> f64 {
    50.0
}

impl DesignSpec {
    pub fn new(fc_target: f64, fbw_target: f64, stage_count: usize, q_assumed: f64) -> Self {
        DesignSpec {
            spec_version: SPEC_VERSION,
            name: String::new(),
            fc_target,
            fbw_target,
            il_max_db: 3.0,
            stage_count,
            q_assumed,
            reference_impedance: 50.0,
            bw3db: None,
            source: SpecSource::User,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported spec_version {} (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        if !(self.fc_target > 0.0 && self.fc_target.is_finite()) {
            return Err(Error::Invalid(format!(
                "fc_target must be positive (got {})",
                self.fc_target
            )));
        }
        if !(self.fbw_target > 0.0 && self.fbw_target < 0.2) {
            return Err(Error::Invalid(format!(
                "fbw_target {} outside (0, 0.2)",
                self.fbw_target
            )));
        }
        if self.stage_count < 2 || !self.stage_count.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "stage_count must be even and at least 2 (got {})",
                self.stage_count
            )));
        }
        if !(self.il_max_db >= 0.0) {
            return Err(Error::Invalid(format!(
                "il_max_db must be non-negative (got {})",
                self.il_max_db
            )));
        }
        if !(self.q_assumed > 0.0) || !(self.reference_impedance > 0.0) {
            return Err(Error::Invalid(
                "q_assumed and reference_impedance must be positive".into(),
            ));
        }
        Ok(())
    }

    fn window(&self) -> (f64, f64) {
        let half = 0.5 * self.fbw_target * self.fc_target;
        (self.fc_target - half, self.fc_target + half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    pub fc: f64,
    pub fbw: f64,
    pub il: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            fc: 10.0,
            fbw: 10.0,
            il: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub weights: CostWeights,
    pub simplex: NelderMeadOptions,
    pub restarts: usize,
    pub seed: u64,
    /// Frequency points used per cost evaluation.
    pub eval_points: usize,
    /// Frequency points used for the reported metrics.
    pub report_points: usize,
    pub spurs: SpurEnvironment,
    pub mode_threshold: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            weights: CostWeights::default(),
            simplex: NelderMeadOptions::default(),
            restarts: 3,
            seed: 0x5eed,
            eval_points: 601,
            report_points: 4001,
            spurs: SpurEnvironment::default(),
            mode_threshold: DEFAULT_MODE_THRESHOLD_HZ,
        }
    }
}

/// The four scalars the optimizer moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignVariables {
    pub lambda_series: f64,
    pub lambda_shunt: f64,
    pub c0_series: f64,
    pub c0_shunt: f64,
}

impl DesignVariables {
    fn to_log(self) -> [f64; 4] {
        [
            self.lambda_series.ln(),
            self.lambda_shunt.ln(),
            self.c0_series.ln(),
            self.c0_shunt.ln(),
        ]
    }

    fn from_log(x: &[f64]) -> Self {
        DesignVariables {
            lambda_series: x[0].exp(),
            lambda_shunt: x[1].exp(),
            c0_series: x[2].exp(),
            c0_shunt: x[3].exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub mode: AcousticMode,
    pub topology: LadderTopology,
    pub variables: DesignVariables,
    pub metrics: FilterMetrics,
    pub cost: f64,
    /// The simplex met its diameter tolerance on the winning run.
    pub converged: bool,
    pub evaluations: usize,
    pub restarts_used: usize,
}

impl SynthResult {
    pub fn meets(&self, spec: &DesignSpec, fc_tol: f64, fbw_tol: f64) -> bool {
        (self.metrics.fc - spec.fc_target).abs() / spec.fc_target <= fc_tol
            && (self.metrics.fbw - spec.fbw_target).abs() / spec.fbw_target <= fbw_tol
            && self.metrics.il_db <= spec.il_max_db
    }
}

const PENALTY: f64 = 1.0e3;

fn feasibility(spec: &DesignSpec, table: &DispersionTable, consts: &PlatformConstants) -> Result<f64> {
    let lambda = table.wavelength_for_frequency(consts, spec.fc_target)?;
    let ratio = frequency_ratio_for_coupling(table.coupling_for(consts, lambda)?)?;
    let limit = 1.2 * (ratio - 1.0);
    if spec.fbw_target > limit {
        return Err(Error::Feasibility {
            msg: format!(
                "fbw_target {} exceeds the bound 1.2·(fa/fr − 1) at {} Hz",
                spec.fbw_target, spec.fc_target
            ),
            limit,
        });
    }
    Ok(ratio)
}

/// Classic starting point: series resonators centred so the band midpoint
/// sits halfway between fr and fa, shunt resonators detuned so their fa
/// lands on the series fr, and c0 sized for roughly Z0 at fc.
pub fn initial_design(
    spec: &DesignSpec,
    table: &DispersionTable,
    consts: &PlatformConstants,
) -> Result<DesignVariables> {
    spec.validate()?;
    let ratio = feasibility(spec, table, consts)?;
    let fr_series = spec.fc_target / (1.0 + 0.5 * (ratio - 1.0));
    let lambda_series = table.wavelength_for_frequency(consts, fr_series)?;
    let mut ratio_shunt = ratio;
    let mut lambda_shunt = lambda_series;
    for _ in 0..4 {
        lambda_shunt = table.wavelength_for_frequency(consts, fr_series / ratio_shunt)?;
        ratio_shunt = frequency_ratio_for_coupling(table.coupling_for(consts, lambda_shunt)?)?;
    }
    let c0 = 1.0 / (2.0 * PI * spec.fc_target * spec.reference_impedance);
    Ok(DesignVariables {
        lambda_series,
        lambda_shunt,
        c0_series: c0,
        c0_shunt: c0,
    })
}

fn build(
    spec: &DesignSpec,
    table: &DispersionTable,
    consts: &PlatformConstants,
    spurs: &SpurEnvironment,
    v: &DesignVariables,
) -> Result<LadderTopology> {
    let series = resonator_for_wavelength(table, consts, v.lambda_series, v.c0_series, spec.q_assumed, spurs)?;
    let shunt = resonator_for_wavelength(table, consts, v.lambda_shunt, v.c0_shunt, spec.q_assumed, spurs)?;
    let stages = (0..spec.stage_count)
        .map(|i| {
            if i % 2 == 0 {
                LadderStage::series(series.clone())
            } else {
                LadderStage::shunt(shunt.clone())
            }
        })
        .collect();
    LadderTopology::new(stages, spec.reference_impedance)
}

fn sweep(spec: &DesignSpec, points: usize) -> Vec<f64> {
    let span = 1.5 * spec.fbw_target * spec.fc_target;
    let (lo, hi) = (spec.fc_target - span, spec.fc_target + span);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn metrics_for(
    spec: &DesignSpec,
    table: &DispersionTable,
    consts: &PlatformConstants,
    spurs: &SpurEnvironment,
    v: &DesignVariables,
    grid: &[f64],
) -> Result<(LadderTopology, FilterMetrics)> {
    let topology = build(spec, table, consts, spurs, v)?;
    let metrics = filter_metrics(&topology.cascade_sweep(grid)?, Some(spec.window()))?;
    Ok((topology, metrics))
}

fn cost_of(spec: &DesignSpec, w: &CostWeights, m: &FilterMetrics) -> f64 {
    let e_fc = (m.fc - spec.fc_target) / spec.fc_target;
    let e_fbw = (m.fbw - spec.fbw_target) / spec.fbw_target;
    let e_il = (m.il_db - spec.il_max_db).max(0.0);
    w.fc * e_fc * e_fc + w.fbw * e_fbw * e_fbw + w.il * e_il * e_il
}

/// Optimizes a symmetric ladder (alternating series and shunt stages, one
/// resonator design per role) against `spec` on `table`.
///
/// Runs a simplex search in log-parameter space and restarts from a seeded
/// jitter of the best point whenever a run stalls or misses the targets.
pub fn ladder_synthesize(
    spec: &DesignSpec,
    table: &DispersionTable,
    consts: &PlatformConstants,
    opts: &SynthOptions,
) -> Result<SynthResult> {
    table.check_against(consts)?;
    opts.spurs.validate()?;
    let start = initial_design(spec, table, consts)?;
    let grid = sweep(spec, opts.eval_points.max(3));
    let cost = |x: &[f64]| -> f64 {
        let v = DesignVariables::from_log(x);
        match metrics_for(spec, table, consts, &opts.spurs, &v, &grid) {
            Ok((_, m)) => cost_of(spec, &opts.weights, &m),
            Err(_) => PENALTY,
        }
    };
    let steps = [0.01, 0.01, 0.1, 0.1];
    let jitter = [0.01, 0.01, 0.2, 0.2];

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = nelder_mead(cost, &start.to_log(), &steps, &opts.simplex);
    let mut evaluations = best.evaluations;
    let mut restarts_used = 0;
    let good_enough = |v: f64| v < opts.weights.fc * 1e-6 + opts.weights.fbw * 1e-4;
    while restarts_used < opts.restarts && !(best.converged && good_enough(best.value)) {
        restarts_used += 1;
        let x0: Vec<f64> = best
            .x
            .iter()
            .zip(jitter)
            .map(|(x, j)| x + rng.random_range(-j..j))
            .collect();
        let run = nelder_mead(cost, &x0, &steps, &opts.simplex);
        evaluations += run.evaluations;
        if run.value < best.value || (run.value == best.value && run.converged && !best.converged) {
            best = run;
        }
    }

    let variables = DesignVariables::from_log(&best.x);
    let report = sweep(spec, opts.report_points.max(3));
    let (topology, metrics) = metrics_for(spec, table, consts, &opts.spurs, &variables, &report)?;
    Ok(SynthResult {
        mode: table.mode(),
        topology,
        variables,
        metrics,
        cost: best.value,
        converged: best.converged,
        evaluations,
        restarts_used,
    })
}

/// [`ladder_synthesize`] on the built-in table for the mode suited to
/// `spec.fc_target`.
pub fn synthesize_auto(spec: &DesignSpec, consts: &PlatformConstants, opts: &SynthOptions) -> Result<SynthResult> {
    let table = DispersionTable::builtin(select_mode(spec.fc_target, opts.mode_threshold));
    ladder_synthesize(spec, &table, consts, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_145() -> DesignSpec {
        DesignSpec::new(1.45e9, 0.03, 4, 3000.0)
    }

    #[test]
    fn validates_spec() {
        let mut s = spec_145();
        assert!(s.validate().is_ok());
        s.stage_count = 3;
        assert!(s.validate().is_err());
        s.stage_count = 4;
        s.fbw_target = 0.2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn infeasible_bandwidth_reports_bound() {
        let consts = PlatformConstants::default();
        let table = DispersionTable::builtin(AcousticMode::Sh0);
        let s = DesignSpec::new(1.45e9, 0.15, 4, 3000.0);
        match ladder_synthesize(&s, &table, &consts, &SynthOptions::default()) {
            Err(Error::Feasibility { limit, .. }) => assert!(limit > 0.0 && limit < 0.15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn auto_mode_picks_s0_high_band() {
        let consts = PlatformConstants::default();
        let s = DesignSpec::new(4.4e9, 0.05, 4, 1500.0);
        let table = DispersionTable::builtin(select_mode(s.fc_target, DEFAULT_MODE_THRESHOLD_HZ));
        assert_eq!(table.mode(), AcousticMode::S0);
        let v = initial_design(&s, &table, &consts).unwrap();
        assert!((v.lambda_series - 1.5e-6).abs() < 0.1e-6, "{}", v.lambda_series);
    }

    #[test]
    fn initial_design_detunes_shunt_below_series() {
        let consts = PlatformConstants::default();
        let table = DispersionTable::builtin(AcousticMode::Sh0);
        let v = initial_design(&spec_145(), &table, &consts).unwrap();
        let fr_s = table.frequency_for(&consts, v.lambda_series).unwrap();
        let fr_p = table.frequency_for(&consts, v.lambda_shunt).unwrap();
        let k2_p = table.coupling_for(&consts, v.lambda_shunt).unwrap();
        let fa_p = fr_p * frequency_ratio_for_coupling(k2_p).unwrap();
        assert!((fa_p - fr_s).abs() / fr_s < 1e-6);
        assert!(fr_p < fr_s);
    }

    #[test]
    fn synthesis_hits_targets_and_is_reproducible() {
        let consts = PlatformConstants::default();
        let table = DispersionTable::builtin(AcousticMode::Sh0);
        let s = spec_145();
        let a = ladder_synthesize(&s, &table, &consts, &SynthOptions::default()).unwrap();
        assert!(a.meets(&s, 0.01, 0.10), "{:?}", a.metrics);
        let b = ladder_synthesize(&s, &table, &consts, &SynthOptions::default()).unwrap();
        assert_eq!(a.variables, b.variables);
        assert_eq!(a.metrics, b.metrics);
        let set = a.topology.cascade_sweep(&sweep(&s, 201)).unwrap();
        for i in 0..set.len() {
            assert!(set.passivity_margin(i) >= -1e-9);
        }
    }

    #[test]
    fn optimizer_beats_coarse_grid_search() {
        let consts = PlatformConstants::default();
        let table = DispersionTable::builtin(AcousticMode::Sh0);
        let s = spec_145();
        let opts = SynthOptions::default();
        let result = ladder_synthesize(&s, &table, &consts, &opts).unwrap();

        let start = initial_design(&s, &table, &consts).unwrap().to_log();
        let grid = sweep(&s, opts.eval_points);
        let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let mut brute = f64::INFINITY;
        for a in levels {
            for b in levels {
                for c in levels {
                    for d in levels {
                        let x = [
                            start[0] + 0.01 * a,
                            start[1] + 0.01 * b,
                            start[2] + 0.3 * c,
                            start[3] + 0.3 * d,
                        ];
                        let v = DesignVariables::from_log(&x);
                        if let Ok((_, m)) = metrics_for(&s, &table, &consts, &opts.spurs, &v, &grid) {
                            brute = brute.min(cost_of(&s, &opts.weights, &m));
                        }
                    }
                }
            }
        }
        assert!(brute.is_finite());
        assert!(result.cost <= brute, "{} > {brute}", result.cost);
    }
}
