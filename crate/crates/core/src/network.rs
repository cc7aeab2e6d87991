//! Ladder networks: ABCD cascade, S-parameter conversion and passband
//! metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonator::ResonatorModel;

pub type Abcd = [[Complex64; 2]; 2];

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const IDENTITY: Abcd = [[ONE, ZERO], [ZERO, ONE]];

pub fn abcd_mul(a: &Abcd, b: &Abcd) -> Abcd {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn series_impedance(z: Complex64) -> Abcd {
    [[ONE, z], [ZERO, ONE]]
}

pub fn shunt_admittance(y: Complex64) -> Abcd {
    [[ONE, ZERO], [y, ONE]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Series,
    Shunt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderStage {
    pub placement: Placement,
    pub resonator: ResonatorModel,
}

impl LadderStage {
    pub fn series(resonator: ResonatorModel) -> Self {
        LadderStage {
            placement: Placement::Series,
            resonator,
        }
    }

    pub fn shunt(resonator: ResonatorModel) -> Self {
        LadderStage {
            placement: Placement::Shunt,
            resonator,
        }
    }

    pub fn abcd(&self, f: f64) -> Result<Abcd> {
        let y = self.resonator.admittance(f)?;
        Ok(match self.placement {
            Placement::Series => series_impedance(y.inv()),
            Placement::Shunt => shunt_admittance(y),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTopology")]
pub struct LadderTopology {
    stages: Vec<LadderStage>,
    reference_impedance: f64,
}

#[derive(Deserialize)]
struct RawTopology {
    stages: Vec<LadderStage>,
    #[serde(default = "default_z0")]
    reference_impedance: f64,
}

fn default_z0() -> f64 {
    50.0
}

impl TryFrom<RawTopology> for LadderTopology {
    type Error = Error;

    fn try_from(raw: RawTopology) -> Result<Self> {
        LadderTopology::new(raw.stages, raw.reference_impedance)
    }
}

impl LadderTopology {
    pub fn new(stages: Vec<LadderStage>, reference_impedance: f64) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Invalid("ladder needs at least one stage".into()));
        }
        if !(reference_impedance > 0.0 && reference_impedance.is_finite()) {
            return Err(Error::Invalid(format!(
                "reference impedance must be positive (got {reference_impedance})"
            )));
        }
        Ok(LadderTopology {
            stages,
            reference_impedance,
        })
    }

    pub fn stages(&self) -> &[LadderStage] {
        &self.stages
    }

    pub fn reference_impedance(&self) -> f64 {
        self.reference_impedance
    }

    /// Chain matrix of the whole ladder, multiplied left to right.
    pub fn abcd(&self, f: f64) -> Result<Abcd> {
        let mut acc = IDENTITY;
        for stage in &self.stages {
            acc = abcd_mul(&acc, &stage.abcd(f)?);
        }
        Ok(acc)
    }

    pub fn cascade_sweep(&self, grid: &[f64]) -> Result<SParameterSet> {
        check_grid(grid)?;
        let z0 = self.reference_impedance;
        let mut data = Vec::with_capacity(grid.len() * 4);
        for &f in grid {
            let s = abcd_to_s(&self.abcd(f)?, z0);
            data.extend_from_slice(&[s[0][0], s[0][1], s[1][0], s[1][1]]);
        }
        SParameterSet::new(grid.to_vec(), 2, data, z0)
    }
}

/// Two-port S-matrix of a reciprocal chain matrix at real reference `z0`.
pub fn abcd_to_s(m: &Abcd, z0: f64) -> [[Complex64; 2]; 2] {
    let [[a, b], [c, d]] = *m;
    let bz = b / z0;
    let cz = c * z0;
    let den = a + bz + cz + d;
    let s11 = (a + bz - cz - d) / den;
    let s22 = (-a + bz - cz + d) / den;
    let s21 = 2.0 / den;
    // det = 1 for every reciprocal stage, so S12 = S21.
    [[s11, s21], [s21, s22]]
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("frequency grid is empty".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!(
            "frequency grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    if !(grid[0] > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive (got {})", grid[0])));
    }
    Ok(())
}

/// One-port reflection sweep of a resonator.
pub fn one_port_sweep(model: &ResonatorModel, grid: &[f64], z0: f64) -> Result<SParameterSet> {
    check_grid(grid)?;
    let data = grid
        .iter()
        .map(|&f| {
            let z = model.impedance(f)?;
            Ok(reflection(z, z0))
        })
        .collect::<Result<Vec<_>>>()?;
    SParameterSet::new(grid.to_vec(), 1, data, z0)
}

fn reflection(z: Complex64, z0: f64) -> Complex64 {
    if z.re.is_infinite() || z.im.is_infinite() {
        return ONE;
    }
    (z - z0) / (z + z0)
}

/// Frequency grid with a 1- or 2-port S-matrix per point.
///
/// Matrices are stored row-major, so a 2-port point is `[S11, S12, S21, S22]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SParameterSet {
    grid: Vec<f64>,
    ports: usize,
    data: Vec<Complex64>,
    reference_impedance: f64,
}

impl SParameterSet {
    pub fn new(grid: Vec<f64>, ports: usize, data: Vec<Complex64>, reference_impedance: f64) -> Result<Self> {
        if ports != 1 && ports != 2 {
            return Err(Error::Invalid(format!(
                "only 1- and 2-port sets are supported (got {ports})"
            )));
        }
        check_grid(&grid)?;
        if data.len() != grid.len() * ports * ports {
            return Err(Error::Invalid(format!(
                "{} S values do not match {} points of a {ports}-port set",
                data.len(),
                grid.len()
            )));
        }
        if !(reference_impedance > 0.0 && reference_impedance.is_finite()) {
            return Err(Error::Invalid(format!(
                "reference impedance must be positive (got {reference_impedance})"
            )));
        }
        Ok(SParameterSet {
            grid,
            ports,
            data,
            reference_impedance,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn reference_impedance(&self) -> f64 {
        self.reference_impedance
    }

    pub fn raw(&self) -> &[Complex64] {
        &self.data
    }

    /// `S[row][col]` at point `i` (zero-based ports).
    pub fn s(&self, i: usize, row: usize, col: usize) -> Complex64 {
        self.data[i * self.ports * self.ports + row * self.ports + col]
    }

    pub fn matrix(&self, i: usize) -> &[Complex64] {
        let n = self.ports * self.ports;
        &self.data[i * n..(i + 1) * n]
    }

    pub fn s11(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.s(i, 0, 0)).collect()
    }

    pub fn s21(&self) -> Result<Vec<Complex64>> {
        self.require_ports(2)?;
        Ok((0..self.len()).map(|i| self.s(i, 1, 0)).collect())
    }

    pub fn require_ports(&self, ports: usize) -> Result<()> {
        if self.ports != ports {
            return Err(Error::Domain(format!(
                "expected a {ports}-port set, got {}-port",
                self.ports
            )));
        }
        Ok(())
    }

    /// Input admittance seen at port 1 of a one-port set.
    pub fn admittance(&self) -> Result<Vec<Complex64>> {
        self.require_ports(1)?;
        let z0 = self.reference_impedance;
        Ok(self.s11().into_iter().map(|s| (ONE - s) / ((ONE + s) * z0)).collect())
    }

    /// Smallest eigenvalue of `I − S†S` at point `i`; non-negative for a
    /// passive network.
    pub fn passivity_margin(&self, i: usize) -> f64 {
        if self.ports == 1 {
            return 1.0 - self.s(i, 0, 0).norm_sqr();
        }
        let s = self.matrix(i);
        let (s11, s12, s21, s22) = (s[0], s[1], s[2], s[3]);
        // M = I − S†S is Hermitian: [[a, b], [b*, d]]
        let a = 1.0 - s11.norm_sqr() - s21.norm_sqr();
        let d = 1.0 - s12.norm_sqr() - s22.norm_sqr();
        let b = -(s11.conj() * s12 + s21.conj() * s22);
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        mean - half_gap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterDefinition {
    /// Mean of the band edges.
    #[default]
    Arithmetic,
    /// Square root of the edge product.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsOptions {
    pub center: CenterDefinition,
    /// Drop below the in-band peak that defines the band edges (dB).
    pub drop_db: f64,
}

/// The half-power drop, `10·log10(2)` ≈ 3.0103 dB.
pub const HALF_POWER_DB: f64 = 3.010_299_956_639_812;

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            center: CenterDefinition::Arithmetic,
            drop_db: HALF_POWER_DB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterMetrics {
    pub fc: f64,
    pub il_db: f64,
    pub bw3db: f64,
    pub fbw: f64,
}

pub fn filter_metrics(sparams: &SParameterSet, hint: Option<(f64, f64)>) -> Result<FilterMetrics> {
    filter_metrics_with(sparams, hint, &MetricsOptions::default())
}

pub fn filter_metrics_with(
    sparams: &SParameterSet,
    hint: Option<(f64, f64)>,
    opts: &MetricsOptions,
) -> Result<FilterMetrics> {
    let grid = sparams.grid();
    let db: Vec<f64> = sparams.s21()?.iter().map(|s| 20.0 * s.norm().log10()).collect();
    passband_metrics(grid, &db, hint, opts)
}

/// Metrics from a transmission curve given directly in dB.
pub fn passband_metrics(
    grid: &[f64],
    db: &[f64],
    hint: Option<(f64, f64)>,
    opts: &MetricsOptions,
) -> Result<FilterMetrics> {
    let window: Vec<usize> = match hint {
        Some((lo, hi)) => (0..grid.len()).filter(|&i| grid[i] >= lo && grid[i] <= hi).collect(),
        None => (0..grid.len()).collect(),
    };
    let mut peak_idx = None;
    for &i in &window {
        if db[i].is_nan() {
            continue;
        }
        if peak_idx.is_none_or(|p: usize| db[i] > db[p]) {
            peak_idx = Some(i);
        }
    }
    let peak_idx = peak_idx.ok_or_else(|| Error::Extraction("no samples inside the passband window".into()))?;
    let peak = db[peak_idx];
    if !peak.is_finite() {
        return Err(Error::Extraction(
            "transmission is zero everywhere in the window".into(),
        ));
    }
    let threshold = peak - opts.drop_db;

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in db.iter().enumerate() {
        match (v >= threshold, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, db.len() - 1));
    }

    let edge = |inner: usize, outer: Option<usize>| -> Result<f64> {
        let outer = outer.ok_or_else(|| {
            Error::Extraction(format!(
                "passband edge not crossed inside the sweep near {} Hz",
                grid[inner]
            ))
        })?;
        let (y_in, y_out) = (db[inner], db[outer]);
        let t = (threshold - y_in) / (y_out - y_in);
        let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
        Ok(grid[inner] + t * (grid[outer] - grid[inner]))
    };
    let bounds = |run: (usize, usize)| -> Result<(f64, f64)> {
        let lo = edge(run.0, run.0.checked_sub(1))?;
        let hi = edge(run.1, (run.1 + 1 < db.len()).then_some(run.1 + 1))?;
        Ok((lo, hi))
    };

    let selected: Vec<(usize, usize)> = match hint {
        Some((lo, hi)) => runs
            .into_iter()
            .filter(|r| grid[r.1] >= lo && grid[r.0] <= hi)
            .collect(),
        None => runs,
    };
    let (first, last) = match selected.as_slice() {
        [] => return Err(Error::Extraction("no contiguous passband found".into())),
        [one] => (*one, *one),
        many if hint.is_some() => (many[0], many[many.len() - 1]),
        many => {
            let candidates = many.iter().map(|r| bounds(*r)).collect::<Result<Vec<_>>>()?;
            return Err(Error::Ambiguity {
                what: "several passbands; pass a band window".into(),
                candidates,
            });
        }
    };
    let (lo, _) = bounds(first)?;
    let (_, hi) = bounds(last)?;
    let bw3db = hi - lo;
    if !(bw3db > 0.0) {
        return Err(Error::Extraction("passband has zero width".into()));
    }
    let fc = match opts.center {
        CenterDefinition::Arithmetic => 0.5 * (lo + hi),
        CenterDefinition::Geometric => (lo * hi).sqrt(),
    };
    Ok(FilterMetrics {
        fc,
        il_db: 0.0 - peak,
        bw3db,
        fbw: bw3db / fc,
    })
}
