//! Dispersion tables: phase velocity and coupling against normalized film
//! thickness `h/λ`, and the geometry/frequency conversions built on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::resonator::K2_MAX;

/// Default boundary between the SH0 and S0 bands.
pub const DEFAULT_MODE_THRESHOLD_HZ: f64 = 3.0e9;

/// Allowed excess of an SH0 table's velocity over the slow shear bulk wave.
const SSB_TOLERANCE: f64 = 0.05;

const SED_LIMIT: f64 = 0.15;
const VALIDATED_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AcousticMode {
    #[serde(rename = "SH0")]
    Sh0,
    #[serde(rename = "S0")]
    S0,
}

impl fmt::Display for AcousticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcousticMode::Sh0 => "SH0",
            AcousticMode::S0 => "S0",
        })
    }
}

impl FromStr for AcousticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SH0" => Ok(AcousticMode::Sh0),
            "S0" => Ok(AcousticMode::S0),
            other => Err(Error::Invalid(format!("unknown acoustic mode '{other}'"))),
        }
    }
}

/// Thin-film stack constants; lengths in meters, velocity in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformConstants {
    pub film_thickness: f64,
    pub electrode_thickness: f64,
    pub v_ssb: f64,
}

impl Default for PlatformConstants {
    fn default() -> Self {
        PlatformConstants {
            film_thickness: 450e-9,
            electrode_thickness: 120e-9,
            v_ssb: 7150.0,
        }
    }
}

impl PlatformConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("film_thickness", self.film_thickness),
            ("electrode_thickness", self.electrode_thickness),
            ("v_ssb", self.v_ssb),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(())
    }

    pub fn h_over_lambda(&self, lambda: f64) -> f64 {
        self.film_thickness / lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub h_over_lambda: f64,
    pub vp: f64,
    pub k2: f64,
}

#[derive(Debug, Clone)]
pub struct DispersionTable {
    mode: AcousticMode,
    samples: Vec<DispersionSample>,
    provenance: String,
    vp_curve: MonotoneCubic,
    k2_curve: MonotoneCubic,
}

impl PartialEq for DispersionTable {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode && self.samples == other.samples && self.provenance == other.provenance
    }
}

impl DispersionTable {
    pub fn new(mode: AcousticMode, samples: Vec<DispersionSample>, provenance: impl Into<String>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::Invalid(format!(
                "dispersion table needs at least 4 samples (got {})",
                samples.len()
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.h_over_lambda > 0.0 && s.h_over_lambda < 1.0) {
                return Err(Error::Invalid(format!(
                    "sample {i}: h/λ = {} outside (0, 1)",
                    s.h_over_lambda
                )));
            }
            if !(s.vp > 0.0 && s.vp < 20000.0) {
                return Err(Error::Invalid(format!(
                    "sample {i}: vp = {} outside (0, 20000) m/s",
                    s.vp
                )));
            }
            if !(s.k2 > 0.0 && s.k2 < K2_MAX) {
                return Err(Error::Invalid(format!("sample {i}: k2 = {} outside (0, π²/8)", s.k2)));
            }
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].h_over_lambda <= w[0].h_over_lambda) {
            return Err(Error::Invalid(format!(
                "h/λ must be strictly increasing ({} then {})",
                w[0].h_over_lambda, w[1].h_over_lambda
            )));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.h_over_lambda).collect();
        let vps: Vec<f64> = samples.iter().map(|s| s.vp).collect();
        let k2s: Vec<f64> = samples.iter().map(|s| s.k2).collect();
        Ok(DispersionTable {
            mode,
            vp_curve: MonotoneCubic::new(&xs, &vps),
            k2_curve: MonotoneCubic::new(&xs, &k2s),
            samples,
            provenance: provenance.into(),
        })
    }

    /// Starter tables shipped with the crate. Only the anchor rows noted in
    /// each file's provenance are trusted; the rest is smooth filler.
    pub fn builtin(mode: AcousticMode) -> DispersionTable {
        let text = match mode {
            AcousticMode::Sh0 => include_str!("../data/sh0_lnosic.csv"),
            AcousticMode::S0 => include_str!("../data/s0_lnosic.csv"),
        };
        crate::io::csv::parse_dispersion_csv(text, Some(mode)).expect("builtin table is valid")
    }

    pub fn mode(&self) -> AcousticMode {
        self.mode
    }

    pub fn samples(&self) -> &[DispersionSample] {
        &self.samples
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn domain(&self) -> (f64, f64) {
        self.vp_curve.domain()
    }

    /// Rejects SH0 tables whose velocity grossly exceeds the slow shear bulk
    /// wave of the platform.
    pub fn check_against(&self, consts: &PlatformConstants) -> Result<()> {
        if self.mode != AcousticMode::Sh0 {
            return Ok(());
        }
        let limit = consts.v_ssb * (1.0 + SSB_TOLERANCE);
        match self.samples.iter().find(|s| s.vp > limit) {
            Some(s) => Err(Error::Invalid(format!(
                "SH0 velocity {} m/s at h/λ = {} exceeds the slow shear bulk limit {limit} m/s",
                s.vp, s.h_over_lambda
            ))),
            None => Ok(()),
        }
    }

    /// Phase velocity (m/s) and coupling at `h_over_lambda`.
    pub fn interpolate(&self, h_over_lambda: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain();
        // absorbs rounding in h/λ = h / (h / x)
        let slack = 1e-12 * hi;
        if !(h_over_lambda >= lo - slack && h_over_lambda <= hi + slack) {
            return Err(Error::Range {
                what: "h/λ",
                value: h_over_lambda,
                lo,
                hi,
            });
        }
        let x = h_over_lambda.clamp(lo, hi);
        Ok((self.vp_curve.eval(x), self.k2_curve.eval(x)))
    }

    /// Wavelength interval covered by the table for the given film.
    pub fn wavelength_range(&self, consts: &PlatformConstants) -> (f64, f64) {
        let (lo, hi) = self.domain();
        (consts.film_thickness / hi, consts.film_thickness / lo)
    }

    /// Resonance frequency `vp(h/λ)/λ` of a device with wavelength `lambda`.
    pub fn frequency_for(&self, consts: &PlatformConstants, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("wavelength must be positive (got {lambda})")));
        }
        let (vp, _) = self.interpolate(consts.h_over_lambda(lambda))?;
        Ok(vp / lambda)
    }

    pub fn coupling_for(&self, consts: &PlatformConstants, lambda: f64) -> Result<f64> {
        Ok(self.interpolate(consts.h_over_lambda(lambda))?.1)
    }

    /// Inverts [`Self::frequency_for`] by bisection.
    ///
    /// Falls back to a bracketed search when `f(λ)` is not monotone over the
    /// table, reporting every bracketing interval if more than one exists.
    pub fn wavelength_for_frequency(&self, consts: &PlatformConstants, f_target: f64) -> Result<f64> {
        if !(f_target > 0.0) {
            return Err(Error::Domain(format!(
                "target frequency must be positive (got {f_target})"
            )));
        }
        let (lam_lo, lam_hi) = self.wavelength_range(consts);
        let scan = self.frequency_scan(consts);
        let f_min = scan.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let f_max = scan.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if f_target < f_min || f_target > f_max {
            return Err(Error::Range {
                what: "target frequency",
                value: f_target,
                lo: f_min,
                hi: f_max,
            });
        }

        let residual = |lam: f64| -> f64 {
            let lam = lam.clamp(lam_lo, lam_hi);
            self.frequency_for(consts, lam)
                .map(|f| f - f_target)
                .unwrap_or(f64::NAN)
        };

        // Exact hits collapse to zero-width brackets.
        let mut brackets: Vec<(f64, f64)> = Vec::new();
        for (i, &(lam, f)) in scan.iter().enumerate() {
            let r = f - f_target;
            if r == 0.0 {
                brackets.push((lam, lam));
            } else if let Some(&(lam_next, f_next)) = scan.get(i + 1) {
                let r_next = f_next - f_target;
                if r_next != 0.0 && r.signum() != r_next.signum() {
                    brackets.push((lam, lam_next));
                }
            }
        }
        let (mut a, mut b) = match brackets.as_slice() {
            [] => unreachable!("target inside the scanned range"),
            [(a, b)] if a == b => return Ok(*a),
            [one] => *one,
            many => {
                return Err(Error::Ambiguity {
                    what: format!("{} Hz is reached at several wavelengths", f_target),
                    candidates: many.to_vec(),
                })
            }
        };

        let mut ra = residual(a);
        if ra == 0.0 {
            return Ok(a);
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let rm = residual(mid);
            if rm == 0.0 || (rm / f_target).abs() < 1e-12 || (b - a) < 1e-15 * mid {
                return Ok(mid);
            }
            if rm.signum() == ra.signum() {
                a = mid;
                ra = rm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// True when `f(λ)` decreases strictly over the whole table.
    pub fn is_frequency_monotone(&self, consts: &PlatformConstants) -> bool {
        self.frequency_scan(consts).windows(2).all(|w| w[1].1 < w[0].1)
    }

    // (λ, f) pairs on a fine grid, λ increasing.
    fn frequency_scan(&self, consts: &PlatformConstants) -> Vec<(f64, f64)> {
        const PER_INTERVAL: usize = 32;
        let xs: Vec<f64> = self.samples.iter().map(|s| s.h_over_lambda).collect();
        let mut pts = Vec::with_capacity(xs.len() * PER_INTERVAL);
        for w in xs.windows(2).rev() {
            for k in (1..=PER_INTERVAL).rev() {
                let x = w[0] + (w[1] - w[0]) * k as f64 / PER_INTERVAL as f64;
                pts.push(x);
            }
        }
        pts.push(xs[0]);
        pts.into_iter()
            .map(|x| {
                let lam = consts.film_thickness / x;
                (lam, self.vp_curve.eval(x) / lam)
            })
            .collect()
    }
}

/// SH0 below the threshold, S0 at or above it.
pub fn select_mode(f_target: f64, threshold: f64) -> AcousticMode {
    if f_target < threshold {
        AcousticMode::Sh0
    } else {
        AcousticMode::S0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// SH0 with energy sinking into the substrate (`h/λ < 0.15`).
    Sed,
    Standard,
    OutOfValidatedRange,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Sed => "SED",
            Regime::Standard => "standard",
            Regime::OutOfValidatedRange => "out_of_validated_range",
        })
    }
}

pub fn classify_regime(consts: &PlatformConstants, lambda: f64) -> Regime {
    let x = consts.h_over_lambda(lambda);
    if x < SED_LIMIT {
        Regime::Sed
    } else if x < VALIDATED_LIMIT {
        Regime::Standard
    } else {
        Regime::OutOfValidatedRange
    }
}
