use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::spurs::{spur_branches, SpurEnvironment};
use crate::dispersion::{DispersionTable, PlatformConstants};
use crate::error::{Error, Result};
use crate::resonator::{motional_capacitance_for, BranchKind, MotionalBranch, ResonatorModel};

/// Smallest motional capacitance accepted from a geometry (farad).
pub const CM_FLOOR: f64 = 1e-18;

/// IDT geometry of a one-port resonator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    /// Acoustic wavelength (m), twice the electrode pitch.
    pub lambda: f64,
    pub pairs_n: u32,
    /// Aperture (m).
    pub aperture_w: f64,
    /// Capacitance per finger pair per unit aperture (F/m).
    pub eps_eff: f64,
    pub q_assumed: f64,
}

impl GeometrySpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("aperture_w", self.aperture_w),
            ("eps_eff", self.eps_eff),
            ("q_assumed", self.q_assumed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive (got {v})")));
            }
        }
        if self.pairs_n == 0 {
            return Err(Error::Invalid("pairs_n must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parallel-plate estimate `c0 = N · eps_eff · W`.
pub fn static_capacitance(geom: &GeometrySpec) -> Result<f64> {
    geom.validate()?;
    Ok(geom.pairs_n as f64 * geom.eps_eff * geom.aperture_w)
}

pub fn derive_resonator(
    table: &DispersionTable,
    consts: &PlatformConstants,
    geom: &GeometrySpec,
    spurs: &SpurEnvironment,
) -> Result<ResonatorModel> {
    let c0 = static_capacitance(geom)?;
    resonator_for_wavelength(table, consts, geom.lambda, c0, geom.q_assumed, spurs)
}

/// Resonator with wavelength `lambda` and static capacitance `c0`, lossless
/// electrodes and motional loss set by `q`.
pub fn resonator_for_wavelength(
    table: &DispersionTable,
    consts: &PlatformConstants,
    lambda: f64,
    c0: f64,
    q: f64,
    spurs: &SpurEnvironment,
) -> Result<ResonatorModel> {
    if !(q > 0.0) {
        return Err(Error::Invalid(format!("q must be positive (got {q})")));
    }
    let fr = table.frequency_for(consts, lambda)?;
    let k2 = table.coupling_for(consts, lambda)?;
    let cm = motional_capacitance_for(c0, k2)?;
    if cm < CM_FLOOR {
        return Err(Error::Degenerate(format!(
            "motional capacitance {cm:e} F is below the {CM_FLOOR:e} F floor"
        )));
    }
    let lm = 1.0 / ((2.0 * PI * fr).powi(2) * cm);
    let rm = (lm / cm).sqrt() / q;
    let main = MotionalBranch::new(rm, lm, cm, BranchKind::Main)?;
    let extra = spur_branches(&main, c0, spurs)?;
    ResonatorModel::new(c0, 0.0, 0.0, main, extra)
}
