//! Behavioral spurious-mode branches and their mitigation switches.
//!
//! Coupling and offset numbers here are calibration knobs, not physical
//! predictions: transverse orders roll off as `1/m²`, the piston border
//! scales transverse coupling by `piston_factor`, the leaky branch fades
//! linearly to nothing as the reflector pitch ratio drops from 1.0 to 0.9,
//! and embedded electrodes remove the overtone branch.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonator::{BranchKind, MotionalBranch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransverseSpurs {
    pub enabled: bool,
    /// Odd transverse orders `m`.
    pub orders: Vec<u32>,
    /// Coupling relative to the main branch, before the `1/m²` roll-off.
    pub relative_coupling: Vec<f64>,
    /// Resonance offset above the main resonance, as a fraction of fr.
    pub relative_offset: Vec<f64>,
    /// Piston-shaped electrodes (border regions at finger tips and roots).
    pub piston: bool,
    pub piston_factor: f64,
}

impl Default for TransverseSpurs {
    fn default() -> Self {
        TransverseSpurs {
            enabled: false,
            orders: vec![3, 5, 7],
            relative_coupling: vec![0.3, 0.3, 0.3],
            relative_offset: vec![0.012, 0.028, 0.048],
            piston: false,
            piston_factor: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LeakySpurs {
    pub enabled: bool,
    /// Reflector pitch over IDT pitch.
    pub pr_over_pi: f64,
    pub relative_coupling: f64,
    /// Placement above the anti-resonance, as a fraction of fa.
    pub offset_above_fa: f64,
}

impl Default for LeakySpurs {
    fn default() -> Self {
        LeakySpurs {
            enabled: false,
            pr_over_pi: 1.0,
            relative_coupling: 0.05,
            offset_above_fa: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OvertoneSpurs {
    pub enabled: bool,
    pub embedded_idt: bool,
    pub relative_coupling: f64,
    /// Overtone resonance as a multiple of fr. A guess; the source data
    /// leaves it unlabeled.
    pub frequency_factor: f64,
}

impl Default for OvertoneSpurs {
    fn default() -> Self {
        OvertoneSpurs {
            enabled: false,
            embedded_idt: false,
            relative_coupling: 0.1,
            frequency_factor: 1.5,
        }
    }
}

/// Which spurious groups to attach to a derived resonator. The default has
/// every group disabled.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SpurEnvironment {
    pub transverse: TransverseSpurs,
    pub leaky: LeakySpurs,
    pub overtone: OvertoneSpurs,
}

impl SpurEnvironment {
    /// All groups enabled with no mitigation applied.
    pub fn unmitigated() -> Self {
        let mut env = SpurEnvironment::default();
        env.transverse.enabled = true;
        env.leaky.enabled = true;
        env.overtone.enabled = true;
        env
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.transverse;
        if t.relative_coupling.len() != t.orders.len() || t.relative_offset.len() != t.orders.len() {
            return Err(Error::Invalid(
                "transverse orders, relative_coupling and relative_offset must have equal length".into(),
            ));
        }
        if let Some(m) = t.orders.iter().find(|m| **m % 2 == 0) {
            return Err(Error::Invalid(format!("transverse order {m} is not odd")));
        }
        let couplings = t.relative_coupling.iter().chain([
            &self.leaky.relative_coupling,
            &self.overtone.relative_coupling,
            &t.piston_factor,
        ]);
        for c in couplings {
            if !(0.0..=1.0).contains(c) {
                return Err(Error::Invalid(format!("coupling {c} outside [0, 1]")));
            }
        }
        let offsets = t.relative_offset.iter().chain([&self.leaky.offset_above_fa]);
        for o in offsets {
            if !(*o > 0.0) {
                return Err(Error::Invalid(format!("offset {o} must be positive")));
            }
        }
        if !(self.overtone.frequency_factor > 1.0) {
            return Err(Error::Invalid(format!(
                "overtone frequency factor {} must exceed 1",
                self.overtone.frequency_factor
            )));
        }
        let p = self.leaky.pr_over_pi;
        if !(p > 0.5 && p <= 1.2) {
            return Err(Error::Invalid(format!("pr_over_pi = {p} outside (0.5, 1.2]")));
        }
        Ok(())
    }
}

/// Relative leaky-mode coupling against reflector pitch ratio: 0 at or
/// below 0.9, 1 at or above 1.0, linear in between.
pub fn leak_gain(pr_over_pi: f64) -> f64 {
    if pr_over_pi >= 1.0 {
        1.0
    } else if pr_over_pi <= 0.9 {
        0.0
    } else {
        (pr_over_pi - 0.9) / 0.1
    }
}

/// Spurious branches for a main branch in parallel with `c0`.
///
/// Every spur shares the main branch's Q, so its peak conductance scales
/// directly with its motional capacitance.
pub fn spur_branches(main: &MotionalBranch, c0: f64, spurs: &SpurEnvironment) -> Result<Vec<MotionalBranch>> {
    spurs.validate()?;
    let fr = main.resonance();
    let fa = fr * (1.0 + main.cm() / c0).sqrt();
    let q = if main.rm() > 0.0 {
        Some(main.characteristic_impedance() / main.rm())
    } else {
        None
    };
    let branch = |f: f64, cm: f64, label: BranchKind| -> Result<MotionalBranch> {
        let lm = 1.0 / ((2.0 * PI * f).powi(2) * cm);
        let rm = q.map_or(0.0, |q| (lm / cm).sqrt() / q);
        MotionalBranch::new(rm, lm, cm, label)
    };

    let mut out = Vec::new();
    let t = &spurs.transverse;
    if t.enabled {
        let mitigation = if t.piston { t.piston_factor } else { 1.0 };
        for ((&m, &rc), &off) in t.orders.iter().zip(&t.relative_coupling).zip(&t.relative_offset) {
            let cm = main.cm() * rc / (m * m) as f64 * mitigation;
            if cm > 0.0 {
                out.push(branch(fr * (1.0 + off), cm, BranchKind::Transverse { order: m })?);
            }
        }
    }
    let l = &spurs.leaky;
    if l.enabled {
        let cm = main.cm() * l.relative_coupling * leak_gain(l.pr_over_pi);
        if cm > 0.0 {
            out.push(branch(fa * (1.0 + l.offset_above_fa), cm, BranchKind::Leaky)?);
        }
    }
    let o = &spurs.overtone;
    if o.enabled && !o.embedded_idt {
        let cm = main.cm() * o.relative_coupling;
        if cm > 0.0 {
            out.push(branch(fr * o.frequency_factor, cm, BranchKind::Overtone { order: 1 })?);
        }
    }
    Ok(out)
}
