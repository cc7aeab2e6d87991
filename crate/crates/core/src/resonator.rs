//! Modified Butterworth-Van Dyke (mBVD) resonator model.
//!
//! A resonator is a static capacitance `c0` (with dielectric loss `r0` in
//! series) in parallel with one main motional RLC branch and any number of
//! spurious motional branches, the whole network seen through a series
//! electrode resistance `rs`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `π²/8`, the upper bound of the coupling coefficient.
pub const K2_MAX: f64 = PI * PI / 8.0;

/// What physical mode a motional branch stands in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchKind {
    Main,
    Transverse { order: u32 },
    Leaky,
    Overtone { order: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBranch")]
pub struct MotionalBranch {
    rm: f64,
    lm: f64,
    cm: f64,
    label: BranchKind,
}

#[derive(Deserialize)]
struct RawBranch {
    rm: f64,
    lm: f64,
    cm: f64,
    label: BranchKind,
}

impl TryFrom<RawBranch> for MotionalBranch {
    type Error = Error;

    fn try_from(raw: RawBranch) -> Result<Self> {
        MotionalBranch::new(raw.rm, raw.lm, raw.cm, raw.label)
    }
}

impl MotionalBranch {
    pub fn new(rm: f64, lm: f64, cm: f64, label: BranchKind) -> Result<Self> {
        if !(lm > 0.0 && lm.is_finite()) || !(cm > 0.0 && cm.is_finite()) {
            return Err(Error::Invalid(format!(
                "motional branch needs lm > 0 and cm > 0 (got lm={lm}, cm={cm})"
            )));
        }
        if !(rm >= 0.0 && rm.is_finite()) {
            return Err(Error::Invalid(format!("motional branch needs rm >= 0 (got {rm})")));
        }
        let branch = MotionalBranch { rm, lm, cm, label };
        let f = branch.resonance();
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::Invalid(format!("branch resonance {f} is not finite")));
        }
        Ok(branch)
    }

    pub fn rm(&self) -> f64 {
        self.rm
    }

    pub fn lm(&self) -> f64 {
        self.lm
    }

    pub fn cm(&self) -> f64 {
        self.cm
    }

    pub fn label(&self) -> BranchKind {
        self.label
    }

    /// Series resonance `1/(2π√(lm·cm))`.
    pub fn resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.lm * self.cm).sqrt())
    }

    /// Characteristic impedance `√(lm/cm)`.
    pub fn characteristic_impedance(&self) -> f64 {
        (self.lm / self.cm).sqrt()
    }

    pub fn admittance(&self, omega: f64) -> Complex64 {
        let z = Complex64::new(self.rm, omega * self.lm - 1.0 / (omega * self.cm));
        z.inv()
    }
}

/// Quality factor of the main branch; lossless branches have no finite Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QualityFactor {
    Finite(f64),
    Unbounded,
}

impl QualityFactor {
    pub fn finite(self) -> Option<f64> {
        match self {
            QualityFactor::Finite(q) => Some(q),
            QualityFactor::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonances {
    pub fr: f64,
    pub fa: f64,
}

impl Resonances {
    pub fn coupling(&self) -> Result<f64> {
        coupling_from_frequencies(self.fr, self.fa)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct ResonatorModel {
    c0: f64,
    r0: f64,
    rs: f64,
    main: MotionalBranch,
    #[serde(default)]
    spurs: Vec<MotionalBranch>,
}

#[derive(Deserialize)]
struct RawModel {
    c0: f64,
    #[serde(default)]
    r0: f64,
    #[serde(default)]
    rs: f64,
    main: MotionalBranch,
    #[serde(default)]
    spurs: Vec<MotionalBranch>,
}

impl TryFrom<RawModel> for ResonatorModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        ResonatorModel::new(raw.c0, raw.r0, raw.rs, raw.main, raw.spurs)
    }
}

impl ResonatorModel {
    pub fn new(c0: f64, r0: f64, rs: f64, main: MotionalBranch, spurs: Vec<MotionalBranch>) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::Invalid(format!("c0 must be positive (got {c0})")));
        }
        if !(r0 >= 0.0) || !(rs >= 0.0) {
            return Err(Error::Invalid(format!(
                "r0 and rs must be non-negative (got r0={r0}, rs={rs})"
            )));
        }
        if main.label != BranchKind::Main {
            return Err(Error::Invalid("main branch must be labeled main".into()));
        }
        let fr = main.resonance();
        for spur in &spurs {
            if spur.label == BranchKind::Main {
                return Err(Error::Invalid("only one branch may be labeled main".into()));
            }
            if ((spur.resonance() - fr) / fr).abs() < 1e-12 {
                return Err(Error::Invalid(format!(
                    "spur {:?} resonates at the main resonance {fr} Hz",
                    spur.label
                )));
            }
        }
        Ok(ResonatorModel {
            c0,
            r0,
            rs,
            main,
            spurs,
        })
    }

    /// Lossless single-branch model, the common starting point in tests and
    /// examples.
    pub fn bvd(c0: f64, lm: f64, cm: f64, rm: f64) -> Result<Self> {
        Self::new(
            c0,
            0.0,
            0.0,
            MotionalBranch::new(rm, lm, cm, BranchKind::Main)?,
            Vec::new(),
        )
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn rs(&self) -> f64 {
        self.rs
    }

    pub fn main(&self) -> &MotionalBranch {
        &self.main
    }

    pub fn spurs(&self) -> &[MotionalBranch] {
        &self.spurs
    }

    pub fn with_spurs(&self, spurs: Vec<MotionalBranch>) -> Result<Self> {
        Self::new(self.c0, self.r0, self.rs, self.main, spurs)
    }

    pub fn with_rs(&self, rs: f64) -> Result<Self> {
        Self::new(self.c0, self.r0, rs, self.main, self.spurs.clone())
    }

    /// Input admittance at frequency `f` (Hz).
    pub fn admittance(&self, f: f64) -> Result<Complex64> {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::Domain(format!("frequency must be positive (got {f})")));
        }
        Ok(self.admittance_at(f))
    }

    pub(crate) fn admittance_at(&self, f: f64) -> Complex64 {
        let omega = 2.0 * PI * f;
        let jwc0 = Complex64::new(0.0, omega * self.c0);
        let mut core = jwc0 / (1.0 + jwc0 * self.r0);
        core += self.main.admittance(omega);
        for spur in &self.spurs {
            core += spur.admittance(omega);
        }
        if self.rs == 0.0 {
            return core;
        }
        if self.rs.is_infinite() {
            return Complex64::new(0.0, 0.0);
        }
        core / (1.0 + self.rs * core)
    }

    pub fn impedance(&self, f: f64) -> Result<Complex64> {
        Ok(self.admittance(f)?.inv())
    }

    /// Closed-form lossless resonance and anti-resonance of the main branch.
    pub fn resonance_frequencies(&self) -> Resonances {
        let fr = self.main.resonance();
        let fa = fr * (1.0 + self.main.cm / self.c0).sqrt();
        Resonances { fr, fa }
    }

    /// Motional quality factor `√(lm/cm)/rm`.
    pub fn quality_factor(&self) -> QualityFactor {
        if self.main.rm == 0.0 {
            QualityFactor::Unbounded
        } else {
            QualityFactor::Finite(self.main.characteristic_impedance() / self.main.rm)
        }
    }

    pub fn coupling(&self) -> f64 {
        let r = self.resonance_frequencies();
        coupling_ratio(r.fa / r.fr)
    }
}

/// Effective coupling `k² = (π²/8)(fa² − fr²)/fa²`.
pub fn coupling_from_frequencies(fr: f64, fa: f64) -> Result<f64> {
    if !(fr > 0.0) || !(fa > fr) || !fa.is_finite() {
        return Err(Error::Domain(format!(
            "coupling needs 0 < fr < fa (got fr={fr}, fa={fa})"
        )));
    }
    Ok(coupling_ratio(fa / fr))
}

fn coupling_ratio(ratio: f64) -> f64 {
    K2_MAX * (1.0 - 1.0 / (ratio * ratio))
}

/// Inverse of [`coupling_from_frequencies`]: the `fa/fr` ratio for a given k².
pub fn frequency_ratio_for_coupling(k2: f64) -> Result<f64> {
    if !(k2 > 0.0 && k2 < K2_MAX) {
        return Err(Error::Domain(format!("k2 must lie in (0, π²/8) (got {k2})")));
    }
    Ok(1.0 / (1.0 - k2 / K2_MAX).sqrt())
}

/// Motional capacitance giving coupling `k2` against static capacitance `c0`.
pub fn motional_capacitance_for(c0: f64, k2: f64) -> Result<f64> {
    if !(0.0..K2_MAX).contains(&k2) {
        return Err(Error::Domain(format!("k2 must lie in [0, π²/8) (got {k2})")));
    }
    Ok(c0 * (1.0 / (1.0 - k2 / K2_MAX) - 1.0))
}
