//! Design and analysis of multiband acoustic-wave resonators and ladder
//! filters.
//!
//! The pipeline runs geometry → [`dispersion`] table lookup → mBVD
//! [`resonator`] model → ladder [`network`] S-parameters, with
//! [`synth`] closing the loop against band targets and [`extraction`]
//! recovering figures of merit from simulated or measured sweeps.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dispersion;
pub mod error;
pub mod extraction;
pub mod grid;
pub mod interp;
pub mod io;
pub mod network;
pub mod optim;
pub mod resonator;
pub mod synth;

pub use dispersion::{AcousticMode, DispersionTable, PlatformConstants, Regime};
pub use error::{Category, Error, Result};
pub use grid::FrequencyGrid;
pub use network::{FilterMetrics, LadderStage, LadderTopology, Placement, SParameterSet};
pub use resonator::{BranchKind, MotionalBranch, QualityFactor, Resonances, ResonatorModel};
