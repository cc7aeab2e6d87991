//! Geometry-driven resonator construction and ladder synthesis.

mod geometry;
mod ladder;
mod presets;
mod spurs;

pub use geometry::{derive_resonator, resonator_for_wavelength, static_capacitance, GeometrySpec, CM_FLOOR};
pub use ladder::{
    initial_design, ladder_synthesize, synthesize_auto, CostWeights, DesignSpec, DesignVariables, SpecSource,
    SynthOptions, SynthResult,
};
pub use presets::band_presets;
pub use spurs::{leak_gain, spur_branches, LeakySpurs, OvertoneSpurs, SpurEnvironment, TransverseSpurs};
