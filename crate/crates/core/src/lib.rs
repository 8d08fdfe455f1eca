//! Self-induced back-action trapping of sub-wavelength particles in driven
//! optical cavities: closed-form trap physics, particle-cavity dynamics and
//! the parameter sweeps behind the scaling laws.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod error;
pub mod model;
pub mod numerics;
pub mod dynamics;
pub mod experiments;
pub mod trap;
pub mod validation;

pub use error::{Result, SibaError};
pub use model::{
    validate_configuration, CavityMode, ModeProfile, ParticleSpec, SiBlock, TabulatedProfile, TrapConfiguration,
    UnitSystem,
};
pub use dynamics::{SimulationOptions, StopRule, Trajectory, TrajectoryState};
pub use experiments::{Provenance, SweepTable};
pub use trap::TrapMetrics;
