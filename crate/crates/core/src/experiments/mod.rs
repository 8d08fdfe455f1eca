//! Named parameter sweeps and the tables they produce.
//!
//! Every sweep takes a serializable settings struct. The settings, the crate
//! version and the grid sizes form the [`Provenance`] stored with the table;
//! [`replay`] re-runs a sweep from that record alone.

mod single;
mod size;
mod table;
mod two_mode;

pub use single::{sweep_eta_fixed_depth, sweep_regimes, EtaDepthSweep, RegimeSweep, ETA_DEPTH_COLUMNS};
pub use size::{sweep_eta_vs_size, EtaSizeSweep, ETA_SIZE_COLUMNS};
pub use table::{hash_json, LabelColumn, Provenance, SweepTable};
pub use two_mode::{
    compare_with_tweezer, fit_regimes, optimize_harmonic, HarmonicComparison, sweep_two_mode, wall_geometry, HarmonicDesign, Regime, RegimeFit,
    RegimeFits, TwoModeSweep, BALANCED_MINIMUM, HARMONIC_MIN_LEVEL, HIGH_BA_MAX_LEVEL, TWO_MODE_COLUMNS,
};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Result, SibaError};
use crate::model::{CavityMode, ModeProfile};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Settings of a sweep: its table name and how to run it.
pub trait Sweep: Serialize + DeserializeOwned {
    const OPERATION: &'static str;
    fn run(&self) -> Result<SweepTable>;
}

impl Sweep for RegimeSweep {
    const OPERATION: &'static str = "sweep_regimes";
    fn run(&self) -> Result<SweepTable> {
        sweep_regimes(self)
    }
}

impl Sweep for EtaDepthSweep {
    const OPERATION: &'static str = "sweep_eta_fixed_depth";
    fn run(&self) -> Result<SweepTable> {
        sweep_eta_fixed_depth(self)
    }
}

impl Sweep for TwoModeSweep {
    const OPERATION: &'static str = "sweep_two_mode";
    fn run(&self) -> Result<SweepTable> {
        sweep_two_mode(self)
    }
}

impl Sweep for EtaSizeSweep {
    const OPERATION: &'static str = "sweep_eta_vs_size";
    fn run(&self) -> Result<SweepTable> {
        sweep_eta_vs_size(self)
    }
}

/// Re-runs the sweep described by a provenance record.
pub fn replay(p: &Provenance) -> Result<SweepTable> {
    fn go<S: Sweep>(p: &Provenance) -> Result<SweepTable> {
        let s: S = serde_json::from_value(p.settings.clone())
            .map_err(|e| SibaError::validation("provenance.settings", e.to_string()))?;
        s.run()
    }
    match p.operation.as_str() {
        RegimeSweep::OPERATION => go::<RegimeSweep>(p),
        EtaDepthSweep::OPERATION => go::<EtaDepthSweep>(p),
        TwoModeSweep::OPERATION => go::<TwoModeSweep>(p),
        EtaSizeSweep::OPERATION => go::<EtaSizeSweep>(p),
        other => Err(SibaError::validation("provenance.operation", format!("unknown operation {other:?}"))),
    }
}

/// `base` with a new profile and `η`, detuned so the laser is resonant at `x_r`.
fn retune(base: &CavityMode, profile: ModeProfile, eta: f64, x_r: f64) -> CavityMode {
    let mut m = base.clone();
    m.detuning_tilde = -eta * profile.value(x_r);
    m.profile = profile;
    m.eta = eta;
    m
}
