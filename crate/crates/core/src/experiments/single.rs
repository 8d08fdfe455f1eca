//! Single-mode sweeps in the fundamental Fabry-Perot mode.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{retune, Provenance, SweepTable};
use crate::dynamics::{experienced_intensity, intensity_ratio_high_ba, simulate_periods};
use crate::error::{Result, SibaError};
use crate::model::{validate_configuration, CavityMode, ModeProfile, TrapConfiguration};
use crate::numerics::{bisect, linspace, logspace};
use crate::trap::{photon_number, potential, trap_depth, trap_metrics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeSweep {
    /// Linewidths and drive shared by every curve; profile, `η` and `Δ̃` are replaced.
    pub base: CavityMode,
    pub etas: Vec<f64>,
    pub x_r: f64,
    pub points: usize,
}

impl Default for RegimeSweep {
    fn default() -> Self {
        RegimeSweep {
            base: CavityMode::new(ModeProfile::fundamental(), 1.0, 0.0),
            etas: vec![0.1, 10.0, 50.0],
            x_r: FRAC_PI_4,
            points: 801,
        }
    }
}

fn require_fundamental(mode: &CavityMode) -> Result<()> {
    if mode.profile != ModeProfile::fundamental() {
        return Err(SibaError::validation("base.profile", "this sweep needs the fundamental cos² mode"));
    }
    Ok(())
}

/// Potential and seen intensity `n(x)f(x)` across the domain for each `η`, with
/// the laser resonant at `±x_r`. Long format: one row per `(η, x)`.
pub fn sweep_regimes(s: &RegimeSweep) -> Result<SweepTable> {
    require_fundamental(&s.base)?;
    if s.points < 2 {
        return Err(SibaError::validation("points", "need at least two grid points"));
    }
    let prov = Provenance::of(s, &[("etas", s.etas.len()), ("points", s.points)])?;
    let mut t = SweepTable::new("fig2", &["eta", "x", "f", "n", "i_seen", "u", "depth"], prov);
    for &eta in &s.etas {
        let mode = retune(&s.base, ModeProfile::fundamental(), eta, s.x_r);
        let cfg = validate_configuration(&TrapConfiguration::single(mode))?;
        let m = &cfg.modes[0];
        let depth = trap_depth(&cfg)?;
        let (lo, hi) = cfg.domain();
        for x in linspace(lo, hi, s.points) {
            let f = m.profile.value(x);
            let n = photon_number(m, x);
            t.push(vec![eta, x, f, n, n * f, potential(&cfg, x), depth]);
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EtaDepthSweep {
    pub base: CavityMode,
    pub x_r: f64,
    pub ekin_fracs: Vec<f64>,
    pub etas: Vec<f64>,
    /// `η` of the tweezer reference whose depth every point is matched to.
    pub tweezer_eta: f64,
}

impl Default for EtaDepthSweep {
    fn default() -> Self {
        EtaDepthSweep {
            base: CavityMode::new(ModeProfile::fundamental(), 1.0, 0.0),
            x_r: FRAC_PI_4,
            ekin_fracs: vec![0.1],
            etas: logspace(1e-2, 1e2, 25),
            tweezer_eta: 0.01,
        }
    }
}

pub const ETA_DEPTH_COLUMNS: [&str; 13] = [
    "eta",
    "ekin_frac",
    "power_scale",
    "depth",
    "x_t",
    "confinement",
    "period",
    "intensity",
    "intensity_over_ekin",
    "ratio",
    "ratio_sim_tweezer",
    "ratio_high_ba",
    "ratio_high_ba_xr",
];

struct Point {
    x_t: f64,
    confinement: f64,
    period: f64,
    intensity: f64,
}

fn simulate_point(cfg: &TrapConfiguration, e_kin: f64) -> Result<Point> {
    let m = trap_metrics(cfg, e_kin)?;
    let traj = simulate_periods(cfg, m.minimum_position, e_kin, 1)?;
    let j = experienced_intensity(&traj, cfg)?;
    Ok(Point {
        x_t: 0.5 * m.confinement,
        confinement: m.confinement,
        period: j.period,
        intensity: j.raw,
    })
}

/// Drive power factor making the trap exactly `target` deep.
fn match_depth(mode: &CavityMode, target: f64) -> Result<f64> {
    let depth_at = |s: f64| -> Result<f64> { trap_depth(&TrapConfiguration::single(mode.clone().scale_power(s))) };
    let guess = target / depth_at(1.0)?;
    let g = |s: f64| depth_at(s).map(|d| d - target).unwrap_or(f64::NAN);
    let (lo, hi) = (0.5 * guess, 2.0 * guess);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(SibaError::validation("power", format!("cannot match trap depth {target} by scaling the drive")));
    }
    bisect(g, lo, hi, 1e-15 * guess, 1e-14 * target)
}

/// Time-averaged experienced intensity against `η` at a trap depth held equal
/// to that of a tweezer-regime reference by adjusting the drive power.
///
/// `ratio` normalizes with the tweezer value `⟨I_T⟩ = δU_T` of a tightly
/// trapped particle; `ratio_sim_tweezer` with the simulated reference at the
/// same `E_kin/δU`. `ratio_high_ba` is the high back-action estimate at the
/// simulated turning point and `ratio_high_ba_xr` the same at the resonant
/// position.
pub fn sweep_eta_fixed_depth(s: &EtaDepthSweep) -> Result<SweepTable> {
    require_fundamental(&s.base)?;
    if s.etas.is_empty() || s.ekin_fracs.is_empty() {
        return Err(SibaError::validation("grid", "eta and kinetic-energy grids must be non-empty"));
    }
    if let Some(&f) = s.ekin_fracs.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
        return Err(SibaError::validation("ekin_fracs", format!("fractions must lie in (0, 1), got {f}")));
    }
    let prov = Provenance::of(s, &[("etas", s.etas.len()), ("ekin_fracs", s.ekin_fracs.len())])?;
    let fundamental = ModeProfile::fundamental();
    let tweezer_mode = retune(&s.base, fundamental.clone(), s.tweezer_eta, s.x_r);
    let tweezer = validate_configuration(&TrapConfiguration::single(tweezer_mode))?;
    let depth_t = trap_depth(&tweezer)?;
    let references: Vec<Point> =
        s.ekin_fracs.par_iter().map(|&f| simulate_point(&tweezer, f * depth_t)).collect::<Result<_>>()?;

    let scales: Vec<(CavityMode, f64)> = s
        .etas
        .par_iter()
        .map(|&eta| {
            let mode = retune(&s.base, fundamental.clone(), eta, s.x_r);
            let k = match_depth(&mode, depth_t)?;
            Ok((mode.scale_power(k), k))
        })
        .collect::<Result<_>>()?;

    let grid: Vec<(usize, usize)> =
        (0..s.ekin_fracs.len()).flat_map(|i| (0..s.etas.len()).map(move |j| (i, j))).collect();
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&(i, j)| {
            let frac = s.ekin_fracs[i];
            let (mode, k) = &scales[j];
            let cfg = TrapConfiguration::single(mode.clone());
            let depth = trap_depth(&cfg)?;
            let e = frac * depth_t;
            let p = simulate_point(&cfg, e)?;
            let ratio_high_ba = intensity_ratio_high_ba(mode, p.x_t, frac)?;
            let ratio_high_ba_xr = intensity_ratio_high_ba(mode, s.x_r, frac)?;
            Ok(vec![
                s.etas[j],
                frac,
                *k,
                depth,
                p.x_t,
                p.confinement,
                p.period,
                p.intensity,
                p.intensity / e,
                p.intensity / depth_t,
                p.intensity / references[i].intensity,
                ratio_high_ba,
                ratio_high_ba_xr,
            ])
        })
        .collect::<Result<_>>()?;

    let mut t = SweepTable::new("fig3", &ETA_DEPTH_COLUMNS, prov);
    for r in rows {
        t.push(r);
    }
    Ok(t)
}
