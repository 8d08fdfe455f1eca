//! Two-mode traps in the first two Fabry-Perot modes, where each mode provides
//! one wall of the trap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{retune, Provenance, SweepTable};
use crate::dynamics::{experienced_intensity, simulate_periods};
use crate::error::{Result, SibaError};
use crate::model::{validate_configuration, CavityMode, ModeProfile, TrapConfiguration};
use crate::numerics::{bisect, linear_fit, LinearFit};
use crate::trap::{mode_force, mode_intensity, spring_constant_analytic, spring_constant_numeric, trap_metrics_near};

/// Position where `cos²` and `sin²2x` have opposite slopes of equal size and
/// `Σ f_i'² / Σ(−f_i'') = 1/4`: `cos 2x = 1/4`.
pub const BALANCED_MINIMUM: f64 = 0.659_058_035_826_409;

/// `cos²` resonant at `x0 + d/2` (right wall) and `sin²2x` resonant at
/// `x0 − d/2` (left wall), both with back-action parameter `eta`.
pub fn wall_geometry(base: &CavityMode, eta: f64, d: f64, x0: f64) -> TrapConfiguration {
    TrapConfiguration::two_mode(
        retune(base, ModeProfile::fundamental(), eta, x0 + 0.5 * d),
        retune(base, ModeProfile::second_harmonic(), eta, x0 - 0.5 * d),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Tweezer,
    #[serde(rename = "harmonic-BA")]
    HarmonicBackAction,
    #[serde(rename = "high-BA")]
    HighBackAction,
}

impl Regime {
    /// Label from the wall separation in units of the peak half-width `2/η`.
    pub fn classify(kd: f64, eta: f64) -> Regime {
        let m = kd * eta / 2.0;
        if m < 0.05 {
            Regime::Tweezer
        } else if m < 3.0 {
            Regime::HarmonicBackAction
        } else {
            Regime::HighBackAction
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Tweezer => "tweezer",
            Regime::HarmonicBackAction => "harmonic-BA",
            Regime::HighBackAction => "high-BA",
        }
    }

    pub fn from_label(s: &str) -> Option<Regime> {
        [Regime::Tweezer, Regime::HarmonicBackAction, Regime::HighBackAction].into_iter().find(|r| r.label() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoModeSweep {
    pub base: CavityMode,
    pub eta: f64,
    /// Trap depth in units of `E_kin`; the drive power is set per point to
    /// reach it.
    pub power_levels: Vec<f64>,
    /// Wall separations in units of `2/η`.
    pub wall_multiples: Vec<f64>,
    pub e_kin: f64,
    pub x0: f64,
}

impl Default for TwoModeSweep {
    fn default() -> Self {
        let g = (2.0 * BALANCED_MINIMUM).sin();
        TwoModeSweep {
            base: CavityMode::new(ModeProfile::fundamental(), 1.0, 0.0),
            eta: 100.0,
            power_levels: vec![1.1, 2.0, 5.0, 10.0, 30.0, 100.0, 1e3, 1e4],
            wall_multiples: vec![0.0, 0.002, 0.5, 0.75, 1.0 / g, 1.5, 2.0, 4.0, 5.0, 6.0, 7.5, 10.0],
            e_kin: 1.0,
            x0: BALANCED_MINIMUM,
        }
    }
}

pub const TWO_MODE_COLUMNS: [&str; 10] = [
    "wall_multiple",
    "kd",
    "power_level",
    "power_scale",
    "depth",
    "ekin_over_depth",
    "x0",
    "k_dx",
    "intensity_over_ekin",
    "flagged",
];

/// True when the slope of `f` vanishes anywhere between `a` and `b`.
fn slope_vanishes_between(profile: &ModeProfile, a: f64, b: f64) -> bool {
    let (a, b) = (a.min(b), a.max(b));
    let n = 64;
    let mut prev = profile.slope(a);
    if prev.abs() < 1e-12 {
        return true;
    }
    for i in 1..=n {
        let s = profile.slope(a + (b - a) * i as f64 / n as f64);
        if s.abs() < 1e-12 || s.signum() != prev.signum() {
            return true;
        }
        prev = s;
    }
    false
}

fn two_mode_point(s: &TwoModeSweep, multiple: f64, level: f64) -> Result<(Vec<f64>, Regime)> {
    let d = multiple * 2.0 / s.eta;
    let unit = wall_geometry(&s.base, s.eta, d, s.x0);
    let depth1 = trap_metrics_near(&unit, 0.0, s.x0)?.depth;
    let scale = level * s.e_kin / depth1;
    let cfg = unit.scale_power(scale);
    let m = trap_metrics_near(&cfg, s.e_kin, s.x0)?;
    let traj = simulate_periods(&cfg, m.minimum_position, s.e_kin, 1)?;
    let j = experienced_intensity(&traj, &cfg)?;
    let walls = [s.x0 + 0.5 * d, s.x0 - 0.5 * d];
    let flagged = cfg
        .modes
        .iter()
        .zip(walls)
        .any(|(mode, w)| slope_vanishes_between(&mode.profile, w, m.minimum_position));
    let row = vec![
        multiple,
        d,
        level,
        scale,
        m.depth,
        s.e_kin / m.depth,
        m.minimum_position,
        m.confinement,
        j.normalized,
        if flagged { 1.0 } else { 0.0 },
    ];
    Ok((row, Regime::classify(d, s.eta)))
}

/// Experienced intensity against confinement over a grid of wall separations
/// and powers at fixed kinetic energy. Rows run over separations, then powers.
pub fn sweep_two_mode(s: &TwoModeSweep) -> Result<SweepTable> {
    if !(s.eta > 0.0) || !(s.e_kin > 0.0) {
        return Err(SibaError::validation("eta/e_kin", "back-action parameter and kinetic energy must be positive"));
    }
    if s.power_levels.is_empty() || s.wall_multiples.is_empty() {
        return Err(SibaError::validation("grid", "power and separation grids must be non-empty"));
    }
    if let Some(&l) = s.power_levels.iter().find(|&&l| !(l > 1.0) || !l.is_finite()) {
        return Err(SibaError::validation("power_levels", format!("depth/E_kin must exceed 1, got {l}")));
    }
    if let Some(&m) = s.wall_multiples.iter().find(|&&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(SibaError::validation("wall_multiples", format!("separations must be non-negative, got {m}")));
    }
    validate_configuration(&wall_geometry(&s.base, s.eta, 0.0, s.x0))?;
    let prov = Provenance::of(s, &[("wall_multiples", s.wall_multiples.len()), ("power_levels", s.power_levels.len())])?;
    let grid: Vec<(f64, f64)> =
        s.wall_multiples.iter().flat_map(|&m| s.power_levels.iter().map(move |&l| (m, l))).collect();
    let points: Vec<(Vec<f64>, Regime)> =
        grid.par_iter().map(|&(m, l)| two_mode_point(s, m, l)).collect::<Result<_>>()?;
    let mut t = SweepTable::new("fig5", &TWO_MODE_COLUMNS, prov);
    let mut labels = Vec::with_capacity(points.len());
    for (row, regime) in points {
        t.push(row);
        labels.push(regime.label().to_string());
    }
    Ok(t.with_labels("regime", labels))
}

/// Smallest depth/E_kin used for the slope fits of the harmonic regimes.
pub const HARMONIC_MIN_LEVEL: f64 = 10.0;
/// Largest depth/E_kin used for the high back-action fit.
pub const HIGH_BA_MAX_LEVEL: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeFit {
    pub regime: Regime,
    /// `ln(⟨I⟩/E_kin)` against `ln(kδx)`.
    pub fit: LinearFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeFits {
    pub tweezer: RegimeFit,
    pub harmonic: RegimeFit,
    pub high: RegimeFit,
    /// Ratio of the tweezer to the harmonic back-action intercept with both
    /// slopes fixed at −2.
    pub suppression: f64,
}

/// Log-log least-squares fits per labeled regime of a [`sweep_two_mode`] table.
/// The harmonic regimes use points with `depth/E_kin ≥ 10`, the high
/// back-action regime points with `depth/E_kin ≤ 1.25`.
pub fn fit_regimes(t: &SweepTable) -> Result<RegimeFits> {
    let col = |n: &str| t.column(n).ok_or_else(|| SibaError::validation("table", format!("missing column {n}")));
    let (dx, ii, level) = (col("k_dx")?, col("intensity_over_ekin")?, col("power_level")?);
    let labels = t.labels.as_ref().ok_or_else(|| SibaError::validation("table", "missing regime labels"))?;
    let select = |r: Regime| -> Vec<usize> {
        (0..t.rows.len())
            .filter(|&i| Regime::from_label(&labels.values[i]) == Some(r))
            .filter(|&i| match r {
                Regime::HighBackAction => level[i] <= HIGH_BA_MAX_LEVEL,
                _ => level[i] >= HARMONIC_MIN_LEVEL,
            })
            .collect()
    };
    let fit = |r: Regime, idx: &[usize]| -> Result<RegimeFit> {
        let xs: Vec<f64> = idx.iter().map(|&i| dx[i].ln()).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| ii[i].ln()).collect();
        let fit = linear_fit(&xs, &ys)
            .ok_or_else(|| SibaError::validation("table", format!("too few {} points to fit", r.label())))?;
        Ok(RegimeFit { regime: r, fit })
    };
    let (tw, hb, hi) =
        (select(Regime::Tweezer), select(Regime::HarmonicBackAction), select(Regime::HighBackAction));
    let offset = |idx: &[usize]| idx.iter().map(|&i| ii[i].ln() + 2.0 * dx[i].ln()).sum::<f64>() / idx.len() as f64;
    let tweezer = fit(Regime::Tweezer, &tw)?;
    let harmonic = fit(Regime::HarmonicBackAction, &hb)?;
    Ok(RegimeFits {
        suppression: (offset(&tw) - offset(&hb)).exp(),
        tweezer,
        harmonic,
        high: fit(Regime::HighBackAction, &hi)?,
    })
}

/// Two-mode configuration tuned for maximal back-action stiffness at `x0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicDesign {
    pub config: TrapConfiguration,
    pub x0: f64,
    pub resonant_positions: Vec<f64>,
    pub detunings: Vec<f64>,
    /// Drive power of each mode relative to the input configuration.
    pub power_scales: Vec<f64>,
    pub r: Vec<f64>,
    /// Sum of the per-mode analytic spring constants at `r_i = 1`.
    pub k_predicted: f64,
    pub k_numeric: f64,
    /// `⟨I_hb⟩/⟨I_T⟩ = Σ(−f_i'') / Σ η_i f_i'²` at `x0` for equal confinement
    /// and kinetic energy.
    pub intensity_ratio_predicted: f64,
}

/// Places each mode's resonant position on the side where its profile falls
/// off, at the distance giving `r_i = |η f_i'(x_ri)(x_ri − x0)| = 1`, and
/// rescales the second drive so the two forces cancel at `x0`.
pub fn optimize_harmonic(config: &TrapConfiguration, x0: f64) -> Result<HarmonicDesign> {
    let config = validate_configuration(config)?;
    if config.modes.len() != 2 {
        return Err(SibaError::validation("modes", "harmonic optimization needs exactly two modes"));
    }
    let (lo, hi) = config.domain();
    if !(x0 > lo && x0 < hi) {
        return Err(SibaError::Domain { x: x0, lo, hi });
    }
    let mut modes = config.modes.clone();
    let mut resonant = Vec::new();
    for (i, m) in modes.iter_mut().enumerate() {
        let s0 = m.profile.slope(x0);
        if s0.abs() < 1e-9 {
            return Err(SibaError::validation(
                "x0",
                format!("mode {i} has a vanishing slope at x0 = {x0}; back-action cannot stiffen the trap there"),
            ));
        }
        if !(m.eta > 0.0) {
            return Err(SibaError::validation("eta", format!("mode {i} needs a positive back-action parameter")));
        }
        let dir = -s0.signum();
        let edge = if dir > 0.0 { hi } else { lo };
        // Stop short of the first point where the slope vanishes.
        let n = 2048;
        let mut reach = (edge - x0).abs();
        for k in 1..=n {
            let x = x0 + dir * reach * k as f64 / n as f64;
            if m.profile.slope(x).signum() != s0.signum() {
                reach *= (k - 1) as f64 / n as f64;
                break;
            }
        }
        let eta = m.eta;
        let r_of = |delta: f64| eta * m.profile.slope(x0 + dir * delta).abs() * delta - 1.0;
        let (a, b) = (0.0, reach);
        let b = {
            // r rises from 0 and falls back to 0 at a slope zero; take the first crossing.
            let mut hi = b;
            let steps = 256;
            for k in 1..=steps {
                let d = b * k as f64 / steps as f64;
                if r_of(d) > 0.0 {
                    hi = d;
                    break;
                }
            }
            hi
        };
        if !(r_of(b) > 0.0) {
            return Err(SibaError::NoTrap(format!("mode {i} cannot reach r = 1 before its slope vanishes")));
        }
        let delta = bisect(r_of, a, b, 1e-15, 0.0)?;
        let x_r = x0 + dir * delta;
        m.detuning_tilde = -m.eta * m.profile.value(x_r);
        resonant.push(x_r);
    }
    let f0 = mode_force(&modes[0], x0);
    let f1 = mode_force(&modes[1], x0);
    if !(f0 * f1 < 0.0) {
        return Err(SibaError::validation("modes", "both modes push the particle the same way at x0"));
    }
    let k = -f0 / f1;
    modes[1] = modes[1].clone().scale_power(k);
    let mut out = config.clone();
    out.modes = modes;
    let out = validate_configuration(&out)?;

    let mut k_predicted = 0.0;
    let mut r = Vec::new();
    for (m, &x_r) in out.modes.iter().zip(&resonant) {
        let a = spring_constant_analytic(m, x0, x_r, mode_intensity(m, x0))?;
        k_predicted += a.terms.total();
        r.push(a.r);
    }
    let curvature: f64 = out.modes.iter().map(|m| -m.profile.eval(x0).d2).sum();
    let slope_sq: f64 = out.modes.iter().map(|m| m.eta * m.profile.slope(x0).powi(2)).sum();
    Ok(HarmonicDesign {
        k_numeric: spring_constant_numeric(&out, x0)?,
        detunings: out.modes.iter().map(|m| m.detuning_tilde).collect(),
        config: out,
        x0,
        resonant_positions: resonant,
        power_scales: vec![1.0, k],
        r,
        k_predicted,
        intensity_ratio_predicted: curvature / slope_sq,
    })
}

/// Harmonic back-action trap against a tweezer-regime trap of the same
/// geometry, at equal kinetic energy and equal confinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicComparison {
    pub e_kin: f64,
    pub confinement: f64,
    /// Drive power of the tweezer reference relative to its balanced design.
    pub tweezer_power: f64,
    pub tweezer_confinement: f64,
    pub intensity_hb: f64,
    pub intensity_t: f64,
    pub ratio: f64,
}

/// Same resonant positions and force balance as `design` with every `η`
/// replaced by `eta`.
fn tweezer_counterpart(design: &HarmonicDesign, eta: f64) -> Result<TrapConfiguration> {
    let mut cfg = design.config.clone();
    for (m, &x_r) in cfg.modes.iter_mut().zip(&design.resonant_positions) {
        m.eta = eta;
        m.detuning_tilde = -eta * m.profile.value(x_r);
    }
    let (f0, f1) = (mode_force(&cfg.modes[0], design.x0), mode_force(&cfg.modes[1], design.x0));
    if !(f0 * f1 < 0.0) {
        return Err(SibaError::validation("modes", "tweezer counterpart has no force balance at x0"));
    }
    cfg.modes[1] = cfg.modes[1].clone().scale_power(-f0 / f1);
    validate_configuration(&cfg)
}

/// Simulates `design` at `E_kin = e_frac·δU` and a tweezer counterpart
/// (`η = tweezer_eta`) whose power is bisected to give the same confinement.
pub fn compare_with_tweezer(design: &HarmonicDesign, e_frac: f64, tweezer_eta: f64) -> Result<HarmonicComparison> {
    if !(e_frac > 0.0 && e_frac < 1.0) {
        return Err(SibaError::validation("e_frac", format!("must lie in (0, 1), got {e_frac}")));
    }
    let x0 = design.x0;
    let hb = &design.config;
    let e_kin = e_frac * trap_metrics_near(hb, 0.0, x0)?.depth;
    let run = |cfg: &TrapConfiguration| -> Result<(f64, f64)> {
        let m = trap_metrics_near(cfg, e_kin, x0)?;
        let traj = simulate_periods(cfg, m.minimum_position, e_kin, 1)?;
        Ok((m.confinement, experienced_intensity(&traj, cfg)?.raw))
    };
    let (dx_hb, i_hb) = run(hb)?;

    let tweezer = tweezer_counterpart(design, tweezer_eta)?;
    let dx_at = |p: f64| -> f64 {
        trap_metrics_near(&tweezer.clone().scale_power(p), e_kin, x0).map(|m| m.confinement).unwrap_or(f64::INFINITY)
    };
    // Harmonic confinement scales as power^(-1/2).
    let guess = {
        let k_t = spring_constant_numeric(&tweezer, x0)?;
        let k_hb = spring_constant_numeric(hb, x0)?;
        k_hb / k_t
    };
    let (mut lo, mut hi) = (0.25 * guess, 4.0 * guess);
    while dx_at(lo) < dx_hb && lo > 1e-300 {
        lo *= 0.25;
    }
    while dx_at(hi) > dx_hb && hi < 1e300 {
        hi *= 4.0;
    }
    let ln_p = bisect(|l: f64| dx_at(l.exp()) - dx_hb, lo.ln(), hi.ln(), 1e-13, 0.0)?;
    let p = ln_p.exp();
    let (dx_t, i_t) = run(&tweezer.scale_power(p))?;
    Ok(HarmonicComparison {
        e_kin,
        confinement: dx_hb,
        tweezer_power: p,
        tweezer_confinement: dx_t,
        intensity_hb: i_hb,
        intensity_t: i_t,
        ratio: i_hb / i_t,
    })
}
