//! Domain types and configuration validation.
//!
//! Internal units: `ħ = 1`, wavevector `k = 1`, and the particle mass sets
//! the mass unit. The energy unit is `U0 = 2ħE0²κ_ex/κ` of the first mode, so a
//! fully saturated single-mode trap is `π·U0` deep; the time unit is `1/ω0`
//! with `ω0 = sqrt(U0 k²/m)`.

mod profile;

pub use profile::{ModeProfile, ProfilePoint, TabulatedProfile};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SibaError};
use crate::numerics::{golden_max, golden_min, linspace};

/// Tag recorded in every configuration describing the internal unit convention.
pub const UNIT_CONVENTION: &str = "hbar=1,k=1,m=particle.mass,energy=U0";

/// Tolerance on `max f = 1` for a normalized profile.
pub const PROFILE_NORM_TOL: f64 = 1e-9;

/// Optional SI data used only when estimating the back-action parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiBlock {
    /// Vacuum wavelength of the drive in meters.
    pub wavelength_m: f64,
    /// Quality factor of the empty cavity.
    pub quality_factor: f64,
    /// Mode volume in units of `(λ/2)³`.
    pub nu: f64,
}

impl SiBlock {
    pub fn wavevector(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_m
    }

    /// Particle radius in meters for a size parameter `kr`.
    pub fn radius_m(&self, kr: f64) -> f64 {
        kr / self.wavevector()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    #[serde(default = "default_convention")]
    pub convention: String,
    /// `U0` (derived).
    #[serde(default)]
    pub energy_unit: f64,
    /// `ω0` (derived).
    #[serde(default)]
    pub omega0: f64,
    /// `τ0 = 1/ω0` (derived).
    #[serde(default)]
    pub time_unit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub si: Option<SiBlock>,
}

fn default_convention() -> String {
    UNIT_CONVENTION.to_string()
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem {
            convention: default_convention(),
            energy_unit: 0.0,
            omega0: 0.0,
            time_unit: 0.0,
            si: None,
        }
    }
}

/// One driven optical mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityMode {
    pub profile: ModeProfile,
    pub kappa_ex: f64,
    pub kappa_in: f64,
    /// Total linewidth `κ_ex + κ_in` (derived; checked for consistency when given).
    #[serde(default)]
    pub kappa: f64,
    /// Injected photon number flux `E0²`.
    pub drive_flux_sq: f64,
    /// `Δ̃ = 2(ω_L − ω_c)/κ`.
    pub detuning_tilde: f64,
    /// Back-action parameter `η`.
    pub eta: f64,
}

impl CavityMode {
    /// Mode with `κ_ex = κ_in = 1/2` and `E0² = 1`, i.e. `U0 = 1`.
    pub fn new(profile: ModeProfile, eta: f64, detuning_tilde: f64) -> Self {
        CavityMode {
            profile,
            kappa_ex: 0.5,
            kappa_in: 0.5,
            kappa: 1.0,
            drive_flux_sq: 1.0,
            detuning_tilde,
            eta,
        }
    }

    /// Mode whose laser is resonant with the shifted cavity at `x_r`.
    pub fn resonant_at(profile: ModeProfile, eta: f64, x_r: f64) -> Self {
        let d = -eta * profile.value(x_r);
        Self::new(profile, eta, d)
    }

    pub fn with_linewidths(mut self, kappa_ex: f64, kappa_in: f64) -> Self {
        self.kappa_ex = kappa_ex;
        self.kappa_in = kappa_in;
        self.kappa = kappa_ex + kappa_in;
        self
    }

    pub fn with_drive(mut self, drive_flux_sq: f64) -> Self {
        self.drive_flux_sq = drive_flux_sq;
        self
    }

    /// Multiplies the drive power (and hence `U0`) by `factor`.
    pub fn scale_power(mut self, factor: f64) -> Self {
        self.drive_flux_sq *= factor;
        self
    }

    #[inline]
    pub fn total_kappa(&self) -> f64 {
        self.kappa_ex + self.kappa_in
    }

    /// `U0 = 2ħE0²κ_ex/κ`; the single-mode potential is `−U0·arctan(ηf + Δ̃)`.
    #[inline]
    pub fn energy_scale(&self) -> f64 {
        2.0 * self.drive_flux_sq * self.kappa_ex / self.total_kappa()
    }

    /// Photon number on resonance, `4E0²κ_ex/κ²`.
    #[inline]
    pub fn max_photon_number(&self) -> f64 {
        let k = self.total_kappa();
        4.0 * self.drive_flux_sq * self.kappa_ex / (k * k)
    }

    /// `ηf(x) + Δ̃`, the detuning from the shifted resonance in half linewidths.
    #[inline]
    pub fn shifted_detuning(&self, x: f64) -> f64 {
        self.eta * self.profile.value(x) + self.detuning_tilde
    }

    /// Steady-state Lorentzian factor `1/(1 + (ηf + Δ̃)²)`.
    #[inline]
    pub fn lorentzian(&self, x: f64) -> f64 {
        let a = self.shifted_detuning(x);
        1.0 / (1.0 + a * a)
    }
}

/// Trapped sub-wavelength particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpec {
    /// `α/(ε0 V_m)`.
    pub alpha_ratio: f64,
    pub mass: f64,
    /// Size parameter `kr`.
    pub kr: f64,
    pub refractive_index: f64,
}

impl Default for ParticleSpec {
    fn default() -> Self {
        ParticleSpec { alpha_ratio: 1e-4, mass: 1.0, kr: 0.1, refractive_index: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapConfiguration {
    #[serde(default)]
    pub units: UnitSystem,
    #[serde(default)]
    pub particle: ParticleSpec,
    pub modes: Vec<CavityMode>,
}

impl TrapConfiguration {
    pub fn single(mode: CavityMode) -> Self {
        Self::from_modes(vec![mode])
    }

    pub fn two_mode(first: CavityMode, second: CavityMode) -> Self {
        Self::from_modes(vec![first, second])
    }

    /// Unit-mass configuration with derived fields filled in.
    pub fn from_modes(modes: Vec<CavityMode>) -> Self {
        let mut c = TrapConfiguration {
            units: UnitSystem::default(),
            particle: ParticleSpec::default(),
            modes,
        };
        c.fill_derived();
        c
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.particle.mass = mass;
        self.fill_derived();
        self
    }

    /// Multiplies every mode's drive power by `factor`.
    pub fn scale_power(mut self, factor: f64) -> Self {
        for m in &mut self.modes {
            m.drive_flux_sq *= factor;
        }
        self.fill_derived();
        self
    }

    pub fn mass(&self) -> f64 {
        self.particle.mass
    }

    /// Intersection of the mode domains.
    pub fn domain(&self) -> (f64, f64) {
        self.modes.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), m| {
            let (a, b) = m.profile.domain();
            (lo.max(a), hi.min(b))
        })
    }

    fn fill_derived(&mut self) {
        for m in &mut self.modes {
            m.kappa = m.total_kappa();
        }
        let u0 = self.modes.first().map(CavityMode::energy_scale).unwrap_or(0.0);
        self.units.convention = UNIT_CONVENTION.to_string();
        self.units.energy_unit = u0;
        self.units.omega0 = (u0 / self.particle.mass).sqrt();
        self.units.time_unit = 1.0 / self.units.omega0;
    }
}

/// Checks every type invariant and returns the configuration with derived
/// fields (`κ`, `U0`, `ω0`, `τ0`) filled in. Idempotent.
pub fn validate_configuration(config: &TrapConfiguration) -> Result<TrapConfiguration> {
    if config.modes.is_empty() {
        return Err(SibaError::validation("modes", "mode list must not be empty"));
    }
    if config.modes.len() > 2 {
        return Err(SibaError::validation("modes", "at most two modes are supported"));
    }
    for (i, m) in config.modes.iter().enumerate() {
        validate_mode(i, m)?;
    }
    if config.modes.len() == 2 && config.modes[0].profile.same_shape(&config.modes[1].profile) {
        return Err(SibaError::validation(
            "modes[1].profile",
            "two-mode configurations need profiles of distinct periodicity",
        ));
    }
    let (lo, hi) = config.domain();
    if !(hi > lo) {
        return Err(SibaError::validation("modes", "mode domains do not overlap"));
    }

    let p = &config.particle;
    if !(p.alpha_ratio > 0.0) || !p.alpha_ratio.is_finite() {
        return Err(SibaError::validation("particle.alpha_ratio", "polarizability ratio must be positive"));
    }
    if !(p.mass > 0.0) || !p.mass.is_finite() {
        return Err(SibaError::validation("particle.mass", "mass must be positive and finite"));
    }
    if !(0.0..1.0).contains(&p.kr) {
        return Err(SibaError::validation("particle.kr", "size parameter must satisfy 0 <= kr < 1"));
    }
    if !(p.refractive_index > 0.0) {
        return Err(SibaError::validation("particle.refractive_index", "refractive index must be positive"));
    }
    if let Some(si) = &config.units.si {
        for (name, v) in [
            ("units.si.wavelength_m", si.wavelength_m),
            ("units.si.quality_factor", si.quality_factor),
            ("units.si.nu", si.nu),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SibaError::validation(name, "must be positive and finite"));
            }
        }
    }

    let mut out = config.clone();
    out.fill_derived();
    let u = &out.units;
    if !(u.energy_unit > 0.0) || !u.energy_unit.is_finite() {
        return Err(SibaError::validation(
            "units.energy_unit",
            "U0 = 2 E0^2 kappa_ex / kappa must be positive (check drive_flux_sq and kappa_ex)",
        ));
    }
    if !(u.omega0 > 0.0 && u.omega0.is_finite() && u.time_unit.is_finite()) {
        return Err(SibaError::validation("units.omega0", "derived frequency scale is not finite"));
    }
    Ok(out)
}

fn validate_mode(i: usize, m: &CavityMode) -> Result<()> {
    let field = |name: &str| format!("modes[{i}].{name}");
    for (name, v) in [
        ("kappa_ex", m.kappa_ex),
        ("kappa_in", m.kappa_in),
        ("drive_flux_sq", m.drive_flux_sq),
        ("eta", m.eta),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(SibaError::validation(field(name), "must be finite and non-negative"));
        }
    }
    if !m.detuning_tilde.is_finite() {
        return Err(SibaError::validation(field("detuning_tilde"), "must be finite"));
    }
    let total = m.total_kappa();
    if !(total > 0.0) {
        return Err(SibaError::validation(field("kappa"), "kappa must be positive"));
    }
    if m.kappa != 0.0 && (m.kappa - total).abs() > 1e-12 * total {
        return Err(SibaError::validation(
            field("kappa"),
            format!("kappa {} inconsistent with kappa_ex + kappa_in = {total}", m.kappa),
        ));
    }
    check_normalized(&m.profile).map_err(|msg| SibaError::validation(field("profile"), msg))
}

/// Verifies `0 ≤ f ≤ 1` on the domain and `max f = 1` within [`PROFILE_NORM_TOL`].
fn check_normalized(profile: &ModeProfile) -> std::result::Result<(), String> {
    let (lo, hi) = profile.domain();
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err("domain must satisfy x_lo < x_hi".into());
    }
    let n = 4096;
    let xs = linspace(lo, hi, n);
    let vals: Vec<f64> = xs.iter().map(|&x| profile.value(x)).collect();
    let (imax, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let (imin, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let cell = |i: usize| (xs[i.saturating_sub(1)], xs[(i + 1).min(n - 1)]);
    let (a, b) = cell(imax);
    let (_, fmax) = golden_max(|x| profile.value(x), a, b, 1e-12);
    let fmax = fmax.max(vals[imax]);
    let (a, b) = cell(imin);
    let (_, fmin) = golden_min(|x| profile.value(x), a, b, 1e-12);
    let fmin = fmin.min(vals[imin]);
    if fmin < -PROFILE_NORM_TOL || fmax > 1.0 + PROFILE_NORM_TOL {
        return Err(format!("profile exceeds [0, 1] (min {fmin}, max {fmax})"));
    }
    if (fmax - 1.0).abs() > PROFILE_NORM_TOL {
        return Err(format!("profile not normalized: max f = {fmax}, expected 1"));
    }
    Ok(())
}
