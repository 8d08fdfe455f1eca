//! Back-action parameter, cavity frequency shift and scattering-loss
//! corrections for sub-wavelength dielectric particles.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, SibaError};
use crate::model::CavityMode;
use crate::numerics::{bisect, golden_max};

/// `α/ε0 = 3V(n² − 1)/(n² + 2)` for a homogeneous sphere of volume `V`.
/// With `volume = 1` this is the ratio `α/(ε0 V)`.
pub fn polarizability_sphere(n_ref: f64, volume: f64) -> Result<f64> {
    if !(n_ref > 0.0) || !n_ref.is_finite() {
        return Err(SibaError::Range(format!("refractive index must be positive, got {n_ref}")));
    }
    if !(volume > 0.0) {
        return Err(SibaError::Range(format!("volume must be positive, got {volume}")));
    }
    let n2 = n_ref * n_ref;
    Ok(3.0 * volume * (n2 - 1.0) / (n2 + 2.0))
}

/// Particle-induced resonance shift `2δω_c/κ = −η f(x)`.
pub fn frequency_shift(mode: &CavityMode, x: f64) -> Result<f64> {
    mode.profile.check_domain(x)?;
    Ok(-mode.eta * mode.profile.value(x))
}

/// `η = Q·α/(ε0 V_m)`.
pub fn back_action_parameter(q: f64, alpha_ratio: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(SibaError::Range(format!("quality factor must be positive, got {q}")));
    }
    if !(alpha_ratio >= 0.0) {
        return Err(SibaError::Range(format!("alpha ratio must be non-negative, got {alpha_ratio}")));
    }
    Ok(alpha_ratio * q)
}

fn default_eps() -> f64 {
    1.0
}

/// Empty-cavity quality factor, mode volume `V_m = ν(λ/2)³` and particle size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringModel {
    pub q_empty: f64,
    pub nu: f64,
    pub kr: f64,
    /// `α/(ε0 V)`; 1 in the `α ≈ ε0 V` approximation.
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl ScatteringModel {
    pub fn new(q_empty: f64, nu: f64, kr: f64) -> Result<Self> {
        Self { q_empty, nu, kr, eps: 1.0 }.checked()
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        Self { eps, ..self }.checked()
    }

    pub fn with_kr(self, kr: f64) -> Self {
        Self { kr, ..self }
    }

    fn checked(self) -> Result<Self> {
        if !(self.q_empty > 0.0) || !self.q_empty.is_finite() {
            return Err(SibaError::validation("q_empty", "quality factor must be positive"));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(SibaError::validation("nu", "mode-volume factor must be positive"));
        }
        if !(self.kr >= 0.0) || !self.kr.is_finite() {
            return Err(SibaError::validation("kr", "size parameter must be non-negative"));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(SibaError::validation("eps", "polarizability ratio must be positive"));
        }
        Ok(self)
    }

    /// `(8ε²/27π²ν)(kr)⁶`, the scattering rate at the antinode over `ω_L`.
    fn peak_rate(&self) -> f64 {
        self.rate_coefficient() * self.kr.powi(6)
    }

    fn rate_coefficient(&self) -> f64 {
        8.0 * self.eps * self.eps / (27.0 * PI * PI * self.nu)
    }

    /// `η_max` and `kr_opt`, including the polarizability ratio `ε`.
    pub fn optimum(&self) -> (f64, f64) {
        let kr_opt = (27.0 * PI * PI * self.nu / (8.0 * self.eps * self.eps * self.q_empty)).powf(1.0 / 6.0);
        (kr_opt, (3.0 * self.q_empty / (2.0 * PI * PI * self.nu)).sqrt())
    }
}

/// Scattering loss rate relative to the laser frequency, `κ_scat/ω_L`, for a
/// particle where the profile takes the value `f_at_x`.
pub fn scattering_rate(sm: &ScatteringModel, f_at_x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_at_x) {
        return Err(SibaError::Range(format!("profile value {f_at_x} outside [0, 1]")));
    }
    Ok(sm.peak_rate() * f_at_x)
}

/// Back-action parameter reduced by the particle's own scattering loss.
pub fn eta_with_scattering(sm: &ScatteringModel) -> f64 {
    let q_nu = sm.q_empty / sm.nu;
    let x3 = sm.kr.powi(3);
    4.0 * sm.eps / (3.0 * PI * PI) * q_nu * x3 / (1.0 + sm.q_empty * sm.peak_rate())
}

/// `dη/d(kr)` of [`eta_with_scattering`].
pub fn eta_with_scattering_slope(sm: &ScatteringModel) -> f64 {
    let a = 4.0 * sm.eps / (3.0 * PI * PI) * sm.q_empty / sm.nu;
    let b = sm.q_empty * sm.rate_coefficient();
    let x = sm.kr;
    let x6 = x.powi(6);
    3.0 * a * x * x * (1.0 - b * x6) / (1.0 + b * x6).powi(2)
}

/// Numeric maximum of [`eta_with_scattering`] over `kr ∈ (0, 1)`: golden-section
/// search, then bisection of the slope to reach full double precision.
pub fn maximize_eta(sm: &ScatteringModel) -> Result<(f64, f64)> {
    let eta = |kr: f64| eta_with_scattering(&sm.with_kr(kr));
    let (guess, _) = golden_max(eta, 1e-6, 1.0 - 1e-9, 1e-10);
    let slope = |kr: f64| eta_with_scattering_slope(&sm.with_kr(kr));
    let (mut lo, mut hi) = (guess * (1.0 - 1e-6), guess * (1.0 + 1e-6));
    while slope(lo) < 0.0 && lo > 1e-6 {
        lo *= 0.9;
    }
    while slope(hi) > 0.0 && hi < 1.0 {
        hi = (hi * 1.1).min(1.0);
    }
    let kr = bisect(slope, lo, hi, 1e-16, 0.0)?;
    Ok((kr, eta(kr)))
}

/// `(kr_opt, η_max)` for `ε = 1`.
pub fn eta_optimum(q: f64, nu: f64) -> Result<(f64, f64)> {
    Ok(ScatteringModel::new(q, nu, 0.0)?.optimum())
}

/// Ratio of the scattering-rate change to the frequency-shift change for the
/// same displacement, `2κ_scat(f=1)/(κ η)`; scales as `(kr)³`.
pub fn scattering_shift_ratio(sm: &ScatteringModel) -> f64 {
    let eta = eta_with_scattering(sm);
    if eta == 0.0 {
        return 0.0;
    }
    let s1 = sm.peak_rate();
    // κ/ω_L with the scattering loss at the antinode included.
    let kappa = 1.0 / sm.q_empty + s1;
    2.0 * s1 / (kappa * eta)
}

/// Harmonic back-action spring of one mode including the position-dependent
/// scattering term. `intensity` is `(α/cε0)⟨I_exp⟩` in energy units.
pub fn harmonic_spring_with_scattering(
    mode: &CavityMode,
    sm: &ScatteringModel,
    x0: f64,
    x_r: f64,
    intensity: f64,
) -> Result<f64> {
    mode.profile.check_domain(x0)?;
    mode.profile.check_domain(x_r)?;
    let f0 = mode.profile.value(x0);
    if f0.abs() < 1e-15 {
        return Err(SibaError::Singular(format!("profile vanishes at x0 = {x0}")));
    }
    let fr = mode.profile.slope(x_r);
    let r = (mode.eta * fr * (x_r - x0)).abs();
    if !r.is_finite() {
        return Err(SibaError::Range("r is not finite".into()));
    }
    let s0 = scattering_rate(sm, f0)?;
    let dk_over_k = s0 / (1.0 / sm.q_empty + s0);
    let bracket = 2.0 * r / (1.0 + r * r) * mode.eta + 2.0 * dk_over_k / f0 / (1.0 + r * r);
    Ok(intensity / f0 * bracket * fr * fr)
}
