//! Period detection, time-averaged experienced intensity, its high back-action
//! limits, and thermal averaging over the kinetic energy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Result, SibaError};
use crate::model::{CavityMode, TrapConfiguration};
use crate::numerics::{gauss_laguerre, zero_crossing};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    /// Twice the mean spacing of successive momentum zero crossings.
    pub period: f64,
    /// Relative standard deviation of the crossing spacings.
    pub spacing_rel_std: f64,
    pub crossings: Vec<f64>,
}

pub fn oscillation_period(traj: &Trajectory) -> Result<PeriodEstimate> {
    let s = &traj.states;
    let mut crossings = Vec::new();
    for w in s.windows(2) {
        let (a, b) = (w[0].p, w[1].p);
        if a != 0.0 && (b == 0.0 || a.signum() != b.signum()) {
            crossings.push(zero_crossing(w[0].t, a, w[1].t, b));
        }
    }
    if crossings.len() < 3 {
        return Err(SibaError::NoPeriod { crossings: crossings.len() });
    }
    let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
    Ok(PeriodEstimate { period: 2.0 * mean, spacing_rel_std: var.sqrt() / mean, crossings })
}

/// Trapezoidal time average of a per-sample quantity over `[t0, t1]`, with
/// linear interpolation at the interval ends.
pub(crate) fn time_average<G: Fn(usize) -> f64>(traj: &Trajectory, t0: f64, t1: f64, g: G) -> f64 {
    let s = &traj.states;
    let n = s.len();
    let i0 = s.partition_point(|st| st.t < t0).clamp(1, n - 1);
    let i1 = s.partition_point(|st| st.t <= t1).clamp(1, n - 1) - 1;
    let lerp = |i: usize, t: f64| {
        let (ta, tb) = (s[i - 1].t, s[i].t);
        let w = (t - ta) / (tb - ta);
        g(i - 1) * (1.0 - w) + g(i) * w
    };
    if i1 < i0 {
        // Both ends inside the same sample interval.
        return 0.5 * (lerp(i0, t0) + lerp(i0, t1));
    }
    let mut acc = 0.5 * (lerp(i0, t0) + g(i0)) * (s[i0].t - t0);
    let mut prev = g(i0);
    for i in i0 + 1..=i1 {
        let cur = g(i);
        acc += 0.5 * (prev + cur) * (s[i].t - s[i - 1].t);
        prev = cur;
    }
    let end = if i1 + 1 < n { lerp(i1 + 1, t1) } else { prev };
    acc += 0.5 * (prev + end) * (t1 - s[i1].t);
    acc / (t1 - t0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperiencedIntensity {
    /// `(α/cε0)·⟨I_exp⟩` in energy units, summed over modes.
    pub raw: f64,
    /// Per-mode contributions to `raw`.
    pub per_mode: Vec<f64>,
    /// `raw / E_kin`, i.e. `⟨I⟩·α/(cε0·E_kin·k)` with `k = 1`.
    pub normalized: f64,
    pub period: f64,
}

/// Intensity at the particle averaged over the first full period of `traj`.
/// Per mode the integrand is `(α/cε0)·I = η·(κ/2)·|β|²·f(x)`.
pub fn experienced_intensity(traj: &Trajectory, config: &TrapConfiguration) -> Result<ExperiencedIntensity> {
    let period = oscillation_period(traj)?;
    let (t0, t1) = (period.crossings[0], period.crossings[2]);
    let per_mode: Vec<f64> = config
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let half_kappa = 0.5 * traj.kappa[i];
            time_average(traj, t0, t1, |j| {
                let s = &traj.states[j];
                m.eta * half_kappa * s.beta[i].norm_sqr() * m.profile.value(s.x)
            })
        })
        .collect();
    let raw = per_mode.iter().sum();
    Ok(ExperiencedIntensity {
        raw,
        normalized: raw / traj.e_kin,
        per_mode,
        period: t1 - t0,
    })
}

fn slope_ratio(mode: &CavityMode, x: f64) -> Result<f64> {
    let p = mode.profile.eval(x);
    if p.d1.abs() < 1e-12 {
        return Err(SibaError::Singular(format!("back-action vanishes at the profile extremum x = {x}")));
    }
    Ok(p.f / p.d1.abs())
}

/// High back-action limit `(α/cε0)⟨I⟩ = 2·(f(x_r)/|f'(x_r)|)·E_kin/|x_r|`, with
/// `x_r` measured from the intensity maximum at the origin.
pub fn experienced_intensity_high_ba(mode: &CavityMode, x_r: f64, e_kin: f64) -> Result<f64> {
    mode.profile.check_domain(x_r)?;
    let q = slope_ratio(mode, x_r)?;
    Ok(2.0 * q * e_kin / x_r.abs())
}

/// Ratio of the high back-action intensity to the tweezer intensity at equal
/// depth, `(2/x_t)(f(x_t)/|f'(x_t)|)(E_kin/δU)`.
pub fn intensity_ratio_high_ba(mode: &CavityMode, x_t: f64, e_over_depth: f64) -> Result<f64> {
    mode.profile.check_domain(x_t)?;
    let q = slope_ratio(mode, x_t)?;
    Ok(2.0 / x_t.abs() * q * e_over_depth)
}

/// Average of `observable(E_kin)` over `exp(−E/kT)/kT` by `n_samples`-point
/// Gauss-Laguerre quadrature. Nodes above `min(10kT, 0.99·depth)` are dropped
/// and the remaining weights renormalized; `kT = 0` evaluates the observable at
/// `E = 1e-6·depth`. Nodes run in parallel and are summed in node order.
pub fn boltzmann_average<F>(depth: f64, observable: F, kt: f64, n_samples: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(depth > 0.0) {
        return Err(SibaError::Range(format!("trap depth must be positive, got {depth}")));
    }
    if !(kt >= 0.0) || !kt.is_finite() {
        return Err(SibaError::Range(format!("kT must be non-negative, got {kt}")));
    }
    if n_samples == 0 {
        return Err(SibaError::Range("need at least one quadrature node".into()));
    }
    if kt == 0.0 {
        return observable(1e-6 * depth);
    }
    let cut = (10.0 * kt).min(0.99 * depth);
    let nodes: Vec<(f64, f64)> = gauss_laguerre(n_samples)
        .into_iter()
        .map(|(z, w)| (z * kt, w))
        .filter(|&(e, _)| e <= cut)
        .collect();
    if nodes.is_empty() {
        return Err(SibaError::Range(format!("kT = {kt} leaves no quadrature node below the cut {cut}")));
    }
    let values: Vec<f64> = nodes.par_iter().map(|&(e, _)| observable(e)).collect::<Result<_>>()?;
    let wsum: f64 = nodes.iter().map(|n| n.1).sum();
    Ok(nodes.iter().zip(&values).map(|(n, v)| n.1 * v).sum::<f64>() / wsum)
}
