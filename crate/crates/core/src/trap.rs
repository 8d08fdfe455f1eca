//! Steady-state photon number, force and potential of the driven cavity, and
//! trap characterization (minimum, depth, turning points, spring constants).

use serde::{Deserialize, Serialize};

use crate::error::{Result, SibaError};
use crate::model::{CavityMode, TrapConfiguration};
use crate::numerics::{bisect, golden_max, golden_min, linspace, richardson4, second_derivative_5pt};

/// Default number of points in the uniform pre-scan used by root finding.
pub const SCAN_POINTS: usize = 4096;
/// Position tolerance of the refined extrema and roots.
pub const XTOL: f64 = 1e-12;
/// Finite-difference step of the numeric spring constant.
pub const SPRING_STEP: f64 = 1e-4;

/// Intra-cavity photon number `n(x) = n_max/(1 + (ηf + Δ̃)²)`.
#[inline]
pub fn photon_number(mode: &CavityMode, x: f64) -> f64 {
    mode.max_photon_number() * mode.lorentzian(x)
}

/// Potential of one mode, `−U0·arctan(ηf + Δ̃)`.
#[inline]
pub fn mode_potential(mode: &CavityMode, x: f64) -> f64 {
    -mode.energy_scale() * mode.shifted_detuning(x).atan()
}

/// Force of one mode, `n·(κ/2)·η·f'`.
#[inline]
pub fn mode_force(mode: &CavityMode, x: f64) -> f64 {
    let p = mode.profile.eval(x);
    let a = mode.eta * p.f + mode.detuning_tilde;
    mode.energy_scale() * mode.eta * p.d1 / (1.0 + a * a)
}

/// Experienced intensity of one mode in energy units, `(α/cε0)·I = U0·η·f·L`.
#[inline]
pub fn mode_intensity(mode: &CavityMode, x: f64) -> f64 {
    mode.energy_scale() * mode.eta * mode.profile.value(x) * mode.lorentzian(x)
}

/// Total incoherent potential `Σ_i −U0_i·arctan(η_i f_i + Δ̃_i)`.
pub fn potential(config: &TrapConfiguration, x: f64) -> f64 {
    config.modes.iter().map(|m| mode_potential(m, x)).sum()
}

pub fn force(config: &TrapConfiguration, x: f64) -> f64 {
    config.modes.iter().map(|m| mode_force(m, x)).sum()
}

/// Local intensity seen by the particle, summed over modes, in energy units.
pub fn seen_intensity(config: &TrapConfiguration, x: f64) -> f64 {
    config.modes.iter().map(|m| mode_intensity(m, x)).sum()
}

/// Small-η limit `−U0·η·f/(1 + Δ̃²)`.
#[inline]
pub fn tweezer_potential(mode: &CavityMode, x: f64) -> f64 {
    let d = mode.detuning_tilde;
    -mode.energy_scale() * mode.eta * mode.profile.value(x) / (1.0 + d * d)
}

/// Roots of `ηf(x) + Δ̃ = 0` inside the profile domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantPositions {
    pub positions: Vec<f64>,
    /// Set when the laser only touches the shifted resonance at a profile
    /// maximum (`Δ̃ = −η`), reported as a single double root.
    pub degenerate: bool,
}

pub fn resonant_positions(mode: &CavityMode) -> ResonantPositions {
    let none = ResonantPositions { positions: Vec::new(), degenerate: false };
    if mode.eta == 0.0 {
        return none;
    }
    let g = |x: f64| mode.shifted_detuning(x);
    let (lo, hi) = mode.profile.domain();
    let xs = linspace(lo, hi, SCAN_POINTS);
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let tol = 1e-12 * mode.eta.max(1.0);
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&last| (r - last).abs() > 1e-10) {
            roots.push(r);
        }
    };
    for i in 0..xs.len() - 1 {
        let (a, b) = (gs[i], gs[i + 1]);
        if a == 0.0 {
            push(xs[i], &mut roots);
        } else if a * b < 0.0 {
            if let Ok(r) = bisect(g, xs[i], xs[i + 1], 1e-15, tol * 1e-3) {
                push(r, &mut roots);
            }
        }
    }
    if *gs.last().unwrap() == 0.0 {
        push(hi, &mut roots);
    }
    if !roots.is_empty() {
        return ResonantPositions { positions: roots, degenerate: false };
    }
    // Tangential contact at a maximum of g.
    let imax = argmax(&gs);
    let (a, b) = neighbor_cell(&xs, imax);
    let (xm, gm) = golden_max(g, a, b, 1e-14);
    if gm.abs() <= tol {
        return ResonantPositions { positions: vec![xm], degenerate: true };
    }
    none
}

/// Per-mode decomposition of the spring constant `U''` at a position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringTerms {
    /// `n'·ω_c'`, from the change of photon number with position.
    pub back_action: f64,
    /// `n·ω_c''`, the conventional tweezer curvature.
    pub tweezer: f64,
}

impl SpringTerms {
    pub fn total(&self) -> f64 {
        self.back_action + self.tweezer
    }
}

/// Analytic second derivative of one mode's potential split into its two terms.
pub fn spring_terms(mode: &CavityMode, x: f64) -> SpringTerms {
    let p = mode.profile.eval(x);
    let a = mode.eta * p.f + mode.detuning_tilde;
    let l = 1.0 / (1.0 + a * a);
    let u0 = mode.energy_scale();
    SpringTerms {
        back_action: 2.0 * u0 * mode.eta * mode.eta * p.d1 * p.d1 * a * l * l,
        tweezer: -u0 * mode.eta * p.d2 * l,
    }
}

/// Curvature of the total potential by a Richardson-refined five-point stencil.
pub fn curvature_numeric(config: &TrapConfiguration, x: f64) -> f64 {
    let u = |y: f64| potential(config, y);
    let coarse = second_derivative_5pt(&u, x, SPRING_STEP);
    let fine = second_derivative_5pt(&u, x, SPRING_STEP / 2.0);
    richardson4(coarse, fine)
}

/// `k_opt = U''(x0)`; fails when the curvature is negative.
pub fn spring_constant_numeric(config: &TrapConfiguration, x0: f64) -> Result<f64> {
    let k = curvature_numeric(config, x0);
    if k < 0.0 {
        return Err(SibaError::NotMinimum(k));
    }
    Ok(k)
}

/// Analytic spring of one mode in terms of its experienced intensity,
/// `J/f(x0)·[2r/(1+r²)·η f'(x_r)² − f''(x0)]` with `r = |η f'(x_r)(x_r − x0)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpring {
    pub r: f64,
    pub terms: SpringTerms,
}

pub fn spring_constant_analytic(mode: &CavityMode, x0: f64, x_r: f64, intensity: f64) -> Result<AnalyticSpring> {
    mode.profile.check_domain(x0)?;
    mode.profile.check_domain(x_r)?;
    let p0 = mode.profile.eval(x0);
    if p0.f.abs() < 1e-15 {
        return Err(SibaError::Singular(format!("profile vanishes at x0 = {x0}")));
    }
    let fr = mode.profile.slope(x_r);
    let r = (mode.eta * fr * (x_r - x0)).abs();
    let scale = intensity / p0.f;
    let back_action = if r.is_finite() { scale * 2.0 * r / (1.0 + r * r) * mode.eta * fr * fr } else { 0.0 };
    Ok(AnalyticSpring { r, terms: SpringTerms { back_action, tweezer: -scale * p0.d2 } })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapMetrics {
    pub depth: f64,
    pub minimum_position: f64,
    pub minimum_potential: f64,
    /// Positions of the enclosing potential maxima (or domain edges).
    pub barriers: (f64, f64),
    /// Resonant positions per mode.
    pub resonant_positions: Vec<ResonantPositions>,
    /// Distance between the nearest resonant positions on either side of `x0`.
    pub wall_separation: Option<f64>,
    pub e_kin: f64,
    pub turning_points: (f64, f64),
    pub confinement: f64,
    pub spring_numeric: f64,
    pub spring_analytic_terms: Vec<SpringTerms>,
}

/// Characterizes the deepest minimum of the potential on the domain.
pub fn trap_metrics(config: &TrapConfiguration, e_kin: f64) -> Result<TrapMetrics> {
    let grid = Grid::new(config);
    let i = argmin(&grid.us);
    if i == 0 || i == grid.xs.len() - 1 {
        return Err(SibaError::NoTrap("potential minimum lies on the domain edge".into()));
    }
    metrics_from(config, &grid, i, e_kin)
}

/// Characterizes the local minimum reached by descending from `hint`.
pub fn trap_metrics_near(config: &TrapConfiguration, e_kin: f64, hint: f64) -> Result<TrapMetrics> {
    let grid = Grid::new(config);
    let mut i = grid.index_of(hint);
    let n = grid.xs.len();
    loop {
        if i > 0 && grid.us[i - 1] < grid.us[i] {
            i -= 1;
        } else if i + 1 < n && grid.us[i + 1] < grid.us[i] {
            i += 1;
        } else {
            break;
        }
    }
    if i == 0 || i == n - 1 {
        return Err(SibaError::NoTrap(format!("descent from {hint} reaches the domain edge")));
    }
    metrics_from(config, &grid, i, e_kin)
}

struct Grid {
    xs: Vec<f64>,
    us: Vec<f64>,
}

impl Grid {
    fn new(config: &TrapConfiguration) -> Self {
        let (lo, hi) = config.domain();
        let xs = linspace(lo, hi, SCAN_POINTS);
        let us = xs.iter().map(|&x| potential(config, x)).collect();
        Grid { xs, us }
    }

    fn index_of(&self, x: f64) -> usize {
        let lo = self.xs[0];
        let h = self.xs[1] - lo;
        (((x - lo) / h).round().max(0.0) as usize).min(self.xs.len() - 1)
    }
}

fn argmin(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (i, &u)| if u < v[best] { i } else { best })
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (i, &u)| if u > v[best] { i } else { best })
}

fn neighbor_cell(xs: &[f64], i: usize) -> (f64, f64) {
    (xs[i.saturating_sub(1)], xs[(i + 1).min(xs.len() - 1)])
}

/// Refines a golden-section extremum to a sign change of the analytic force.
fn polish(config: &TrapConfiguration, a: f64, b: f64, guess: (f64, f64)) -> (f64, f64) {
    let f = |x: f64| force(config, x);
    if f(a) * f(b) < 0.0 {
        if let Ok(x) = bisect(f, a, b, 1e-15, 0.0) {
            return (x, potential(config, x));
        }
    }
    guess
}

fn metrics_from(config: &TrapConfiguration, grid: &Grid, i: usize, e_kin: f64) -> Result<TrapMetrics> {
    if !(e_kin >= 0.0) || !e_kin.is_finite() {
        return Err(SibaError::Range(format!("kinetic energy must be non-negative, got {e_kin}")));
    }
    let u = |x: f64| potential(config, x);
    let (xs, us) = (&grid.xs, &grid.us);
    let n = xs.len();
    let (a, b) = neighbor_cell(xs, i);
    let (x0, u_min) = polish(config, a, b, golden_min(u, a, b, XTOL));

    // Climb to the first local maximum on each side; a domain edge is a barrier.
    let right_start = xs.partition_point(|&x| x <= x0).min(n - 1);
    let mut j = right_start;
    while j + 1 < n && us[j + 1] >= us[j] {
        j += 1;
    }
    let right = if j == n - 1 {
        (xs[j], us[j])
    } else {
        let (a, b) = neighbor_cell(xs, j);
        polish(config, a, b, golden_max(u, a, b, XTOL))
    };
    let left_start = xs.partition_point(|&x| x < x0).saturating_sub(1);
    let mut j = left_start;
    while j > 0 && us[j - 1] >= us[j] {
        j -= 1;
    }
    let left = if j == 0 {
        (xs[0], us[0])
    } else {
        let (a, b) = neighbor_cell(xs, j);
        polish(config, a, b, golden_max(u, a, b, XTOL))
    };
    let depth = left.1.min(right.1) - u_min;
    if !(depth > 0.0) {
        return Err(SibaError::NoTrap(format!("potential has no barrier around x = {x0}")));
    }
    if e_kin >= depth {
        return Err(SibaError::Unbound { e_kin, depth, shortfall: e_kin - depth });
    }

    let turning_points = if e_kin == 0.0 {
        (x0, x0)
    } else {
        let h = |x: f64| u(x) - u_min - e_kin;
        let mut k = right_start;
        while xs[k] < right.0 && h(xs[k]) < 0.0 {
            k += 1;
        }
        let xr = bisect(h, xs[k - 1].max(x0), xs[k].min(right.0), XTOL, 0.0)?;
        let mut k = left_start;
        while xs[k] > left.0 && h(xs[k]) < 0.0 {
            k -= 1;
        }
        let xl = bisect(h, xs[k].max(left.0), xs[k + 1].min(x0), XTOL, 0.0)?;
        (xl, xr)
    };

    let resonant: Vec<ResonantPositions> = config.modes.iter().map(resonant_positions).collect();
    let all: Vec<f64> = resonant.iter().flat_map(|r| r.positions.iter().copied()).collect();
    let wall_left = all.iter().copied().filter(|&x| x <= x0).fold(f64::NEG_INFINITY, f64::max);
    let wall_right = all.iter().copied().filter(|&x| x >= x0).fold(f64::INFINITY, f64::min);
    let wall_separation = (wall_left.is_finite() && wall_right.is_finite()).then_some(wall_right - wall_left);

    Ok(TrapMetrics {
        depth,
        minimum_position: x0,
        minimum_potential: u_min,
        barriers: (left.0, right.0),
        resonant_positions: resonant,
        wall_separation,
        e_kin,
        turning_points,
        confinement: turning_points.1 - turning_points.0,
        spring_numeric: curvature_numeric(config, x0),
        spring_analytic_terms: config.modes.iter().map(|m| spring_terms(m, x0)).collect(),
    })
}

/// Depth of the trap around the deepest minimum.
pub fn trap_depth(config: &TrapConfiguration) -> Result<f64> {
    Ok(trap_metrics(config, 0.0)?.depth)
}

/// Full width at half maximum of the photon-number peak around `x_r`.
pub fn photon_peak_fwhm(mode: &CavityMode, x_r: f64) -> Result<f64> {
    let half = 0.5 * photon_number(mode, x_r);
    let h = |x: f64| photon_number(mode, x) - half;
    let (lo, hi) = mode.profile.domain();
    let width = |dir: f64| -> Result<f64> {
        let limit = if dir > 0.0 { hi - x_r } else { x_r - lo };
        let mut step = 1e-6;
        while step < limit && h(x_r + dir * step) > 0.0 {
            step *= 1.5;
        }
        if step >= limit {
            return Err(SibaError::Range("peak does not fall to half maximum inside the domain".into()));
        }
        let edge = bisect(h, x_r + dir * step / 1.5, x_r + dir * step, 1e-14, 0.0)?;
        Ok((edge - x_r).abs())
    };
    Ok(width(1.0)? + width(-1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModeProfile;
    use crate::numerics::first_derivative_5pt;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn single(eta: f64, det: f64) -> TrapConfiguration {
        TrapConfiguration::single(CavityMode::new(ModeProfile::fundamental(), eta, det))
    }

    #[test]
    fn photon_number_values() {
        let m = CavityMode::new(ModeProfile::fundamental(), 10.0, -5.0);
        let nmax = m.max_photon_number();
        assert!((photon_number(&m, FRAC_PI_4) - nmax).abs() < 1e-12);
        assert!((photon_number(&m, 0.0) - nmax / 26.0).abs() < 1e-15);
        let e = CavityMode::new(ModeProfile::fundamental(), 0.0, 0.0);
        assert_eq!(photon_number(&e, 0.3), e.max_photon_number());
    }

    #[test]
    fn force_at_resonance() {
        let c = single(10.0, -5.0);
        // n_max·(κ/2)·η·|f'| with f'(π/4) = −1.
        let m = &c.modes[0];
        let expected = -m.max_photon_number() * m.total_kappa() / 2.0 * 10.0;
        assert!((force(&c, FRAC_PI_4) - expected).abs() < 1e-12);
        assert!(force(&c, 0.0).abs() < 1e-15);
    }

    #[test]
    fn potential_values_and_depth() {
        let c = single(10.0, -5.0);
        assert!((potential(&c, 0.0) + 5f64.atan()).abs() < 1e-15);
        assert!((potential(&c, FRAC_PI_2) - 5f64.atan()).abs() < 1e-15);
        let m = trap_metrics(&c, 0.0).unwrap();
        assert!((m.depth - 2.0 * 5f64.atan()).abs() < 1e-12);
        assert!(m.minimum_position.abs() < 1e-9);
        assert_eq!(m.turning_points, (m.minimum_position, m.minimum_position));
        assert_eq!(m.confinement, 0.0);
        assert!((m.wall_separation.unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn tweezer_limit() {
        let m = CavityMode::new(ModeProfile::fundamental(), 0.01, 0.0);
        assert!((tweezer_potential(&m, 0.0) + 0.01).abs() < 1e-15);
        assert!(tweezer_potential(&m, FRAC_PI_2).abs() < 1e-30);
        let c = TrapConfiguration::single(m.clone());
        let depth = trap_depth(&c).unwrap();
        for x in linspace(-FRAC_PI_2, FRAC_PI_2, 1001) {
            assert!((mode_potential(&m, x) - tweezer_potential(&m, x)).abs() < 0.01 * depth);
        }
    }

    #[test]
    fn resonant_positions_cases() {
        let m = CavityMode::new(ModeProfile::fundamental(), 10.0, -5.0);
        let r = resonant_positions(&m);
        assert_eq!(r.positions.len(), 2);
        assert!((r.positions[0] + FRAC_PI_4).abs() < 1e-12);
        assert!((r.positions[1] - FRAC_PI_4).abs() < 1e-12);
        for &x in &r.positions {
            assert!(m.shifted_detuning(x).abs() < 1e-12);
        }
        assert!(resonant_positions(&CavityMode::new(ModeProfile::fundamental(), 10.0, 1.0)).positions.is_empty());
        assert!(resonant_positions(&CavityMode::new(ModeProfile::fundamental(), 10.0, -11.0)).positions.is_empty());
        let d = resonant_positions(&CavityMode::new(ModeProfile::fundamental(), 10.0, -10.0));
        assert!(d.degenerate);
        assert_eq!(d.positions.len(), 1);
        assert!(d.positions[0].abs() < 1e-6);
    }

    #[test]
    fn square_well_turning_points_near_walls() {
        let c = single(100.0, -50.0);
        let depth = trap_depth(&c).unwrap();
        let m = trap_metrics(&c, 0.5 * depth).unwrap();
        assert!(m.confinement / m.wall_separation.unwrap() >= 0.9);
        assert!(m.turning_points.0 <= m.minimum_position && m.minimum_position <= m.turning_points.1);
    }

    #[test]
    fn harmonic_confinement_estimate() {
        let c = single(0.1, -0.05);
        let depth = trap_depth(&c).unwrap();
        let e = 1e-3 * depth;
        let m = trap_metrics(&c, e).unwrap();
        let k = m.spring_numeric;
        let estimate = 2.0 * (2.0 * e / k).sqrt();
        assert!((m.confinement - estimate).abs() / estimate < 0.05);
    }

    #[test]
    fn unbound_reports_shortfall() {
        let c = single(10.0, -5.0);
        let depth = trap_depth(&c).unwrap();
        match trap_metrics(&c, depth + 0.25) {
            Err(SibaError::Unbound { shortfall, .. }) => assert!((shortfall - 0.25).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flat_potential_is_no_trap() {
        let c = single(0.0, 0.0);
        assert!(matches!(trap_metrics(&c, 0.0), Err(SibaError::NoTrap(_))));
    }

    #[test]
    fn spring_numeric_matches_analytic_terms() {
        for (eta, det, x) in [(0.01, 0.0, 0.0), (10.0, -5.0, 0.0), (100.0, -60.0, 0.2), (3.0, -1.0, -0.4)] {
            let c = single(eta, det);
            let analytic = spring_terms(&c.modes[0], x).total();
            let numeric = curvature_numeric(&c, x);
            let scale = analytic.abs().max(1e-3 * c.modes[0].energy_scale() * eta);
            assert!((numeric - analytic).abs() / scale < 1e-6, "eta={eta} x={x}: {numeric} vs {analytic}");
        }
    }

    #[test]
    fn spring_doubles_with_power() {
        let c = single(10.0, -5.0);
        let k1 = spring_constant_numeric(&c, 0.0).unwrap();
        let k2 = spring_constant_numeric(&c.clone().scale_power(2.0), 0.0).unwrap();
        assert!((k2 / k1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn spring_numeric_rejects_maximum() {
        let hill = single(1.0, 2.0);
        // Blue-detuned everywhere: U = −arctan(f + 2) has its minimum at the antinode, maximum at the node.
        assert!(spring_constant_numeric(&hill, 0.0).is_ok());
        assert!(matches!(spring_constant_numeric(&hill, FRAC_PI_2 - 1e-3), Err(SibaError::NotMinimum(_))));
    }

    #[test]
    fn analytic_spring_limits() {
        let m = CavityMode::new(ModeProfile::fundamental(), 100.0, 0.0);
        let x0 = 0.5;
        let s = spring_constant_analytic(&m, x0, x0, 1.0).unwrap();
        assert_eq!(s.r, 0.0);
        assert_eq!(s.terms.back_action, 0.0);
        let fr = m.profile.slope(0.6);
        let s = spring_constant_analytic(&m, x0, 0.6, 1.0).unwrap();
        let r = (100.0 * fr * 0.1).abs();
        assert!((s.r - r).abs() < 1e-12);
        let f0 = m.profile.eval(x0);
        assert!((s.terms.tweezer + f0.d2 / f0.f).abs() < 1e-12);
        assert!(matches!(spring_constant_analytic(&m, FRAC_PI_2, 0.6, 1.0), Err(SibaError::Singular(_))));
    }

    #[test]
    fn gradient_consistency_two_mode() {
        let c = TrapConfiguration::two_mode(
            CavityMode::new(ModeProfile::fundamental(), 40.0, -20.0),
            CavityMode::new(ModeProfile::second_harmonic(), 40.0, -30.0),
        );
        for x in linspace(-1.5, 1.5, 301) {
            let fd = -first_derivative_5pt(&|y| potential(&c, y), x, 1e-5);
            let f = force(&c, x);
            assert!((fd - f).abs() < 1e-6 * (1.0 + f.abs()), "x={x}");
        }
    }

    #[test]
    fn depth_saturates() {
        let depth = |eta: f64| trap_depth(&single(eta, -eta / 2.0)).unwrap();
        assert!((depth(200.0) - PI).abs() / PI < 0.01);
        assert!(depth(10.0) < depth(50.0) && depth(50.0) < depth(200.0));
    }

    #[test]
    fn fwhm_matches_width_estimate() {
        for eta in [50.0, 100.0, 400.0] {
            let m = CavityMode::resonant_at(ModeProfile::fundamental(), eta, FRAC_PI_4);
            let w = photon_peak_fwhm(&m, FRAC_PI_4).unwrap();
            let est = 2.0 / (eta * m.profile.slope(FRAC_PI_4).abs());
            assert!((w - est).abs() / est < 0.1, "eta={eta} {w} vs {est}");
            // a = (η/2)cos 2x, so |a| = 1 at 2δ = asin(2/η) on either side.
            assert!((w - (2.0 / eta).asin()).abs() < 1e-12, "eta={eta} {w}");
        }
    }

    #[test]
    fn local_metrics_follow_hint() {
        let x0 = 0.25f64.acos() / 2.0;
        let eta = 100.0;
        let g = (2.0 * x0).sin();
        let d = 2.0 / (eta * g);
        let c = TrapConfiguration::two_mode(
            CavityMode::resonant_at(ModeProfile::fundamental(), eta, x0 + d / 2.0),
            CavityMode::resonant_at(ModeProfile::second_harmonic(), eta, x0 - d / 2.0),
        );
        let m = trap_metrics_near(&c, 0.0, x0).unwrap();
        assert!((m.minimum_position - x0).abs() < 2e-3, "{}", m.minimum_position);
        assert!((m.wall_separation.unwrap() - d).abs() < 1e-9);
        assert!(force(&c, m.minimum_position).abs() < 1e-6);
    }
}
