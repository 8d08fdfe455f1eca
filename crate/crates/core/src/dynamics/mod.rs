//! Time integration of the coupled particle-cavity equations of motion.
//!
//! The full model evolves the complex field amplitude of every mode in the
//! frame rotating at the laser frequency,
//!
//! ```text
//! dβ/dt = [i(κ/2)(Δ̃ + ηf(x)) − κ/2] β + sqrt(κ_ex)·E0
//! dp/dt = Σ |β|²·(κ/2)·η·f'(x)
//! ```
//!
//! and the adiabatic model replaces `β` by its instantaneous steady state, which
//! makes the motion conservative with potential [`crate::trap::potential`].

mod observables;

pub use observables::{
    boltzmann_average, experienced_intensity, experienced_intensity_high_ba, intensity_ratio_high_ba,
    oscillation_period, ExperiencedIntensity, PeriodEstimate,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SibaError};
use crate::model::{CavityMode, TrapConfiguration};
use crate::trap::{self, TrapMetrics};

/// Largest allowed `dt·κ` for the full model.
pub const MAX_DT_KAPPA: f64 = 0.1;
/// Largest allowed phase advance of the field per step, `dt·(κ/2)·|Δ̃ + ηf|`.
pub const MAX_DT_ROTATION: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorKind {
    Full,
    Adiabatic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub x: f64,
    pub p: f64,
    /// Field amplitude per mode; the steady-state value for adiabatic runs.
    pub beta: Vec<Complex64>,
}

impl TrajectoryState {
    pub fn photon_numbers(&self) -> impl Iterator<Item = f64> + '_ {
        self.beta.iter().map(|b| b.norm_sqr())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Spacing of the recorded samples.
    pub dt: f64,
    /// Integration step (equal to `dt` unless samples are thinned).
    pub step: f64,
    pub integrator: IntegratorKind,
    /// Total linewidth per mode used during integration.
    pub kappa: Vec<f64>,
    pub mass: f64,
    pub e_kin: f64,
    pub states: Vec<TrajectoryState>,
    /// `H_eff = p²/2m + U(x)` per recorded state.
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Relative change of `H_eff` between the means over the first and the
    /// last full period, measured against the kinetic energy. Averaging over
    /// periods removes the bounded O(dt²) oscillation of the Verlet energy.
    pub fn energy_drift(&self) -> Result<f64> {
        let c = oscillation_period(self)?.crossings;
        let k = c.len();
        let first = self.mean_energy(c[0], c[2]);
        let last = self.mean_energy(c[k - 3], c[k - 1]);
        Ok((last - first).abs() / self.e_kin.max(f64::MIN_POSITIVE))
    }

    fn mean_energy(&self, t0: f64, t1: f64) -> f64 {
        observables::time_average(self, t0, t1, |i| self.energy[i])
    }
}

/// Initial field for the full model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FieldStart {
    #[default]
    SteadyState,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Adiabatic,
    Full {
        /// Rescales every κ to this multiple of `ω0`, keeping `κ_ex/κ` (and hence `U0`).
        kappa_over_omega0: Option<f64>,
        field_start: FieldStart,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    Steps(usize),
    /// Stop once `count` momentum zero crossings were seen (plus one sample).
    Crossings { count: usize, max_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub dynamics: Dynamics,
    pub dt: f64,
    pub stop: StopRule,
    pub record_every: usize,
}

impl SimulationOptions {
    pub fn adiabatic(dt: f64, stop: StopRule) -> Self {
        SimulationOptions { dynamics: Dynamics::Adiabatic, dt, stop, record_every: 1 }
    }

    pub fn full(dt: f64, stop: StopRule, kappa_over_omega0: Option<f64>) -> Self {
        SimulationOptions {
            dynamics: Dynamics::Full { kappa_over_omega0, field_start: FieldStart::SteadyState },
            dt,
            stop,
            record_every: 1,
        }
    }

    pub fn record_every(mut self, k: usize) -> Self {
        self.record_every = k.max(1);
        self
    }

    pub fn field_start(mut self, start: FieldStart) -> Self {
        if let Dynamics::Full { field_start, .. } = &mut self.dynamics {
            *field_start = start;
        }
        self
    }
}

/// Velocity-Verlet integration of the adiabatic model for `n_steps` steps,
/// starting at `x0` with momentum `+sqrt(2mE_kin)`.
pub fn integrate_adiabatic(
    config: &TrapConfiguration,
    x0: f64,
    e_kin: f64,
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    if e_kin > 0.0 {
        let m = trap::trap_metrics_near(config, e_kin, x0)?;
        let (_, t_est) = suggest_timestep(config, &m)?;
        if dt > t_est / 200.0 {
            return Err(SibaError::Stability(format!(
                "dt = {dt} exceeds T/200 = {} for the estimated period {t_est}",
                t_est / 200.0
            )));
        }
    }
    simulate(config, x0, e_kin, &SimulationOptions::adiabatic(dt, StopRule::Steps(n_steps)))
}

/// Fixed-step RK4 integration of the full field and particle equations.
pub fn integrate_full(
    config: &TrapConfiguration,
    x0: f64,
    e_kin: f64,
    dt: f64,
    n_steps: usize,
    kappa_over_omega0: Option<f64>,
) -> Result<Trajectory> {
    simulate(config, x0, e_kin, &SimulationOptions::full(dt, StopRule::Steps(n_steps), kappa_over_omega0))
}

/// General entry point shared by both integrators.
pub fn simulate(config: &TrapConfiguration, x0: f64, e_kin: f64, opts: &SimulationOptions) -> Result<Trajectory> {
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(SibaError::Range(format!("time step must be positive, got {}", opts.dt)));
    }
    if !(e_kin >= 0.0) || !e_kin.is_finite() {
        return Err(SibaError::Range(format!("kinetic energy must be non-negative, got {e_kin}")));
    }
    let (lo, hi) = config.domain();
    if !(lo..=hi).contains(&x0) {
        return Err(SibaError::Domain { x: x0, lo, hi });
    }
    let mass = config.particle.mass;
    if !(mass > 0.0) {
        return Err(SibaError::Range(format!("mass must be positive, got {mass}")));
    }
    let p0 = if e_kin == 0.0 { 0.0 } else { (2.0 * mass * e_kin).sqrt() };
    if !p0.is_finite() {
        return Err(SibaError::Range("a particle of infinite mass needs zero kinetic energy".into()));
    }
    if e_kin > 0.0 {
        trap::trap_metrics_near(config, e_kin, x0)?;
    }
    simulate_from(config, x0, p0, opts)
}

/// Integrates from an arbitrary phase-space point without the bound-state check.
pub fn simulate_from(config: &TrapConfiguration, x: f64, p: f64, opts: &SimulationOptions) -> Result<Trajectory> {
    let mass = config.particle.mass;
    let e_kin = if mass.is_infinite() { 0.0 } else { p * p / (2.0 * mass) };
    match opts.dynamics {
        Dynamics::Adiabatic => {
            let stepper = Verlet::new(config, x, p, opts.dt);
            run(stepper, config, e_kin, opts, IntegratorKind::Adiabatic)
        }
        Dynamics::Full { kappa_over_omega0, field_start } => {
            let cfg = rescale_kappa(config, kappa_over_omega0)?;
            check_full_step(&cfg, opts.dt)?;
            let stepper = Rk4::new(&cfg, x, p, opts.dt, field_start);
            run(stepper, &cfg, e_kin, opts, IntegratorKind::Full)
        }
    }
}

/// Copy of `config` with every κ set to `ratio·ω0`, preserving `κ_ex/κ`.
pub fn rescale_kappa(config: &TrapConfiguration, ratio: Option<f64>) -> Result<TrapConfiguration> {
    let Some(ratio) = ratio else {
        return Ok(config.clone());
    };
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(SibaError::Range(format!("kappa/omega0 must be positive, got {ratio}")));
    }
    let omega0 = (config.modes[0].energy_scale() / config.particle.mass).sqrt();
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(SibaError::Range("kappa/omega0 needs a finite positive omega0".into()));
    }
    let mut out = config.clone();
    for m in &mut out.modes {
        let target = ratio * omega0;
        let s = target / m.total_kappa();
        m.kappa_ex *= s;
        m.kappa_in *= s;
        m.kappa = m.total_kappa();
    }
    Ok(out)
}

/// Rejects time steps that under-resolve the cavity decay or the field rotation.
pub fn check_full_step(config: &TrapConfiguration, dt: f64) -> Result<()> {
    for (i, m) in config.modes.iter().enumerate() {
        let k = m.total_kappa();
        if dt * k > MAX_DT_KAPPA {
            return Err(SibaError::Stability(format!(
                "dt*kappa = {} exceeds {MAX_DT_KAPPA} for mode {i} (kappa = {k}); use dt <= {}",
                dt * k,
                MAX_DT_KAPPA / k
            )));
        }
        let rot = 0.5 * k * max_shifted_detuning(m);
        if dt * rot > MAX_DT_ROTATION {
            return Err(SibaError::Stability(format!(
                "field rotation per step {} exceeds {MAX_DT_ROTATION} for mode {i}; use dt <= {}",
                dt * rot,
                MAX_DT_ROTATION / rot
            )));
        }
    }
    Ok(())
}

/// Largest stable full-model step with a safety margin.
pub fn full_model_timestep(config: &TrapConfiguration) -> f64 {
    config
        .modes
        .iter()
        .map(|m| {
            let k = m.total_kappa();
            (0.5 * MAX_DT_KAPPA / k).min(0.2 * MAX_DT_ROTATION / (0.5 * k * max_shifted_detuning(m)).max(1e-300))
        })
        .fold(f64::INFINITY, f64::min)
}

fn max_shifted_detuning(m: &CavityMode) -> f64 {
    // 0 ≤ f ≤ 1, so ηf + Δ̃ ranges over [Δ̃, η + Δ̃].
    m.detuning_tilde.abs().max((m.eta + m.detuning_tilde).abs())
}

/// `(dt, T_est)`: `dt = min(T_est/500, 0.02/ω_max)` with `ω_max` the largest
/// local oscillation frequency between the turning points.
pub fn suggest_timestep(config: &TrapConfiguration, metrics: &TrapMetrics) -> Result<(f64, f64)> {
    let mass = config.particle.mass;
    let (a, b) = metrics.turning_points;
    let curv = |x: f64| -> f64 { config.modes.iter().map(|m| trap::spring_terms(m, x).total()).sum() };
    let n = 401;
    let mut kmax = curv(metrics.minimum_position).abs();
    for i in 0..n {
        let x = a + (b - a) * i as f64 / (n - 1) as f64;
        kmax = kmax.max(curv(x).abs());
    }
    let omega_max = (kmax / mass).sqrt();
    let k0 = metrics.spring_numeric;
    let t_harm = if k0 > 0.0 { 2.0 * std::f64::consts::PI * (mass / k0).sqrt() } else { 0.0 };
    let t_well = if metrics.e_kin > 0.0 { 2.0 * metrics.confinement / (2.0 * metrics.e_kin / mass).sqrt() } else { 0.0 };
    let t_est = t_harm.max(t_well);
    if !(t_est > 0.0) || !t_est.is_finite() || !(omega_max > 0.0) {
        return Err(SibaError::NoPeriod { crossings: 0 });
    }
    Ok(((t_est / 500.0).min(0.02 / omega_max), t_est))
}

/// Adiabatic trajectory covering `periods` full periods, with the time step
/// from [`suggest_timestep`].
pub fn simulate_periods(config: &TrapConfiguration, x0: f64, e_kin: f64, periods: usize) -> Result<Trajectory> {
    let m = trap::trap_metrics_near(config, e_kin, x0)?;
    let (dt, t_est) = suggest_timestep(config, &m)?;
    let max_steps = ((periods as f64 + 2.0) * 4.0 * t_est / dt).ceil() as usize + 10_000;
    let stop = StopRule::Crossings { count: 2 * periods + 1, max_steps };
    simulate(config, m.minimum_position, e_kin, &SimulationOptions::adiabatic(dt, stop))
}

/// Largest position difference between full and adiabatic trajectories over
/// `periods` estimated periods, in units of half the confinement. Both start at
/// the trap minimum with the same momentum and share the full-model step.
pub fn adiabatic_deviation(config: &TrapConfiguration, e_kin: f64, kappa_over_omega0: f64, periods: usize) -> Result<f64> {
    let m = trap::trap_metrics(config, e_kin)?;
    let (_, t_est) = suggest_timestep(config, &m)?;
    let cfg = rescale_kappa(config, Some(kappa_over_omega0))?;
    let dt = full_model_timestep(&cfg).min(t_est / 2000.0);
    let steps = (periods as f64 * t_est / dt).ceil() as usize;
    let every = (steps / 20_000).max(1);
    let x0 = m.minimum_position;
    let full = SimulationOptions::full(dt, StopRule::Steps(steps), Some(kappa_over_omega0)).record_every(every);
    let full = simulate(config, x0, e_kin, &full)?;
    let adi = simulate(config, x0, e_kin, &SimulationOptions::adiabatic(dt, StopRule::Steps(steps)).record_every(every))?;
    let amp = 0.5 * m.confinement;
    Ok(full.states.iter().zip(&adi.states).map(|(a, b)| (a.x - b.x).abs()).fold(0.0, f64::max) / amp)
}

trait Stepper {
    fn advance(&mut self) -> Result<()>;
    fn state(&self) -> TrajectoryState;
    fn momentum(&self) -> f64;
    fn steps(&self) -> usize;
}

fn run<S: Stepper>(
    mut stepper: S,
    config: &TrapConfiguration,
    e_kin: f64,
    opts: &SimulationOptions,
    kind: IntegratorKind,
) -> Result<Trajectory> {
    let mass = config.particle.mass;
    let energy = |s: &TrajectoryState| -> f64 {
        let kin = if mass.is_infinite() { 0.0 } else { s.p * s.p / (2.0 * mass) };
        kin + trap::potential(config, s.x)
    };
    let every = opts.record_every.max(1);
    let mut states = Vec::new();
    let mut energies = Vec::new();
    let s0 = stepper.state();
    energies.push(energy(&s0));
    states.push(s0);
    let (limit, target) = match opts.stop {
        StopRule::Steps(n) => (n, None),
        StopRule::Crossings { count, max_steps } => (max_steps, Some(count)),
    };
    let mut crossings = 0usize;
    let mut p_prev = stepper.momentum();
    let mut done = false;
    while stepper.steps() < limit {
        stepper.advance()?;
        let p = stepper.momentum();
        if (p_prev > 0.0 && p <= 0.0) || (p_prev < 0.0 && p >= 0.0) {
            crossings += 1;
        }
        if p != 0.0 {
            p_prev = p;
        }
        if target.is_some_and(|c| crossings >= c) {
            done = true;
        }
        if stepper.steps().is_multiple_of(every) {
            let s = stepper.state();
            energies.push(energy(&s));
            states.push(s);
            if done {
                break;
            }
        }
    }
    if let Some(c) = target {
        if crossings < c {
            return Err(SibaError::NoPeriod { crossings });
        }
    }
    Ok(Trajectory {
        dt: opts.dt * every as f64,
        step: opts.dt,
        integrator: kind,
        kappa: config.modes.iter().map(CavityMode::total_kappa).collect(),
        mass,
        e_kin,
        states,
        energy: energies,
    })
}

fn nonfinite(step: usize, what: &str) -> SibaError {
    SibaError::Integration { step, reason: format!("non-finite {what}") }
}

/// Steady-state amplitude `sqrt(κ_ex)E0 / ((κ/2)(1 − i(ηf + Δ̃)))`.
pub fn steady_state_amplitude(mode: &CavityMode, x: f64) -> Complex64 {
    let k = mode.total_kappa();
    let drive = mode.kappa_ex.sqrt() * mode.drive_flux_sq.sqrt();
    Complex64::new(drive, 0.0) / Complex64::new(0.5 * k, -0.5 * k * mode.shifted_detuning(x))
}

struct Verlet<'a> {
    config: &'a TrapConfiguration,
    inv_mass: f64,
    x: f64,
    p: f64,
    f: f64,
    dt: f64,
    n: usize,
}

impl<'a> Verlet<'a> {
    fn new(config: &'a TrapConfiguration, x: f64, p: f64, dt: f64) -> Self {
        let inv_mass = 1.0 / config.particle.mass;
        Verlet { config, inv_mass, x, p, f: trap::force(config, x), dt, n: 0 }
    }
}

impl Stepper for Verlet<'_> {
    fn advance(&mut self) -> Result<()> {
        let half = self.p + 0.5 * self.dt * self.f;
        self.x += self.dt * half * self.inv_mass;
        self.f = trap::force(self.config, self.x);
        self.p = half + 0.5 * self.dt * self.f;
        self.n += 1;
        if !(self.x.is_finite() && self.p.is_finite()) {
            return Err(nonfinite(self.n, "position or momentum"));
        }
        Ok(())
    }

    fn state(&self) -> TrajectoryState {
        TrajectoryState {
            t: self.n as f64 * self.dt,
            x: self.x,
            p: self.p,
            beta: self.config.modes.iter().map(|m| steady_state_amplitude(m, self.x)).collect(),
        }
    }

    fn momentum(&self) -> f64 {
        self.p
    }

    fn steps(&self) -> usize {
        self.n
    }
}

const MAX_MODES: usize = 2;

#[derive(Clone, Copy)]
struct FullState {
    x: f64,
    p: f64,
    b: [Complex64; MAX_MODES],
}

impl FullState {
    fn axpy(&self, h: f64, d: &FullState) -> FullState {
        let mut b = self.b;
        for (bi, di) in b.iter_mut().zip(d.b) {
            *bi += di * h;
        }
        FullState { x: self.x + h * d.x, p: self.p + h * d.p, b }
    }
}

struct ModeCoeffs {
    profile: crate::model::ModeProfile,
    half_kappa: f64,
    eta: f64,
    detuning: f64,
    drive: f64,
}

struct Rk4 {
    modes: Vec<ModeCoeffs>,
    inv_mass: f64,
    y: FullState,
    dt: f64,
    n: usize,
}

impl Rk4 {
    fn new(config: &TrapConfiguration, x: f64, p: f64, dt: f64, start: FieldStart) -> Self {
        let mut b = [Complex64::new(0.0, 0.0); MAX_MODES];
        if start == FieldStart::SteadyState {
            for (bi, m) in b.iter_mut().zip(&config.modes) {
                *bi = steady_state_amplitude(m, x);
            }
        }
        let modes = config
            .modes
            .iter()
            .map(|m| ModeCoeffs {
                profile: m.profile.clone(),
                half_kappa: 0.5 * m.total_kappa(),
                eta: m.eta,
                detuning: m.detuning_tilde,
                drive: m.kappa_ex.sqrt() * m.drive_flux_sq.sqrt(),
            })
            .collect();
        Rk4 { modes, inv_mass: 1.0 / config.particle.mass, y: FullState { x, p, b }, dt, n: 0 }
    }

    fn deriv(&self, y: &FullState) -> FullState {
        let mut d = FullState { x: y.p * self.inv_mass, p: 0.0, b: [Complex64::new(0.0, 0.0); MAX_MODES] };
        for (i, m) in self.modes.iter().enumerate() {
            let pt = m.profile.eval(y.x);
            let a = m.detuning + m.eta * pt.f;
            let b = y.b[i];
            d.b[i] = Complex64::new(-m.half_kappa, m.half_kappa * a) * b + m.drive;
            d.p += b.norm_sqr() * m.half_kappa * m.eta * pt.d1;
        }
        d
    }
}

impl Stepper for Rk4 {
    fn advance(&mut self) -> Result<()> {
        let h = self.dt;
        let y = self.y;
        let k1 = self.deriv(&y);
        let k2 = self.deriv(&y.axpy(0.5 * h, &k1));
        let k3 = self.deriv(&y.axpy(0.5 * h, &k2));
        let k4 = self.deriv(&y.axpy(h, &k3));
        let mut next = y;
        next.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
        next.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
        for i in 0..self.modes.len() {
            next.b[i] += (k1.b[i] + k2.b[i] * 2.0 + k3.b[i] * 2.0 + k4.b[i]) * (h / 6.0);
        }
        self.y = next;
        self.n += 1;
        if !(next.x.is_finite() && next.p.is_finite() && next.b.iter().all(|b| b.re.is_finite() && b.im.is_finite())) {
            return Err(nonfinite(self.n, "state"));
        }
        Ok(())
    }

    fn state(&self) -> TrajectoryState {
        TrajectoryState {
            t: self.n as f64 * self.dt,
            x: self.y.x,
            p: self.y.p,
            beta: self.y.b[..self.modes.len()].to_vec(),
        }
    }

    fn momentum(&self) -> f64 {
        self.y.p
    }

    fn steps(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests;
