//! Acceptance criteria, runnable from tests and from the command line.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cavity::{maximize_eta, ScatteringModel};
use crate::dynamics::{adiabatic_deviation, simulate_periods};
use crate::error::Result;
use crate::experiments::{
    compare_with_tweezer, fit_regimes, optimize_harmonic, sweep_eta_fixed_depth, sweep_two_mode, wall_geometry,
    EtaDepthSweep, Regime, TwoModeSweep, BALANCED_MINIMUM,
};
use crate::model::{CavityMode, ModeProfile, TrapConfiguration};
use crate::numerics::first_derivative_5pt;
use crate::trap::{
    force, mode_intensity, photon_peak_fwhm, potential, spring_constant_numeric, trap_depth, tweezer_potential,
};

pub const DEFAULT_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable requirement, e.g. `0.04 ± 25%`.
    pub requirement: String,
    pub passed: bool,
}

impl Check {
    fn rel(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let passed = ((value - target) / target).abs() <= tol;
        Check { label: label.into(), value, requirement: format!("{target:.6} ± {}%", tol * 100.0), passed }
    }

    fn abs(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let passed = (value - target).abs() <= tol;
        Check { label: label.into(), value, requirement: format!("{target:.9} ± {tol:e}"), passed }
    }

    fn below(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { label: label.into(), value, requirement: format!("< {limit:e}"), passed: value < limit }
    }

    fn range(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check { label: label.into(), value, requirement: format!("in [{lo}, {hi}]"), passed: value >= lo && value <= hi }
    }

    fn holds(label: impl Into<String>, ok: bool) -> Self {
        Check { label: label.into(), value: f64::from(u8::from(ok)), requirement: "holds".into(), passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub checks: Vec<Check>,
    /// Failure of the computation itself, if any.
    pub error: Option<String>,
    pub runtime_s: f64,
    pub budget_s: Option<f64>,
    pub passed: bool,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] criterion {}: {} ({:.2} s", self.id, self.name, self.runtime_s)?;
        if let Some(b) = self.budget_s {
            write!(f, " of {b} s")?;
        }
        write!(f, ")")?;
        if let Some(e) = &self.error {
            write!(f, "\n    error: {e}")?;
        }
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "\n    {mark} {}: {:.6e} (want {})", c.label, c.value, c.requirement)?;
        }
        Ok(())
    }
}

pub const CRITERIA: [(u8, &str, Option<f64>); 7] = [
    (1, "trap-depth saturation", Some(1.0)),
    (2, "experienced intensity against eta at equal depth", Some(60.0)),
    (3, "eta_max law with scattering losses", Some(1.0)),
    (4, "two-mode harmonic back-action ratio", Some(120.0)),
    (5, "two-mode scaling envelopes", Some(600.0)),
    (6, "numerical hygiene", None),
    (7, "tweezer-limit equivalence", None),
];

/// Runs one criterion; `seed` drives the randomized configurations of criterion 6.
pub fn run_criterion(id: u8, seed: u64) -> Option<CriterionReport> {
    let &(_, name, budget) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = match id {
        1 => depth_saturation(),
        2 => eta_fixed_depth(),
        3 => eta_max_law(),
        4 => harmonic_ratio(),
        5 => scaling_envelopes(),
        6 => hygiene(seed),
        7 => tweezer_limit(),
        _ => unreachable!(),
    };
    let runtime_s = start.elapsed().as_secs_f64();
    let (checks, error) = match outcome {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let in_budget = budget.is_none_or(|b| runtime_s < b);
    let passed = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed) && in_budget;
    Some(CriterionReport { id, name: name.to_string(), checks, error, runtime_s, budget_s: budget, passed })
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0, seed)).collect()
}

fn single(eta: f64, x_r: f64) -> TrapConfiguration {
    TrapConfiguration::single(CavityMode::resonant_at(ModeProfile::fundamental(), eta, x_r))
}

fn depth_saturation() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for eta in [10.0, 100.0] {
        let c = single(eta, FRAC_PI_4);
        let depth = trap_depth(&c)?;
        let u0 = c.modes[0].energy_scale();
        let expected = 2.0 * (eta / 2.0).atan() / PI;
        out.push(Check::abs(format!("depth/(pi U0) at eta = {eta}"), depth / (PI * u0), expected, 1e-6));
    }
    Ok(out)
}

fn eta_fixed_depth() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (x_r, tol, name) in [(FRAC_PI_4, 0.10, "pi/4"), (PI / 10.0, 0.05, "pi/10")] {
        let t = sweep_eta_fixed_depth(&EtaDepthSweep { x_r, ..EtaDepthSweep::default() })?;
        let col = |n: &str| t.column(n).expect("fig3 column");
        let (eta, ratio, sim, ratio_high_ba) = (col("eta"), col("ratio"), col("ratio_sim_tweezer"), col("ratio_high_ba"));
        let last = eta.len() - 1;
        if x_r == FRAC_PI_4 {
            let monotone = sim.windows(2).all(|w| w[1] < w[0]);
            out.push(Check::holds("kx_r = pi/4: normalized intensity decreases with eta", monotone));
            out.push(Check::rel("kx_r = pi/4: ratio at eta = 0.01", sim[0], 1.0, 0.02));
        }
        out.push(Check::rel(format!("kx_r = {name}: ratio at eta = {}", eta[last]), ratio[last], ratio_high_ba[last], tol));
    }
    Ok(out)
}

fn eta_max_law() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for q in [1e4, 1e5, 1e6] {
        let sm = ScatteringModel::new(q, 1.0, 0.1)?;
        let (kr, eta) = maximize_eta(&sm)?;
        out.push(Check::rel(format!("eta_max at Q = {q:e}"), eta, (3.0 * q / (2.0 * PI * PI)).sqrt(), 0.005));
        out.push(Check::rel(format!("kr_opt at Q = {q:e}"), kr, (27.0 * PI * PI / (8.0 * q)).powf(1.0 / 6.0), 0.01));
        if q == 1e6 {
            out.push(Check::range("eta_max at Q = 1e6 is of order 400", eta, 350.0, 450.0));
        }
    }
    Ok(out)
}

fn harmonic_ratio() -> Result<Vec<Check>> {
    let eta = 100.0;
    let base = CavityMode::new(ModeProfile::fundamental(), 1.0, 0.0);
    let design = optimize_harmonic(&wall_geometry(&base, eta, 0.0, BALANCED_MINIMUM), BALANCED_MINIMUM)?;
    let cmp = compare_with_tweezer(&design, 0.01, 0.01)?;
    Ok(vec![
        Check::abs("predicted <I_hb>/<I_T>", design.intensity_ratio_predicted, 4.0 / eta, 1e-9),
        Check::rel("predicted spring against numeric curvature", design.k_predicted, design.k_numeric, 0.10),
        Check::rel("simulated <I_hb>/<I_T> at equal confinement", cmp.ratio, 4.0 / eta, 0.25),
    ])
}

fn scaling_envelopes() -> Result<Vec<Check>> {
    let s = TwoModeSweep::default();
    let t = sweep_two_mode(&s)?;
    let labelled = t.labels.as_ref().is_some_and(|l| l.values.iter().all(|v| Regime::from_label(v).is_some()));
    let fits = fit_regimes(&t)?;
    Ok(vec![
        Check::holds("every point carries a regime label", labelled),
        Check::abs("tweezer slope", fits.tweezer.fit.slope, -2.0, 0.1),
        Check::abs("high back-action slope", fits.high.fit.slope, -1.0, 0.1),
        Check::abs("harmonic back-action slope", fits.harmonic.fit.slope, -2.0, 0.1),
        Check::range("harmonic back-action suppression", fits.suppression, s.eta / 8.0, s.eta / 2.0),
    ])
}

/// Random configuration of one or two modes with a bound state near `x = 0`
/// (single mode) or near the balanced two-mode minimum.
fn random_config(rng: &mut ChaCha8Rng) -> TrapConfiguration {
    let eta = 10f64.powf(rng.random_range(-2.0..3.0));
    let power = 10f64.powf(rng.random_range(-1.0..1.0));
    if rng.random_bool(0.5) {
        let x_r = rng.random_range(0.2..1.3);
        TrapConfiguration::single(CavityMode::resonant_at(ModeProfile::fundamental(), eta, x_r).scale_power(power))
    } else {
        let base = CavityMode::new(ModeProfile::fundamental(), 1.0, 0.0).scale_power(power);
        let d = rng.random_range(0.0..0.3);
        wall_geometry(&base, eta, d, BALANCED_MINIMUM)
    }
}

fn hygiene(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c = random_config(&mut rng);
        let (lo, hi) = c.domain();
        let width = c.modes.iter().map(|m| 1.0 / (1.0 + 2.0 * m.eta)).fold(1.0, f64::min);
        let h = 1e-3 * width;
        let scale = (0..400).map(|i| force(&c, lo + (hi - lo) * (i as f64 + 0.5) / 400.0).abs()).fold(0.0, f64::max);
        let u = |x: f64| potential(&c, x);
        let (a, b) = (lo + 4.0 * h, hi - 4.0 * h);
        for i in 0..10_000 {
            let x = a + (b - a) * i as f64 / 9_999.0;
            let err = (force(&c, x) + first_derivative_5pt(&u, x, h)).abs() / scale;
            worst = worst.max(err);
        }
    }
    out.push(Check::below("force against -dU/dx, 20 random configurations on 1e4 points", worst, 1e-8));

    let mut worst = 0.0f64;
    for _ in 0..10 {
        let eta = 10f64.powf(rng.random_range(-1.0..2.0));
        let x_r = rng.random_range(0.3..1.2);
        let frac = rng.random_range(0.05..0.8);
        let c = single(eta, x_r);
        let e = frac * trap_depth(&c)?;
        let t = simulate_periods(&c, 0.0, e, 100)?;
        worst = worst.max(t.energy_drift()?);
    }
    out.push(Check::below("Verlet energy drift over 100 periods, 10 random configurations", worst, 1e-8));

    let c = single(1.0, FRAC_PI_4);
    let e = 0.1 * trap_depth(&c)?;
    out.push(Check::below("full against adiabatic, eta = 1, 10 periods", adiabatic_deviation(&c, e, 1e3, 10)?, 0.01));
    let c = single(10.0, FRAC_PI_4);
    let e = 0.1 * trap_depth(&c)?;
    out.push(Check::below("full against adiabatic, eta = 10, 1 period", adiabatic_deviation(&c, e, 1e3, 1)?, 0.01));

    for eta in [50.0, 100.0, 200.0] {
        let m = CavityMode::resonant_at(ModeProfile::fundamental(), eta, FRAC_PI_4);
        let w = photon_peak_fwhm(&m, FRAC_PI_4)?;
        let expected = 2.0 / (eta * m.profile.slope(FRAC_PI_4).abs());
        out.push(Check::rel(format!("photon peak FWHM at eta = {eta}"), w, expected, 0.10));
    }
    Ok(out)
}

fn tweezer_limit() -> Result<Vec<Check>> {
    let c = single(0.01, FRAC_PI_4);
    let m = &c.modes[0];
    let (lo, hi) = c.domain();
    let depth_t = {
        let us: Vec<f64> = (0..=2000).map(|i| tweezer_potential(m, lo + (hi - lo) * i as f64 / 2000.0)).collect();
        us.iter().copied().fold(f64::NEG_INFINITY, f64::max) - us.iter().copied().fold(f64::INFINITY, f64::min)
    };
    // The constant offset −U0·arctan(Δ̃) does not enter the force.
    let offset = potential(&c, lo) - tweezer_potential(m, lo);
    let worst = (0..=2000)
        .map(|i| lo + (hi - lo) * i as f64 / 2000.0)
        .map(|x| (potential(&c, x) - offset - tweezer_potential(m, x)).abs())
        .fold(0.0, f64::max);
    let k = spring_constant_numeric(&c, 0.0)?;
    let p = m.profile.eval(0.0);
    let k_tweezer = -mode_intensity(m, 0.0) / p.f * p.d2;
    Ok(vec![
        Check::below("max |U - U_T| / depth", worst / depth_t, 0.01),
        Check::rel("spring constant against the tweezer term", k, k_tweezer, 0.02),
    ])
}
