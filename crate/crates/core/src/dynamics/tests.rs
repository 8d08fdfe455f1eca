use super::*;
use crate::model::ModeProfile;
use crate::trap::{photon_number, trap_depth, trap_metrics};
use std::f64::consts::{FRAC_PI_4, PI};

fn single(eta: f64, x_r: f64) -> TrapConfiguration {
    TrapConfiguration::single(CavityMode::resonant_at(ModeProfile::fundamental(), eta, x_r))
}

fn tweezer() -> TrapConfiguration {
    TrapConfiguration::single(CavityMode::new(ModeProfile::fundamental(), 0.01, 0.0))
}

#[test]
fn stationary_trajectory() {
    let c = single(10.0, FRAC_PI_4);
    let t = integrate_adiabatic(&c, 0.0, 0.0, 0.01, 100).unwrap();
    assert_eq!(t.len(), 101);
    assert!(t.states.iter().all(|s| s.x == 0.0 && s.p == 0.0));
    assert!(matches!(oscillation_period(&t), Err(SibaError::NoPeriod { crossings: 0 })));
}

#[test]
fn harmonic_period() {
    let c = tweezer();
    let depth = trap_depth(&c).unwrap();
    let t = simulate_periods(&c, 0.0, 1e-4 * depth, 4).unwrap();
    // U ≈ −U0·η·cos²x ⇒ k = 2U0η.
    let expected = 2.0 * PI / (2.0 * 0.01f64).sqrt();
    let p = oscillation_period(&t).unwrap();
    assert!((p.period - expected).abs() / expected < 5e-3, "{} vs {expected}", p.period);
    assert!(p.spacing_rel_std < 1e-6, "{}", p.spacing_rel_std);
}

#[test]
fn square_well_period() {
    let mut errs = Vec::new();
    for eta in [100.0, 1000.0] {
        let c = single(eta, FRAC_PI_4);
        let depth = trap_depth(&c).unwrap();
        let e = 0.1 * depth;
        let m = trap_metrics(&c, e).unwrap();
        let t = simulate_periods(&c, 0.0, e, 2).unwrap();
        let p = oscillation_period(&t).unwrap();
        let expected = 2.0 * m.confinement / (2.0 * e).sqrt();
        errs.push((p.period - expected).abs() / expected);
    }
    // The 1/a tail of the walls softens the box; it hardens as eta grows.
    assert!(errs[1] < 0.02, "{errs:?}");
    assert!(errs[1] < errs[0], "{errs:?}");
}

#[test]
fn verlet_energy_drift_is_tiny() {
    for (eta, x_r, frac) in [(0.1, 0.6, 0.3), (10.0, FRAC_PI_4, 0.5), (100.0, 0.5, 0.8)] {
        let c = single(eta, x_r);
        let depth = trap_depth(&c).unwrap();
        let t = simulate_periods(&c, 0.0, frac * depth, 100).unwrap();
        let drift = t.energy_drift().unwrap();
        assert!(drift < 1e-8, "eta={eta}: drift {drift}");
    }
}

#[test]
fn time_reversal_retraces() {
    let c = single(10.0, FRAC_PI_4);
    let depth = trap_depth(&c).unwrap();
    let fwd = simulate_periods(&c, 0.0, 0.3 * depth, 1).unwrap();
    let n = fwd.len() - 1;
    let last = &fwd.states[n];
    let opts = SimulationOptions::adiabatic(fwd.step, StopRule::Steps(n));
    let back = simulate_from(&c, last.x, -last.p, &opts).unwrap();
    let amp = 0.5 * trap_metrics(&c, 0.3 * depth).unwrap().confinement;
    for (i, s) in back.states.iter().enumerate() {
        assert!((s.x - fwd.states[n - i].x).abs() < 1e-6 * amp);
    }
}

#[test]
fn frozen_particle_field_relaxes() {
    let c = single(10.0, FRAC_PI_4).with_mass(f64::INFINITY);
    let kappa = c.modes[0].total_kappa();
    let x0 = 0.3;
    let n_ss = photon_number(&c.modes[0], x0);
    let dt = full_model_timestep(&c);
    for (start, t_end) in [(FieldStart::SteadyState, 20.0), (FieldStart::Vacuum, 40.0)] {
        let steps = (t_end / kappa / dt).ceil() as usize;
        let opts = SimulationOptions::full(dt, StopRule::Steps(steps), None).field_start(start);
        let t = simulate(&c, x0, 0.0, &opts).unwrap();
        let last = t.states.last().unwrap();
        assert_eq!(last.x, x0);
        let n = last.beta[0].norm_sqr();
        assert!((n - n_ss).abs() / n_ss < 1e-6, "{start:?}: {n} vs {n_ss}");
    }
}

#[test]
fn infinite_mass_needs_zero_energy() {
    let c = single(10.0, FRAC_PI_4).with_mass(f64::INFINITY);
    let opts = SimulationOptions::adiabatic(0.01, StopRule::Steps(10));
    assert!(simulate(&c, 0.0, 0.1, &opts).is_err());
}

#[test]
fn full_step_precheck() {
    let mut c = single(10.0, FRAC_PI_4);
    c.modes[0] = c.modes[0].clone().with_linewidths(50.0, 50.0);
    let e = integrate_full(&c, 0.0, 0.0, 1.0, 10, None).unwrap_err();
    assert!(matches!(e, SibaError::Stability(_)));
    assert!(e.is_input_error());
    assert!(e.to_string().contains("dt*kappa"));
}

#[test]
fn rescale_keeps_energy_unit() {
    let c = single(10.0, FRAC_PI_4).with_mass(4.0);
    let r = rescale_kappa(&c, Some(500.0)).unwrap();
    let omega0 = (c.modes[0].energy_scale() / 4.0).sqrt();
    assert!((r.modes[0].total_kappa() - 500.0 * omega0).abs() < 1e-9);
    assert!((r.modes[0].energy_scale() - c.modes[0].energy_scale()).abs() < 1e-12);
    assert_eq!(r.modes[0].kappa_ex / r.modes[0].total_kappa(), 0.5);
}

fn full_vs_adiabatic(eta: f64, ratio: f64, periods: usize) -> f64 {
    let c = single(eta, FRAC_PI_4);
    let depth = trap_depth(&c).unwrap();
    let e = 0.1 * depth;
    let m = trap_metrics(&c, e).unwrap();
    let amp = 0.5 * m.confinement;
    let (_, t_est) = suggest_timestep(&c, &m).unwrap();
    let cfg = rescale_kappa(&c, Some(ratio)).unwrap();
    let dt = full_model_timestep(&cfg).min(t_est / 2000.0);
    let steps = (periods as f64 * t_est / dt).ceil() as usize;
    let every = (steps / 20_000).max(1);
    let full = simulate(&c, 0.0, e, &SimulationOptions::full(dt, StopRule::Steps(steps), Some(ratio)).record_every(every))
        .unwrap();
    let adi = simulate(&c, 0.0, e, &SimulationOptions::adiabatic(dt, StopRule::Steps(steps)).record_every(every)).unwrap();
    for s in &full.states {
        let n_max = cfg.modes[0].max_photon_number();
        assert!(s.beta[0].norm_sqr() <= 1.01 * n_max);
    }
    full.states
        .iter()
        .zip(&adi.states)
        .map(|(a, b)| (a.x - b.x).abs())
        .fold(0.0, f64::max)
        / amp
}

#[test]
fn full_model_tracks_adiabatic_when_cavity_is_fast() {
    let dev = full_vs_adiabatic(1.0, 1e3, 10);
    assert!(dev < 0.01, "deviation {dev}");
    // Cavity lag heats the orbit at a rate ~ eta*omega/kappa; at eta = 10 the
    // match holds over one period only.
    let dev = full_vs_adiabatic(10.0, 1e3, 1);
    assert!(dev < 0.01, "deviation {dev}");
}

#[test]
fn full_model_deviation_shrinks_with_kappa() {
    let devs: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&r| full_vs_adiabatic(1.0, r, 10)).collect();
    assert!(devs[0] > 0.01, "{devs:?}");
    assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
}

#[test]
fn tweezer_intensity_equals_depth() {
    let c = tweezer();
    let depth = trap_depth(&c).unwrap();
    let t = simulate_periods(&c, 0.0, 1e-3 * depth, 1).unwrap();
    let j = experienced_intensity(&t, &c).unwrap();
    // δU_T = U0·η/(1 + Δ̃²) = 0.01.
    assert!((j.raw - 0.01).abs() / 0.01 < 0.02, "{}", j.raw);
    assert!((j.normalized - j.raw / (1e-3 * depth)).abs() < 1e-12);
}

#[test]
fn high_ba_intensity_is_linear_in_energy() {
    let c = single(200.0, FRAC_PI_4);
    let depth = trap_depth(&c).unwrap();
    let j = |frac: f64| {
        let t = simulate_periods(&c, 0.0, frac * depth, 1).unwrap();
        experienced_intensity(&t, &c).unwrap().raw
    };
    let ratio = j(0.2) / j(0.1);
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
}

#[test]
fn high_ba_closed_forms() {
    let m = CavityMode::new(ModeProfile::fundamental(), 100.0, -50.0);
    let v = experienced_intensity_high_ba(&m, FRAC_PI_4, 1.0).unwrap();
    assert!((v - 4.0 / PI).abs() < 1e-12);
    assert_eq!(experienced_intensity_high_ba(&m, FRAC_PI_4, 0.0).unwrap(), 0.0);
    assert!(matches!(experienced_intensity_high_ba(&m, 0.0, 1.0), Err(SibaError::Singular(_))));
    // Near the antinode f/|f'| ≈ 1/(2x).
    let x = 1e-3;
    let v = experienced_intensity_high_ba(&m, x, 1.0).unwrap();
    assert!((v * x * x - 1.0).abs() < 1e-5);
    let r = intensity_ratio_high_ba(&m, FRAC_PI_4, 0.1).unwrap();
    assert!((r - 0.4 / PI).abs() < 1e-12);
}

#[test]
fn boltzmann_limits() {
    let depth = 3.0;
    let c = boltzmann_average(depth, |_| Ok(2.5), 0.4, 16).unwrap();
    assert!((c - 2.5).abs() < 1e-14);
    let zero = boltzmann_average(depth, |e| Ok(e / depth), 0.0, 16).unwrap();
    assert!((zero - 1e-6).abs() < 1e-18);
    let kt = 0.01;
    let lin = boltzmann_average(depth, |e| Ok(7.0 * e), kt, 16).unwrap();
    assert!((lin - 7.0 * kt).abs() / (7.0 * kt) < 2e-3, "{lin}");
    assert!(boltzmann_average(depth, |_| Ok(1.0), 1e3, 4).is_err());
    assert!(boltzmann_average(depth, |_| Ok(1.0), -1.0, 4).is_err());
}

#[test]
fn boltzmann_is_deterministic_under_parallelism() {
    let f = |e: f64| Ok((e * 3.0).sin() + e * e);
    let a = boltzmann_average(2.0, f, 0.1, 24).unwrap();
    let b = boltzmann_average(2.0, f, 0.1, 24).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn unbound_start_is_rejected() {
    let c = single(10.0, FRAC_PI_4);
    let depth = trap_depth(&c).unwrap();
    let e = integrate_adiabatic(&c, 0.0, 1.5 * depth, 1e-3, 10).unwrap_err();
    assert!(matches!(e, SibaError::Unbound { .. }));
}

#[test]
fn coarse_adiabatic_step_is_rejected() {
    let c = tweezer();
    let depth = trap_depth(&c).unwrap();
    assert!(matches!(integrate_adiabatic(&c, 0.0, 0.1 * depth, 1.0, 10), Err(SibaError::Stability(_))));
}
