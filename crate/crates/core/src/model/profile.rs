//! Dimensionless cavity intensity profiles `f(x)` with analytic or
//! spline-interpolated derivatives. Positions are in units of `1/k`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Result, SibaError};

fn default_lo() -> f64 {
    -FRAC_PI_2
}

fn default_hi() -> f64 {
    FRAC_PI_2
}

/// Profile value together with its first two derivatives at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeProfile {
    /// `cos²(kx)`, the fundamental Fabry-Perot mode.
    Fundamental {
        #[serde(default = "default_lo")]
        x_lo: f64,
        #[serde(default = "default_hi")]
        x_hi: f64,
    },
    /// `sin²(2kx)`, the second Fabry-Perot mode.
    SecondHarmonic {
        #[serde(default = "default_lo")]
        x_lo: f64,
        #[serde(default = "default_hi")]
        x_hi: f64,
    },
    Tabulated(TabulatedProfile),
}

impl ModeProfile {
    pub fn fundamental() -> Self {
        ModeProfile::Fundamental { x_lo: default_lo(), x_hi: default_hi() }
    }

    pub fn second_harmonic() -> Self {
        ModeProfile::SecondHarmonic { x_lo: default_lo(), x_hi: default_hi() }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            ModeProfile::Fundamental { x_lo, x_hi } | ModeProfile::SecondHarmonic { x_lo, x_hi } => {
                (*x_lo, *x_hi)
            }
            ModeProfile::Tabulated(t) => (t.x_lo, t.x_hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if self.contains(x) {
            Ok(())
        } else {
            Err(SibaError::Domain { x, lo, hi })
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> ProfilePoint {
        match self {
            ModeProfile::Fundamental { .. } => {
                let (s2, c2) = (2.0 * x).sin_cos();
                let c = x.cos();
                ProfilePoint { f: c * c, d1: -s2, d2: -2.0 * c2 }
            }
            ModeProfile::SecondHarmonic { .. } => {
                let s2 = (2.0 * x).sin();
                let (s4, c4) = (4.0 * x).sin_cos();
                ProfilePoint { f: s2 * s2, d1: 2.0 * s4, d2: 8.0 * c4 }
            }
            ModeProfile::Tabulated(t) => t.eval(x),
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self {
            ModeProfile::Fundamental { .. } => x.cos().powi(2),
            ModeProfile::SecondHarmonic { .. } => (2.0 * x).sin().powi(2),
            ModeProfile::Tabulated(t) => t.eval(x).f,
        }
    }

    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        self.eval(x).d1
    }

    /// Analytic profiles with identical kind and domain have the same periodicity.
    pub(crate) fn same_shape(&self, other: &ModeProfile) -> bool {
        match (self, other) {
            (ModeProfile::Fundamental { .. }, ModeProfile::Fundamental { .. })
            | (ModeProfile::SecondHarmonic { .. }, ModeProfile::SecondHarmonic { .. }) => true,
            (ModeProfile::Tabulated(a), ModeProfile::Tabulated(b)) => a.samples == b.samples,
            _ => false,
        }
    }
}

/// Uniformly sampled profile interpolated by a clamped cubic spline.
///
/// End slopes are clamped to the three-point one-sided difference of the
/// samples, so `f`, `f'` and `f''` are continuous inside the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedSpec", into = "TabulatedSpec")]
pub struct TabulatedProfile {
    x_lo: f64,
    x_hi: f64,
    samples: Vec<f64>,
    /// Spline second derivatives at the knots.
    moments: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TabulatedSpec {
    x_lo: f64,
    x_hi: f64,
    samples: Vec<f64>,
}

impl TryFrom<TabulatedSpec> for TabulatedProfile {
    type Error = SibaError;

    fn try_from(spec: TabulatedSpec) -> Result<Self> {
        TabulatedProfile::new(spec.x_lo, spec.x_hi, spec.samples)
    }
}

impl From<TabulatedProfile> for TabulatedSpec {
    fn from(t: TabulatedProfile) -> Self {
        TabulatedSpec { x_lo: t.x_lo, x_hi: t.x_hi, samples: t.samples }
    }
}

impl TabulatedProfile {
    pub fn new(x_lo: f64, x_hi: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(SibaError::validation("profile.samples", "need at least 4 samples"));
        }
        if !(x_lo.is_finite() && x_hi.is_finite() && x_hi > x_lo) {
            return Err(SibaError::validation("profile.x_hi", "domain must satisfy x_lo < x_hi"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(SibaError::validation("profile.samples", "samples must be finite"));
        }
        let moments = clamped_spline_moments(&samples, (x_hi - x_lo) / (samples.len() - 1) as f64);
        Ok(TabulatedProfile { x_lo, x_hi, samples, moments })
    }

    /// Samples `profile` on `n` uniform points of its own domain.
    pub fn from_profile(profile: &ModeProfile, n: usize) -> Result<Self> {
        let (lo, hi) = profile.domain();
        let samples = crate::numerics::linspace(lo, hi, n).into_iter().map(|x| profile.value(x)).collect();
        Self::new(lo, hi, samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn step(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.samples.len() - 1) as f64
    }

    fn eval(&self, x: f64) -> ProfilePoint {
        let h = self.step();
        let n = self.samples.len();
        let u = ((x - self.x_lo) / h).clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        let t = x - (self.x_lo + i as f64 * h);
        let (y0, y1) = (self.samples[i], self.samples[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let a = h - t;
        let f = m0 * a.powi(3) / (6.0 * h)
            + m1 * t.powi(3) / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * t;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * t * t / (2.0 * h) - y0 / h + m0 * h / 6.0 + y1 / h
            - m1 * h / 6.0;
        let d2 = (m0 * a + m1 * t) / h;
        ProfilePoint { f, d1, d2 }
    }
}

/// Second derivatives of the clamped cubic spline through uniformly spaced `y`.
fn clamped_spline_moments(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let s0 = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    let sn = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    // Tridiagonal system: sub/diag/sup and right-hand side.
    let mut diag = vec![4.0 * h; n];
    let off = h;
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0 * h;
    diag[n - 1] = 2.0 * h;
    rhs[0] = 6.0 * ((y[1] - y[0]) / h - s0);
    rhs[n - 1] = 6.0 * (sn - (y[n - 1] - y[n - 2]) / h);
    for i in 1..n - 1 {
        rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
    }
    // Thomas algorithm.
    for i in 1..n {
        let w = off / diag[i - 1];
        diag[i] -= w * off;
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - off * m[i + 1]) / diag[i];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{first_derivative_5pt, linspace};

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for p in [ModeProfile::fundamental(), ModeProfile::second_harmonic()] {
            let (lo, hi) = p.domain();
            for x in linspace(lo + 0.01, hi - 0.01, 401) {
                let e = p.eval(x);
                let fd1 = first_derivative_5pt(&|y| p.value(y), x, 1e-3);
                let fd2 = first_derivative_5pt(&|y| p.slope(y), x, 1e-3);
                assert!((e.d1 - fd1).abs() < 1e-8, "{p:?} f' at {x}");
                assert!((e.d2 - fd2).abs() < 1e-8, "{p:?} f'' at {x}");
                assert!((0.0..=1.0).contains(&e.f));
            }
        }
    }

    #[test]
    fn tabulated_reproduces_cos2() {
        let t = TabulatedProfile::from_profile(&ModeProfile::fundamental(), 801).unwrap();
        let tab = ModeProfile::Tabulated(t);
        for x in linspace(-1.5, 1.5, 97) {
            let a = ModeProfile::fundamental().eval(x);
            let b = tab.eval(x);
            assert!((a.f - b.f).abs() < 1e-8);
            assert!((a.d1 - b.d1).abs() < 1e-5);
            assert!((a.d2 - b.d2).abs() < 1e-2);
        }
    }

    #[test]
    fn tabulated_slope_is_continuous_at_knots() {
        let samples: Vec<f64> = (0..9).map(|i| ((i as f64) * 0.3).sin().powi(2)).collect();
        let t = TabulatedProfile::new(0.0, 2.4, samples).unwrap();
        let h = 0.3;
        for k in 1..8 {
            let x = k as f64 * h;
            let l = t.eval(x - 1e-10);
            let r = t.eval(x + 1e-10);
            assert!((l.d1 - r.d1).abs() < 1e-8);
            assert!((l.f - t.samples()[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn tabulated_json_roundtrip_rebuilds_spline() {
        let t = TabulatedProfile::from_profile(&ModeProfile::second_harmonic(), 64).unwrap();
        let p = ModeProfile::Tabulated(t);
        let json = serde_json::to_string(&p).unwrap();
        assert!(!json.contains("moments"));
        let back: ModeProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(TabulatedProfile::new(0.0, 1.0, vec![0.0, 1.0, 0.5]).is_err());
    }
}
