//! Derivative-free root finding and minimization, quadrature rules, and
//! small fitting helpers shared by the physics modules.

use crate::error::{Result, SibaError};

/// Golden ratio conjugate, (sqrt(5) - 1) / 2.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bisection on a bracketing interval `[lo, hi]` with `f(lo)` and `f(hi)` of
/// opposite sign, in either order. Stops when the bracket is narrower than
/// `xtol` or `|f| < ftol`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64, ftol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(SibaError::Convergence(format!(
            "bracket [{lo}, {hi}] does not change sign ({flo}, {fhi})"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid.abs() < ftol || (hi - lo).abs() < xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for a minimum of `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_min<F>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // The bracket endpoints are never evaluated by the search itself.
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max<F>(f: F, a: f64, b: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (x, fx) = golden_min(|x| -f(x), a, b, xtol);
    (x, -fx)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive (both positive).
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
    if let Some(first) = v.first_mut() {
        *first = lo;
    }
    if n > 1 {
        v[n - 1] = hi;
    }
    v
}

/// Second derivative by the five-point central stencil.
pub fn second_derivative_5pt<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let f1p = f(x + h);
    let f1m = f(x - h);
    let f2p = f(x + 2.0 * h);
    let f2m = f(x - 2.0 * h);
    (-f2p + 16.0 * f1p - 30.0 * f0 + 16.0 * f1m - f2m) / (12.0 * h * h)
}

/// First derivative by the five-point central stencil.
pub fn first_derivative_5pt<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Richardson extrapolation of a fourth-order estimate computed at `h` and `h/2`.
pub fn richardson4(coarse: f64, fine: f64) -> f64 {
    (16.0 * fine - coarse) / 15.0
}

/// Nodes and weights of the `n`-point Gauss-Laguerre rule for
/// `∫_0^∞ e^{-t} g(t) dt`. Nodes ascend; weights sum to 1.
pub fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Laguerre rule needs at least one node");
    let nf = n as f64;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut z = 0.0_f64;
    for i in 0..n {
        // Initial guesses from Numerical Recipes (gaulag with alpha = 0).
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - out[i - 2].0)
            }
        };
        for _ in 0..200 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            let pp = (nf * p1 - nf * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        // Weight w = 1 / (z L_n'(z)^2), with L_n' from the recurrence at the converged node.
        let (mut p1, mut p2) = (1.0, 0.0);
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
        }
        let dl = nf * (p1 - p2) / z;
        let w = 1.0 / (z * dl * dl);
        out.push((z, w));
    }
    out
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// One-sigma standard error of the slope (zero for exactly two points).
    pub slope_stderr: f64,
    pub points: usize,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LinearFit { slope, intercept, slope_stderr, points: n })
}

/// Linear interpolation of the crossing of zero between `(t0, y0)` and `(t1, y1)`.
pub(crate) fn zero_crossing(t0: f64, y0: f64, t1: f64, y1: f64) -> f64 {
    if y1 == y0 {
        return 0.5 * (t0 + t1);
    }
    t0 - y0 * (t1 - t0) / (y1 - y0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_accepts_reversed_bracket() {
        let r = bisect(|x| x * x - 2.0, 2.0, 0.0, 1e-15, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_rejects_non_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0).is_err());
    }

    #[test]
    fn golden_min_parabola() {
        let (x, fx) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_laguerre_moments() {
        // ∫ e^{-t} t^k dt = k!, exact for k ≤ 2n - 1.
        let rule = gauss_laguerre(8);
        let mut fact = 1.0;
        for k in 0..16 {
            if k > 0 {
                fact *= k as f64;
            }
            let q: f64 = rule.iter().map(|(t, w)| w * t.powi(k)).sum();
            assert!((q - fact).abs() / fact < 1e-10, "k={k} q={q} exact={fact}");
        }
    }

    #[test]
    fn gauss_laguerre_single_node() {
        let rule = gauss_laguerre(1);
        assert_eq!(rule.len(), 1);
        assert!((rule[0].0 - 1.0).abs() < 1e-12);
        assert!((rule[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = linspace(0.0, 1.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);
    }

    #[test]
    fn stencils_on_sine() {
        let f = |x: f64| x.sin();
        let h = 1e-3;
        let d1 = first_derivative_5pt(&f, 0.7, h);
        let d2 = richardson4(second_derivative_5pt(&f, 0.7, h), second_derivative_5pt(&f, 0.7, h / 2.0));
        assert!((d1 - 0.7f64.cos()).abs() < 1e-11);
        assert!((d2 + 0.7f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn spaces() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = logspace(1e-2, 1e2, 5);
        assert!((l[2] - 1.0).abs() < 1e-12);
        assert_eq!((l[0], l[4]), (1e-2, 1e2));
    }
}
