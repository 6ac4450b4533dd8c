//! Gauss–Legendre rules and an adaptive composite integrator on finite
//! intervals.

use alloc::vec::Vec;

use libm::cos;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, refined by Newton on P_n.
        let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// A Gauss–Legendre rule mapped onto intervals.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussRule { nodes, weights }
    }

    /// `(x, w)` pairs of the rule on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Adaptive bisection with a 15-point Gauss rule: an interval is accepted
/// when its estimate and the sum over its two halves agree to `tol`
/// (relative to the running total, absolute floor `tol · 1e-3`).
pub fn integrate_adaptive(a: f64, b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussRule::new(15);
    let whole = rule.integrate(a, b, &mut f);
    let mut stack = alloc::vec![(a, b, whole, 0u32)];
    let mut total = 0.0;
    let scale = whole.abs();
    let mut intervals = 0usize;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        intervals += 1;
        if intervals > 200_000 {
            return Err(Error::QuadratureNonConvergence(alloc::format!(
                "interval budget exhausted on [{a}, {b}]"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        let refined = left + right;
        let width_share = (hi - lo) / (b - a).abs();
        let allowed = tol * scale.max(1e-3) * width_share.max(1e-12);
        if !refined.is_finite() {
            return Err(Error::QuadratureNonConvergence(alloc::format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        if (refined - est).abs() <= allowed || depth >= 60 {
            if depth >= 60 && (refined - est).abs() > allowed {
                return Err(Error::QuadratureNonConvergence(alloc::format!(
                    "no convergence near x = {mid}"
                )));
            }
            total += refined;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

/// [`integrate_adaptive`] over `[a, b]` split at the given interior points.
pub fn integrate_piecewise(
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = core::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(core::iter::once(b))
        .collect();
    pts.sort_unstable_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += integrate_adaptive(w[0], w[1], tol, &mut f)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let rule = GaussRule::new(n);
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 1.0, |x| libm::pow(x, deg as f64));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn weights_sum_to_two() {
        let (_, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_kink() {
        let got = integrate_adaptive(-1.0, 2.0, 1e-12, |x| x.abs()).unwrap();
        assert!((got - 2.5).abs() < 1e-11);
    }

    #[test]
    fn adaptive_smooth() {
        let got = integrate_adaptive(0.0, core::f64::consts::PI, 1e-13, libm::sin).unwrap();
        assert!((got - 2.0).abs() < 1e-12);
    }
}
