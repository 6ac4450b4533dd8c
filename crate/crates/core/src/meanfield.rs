//! Equilibria of the constant-coupling system in the large-N limit.
//!
//! A stationary law has velocities distributed on the sphere with density
//! `∝ exp(βJ w·v/v²)` and tangential spins Gaussian at temperature `1/β`,
//! where `w` must reproduce itself as the mean velocity. Writing
//! `w = γ v e` and `ξ = βJ γ`, this is the scalar fixed point
//! `ξ = βJ h(ξ)` with `h(x) = coth x − 1/x`.

use libm::{exp, expm1, log, log1p, sinh, tanh};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{direction_about, orthonormal_complement, Vec3};
use crate::interactions::KernelSpec;
use crate::model::{AgentState, Ensemble, ModelParams};

/// Below this argument `h` and its relatives use their Taylor series.
const SERIES_CUTOFF: f64 = 1e-2;

/// `h(x) = coth x − 1/x` with `h(0) = 0`: the mean of `cos θ` under the
/// density `∝ e^{x cos θ}` on the sphere.
pub fn h(x: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(x * h_over_x(x))
}

/// `h(x)/x`, continuous at `x = 0`.
fn h_over_x(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        1.0 / 3.0 - x2 / 45.0 + 2.0 * x2 * x2 / 945.0
    } else {
        (1.0 / tanh(x) - 1.0 / x) / x
    }
}

/// `h'(x) = 1/x² − 1/sinh² x`.
pub fn h_prime(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        return Ok(1.0 / 3.0 - x2 / 15.0 + 2.0 * x2 * x2 / 189.0);
    }
    if x > 350.0 {
        return Ok(1.0 / (x * x));
    }
    let sh = sinh(x);
    Ok(1.0 / (x * x) - 1.0 / (sh * sh))
}

fn check_domain(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(alloc::format!("h is defined on [0, ∞), got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution {
    pub beta_j: f64,
    /// `ξ = βJ γ`.
    pub xi: f64,
    /// `γ = |w| / v`.
    pub gamma: f64,
    /// Unit direction `e` of `w`; only `|w|` is fixed by the equation.
    pub direction: Vec3,
}

impl EquilibriumSolution {
    pub fn with_direction(mut self, e: Vec3) -> Result<Self> {
        self.direction = e.normalized().ok_or(Error::DegenerateVelocity)?;
        Ok(self)
    }

    pub fn mean_velocity(&self, v_speed: f64) -> Vec3 {
        self.direction * (self.gamma * v_speed)
    }
}

/// Largest root `ξ ≥ 0` of `ξ = βJ h(ξ)`, with direction `ẑ`.
///
/// The map `ξ ↦ βJ h(ξ)/ξ − 1` is decreasing, so a positive root exists
/// exactly when it is positive as `ξ → 0⁺`; the root is then bracketed in
/// `(0, βJ]` and bisected to machine resolution.
pub fn solve_selfconsistency(beta_j: f64) -> Result<EquilibriumSolution> {
    if !(beta_j >= 0.0 && beta_j.is_finite()) {
        return Err(Error::invalid("beta_J must be nonnegative and finite"));
    }
    let excess = |xi: f64| beta_j * h_over_x(xi) - 1.0;
    let xi = if beta_j == 0.0 || excess(0.0) <= 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, beta_j);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Pick the endpoint with the smaller fixed-point residual.
        let res = |xi: f64| (xi - beta_j * xi * h_over_x(xi)).abs();
        if res(lo) <= res(hi) {
            lo
        } else {
            hi
        }
    };
    Ok(EquilibriumSolution {
        beta_j,
        xi,
        gamma: if beta_j > 0.0 { xi / beta_j } else { 0.0 },
        direction: Vec3::Z,
    })
}

/// Smallest `βJ` at which [`solve_selfconsistency`] returns a positive
/// root, located by bisection on the onset to within `tol`.
pub fn critical_coupling(tol: f64) -> Result<f64> {
    let ordered = |b: f64| -> Result<bool> { Ok(solve_selfconsistency(b)?.xi > 0.0) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !ordered(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain("no ordered phase found".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ordered(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solutions on `steps` evenly spaced couplings from `min` to `max`
/// inclusive.
pub fn bifurcation_scan(min: f64, max: f64, steps: usize) -> Result<alloc::vec::Vec<EquilibriumSolution>> {
    if steps < 2 || !(max >= min) || !(min >= 0.0) {
        return Err(Error::invalid("scan needs 0 <= min <= max and at least two points"));
    }
    (0..steps)
        .map(|k| solve_selfconsistency(min + (max - min) * k as f64 / (steps - 1) as f64))
        .collect()
}

/// `w − ⟨v⟩`, where `⟨v⟩` is the mean velocity under the density
/// `∝ exp(βJ w·v/v²)` on the sphere of radius `v`, in closed form
/// `v h(βJ|w|/v) ŵ`.
pub fn selfconsistency_residual(w: Vec3, beta_j: f64, v_speed: f64) -> Result<Vec3> {
    let n = w.norm();
    if n == 0.0 {
        return Ok(Vec3::ZERO);
    }
    Ok(w - (w / n) * (v_speed * h(beta_j * n / v_speed)?))
}

/// Inverse CDF of `cos θ` under the density `∝ e^{κ cos θ}` on `[−1, 1]`.
pub fn sample_cos_theta(kappa: f64, u: f64) -> f64 {
    if kappa == 0.0 {
        return 2.0 * u - 1.0;
    }
    (1.0 + log1p((1.0 - u) * expm1(-2.0 * kappa)) / kappa).clamp(-1.0, 1.0)
}

/// Draws `params.n_agents` independent agents from the stationary law of
/// `solution`: velocities with density `∝ e^{ξ cos θ}` about the solution
/// direction, spins Gaussian with variance `1/β` per component in the
/// tangent plane. Positions are at the origin and the kernel is constant.
pub fn sample_equilibrium<R: Rng + ?Sized>(
    solution: &EquilibriumSolution,
    beta: f64,
    params: ModelParams,
    rng: &mut R,
) -> Result<Ensemble> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta must be positive and finite"));
    }
    let axis = solution.direction.normalized().ok_or(Error::DegenerateVelocity)?;
    let spread = 1.0 / libm::sqrt(beta);
    let agents = (0..params.n_agents)
        .map(|_| {
            let c = sample_cos_theta(solution.xi, rng.random::<f64>());
            let phi = 2.0 * core::f64::consts::PI * rng.random::<f64>();
            let dir = direction_about(axis, c, phi);
            let (e1, e2) = orthonormal_complement(dir);
            let g1: f64 = StandardNormal.sample(rng);
            let g2: f64 = StandardNormal.sample(rng);
            AgentState::new(Vec3::ZERO, dir * params.v_speed, (e1 * g1 + e2 * g2) * spread)
        })
        .collect();
    Ensemble::new(agents, params, KernelSpec::Constant(1.0))
}

/// `log(sinh κ / κ)` without overflow or cancellation.
fn log_sinhc(kappa: f64) -> f64 {
    if kappa < 1e-4 {
        let k2 = kappa * kappa;
        k2 / 6.0 - k2 * k2 / 180.0
    } else if kappa < 20.0 {
        log(sinh(kappa) / kappa)
    } else {
        kappa + log1p(-exp(-2.0 * kappa)) - core::f64::consts::LN_2 - log(kappa)
    }
}

/// Free energy of the product density `f(v, s) = g_κ(v) φ_β(s)`, with
/// `g_κ ∝ e^{κ cos θ}` on the sphere of radius `v` and `φ_β` the tangential
/// Gaussian at temperature `1/β`:
///
/// `F(κ) = κ h(κ) − log(4πv² sinh κ/κ) + log(β/2π) − (βJ/2) h(κ)² + βJ/2`.
///
/// Entropies are taken against surface measure on the sphere times
/// Lebesgue measure on the tangent plane. `dF/dκ = h'(κ)(κ − βJ h(κ))`, so
/// the critical points are exactly the fixed points of the
/// self-consistency equation.
pub fn free_energy_product(kappa: f64, beta: f64, coupling: f64, v_speed: f64) -> Result<f64> {
    if !(beta > 0.0 && v_speed > 0.0) {
        return Err(Error::invalid("beta and v_speed must be positive"));
    }
    let hk = h(kappa)?;
    let beta_j = beta * coupling;
    let two_pi = 2.0 * core::f64::consts::PI;
    Ok(kappa * hk - log(2.0 * two_pi * v_speed * v_speed) - log_sinhc(kappa) + log(beta / two_pi)
        - 0.5 * beta_j * hk * hk
        + 0.5 * beta_j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_at_zero_and_infinity() {
        assert_eq!(h(0.0).unwrap(), 0.0);
        assert!((h(50.0).unwrap() - (1.0 - 1.0 / 50.0)).abs() < 1e-10);
        assert!(h(-1.0).is_err());
    }

    #[test]
    fn h_series_meets_closed_form() {
        let x = SERIES_CUTOFF;
        let closed = 1.0 / tanh(x) - 1.0 / x;
        assert!((h(x * (1.0 - 1e-12)).unwrap() - closed).abs() < 1e-13);
    }

    #[test]
    fn zero_coupling_has_no_order() {
        let s = solve_selfconsistency(0.0).unwrap();
        assert_eq!((s.xi, s.gamma), (0.0, 0.0));
    }

    #[test]
    fn cos_theta_sampler_endpoints() {
        assert!((sample_cos_theta(3.0, 0.0) + 1.0).abs() < 1e-12);
        assert!((sample_cos_theta(3.0, 1.0 - 1e-16) - 1.0).abs() < 1e-12);
        assert_eq!(sample_cos_theta(0.0, 0.25), -0.5);
    }

    #[test]
    fn log_sinhc_branches_agree() {
        for &k in &[1e-4, 20.0] {
            let below = log_sinhc(k * (1.0 - 1e-13));
            let above = log_sinhc(k * (1.0 + 1e-13));
            assert!((below - above).abs() < 1e-12 * (1.0 + above.abs()));
        }
        assert!((log_sinhc(1e-5) - 1e-10 / 6.0).abs() < 1e-20);
    }
}
