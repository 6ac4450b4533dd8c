use libm::cbrt;

use crate::error::Result;
use crate::interactions::RadialProfile;
use crate::quadrature::integrate_piecewise;

const TOL: f64 = 1e-13;

/// `b_K = (1/3) ∫_{ℝ³} |z|² K(|z|) d³z = (4π/3) ∫₀^∞ r⁴ K(r) dr`.
pub fn coeff_b_kernel(kernel: &RadialProfile) -> Result<f64> {
    kernel.validate()?;
    let integral = integrate_piecewise(0.0, kernel.support(), &kernel.breakpoints(), TOL, |r| {
        let r2 = r * r;
        r2 * r2 * kernel.value(r)
    })?;
    Ok(4.0 * core::f64::consts::PI / 3.0 * integral)
}

/// `(b₀, b₂) = (∫_ℝ K(|z|) dz, ∫_ℝ K(|z|) z² dz)`.
pub fn coeff_line(kernel: &RadialProfile) -> Result<(f64, f64)> {
    kernel.validate()?;
    let breaks = kernel.breakpoints();
    let r = kernel.support();
    let b0 = integrate_piecewise(0.0, r, &breaks, TOL, |z| kernel.value(z))?;
    let b2 = integrate_piecewise(0.0, r, &breaks, TOL, |z| z * z * kernel.value(z))?;
    Ok((2.0 * b0, 2.0 * b2))
}

/// Rank coefficients `(b_T, b_line)`:
/// `b_T = (1/3) ∫_{ℝ³} |ζ|² T(4π|ζ|³) d³ζ = (4π/3) ∫₀^∞ r⁴ T(4πr³) dr` and
/// `b_line = ∫₀^∞ T(z) z² dz`.
pub fn coeff_rank(rank_profile: &RadialProfile) -> Result<(f64, f64)> {
    rank_profile.validate()?;
    let four_pi = 4.0 * core::f64::consts::PI;
    let support = rank_profile.support();
    let r_max = cbrt(support / four_pi);
    let r_breaks: alloc::vec::Vec<f64> = rank_profile.breakpoints().iter().map(|&m| cbrt(m / four_pi)).collect();
    let bt = integrate_piecewise(0.0, r_max, &r_breaks, TOL, |r| {
        let r2 = r * r;
        r2 * r2 * rank_profile.value(four_pi * r2 * r)
    })?;
    let b_line = integrate_piecewise(0.0, support, &rank_profile.breakpoints(), TOL, |z| {
        z * z * rank_profile.value(z)
    })?;
    Ok((four_pi / 3.0 * bt, b_line))
}
