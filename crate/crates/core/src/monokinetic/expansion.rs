//! Checks of the zero-range expansions: the exact ε-scaled interaction
//! integral is computed by quadrature and compared with its leading term.

use alloc::vec::Vec;

use libm::{log, sin};

use super::coefficients::{coeff_b_kernel, coeff_line, coeff_rank};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::interactions::RadialProfile;
use crate::quadrature::{integrate_adaptive, GaussRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionKind {
    /// `∫K(|x−y|/ε) ρ(y)(φ(y) − φ(x)) dy ≈ ε⁵ b_K (½ρΔφ + ∇ρ·∇φ)`.
    Space,
    /// `∫K(|x(z)|/ε) φ(z) dz ≈ (ε³ b₂/2) (φ'/|x'|³)'` along a curve.
    Line,
    /// `∫T(M_{|x(z)|}/ε) φ(z) dz ≈ (ε³ b/(16λ³)) |x'|³ (φ'/|x'|³)'` with
    /// `b = ∫_ℝ T(|z|) z² dz`.
    LineRank,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionResult {
    pub eps: f64,
    pub exact: f64,
    pub asymptotic: f64,
    /// `|exact − asymptotic| / |asymptotic|`; zero when both vanish.
    pub rel_error: f64,
}

impl ExpansionResult {
    fn new(eps: f64, exact: f64, asymptotic: f64) -> Self {
        let diff = (exact - asymptotic).abs();
        let rel_error = if diff == 0.0 { 0.0 } else { diff / asymptotic.abs() };
        ExpansionResult {
            eps,
            exact,
            asymptotic,
            rel_error,
        }
    }
}

pub struct SpaceProblem<'a> {
    pub kernel: RadialProfile,
    pub rho: &'a dyn Fn(Vec3) -> f64,
    pub phi: &'a dyn Fn(Vec3) -> f64,
    pub point: Vec3,
}

/// Curve through the origin at `z = 0` and a function with `φ(0) = 0`.
pub struct LineProblem<'a> {
    pub kernel: RadialProfile,
    pub curve: &'a dyn Fn(f64) -> Vec3,
    pub phi: &'a dyn Fn(f64) -> f64,
}

pub struct LineRankProblem<'a> {
    pub rank_profile: RadialProfile,
    /// Linear density parameter `λ`.
    pub lambda: f64,
    pub curve: &'a dyn Fn(f64) -> Vec3,
    pub phi: &'a dyn Fn(f64) -> f64,
}

/// Step of the finite-difference stencils used for the derivatives that
/// enter the asymptotic formulas.
const FD_STEP: f64 = 1e-3;

fn d1(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

fn d2(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

pub fn expansion_space(p: &SpaceProblem<'_>, eps: f64) -> Result<ExpansionResult> {
    check_eps(eps)?;
    let x = p.point;
    let phi_x = (p.phi)(x);
    let integrand = |z: Vec3| -> f64 {
        let y = x + z * eps;
        (p.rho)(y) * ((p.phi)(y) - phi_x)
    };
    let exact = eps * eps * eps * ball_integral(&p.kernel, &integrand)?;

    let mut grad_rho = Vec3::ZERO;
    let mut grad_phi = Vec3::ZERO;
    let mut lap_phi = 0.0;
    for axis in [Vec3::X, Vec3::Y, Vec3::Z] {
        let rho_line = |t: f64| (p.rho)(x + axis * t);
        let phi_line = |t: f64| (p.phi)(x + axis * t);
        grad_rho += axis * d1(&rho_line, FD_STEP);
        grad_phi += axis * d1(&phi_line, FD_STEP);
        lap_phi += d2(&phi_line, FD_STEP);
    }
    let bk = coeff_b_kernel(&p.kernel)?;
    let e5 = eps * eps * eps * eps * eps;
    let asymptotic = e5 * bk * (0.5 * (p.rho)(x) * lap_phi + grad_rho.dot(grad_phi));
    Ok(ExpansionResult::new(eps, exact, asymptotic))
}

/// `∫_{|z|<R} K(|z|) f(z) d³z` by a product Gauss rule in spherical
/// coordinates, refined until two successive resolutions agree.
fn ball_integral(kernel: &RadialProfile, f: &dyn Fn(Vec3) -> f64) -> Result<f64> {
    let support = kernel.support();
    let mut edges = alloc::vec![0.0];
    edges.extend(kernel.breakpoints().into_iter().filter(|&b| b < support));
    edges.push(support);
    let eval = |n: usize| -> f64 {
        let radial = GaussRule::new(n);
        let polar = GaussRule::new(n);
        let n_az = 2 * n;
        let dphi = 2.0 * core::f64::consts::PI / n_az as f64;
        let mut total = 0.0;
        for seg in edges.windows(2) {
            for (r, wr) in radial.on(seg[0], seg[1]) {
                let k = kernel.value(r);
                if k == 0.0 {
                    continue;
                }
                let mut shell = 0.0;
                for (c, wc) in polar.on(-1.0, 1.0) {
                    let s = libm::sqrt((1.0 - c * c).max(0.0));
                    let mut ring = 0.0;
                    for a in 0..n_az {
                        let ang = dphi * a as f64;
                        ring += f(Vec3::new(s * libm::cos(ang), s * sin(ang), c) * r);
                    }
                    shell += wc * ring * dphi;
                }
                total += wr * k * r * r * shell;
            }
        }
        total
    };
    let mut n = 12;
    let mut prev = eval(n);
    while n < 96 {
        n *= 2;
        let next = eval(n);
        if (next - prev).abs() <= 1e-12 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergence(
        "ball quadrature did not settle at the finest resolution".into(),
    ))
}

pub fn expansion_line(p: &LineProblem<'_>, eps: f64) -> Result<ExpansionResult> {
    check_eps(eps)?;
    check_origin(p.curve)?;
    let dist = |z: f64| (p.curve)(z).norm();
    let support = p.kernel.support() * eps;
    let mut cuts: Vec<f64> = Vec::new();
    for level in p.kernel.breakpoints().into_iter().filter(|&b| b < p.kernel.support()) {
        cuts.push(level_crossing(&dist, level * eps, 1.0)?);
        cuts.push(level_crossing(&dist, level * eps, -1.0)?);
    }
    let hi = level_crossing(&dist, support, 1.0)?;
    let lo = level_crossing(&dist, support, -1.0)?;
    let exact = piecewise(lo, hi, &mut cuts, |z| p.kernel.value(dist(z) / eps) * (p.phi)(z))?;

    let (_, b2) = coeff_line(&p.kernel)?;
    let asymptotic = eps * eps * eps * b2 / 2.0 * curve_operator(p.curve, p.phi);
    Ok(ExpansionResult::new(eps, exact, asymptotic))
}

pub fn expansion_line_rank(p: &LineRankProblem<'_>, eps: f64) -> Result<ExpansionResult> {
    check_eps(eps)?;
    check_origin(p.curve)?;
    if !(p.lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let dist = |z: f64| (p.curve)(z).norm();
    // Mass within distance |x(z)| of the origin: λ times the length of the
    // parameter interval where the curve is that close.
    let mass = |z: f64| -> Result<f64> {
        let r = dist(z);
        if r == 0.0 {
            return Ok(0.0);
        }
        let (plus, minus) = if z > 0.0 {
            (z, level_crossing(&dist, r, -1.0)?)
        } else {
            (level_crossing(&dist, r, 1.0)?, z)
        };
        Ok(p.lambda * (plus - minus))
    };
    let mass_side = |level: f64, side: f64| -> Result<f64> {
        // M is increasing in |z| on each side; bracket and bisect.
        let g = |t: f64| mass(side * t);
        let mut hi = level / p.lambda;
        while g(hi)? < level {
            hi *= 1.5;
            if hi > 1e6 {
                return Err(Error::Domain("rank mass never reaches the support level".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid)? < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(side * 0.5 * (lo + hi))
    };
    let support = p.rank_profile.support() * eps;
    let mut cuts: Vec<f64> = Vec::new();
    for level in p.rank_profile.breakpoints().into_iter().filter(|&b| b < p.rank_profile.support()) {
        cuts.push(mass_side(level * eps, 1.0)?);
        cuts.push(mass_side(level * eps, -1.0)?);
    }
    let hi = mass_side(support, 1.0)?;
    let lo = mass_side(support, -1.0)?;
    let mut failure = None;
    let exact = piecewise(lo, hi, &mut cuts, |z| match mass(z) {
        Ok(m) => p.rank_profile.value(m / eps) * (p.phi)(z),
        Err(e) => {
            failure = Some(e);
            0.0
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let (_, b_half) = coeff_rank(&p.rank_profile)?;
    let b_full = 2.0 * b_half;
    let speed = d1_vec(p.curve, FD_STEP).norm();
    let asymptotic =
        eps * eps * eps * b_full / (16.0 * p.lambda * p.lambda * p.lambda) * speed * speed * speed * curve_operator(p.curve, p.phi);
    Ok(ExpansionResult::new(eps, exact, asymptotic))
}

/// `(φ'/|x'|³)'` at `z = 0`, i.e. `φ''/|x'|³ − 3 φ' (x'·x'')/|x'|⁵`.
fn curve_operator(curve: &dyn Fn(f64) -> Vec3, phi: &dyn Fn(f64) -> f64) -> f64 {
    let xp = d1_vec(curve, FD_STEP);
    let xpp = d2_vec(curve, FD_STEP);
    let s2 = xp.norm_sq();
    let s = libm::sqrt(s2);
    let s3 = s2 * s;
    d2(phi, FD_STEP) / s3 - 3.0 * d1(phi, FD_STEP) * xp.dot(xpp) / (s3 * s2)
}

fn d1_vec(f: &dyn Fn(f64) -> Vec3, h: f64) -> Vec3 {
    Vec3::new(
        d1(&|t| f(t).x, h),
        d1(&|t| f(t).y, h),
        d1(&|t| f(t).z, h),
    )
}

fn d2_vec(f: &dyn Fn(f64) -> Vec3, h: f64) -> Vec3 {
    Vec3::new(
        d2(&|t| f(t).x, h),
        d2(&|t| f(t).y, h),
        d2(&|t| f(t).z, h),
    )
}

/// The parameter on the `side` (±1) of zero where the increasing function
/// `dist(side·t)` reaches `level`.
fn level_crossing(dist: &dyn Fn(f64) -> f64, level: f64, side: f64) -> Result<f64> {
    let mut hi = level.max(1e-300);
    while dist(side * hi) < level {
        hi *= 1.5;
        if hi > 1e6 {
            return Err(Error::Domain("curve never leaves the kernel support".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist(side * mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(side * 0.5 * (lo + hi))
}

fn piecewise(lo: f64, hi: f64, cuts: &mut Vec<f64>, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
    cuts.retain(|&c| c > lo && c < hi);
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_unstable_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_adaptive(w[0], w[1], 1e-14, &mut f)?;
    }
    Ok(total)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("eps must be positive"))
    }
}

fn check_origin(curve: &dyn Fn(f64) -> Vec3) -> Result<()> {
    if curve(0.0).norm() <= 1e-14 {
        Ok(())
    } else {
        Err(Error::invalid("the curve must pass through the origin at z = 0"))
    }
}

fn gaussian_density(y: Vec3) -> f64 {
    libm::exp(-(y - Vec3::new(0.3, -0.2, 0.1)).norm_sq())
}

fn quadratic_field(y: Vec3) -> f64 {
    y.dot(Vec3::new(1.0, 0.5, -0.3)) + 0.5 * (0.8 * y.x * y.x - 0.4 * y.y * y.y + 1.1 * y.z * y.z) + 0.6 * y.x * y.y - 0.2 * y.y * y.z
}

fn bent_curve(z: f64) -> Vec3 {
    Vec3::new(1.2 * z + 0.3 * z * z, 0.5 * z * z, 0.1 * z * z * z)
}

fn curve_field(z: f64) -> f64 {
    sin(z) + 0.5 * z * z
}

/// Runs the built-in test problem of `kind` at scale `eps`: a Gaussian
/// density with a quadratic field for [`ExpansionKind::Space`], and a bent,
/// non-unit-speed curve through the origin with `φ(z) = sin z + z²/2` for
/// the line kinds; all kernels are indicators of the unit interval, with
/// `λ = 1.5` for the rank kind.
pub fn expansion_check(kind: ExpansionKind, eps: f64) -> Result<ExpansionResult> {
    let unit = RadialProfile::Indicator { radius: 1.0 };
    match kind {
        ExpansionKind::Space => expansion_space(
            &SpaceProblem {
                kernel: unit,
                rho: &gaussian_density,
                phi: &quadratic_field,
                point: Vec3::ZERO,
            },
            eps,
        ),
        ExpansionKind::Line => expansion_line(
            &LineProblem {
                kernel: unit,
                curve: &bent_curve,
                phi: &curve_field,
            },
            eps,
        ),
        ExpansionKind::LineRank => expansion_line_rank(
            &LineRankProblem {
                rank_profile: unit,
                lambda: 1.5,
                curve: &bent_curve,
                phi: &curve_field,
            },
            eps,
        ),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("slope fit needs at least two paired points"));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("slope fit needs positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|&v| log(v)).collect();
    let ly: Vec<f64> = y.iter().map(|&v| log(v)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}
