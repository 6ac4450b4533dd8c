//! Initial data for ensembles, fields and chains.

use libm::pow;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{direction_about, orthonormal_complement, Vec3};
use crate::interactions::KernelSpec;
use crate::meanfield::{sample_equilibrium, solve_selfconsistency};
use crate::model::{AgentState, Ensemble, ModelParams};
use crate::monokinetic::{traveling_curve, transverse_wave, ArcCurve, FieldParams, LineParams, MonokineticField1D, TravelingCurve};

/// Uniform direction on the unit sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let c = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * core::f64::consts::PI * rng.random::<f64>();
    direction_about(Vec3::Z, c, phi)
}

/// Isotropic Gaussian in the plane orthogonal to `v`, with standard
/// deviation `std` per component.
pub fn tangent_gaussian<R: Rng + ?Sized>(v: Vec3, std: f64, rng: &mut R) -> Vec3 {
    let axis = v.normalized().unwrap_or(Vec3::Z);
    let (e1, e2) = orthonormal_complement(axis);
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    (e1 * g1 + e2 * g2) * std
}

fn position_in_box<R: Rng + ?Sized>(side: f64, rng: &mut R) -> Vec3 {
    Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()) * side
}

/// Velocities uniform on the sphere of radius `v`, tangential Gaussian
/// spins with standard deviation `spin_std`, positions uniform in
/// `[0, box_side)³`.
pub fn uniform_sphere<R: Rng + ?Sized>(
    params: ModelParams,
    kernel: KernelSpec,
    box_side: f64,
    spin_std: f64,
    rng: &mut R,
) -> Result<Ensemble> {
    let agents = (0..params.n_agents)
        .map(|_| {
            let x = position_in_box(box_side, rng);
            let v = random_direction(rng) * params.v_speed;
            let s = tangent_gaussian(v, spin_std, rng);
            AgentState::new(x, v, s)
        })
        .collect();
    Ensemble::new(agents, params, kernel)
}

/// Velocities at polar angle `delta·U` (with `U` uniform in `[0, 1)`) from a
/// common direction `axis`, zero spins. `delta = 0` is exact flocking data.
pub fn aligned_perturbed<R: Rng + ?Sized>(
    params: ModelParams,
    kernel: KernelSpec,
    box_side: f64,
    axis: Vec3,
    delta: f64,
    rng: &mut R,
) -> Result<Ensemble> {
    let axis = axis.normalized().ok_or(Error::DegenerateVelocity)?;
    let agents = (0..params.n_agents)
        .map(|_| {
            let x = position_in_box(box_side, rng);
            let theta = delta * rng.random::<f64>();
            let phi = 2.0 * core::f64::consts::PI * rng.random::<f64>();
            let v = if theta == 0.0 {
                axis
            } else {
                direction_about(axis, libm::cos(theta), phi)
            };
            AgentState::new(x, v * params.v_speed, Vec3::ZERO)
        })
        .collect();
    Ensemble::new(agents, params, kernel)
}

/// First half of the agents along `axis`, the rest at angle `angle` from it
/// in a fixed plane, zero spins.
pub fn two_groups<R: Rng + ?Sized>(
    params: ModelParams,
    kernel: KernelSpec,
    box_side: f64,
    axis: Vec3,
    angle: f64,
    rng: &mut R,
) -> Result<Ensemble> {
    let axis = axis.normalized().ok_or(Error::DegenerateVelocity)?;
    let other = direction_about(axis, libm::cos(angle), 0.0);
    let half = params.n_agents / 2;
    let agents = (0..params.n_agents)
        .map(|i| {
            let dir = if i < half { axis } else { other };
            AgentState::new(position_in_box(box_side, rng), dir * params.v_speed, Vec3::ZERO)
        })
        .collect();
    Ensemble::new(agents, params, kernel)
}

/// Independent draws from the stationary law at `βJ = params.beta() · J`,
/// ordered along `axis` when an ordered solution exists.
pub fn equilibrium<R: Rng + ?Sized>(params: ModelParams, axis: Vec3, rng: &mut R) -> Result<Ensemble> {
    let beta = params.beta();
    let solution = solve_selfconsistency(beta * params.coupling)?.with_direction(axis)?;
    sample_equilibrium(&solution, beta, params, rng)
}

/// Arc-length speed `γ` that makes a traveling curve exact:
/// `v²/j = (λ/γ)^{1−q}`. For `q = 1` the condition does not involve `γ` and
/// `γ = 1` is returned.
pub fn matched_gamma(params: &LineParams) -> Result<f64> {
    params.validate()?;
    if params.j == 0.0 {
        return Err(Error::invalid("j must be positive for a traveling curve"));
    }
    if params.q == 1.0 {
        return Ok(1.0);
    }
    let ratio = params.v_speed * params.v_speed / params.j;
    Ok(params.lambda / pow(ratio, 1.0 / (1.0 - params.q)))
}

pub fn circle_chain(radius: f64, samples: usize, params: LineParams) -> Result<TravelingCurve> {
    traveling_curve(ArcCurve::Circle { radius }, matched_gamma(&params)?, 0.0, samples, params)
}

pub fn helix_chain(kappa: f64, tau: f64, samples: usize, params: LineParams) -> Result<TravelingCurve> {
    if !(kappa > 0.0) {
        return Err(Error::invalid("helix curvature must be positive"));
    }
    traveling_curve(ArcCurve::helix_from_curvature(kappa, tau), matched_gamma(&params)?, 0.0, samples, params)
}

/// Uniform density and velocity `v ẑ` with a transverse traveling wave of
/// the given mode and amplitude on `[0, length)`.
pub fn uniform_field_perturbed(
    cells: usize,
    length: f64,
    rho: f64,
    mode: usize,
    amplitude: f64,
    params: FieldParams,
) -> Result<MonokineticField1D> {
    transverse_wave(cells, length, rho, Vec3::Z, mode, amplitude, params)
}
