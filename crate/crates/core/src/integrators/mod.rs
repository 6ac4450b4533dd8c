//! Time steppers for the particle system.
//!
//! The deterministic vector field splits into two pieces whose flows are
//! known exactly:
//!
//! * the kick `ṡ = (J/v²) v ∧ w − η P⊥s` with `x`, `v` (hence `w`) frozen,
//!   solved in closed form on the tangential part of `s`;
//! * the drift `ẋ = v`, `v̇ = s ∧ v` with `s` frozen, a rigid rotation of `v`
//!   about `s`.
//!
//! A step is the symmetric composition kick(dt/2) ∘ drift(dt) ∘ kick(dt/2).
//! Each sub-flow keeps `|v|` and `v·s` fixed, so both constraints hold to
//! roundoff. With equal-and-opposite pair torques the kick also preserves
//! the total spin to roundoff.

mod rng;

use alloc::vec::Vec;

use libm::{cbrt, expm1, sqrt};

pub use rng::RngStream;

use crate::analysis::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{omega_matrix, rotate_about, rotation_arc};
use crate::interactions::interaction_field;
use crate::model::Ensemble;

/// How positions advance while `v` rotates about `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XUpdate {
    /// Trapezoid chord `(v_old + v_new)·dt/2`.
    #[default]
    Chord,
    /// Exact displacement along the rotation.
    Arc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Symmetric kick–drift–kick, second order.
    #[default]
    Strang,
    /// Triple-jump composition of three Strang steps, fourth order.
    Composition4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepOptions {
    pub x_update: XUpdate,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// `||v_i| − v| / v` after the step.
    pub speed_drift: Vec<f64>,
    /// `|v_i·s_i − α_i|` after the step.
    pub spin_drift: Vec<f64>,
    pub kernel_evaluations: usize,
    /// Largest `|Δs|` applied when re-projecting spins onto `v·s = α`.
    pub projection_correction: f64,
    /// Set when some drift exceeds the ensemble's constraint budget.
    pub flagged: bool,
}

/// Advances the ensemble by one step of the deterministic system.
pub fn step_deterministic(ens: &mut Ensemble, dt: f64, opts: StepOptions) -> Result<StepReport> {
    check_dt(dt)?;
    let evals = advance(ens, dt, opts)?;
    finish(ens, dt, evals, 0.0)
}

/// Advances the velocity–spin system with multiplicative weights, where
/// positions do not enter the interaction. Friction acts on the tangential
/// spin through the exact factor `e^{−η dt}` inside each kick.
pub fn step_free_space(ens: &mut Ensemble, dt: f64, opts: StepOptions) -> Result<StepReport> {
    if ens.kernel.uses_positions() {
        return Err(Error::invalid(
            "free-space stepping needs a constant or multiplicative kernel",
        ));
    }
    step_deterministic(ens, dt, opts)
}

/// One step of the stochastic system: the spin receives the Itô increment
/// `(√(2ν)/v) Ω(v)·ΔB` with `Ω` evaluated at the start of the step, then the
/// deterministic step runs, then each spin is re-projected onto
/// `v·s = α`. With `ν = 0` neither the noise nor the projection is applied
/// and the arithmetic is that of [`step_deterministic`].
pub fn step_stochastic(ens: &mut Ensemble, dt: f64, rng: &mut RngStream, opts: StepOptions) -> Result<StepReport> {
    check_dt(dt)?;
    let nu = ens.params.diffusion;
    if !(nu >= 0.0) {
        return Err(Error::invalid("diffusion must be nonnegative"));
    }
    if rng.len() != ens.len() {
        return Err(Error::invalid("random stream count must equal the number of agents"));
    }
    if nu > 0.0 {
        let amp = sqrt(2.0 * nu) / ens.params.v_speed;
        for (i, a) in ens.agents.iter_mut().enumerate() {
            let db = rng.increment(i, dt);
            a.s += omega_matrix(a.v).mul_vec(db) * amp;
        }
    }
    let evals = advance(ens, dt, opts)?;
    let mut correction = 0.0f64;
    if nu > 0.0 {
        for (a, &alpha) in ens.agents.iter_mut().zip(&ens.alpha) {
            let c = (alpha - a.v.dot(a.s)) / a.v.norm_sq();
            let ds = a.v * c;
            correction = correction.max(ds.norm());
            a.s += ds;
        }
    }
    finish(ens, dt, evals, correction)
}

/// Dynamics selected for [`run`].
#[derive(Debug)]
pub enum Dynamics<'a> {
    Deterministic,
    FreeSpace,
    Stochastic(&'a mut RngStream),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Steps between recorded snapshots.
    pub stride: usize,
    pub step: StepOptions,
    /// Keep full agent states at each snapshot.
    pub keep_states: bool,
}

impl RunOptions {
    pub fn new(t_end: f64, dt: f64, stride: usize) -> Self {
        RunOptions {
            t_end,
            dt,
            stride,
            step: StepOptions::default(),
            keep_states: false,
        }
    }
}

/// Steps from the ensemble's current time to `t_end` in `round(t_end/dt)`
/// steps, recording diagnostics initially, every `stride` steps and at the
/// final time.
pub fn run(ens: &mut Ensemble, mut dynamics: Dynamics<'_>, opts: &RunOptions) -> Result<Trajectory> {
    if !(opts.t_end >= 0.0 && opts.t_end.is_finite()) {
        return Err(Error::invalid("t_end must be nonnegative and finite"));
    }
    check_dt(opts.dt)?;
    if opts.stride == 0 {
        return Err(Error::invalid("observer stride must be at least 1"));
    }
    let steps = libm::round(opts.t_end / opts.dt) as usize;
    let t0 = ens.time;
    let mut traj = Trajectory::default();
    traj.record(ens, opts.keep_states);
    for k in 1..=steps {
        let report = match &mut dynamics {
            Dynamics::Deterministic => step_deterministic(ens, opts.dt, opts.step)?,
            Dynamics::FreeSpace => step_free_space(ens, opts.dt, opts.step)?,
            Dynamics::Stochastic(rng) => step_stochastic(ens, opts.dt, rng, opts.step)?,
        };
        ens.time = t0 + k as f64 * opts.dt;
        traj.stats.absorb(&report);
        if k % opts.stride == 0 || k == steps {
            traj.record(ens, opts.keep_states);
        }
    }
    Ok(traj)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("time step must be positive, got {dt}")))
    }
}

fn advance(ens: &mut Ensemble, dt: f64, opts: StepOptions) -> Result<usize> {
    match opts.scheme {
        Scheme::Strang => strang(ens, dt, opts.x_update),
        Scheme::Composition4 => {
            let c = cbrt(2.0);
            let outer = dt / (2.0 - c);
            let inner = -c * dt / (2.0 - c);
            Ok(strang(ens, outer, opts.x_update)?
                + strang(ens, inner, opts.x_update)?
                + strang(ens, outer, opts.x_update)?)
        }
    }
}

fn strang(ens: &mut Ensemble, h: f64, x_update: XUpdate) -> Result<usize> {
    let mut evals = kick(ens, 0.5 * h)?;
    drift(ens, h, x_update);
    evals += kick(ens, 0.5 * h)?;
    Ok(evals)
}

/// Exact flow of `ṡ = a − η P⊥s` over `h` with `a = (J/v²) v ∧ w` frozen:
/// the tangential part relaxes as `s⊥ e^{−ηh} + a (1 − e^{−ηh})/η`, the
/// parallel part is untouched.
fn kick(ens: &mut Ensemble, h: f64) -> Result<usize> {
    let field = interaction_field(&ens.agents, &ens.kernel, ens.self_term)?;
    let gain = ens.params.coupling / (ens.params.v_speed * ens.params.v_speed);
    let eta = ens.params.friction;
    let decay = expm1(-eta * h);
    let response = if eta > 0.0 { -decay / eta } else { h };
    for (a, w) in ens.agents.iter_mut().zip(&field.w) {
        let torque = a.v.cross(*w) * gain;
        let tangential = a.s - a.v * (a.s.dot(a.v) / a.v.norm_sq());
        a.s += tangential * decay + torque * response;
    }
    Ok(field.kernel_evaluations)
}

fn drift(ens: &mut Ensemble, h: f64, x_update: XUpdate) {
    for a in &mut ens.agents {
        let v_new = rotate_about(a.v, a.s, h);
        a.x += match x_update {
            XUpdate::Chord => (a.v + v_new) * (0.5 * h),
            XUpdate::Arc => rotation_arc(a.v, a.s, h),
        };
        a.v = v_new;
    }
}

fn finish(ens: &Ensemble, dt: f64, kernel_evaluations: usize, projection_correction: f64) -> Result<StepReport> {
    if let Some(agent) = ens.agents.iter().position(|a| !a.is_finite()) {
        return Err(Error::BlowUp {
            time: ens.time + dt,
            agent,
        });
    }
    let v = ens.params.v_speed;
    let speed_drift: Vec<f64> = ens.agents.iter().map(|a| (a.v.norm() - v).abs() / v).collect();
    let spin_drift: Vec<f64> = ens
        .agents
        .iter()
        .zip(&ens.alpha)
        .map(|(a, &al)| (a.v.dot(a.s) - al).abs())
        .collect();
    let flagged = speed_drift.iter().any(|&d| d > ens.budget.speed_rel)
        || spin_drift.iter().any(|&d| d > ens.budget.spin_rel * v * v);
    Ok(StepReport {
        dt,
        speed_drift,
        spin_drift,
        kernel_evaluations,
        projection_correction,
        flagged,
    })
}
