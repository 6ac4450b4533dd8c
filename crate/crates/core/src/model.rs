//! Model parameters, agent and ensemble state, and the scalar functionals
//! monitored along trajectories: mean velocity, alignment potential, total
//! energy and total spin.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::interactions::{KernelSpec, SelfTerm};

/// Physical constants of the particle system. The inverse temperature
/// `friction / diffusion` is derived, not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Common speed `v` of every agent.
    pub v_speed: f64,
    /// Alignment coupling `J`.
    pub coupling: f64,
    /// Spin friction `η`.
    pub friction: f64,
    /// Spin diffusion `ν`.
    pub diffusion: f64,
    pub n_agents: usize,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_speed > 0.0 && self.v_speed.is_finite()) {
            return Err(Error::invalid("v_speed must be positive and finite"));
        }
        for (name, x) in [
            ("coupling", self.coupling),
            ("friction", self.friction),
            ("diffusion", self.diffusion),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{name} must be nonnegative and finite, got {x}"
                )));
            }
        }
        if self.n_agents == 0 {
            return Err(Error::invalid("n_agents must be at least 1"));
        }
        Ok(())
    }

    /// `β = η/ν`, infinite for a noiseless system.
    pub fn beta(&self) -> f64 {
        self.friction / self.diffusion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentState {
    pub x: Vec3,
    pub v: Vec3,
    pub s: Vec3,
}

impl AgentState {
    pub const fn new(x: Vec3, v: Vec3, s: Vec3) -> Self {
        AgentState { x, v, s }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.v.is_finite() && self.s.is_finite()
    }
}

/// Tolerances on the two pointwise constraints `|v_i| = v` and
/// `v_i·s_i = α_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintBudget {
    /// Bound on `||v_i| − v| / v`.
    pub speed_rel: f64,
    /// Bound on `|v_i·s_i − α_i| / v²`.
    pub spin_rel: f64,
}

impl Default for ConstraintBudget {
    fn default() -> Self {
        ConstraintBudget {
            speed_rel: 1e-10,
            spin_rel: 1e-8,
        }
    }
}

/// N agents together with the model constants and the communication rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub agents: Vec<AgentState>,
    pub params: ModelParams,
    pub kernel: KernelSpec,
    pub self_term: SelfTerm,
    /// Per-agent constants `α_i = v_i·s_i`, recorded at construction.
    pub alpha: Vec<f64>,
    pub budget: ConstraintBudget,
    pub time: f64,
}

impl Ensemble {
    /// Builds an ensemble at `t = 0`, recording `α_i` from the initial data.
    ///
    /// Every velocity must already have length `params.v_speed` within the
    /// default speed budget.
    pub fn new(agents: Vec<AgentState>, params: ModelParams, kernel: KernelSpec) -> Result<Self> {
        params.validate()?;
        kernel.validate(params.n_agents)?;
        if agents.len() != params.n_agents {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} agents supplied for n_agents = {}",
                agents.len(),
                params.n_agents
            )));
        }
        let budget = ConstraintBudget::default();
        for (i, a) in agents.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidParameter(alloc::format!(
                    "agent {i} has a non-finite state"
                )));
            }
            let speed = a.v.norm();
            if speed == 0.0 {
                return Err(Error::DegenerateVelocity);
            }
            if (speed - params.v_speed).abs() > budget.speed_rel * params.v_speed {
                return Err(Error::InvalidParameter(alloc::format!(
                    "agent {i} has speed {speed}, expected {}",
                    params.v_speed
                )));
            }
        }
        let alpha = agents.iter().map(|a| a.v.dot(a.s)).collect();
        Ok(Ensemble {
            agents,
            params,
            kernel,
            self_term: SelfTerm::Include,
            alpha,
            budget,
            time: 0.0,
        })
    }

    pub fn with_self_term(mut self, self_term: SelfTerm) -> Self {
        self.self_term = self_term;
        self
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// The multiplicative weights `n_i` implied by the kernel, when it has
    /// that structure: `n_i` itself for a multiplicative kernel and `√c` for
    /// a constant kernel `c`.
    pub fn n_weights(&self) -> Option<Vec<f64>> {
        self.kernel.multiplicative_weights(self.len())
    }

    /// `(1/N) Σ_j n_j v_j`, unweighted when the kernel has no multiplicative
    /// structure.
    pub fn mean_velocity(&self) -> Vec3 {
        mean_velocity(&self.agents, self.n_weights().as_deref())
    }

    /// The alignment potential `U`; unit weights are used when the kernel
    /// has no multiplicative structure.
    pub fn potential_energy(&self) -> f64 {
        potential_energy(
            &self.agents,
            self.n_weights().as_deref(),
            self.params.coupling,
            self.params.v_speed,
        )
    }

    /// Closed form `U = (J/2N)(Σn_i)² − (JN/2v²)|w|²`, valid when every
    /// speed equals `v`.
    pub fn potential_energy_closed_form(&self) -> f64 {
        potential_energy_closed_form(
            &self.agents,
            self.n_weights().as_deref(),
            self.params.coupling,
            self.params.v_speed,
        )
    }

    pub fn sigma(&self) -> Result<SigmaView> {
        sigma_of(&self.agents, &self.alpha, self.params.v_speed)
    }

    /// `E = ½ Σ|σ_i|² + U`.
    pub fn total_energy(&self) -> f64 {
        kinetic_energy(&self.agents, &self.alpha, self.params.v_speed) + self.potential_energy()
    }

    pub fn total_spin(&self) -> Vec3 {
        total_spin(&self.agents)
    }

    /// Largest `||v_i| − v| / v` and `|v_i·s_i − α_i| / v²` over the agents.
    pub fn constraint_drift(&self) -> (f64, f64) {
        let v = self.params.v_speed;
        self.agents
            .iter()
            .zip(&self.alpha)
            .fold((0.0f64, 0.0f64), |(ds, dv), (a, &al)| {
                (
                    ds.max((a.v.norm() - v).abs() / v),
                    dv.max((a.v.dot(a.s) - al).abs() / (v * v)),
                )
            })
    }
}

/// Tangential spins `σ_i = s_i − α_i v_i / v²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaView {
    pub sigma: Vec<Vec3>,
}

impl SigmaView {
    pub fn max_norm(&self) -> f64 {
        self.sigma.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Inverse map `s_i = σ_i + α_i v_i / v²`.
    pub fn reconstruct_spins(&self, agents: &[AgentState], alpha: &[f64], v_speed: f64) -> Vec<Vec3> {
        let vv = v_speed * v_speed;
        self.sigma
            .iter()
            .zip(agents)
            .zip(alpha)
            .map(|((&sg, a), &al)| sg + a.v * (al / vv))
            .collect()
    }
}

pub fn sigma_of(agents: &[AgentState], alpha: &[f64], v_speed: f64) -> Result<SigmaView> {
    let vv = v_speed * v_speed;
    let sigma = agents
        .iter()
        .zip(alpha)
        .map(|(a, &al)| {
            if a.v.norm_sq() == 0.0 {
                Err(Error::DegenerateVelocity)
            } else {
                Ok(a.s - a.v * (al / vv))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SigmaView { sigma })
}

pub fn mean_velocity(agents: &[AgentState], n_weights: Option<&[f64]>) -> Vec3 {
    let inv_n = 1.0 / agents.len() as f64;
    let sum: Vec3 = match n_weights {
        Some(n) => agents.iter().zip(n).map(|(a, &nj)| a.v * nj).sum(),
        None => agents.iter().map(|a| a.v).sum(),
    };
    sum * inv_n
}

/// Double-sum form `U = (J/4Nv²) Σ_{ij} n_i n_j |v_i − v_j|²`.
pub fn potential_energy(agents: &[AgentState], n_weights: Option<&[f64]>, coupling: f64, v_speed: f64) -> f64 {
    let n = agents.len();
    let weight = |i: usize| n_weights.map_or(1.0, |w| w[i]);
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += weight(j) * (agents[i].v - agents[j].v).norm_sq();
        }
        acc += weight(i) * row;
    }
    coupling * acc / (4.0 * n as f64 * v_speed * v_speed)
}

pub fn potential_energy_closed_form(
    agents: &[AgentState],
    n_weights: Option<&[f64]>,
    coupling: f64,
    v_speed: f64,
) -> f64 {
    let n = agents.len() as f64;
    let mass: f64 = match n_weights {
        Some(w) => w.iter().sum(),
        None => n,
    };
    let w = mean_velocity(agents, n_weights);
    coupling * mass * mass / (2.0 * n) - coupling * n * w.norm_sq() / (2.0 * v_speed * v_speed)
}

/// `½ Σ|σ_i|²`.
pub fn kinetic_energy(agents: &[AgentState], alpha: &[f64], v_speed: f64) -> f64 {
    let vv = v_speed * v_speed;
    0.5 * agents
        .iter()
        .zip(alpha)
        .map(|(a, &al)| (a.s - a.v * (al / vv)).norm_sq())
        .sum::<f64>()
}

pub fn total_spin(agents: &[AgentState]) -> Vec3 {
    agents.iter().map(|a| a.s).sum()
}
