//! Per-agent interaction fields `w_i` for every communication rule: constant,
//! multiplicative, distance-based with density normalization, and rank-based.

mod continuum;
mod index;
mod profile;

use alloc::vec;
use alloc::vec::Vec;

use libm::{pow, sqrt};

pub use continuum::{continuum_w, ContinuumKernel, PeriodicGrid3};
pub use index::SpatialIndex;
pub use profile::RadialProfile;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::model::AgentState;

/// Communication-weight rule.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `n_ij = c`.
    Constant(f64),
    /// `n_ij = n_i n_j`.
    Multiplicative(Vec<f64>),
    /// `n_ij = K(|x_i − x_j|) / n_i^q` with `n_i = (1/N) Σ_{j≠i} K(|x_i − x_j|)`.
    Distance { profile: RadialProfile, q: f64 },
    /// `n_ij = T(M_ij)` with `M_ij` the fraction of agents strictly closer to
    /// `x_i` than `x_j` is.
    Rank(RadialProfile),
}

impl KernelSpec {
    pub fn validate(&self, n_agents: usize) -> Result<()> {
        match self {
            KernelSpec::Constant(c) => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(Error::invalid("constant kernel value must be nonnegative and finite"));
                }
            }
            KernelSpec::Multiplicative(n) => {
                if n.len() != n_agents {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "{} multiplicative weights for {n_agents} agents",
                        n.len()
                    )));
                }
                check_positive(n)?;
            }
            KernelSpec::Distance { profile, q } => {
                profile.validate()?;
                if !(0.0..=1.0).contains(q) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "distance normalization exponent q = {q} must lie in [0, 1]"
                    )));
                }
            }
            KernelSpec::Rank(profile) => profile.validate()?,
        }
        Ok(())
    }

    /// Weights `n_i` with `n_ij = n_i n_j`, if the rule has that structure.
    pub fn multiplicative_weights(&self, n_agents: usize) -> Option<Vec<f64>> {
        match self {
            KernelSpec::Constant(c) => Some(vec![sqrt(*c); n_agents]),
            KernelSpec::Multiplicative(n) => Some(n.clone()),
            _ => None,
        }
    }

    /// Whether `w_i` depends on the positions.
    pub fn uses_positions(&self) -> bool {
        matches!(self, KernelSpec::Distance { .. } | KernelSpec::Rank(_))
    }
}

/// Treatment of the `j = i` term in the interaction sums. With `Include`,
/// the distance sum carries `K(0) v_i` (the normalization `n_i` never does)
/// and the rank sum carries `T(0) v_i`, i.e. `M_ii = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfTerm {
    #[default]
    Include,
    Exclude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionField {
    pub w: Vec<Vec3>,
    pub kernel_evaluations: usize,
}

/// Evaluates `w_i` for every agent under `kernel`.
pub fn interaction_field(agents: &[AgentState], kernel: &KernelSpec, self_term: SelfTerm) -> Result<InteractionField> {
    let n = agents.len();
    match kernel {
        KernelSpec::Constant(c) => Ok(InteractionField {
            w: w_constant(agents, *c, self_term),
            kernel_evaluations: n,
        }),
        KernelSpec::Multiplicative(weights) => Ok(InteractionField {
            w: w_multiplicative(agents, weights, self_term)?,
            kernel_evaluations: n,
        }),
        KernelSpec::Distance { profile, q } => w_distance(agents, profile, *q, self_term),
        KernelSpec::Rank(profile) => Ok(w_rank(agents, profile, self_term)),
    }
}

/// `w_i = c (1/N) Σ_j v_j`.
pub fn w_constant(agents: &[AgentState], c: f64, self_term: SelfTerm) -> Vec<Vec3> {
    let nf = agents.len() as f64;
    let total: Vec3 = agents.iter().map(|a| a.v).sum();
    match self_term {
        SelfTerm::Include => vec![total * (c / nf); agents.len()],
        SelfTerm::Exclude => agents.iter().map(|a| (total - a.v) * (c / nf)).collect(),
    }
}

/// `w_i = n_i (1/N) Σ_j n_j v_j`.
pub fn w_multiplicative(agents: &[AgentState], weights: &[f64], self_term: SelfTerm) -> Result<Vec<Vec3>> {
    check_positive(weights)?;
    if weights.len() != agents.len() {
        return Err(Error::invalid("one multiplicative weight per agent is required"));
    }
    let nf = agents.len() as f64;
    let total: Vec3 = agents.iter().zip(weights).map(|(a, &nj)| a.v * nj).sum();
    Ok(agents
        .iter()
        .zip(weights)
        .map(|(a, &ni)| {
            let sum = match self_term {
                SelfTerm::Include => total,
                SelfTerm::Exclude => total - a.v * ni,
            };
            sum * (ni / nf)
        })
        .collect())
}

/// `w_i = (1/N) Σ_j K(|x_i − x_j|) v_j / n_i^q`, summed over neighbors in
/// ascending id order found through a cell list.
///
/// Fails with [`Error::IsolatedAgent`] when `q > 0` and some agent has no
/// neighbor inside the support.
pub fn w_distance(agents: &[AgentState], profile: &RadialProfile, q: f64, self_term: SelfTerm) -> Result<InteractionField> {
    profile.validate()?;
    let positions: Vec<Vec3> = agents.iter().map(|a| a.x).collect();
    let radius = profile.support();
    let index = SpatialIndex::build(&positions, radius)?;
    let nf = agents.len() as f64;
    let per_agent = |i: usize| -> Result<(Vec3, usize)> {
        let xi = positions[i];
        let neighbors = index.query(&positions, xi, radius);
        let mut num = Vec3::ZERO;
        let mut mass = 0.0;
        for &j in &neighbors {
            let k = profile.value((xi - positions[j]).norm());
            if j == i {
                if self_term == SelfTerm::Include {
                    num += agents[j].v * k;
                }
            } else {
                num += agents[j].v * k;
                mass += k;
            }
        }
        Ok((normalize(num, mass, nf, q, i)?, neighbors.len()))
    };
    let results = per_agent_map(agents.len(), per_agent);
    let mut w = Vec::with_capacity(agents.len());
    let mut kernel_evaluations = 0;
    for r in results {
        let (wi, count) = r?;
        w.push(wi);
        kernel_evaluations += count;
    }
    Ok(InteractionField { w, kernel_evaluations })
}

/// Shared final step of the distance rule: `(num/N) / (mass/N)^q`.
pub fn normalize(num: Vec3, mass: f64, nf: f64, q: f64, agent: usize) -> Result<Vec3> {
    let wi = num / nf;
    if q == 0.0 {
        return Ok(wi);
    }
    let n_i = mass / nf;
    if !(n_i > 0.0) {
        return Err(Error::IsolatedAgent { agent });
    }
    Ok(wi / pow(n_i, q))
}

/// `w_i = (1/N) Σ_j T(M_ij) v_j` with `M_ij = (1/N) #{k : |x_i − x_k| < |x_i − x_j|}`.
///
/// Each agent sorts its distances once and reads `N M_ij` as a lower-bound
/// position, so equidistant agents share the same count.
pub fn w_rank(agents: &[AgentState], profile: &RadialProfile, self_term: SelfTerm) -> InteractionField {
    let n = agents.len();
    let nf = n as f64;
    let per_agent = |i: usize| -> Vec3 {
        let xi = agents[i].x;
        let dist: Vec<f64> = agents.iter().map(|a| (xi - a.x).norm()).collect();
        let mut sorted = dist.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let mut num = Vec3::ZERO;
        for (j, a) in agents.iter().enumerate() {
            let t = if j == i {
                match self_term {
                    SelfTerm::Include => profile.value(0.0),
                    SelfTerm::Exclude => continue,
                }
            } else {
                let closer = sorted.partition_point(|&d| d < dist[j]);
                profile.value(closer as f64 / nf)
            };
            num += a.v * t;
        }
        num / nf
    };
    InteractionField {
        w: per_agent_map(n, per_agent),
        kernel_evaluations: n * n,
    }
}

fn check_positive(weights: &[f64]) -> Result<()> {
    for (index, &value) in weights.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    Ok(())
}

#[cfg(feature = "parallel")]
pub(crate) fn per_agent_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn per_agent_map<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}
