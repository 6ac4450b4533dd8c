//! Trajectory diagnostics and classification of asymptotic states of the
//! velocity–spin system.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{cos_angle, Vec3};
use crate::integrators::StepReport;
use crate::model::{AgentState, Ensemble, ModelParams};

/// Scalar and vector observables of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub energy: f64,
    pub potential: f64,
    pub w: Vec3,
    pub w_norm: f64,
    pub max_sigma: f64,
    pub total_spin: Vec3,
    /// `cos∠(v_i, w)` per agent; zero when `w` vanishes.
    pub alignment: Vec<f64>,
}

impl Diagnostics {
    pub fn of(ens: &Ensemble) -> Self {
        let w = ens.mean_velocity();
        let potential = ens.potential_energy();
        let vv = ens.params.v_speed * ens.params.v_speed;
        let mut kinetic = 0.0;
        let mut max_sigma = 0.0f64;
        for (a, &al) in ens.agents.iter().zip(&ens.alpha) {
            let sigma = a.s - a.v * (al / vv);
            kinetic += sigma.norm_sq();
            max_sigma = max_sigma.max(sigma.norm());
        }
        Diagnostics {
            time: ens.time,
            energy: 0.5 * kinetic + potential,
            potential,
            w,
            w_norm: w.norm(),
            max_sigma,
            total_spin: ens.total_spin(),
            alignment: ens.agents.iter().map(|a| cos_angle(a.v, w).unwrap_or(0.0)).collect(),
        }
    }
}

/// Worst-case step statistics accumulated over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats {
    pub steps: usize,
    pub max_speed_drift: f64,
    pub max_spin_drift: f64,
    pub max_projection_correction: f64,
    pub flagged_steps: usize,
    pub kernel_evaluations: usize,
}

impl RunStats {
    pub fn absorb(&mut self, r: &StepReport) {
        self.steps += 1;
        self.max_speed_drift = r.speed_drift.iter().copied().fold(self.max_speed_drift, f64::max);
        self.max_spin_drift = r.spin_drift.iter().copied().fold(self.max_spin_drift, f64::max);
        self.max_projection_correction = self.max_projection_correction.max(r.projection_correction);
        self.flagged_steps += usize::from(r.flagged);
        self.kernel_evaluations += r.kernel_evaluations;
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Diagnostics>,
    /// Full agent states per snapshot, when requested.
    pub states: Vec<Vec<AgentState>>,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn record(&mut self, ens: &Ensemble, keep_state: bool) {
        self.snapshots.push(Diagnostics::of(ens));
        if keep_state {
            self.states.push(ens.agents.clone());
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|d| d.time)
    }

    /// Trailing `fraction` of the snapshots, at least one.
    pub fn window(&self, fraction: f64) -> Result<&[Diagnostics]> {
        let n = self.snapshots.len();
        if n == 0 || !(fraction > 0.0) {
            return Err(Error::EmptyWindow);
        }
        let take = (libm::ceil(fraction.min(1.0) * n as f64) as usize).clamp(1, n);
        Ok(&self.snapshots[n - take..])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// All velocities equal.
    Flocking,
    /// Velocities split between `±v ŵ`; agent ids on each side.
    Aligned { plus: Vec<usize>, minus: Vec<usize> },
    /// `w = 0` and every spin parallel to its velocity.
    Incoherent,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticVerdict {
    pub verdict: Verdict,
    /// Window average of `|w|`.
    pub w_inf_estimate: f64,
    /// Largest `max_i |σ_i|` in the window.
    pub sigma_residual: f64,
    /// Largest `|w|` in the window.
    pub w_residual: f64,
    /// Largest `1 − |cos∠(v_i, w)|` in the window.
    pub alignment_residual: f64,
}

pub const DEFAULT_WINDOW: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Classifies the end state over the trailing `window` fraction of the
/// snapshots.
pub fn classify_asymptotic(traj: &Trajectory, window: f64, tol: f64) -> Result<AsymptoticVerdict> {
    let win = traj.window(window)?;
    let sigma_residual = win.iter().map(|d| d.max_sigma).fold(0.0, f64::max);
    let w_residual = win.iter().map(|d| d.w_norm).fold(0.0, f64::max);
    let alignment_residual = win
        .iter()
        .flat_map(|d| d.alignment.iter().map(|c| 1.0 - c.abs()))
        .fold(0.0, f64::max);
    let w_inf_estimate = win.iter().map(|d| d.w_norm).sum::<f64>() / win.len() as f64;
    let verdict = if sigma_residual < tol && w_residual < tol {
        Verdict::Incoherent
    } else if sigma_residual < tol && alignment_residual < tol {
        let last = win.last().expect("nonempty window");
        let (plus, minus): (Vec<usize>, Vec<usize>) = (0..last.alignment.len()).partition(|&i| last.alignment[i] > 0.0);
        if minus.is_empty() {
            Verdict::Flocking
        } else {
            Verdict::Aligned { plus, minus }
        }
    } else {
        Verdict::Undecided
    };
    Ok(AsymptoticVerdict {
        verdict,
        w_inf_estimate,
        sigma_residual,
        w_residual,
        alignment_residual,
    })
}

/// Energy levels below which the velocity–spin system with weights `n`
/// converges to an aligned state, respectively to a flocking state:
/// `(J m²/(2N), 2J n₋(m − n₋)/N)` with `m = Σ n_i`, `n₋ = min n_i`.
pub fn energy_thresholds(params: &ModelParams, n: &[f64]) -> Result<(f64, f64)> {
    if n.is_empty() {
        return Err(Error::invalid("at least one weight is required"));
    }
    for (index, &value) in n.iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    let count = n.len() as f64;
    let m: f64 = n.iter().sum();
    let n_min = n.iter().copied().fold(f64::INFINITY, f64::min);
    let j = params.coupling;
    Ok((j * m * m / (2.0 * count), 2.0 * j * n_min * (m - n_min) / count))
}

/// `|w|(0)² − (v²/(JN)) Σ|σ_i(0)|²`, a lower bound for `|w(t)|²` along the
/// noiseless velocity–spin flow whenever `E(0)` is below the aligned
/// threshold.
pub fn mean_velocity_floor(ens: &Ensemble) -> f64 {
    let p = &ens.params;
    let w = ens.mean_velocity();
    let vv = p.v_speed * p.v_speed;
    let sigma_sq: f64 = ens
        .agents
        .iter()
        .zip(&ens.alpha)
        .map(|(a, &al)| (a.s - a.v * (al / vv)).norm_sq())
        .sum();
    w.norm_sq() - vv / (p.coupling * ens.len() as f64) * sigma_sq
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WInfinity {
    /// Window average of `|w|`.
    pub estimate: f64,
    /// Smallest and largest `|w|` in the window.
    pub band: (f64, f64),
}

/// Long-time limit of `|w(t)|` estimated over the trailing `window`
/// fraction of the snapshots.
pub fn w_infinity(traj: &Trajectory, window: f64) -> Result<WInfinity> {
    let win = traj.window(window)?;
    let estimate = win.iter().map(|d| d.w_norm).sum::<f64>() / win.len() as f64;
    let lo = win.iter().map(|d| d.w_norm).fold(f64::INFINITY, f64::min);
    let hi = win.iter().map(|d| d.w_norm).fold(0.0, f64::max);
    Ok(WInfinity {
        estimate,
        band: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactions::KernelSpec;
    use alloc::vec;

    fn params(n: usize) -> ModelParams {
        ModelParams {
            v_speed: 1.0,
            coupling: 1.0,
            friction: 1.0,
            diffusion: 0.0,
            n_agents: n,
        }
    }

    fn still(vs: &[Vec3]) -> Ensemble {
        let agents = vs.iter().map(|&v| AgentState::new(Vec3::ZERO, v, Vec3::ZERO)).collect();
        Ensemble::new(agents, params(vs.len()), KernelSpec::Constant(1.0)).unwrap()
    }

    fn single(ens: &Ensemble) -> Trajectory {
        let mut t = Trajectory::default();
        t.record(ens, false);
        t
    }

    #[test]
    fn thresholds_by_hand() {
        assert_eq!(energy_thresholds(&params(2), &[1.0, 1.0]).unwrap(), (1.0, 1.0));
        let n = 7;
        let (a, f) = energy_thresholds(&params(n), &vec![1.0; n]).unwrap();
        assert_eq!(a, n as f64 / 2.0);
        assert!((f - 2.0 * (n as f64 - 1.0) / n as f64).abs() < 1e-15);
    }

    #[test]
    fn aligned_state_is_flocking() {
        let e = still(&[Vec3::Z, Vec3::Z, Vec3::Z]);
        let v = classify_asymptotic(&single(&e), 0.1, 1e-6).unwrap();
        assert_eq!(v.verdict, Verdict::Flocking);
        assert_eq!(v.w_inf_estimate, 1.0);
    }

    #[test]
    fn balanced_groups_are_incoherent() {
        let e = still(&[Vec3::Z, -Vec3::Z, Vec3::Z, -Vec3::Z]);
        let v = classify_asymptotic(&single(&e), 0.1, 1e-6).unwrap();
        assert_eq!(v.verdict, Verdict::Incoherent);
    }

    #[test]
    fn unbalanced_groups_are_aligned() {
        let e = still(&[Vec3::Z, -Vec3::Z, Vec3::Z]);
        let v = classify_asymptotic(&single(&e), 0.1, 1e-6).unwrap();
        assert_eq!(
            v.verdict,
            Verdict::Aligned {
                plus: vec![0, 2],
                minus: vec![1]
            }
        );
        assert!((v.w_inf_estimate - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_window_is_an_error() {
        assert_eq!(classify_asymptotic(&Trajectory::default(), 0.1, 1e-6), Err(Error::EmptyWindow));
    }
}
