use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::Vec3;

/// Independent Gaussian streams, one per agent, derived from a single seed.
///
/// Agent `i` draws from ChaCha8 stream number `i` of the seed, so the
/// sequence it sees depends only on the seed and on how many increments it
/// has consumed, never on scheduling.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    streams: Vec<ChaCha8Rng>,
}

impl RngStream {
    pub fn new(seed: u64, n_agents: usize) -> Self {
        let streams = (0..n_agents)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(i as u64);
                r
            })
            .collect();
        RngStream { seed, streams }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    /// Brownian increment `ΔB ~ N(0, dt·I₃)` for `agent`.
    pub fn increment(&mut self, agent: usize, dt: f64) -> Vec3 {
        let r = &mut self.streams[agent];
        let scale = libm::sqrt(dt);
        let mut g = || -> f64 { StandardNormal.sample(r) };
        Vec3::new(g(), g(), g()) * scale
    }

    /// The generator of `agent`, for drawing anything other than increments.
    pub fn agent_rng(&mut self, agent: usize) -> &mut ChaCha8Rng {
        &mut self.streams[agent]
    }
}
