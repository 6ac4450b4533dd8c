//! Named initial data for every model.

use ism_core::init::{
    aligned_perturbed, circle_chain, equilibrium, helix_chain, two_groups, uniform_field_perturbed, uniform_sphere,
};
use ism_core::model::{Ensemble, ModelParams};
use ism_core::monokinetic::{
    annulus_profile, polar_rotating_state, FieldParams, LineParams, MonokineticField1D, PolarField2D, PolarGrid,
    PolarResidual, TravelingCurve,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{InitName, ScenarioConfig};
use crate::error::CliError;

/// ChaCha8 stream reserved for initial data; noise increments use streams
/// `0..N` of the same seed.
pub const INIT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub enum Initial {
    Ensemble(Ensemble),
    Field(MonokineticField1D),
    Polar(PolarField2D, PolarResidual),
    Chain(TravelingCurve),
}

pub fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    rng
}

pub fn model_params(config: &ScenarioConfig) -> Option<ModelParams> {
    let p = config.params.as_ref()?;
    Some(ModelParams {
        v_speed: p.v,
        coupling: p.coupling,
        friction: p.eta?,
        diffusion: p.nu?,
        n_agents: p.n_agents?,
    })
}

pub fn field_params(config: &ScenarioConfig) -> FieldParams {
    let (v_speed, j) = config.params.as_ref().map_or((1.0, 1.0), |p| (p.v, p.coupling));
    FieldParams {
        j,
        q: config.kernel.as_ref().map_or(0.0, |k| k.continuum_q()),
        v_speed,
    }
}

pub fn line_params(config: &ScenarioConfig) -> LineParams {
    let f = field_params(config);
    LineParams {
        j: f.j,
        q: f.q,
        lambda: config.params.as_ref().and_then(|p| p.lambda).unwrap_or(1.0),
        v_speed: f.v_speed,
    }
}

/// Builds the initial state named in `[init]`. Parameters the library
/// rejects are reported as configuration errors.
pub fn init_library(config: &ScenarioConfig) -> Result<Initial, CliError> {
    let init = config
        .init
        .as_ref()
        .ok_or_else(|| CliError::Config(vec![crate::config::ConfigError::global("no [init] section")]))?;
    let seed = config.integration.as_ref().and_then(|i| i.seed).unwrap_or(0);
    let mut rng = init_rng(seed);
    let setup = CliError::setup;
    match init.name {
        InitName::UniformSphere
        | InitName::AlignedPerturbed
        | InitName::TwoGroups
        | InitName::Equilibrium => {
            let params = model_params(config).expect("particle models carry full parameters");
            let kernel = config.kernel.as_ref().expect("particle models carry a kernel");
            let spec = kernel.spec();
            let ens = match init.name {
                InitName::UniformSphere => {
                    uniform_sphere(params, spec, init.real("box"), init.real("spin_std"), &mut rng)
                }
                InitName::AlignedPerturbed => {
                    aligned_perturbed(params, spec, init.real("box"), init.vector("axis"), init.real("delta"), &mut rng)
                }
                InitName::TwoGroups => {
                    two_groups(params, spec, init.real("box"), init.vector("axis"), init.real("angle"), &mut rng)
                }
                _ => equilibrium(params, init.vector("axis"), &mut rng),
            }
            .map_err(setup)?;
            Ok(Initial::Ensemble(ens.with_self_term(kernel.self_term.unwrap_or_default())))
        }
        InitName::UniformFieldPerturbed => uniform_field_perturbed(
            init.count("cells"),
            init.real("length"),
            init.real("rho"),
            init.count("mode"),
            init.real("amplitude"),
            field_params(config),
        )
        .map(Initial::Field)
        .map_err(setup),
        InitName::RotatingAnnulus => {
            let g = annulus_profile(init.real("r0"), init.real("width"));
            let grid = PolarGrid {
                cells: init.count("cells"),
                length: init.real("length"),
            };
            polar_rotating_state(&g, grid, field_params(config))
                .map(|(f, r)| Initial::Polar(f, r))
                .map_err(setup)
        }
        InitName::CircleChain => circle_chain(init.real("radius"), init.count("samples"), line_params(config))
            .map(Initial::Chain)
            .map_err(setup),
        InitName::HelixChain => helix_chain(
            init.real("kappa"),
            init.real("tau"),
            init.count("samples"),
            line_params(config),
        )
        .map(Initial::Chain)
        .map_err(setup),
    }
}
