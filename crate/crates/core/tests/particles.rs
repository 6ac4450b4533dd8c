use ism_core::analysis::{classify_asymptotic, Verdict};
use ism_core::init::{aligned_perturbed, circle_chain, equilibrium, two_groups, uniform_sphere};
use ism_core::integrators::*;
use ism_core::interactions::{KernelSpec, RadialProfile};
use ism_core::meanfield::{bifurcation_scan, free_energy_product, h, solve_selfconsistency};
use ism_core::model::ModelParams;
use ism_core::monokinetic::LineParams;
use ism_core::{Error, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(n: usize, friction: f64, diffusion: f64) -> ModelParams {
    ModelParams {
        v_speed: 1.0,
        coupling: 1.0,
        friction,
        diffusion,
        n_agents: n,
    }
}

#[test]
fn flocking_data_is_stationary() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let axis = Vec3::new(1.0, 2.0, -0.5);
    let kernel = KernelSpec::Distance {
        profile: RadialProfile::Indicator { radius: 1.0 },
        q: 0.5,
    };
    let mut ens = aligned_perturbed(params(30, 0.7, 0.0), kernel, 1.0, axis, 0.0, &mut rng).unwrap();
    let v0: Vec<Vec3> = ens.agents.iter().map(|a| a.v).collect();
    for _ in 0..100 {
        step_deterministic(&mut ens, 0.01, StepOptions::default()).unwrap();
    }
    for (a, v) in ens.agents.iter().zip(&v0) {
        assert!((a.v - *v).max_abs() < 1e-14);
        assert_eq!(a.s, Vec3::ZERO);
    }
}

#[test]
fn isotropic_mean_velocity_scales_like_inverse_root_n() {
    // E|w|² = v²/N for independent uniform directions.
    let n = 100;
    let draws = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut acc = 0.0;
    for _ in 0..draws {
        let ens = uniform_sphere(params(n, 1.0, 0.0), KernelSpec::Constant(1.0), 1.0, 0.5, &mut rng).unwrap();
        acc += ens.mean_velocity().norm_sq() * n as f64;
    }
    let mean = acc / draws as f64;
    assert!((mean - 1.0).abs() < 0.2, "{mean}");
}

#[test]
fn circle_chain_meets_constraints_by_construction() {
    let p = LineParams {
        j: 2.0,
        q: 0.3,
        lambda: 1.5,
        v_speed: 0.8,
    };
    let tc = circle_chain(2.0, 100, p).unwrap();
    assert!(tc.satisfies_condition(1e-12));
    for (v, s) in tc.chain.v.iter().zip(&tc.chain.s) {
        assert!((v.norm() - 0.8).abs() < 1e-15);
        assert!(v.dot(*s).abs() < 1e-15);
    }
}

#[test]
fn opposite_groups_stay_aligned() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ens = two_groups(params(6, 1.0, 0.0), KernelSpec::Constant(1.0), 1.0, Vec3::Z, std::f64::consts::PI, &mut rng).unwrap();
    // Three up, three down: w = 0 and every agent is a fixed point.
    let traj = run(&mut ens, Dynamics::FreeSpace, &RunOptions::new(1.0, 0.01, 10)).unwrap();
    let v = classify_asymptotic(&traj, 0.5, 1e-9).unwrap();
    assert_eq!(v.verdict, Verdict::Incoherent);

    let mut ens = two_groups(params(7, 1.0, 0.0), KernelSpec::Constant(1.0), 1.0, Vec3::Z, std::f64::consts::PI, &mut rng).unwrap();
    let traj = run(&mut ens, Dynamics::FreeSpace, &RunOptions::new(1.0, 0.01, 10)).unwrap();
    match classify_asymptotic(&traj, 0.5, 1e-9).unwrap().verdict {
        Verdict::Aligned { plus, minus } => assert_eq!((plus.len(), minus.len()), (4, 3)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bifurcation_scan_is_monotone_and_vanishes_below_three() {
    let scan = bifurcation_scan(0.5, 10.0, 96).unwrap();
    for pair in scan.windows(2) {
        assert!(pair[1].gamma >= pair[0].gamma);
    }
    for s in &scan {
        if s.beta_j <= 3.0 {
            assert_eq!(s.gamma, 0.0, "beta J = {}", s.beta_j);
        } else {
            assert!(s.gamma > 0.0);
            assert!((s.xi - s.beta_j * h(s.xi).unwrap()).abs() < 1e-10 * s.xi);
        }
    }
}

#[test]
fn free_energy_is_stationary_at_the_fixed_point() {
    let (beta, coupling) = (5.0, 1.0);
    let sol = solve_selfconsistency(beta * coupling).unwrap();
    let f = |k: f64| free_energy_product(k, beta, coupling, 1.0).unwrap();
    let d = 1e-5;
    let slope = (f(sol.xi + d) - f(sol.xi - d)) / (2.0 * d);
    assert!(slope.abs() < 1e-8, "{slope}");
    // Above the critical coupling the ordered state has lower free energy.
    assert!(f(sol.xi) < f(0.0));
}

#[test]
fn equilibrium_sample_matches_mean_alignment() {
    let p = ModelParams {
        v_speed: 2.0,
        coupling: 1.0,
        friction: 1.0,
        diffusion: 0.2,
        n_agents: 20_000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ens = equilibrium(p, Vec3::X, &mut rng).unwrap();
    let gamma = solve_selfconsistency(5.0).unwrap().gamma;
    let w = ens.mean_velocity();
    assert!((w.x / p.v_speed - gamma).abs() < 0.02);
    // Tangential spin variance 1/β per direction, two directions.
    let mean_sq = ens.agents.iter().map(|a| a.s.norm_sq()).sum::<f64>() / p.n_agents as f64;
    assert!((mean_sq - 2.0 / p.beta()).abs() < 0.02);
    assert!(ens.agents.iter().all(|a| a.v.dot(a.s).abs() < 1e-12));
}

#[test]
fn noise_without_friction_grows_energy_at_two_nu_per_agent() {
    let (n, nu, t) = (40, 0.25, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let initial = uniform_sphere(params(n, 0.0, nu), KernelSpec::Constant(1.0), 1.0, 0.3, &mut rng).unwrap();
    let e0 = initial.total_energy();
    let paths = 400;
    let mut growth = 0.0;
    for path in 0..paths {
        let mut ens = initial.clone();
        let mut noise = RngStream::new(100 + path, n);
        for _ in 0..100 {
            step_stochastic(&mut ens, t / 100.0, &mut noise, StepOptions::default()).unwrap();
        }
        growth += ens.total_energy() - e0;
    }
    let rate = growth / paths as f64 / t;
    let expected = 2.0 * nu * n as f64;
    assert!((rate - expected).abs() < 0.1 * expected, "{rate} vs {expected}");
}

#[test]
fn stochastic_runs_are_reproducible_and_keep_constraints() {
    let go = || {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut ens = uniform_sphere(params(25, 0.5, 0.3), KernelSpec::Constant(1.0), 1.0, 0.5, &mut rng).unwrap();
        let mut noise = RngStream::new(42, 25);
        for _ in 0..200 {
            let r = step_stochastic(&mut ens, 0.01, &mut noise, StepOptions::default()).unwrap();
            assert!(!r.flagged);
        }
        ens.agents
    };
    assert_eq!(go(), go());
}

#[test]
fn noiseless_stochastic_step_is_the_deterministic_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = uniform_sphere(params(12, 0.4, 0.0), KernelSpec::Constant(2.0), 1.0, 0.5, &mut rng).unwrap();
    let mut b = a.clone();
    let mut a = a;
    let mut noise = RngStream::new(1, 12);
    for _ in 0..50 {
        step_deterministic(&mut a, 0.02, StepOptions::default()).unwrap();
        step_stochastic(&mut b, 0.02, &mut noise, StepOptions::default()).unwrap();
    }
    assert_eq!(a.agents, b.agents);
}

#[test]
fn composition_is_fourth_order_in_energy() {
    let drift = |dt: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut ens = uniform_sphere(params(20, 0.0, 0.0), KernelSpec::Constant(1.0), 1.0, 0.5, &mut rng).unwrap();
        let e0 = ens.total_energy();
        let opts = StepOptions {
            scheme: Scheme::Composition4,
            ..Default::default()
        };
        let mut worst = 0.0_f64;
        for _ in 0..(2.0 / dt).round() as usize {
            step_deterministic(&mut ens, dt, opts).unwrap();
            worst = worst.max((ens.total_energy() - e0).abs());
        }
        worst
    };
    let ratio = drift(0.04) / drift(0.02);
    assert!(ratio > 12.0, "{ratio}");
}

#[test]
fn arc_update_follows_the_circle_exactly() {
    // A lone agent with constant spin moves on a circle of radius v/|s|.
    let p = params(1, 0.0, 0.0);
    let agents = vec![ism_core::model::AgentState::new(Vec3::ZERO, Vec3::X, Vec3::Z * 2.0)];
    let mut ens = ism_core::model::Ensemble::new(agents, p, KernelSpec::Constant(1.0)).unwrap();
    let opts = StepOptions {
        x_update: XUpdate::Arc,
        ..Default::default()
    };
    let dt = 0.1;
    for _ in 0..10 {
        step_deterministic(&mut ens, dt, opts).unwrap();
    }
    let t: f64 = 1.0;
    let expected = Vec3::new((2.0 * t).sin() / 2.0, (1.0 - (2.0 * t).cos()) / 2.0, 0.0);
    assert!((ens.agents[0].x - expected).max_abs() < 1e-14);
}

#[test]
fn free_space_step_rejects_positional_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let kernel = KernelSpec::Rank(RadialProfile::Indicator { radius: 0.5 });
    let mut ens = uniform_sphere(params(5, 1.0, 0.0), kernel, 1.0, 0.5, &mut rng).unwrap();
    assert!(matches!(
        step_free_space(&mut ens, 0.01, StepOptions::default()),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn run_records_start_stride_and_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ens = uniform_sphere(params(5, 1.0, 0.0), KernelSpec::Constant(1.0), 1.0, 0.5, &mut rng).unwrap();
    let traj = run(&mut ens, Dynamics::Deterministic, &RunOptions::new(1.05, 0.01, 10)).unwrap();
    let times: Vec<f64> = traj.times().collect();
    assert_eq!(times.len(), 12);
    assert_eq!(times[0], 0.0);
    assert!((times[11] - 1.05).abs() < 1e-12);
}
