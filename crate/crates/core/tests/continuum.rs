use std::f64::consts::PI;

use ism_core::init::{circle_chain, matched_gamma};
use ism_core::interactions::RadialProfile;
use ism_core::monokinetic::*;
use ism_core::{Error, Vec3};

fn unit() -> RadialProfile {
    RadialProfile::Indicator { radius: 1.0 }
}

fn zero_profile() -> RadialProfile {
    RadialProfile::Table {
        knots: vec![(0.0, 0.0), (1.0, 0.0)],
    }
}

#[test]
fn kernel_coefficient_of_unit_ball() {
    let b = coeff_b_kernel(&unit()).unwrap();
    assert!((b - 4.0 * PI / 15.0).abs() < 1e-13);
    assert_eq!(coeff_b_kernel(&zero_profile()).unwrap(), 0.0);
}

#[test]
fn kernel_coefficients_scale_with_support() {
    let profile = RadialProfile::Table {
        knots: vec![(0.0, 1.0), (0.3, 0.6), (1.0, 0.0)],
    };
    let r = 1.7;
    let b = coeff_b_kernel(&profile).unwrap();
    let scaled = coeff_b_kernel(&profile.scaled(r)).unwrap();
    assert!((scaled - b * r.powi(5)).abs() < 1e-12 * scaled);
    let (b0, b2) = coeff_line(&profile).unwrap();
    let (s0, s2) = coeff_line(&profile.scaled(r)).unwrap();
    assert!((s0 - b0 * r).abs() < 1e-12 * s0);
    assert!((s2 - b2 * r.powi(3)).abs() < 1e-12 * s2);
}

#[test]
fn line_coefficients_of_unit_interval() {
    let (b0, b2) = coeff_line(&unit()).unwrap();
    assert!((b0 - 2.0).abs() < 1e-13);
    assert!((b2 - 2.0 / 3.0).abs() < 1e-13);
    assert_eq!(coeff_line(&zero_profile()).unwrap(), (0.0, 0.0));
}

#[test]
fn rank_coefficients_of_unit_interval() {
    let (bt, b_line) = coeff_rank(&unit()).unwrap();
    let edge = (4.0 * PI).powf(-1.0 / 3.0);
    assert!((bt - 4.0 * PI / 3.0 * edge.powi(5) / 5.0).abs() < 1e-13);
    assert!((b_line - 1.0 / 3.0).abs() < 1e-13);
    assert_eq!(coeff_rank(&zero_profile()).unwrap(), (0.0, 0.0));
}

#[test]
fn constant_field_gives_zero_on_both_sides() {
    let rho = |y: Vec3| (-y.norm_sq()).exp();
    let phi = |_: Vec3| 2.5;
    let p = SpaceProblem {
        kernel: unit(),
        rho: &rho,
        phi: &phi,
        point: Vec3::new(0.1, 0.0, -0.2),
    };
    let r = expansion_space(&p, 0.1).unwrap();
    assert_eq!((r.exact, r.asymptotic, r.rel_error), (0.0, 0.0, 0.0));
}

#[test]
fn straight_line_expansion_matches_second_derivative() {
    let curve = |z: f64| Vec3::new(z, 0.0, 0.0);
    let phi = |z: f64| z.sin() + 0.3 * z * z;
    let p = LineProblem {
        kernel: unit(),
        curve: &curve,
        phi: &phi,
    };
    let eps = 0.05;
    let r = expansion_line(&p, eps).unwrap();
    let (_, b2) = coeff_line(&unit()).unwrap();
    let expected = eps.powi(3) * b2 / 2.0 * 0.6;
    assert!((r.asymptotic - expected).abs() < 1e-9 * expected);
    // Exact: ∫_{−ε}^{ε} (sin z + 0.3 z²) dz = 0.2 ε³.
    assert!((r.exact - 0.2 * eps.powi(3)).abs() < 1e-15);
}

#[test]
fn expansion_errors_shrink_quadratically() {
    let eps = [0.2, 0.1, 0.05, 0.025];
    for kind in [ExpansionKind::Space, ExpansionKind::Line] {
        let errs: Vec<f64> = eps.iter().map(|&e| expansion_check(kind, e).unwrap().rel_error).collect();
        let slope = log_log_slope(&eps, &errs).unwrap();
        assert!((slope - 2.0).abs() < 0.2, "{kind:?}: {slope}");
    }
}

#[test]
fn curve_must_start_at_origin() {
    let curve = |z: f64| Vec3::new(z, 1.0, 0.0);
    let phi = |z: f64| z;
    let p = LineProblem {
        kernel: unit(),
        curve: &curve,
        phi: &phi,
    };
    assert!(matches!(expansion_line(&p, 0.1), Err(Error::InvalidParameter(_))));
}

fn field_params(q: f64) -> FieldParams {
    FieldParams { j: 1.3, q, v_speed: 1.0 }
}

#[test]
fn uniform_field_is_stationary() {
    let mut f = MonokineticField1D::uniform(64, 3.0, 1.7, Vec3::new(0.6, 0.0, 0.8), field_params(0.5)).unwrap();
    let d = pde_rhs_1d(&f);
    assert!(d.rho.iter().all(|&x| x == 0.0));
    assert!(d.u.iter().chain(&d.spin).all(|x| x.max_abs() == 0.0));
    let before = f.clone();
    let dt = f.admissible_dt(0.5);
    for _ in 0..10 {
        pde_step_1d(&mut f, dt).unwrap();
    }
    for i in 0..f.len() {
        assert!((f.rho[i] - before.rho[i]).abs() <= 1e-12);
        assert!((f.u[i] - before.u[i]).max_abs() <= 1e-12);
        assert!(f.spin[i].max_abs() <= 1e-12);
    }
}

/// Periodic centered differences of a sampled function.
fn grad(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    (0..m).map(|i| (f[(i + 1) % m] - f[(i + m - 1) % m]) / (2.0 * h)).collect()
}

fn lap(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    (0..m)
        .map(|i| (f[(i + 1) % m] - 2.0 * f[i] + f[(i + m - 1) % m]) / (h * h))
        .collect()
}

#[test]
fn product_rule_for_laplacian_holds_to_second_order() {
    // ρΔu + 2∇ρ·∇u and Δ(ρu) − (Δρ)u approximate the same field.
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for m in [64, 128, 256] {
        let h = 2.0 * PI / m as f64;
        let x: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
        let rho: Vec<f64> = x.iter().map(|x| 1.5 + 0.5 * x.sin()).collect();
        let u: Vec<f64> = x.iter().map(|x| (2.0 * x).cos()).collect();
        let ru: Vec<f64> = rho.iter().zip(&u).map(|(a, b)| a * b).collect();
        let (gr, gu, lu, lr, lru) = (grad(&rho, h), grad(&u, h), lap(&u, h), lap(&rho, h), lap(&ru, h));
        let err = (0..m)
            .map(|i| ((rho[i] * lu[i] + 2.0 * gr[i] * gu[i]) - (lru[i] - lr[i] * u[i])).abs())
            .fold(0.0, f64::max);
        errs.push(err);
        hs.push(h);
    }
    let slope = log_log_slope(&hs, &errs).unwrap();
    assert!((slope - 2.0).abs() < 0.2, "{slope}");
}

fn bumpy_field(q: f64) -> MonokineticField1D {
    let m = 128;
    let l = 2.0 * PI;
    let dx = l / m as f64;
    let mut rho = Vec::new();
    let mut u = Vec::new();
    let mut spin = Vec::new();
    for i in 0..m {
        let x = (i as f64 + 0.5) * dx;
        rho.push(1.0 + 0.3 * x.cos());
        let raw = Vec3::new(0.2 * x.sin(), 0.3 * (2.0 * x).cos(), 1.0);
        u.push(raw.normalized().unwrap());
        spin.push(Vec3::new(0.1 * x.cos(), -0.2 * x.sin(), 0.05));
    }
    MonokineticField1D::new(rho, u, spin, l, field_params(q)).unwrap()
}

#[test]
fn spin_momentum_is_conserved_semidiscretely_for_q_zero() {
    let f = bumpy_field(0.0);
    let d = pde_rhs_1d(&f);
    let dx = f.dx();
    let rate: Vec3 = (0..f.len())
        .map(|i| f.spin[i] * d.rho[i] + d.spin[i] * f.rho[i])
        .sum::<Vec3>()
        * dx;
    assert!(rate.max_abs() < 1e-12, "{rate:?}");
    let mass_rate: f64 = d.rho.iter().sum::<f64>() * dx;
    assert!(mass_rate.abs() < 1e-13);
}

#[test]
fn mass_and_spin_momentum_hold_over_time() {
    let mut f = bumpy_field(0.0);
    let m0 = f.mass();
    let p0 = f.spin_momentum();
    let scale = f.rho.iter().zip(&f.spin).map(|(r, s)| r * s.norm()).sum::<f64>() * f.dx();
    let dt = f.admissible_dt(0.5);
    pde_run_1d(&mut f, 1.0, dt).unwrap();
    assert!(((f.mass() - m0) / m0).abs() < 1e-12);
    assert!((f.spin_momentum() - p0).norm() / scale < 1e-7);
    assert!(f.u.iter().all(|u| (u.norm() - 1.0).abs() < 1e-14));
}

#[test]
fn cfl_violation_names_the_admissible_step() {
    let mut f = bumpy_field(0.0);
    let admissible = f.admissible_dt(DEFAULT_CFL);
    match pde_step_1d(&mut f, 2.0 * admissible) {
        Err(Error::Cfl { dt, admissible: a }) => {
            assert_eq!(dt, 2.0 * admissible);
            assert_eq!(a, admissible);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn linearized_wave_keeps_longitudinal_components() {
    let p = field_params(0.0);
    let mut f = transverse_wave(256, 2.0 * PI, 1.0, Vec3::Z, 1, 1e-4, p).unwrap();
    let u0: Vec<f64> = f.u.iter().map(|u| u.z).collect();
    let s0: Vec<f64> = f.spin.iter().map(|s| s.z).collect();
    let dt = f.admissible_dt(0.5);
    pde_run_1d(&mut f, 2.0, dt).unwrap();
    for i in 0..f.len() {
        assert!((f.u[i].z - u0[i]).abs() < 1e-6);
        assert!((f.spin[i].z - s0[i]).abs() < 1e-6);
    }
}

#[test]
fn wave_speed_follows_density_power() {
    let l = 2.0 * PI;
    for (q, rho) in [(0.0, 2.0), (0.5, 3.0), (5.0 / 3.0, 0.5)] {
        let p = FieldParams { j: 0.8, q, v_speed: 1.0 };
        let mut f = transverse_wave(256, l, rho, Vec3::Z, 1, 1e-4, p).unwrap();
        let e = Vec3::Z.cross(Vec3::X);
        let before: Vec<f64> = f.u.iter().map(|u| u.dot(e)).collect();
        let c = (p.j * rho.powf(1.0 - q)).sqrt();
        let t = 1.0 / c;
        let dt = f.admissible_dt(0.5);
        pde_run_1d(&mut f, t, dt).unwrap();
        let after: Vec<f64> = f.u.iter().map(|u| u.dot(e)).collect();
        let speed = measured_phase_speed(&before, &after, 1, l, t);
        assert!((speed - c).abs() < 1e-3 * c, "q={q} rho={rho}: {speed} vs {c}");
    }
}

#[test]
fn rotating_state_spin_is_speed_over_radius() {
    let grid = PolarGrid { cells: 64, length: 8.0 };
    let g = annulus_profile(2.0, 0.8);
    let (field, _) = polar_rotating_state(&g, grid, field_params(0.0)).unwrap();
    // Node (48, 32) sits at (2, 0).
    assert_eq!(grid.node(48, 32), (2.0, 0.0));
    assert!((field.spin[48 * 64 + 32] - 0.5).abs() < 1e-15);
}

#[test]
fn empty_rotating_state_has_zero_residual() {
    let grid = PolarGrid { cells: 32, length: 4.0 };
    let (_, r) = polar_rotating_state(&|_| 0.0, grid, field_params(0.0)).unwrap();
    assert_eq!(r.max_norm(), 0.0);
}

#[test]
fn density_at_the_origin_is_rejected() {
    let grid = PolarGrid { cells: 32, length: 4.0 };
    let g = |r: f64| if r < 1.0 { 1.0 } else { 0.0 };
    assert_eq!(polar_rotating_state(&g, grid, field_params(0.0)).unwrap_err(), Error::GridTouchesOrigin);
}

fn line_params(lambda: f64, q: f64) -> LineParams {
    LineParams {
        j: 0.7,
        q,
        lambda,
        v_speed: 1.2,
    }
}

#[test]
fn straight_chain_is_at_rest() {
    let tc = traveling_curve(ArcCurve::Line, 1.3, 0.0, 40, line_params(1.0, 0.0)).unwrap();
    let d = line_rhs(&tc.chain).unwrap();
    assert!(tc.chain.s.iter().all(|s| *s == Vec3::ZERO));
    assert!(d.s.iter().chain(&d.v).all(|x| x.max_abs() < 1e-12));
    assert!(d.x.iter().all(|x| (*x - Vec3::X * 1.2).max_abs() < 1e-15));
}

#[test]
fn open_straight_chain_is_at_rest() {
    let m = 20;
    let x: Vec<Vec3> = (0..m).map(|i| Vec3::new(0.1 * i as f64, 0.0, 0.0)).collect();
    let chain = LineChain::new(
        x,
        vec![Vec3::X * 1.2; m],
        vec![Vec3::ZERO; m],
        0.1,
        ChainBoundary::Open,
        line_params(1.0, 0.5),
    )
    .unwrap();
    let d = line_rhs(&chain).unwrap();
    assert!(d.s.iter().all(|x| x.max_abs() < 1e-12));
}

#[test]
fn circle_chain_spin_is_constant_binormal() {
    let p = line_params(1.0, 0.0);
    let radius = 1.5;
    let tc = circle_chain(radius, 64, p).unwrap();
    for (v, s) in tc.chain.v.iter().zip(&tc.chain.s) {
        assert!((*s - Vec3::Z * (p.v_speed / radius)).max_abs() < 1e-14);
        assert!((v.norm() - p.v_speed).abs() < 1e-14);
        assert!(v.dot(*s).abs() < 1e-14);
    }
}

/// Largest `|ṡ_i − v² Γ'∧Γ‴|` over the chain, the exact torque at the
/// traveling parameters.
fn torque_error(curve: ArcCurve, samples: usize, p: LineParams) -> (f64, f64) {
    let gamma = matched_gamma(&p).unwrap();
    let tc = traveling_curve(curve, gamma, 0.0, samples, p).unwrap();
    let d = line_rhs(&tc.chain).unwrap();
    let err = (0..samples)
        .map(|i| {
            let [_, t, _, third] = curve.frame(gamma * i as f64 * tc.chain.dz);
            (d.s[i] - t.cross(third) * (p.v_speed * p.v_speed)).norm()
        })
        .fold(0.0, f64::max);
    (tc.chain.dz, err)
}

#[test]
fn circle_torque_vanishes() {
    // Γ‴ is parallel to Γ' on a circle, and the symmetric stencil keeps the
    // discrete torque at roundoff.
    for m in [32, 128] {
        let (_, err) = torque_error(ArcCurve::Circle { radius: 1.1 }, m, line_params(1.0, 0.0));
        assert!(err < 1e-9, "{err}");
    }
}

#[test]
fn helix_torque_converges_to_analytic_value() {
    let curve = ArcCurve::helix_from_curvature(1.0, 0.6);
    for q in [0.0, 0.5] {
        let (hs, errs): (Vec<f64>, Vec<f64>) = [32, 64, 128]
            .iter()
            .map(|&m| torque_error(curve, m, line_params(1.0, q)))
            .unzip();
        let slope = log_log_slope(&hs, &errs).unwrap();
        assert!((slope - 2.0).abs() < 0.2, "q={q}: {slope}");
        assert!(errs[2] < 1e-3);
    }
}

#[test]
fn torque_is_linear_in_lambda_for_q_zero() {
    let curve = ArcCurve::helix_from_curvature(1.0, 0.3);
    let a = traveling_curve(curve, 1.0, 0.0, 64, line_params(1.0, 0.0)).unwrap();
    let b = traveling_curve(curve, 1.0, 0.0, 64, line_params(2.0, 0.0)).unwrap();
    let (da, db) = (line_rhs(&a.chain).unwrap(), line_rhs(&b.chain).unwrap());
    for (x, y) in da.s.iter().zip(&db.s) {
        assert!((*x * 2.0 - *y).max_abs() < 1e-12);
    }
}

#[test]
fn traveling_condition_is_reported() {
    let p = line_params(1.0, 0.0);
    let exact = traveling_curve(ArcCurve::Circle { radius: 1.0 }, matched_gamma(&p).unwrap(), 0.0, 16, p).unwrap();
    assert!(exact.satisfies_condition(1e-12));
    let off = traveling_curve(ArcCurve::Circle { radius: 1.0 }, 3.0, 0.0, 16, p).unwrap();
    assert!(!off.satisfies_condition(1e-3));
}

#[test]
fn collapsed_chain_is_degenerate() {
    let m = 8;
    let chain = LineChain::new(
        vec![Vec3::ZERO; m],
        vec![Vec3::X; m],
        vec![Vec3::ZERO; m],
        0.1,
        ChainBoundary::Periodic { shift: Vec3::ZERO },
        LineParams {
            j: 1.0,
            q: 0.0,
            lambda: 1.0,
            v_speed: 1.0,
        },
    )
    .unwrap();
    assert!(matches!(line_rhs(&chain), Err(Error::DegenerateCurve { .. })));
}
