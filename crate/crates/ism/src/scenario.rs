//! Runs a parsed scenario and writes its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use ism_core::analysis::{classify_asymptotic, energy_thresholds, mean_velocity_floor, w_infinity, Trajectory, Verdict};
use ism_core::integrators::{run, Dynamics, RngStream, RunOptions, StepOptions};
use ism_core::meanfield::{bifurcation_scan, critical_coupling};
use ism_core::model::Ensemble;
use ism_core::monokinetic::{
    measured_phase_speed, pde_step_1d_with_cfl, step_chain, MonokineticField1D, PolarField2D, PolarResidual,
    TravelingCurve, CORE_DENSITY_REL,
};
use ism_core::Vec3;
use serde_json::{json, Value};

use crate::config::{Format, Model, ScenarioConfig};
use crate::error::CliError;
use crate::init::{init_library, Initial};
use crate::output::{
    write_csv, write_json, Row, BIFURCATION_HEADER, CHAIN_HEADER, DIAGNOSTIC_HEADER, FIELD_1D_HEADER,
    FIELD_POLAR_HEADER, SNAPSHOT_HEADER,
};

pub const SNAPSHOTS: &str = "snapshots.csv";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const FIELD: &str = "field.csv";
pub const BIFURCATION: &str = "bifurcation.csv";
pub const SUMMARY: &str = "summary.json";

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub directory: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// Runs `config`, writing into `directory` (created if missing).
pub fn run_scenario(config: &ScenarioConfig, directory: &Path) -> Result<RunReport, CliError> {
    fs::create_dir_all(directory).map_err(|e| CliError::io(directory, e))?;
    let mut out = Writer {
        config,
        directory: directory.to_path_buf(),
        files: Vec::new(),
    };
    let body = match config.model {
        Model::EquilibriumScan => run_scan(config, &mut out)?,
        _ => match init_library(config)? {
            Initial::Ensemble(ens) => run_particles(config, ens, &mut out)?,
            Initial::Field(field) => run_field(config, field, &mut out)?,
            Initial::Polar(field, residual) => write_polar(&field, residual, &mut out)?,
            Initial::Chain(curve) => run_chain(config, curve, &mut out)?,
        },
    };
    let mut summary = json!({
        "model": config.model.name(),
        "seed": config.integration.as_ref().and_then(|i| i.seed),
    });
    merge(&mut summary, body);
    summary["files"] = json!(out.files.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy()).collect::<Vec<_>>());
    summary["config"] = json!(config.to_string());
    if config.output.wants(Format::Json) {
        let path = out.directory.join(SUMMARY);
        write_json(&path, &summary)?;
        out.files.push(path);
    }
    Ok(RunReport {
        directory: out.directory,
        files: out.files,
        summary,
    })
}

struct Writer<'a> {
    config: &'a ScenarioConfig,
    directory: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Row>) -> Result<(), CliError> {
        if !self.config.output.wants(Format::Csv) {
            return Ok(());
        }
        let path = self.directory.join(name);
        write_csv(&path, header, rows)?;
        self.files.push(path);
        Ok(())
    }
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn step_count(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round() as usize
}

fn run_particles(config: &ScenarioConfig, mut ens: Ensemble, out: &mut Writer<'_>) -> Result<Value, CliError> {
    let it = config.integration.as_ref().expect("particle models carry [integration]");
    let analysis = config.analysis.unwrap_or_default();
    let seed = it.seed.unwrap_or(0);

    let energy0 = ens.total_energy();
    let thresholds = match ens.n_weights() {
        Some(n) => {
            let (aligned, flocking) = energy_thresholds(&ens.params, &n).map_err(CliError::setup)?;
            json!({
                "energy0": energy0,
                "aligned_bound": aligned,
                "flocking_bound": flocking,
                "below_aligned": energy0 < aligned,
                "below_flocking": energy0 < flocking,
                "w_floor": mean_velocity_floor(&ens),
            })
        }
        None => json!({ "energy0": energy0 }),
    };

    let opts = RunOptions {
        t_end: it.t_end,
        dt: it.dt,
        stride: it.stride,
        step: StepOptions {
            x_update: it.x_update.unwrap_or_default(),
            scheme: it.scheme.unwrap_or_default(),
        },
        keep_states: true,
    };
    let alpha = ens.alpha.clone();
    let v = ens.params.v_speed;
    let traj = match config.model {
        Model::Stochastic => {
            let mut noise = RngStream::new(seed, ens.len());
            run(&mut ens, Dynamics::Stochastic(&mut noise), &opts)
        }
        Model::FreeSpace => run(&mut ens, Dynamics::FreeSpace, &opts),
        _ => run(&mut ens, Dynamics::Deterministic, &opts),
    }
    .map_err(CliError::numerical)?;

    out.csv(SNAPSHOTS, &SNAPSHOT_HEADER, snapshot_rows(&traj))?;
    out.csv(
        DIAGNOSTICS,
        &DIAGNOSTIC_HEADER,
        traj.snapshots.iter().map(|d| {
            Row::new()
                .real(d.time)
                .real(d.energy)
                .real(d.potential)
                .real(d.w_norm)
                .vec3(d.w)
                .real(d.max_sigma)
                .vec3(d.total_spin)
        }),
    )?;

    let (mut speed_rel, mut spin_rel) = (0.0f64, 0.0f64);
    for state in &traj.states {
        for (a, al) in state.iter().zip(&alpha) {
            speed_rel = speed_rel.max((a.v.norm() - v).abs() / v);
            spin_rel = spin_rel.max((a.v.dot(a.s) - al).abs() / (v * v));
        }
    }
    let monotone_energy = config.model != Model::Stochastic || ens.params.diffusion == 0.0;
    let energy_increase = monotone_energy.then(|| {
        traj.snapshots
            .windows(2)
            .map(|p| p[1].energy - p[0].energy)
            .fold(0.0f64, f64::max)
    });

    let verdict = classify_asymptotic(&traj, analysis.window, analysis.tol).map_err(CliError::numerical)?;
    let w_inf = w_infinity(&traj, analysis.window).map_err(CliError::numerical)?;
    let (tag, sets) = match &verdict.verdict {
        Verdict::Flocking => ("Flocking", Value::Null),
        Verdict::Aligned { plus, minus } => ("Aligned", json!({ "plus": plus, "minus": minus })),
        Verdict::Incoherent => ("Incoherent", Value::Null),
        Verdict::Undecided => ("Undecided", Value::Null),
    };
    Ok(json!({
        "verdict": tag,
        "aligned_sets": sets,
        "residuals": {
            "sigma": verdict.sigma_residual,
            "w": verdict.w_residual,
            "alignment": verdict.alignment_residual,
        },
        "w_infinity": { "estimate": w_inf.estimate, "band": [w_inf.band.0, w_inf.band.1] },
        "thresholds": thresholds,
        "drifts": {
            "speed_rel_max": speed_rel,
            "spin_rel_max": spin_rel,
            "energy_increase_max": energy_increase,
            "step_speed_drift_max": traj.stats.max_speed_drift,
            "step_spin_drift_max": traj.stats.max_spin_drift,
            "projection_correction_max": traj.stats.max_projection_correction,
            "flagged_steps": traj.stats.flagged_steps,
        },
        "analysis": { "window": analysis.window, "tol": analysis.tol },
        "steps": traj.stats.steps,
        "snapshots": traj.snapshots.len(),
    }))
}

fn snapshot_rows(traj: &Trajectory) -> impl Iterator<Item = Row> + '_ {
    traj.snapshots.iter().zip(&traj.states).flat_map(|(d, state)| {
        state
            .iter()
            .enumerate()
            .map(move |(i, a)| Row::new().real(d.time).index(i).vec3(a.x).vec3(a.v).vec3(a.s))
    })
}

fn field_rows(field: &MonokineticField1D) -> Vec<Row> {
    (0..field.len())
        .map(|i| {
            Row::new()
                .real(field.time)
                .index(i)
                .real(field.rho[i])
                .vec3(field.u[i])
                .vec3(field.spin[i])
        })
        .collect()
}

fn run_field(config: &ScenarioConfig, mut field: MonokineticField1D, out: &mut Writer<'_>) -> Result<Value, CliError> {
    let it = config.integration.as_ref().expect("field models carry [integration]");
    let init = config.init.as_ref().expect("field models carry [init]");
    let cfl = it.cfl.unwrap_or(crate::config::DEFAULT_CFL);
    let steps = step_count(it.t_end, it.dt);
    let e = Vec3::Z.cross(Vec3::X);
    let transverse = |f: &MonokineticField1D| -> Vec<f64> { f.u.iter().map(|u| u.dot(e)).collect() };

    let before = transverse(&field);
    let (mass0, spin0) = (field.mass(), field.spin_momentum());
    let mut rows = field_rows(&field);
    let mut mass_drift = 0.0f64;
    let mut spin_drift = 0.0f64;
    for k in 1..=steps {
        pde_step_1d_with_cfl(&mut field, it.dt, cfl).map_err(CliError::numerical)?;
        field.time = k as f64 * it.dt;
        if k % it.stride == 0 || k == steps {
            rows.extend(field_rows(&field));
            mass_drift = mass_drift.max((field.mass() - mass0).abs() / mass0);
            spin_drift = spin_drift.max((field.spin_momentum() - spin0).norm());
        }
    }
    out.csv(FIELD, &FIELD_1D_HEADER, rows)?;

    let p = field.params;
    let rho = init.real("rho");
    let linear_speed = (p.j * rho.powf(1.0 - p.q)).sqrt();
    let measured = (field.time > 0.0)
        .then(|| measured_phase_speed(&before, &transverse(&field), init.count("mode"), field.length, field.time));
    Ok(json!({
        "q": p.q,
        "drifts": {
            "mass_rel_max": mass_drift,
            "spin_momentum_max": spin_drift,
        },
        "wave": {
            "linear_speed": linear_speed,
            "measured_speed": measured,
        },
        "admissible_dt": field.admissible_dt(cfl),
        "steps": steps,
    }))
}

fn write_polar(field: &PolarField2D, residual: PolarResidual, out: &mut Writer<'_>) -> Result<Value, CliError> {
    let rows = (0..field.rho.len()).map(|i| {
        Row::new()
            .real(0.0)
            .index(i)
            .real(field.rho[i])
            .real(field.theta[i])
            .real(field.spin[i])
    });
    out.csv(FIELD, &FIELD_POLAR_HEADER, rows)?;
    Ok(json!({
        "q": field.params.q,
        "grid": { "cells": field.grid.cells, "length": field.grid.length, "spacing": field.grid.spacing() },
        "residual": {
            "rho": residual.rho,
            "theta": residual.theta,
            "spin": residual.spin,
            "max": residual.max_norm(),
            "core_density_rel": CORE_DENSITY_REL,
        },
    }))
}

fn chain_rows(curve: &TravelingCurve) -> Vec<Row> {
    let c = &curve.chain;
    (0..c.len())
        .map(|i| Row::new().real(c.time).index(i).vec3(c.x[i]).vec3(c.v[i]).vec3(c.s[i]))
        .collect()
}

fn run_chain(config: &ScenarioConfig, mut curve: TravelingCurve, out: &mut Writer<'_>) -> Result<Value, CliError> {
    let it = config.integration.as_ref().expect("chain models carry [integration]");
    let x_update = it.x_update.unwrap_or_default();
    let steps = step_count(it.t_end, it.dt);
    let v = curve.chain.params.v_speed;
    let mut rows = chain_rows(&curve);
    let mut deviation = curve.deviation();
    let (mut speed_rel, mut spin_rel) = (0.0f64, 0.0f64);
    for k in 1..=steps {
        step_chain(&mut curve.chain, it.dt, x_update).map_err(CliError::numerical)?;
        curve.chain.time = k as f64 * it.dt;
        if k % it.stride == 0 || k == steps {
            rows.extend(chain_rows(&curve));
            deviation = deviation.max(curve.deviation());
            for (vi, si) in curve.chain.v.iter().zip(&curve.chain.s) {
                speed_rel = speed_rel.max((vi.norm() - v).abs() / v);
                spin_rel = spin_rel.max(vi.dot(*si).abs() / (v * v));
            }
        }
    }
    out.csv(FIELD, &CHAIN_HEADER, rows)?;
    Ok(json!({
        "gamma": curve.gamma,
        "condition_mismatch": curve.condition_mismatch,
        "deviation_max": deviation,
        "drifts": { "speed_rel_max": speed_rel, "spin_rel_max": spin_rel },
        "steps": steps,
    }))
}

fn run_scan(config: &ScenarioConfig, out: &mut Writer<'_>) -> Result<Value, CliError> {
    let scan = config.scan.expect("equilibrium_scan carries [scan]");
    let rows = bifurcation_scan(scan.min, scan.max, scan.steps).map_err(CliError::numerical)?;
    let monotone = rows.windows(2).all(|p| p[1].gamma >= p[0].gamma);
    let onset = critical_coupling(1e-10).map_err(CliError::numerical)?;
    out.csv(
        BIFURCATION,
        &BIFURCATION_HEADER,
        rows.iter().map(|s| Row::new().real(s.beta_j).real(s.xi).real(s.gamma)),
    )?;
    Ok(json!({
        "scan": { "min": scan.min, "max": scan.max, "steps": scan.steps },
        "critical_beta_j": onset,
        "gamma_monotone": monotone,
        "gamma_max": rows.last().map(|s| s.gamma),
    }))
}
