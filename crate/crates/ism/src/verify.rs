//! Re-checks a finished run from its files alone.

use std::fmt;
use std::fs;
use std::path::Path;

use ism_core::analysis::{classify_asymptotic, w_infinity, Diagnostics, Trajectory, Verdict};
use ism_core::geometry::cos_angle;
use ism_core::meanfield::h;
use ism_core::model::ConstraintBudget;
use ism_core::monokinetic::{polar_residual, PolarField2D, PolarGrid, CORE_DENSITY_REL};
use ism_core::Vec3;
use serde_json::Value;

use crate::config::{parse_config, Model, ScenarioConfig};
use crate::error::CliError;
use crate::init::{field_params, init_library, Initial};
use crate::output::{read_csv, BIFURCATION_HEADER, CHAIN_HEADER, DIAGNOSTIC_HEADER, FIELD_1D_HEADER, FIELD_POLAR_HEADER, SNAPSHOT_HEADER};
use crate::scenario::{BIFURCATION, DIAGNOSTICS, FIELD, SNAPSHOTS};

/// Energy may rise by at most this much between snapshots of a
/// dissipative run.
pub const ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", if self.ok { "ok" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    fn push(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            ok,
            detail: detail.into(),
        });
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Verification(msg.into())
}

/// Loads `summary.json`, reparses its config echo and re-derives the
/// model's invariants from the CSV files next to it.
pub fn verify_summary(summary_path: &Path) -> Result<VerifyReport, CliError> {
    let text = fs::read_to_string(summary_path).map_err(|e| CliError::io(summary_path, e))?;
    let summary: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", summary_path.display())))?;
    let echo = summary["config"].as_str().ok_or_else(|| bad("summary has no config echo"))?;
    let config = parse_config(echo).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        bad(format!("config echo does not parse: {}", lines.join("; ")))
    })?;
    if summary["model"].as_str() != Some(config.model.name()) {
        return Err(bad("summary model differs from its config echo"));
    }
    let dir = summary_path.parent().unwrap_or(Path::new("."));
    let mut report = VerifyReport::default();
    match config.model {
        Model::Deterministic | Model::FreeSpace | Model::Stochastic => verify_particles(&config, &summary, dir, &mut report)?,
        Model::Monokinetic1d => verify_field(&config, &summary, dir, &mut report)?,
        Model::Polar2d => verify_polar(&config, &summary, dir, &mut report)?,
        Model::LineChain => verify_chain(&config, &summary, dir, &mut report)?,
        Model::EquilibriumScan => verify_scan(&summary, dir, &mut report)?,
    }
    Ok(report)
}

fn load(dir: &Path, name: &str, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let path = dir.join(name);
    let (found, rows) = read_csv(&path)?;
    if found != header {
        return Err(bad(format!("{}: header {found:?}, expected {header:?}", path.display())));
    }
    Ok(rows)
}

/// Splits rows on changes of the first column (time).
fn by_time(rows: &[Vec<f64>]) -> Vec<&[Vec<f64>]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i][0] != rows[start][0] {
            groups.push(&rows[start..i]);
            start = i;
        }
    }
    groups
}

fn v3(row: &[f64], at: usize) -> Vec3 {
    Vec3::new(row[at], row[at + 1], row[at + 2])
}

fn number(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn verify_particles(config: &ScenarioConfig, summary: &Value, dir: &Path, report: &mut VerifyReport) -> Result<(), CliError> {
    let params = config.params.as_ref().expect("particle config has params");
    let v = params.v;
    let n = params.n_agents.unwrap_or(0);
    let budget = ConstraintBudget::default();
    let snaps = load(dir, SNAPSHOTS, &SNAPSHOT_HEADER)?;
    let diags = load(dir, DIAGNOSTICS, &DIAGNOSTIC_HEADER)?;
    let groups = by_time(&snaps);
    if groups.len() != diags.len() || groups.iter().any(|g| g.len() != n) {
        return Err(bad(format!(
            "{} snapshot groups of sizes {:?} for {} diagnostic rows and N = {n}",
            groups.len(),
            groups.iter().map(|g| g.len()).collect::<Vec<_>>(),
            diags.len()
        )));
    }

    let alpha: Vec<f64> = groups[0].iter().map(|r| v3(r, 5).dot(v3(r, 8))).collect();
    let (mut speed, mut spin) = (0.0f64, 0.0f64);
    for g in &groups {
        for (r, al) in g.iter().zip(&alpha) {
            speed = speed.max((v3(r, 5).norm() - v).abs() / v);
            spin = spin.max((v3(r, 5).dot(v3(r, 8)) - al).abs() / (v * v));
        }
    }
    report.push(
        "speed constraint",
        speed <= budget.speed_rel,
        format!("max ||v_i| - v|/v = {speed:.3e} (budget {:.0e})", budget.speed_rel),
    );
    report.push(
        "spin constraint",
        spin <= budget.spin_rel,
        format!("max |v_i.s_i - alpha_i|/v^2 = {spin:.3e} (budget {:.0e})", budget.spin_rel),
    );

    let w_err = diags
        .iter()
        .map(|d| (v3(d, 4).norm() - d[3]).abs())
        .fold(0.0f64, f64::max);
    report.push("w_norm column", w_err <= 1e-12 * v, format!("max ||w| - w_norm| = {w_err:.3e}"));

    let dissipative = params.eta.unwrap_or(0.0) > 0.0 && params.nu.unwrap_or(0.0) == 0.0;
    if dissipative {
        let rise = diags.windows(2).map(|p| p[1][1] - p[0][1]).fold(0.0f64, f64::max);
        report.push(
            "energy nonincreasing",
            rise <= ENERGY_TOL,
            format!("largest rise between snapshots {rise:.3e} (tolerance {ENERGY_TOL:.0e})"),
        );
    }

    // Rebuild the diagnostic trajectory and classify it again.
    let mut traj = Trajectory::default();
    for (d, g) in diags.iter().zip(&groups) {
        let w = v3(d, 4);
        traj.snapshots.push(Diagnostics {
            time: d[0],
            energy: d[1],
            potential: d[2],
            w,
            w_norm: d[3],
            max_sigma: d[7],
            total_spin: v3(d, 8),
            alignment: g.iter().map(|r| cos_angle(v3(r, 5), w).unwrap_or(0.0)).collect(),
        });
    }
    let analysis = config.analysis.unwrap_or_default();
    let verdict = classify_asymptotic(&traj, analysis.window, analysis.tol).map_err(CliError::numerical)?;
    let tag = match verdict.verdict {
        Verdict::Flocking => "Flocking",
        Verdict::Aligned { .. } => "Aligned",
        Verdict::Incoherent => "Incoherent",
        Verdict::Undecided => "Undecided",
    };
    let claimed = summary["verdict"].as_str().unwrap_or("");
    report.push("verdict", tag == claimed, format!("recomputed {tag}, summary says {claimed}"));
    let w_inf = w_infinity(&traj, analysis.window).map_err(CliError::numerical)?;
    let claimed = number(&summary["w_infinity"]["estimate"]).unwrap_or(f64::NAN);
    report.push(
        "w_infinity",
        (w_inf.estimate - claimed).abs() <= 1e-12 * v,
        format!("recomputed {:.12e}, summary says {claimed:.12e}", w_inf.estimate),
    );
    Ok(())
}

fn verify_field(config: &ScenarioConfig, summary: &Value, dir: &Path, report: &mut VerifyReport) -> Result<(), CliError> {
    let init = config.init.as_ref().expect("field config has init");
    let v = field_params(config).v_speed;
    let dx = init.real("length") / init.count("cells") as f64;
    let rows = load(dir, FIELD, &FIELD_1D_HEADER)?;
    let groups = by_time(&rows);
    let mass = |g: &[Vec<f64>]| g.iter().map(|r| r[2]).sum::<f64>() * dx;
    let m0 = mass(groups[0]);
    let drift = groups.iter().map(|g| (mass(g) - m0).abs() / m0).fold(0.0f64, f64::max);
    report.push("mass conservation", drift <= 1e-12, format!("max relative mass drift {drift:.3e}"));
    let speed = rows.iter().map(|r| (v3(r, 3).norm() - v).abs() / v).fold(0.0f64, f64::max);
    report.push("|u| = v", speed <= 1e-12, format!("max ||u| - v|/v = {speed:.3e}"));
    let claimed = number(&summary["drifts"]["mass_rel_max"]).unwrap_or(f64::NAN);
    report.push(
        "summary mass drift",
        (claimed - drift).abs() <= 1e-15,
        format!("recomputed {drift:.3e}, summary says {claimed:.3e}"),
    );
    Ok(())
}

fn verify_polar(config: &ScenarioConfig, summary: &Value, dir: &Path, report: &mut VerifyReport) -> Result<(), CliError> {
    let init = config.init.as_ref().expect("polar config has init");
    let grid = PolarGrid {
        cells: init.count("cells"),
        length: init.real("length"),
    };
    let rows = load(dir, FIELD, &FIELD_POLAR_HEADER)?;
    if rows.len() != grid.cells * grid.cells {
        return Err(bad(format!("{} field rows for a {0}x{0} grid", grid.cells)));
    }
    let field = PolarField2D {
        grid,
        rho: rows.iter().map(|r| r[2]).collect(),
        theta: rows.iter().map(|r| r[3]).collect(),
        spin: rows.iter().map(|r| r[4]).collect(),
        params: field_params(config),
    };
    let residual = polar_residual(&field, CORE_DENSITY_REL).max_norm();
    let claimed = number(&summary["residual"]["max"]).unwrap_or(f64::NAN);
    report.push(
        "stationary residual",
        (residual - claimed).abs() <= 1e-12 * residual.max(1.0),
        format!("recomputed {residual:.6e}, summary says {claimed:.6e}"),
    );
    Ok(())
}

fn verify_chain(config: &ScenarioConfig, summary: &Value, dir: &Path, report: &mut VerifyReport) -> Result<(), CliError> {
    let Initial::Chain(mut curve) = init_library(config)? else {
        return Err(bad("line_chain config does not build a chain"));
    };
    let v = curve.chain.params.v_speed;
    let rows = load(dir, FIELD, &CHAIN_HEADER)?;
    let (mut speed, mut spin, mut deviation) = (0.0f64, 0.0f64, 0.0f64);
    for g in by_time(&rows) {
        if g.len() != curve.chain.len() {
            return Err(bad(format!("snapshot with {} samples, chain has {}", g.len(), curve.chain.len())));
        }
        for (i, r) in g.iter().enumerate() {
            curve.chain.x[i] = v3(r, 2);
            speed = speed.max((v3(r, 5).norm() - v).abs() / v);
            spin = spin.max(v3(r, 5).dot(v3(r, 8)).abs() / (v * v));
        }
        curve.chain.time = g[0][0];
        deviation = deviation.max(curve.deviation());
    }
    report.push("|v| = v", speed <= 1e-10, format!("max ||v| - v|/v = {speed:.3e}"));
    report.push("v.s = 0", spin <= 1e-8, format!("max |v.s|/v^2 = {spin:.3e}"));
    let claimed = number(&summary["deviation_max"]).unwrap_or(f64::NAN);
    report.push(
        "distance from the traveling curve",
        (deviation - claimed).abs() <= 1e-12 * deviation.max(1.0),
        format!("recomputed {deviation:.6e}, summary says {claimed:.6e}"),
    );
    Ok(())
}

fn verify_scan(summary: &Value, dir: &Path, report: &mut VerifyReport) -> Result<(), CliError> {
    let rows = load(dir, BIFURCATION, &BIFURCATION_HEADER)?;
    let onset = number(&summary["critical_beta_j"]).unwrap_or(f64::NAN);
    let monotone = rows.windows(2).all(|p| p[1][2] >= p[0][2]);
    report.push("gamma monotone", monotone, format!("{} scan points", rows.len()));
    let mut worst = 0.0f64;
    let mut phases_ok = true;
    for r in &rows {
        let (beta_j, xi, gamma) = (r[0], r[1], r[2]);
        if gamma == 0.0 {
            phases_ok &= xi == 0.0 && beta_j <= onset * (1.0 + 1e-8);
        } else {
            phases_ok &= beta_j >= onset * (1.0 - 1e-8);
            let hx = h(xi).map_err(CliError::numerical)?;
            worst = worst.max((xi - beta_j * hx).abs() / xi).max((gamma - hx).abs());
        }
    }
    report.push(
        "phase boundary",
        phases_ok,
        format!("gamma = 0 exactly when beta_J <= {onset:.9}"),
    );
    report.push("self-consistency", worst <= 1e-10, format!("max residual {worst:.3e}"));
    Ok(())
}
