use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ism::config::parse_config;
use ism::init::{init_library, Initial};
use ism::{run_scenario, verify_summary};
use ism_core::Vec3;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn ism(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ism"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("ISM_THREADS", n),
        None => cmd.env_remove("ISM_THREADS"),
    };
    cmd.output().unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

const STOCHASTIC: &str = "model = stochastic\n[params]\nN = 40\neta = 1\nnu = 0.3\n[kernel]\ntype = distance\nprofile = smooth_bump\nradius = 2\nq = 0\n[integration]\ndt = 0.01\nt_end = 1\nstride = 10\nseed = 99\n[init]\nname = uniform_sphere\nbox = 1.5\n";

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("s.ini");
    fs::write(&cfg, STOCHASTIC).unwrap();
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, threads) in dirs.iter().zip([None, Some("1"), Some("3")]) {
        let out = ism(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()], threads);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["snapshots.csv", "diagnostics.csv", "summary.json"] {
        let first = read(&dirs[0], name);
        assert!(!first.is_empty());
        for d in &dirs[1..] {
            assert!(first == read(d, name), "{name} differs in {}", d.display());
        }
    }
}

#[test]
fn csv_files_are_self_describing_and_locale_free() {
    let tmp = tempfile::tempdir().unwrap();
    let c = parse_config(STOCHASTIC).unwrap();
    run_scenario(&c, tmp.path()).unwrap();
    let text = String::from_utf8(read(tmp.path(), "snapshots.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,agent_id,x1,x2,x3,v1,v2,v3,s1,s2,s3"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0.0000000000000000e0");
    assert_eq!(first[1], "0");
    // 17 significant digits: one before the point, sixteen after.
    let mantissa = first[2].trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.len(), 18);
    let diag = String::from_utf8(read(tmp.path(), "diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,E,U,w_norm,w1,w2,w3,max_sigma,spin1,spin2,spin3\n"));
    // 11 snapshots of 40 agents.
    assert_eq!(text.lines().count(), 1 + 11 * 40);
}

#[test]
fn free_space_run_below_threshold_flocks() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("free_space_flocking.ini")).unwrap();
    let c = parse_config(&text).unwrap();
    let report = run_scenario(&c, tmp.path()).unwrap();
    let s = &report.summary;
    assert_eq!(s["thresholds"]["below_flocking"], true);
    assert_eq!(s["verdict"], "Flocking");
    assert!((s["w_infinity"]["estimate"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let v = verify_summary(&tmp.path().join("summary.json")).unwrap();
    assert!(v.passed(), "{:?}", v.checks);
}

#[test]
fn equilibrium_scan_is_monotone_and_vanishes_below_onset() {
    let tmp = tempfile::tempdir().unwrap();
    let c = parse_config("model = equilibrium_scan\n[scan]\nmin = 0.5\nmax = 10\nsteps = 20\n").unwrap();
    run_scenario(&c, tmp.path()).unwrap();
    let text = String::from_utf8(read(tmp.path(), "bifurcation.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    assert_eq!((rows[0][0], rows[19][0]), (0.5, 10.0));
    for pair in rows.windows(2) {
        assert!(pair[1][2] >= pair[0][2]);
    }
    for r in &rows {
        assert_eq!(r[2] == 0.0, r[0] <= 3.0, "beta_J = {}", r[0]);
    }
}

#[test]
fn every_shipped_scenario_runs_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let mut names: Vec<_> = fs::read_dir(scenario("")).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for path in names {
        let c = parse_config(&fs::read_to_string(&path).unwrap()).unwrap();
        let dir = tmp.path().join(path.file_stem().unwrap());
        run_scenario(&c, &dir).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let v = verify_summary(&dir.join("summary.json")).unwrap();
        assert!(v.passed(), "{}: {:?}", path.display(), v.checks);
    }
}

#[test]
fn verify_detects_tampered_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = parse_config(&fs::read_to_string(scenario("free_space_flocking.ini")).unwrap()).unwrap();
    run_scenario(&c, tmp.path()).unwrap();
    let path = tmp.path().join("snapshots.csv");
    let text = fs::read_to_string(&path).unwrap();
    // Stretch one velocity component of agent 0 in the last snapshot.
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.len() - 50;
    let mut fields: Vec<String> = lines[last].split(',').map(str::to_string).collect();
    let vx: f64 = fields[5].parse().unwrap();
    fields[5] = format!("{:.16e}", vx + 1e-6);
    lines[last] = fields.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let v = verify_summary(&tmp.path().join("summary.json")).unwrap();
    assert!(!v.passed());
    assert!(v.checks.iter().any(|c| c.name == "speed constraint" && !c.ok));

    let out = ism(&["verify", tmp.path().join("summary.json").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn initializers_match_their_contracts() {
    let base = "model = deterministic\n[params]\nN = 400\nv = 2\n[kernel]\ntype = constant\n[integration]\nt_end = 0\nseed = 3\n";
    let c = parse_config(&format!("{base}[init]\nname = aligned_perturbed\naxis = 1, 1, 0\n")).unwrap();
    let Initial::Ensemble(ens) = init_library(&c).unwrap() else { panic!() };
    let axis = Vec3::new(1.0, 1.0, 0.0).normalized().unwrap() * 2.0;
    assert!(ens.agents.iter().all(|a| (a.v - axis).max_abs() < 1e-15 && a.s == Vec3::ZERO));

    // E|w|² = v²/N for independent uniform directions.
    let c = parse_config(&format!("{base}[init]\nname = uniform_sphere\n")).unwrap();
    let Initial::Ensemble(ens) = init_library(&c).unwrap() else { panic!() };
    let w = ens.mean_velocity().norm();
    assert!(w < 4.0 * 2.0 / 20.0, "{w}");

    let c = parse_config("model = line_chain\n[params]\nv = 0.7\n[kernel]\ntype = distance\n[integration]\nt_end = 0\n[init]\nname = circle_chain\nradius = 2\nsamples = 64\n").unwrap();
    let Initial::Chain(curve) = init_library(&c).unwrap() else { panic!() };
    for (v, s) in curve.chain.v.iter().zip(&curve.chain.s) {
        assert!((v.norm() - 0.7).abs() < 1e-15);
        assert!(v.dot(*s).abs() < 1e-15);
    }
}

#[test]
fn exit_codes_distinguish_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.ini");
    fs::write(&bad, "model = deterministic\n[params]\nN = 0\n").unwrap();
    let out = ism(&["run", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3: `N` = 0 out of range"), "{err}");

    // Agents fly apart until one has nobody within range.
    let lonely = tmp.path().join("lonely.ini");
    fs::write(
        &lonely,
        "model = deterministic\n[params]\nN = 20\n[kernel]\ntype = distance\nprofile = indicator\nradius = 0.3\nq = 0.5\n[integration]\nt_end = 5\n[init]\nname = uniform_sphere\nbox = 0.2\n",
    )
    .unwrap();
    let out = ism(&["run", lonely.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = ism(&["run", tmp.path().join("missing.ini").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));

    let out = ism(&["run", bad.to_str().unwrap()], Some("zero"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_bifurcation_prints_csv() {
    let out = ism(&["scan-bifurcation", "--min", "1", "--max", "5", "--steps", "5"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "beta_J,xi,gamma");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"));
    let last: Vec<f64> = lines[5].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 5.0);
    assert!(last[2] > 0.0 && last[2] < 1.0);
}

#[test]
fn check_expansion_reports_errors_and_slope() {
    let out = ism(&["check-expansion", "--kind", "line", "--eps-list", "0.2,0.1,0.05"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,exact,asymptotic,rel_error");
    assert_eq!(lines.len(), 4);
    let stderr = String::from_utf8(out.stderr).unwrap();
    let slope: f64 = stderr.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{stderr}");

    let out = ism(&["check-expansion", "--kind", "space", "--eps-list", "0.1,-1"], None);
    assert_eq!(out.status.code(), Some(2));
}
