use std::path::Path;
use std::process::Command;

use mweyl::contour::build_contour;
use mweyl::inverse::{default_tail_points, invert, model_weyl, WeylData};
use mweyl::linalg::{self, cr};
use mweyl_cli::config::Mode;
use mweyl_cli::files::{read_weyl_csv, sha256_hex, weyl_csv};
use mweyl_cli::{run, RunConfig};

const SMALL_CONTOUR: &str = r#""contour": {"r0": 2.0, "r_max": 50.0, "n_circle": 32, "n_cut": 33}"#;

fn config(mode: Mode, body: &str) -> RunConfig {
    let mut cfg = RunConfig::from_json(body).unwrap();
    cfg.mode = Some(mode);
    cfg
}

fn box_config(mode: Mode) -> RunConfig {
    config(
        mode,
        &format!(
            r#"{{
                "problem": {{
                    "potential": {{"kind": "box", "heights": [0.3], "width": 1.0}},
                    "boundary": {{"kind": "projector", "a": [[1]], "h": [[0]]}},
                    "nodes": 401
                }},
                {SMALL_CONTOUR},
                "x_grid": {{"x_max": 1.0, "panels": 20}}
            }}"#
        ),
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mweyl"))
}

#[test]
fn zero_problem_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        Mode::Roundtrip,
        &format!(
            r#"{{
                "problem": {{
                    "potential": {{"kind": "box", "heights": [0.0, 0.0], "width": 1.0}},
                    "boundary": {{"kind": "projector", "a": [[1, 0], [0, 0]], "h": [[0, 0], [0, 0]]}},
                    "nodes": 201
                }},
                {SMALL_CONTOUR},
                "x_grid": {{"x_max": 1.0, "panels": 20}}
            }}"#
        ),
    );
    let report = run(&cfg, dir.path()).unwrap();
    let err = report.errors.unwrap();
    assert!(err.q_l1 <= 1e-10 && err.h <= 1e-10 && err.a <= 1e-10, "{err:?}");
    assert!(err.q_relative_l1.is_none());
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn forward_emits_every_node_and_is_deterministic() {
    let cfg = box_config(Mode::Forward);
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let r1 = run(&cfg, first.path()).unwrap();
    let r2 = run(&cfg, second.path()).unwrap();

    let k = build_contour(2.0, 50.0, 2e-3, 32, 33).unwrap().len();
    assert_eq!(r1.forward.as_ref().unwrap().contour_nodes, k);
    let a = std::fs::read(first.path().join("weyl.csv")).unwrap();
    let b = std::fs::read(second.path().join("weyl.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(r1.files[0].sha256, sha256_hex(&a));
    assert_eq!(r1.files[0].sha256, r2.files[0].sha256);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "segment,re_rho,im_rho,weight_re,weight_im,m_0_0_re,m_0_0_im");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), k + 8);
    assert_eq!(rows.iter().filter(|r| r.starts_with("tail,")).count(), 8);
}

#[test]
fn file_based_inversion_matches_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trip = run(&box_config(Mode::Roundtrip), dir.path()).unwrap();
    let from_trip = std::fs::read(dir.path().join("potential.csv")).unwrap();

    let mut inv = box_config(Mode::Invert);
    inv.problem = None;
    inv.weyl_file = Some(dir.path().join("weyl.csv"));
    let out = dir.path().join("inv");
    let report = run(&inv, &out).unwrap();
    assert_eq!(std::fs::read(out.join("potential.csv")).unwrap(), from_trip);

    // report diagnostics are the library values, not recomputations
    let weyl = read_weyl_csv(&dir.path().join("weyl.csv"), inv.contour.build().unwrap()).unwrap();
    let lib = invert(&weyl, &inv.invert_config().unwrap()).unwrap();
    let d = report.inversion.unwrap();
    assert_eq!(d.main_residual, lib.main_residual);
    assert_eq!(d.offgrid_residual, lib.offgrid_residual);
    assert_eq!(d.max_cond, lib.max_cond);
    assert_eq!(d.extraction_residual, lib.extraction.residual);
    assert_eq!(trip.inversion.unwrap().probe_spread, d.probe_spread);
}

#[test]
fn validate_bc_identity_unitary_is_neumann() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        Mode::ValidateBc,
        r#"{"problem": {
            "potential": {"kind": "box", "heights": [0, 0], "width": 1},
            "boundary": {"kind": "unitary", "u": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}
        }}"#,
    );
    let bc = run(&cfg, dir.path()).unwrap().boundary.unwrap();
    let value = |m: &Vec<Vec<mweyl_cli::config::Number>>, i: usize, j: usize| m[i][j].value();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(value(&bc.a, i, j), cr(if i == j { 1.0 } else { 0.0 }));
            assert_eq!(value(&bc.h, i, j), cr(0.0));
        }
    }
    assert!(bc.unitary_mismatch.unwrap() < 1e-12);
    assert_eq!(bc.selfadjoint, Some(true));
}

#[test]
fn random_potential_follows_seed() {
    let body = format!(
        r#"{{
            "problem": {{
                "potential": {{"kind": "random", "dim": 2, "amplitude": 0.5}},
                "boundary": {{"kind": "delta", "n": 2, "a": 1.0}},
                "nodes": 101
            }},
            {SMALL_CONTOUR}
        }}"#
    );
    let mut cfg = config(Mode::Forward, &body);
    cfg.seed = Some(1);
    let q1 = cfg.problem().unwrap();
    let q1_again = cfg.problem().unwrap();
    cfg.seed = Some(2);
    let q2 = cfg.problem().unwrap();
    assert_eq!(q1, q1_again);
    assert_ne!(q1.potential(), q2.potential());
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, r#"{"problem": 3}"#);
    let status = bin().args(["forward", "--config"]).arg(&bad).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    write(&missing, &format!(r#"{{"weyl_file": "nowhere.csv", {SMALL_CONTOUR}}}"#));
    let status = bin().args(["invert", "--config"]).arg(&missing).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(4));

    // tail data whose limit has eigenvalue 1/2: the rank of A is ambiguous
    let contour = build_contour(2.0, 50.0, 2e-3, 32, 33).unwrap();
    let a = linalg::identity(1);
    let m = contour.nodes().iter().map(|nd| model_weyl(&a, nd.point)).collect();
    let tail = default_tail_points(8).into_iter().map(|p| (p, linalg::identity(1) * (p.i_rho() * -0.5))).collect();
    let weyl = WeylData::new(contour, m, tail).unwrap();
    write(&dir.path().join("ambiguous.csv"), &String::from_utf8(weyl_csv(&weyl).unwrap()).unwrap());
    let cfg = dir.path().join("ambiguous.json");
    write(&cfg, &format!(r#"{{"weyl_file": "ambiguous.csv", {SMALL_CONTOUR}}}"#));
    let output = bin().args(["invert", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("extract_A"));
    assert!(output.stdout.is_empty());
}
