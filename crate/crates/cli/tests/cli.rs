use std::path::Path;
use std::process::{Command, Output};

use polargate_cli::commands::{Document, Payload};

fn polargate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polargate")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_row(o: &Output) -> Vec<f64> {
    let s = stdout(o);
    let line = s.lines().nth(1).expect("one data row");
    line.split(',').map(|x| x.parse().unwrap()).collect()
}

const NACL_WIRE: &str = r#"{
    "molecules": {"a": "NaCl"},
    "geometry": {"architecture": "wire", "r": 1e-5, "h": 1e-7},
    "scheme": {"kind": "rotational"}
}"#;

const CO_DIRECT: &str = r#"{
    "molecules": {"a": "CO"},
    "geometry": {"architecture": "lattice", "r": 1e-6, "theta": 0.0},
    "scheme": {"kind": "direct"}
}"#;

fn blockade(ratio: f64) -> String {
    format!(
        r#"{{
        "molecules": {{"a": "CO"}},
        "geometry": {{"architecture": "lattice", "r": 1e-6, "theta": 0.0}},
        "scheme": {{"kind": "blockade", "pulse_rabi": 1e5, "blockade_ratio": {ratio}}},
        "analysis": {{"cz_tolerance": 0.05}}
    }}"#
    )
}

#[test]
fn estimate_nacl_wire() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", NACL_WIRE);
    let o = polargate(&["--config", &cfg, "estimate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("rate_rad_s,tau_pi_s,ops_budget\n"));
    let row = csv_row(&o);
    assert!((row[1] - 3.313e-6).abs() < 0.001e-6, "tau = {}", row[1]);
    assert_eq!(row[2], 301838.0);
}

#[test]
fn estimate_co() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CO_DIRECT);
    let row = csv_row(&polargate(&["--config", &cfg, "estimate"]));
    assert!((row[1] - 7.36e-4).abs() < 0.01e-4, "tau = {}", row[1]);
    assert_eq!(row[2], 1358.0);
}

#[test]
fn magic_angle_is_a_physics_error() {
    let dir = tempfile::tempdir().unwrap();
    let src = CO_DIRECT.replace(r#""theta": 0.0"#, r#""theta": 0.9553166181245093"#);
    let cfg = write_config(dir.path(), "c.json", &src);
    let o = polargate(&["--config", &cfg, "estimate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let src = CO_DIRECT.replace(r#""kind": "direct""#, r#""kind": "direct", "rabbi": 1.0"#);
    let cfg = write_config(dir.path(), "c.json", &src);
    let o = polargate(&["--config", &cfg, "gate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rabbi"), "{}", stderr(&o));
}

#[test]
fn missing_config_and_bad_flags() {
    assert_eq!(polargate(&["gate"]).status.code(), Some(1));
    assert_eq!(polargate(&["--format", "xml", "presets"]).status.code(), Some(1));
    assert_eq!(polargate(&["--config", "/nonexistent.json", "gate"]).status.code(), Some(1));
}

#[test]
fn rotational_restriction_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &CO_DIRECT.replace("direct", "rotational"));
    assert_eq!(polargate(&["--config", &cfg, "gate"]).status.code(), Some(2));
}

#[test]
fn direct_gate_is_cz() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CO_DIRECT);
    let o = polargate(&["--config", &cfg, "gate"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("phi00,phi01,phi10,phi11,chi,leakage_max,success_prob,bell_fidelity\n"));
    let row = csv_row(&o);
    assert!((row[3] - std::f64::consts::PI).abs() < 1e-5);
    assert!(stderr(&o).contains("cz_equivalent = true"));
}

#[test]
fn blockade_verdict_and_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b100.json", &blockade(100.0));
    let o = polargate(&["--config", &cfg, "--format", "json", "gate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Document = serde_json::from_str(&stdout(&o)).unwrap();
    let Payload::Gate(g) = doc.result else { panic!("not a gate document") };
    assert!(g.cz_equivalent);
    assert!(doc.metadata.unwrap().warnings.is_empty());

    let cfg = write_config(dir.path(), "b1.json", &blockade(1.0));
    let o = polargate(&["--config", &cfg, "--format", "json", "gate"]);
    assert!(o.status.success());
    let doc: Document = serde_json::from_str(&stdout(&o)).unwrap();
    let w = doc.metadata.unwrap().warnings;
    assert_eq!(w.len(), 1);
    assert!(w[0].starts_with("BlockadeRegimeWarning"));
    assert!(stderr(&o).contains("BlockadeRegimeWarning"));
}

#[test]
fn blockade_scan_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let src = blockade(100.0).replace(
        r#""analysis""#,
        r#""scan": {"ratios": [10, 30, 100, 300]}, "analysis""#,
    );
    let cfg = write_config(dir.path(), "c.json", &src);
    let out = dir.path().join("out");
    let o = polargate(&["--config", &cfg, "--out", out.to_str().unwrap(), "blockade-scan"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("scan.csv")).unwrap();
    assert_eq!(csv, stdout(&o));
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(csv.lines().next().unwrap(), "ratio,infidelity,leakage");
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]), "{csv}");
}

fn thermal_config(sigma: &str) -> String {
    CO_DIRECT.replace(
        r#""scheme": {"kind": "direct"}"#,
        &format!(r#""scheme": {{"kind": "direct"}}, "thermal": {{{sigma}, "samples": 2000}}, "seed": 7"#),
    )
}

#[test]
fn thermal_zero_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &thermal_config(r#""sep_sigma": 0.0"#));
    let o = polargate(&["--config", &cfg, "thermal"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("samples,phase_mean,phase_std,relative_spread,seed\n"));
    let row = csv_row(&o);
    assert_eq!(row[0], 2000.0);
    assert!((row[1] - std::f64::consts::PI).abs() < 1e-9);
    assert_eq!(row[2], 0.0);
    assert_eq!(row[4], 7.0);
}

#[test]
fn thermal_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &thermal_config(r#""sep_sigma_rel": 0.01"#));
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = polargate(&["--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap(), "thermal"]);
        assert!(o.status.success(), "{}", stderr(&o));
        (std::fs::read(out.join("thermal.csv")).unwrap(), std::fs::read(out.join("thermal.json")).unwrap())
    };
    let a = run("a", "11");
    let b = run("b", "11");
    let c = run("c", "12");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
    let row: Vec<f64> =
        String::from_utf8(a.0).unwrap().lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[3] - 0.03).abs() < 0.005, "relative spread {}", row[3]);
}

#[test]
fn json_document_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &blockade(30.0));
    let out = dir.path().join("out");
    let o = polargate(&["--config", &cfg, "--out", out.to_str().unwrap(), "gate"]);
    assert!(o.status.success());
    let json = std::fs::read_to_string(out.join("gate.json")).unwrap();
    let doc: Document = serde_json::from_str(&json).unwrap();
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", json);
    let Payload::Gate(g) = &doc.result else { panic!() };
    let row: Vec<f64> = std::fs::read_to_string(out.join("gate.csv"))
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    let g = &g.gate;
    let expect = [
        g.phases[0],
        g.phases[1],
        g.phases[2],
        g.phases[3],
        g.entangling_phase_chi,
        g.leakage_max(),
        g.success_probability,
        g.bell_fidelity,
    ];
    for (a, b) in row.iter().zip(expect) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn output_dir_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cfg_out");
    let src = CO_DIRECT.replace(
        r#""scheme": {"kind": "direct"}"#,
        &format!(r#""scheme": {{"kind": "direct"}}, "output": {{"dir": {:?}}}"#, out.to_str().unwrap()),
    );
    let cfg = write_config(dir.path(), "c.json", &src);
    assert!(polargate(&["--config", &cfg, "estimate"]).status.success());
    assert!(out.join("estimate.csv").exists() && out.join("estimate.json").exists());
}

#[test]
fn presets_listing() {
    let o = polargate(&["--format", "json", "presets"]);
    assert!(o.status.success());
    let doc: Document = serde_json::from_str(&stdout(&o)).unwrap();
    let Payload::Presets(specs) = doc.result else { panic!() };
    assert_eq!(specs.len(), 4);
}
