use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use polargate::analysis::{cz_equivalent, thermal_phase_spread};
use polargate::{
    blockade_scan, build, dipole_dipole_rate, extract_gate, operations_budget, pi_phase_time, preset,
    preset_names, thermal_sigma_from_temperature, BuiltScheme, GateResult, Geometry, MonteCarloResult,
    MoleculeSpec, Scheme, ScanRow,
};

use crate::config::Scenario;
use crate::output::{json_string, num, write_file, Format, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Gate,
    BlockadeScan,
    Thermal,
    Presets,
}

impl Command {
    pub fn file_stem(self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Gate => "gate",
            Command::BlockadeScan => "scan",
            Command::Thermal => "thermal",
            Command::Presets => "presets",
        }
    }
}

pub const ESTIMATE_HEADER: &[&str] = &["rate_rad_s", "tau_pi_s", "ops_budget"];
pub const GATE_HEADER: &[&str] =
    &["phi00", "phi01", "phi10", "phi11", "chi", "leakage_max", "success_prob", "bell_fidelity"];
pub const SCAN_HEADER: &[&str] = &["ratio", "infidelity", "leakage"];
pub const THERMAL_HEADER: &[&str] = &["samples", "phase_mean", "phase_std", "relative_spread", "seed"];
pub const PRESETS_HEADER: &[&str] = &["name", "species", "mass_kg", "coherence_time_s"];

/// Facts about the run that are not part of the numeric result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub scheme: Scheme,
    pub molecules: [String; 2],
    pub geometry: Geometry,
    pub seed: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub rate_rad_s: f64,
    pub tau_pi_s: f64,
    pub ops_budget: u64,
    pub coherence_time_s: f64,
    pub dipole_a: f64,
    pub dipole_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDocument {
    pub gate: GateResult,
    pub cz_equivalent: bool,
    pub cz_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDocument {
    pub rows: Vec<ScanRow>,
    pub log_log_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalDocument {
    pub sep_sigma_m: f64,
    pub monte_carlo: MonteCarloResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Estimate(EstimateResult),
    Gate(GateDocument),
    Scan(ScanDocument),
    Thermal(ThermalDocument),
    Presets(Vec<MoleculeSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
    pub result: Payload,
}

/// Everything a command produced. `summary` is for humans (stderr).
#[derive(Debug, Clone)]
pub struct Report {
    pub command: Command,
    pub table: Table,
    pub document: Document,
    pub summary: Vec<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => json_string(&self.document),
        }
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &std::path::Path) -> Result<(), CliError> {
        let stem = self.command.file_stem();
        write_file(dir, &format!("{stem}.csv"), &self.table.to_csv())?;
        write_file(dir, &format!("{stem}.json"), &json_string(&self.document))
    }
}

/// Runs `command`. `scenario` may be `None` only for [`Command::Presets`].
pub fn run(command: Command, scenario: Option<&Scenario>, seed: Option<u64>) -> Result<Report, CliError> {
    if command == Command::Presets {
        return presets();
    }
    let sc = scenario.ok_or_else(|| CliError::Config(format!("`{}` needs --config", command.file_stem())))?;
    let seed = seed.unwrap_or(sc.config.seed);
    match command {
        Command::Estimate => estimate(sc, seed),
        Command::Gate => gate(sc, seed),
        Command::BlockadeScan => scan(sc, seed),
        Command::Thermal => thermal(sc, seed),
        Command::Presets => unreachable!(),
    }
}

/// Output directory: the command line wins over the config file.
pub fn output_dir(cli: Option<PathBuf>, scenario: Option<&Scenario>) -> Option<PathBuf> {
    cli.or_else(|| scenario.and_then(|s| s.config.output.as_ref().map(|o| o.dir.clone())))
}

fn metadata(sc: &Scenario, seed: u64, warnings: Vec<String>) -> Metadata {
    let sys = &sc.params.system;
    Metadata {
        scheme: sc.params.scheme,
        molecules: [sys.a.name.clone(), sys.b.name.clone()],
        geometry: sys.geometry,
        seed,
        warnings,
    }
}

fn document(command: Command, meta: Metadata, result: Payload) -> Document {
    Document { command: command.file_stem().to_string(), metadata: Some(meta), result }
}

fn warning_lines(built: &BuiltScheme) -> Vec<String> {
    built.warnings.iter().map(|w| w.to_string()).collect()
}

fn estimate(sc: &Scenario, seed: u64) -> Result<Report, CliError> {
    let p = &sc.params;
    let sys = &p.system;
    let (dipole_a, dipole_b, rate, warnings) = if p.scheme == Scheme::Blockade {
        let (da, db) = p.excited_dipoles()?;
        (da, db, dipole_dipole_rate(da, db, &sys.geometry), Vec::new())
    } else {
        let built = build(p)?;
        let w = built.interaction;
        (w.dipole_a, w.dipole_b, w.rate, warning_lines(&built))
    };
    let tau = pi_phase_time(rate, p.rho_e_target)?;
    let coherence = sc.config.analysis.coherence_time.unwrap_or(sys.a.coherence_time.min(sys.b.coherence_time));
    let ops = operations_budget(coherence, tau)?;
    let res = EstimateResult {
        rate_rad_s: rate,
        tau_pi_s: tau,
        ops_budget: ops,
        coherence_time_s: coherence,
        dipole_a,
        dipole_b,
    };
    let mut table = Table::new(ESTIMATE_HEADER);
    table.push(vec![num(rate), num(tau), ops.to_string()]);
    let mut summary = vec![format!("rate = {rate} rad/s, tau_pi = {tau} s, ops_budget = {ops}")];
    summary.extend(warnings.iter().cloned());
    Ok(Report {
        command: Command::Estimate,
        table,
        document: document(Command::Estimate, metadata(sc, seed, warnings), Payload::Estimate(res)),
        summary,
    })
}

fn gate(sc: &Scenario, seed: u64) -> Result<Report, CliError> {
    let built = build(&sc.params)?;
    let g = extract_gate(&built.schedule, &built.system, &sc.config.propagation)?;
    let tol = sc.config.analysis.cz_tolerance;
    let cz = cz_equivalent(&g, tol);
    let mut table = Table::new(GATE_HEADER);
    let mut row: Vec<String> = g.phases.iter().map(|&x| num(x)).collect();
    row.extend([
        num(g.entangling_phase_chi),
        num(g.leakage_max()),
        num(g.success_probability),
        num(g.bell_fidelity),
    ]);
    table.push(row);
    let warnings = warning_lines(&built);
    let mut summary = vec![format!(
        "chi = {} rad, cz_equivalent = {cz} (tol {tol}), bell_fidelity = {}",
        g.entangling_phase_chi, g.bell_fidelity
    )];
    summary.extend(warnings.iter().cloned());
    let doc = GateDocument { gate: g, cz_equivalent: cz, cz_tolerance: tol };
    Ok(Report {
        command: Command::Gate,
        table,
        document: document(Command::Gate, metadata(sc, seed, warnings), Payload::Gate(doc)),
        summary,
    })
}

fn scan(sc: &Scenario, seed: u64) -> Result<Report, CliError> {
    let ratios = &sc
        .config
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("blockade-scan needs a `scan` section".into()))?
        .ratios;
    let res = blockade_scan(&sc.params, ratios, &sc.config.propagation)?;
    let mut table = Table::new(SCAN_HEADER);
    for r in &res.rows {
        table.push(vec![num(r.ratio), num(r.infidelity), num(r.leakage)]);
    }
    let mut warnings: Vec<String> = Vec::new();
    for w in res.warnings.iter().map(|w| w.to_string()) {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    let slope = res.log_log_slope();
    let mut summary = vec![match slope {
        Some(s) => format!("{} ratios, log-log slope of infidelity = {s}", res.rows.len()),
        None => format!("{} ratios", res.rows.len()),
    }];
    summary.extend(warnings.iter().cloned());
    let doc = ScanDocument { rows: res.rows, log_log_slope: slope };
    Ok(Report {
        command: Command::BlockadeScan,
        table,
        document: document(Command::BlockadeScan, metadata(sc, seed, warnings), Payload::Scan(doc)),
        summary,
    })
}

fn thermal(sc: &Scenario, seed: u64) -> Result<Report, CliError> {
    let th = sc
        .config
        .thermal
        .as_ref()
        .ok_or_else(|| CliError::Config("thermal needs a `thermal` section".into()))?;
    let sys = &sc.params.system;
    let sigma = match (th.sep_sigma, th.sep_sigma_rel, th.temperature, th.trap_omega) {
        (Some(s), _, _, _) => s,
        (_, Some(rel), _, _) => rel * sys.geometry.r,
        (_, _, Some(t), Some(w)) => thermal_sigma_from_temperature(t, sys.a.mass, w)?.separation,
        _ => return Err(CliError::Config("thermal spread is not specified".into())),
    };
    let built = build(&sc.params)?;
    let mc = thermal_phase_spread(&built, sigma, th.samples, seed)?;
    let mut table = Table::new(THERMAL_HEADER);
    table.push(vec![
        mc.samples.to_string(),
        num(mc.phase_mean),
        num(mc.phase_std),
        num(mc.relative_spread),
        mc.seed.to_string(),
    ]);
    let warnings = warning_lines(&built);
    let mut summary = vec![format!(
        "sigma_r = {sigma} m: phase {} +/- {} rad (relative {})",
        mc.phase_mean, mc.phase_std, mc.relative_spread
    )];
    summary.extend(warnings.iter().cloned());
    let doc = ThermalDocument { sep_sigma_m: sigma, monte_carlo: mc };
    Ok(Report {
        command: Command::Thermal,
        table,
        document: document(Command::Thermal, metadata(sc, seed, warnings), Payload::Thermal(doc)),
        summary,
    })
}

fn presets() -> Result<Report, CliError> {
    let mut table = Table::new(PRESETS_HEADER);
    let mut specs = Vec::new();
    for name in preset_names() {
        let m = preset(name)?;
        table.push(vec![name.to_string(), m.name.clone(), num(m.mass), num(m.coherence_time)]);
        specs.push(m);
    }
    Ok(Report {
        command: Command::Presets,
        table,
        document: Document { command: "presets".into(), metadata: None, result: Payload::Presets(specs) },
        summary: Vec::new(),
    })
}
