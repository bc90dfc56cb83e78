//! Batch front end: run configuration (flat key=value text with
//! section headers), experiment orchestration, deterministic CSV/JSON
//! persistence, and the subcommand dispatcher used by the `rydsim`
//! binary.
//!
//! Determinism contract: trajectory RNG streams depend only on the
//! master seed and the trajectory id, and aggregation is ordered by
//! trajectory id, so identical config + seed produce byte-identical
//! CSV files for any worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gates::ErrorModel;
use crate::gauge::{adiabatic_ramp, cool_gauge, GaugeModel, GaugeStart};
use crate::lattice::{build_cubic, build_toric};
use crate::rydphys;
use crate::toric::{cool_toric, effective_temperature, Engine, ToricModel};
use crate::verify;

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "RYDSIM_WORKERS";

pub const CSV_SCHEMA: &str = "# schema=1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ToricCool,
    GaugeCool,
    GaugeRamp,
    Verify,
    RydParams,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::ToricCool => "toric-cool",
            Experiment::GaugeCool => "gauge-cool",
            Experiment::GaugeRamp => "gauge-ramp",
            Experiment::Verify => "verify",
            Experiment::RydParams => "ryd-params",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "toric-cool" => Ok(Experiment::ToricCool),
            "gauge-cool" => Ok(Experiment::GaugeCool),
            "gauge-ramp" => Ok(Experiment::GaugeRamp),
            "verify" => Ok(Experiment::Verify),
            "ryd-params" => Ok(Experiment::RydParams),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToricConfig {
    pub l: usize,
    pub sweeps: usize,
    pub trajectories: usize,
    pub engine: Engine,
    pub theta: f64,
    pub e0: f64,
    /// Gate errors on/off; magnitude |Q| applies when on.
    pub errors: bool,
    pub q_magnitude: f64,
    pub p_heat: f64,
    /// Physical sweep duration used for the time_s column.
    pub tau_s: f64,
}

impl Default for ToricConfig {
    fn default() -> Self {
        Self {
            l: 2,
            sweeps: 30,
            trajectories: 1000,
            engine: Engine::Dense,
            theta: std::f64::consts::FRAC_PI_2,
            e0: 1.0,
            errors: false,
            q_magnitude: 0.1,
            p_heat: 0.0,
            tau_s: 2e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeConfig {
    pub lx: usize,
    pub ly: usize,
    pub lz: usize,
    pub sweeps: usize,
    pub trajectories: usize,
    pub theta: f64,
    pub u: f64,
    pub j: f64,
    pub v: f64,
    pub constraint_warmup: usize,
    /// "all-down", "covering" (reference flippable covering), or a
    /// basis label integer.
    pub start: String,
    pub tau_s: f64,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        Self {
            lx: 2,
            ly: 2,
            lz: 1,
            sweeps: 80,
            trajectories: 200,
            theta: std::f64::consts::FRAC_PI_2,
            u: 1.0,
            j: 1.0,
            v: 1.0,
            constraint_warmup: 0,
            start: "all-down".into(),
            tau_s: 2e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RampConfig {
    pub phi_scales: Vec<f64>,
    pub steps: usize,
}

impl Default for RampConfig {
    fn default() -> Self {
        Self {
            phi_scales: vec![0.2, 0.1, 0.05],
            steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RydConfig {
    pub omega_p: f64,
    pub omega_c: f64,
    pub delta: f64,
    /// Van der Waals coefficient; optional because no atomic database
    /// ships with the crate.
    pub c6: Option<f64>,
    pub tau_s: f64,
    pub z: usize,
    pub gates_per_term: usize,
}

impl Default for RydConfig {
    fn default() -> Self {
        Self {
            omega_p: std::f64::consts::TAU * 100e6,
            omega_c: std::f64::consts::TAU * 30e6,
            delta: std::f64::consts::TAU * 1.2e9,
            c6: None,
            tau_s: 2e-6,
            z: 4,
            gates_per_term: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// 0 = use all available cores (or the environment default).
    pub workers: usize,
    pub out_dir: PathBuf,
    pub toric: ToricConfig,
    pub gauge: GaugeConfig,
    pub ramp: RampConfig,
    pub ryd: RydConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::ToricCool,
            seed: 1,
            workers: 0,
            out_dir: PathBuf::from("out"),
            toric: ToricConfig::default(),
            gauge: GaugeConfig::default(),
            ramp: RampConfig::default(),
            ryd: RydConfig::default(),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // shortest lossless decimal form
    format!("{v:?}")
}

impl RunConfig {
    /// Flat key=value form with section headers; `parse` inverts it
    /// losslessly.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "experiment = {}", self.experiment.as_str());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "out = {}", self.out_dir.display());
        let t = &self.toric;
        let _ = writeln!(s, "\n[toric]");
        let _ = writeln!(s, "l = {}", t.l);
        let _ = writeln!(s, "sweeps = {}", t.sweeps);
        let _ = writeln!(s, "trajectories = {}", t.trajectories);
        let _ = writeln!(
            s,
            "engine = {}",
            if t.engine == Engine::Dense { "dense" } else { "walker" }
        );
        let _ = writeln!(s, "theta = {}", fmt_f64(t.theta));
        let _ = writeln!(s, "e0 = {}", fmt_f64(t.e0));
        let _ = writeln!(s, "errors = {}", if t.errors { "on" } else { "off" });
        let _ = writeln!(s, "q = {}", fmt_f64(t.q_magnitude));
        let _ = writeln!(s, "p_heat = {}", fmt_f64(t.p_heat));
        let _ = writeln!(s, "tau_s = {}", fmt_f64(t.tau_s));
        let g = &self.gauge;
        let _ = writeln!(s, "\n[gauge]");
        let _ = writeln!(s, "lx = {}", g.lx);
        let _ = writeln!(s, "ly = {}", g.ly);
        let _ = writeln!(s, "lz = {}", g.lz);
        let _ = writeln!(s, "sweeps = {}", g.sweeps);
        let _ = writeln!(s, "trajectories = {}", g.trajectories);
        let _ = writeln!(s, "theta = {}", fmt_f64(g.theta));
        let _ = writeln!(s, "u = {}", fmt_f64(g.u));
        let _ = writeln!(s, "j = {}", fmt_f64(g.j));
        let _ = writeln!(s, "v = {}", fmt_f64(g.v));
        let _ = writeln!(s, "warmup = {}", g.constraint_warmup);
        let _ = writeln!(s, "start = {}", g.start);
        let _ = writeln!(s, "tau_s = {}", fmt_f64(g.tau_s));
        let r = &self.ramp;
        let _ = writeln!(s, "\n[ramp]");
        let scales: Vec<String> = r.phi_scales.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(s, "phi_scales = {}", scales.join(","));
        let _ = writeln!(s, "steps = {}", r.steps);
        let y = &self.ryd;
        let _ = writeln!(s, "\n[ryd]");
        let _ = writeln!(s, "omega_p = {}", fmt_f64(y.omega_p));
        let _ = writeln!(s, "omega_c = {}", fmt_f64(y.omega_c));
        let _ = writeln!(s, "delta = {}", fmt_f64(y.delta));
        match y.c6 {
            Some(c6) => {
                let _ = writeln!(s, "c6 = {}", fmt_f64(c6));
            }
            None => {
                let _ = writeln!(s, "c6 = none");
            }
        }
        let _ = writeln!(s, "tau_s = {}", fmt_f64(y.tau_s));
        let _ = writeln!(s, "z = {}", y.z);
        let _ = writeln!(s, "gates_per_term = {}", y.gates_per_term);
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            config.apply_override(&section, key, value)?;
        }
        Ok(config)
    }

    /// Applies a single `section.key = value` override.
    pub fn apply_override(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Config(format!("invalid value '{value}' for {section}.{key}"));
        let parse_usize = |v: &str| v.parse::<usize>().map_err(|_| bad());
        let parse_f64 = |v: &str| v.parse::<f64>().map_err(|_| bad());
        match (section, key) {
            ("run", "experiment") => self.experiment = Experiment::parse(value)?,
            ("run", "seed") => self.seed = value.parse().map_err(|_| bad())?,
            ("run", "workers") => self.workers = parse_usize(value)?,
            ("run", "out") => self.out_dir = PathBuf::from(value),
            ("toric", "l") => self.toric.l = parse_usize(value)?,
            ("toric", "sweeps") => self.toric.sweeps = parse_usize(value)?,
            ("toric", "trajectories") => self.toric.trajectories = parse_usize(value)?,
            ("toric", "engine") => {
                self.toric.engine = match value {
                    "dense" => Engine::Dense,
                    "walker" => Engine::Walker,
                    _ => return Err(bad()),
                }
            }
            ("toric", "theta") => self.toric.theta = parse_f64(value)?,
            ("toric", "e0") => self.toric.e0 = parse_f64(value)?,
            ("toric", "errors") => {
                self.toric.errors = match value {
                    "on" => true,
                    "off" => false,
                    _ => return Err(bad()),
                }
            }
            ("toric", "q") => self.toric.q_magnitude = parse_f64(value)?,
            ("toric", "p_heat") => self.toric.p_heat = parse_f64(value)?,
            ("toric", "tau_s") => self.toric.tau_s = parse_f64(value)?,
            ("gauge", "lx") => self.gauge.lx = parse_usize(value)?,
            ("gauge", "ly") => self.gauge.ly = parse_usize(value)?,
            ("gauge", "lz") => self.gauge.lz = parse_usize(value)?,
            ("gauge", "sweeps") => self.gauge.sweeps = parse_usize(value)?,
            ("gauge", "trajectories") => self.gauge.trajectories = parse_usize(value)?,
            ("gauge", "theta") => self.gauge.theta = parse_f64(value)?,
            ("gauge", "u") => self.gauge.u = parse_f64(value)?,
            ("gauge", "j") => self.gauge.j = parse_f64(value)?,
            ("gauge", "v") => self.gauge.v = parse_f64(value)?,
            ("gauge", "warmup") => self.gauge.constraint_warmup = parse_usize(value)?,
            ("gauge", "start") => {
                if value != "all-down" && value != "covering" && value.parse::<u64>().is_err() {
                    return Err(bad());
                }
                self.gauge.start = value.to_string();
            }
            ("gauge", "tau_s") => self.gauge.tau_s = parse_f64(value)?,
            ("ramp", "phi_scales") => {
                let scales: Vec<f64> = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                if scales.is_empty() {
                    return Err(bad());
                }
                self.ramp.phi_scales = scales;
            }
            ("ramp", "steps") => self.ramp.steps = parse_usize(value)?,
            ("ryd", "omega_p") => self.ryd.omega_p = parse_f64(value)?,
            ("ryd", "omega_c") => self.ryd.omega_c = parse_f64(value)?,
            ("ryd", "delta") => self.ryd.delta = parse_f64(value)?,
            ("ryd", "c6") => {
                self.ryd.c6 = if value == "none" {
                    None
                } else {
                    Some(parse_f64(value)?)
                }
            }
            ("ryd", "tau_s") => self.ryd.tau_s = parse_f64(value)?,
            ("ryd", "z") => self.ryd.z = parse_usize(value)?,
            ("ryd", "gates_per_term") => self.ryd.gates_per_term = parse_usize(value)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown configuration key {section}.{key}"
                )))
            }
        }
        Ok(())
    }

    /// Worker count after applying the environment default.
    pub fn effective_workers(&self) -> usize {
        if self.workers > 0 {
            return self.workers;
        }
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&w| w > 0)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema: u32,
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub workers: usize,
    /// Wall time is informational; every other field is reproducible
    /// byte-for-byte for identical config + seed.
    pub wall_time_s: f64,
    pub config: String,
    pub aggregates: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_monotone_trend: Option<bool>,
    pub checksums: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(String, String)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok((name.to_string(), sha256_hex(contents.as_bytes())))
}

/// Renders trajectory records as the versioned observable CSV.
fn trajectory_csv(records: &[crate::channels::TrajectoryRecord], tau_s: f64) -> String {
    let mut csv = String::new();
    csv.push_str(CSV_SCHEMA);
    csv.push('\n');
    csv.push_str("trajectory_id,sweep,time_s,observable_name,value\n");
    for (id, record) in records.iter().enumerate() {
        for (t, name, value) in &record.rows {
            let sweep = t.round() as u64;
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                id,
                sweep,
                fmt_f64(t * tau_s),
                name,
                fmt_f64(*value)
            );
        }
    }
    csv
}

fn run_in_pool<T: Send>(workers: usize, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return job();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(job)
}

fn summary_base(config: &RunConfig, started: Instant) -> RunSummary {
    RunSummary {
        schema: 1,
        experiment: config.experiment.as_str().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        workers: config.effective_workers(),
        wall_time_s: started.elapsed().as_secs_f64(),
        config: config.serialize(),
        aggregates: BTreeMap::new(),
        t_eff: None,
        final_fidelity: None,
        fidelity_monotone_trend: None,
        checksums: BTreeMap::new(),
    }
}

fn finish(
    mut summary: RunSummary,
    config: &RunConfig,
    files: Vec<(String, String)>,
    started: Instant,
    summary_name: &str,
) -> Result<RunSummary> {
    for (name, checksum) in files {
        summary.checksums.insert(name, checksum);
    }
    summary.wall_time_s = started.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("summary serialization: {e}")))?;
    write_file(&config.out_dir, summary_name, &json)?;
    Ok(summary)
}

pub fn cmd_toric_cool(config: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let t = &config.toric;
    let mut model = ToricModel::new(build_toric(t.l)?);
    model.theta = t.theta;
    model.e0 = t.e0;
    model.p_heat = t.p_heat;
    if t.errors {
        model.error = ErrorModel::scaled_z(t.q_magnitude);
        if model.p_heat == 0.0 && t.engine == Engine::Walker {
            model.p_heat = crate::toric::P_HEAT_Q01 * (t.q_magnitude / 0.1).powi(2);
        }
    }
    let seed = config.seed;
    let engine = t.engine;
    let (sweeps, trajectories) = (t.sweeps, t.trajectories);
    let run = run_in_pool(config.effective_workers(), move || {
        cool_toric(&model, sweeps, trajectories, engine, seed)
    })?;
    let csv = trajectory_csv(&run.records, t.tau_s);
    let csv_file = write_file(&config.out_dir, "toric_cool.csv", &csv)?;
    let mut summary = summary_base(config, started);
    let series = &run.series;
    let last = series.mean.len() - 1;
    summary.aggregates.insert("final_mean_density".into(), series.mean[last]);
    summary.aggregates.insert("final_stderr".into(), series.stderr[last]);
    summary
        .aggregates
        .insert("final_plaquette_density".into(), series.mean_plaquette[last]);
    summary
        .aggregates
        .insert("final_vertex_density".into(), series.mean_vertex[last]);
    // plateau density over the last quarter feeds the effective
    // temperature; T_eff is omitted when the plateau is empty
    let q = &series.mean[3 * series.mean.len() / 4..];
    let plateau = q.iter().sum::<f64>() / q.len() as f64;
    summary.aggregates.insert("plateau_density".into(), plateau);
    summary.t_eff = effective_temperature(plateau, t.e0).ok();
    finish(summary, config, vec![csv_file], started, "toric_cool_summary.json")
}

fn gauge_model(config: &RunConfig) -> Result<GaugeModel> {
    let g = &config.gauge;
    let lattice = build_cubic(g.lx, g.ly, g.lz)?;
    Ok(GaugeModel {
        lattice,
        u: g.u,
        j: g.j,
        v: g.v,
        theta: g.theta,
        constraint_warmup: g.constraint_warmup,
    })
}

fn gauge_start(config: &RunConfig, model: &GaugeModel) -> Result<GaugeStart> {
    match config.gauge.start.as_str() {
        "all-down" => Ok(GaugeStart::AllDown),
        "covering" => Ok(GaugeStart::Covering(
            crate::gauge::reference_flippable_covering(&model.lattice)?,
        )),
        label => label
            .parse::<u64>()
            .map(GaugeStart::Covering)
            .map_err(|_| Error::Config(format!("invalid gauge start '{label}'"))),
    }
}

pub fn cmd_gauge_cool(config: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let g = &config.gauge;
    let model = gauge_model(config)?;
    let start = gauge_start(config, &model)?;
    let seed = config.seed;
    let (sweeps, trajectories) = (g.sweeps, g.trajectories);
    let run = run_in_pool(config.effective_workers(), {
        let model = model.clone();
        move || cool_gauge(&model, start, sweeps, trajectories, seed)
    })?;
    let csv = trajectory_csv(&run.records, g.tau_s);
    let csv_file = write_file(&config.out_dir, "gauge_cool.csv", &csv)?;
    let mut summary = summary_base(config, started);
    let series = &run.series;
    let last = series.charge_mean.len() - 1;
    summary
        .aggregates
        .insert("final_charge_density".into(), series.charge_mean[last]);
    summary
        .aggregates
        .insert("final_rk_fidelity".into(), series.rk_fidelity_mean[last]);
    summary.aggregates.insert(
        "final_attractor_fidelity".into(),
        series.attractor_fidelity_mean[last],
    );
    summary.final_fidelity = Some(series.attractor_fidelity_mean[last]);
    // trend flag: at most 10% of steps may decrease
    let fid = &series.attractor_fidelity_mean;
    let drops = fid.windows(2).filter(|w| w[1] + 1e-9 < w[0]).count();
    summary.fidelity_monotone_trend = Some(drops <= fid.len() / 10);
    finish(summary, config, vec![csv_file], started, "gauge_cool_summary.json")
}

pub fn cmd_gauge_ramp(config: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let model = gauge_model(config)?;
    let mut files = Vec::new();
    let mut summary = summary_base(config, started);
    for &scale in &config.ramp.phi_scales {
        let trace = adiabatic_ramp(&model, scale, config.ramp.steps)?;
        let mut csv = String::new();
        csv.push_str(CSV_SCHEMA);
        csv.push('\n');
        csv.push_str("step,time_hbar_over_J,V_over_J,energy,exact_energy\n");
        for row in &trace.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                row.step,
                fmt_f64(row.time),
                fmt_f64(row.v_over_j),
                fmt_f64(row.energy),
                fmt_f64(row.exact_energy)
            );
        }
        let name = format!("gauge_ramp_phi{}.csv", fmt_f64(scale));
        files.push(write_file(&config.out_dir, &name, &csv)?);
        let last = trace.rows.last().unwrap();
        summary.aggregates.insert(
            format!("final_abs_error_phi{}", fmt_f64(scale)),
            (last.energy - last.exact_energy).abs(),
        );
        summary.aggregates.insert(
            format!("t0_energy_phi{}", fmt_f64(scale)),
            trace.rows[0].energy,
        );
    }
    finish(summary, config, files, started, "gauge_ramp_summary.json")
}

/// Verification report: the formatted table plus the pass/fail verdict.
pub fn cmd_verify(seed: u64) -> Result<(String, bool)> {
    let results = verify::run_all(seed)?;
    Ok((verify::format_report(&results), verify::all_pass(&results)))
}

/// JSON parameter report; the blockade radius is omitted with an
/// explanation when C6 is not configured.
pub fn cmd_ryd_params(config: &RunConfig) -> Result<String> {
    let y = &config.ryd;
    let t_gate = rydphys::gate_time(y.delta, y.omega_p)?;
    let sweep = rydphys::sweep_time(y.z, y.gates_per_term, t_gate)?;
    let (e_unit, k_unit) = rydphys::energy_scales(1.0, 1.0, y.tau_s)?;
    #[derive(Serialize)]
    struct Report {
        gate_time_s: f64,
        sweep_time_s: f64,
        coupling_energy_j_per_unit_phase: f64,
        damping_rate_per_s_per_unit_theta_sq: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        blockade_radius_m: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        blockade_radius_note: Option<String>,
    }
    let (radius, note) = match y.c6 {
        Some(c6) => (Some(rydphys::blockade_radius(y.delta, y.omega_c, c6)?), None),
        None => (
            None,
            Some("blockade radius omitted: c6 not configured (no built-in atomic database)".into()),
        ),
    };
    let report = Report {
        gate_time_s: t_gate,
        sweep_time_s: sweep,
        coupling_energy_j_per_unit_phase: e_unit,
        damping_rate_per_s_per_unit_theta_sq: k_unit,
        blockade_radius_m: radius,
        blockade_radius_note: note,
    };
    serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))
}

/// Parsed command line. Kept free of any argument-parsing framework so
/// usage errors map cleanly to exit code 1.
#[derive(Debug)]
pub struct Invocation {
    pub config: RunConfig,
}

pub const USAGE: &str = "\
usage: rydsim <toric-cool|gauge-cool|gauge-ramp|verify|ryd-params> [options]

options:
  --config PATH          load a key=value run configuration file
  --seed U64             master seed (overrides config)
  --workers N            worker thread count (overrides config and RYDSIM_WORKERS)
  --out DIR              output directory (overrides config)
  --set SECTION.KEY=VAL  override any configuration field, e.g. --set toric.l=3
";

/// Parses argv (without the program name) into a run configuration.
pub fn parse_args(args: &[String]) -> Result<Invocation> {
    let mut iter = args.iter();
    let sub = iter
        .next()
        .ok_or_else(|| Error::Config("missing subcommand".into()))?;
    let experiment = Experiment::parse(sub)?;
    let mut config: Option<RunConfig> = None;
    let mut overrides: Vec<(String, String, String)> = Vec::new();
    let take = |flag: &str, iter: &mut std::slice::Iter<String>| -> Result<String> {
        iter.next()
            .cloned()
            .ok_or_else(|| Error::Config(format!("{flag} requires a value")))
    };
    let mut seed = None;
    let mut workers = None;
    let mut out = None;
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--config" => {
                let path = take("--config", &mut iter)?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
                config = Some(RunConfig::parse(&text)?);
            }
            "--seed" => {
                seed = Some(take("--seed", &mut iter)?.parse::<u64>().map_err(|_| {
                    Error::Config("--seed expects an unsigned integer".into())
                })?)
            }
            "--workers" => {
                workers = Some(take("--workers", &mut iter)?.parse::<usize>().map_err(
                    |_| Error::Config("--workers expects an unsigned integer".into()),
                )?)
            }
            "--out" => out = Some(PathBuf::from(take("--out", &mut iter)?)),
            "--set" => {
                let spec = take("--set", &mut iter)?;
                let (path, value) = spec
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("--set expects SECTION.KEY=VALUE, got '{spec}'")))?;
                let (section, key) = path
                    .split_once('.')
                    .ok_or_else(|| Error::Config(format!("--set expects SECTION.KEY=VALUE, got '{spec}'")))?;
                overrides.push((section.into(), key.into(), value.into()));
            }
            other => return Err(Error::Config(format!("unknown option '{other}'"))),
        }
    }
    let mut config = config.unwrap_or_default();
    config.experiment = experiment;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(workers) = workers {
        config.workers = workers;
    }
    if let Some(out) = out {
        config.out_dir = out;
    }
    for (section, key, value) in overrides {
        config.apply_override(&section, &key, &value)?;
    }
    Ok(Invocation { config })
}

/// Runs a parsed invocation; returns the process exit code
/// (0 success, 1 usage error, 2 verification failure).
pub fn run(invocation: &Invocation) -> i32 {
    let config = &invocation.config;
    let outcome: Result<Option<String>> = match config.experiment {
        Experiment::ToricCool => cmd_toric_cool(config).map(|s| {
            Some(format!(
                "toric-cool: final density {:.6}",
                s.aggregates["final_mean_density"]
            ))
        }),
        Experiment::GaugeCool => cmd_gauge_cool(config).map(|s| {
            Some(format!(
                "gauge-cool: final charge {:.6}, attractor fidelity {:.6}",
                s.aggregates["final_charge_density"], s.aggregates["final_attractor_fidelity"]
            ))
        }),
        Experiment::GaugeRamp => cmd_gauge_ramp(config).map(|_| Some("gauge-ramp: done".into())),
        Experiment::RydParams => cmd_ryd_params(config).map(Some),
        Experiment::Verify => match cmd_verify(config.seed) {
            Ok((report, pass)) => {
                print!("{report}");
                if pass {
                    Ok(None)
                } else {
                    return 2;
                }
            }
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(Some(message)) => {
            println!("{message}");
            0
        }
        Ok(None) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Binary entry point.
pub fn main_entry() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match parse_args(&args) {
        Ok(invocation) => run(&invocation),
        Err(e) => {
            eprintln!("error: {e}\n{USAGE}");
            1
        }
    }
}
