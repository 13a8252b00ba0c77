// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use log::{info, warn};

use qbattery::config::{parse_delta_list, ParsedConfig, RawConfig};
use qbattery::ensemble::{cost_for_delta, run_ensemble, EnsembleRun};
use qbattery::pauli::Drive;
use qbattery::report::{
    cost_csv, curves_csv, to_json, window_csv, OutputDir, Summary, WindowAverages,
};
use qbattery::validate::run_validation;

/// Some `validate` check failed.
#[derive(Debug)]
pub struct ValidationFailed(pub usize);

impl fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation check(s) failed", self.0)
    }
}

impl std::error::Error for ValidationFailed {}

/// Layers command defaults, the config file and flags, in that order.
fn load(
    path: Option<&Path>,
    flags: &[(&str, &str)],
    defaults: &[(&str, &str)],
) -> Result<RawConfig> {
    let mut raw = RawConfig::new();
    for (k, v) in defaults {
        raw.set(k, *v)?;
    }
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| qbattery::Error::Config {
            key: "config".into(),
            message: format!("cannot read {}: {e}", p.display()),
        })?;
        raw.overlay(&RawConfig::parse_str(&text)?);
    }
    for (k, v) in flags {
        raw.set(k, *v)?;
    }
    Ok(raw)
}

fn build(raw: &RawConfig) -> Result<ParsedConfig> {
    let parsed = raw.build()?;
    for w in &parsed.warnings {
        warn!("{w}");
    }
    Ok(parsed)
}

/// Runs one ensemble and writes `curves.csv` and `summary.json` under
/// `prefix`.
fn execute(
    parsed: &ParsedConfig,
    dir: &mut OutputDir,
    prefix: &str,
) -> Result<(EnsembleRun, Summary)> {
    let cfg = &parsed.ensemble;
    info!(
        "{} realizations, {} model, N = {}, delta = {}, {} grid points",
        cfg.n_realizations,
        cfg.system.model(),
        cfg.system.n_sites(),
        cfg.disorder.delta,
        cfg.grid.len()
    );
    let run = run_ensemble(cfg)?;
    if let Some(c) = &run.certificate {
        info!(
            "periodic stepper: step {} vs {}, difference {:.3e} at t = {}",
            c.step,
            c.half_step,
            c.final_difference,
            cfg.grid.last()
        );
    }
    let summary = Summary::new(
        cfg,
        &parsed.warnings,
        &run.records,
        &run.result,
        run.certificate,
    );
    dir.write(&format!("{prefix}curves.csv"), &curves_csv(&run.result)?)?;
    dir.write(&format!("{prefix}summary.json"), &to_json(&summary)?)?;
    if let Some(w) = &summary.window {
        info!(
            "time-averaged ergotropy {:.4} ± {:.4} (coherent {:.4}, incoherent {:.4})",
            w.ergotropy.mean, w.ergotropy.stderr, w.coherent.mean, w.incoherent.mean
        );
    }
    for note in &run.result.resamples {
        warn!("{note}");
    }
    Ok((run, summary))
}

fn create(out: &Path) -> Result<OutputDir> {
    OutputDir::create(out).with_context(|| format!("creating {}", out.display()))
}

fn finish(dir: OutputDir, command: &str, config: Option<&Path>, start: Instant) -> Result<()> {
    let manifest = dir.finish(command, config, start.elapsed().as_secs_f64())?;
    info!(
        "wrote {} file(s) to {} in {:.1} s",
        manifest.files.len(),
        manifest.output_dir,
        manifest.wall_time_seconds
    );
    Ok(())
}

pub fn run(config: Option<&Path>, flags: &[(&str, &str)], out: &Path) -> Result<()> {
    let start = Instant::now();
    let parsed = build(&load(config, flags, &[])?)?;
    let mut dir = create(out)?;
    execute(&parsed, &mut dir, "")?;
    finish(dir, "run", config, start)
}

fn delta_dir(delta: f64) -> String {
    format!("delta-{delta}/")
}

pub fn disorder_sweep(
    config: Option<&Path>,
    flags: &[(&str, &str)],
    out: &Path,
    deltas: &str,
) -> Result<()> {
    let start = Instant::now();
    let deltas = parse_delta_list(deltas)?;
    let mut raw = load(config, flags, &[])?;
    // Validate once up front so a bad key fails before any work is done.
    raw.set("delta", deltas[0].to_string())?;
    build(&raw)?;
    let mut dir = create(out)?;
    let mut rows = Vec::new();
    for &delta in &deltas {
        raw.set("delta", delta.to_string())?;
        let parsed = raw.build()?;
        let (run, summary) = execute(&parsed, &mut dir, &delta_dir(delta))?;
        let omega = parsed.ensemble.charging.omega;
        let window = summary
            .window
            .unwrap_or_else(|| WindowAverages::new(&run.records, 1.0 / omega, 100.0 / omega));
        rows.push((delta, window));
    }
    dir.write("windows.csv", &window_csv(&rows)?)?;
    finish(dir, "disorder-sweep", config, start)
}

pub fn cost_sweep(
    config: Option<&Path>,
    flags: &[(&str, &str)],
    out: &Path,
    deltas: &str,
) -> Result<()> {
    let start = Instant::now();
    let deltas = parse_delta_list(deltas)?;
    let mut raw = load(config, flags, &[])?;
    raw.set("delta", deltas[0].to_string())?;
    let parsed = build(&raw)?;
    let mut dir = create(out)?;
    let mut reports = Vec::new();
    for &delta in &deltas {
        let r = cost_for_delta(&parsed.ensemble, delta)?;
        info!(
            "delta = {delta}: C_int = {:.4} ± {:.4}, C_ch = {:.4} ± {:.4}",
            r.mean_c_int, r.stderr_c_int, r.mean_c_ch, r.stderr_c_ch
        );
        for note in r.normalized_c_int.rejected.iter() {
            warn!("delta = {delta}: {note}");
        }
        reports.push(r);
    }
    dir.write("costs.csv", &cost_csv(&reports)?)?;
    dir.write(
        "costs.json",
        &to_json(&serde_json::json!({
            "config": parsed.ensemble,
            "warnings": parsed.warnings,
            "reports": reports,
        }))?,
    )?;
    finish(dir, "cost-sweep", config, start)
}

pub fn periodic(config: Option<&Path>, flags: &[(&str, &str)], out: &Path) -> Result<()> {
    let start = Instant::now();
    let raw = load(config, flags, &[("drive", "periodic"), ("grid.max", "100")])?;
    let parsed = build(&raw)?;
    if parsed.ensemble.charging.drive == Drive::Static {
        return Err(qbattery::Error::Config {
            key: "drive".into(),
            message: "the periodic subcommand needs drive = periodic".into(),
        }
        .into());
    }
    let mut dir = create(out)?;
    execute(&parsed, &mut dir, "")?;
    finish(dir, "periodic", config, start)
}

pub fn validate(seed: u64, out: Option<&Path>) -> Result<()> {
    let start = Instant::now();
    let report = run_validation(seed)?;
    for c in &report.checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let d = &report.chain_cost;
    println!(
        "chain interaction cost (N = 8, h = {}, J1 = {}): matrix {:.6}, direct closed form {:.6}, \
         published closed form {:.6}, difference {:.6}",
        d.h, d.j1, d.matrix, d.direct, d.published, d.offset
    );
    if let Some(out) = out {
        let mut dir = create(out)?;
        dir.write("validation.json", &to_json(&report)?)?;
        finish(dir, "validate", None, start)?;
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(ValidationFailed(failed).into());
    }
    Ok(())
}
