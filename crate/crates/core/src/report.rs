// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON output.
//!
//! Everything written here is a pure function of the configuration and seed,
//! so reruns produce identical bytes. Wall-clock time goes only into
//! `manifest.json`, which is not itself hashed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cost::CostReport;
use crate::dynamics::ConvergenceCertificate;
use crate::ensemble::{
    window_average, CapabilityStats, EnsembleConfig, EnsembleResult, TrajectoryRecord,
};
use crate::Result;

pub const CURVES_HEADER: [&str; 9] = [
    "t",
    "ergotropy_mean",
    "ergotropy_stderr",
    "fidelity_mean",
    "fidelity_stderr",
    "power_mean",
    "coherent_mean",
    "incoherent_mean",
    "coherence_mean",
];

pub const COST_HEADER: [&str; 10] = [
    "delta",
    "model",
    "mean_c_int",
    "stderr_c_int",
    "mean_c_ch",
    "stderr_c_ch",
    "norm_c_int",
    "stderr_norm_c_int",
    "norm_c_ch",
    "stderr_norm_c_ch",
];

/// Twelve significant digits in scientific notation.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
}

/// The `curves.csv` contents, one row per grid point in time order.
pub fn curves_csv(result: &EnsembleResult) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(CURVES_HEADER)?;
    for (i, &t) in result.times.iter().enumerate() {
        w.write_record([
            format_value(t),
            format_value(result.ergotropy.mean[i]),
            format_value(result.ergotropy.stderr[i]),
            format_value(result.fidelity.mean[i]),
            format_value(result.fidelity.stderr[i]),
            result.power[i].map(format_value).unwrap_or_default(),
            format_value(result.coherent.mean[i]),
            format_value(result.incoherent.mean[i]),
            format_value(result.coherence.mean[i]),
        ])?;
    }
    finish(w)
}

pub fn emit_csv(result: &EnsembleResult, path: &Path) -> Result<()> {
    fs::write(path, curves_csv(result)?)?;
    Ok(())
}

/// The cost-sweep CSV, one row per disorder strength.
pub fn cost_csv(reports: &[CostReport]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(COST_HEADER)?;
    for r in reports {
        w.write_record([
            format_value(r.delta),
            r.model.clone(),
            format_value(r.mean_c_int),
            format_value(r.stderr_c_int),
            format_value(r.mean_c_ch),
            format_value(r.stderr_c_ch),
            format_value(r.normalized_c_int.mean),
            format_value(r.normalized_c_int.stderr),
            format_value(r.normalized_c_ch.mean),
            format_value(r.normalized_c_ch.stderr),
        ])?;
    }
    finish(w)
}

pub const WINDOW_HEADER: [&str; 9] = [
    "delta",
    "ergotropy_avg",
    "ergotropy_avg_stderr",
    "coherent_avg",
    "coherent_avg_stderr",
    "incoherent_avg",
    "incoherent_avg_stderr",
    "fidelity_avg",
    "fidelity_avg_stderr",
];

/// Time-averaged metrics, one row per disorder strength.
pub fn window_csv(rows: &[(f64, WindowAverages)]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(WINDOW_HEADER)?;
    for (delta, a) in rows {
        let mut rec = vec![format_value(*delta)];
        for s in [a.ergotropy, a.coherent, a.incoherent, a.fidelity] {
            rec.push(format_value(s.mean));
            rec.push(format_value(s.stderr));
        }
        w.write_record(rec)?;
    }
    finish(w)
}

/// Mean and standard error of a per-realization time average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    pub mean: f64,
    pub stderr: f64,
}

/// Time averages over `[lo, hi]` of the normalized curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowAverages {
    pub lo: f64,
    pub hi: f64,
    pub ergotropy: WindowStat,
    pub coherent: WindowStat,
    pub incoherent: WindowStat,
    pub fidelity: WindowStat,
}

impl WindowAverages {
    pub fn new(records: &[TrajectoryRecord], lo: f64, hi: f64) -> Self {
        let stat = |f| {
            let (mean, stderr) = window_average(records, lo, hi, f);
            WindowStat { mean, stderr }
        };
        WindowAverages {
            lo,
            hi,
            ergotropy: stat(|s| s.ergotropy),
            coherent: stat(|s| s.coherent_ergotropy),
            incoherent: stat(|s| s.incoherent_ergotropy),
            fidelity: stat(|s| s.fidelity),
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: EnsembleConfig,
    pub warnings: Vec<String>,
    pub n_realizations: usize,
    pub e_max: CapabilityStats,
    pub degenerate_ground_count: usize,
    pub basis_dependent_count: usize,
    pub resamples: Vec<String>,
    /// Averages over `1 ≤ Ωt ≤ 100` when the grid reaches that window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowAverages>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceCertificate>,
}

impl Summary {
    pub fn new(
        config: &EnsembleConfig,
        warnings: &[String],
        records: &[TrajectoryRecord],
        result: &EnsembleResult,
        convergence: Option<ConvergenceCertificate>,
    ) -> Self {
        let omega = config.charging.omega;
        let window = (omega > 0.0
            && config.grid.points().iter().any(|&t| {
                let x = omega * t;
                (1.0..=100.0).contains(&x)
            }))
        .then(|| WindowAverages::new(records, 1.0 / omega, 100.0 / omega));
        Summary {
            config: config.clone(),
            warnings: warnings.to_vec(),
            n_realizations: result.n_realizations,
            e_max: result.e_max,
            degenerate_ground_count: result.degenerate_ground_count,
            basis_dependent_count: result.basis_dependent_count,
            resamples: result.resamples.clone(),
            window,
            convergence,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedFile {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Contents of `manifest.json`: every other file written by the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub output_dir: String,
    pub files: Vec<EmittedFile>,
    pub wall_time_seconds: f64,
}

/// Writes files under one directory and records their hashes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<EmittedFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `rel` (`/`-separated), creating parent directories.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = rel
            .split('/')
            .fold(self.root.clone(), |p, part| p.join(part));
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.retain(|f| f.path != rel);
        self.files.push(EmittedFile {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn files(&self) -> &[EmittedFile] {
        &self.files
    }

    /// Writes `manifest.json` and returns it.
    pub fn finish(
        self,
        command: &str,
        config_path: Option<&Path>,
        wall_time_seconds: f64,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            output_dir: self.root.display().to_string(),
            files: self.files,
            wall_time_seconds,
        };
        fs::write(self.root.join("manifest.json"), to_json(&manifest)?)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::NormalizedAverage;
    use crate::ensemble::Curve;

    fn curve(v: &[f64]) -> Curve {
        Curve {
            mean: v.to_vec(),
            stderr: v.iter().map(|x| x / 10.0).collect(),
        }
    }

    fn result(times: &[f64]) -> EnsembleResult {
        let v: Vec<f64> = times.iter().map(|t| t / (1.0 + t)).collect();
        EnsembleResult {
            times: times.to_vec(),
            n_realizations: 2,
            ergotropy: curve(&v),
            incoherent: curve(&v),
            coherent: curve(&v),
            fidelity: curve(&v),
            coherence: curve(&v),
            power: times.iter().map(|&t| (t > 0.0).then_some(0.25)).collect(),
            e_max: CapabilityStats {
                mean: 1.0,
                stderr: 0.0,
                min: 1.0,
                max: 1.0,
            },
            degenerate_ground_count: 0,
            basis_dependent_count: 0,
            resamples: Vec::new(),
        }
    }

    #[test]
    fn empty_grid_is_header_only() {
        let bytes = curves_csv(&result(&[])).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            format!("{}\r\n", CURVES_HEADER.join(","))
        );
    }

    #[test]
    fn rows_and_formatting() {
        let text = String::from_utf8(curves_csv(&result(&[0.0, 0.5, 2.0])).unwrap()).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[4], "");
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0], "0.00000000000e0");
        assert_eq!(first[5], "");
        let second: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(second[0], "5.00000000000e-1");
        assert_eq!(second[5], "2.50000000000e-1");
        assert_eq!(second[1], "3.33333333333e-1");
    }

    #[test]
    fn twelve_significant_digits_round_trip() {
        for x in [std::f64::consts::PI, -1.0e-300, 123456.789012345, 0.1] {
            let s = format_value(x);
            let back: f64 = s.parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12, "{s}");
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.replace('.', "").len(), 12);
        }
    }

    #[test]
    fn cost_rows() {
        let avg = NormalizedAverage {
            mean: 2.0,
            stderr: 0.1,
            used: 3,
            rejected: vec![],
        };
        let r = CostReport {
            delta: 5.0,
            model: "chain".into(),
            mean_c_int: 10.0,
            stderr_c_int: 1.0,
            mean_c_ch: 5.0,
            stderr_c_ch: 0.5,
            normalized_c_int: avg.clone(),
            normalized_c_ch: avg,
            max_closed_form_error_int: 0.0,
            max_closed_form_error_ch: 0.0,
        };
        let text = String::from_utf8(cost_csv(&[r]).unwrap()).unwrap();
        let mut lines = text.split("\r\n");
        assert_eq!(lines.next().unwrap(), COST_HEADER.join(","));
        assert!(lines
            .next()
            .unwrap()
            .starts_with("5.00000000000e0,chain,1.00000000000e1,"));
    }

    #[test]
    fn output_dir_hashes_what_it_writes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("o")).unwrap();
        out.write("a.txt", b"abc").unwrap();
        out.write("sub/b.txt", b"").unwrap();
        let m = out.finish("run", None, 1.5).unwrap();
        assert_eq!(m.files.len(), 2);
        assert_eq!(
            m.files[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert!(dir.path().join("o/sub/b.txt").exists());
        let back: RunManifest =
            serde_json::from_slice(&fs::read(dir.path().join("o/manifest.json")).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
