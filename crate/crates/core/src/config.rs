// SPDX-License-Identifier: Apache-2.0

//! Run configuration.
//!
//! Files are line based:
//!
//! ```text
//! # ergodic chain, 50 samples
//! model = chain
//! preset = chain-ergodic
//! n_realizations = 50
//! grid.max = 100   # trailing comments are allowed
//! ```
//!
//! Layers are applied in order (command defaults, file, flags); later layers
//! override earlier ones. Within one file a key may appear only once.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::disorder::{preset_parameters, DisorderSpec, NextNearest, PhasePreset};
use crate::dynamics::{TimeGrid, DEFAULT_STEP};
use crate::ensemble::{EnsembleConfig, DEFAULT_REALIZATIONS};
use crate::pauli::{ChargingParams, Drive, ModelKind, SystemSpec, CHIMERA_SITES, MAX_SITES};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_GRID_MIN: f64 = 1e-2;
pub const DEFAULT_GRID_MAX: f64 = 1e3;
pub const DEFAULT_GRID_POINTS: usize = 200;
pub const DEFAULT_CHAIN_SITES: usize = 8;
pub const DEFAULT_DRIVE_FREQUENCY: f64 = 0.3;

/// Every accepted key.
pub const KEYS: [&str; 16] = [
    "model",
    "preset",
    "n_sites",
    "delta",
    "j2",
    "h",
    "omega",
    "drive",
    "omega_p",
    "n_realizations",
    "seed",
    "grid.min",
    "grid.max",
    "grid.points",
    "threads",
    "step",
];

/// Unvalidated key/value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses the text of a configuration file.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut raw = RawConfig::new();
        for (i, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    format!("line {}", i + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            check_key(key)?;
            if raw.entries.contains_key(key) {
                return Err(Error::config(key, format!("repeated on line {}", i + 1)));
            }
            raw.entries.insert(key.to_string(), value.to_string());
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Sets `key`, replacing any earlier layer's value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key)?;
        self.entries.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Sets `key` unless some layer already did.
    pub fn set_default(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key)?;
        self.entries
            .entry(key.to_string())
            .or_insert_with(|| value.into());
        Ok(())
    }

    /// Applies `other` on top of `self`.
    pub fn overlay(&mut self, other: &RawConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Validates and resolves into a run configuration.
    pub fn build(&self) -> Result<ParsedConfig> {
        build(self)
    }
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::config(key, "unknown key"))
    }
}

/// A validated configuration plus notes about overridden preset values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedConfig {
    pub ensemble: EnsembleConfig,
    pub warnings: Vec<String>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::config(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::config(key, format!("`{v}` is not finite")));
    }
    Ok(x)
}

fn parse_uint<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer")))
}

fn require(key: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, message))
    }
}

fn build(raw: &RawConfig) -> Result<ParsedConfig> {
    let mut warnings = Vec::new();
    let get = |k: &str| raw.get(k);

    let model: ModelKind = get("model")
        .ok_or_else(|| Error::config("model", "required (`chain` or `chimera`)"))?
        .parse()?;

    let system = match model {
        ModelKind::IsingChain => {
            let n = match get("n_sites") {
                Some(v) => parse_uint::<usize>("n_sites", v)?,
                None => DEFAULT_CHAIN_SITES,
            };
            require(
                "n_sites",
                (1..=MAX_SITES).contains(&n),
                &format!("must be between 1 and {MAX_SITES}"),
            )?;
            SystemSpec::chain(n)?
        }
        ModelKind::ChimeraCell => {
            if let Some(v) = get("n_sites") {
                let n = parse_uint::<usize>("n_sites", v)?;
                require(
                    "n_sites",
                    n == CHIMERA_SITES,
                    &format!("the chimera cell has {CHIMERA_SITES} sites"),
                )?;
            }
            SystemSpec::chimera()
        }
    };

    let preset = get("preset").map(str::parse::<PhasePreset>).transpose()?;
    if let Some(p) = preset {
        require(
            "preset",
            p.model() == model,
            &format!("preset {p} does not apply to the {model} model"),
        )?;
    }
    let mut disorder = match preset {
        Some(p) => preset_parameters(p),
        None => DisorderSpec {
            delta: 1.0,
            j0: 1.0,
            h: 0.6,
            j2: NextNearest::Fixed(0.0),
            preset: None,
        },
    };

    if let Some(v) = get("delta") {
        let d = parse_f64("delta", v)?;
        require("delta", d >= 0.0, "must be ≥ 0")?;
        if let Some(p) = preset {
            if d != disorder.delta {
                warnings.push(format!(
                    "preset {p}: delta {} overridden by {d}",
                    disorder.delta
                ));
            }
        }
        disorder.delta = d;
    } else if preset.is_none() {
        return Err(Error::config("delta", "required when no preset is given"));
    }

    for key in ["h", "j2"] {
        if model == ModelKind::ChimeraCell && get(key).is_some() {
            return Err(Error::config(key, "only applies to the chain model"));
        }
    }
    if let Some(v) = get("h") {
        let h = parse_f64("h", v)?;
        if let Some(p) = preset {
            if h != disorder.h {
                warnings.push(format!("preset {p}: h {} overridden by {h}", disorder.h));
            }
        }
        disorder.h = h;
    }
    if let Some(v) = get("j2") {
        let j2 = if v == "random" {
            NextNearest::Random
        } else {
            NextNearest::Fixed(parse_f64("j2", v)?)
        };
        if let Some(p) = preset {
            if j2 != disorder.j2 {
                warnings.push(format!(
                    "preset {p}: j2 {:?} overridden by {v}",
                    disorder.j2
                ));
            }
        }
        disorder.j2 = j2;
    }

    let omega = match get("omega") {
        Some(v) => parse_f64("omega", v)?,
        None => 1.0,
    };
    require("omega", omega >= 0.0, "must be ≥ 0")?;
    let drive = match get("drive").unwrap_or("static") {
        "static" => {
            if get("omega_p").is_some() {
                warnings.push("omega_p ignored for a static drive".into());
            }
            Drive::Static
        }
        "periodic" => {
            let f = match get("omega_p") {
                Some(v) => parse_f64("omega_p", v)?,
                None => DEFAULT_DRIVE_FREQUENCY,
            };
            require("omega_p", f > 0.0, "must be > 0")?;
            Drive::Periodic { frequency: f }
        }
        other => {
            return Err(Error::config(
                "drive",
                format!("unknown drive `{other}` (expected `static` or `periodic`)"),
            ))
        }
    };
    let charging =
        ChargingParams::new(omega, drive).map_err(|e| Error::config("omega", e.to_string()))?;

    let n_realizations = match get("n_realizations") {
        Some(v) => parse_uint::<usize>("n_realizations", v)?,
        None => DEFAULT_REALIZATIONS,
    };
    require("n_realizations", n_realizations >= 1, "must be ≥ 1")?;
    let master_seed = match get("seed") {
        Some(v) => parse_uint::<u64>("seed", v)?,
        None => DEFAULT_SEED,
    };
    let threads = get("threads")
        .map(|v| parse_uint::<usize>("threads", v))
        .transpose()?;
    require("threads", threads != Some(0), "must be ≥ 1")?;
    let step = match get("step") {
        Some(v) => parse_f64("step", v)?,
        None => DEFAULT_STEP,
    };
    require("step", step > 0.0, "must be > 0")?;

    let gmin = match get("grid.min") {
        Some(v) => parse_f64("grid.min", v)?,
        None => DEFAULT_GRID_MIN,
    };
    let gmax = match get("grid.max") {
        Some(v) => parse_f64("grid.max", v)?,
        None => DEFAULT_GRID_MAX,
    };
    let points = match get("grid.points") {
        Some(v) => parse_uint::<usize>("grid.points", v)?,
        None => DEFAULT_GRID_POINTS,
    };
    require("grid.min", gmin > 0.0, "must be > 0")?;
    require("grid.max", gmax > gmin, "must exceed grid.min")?;
    require(
        "grid.points",
        (1..=100_000).contains(&points),
        "must be between 1 and 100000",
    )?;
    let grid = TimeGrid::log_spaced(gmin, gmax, points)
        .map_err(|e| Error::config("grid.points", e.to_string()))?;

    let ensemble = EnsembleConfig {
        system,
        disorder,
        charging,
        grid,
        n_realizations,
        master_seed,
        threads,
        step,
    };
    ensemble
        .validate()
        .map_err(|e| Error::config("config", e.to_string()))?;
    Ok(ParsedConfig { ensemble, warnings })
}

/// Parses a comma-separated list of non-negative disorder strengths.
pub fn parse_delta_list(s: &str) -> Result<Vec<f64>> {
    let deltas = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            let d = parse_f64("deltas", t)?;
            require("deltas", d >= 0.0, "entries must be ≥ 0")?;
            Ok(d)
        })
        .collect::<Result<Vec<f64>>>()?;
    require("deltas", !deltas.is_empty(), "empty list")?;
    Ok(deltas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build_str(s: &str) -> Result<ParsedConfig> {
        RawConfig::parse_str(s)?.build()
    }

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn preset_only() {
        let p = build_str("model = chain\npreset = chain-mbl\n").unwrap();
        let e = &p.ensemble;
        assert_eq!(e.disorder, preset_parameters(PhasePreset::ChainMbl));
        assert_eq!(e.system, SystemSpec::chain(8).unwrap());
        assert_eq!(e.n_realizations, DEFAULT_REALIZATIONS);
        assert_eq!(e.master_seed, DEFAULT_SEED);
        assert_eq!(e.grid.len(), DEFAULT_GRID_POINTS + 1);
        assert_eq!(e.charging, ChargingParams::static_field(1.0).unwrap());
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn comments_blank_lines_and_whitespace() {
        let text = "# header\n\n  model=chimera   # inline\n\tpreset = chimera-mbl\nseed = 7\n";
        let p = build_str(text).unwrap();
        assert_eq!(p.ensemble.master_seed, 7);
        assert_eq!(p.ensemble.system, SystemSpec::chimera());
    }

    #[test]
    fn override_is_reported() {
        let p = build_str("model = chain\npreset = chain-ergodic\ndelta = 3\n").unwrap();
        assert_eq!(p.ensemble.disorder.delta, 3.0);
        assert_eq!(p.ensemble.disorder.preset, Some(PhasePreset::ChainErgodic));
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn random_j2() {
        let p = build_str("model = chain\ndelta = 2\nj2 = random\n").unwrap();
        assert!(p.ensemble.disorder.random_j2());
    }

    #[test]
    fn periodic_drive() {
        let p = build_str("model = chain\npreset = chain-mbl\ndrive = periodic\nomega_p = 0.5\n")
            .unwrap();
        assert_eq!(
            p.ensemble.charging.drive,
            Drive::Periodic { frequency: 0.5 }
        );
        let p = build_str("model = chain\npreset = chain-mbl\ndrive = periodic\n").unwrap();
        assert_eq!(
            p.ensemble.charging.drive,
            Drive::Periodic {
                frequency: DEFAULT_DRIVE_FREQUENCY
            }
        );
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("preset = chain-mbl\n", "model"),
            ("model = chain\npreset = chimera-mbl\n", "preset"),
            ("model = chain\npreset = chain-mbl\nomega = -1\n", "omega"),
            (
                "model = chain\npreset = chain-mbl\nn_realizations = 0\n",
                "n_realizations",
            ),
            ("model = chain\npreset = chain-mbl\nfoo = 1\n", "foo"),
            (
                "model = chain\npreset = chain-mbl\nmodel = chain\n",
                "model",
            ),
            ("model = chain\n", "delta"),
            ("model = chimera\npreset = chimera-mbl\nh = 1\n", "h"),
            (
                "model = chimera\npreset = chimera-mbl\nn_sites = 6\n",
                "n_sites",
            ),
            (
                "model = chain\npreset = chain-mbl\nn_sites = 13\n",
                "n_sites",
            ),
            ("model = chain\npreset = chain-mbl\ndelta = nan\n", "delta"),
            (
                "model = chain\npreset = chain-mbl\ngrid.max = 0.001\n",
                "grid.max",
            ),
            (
                "model = chain\npreset = chain-mbl\ndrive = pulsed\n",
                "drive",
            ),
            (
                "model = chain\npreset = chain-mbl\nthreads = 0\n",
                "threads",
            ),
            ("model = square\n", "model"),
            ("model chain\n", "line 1"),
        ];
        for (text, key) in cases {
            assert_eq!(key_of(build_str(text).unwrap_err()), key, "{text:?}");
        }
    }

    #[test]
    fn layers_override_in_order() {
        let mut raw = RawConfig::new();
        raw.set_default("grid.max", "100").unwrap();
        let file =
            RawConfig::parse_str("model = chain\npreset = chain-ergodic\ngrid.max = 50\n").unwrap();
        raw.overlay(&file);
        raw.set("seed", "9").unwrap();
        raw.set_default("grid.max", "7").unwrap();
        let p = raw.build().unwrap();
        assert_eq!(p.ensemble.grid.last(), 50.0);
        assert_eq!(p.ensemble.master_seed, 9);
    }

    #[test]
    fn delta_lists() {
        assert_eq!(parse_delta_list("1,2, 5").unwrap(), vec![1.0, 2.0, 5.0]);
        assert!(parse_delta_list("").is_err());
        assert!(parse_delta_list("1,,2").is_err());
        assert!(parse_delta_list("-1").is_err());
        assert!(parse_delta_list("inf").is_err());
    }
}
