// SPDX-License-Identifier: Apache-2.0

//! Disorder realizations, phase presets and per-realization seeding.
//!
//! Every realization draws from its own ChaCha8 stream: the generator is
//! seeded with the master seed and the stream index is the realization
//! number. Realization `n` is therefore a pure function of
//! `(master_seed, n)`, independent of how realizations are scheduled.

use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::{ModelKind, CHIMERA_SITES};
use crate::{Error, Result};

/// Number of edges in the Chimera unit cell.
pub const CHIMERA_EDGES: usize = 16;

/// Couplings of one Ising-chain realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCouplings {
    /// Uniform on-site field.
    pub h: f64,
    /// Nearest-neighbour couplings, `N - 1` entries.
    pub j1: Vec<f64>,
    /// Next-to-nearest couplings, `N - 2` entries.
    pub j2: Vec<f64>,
}

impl ChainCouplings {
    pub fn new(h: f64, j1: Vec<f64>, j2: Vec<f64>) -> Self {
        ChainCouplings { h, j1, j2 }
    }

    pub(crate) fn check_len(&self, n_sites: usize) -> Result<()> {
        let want1 = n_sites.saturating_sub(1);
        let want2 = n_sites.saturating_sub(2);
        if self.j1.len() != want1 {
            return Err(Error::CouplingLength {
                name: "j1",
                got: self.j1.len(),
                expected: want1,
            });
        }
        if self.j2.len() != want2 {
            return Err(Error::CouplingLength {
                name: "j2",
                got: self.j2.len(),
                expected: want2,
            });
        }
        Ok(())
    }
}

/// Fields and edge couplings of one Chimera-cell realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChimeraCouplings {
    pub h: Vec<f64>,
    /// One coupling per edge, ordered as [`crate::pauli::chimera_edges`].
    pub j: Vec<f64>,
}

impl ChimeraCouplings {
    pub fn new(h: Vec<f64>, j: Vec<f64>) -> Self {
        ChimeraCouplings { h, j }
    }

    pub(crate) fn check_len(&self) -> Result<()> {
        if self.h.len() != CHIMERA_SITES {
            return Err(Error::CouplingLength {
                name: "h",
                got: self.h.len(),
                expected: CHIMERA_SITES,
            });
        }
        if self.j.len() != CHIMERA_EDGES {
            return Err(Error::CouplingLength {
                name: "j",
                got: self.j.len(),
                expected: CHIMERA_EDGES,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Couplings {
    Chain(ChainCouplings),
    Chimera(ChimeraCouplings),
}

/// Named parameter sets for the ergodic, Anderson and MBL regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasePreset {
    ChainAnderson,
    ChainErgodic,
    ChainMbl,
    ChimeraErgodic,
    ChimeraMbl,
}

impl PhasePreset {
    pub const ALL: [PhasePreset; 5] = [
        PhasePreset::ChainAnderson,
        PhasePreset::ChainErgodic,
        PhasePreset::ChainMbl,
        PhasePreset::ChimeraErgodic,
        PhasePreset::ChimeraMbl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhasePreset::ChainAnderson => "chain-anderson",
            PhasePreset::ChainErgodic => "chain-ergodic",
            PhasePreset::ChainMbl => "chain-mbl",
            PhasePreset::ChimeraErgodic => "chimera-ergodic",
            PhasePreset::ChimeraMbl => "chimera-mbl",
        }
    }

    pub fn model(self) -> ModelKind {
        match self {
            PhasePreset::ChainAnderson | PhasePreset::ChainErgodic | PhasePreset::ChainMbl => {
                ModelKind::IsingChain
            }
            PhasePreset::ChimeraErgodic | PhasePreset::ChimeraMbl => ModelKind::ChimeraCell,
        }
    }
}

impl fmt::Display for PhasePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhasePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhasePreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{s}`")))
    }
}

/// How the next-to-nearest chain couplings are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NextNearest {
    /// Every `J²_k` equals the given value.
    Fixed(f64),
    /// Each `J²_k` is drawn uniformly from `[-δ J0, δ J0]`.
    Random,
}

/// Disorder strength and the fixed couplings it is combined with.
///
/// `h` and `j2` only apply to the chain; the Chimera cell draws everything
/// from `[-δ J0, δ J0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub delta: f64,
    pub j0: f64,
    pub h: f64,
    pub j2: NextNearest,
    pub preset: Option<PhasePreset>,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must be ≥ 0",
                self.delta
            )));
        }
        if !(self.j0 > 0.0 && self.j0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "j0 = {} must be > 0",
                self.j0
            )));
        }
        if !self.h.is_finite() {
            return Err(Error::InvalidParameter("h must be finite".into()));
        }
        if let NextNearest::Fixed(v) = self.j2 {
            if !v.is_finite() {
                return Err(Error::InvalidParameter("j2 must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn random_j2(&self) -> bool {
        matches!(self.j2, NextNearest::Random)
    }
}

/// Expands a preset with `J0 = 1` (the charging amplitude sets the unit).
pub fn preset_parameters(preset: PhasePreset) -> DisorderSpec {
    let j0 = 1.0;
    let h = 0.6 * j0;
    let (delta, j2) = match preset {
        PhasePreset::ChainAnderson => (1.0, 0.0),
        PhasePreset::ChainErgodic => (1.0, 0.3 * j0),
        PhasePreset::ChainMbl => (5.0, 0.3 * j0),
        PhasePreset::ChimeraErgodic => (2.0, 0.0),
        PhasePreset::ChimeraMbl => (6.0, 0.0),
    };
    DisorderSpec {
        delta,
        j0,
        h,
        j2: NextNearest::Fixed(j2),
        preset: Some(preset),
    }
}

/// Identifies realization `realization` of the ensemble seeded by `master_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedScheme {
    pub master_seed: u64,
    pub realization: u64,
}

impl SeedScheme {
    pub fn new(master_seed: u64, realization: u64) -> Self {
        SeedScheme {
            master_seed,
            realization,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization);
        rng
    }
}

fn uniform(lo: f64, hi: f64) -> Result<Uniform<f64>> {
    Uniform::new_inclusive(lo, hi)
        .map_err(|e| Error::InvalidParameter(format!("uniform [{lo}, {hi}]: {e}")))
}

fn draw(dist: &Uniform<f64>, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    let v = dist.sample(rng);
    assert!(
        (lo..=hi).contains(&v),
        "sample {v} escaped its interval [{lo}, {hi}]"
    );
    v
}

/// Draws one chain realization from `rng`.
pub fn sample_chain_with(
    spec: &DisorderSpec,
    n_sites: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ChainCouplings> {
    spec.validate()?;
    let (lo, hi) = (spec.j0 * (1.0 - spec.delta), spec.j0 * (1.0 + spec.delta));
    let nearest = uniform(lo, hi)?;
    let j1 = (0..n_sites.saturating_sub(1))
        .map(|_| draw(&nearest, lo, hi, rng))
        .collect();
    let n2 = n_sites.saturating_sub(2);
    let j2 = match spec.j2 {
        NextNearest::Fixed(v) => vec![v; n2],
        NextNearest::Random => {
            let w = spec.delta * spec.j0;
            let d = uniform(-w, w)?;
            (0..n2).map(|_| draw(&d, -w, w, rng)).collect()
        }
    };
    Ok(ChainCouplings::new(spec.h, j1, j2))
}

/// Chain realization `seed.realization`: `J¹_k ~ U[J0(1-δ), J0(1+δ)]`.
pub fn sample_chain(
    spec: &DisorderSpec,
    n_sites: usize,
    seed: SeedScheme,
) -> Result<ChainCouplings> {
    sample_chain_with(spec, n_sites, &mut seed.rng())
}

/// Draws one Chimera realization from `rng`.
pub fn sample_chimera_with(spec: &DisorderSpec, rng: &mut ChaCha8Rng) -> Result<ChimeraCouplings> {
    spec.validate()?;
    let w = spec.delta * spec.j0;
    let d = uniform(-w, w)?;
    let h = (0..CHIMERA_SITES).map(|_| draw(&d, -w, w, rng)).collect();
    let j = (0..CHIMERA_EDGES).map(|_| draw(&d, -w, w, rng)).collect();
    Ok(ChimeraCouplings::new(h, j))
}

/// Chimera realization `seed.realization`: all fields and couplings
/// `~ U[-δ J0, δ J0]`.
pub fn sample_chimera(spec: &DisorderSpec, seed: SeedScheme) -> Result<ChimeraCouplings> {
    sample_chimera_with(spec, &mut seed.rng())
}
