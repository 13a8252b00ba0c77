// SPDX-License-Identifier: Apache-2.0

//! Disorder-averaged charging runs.
//!
//! Realizations are independent: each one samples its couplings from its own
//! seed stream, evolves the reference ground state and evaluates every metric
//! on the shared grid. Aggregation sorts by realization index before
//! reducing, so results do not depend on thread count or completion order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{mean_stderr, realization_cost, CostReport, RealizationCost, MIN_CAPABILITY};
use crate::disorder::{
    sample_chain_with, sample_chimera_with, Couplings, DisorderSpec, SeedScheme,
};
use crate::dynamics::{
    propagate_periodic, propagate_periodic_certified, propagate_static_with,
    ConvergenceCertificate, TimeGrid, CONVERGENCE_TOL, DEFAULT_STEP, NORM_TOL,
};
use crate::metrics::{dimensionless_power, pure_state_metrics, MetricSample};
use crate::pauli::{
    build_chain_reference, build_charging, build_chimera_reference, ChargingParams, DenseOperator,
    Drive, ModelKind, SystemSpec,
};
use crate::spectral::eig_hermitian;
use crate::{Error, Result};

/// Default ensemble size.
pub const DEFAULT_REALIZATIONS: usize = 100;

/// Redraws allowed for a realization with vanishing capability.
pub const MAX_ATTEMPTS: u32 = 16;

/// Slack on the normalized-ergotropy range and the coherent/incoherent sum.
pub const METRIC_TOL: f64 = 1e-9;

/// Slack on the empty-battery conditions at `t = 0`.
pub const START_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub system: SystemSpec,
    pub disorder: DisorderSpec,
    pub charging: ChargingParams,
    pub grid: TimeGrid,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Midpoint substep for periodic drives.
    pub step: f64,
}

impl EnsembleConfig {
    pub fn new(
        system: SystemSpec,
        disorder: DisorderSpec,
        charging: ChargingParams,
        grid: TimeGrid,
    ) -> Self {
        EnsembleConfig {
            system,
            disorder,
            charging,
            grid,
            n_realizations: DEFAULT_REALIZATIONS,
            master_seed: 0,
            threads: None,
            step: DEFAULT_STEP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::InvalidParameter("n_realizations must be ≥ 1".into()));
        }
        self.disorder.validate()?;
        if let Some(p) = self.disorder.preset {
            if p.model() != self.system.model() {
                return Err(Error::InvalidParameter(format!(
                    "preset {p} does not apply to the {} model",
                    self.system.model()
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter("threads must be ≥ 1".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step = {} must be > 0",
                self.step
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Result<Couplings> {
        Ok(match self.system.model() {
            ModelKind::IsingChain => Couplings::Chain(sample_chain_with(
                &self.disorder,
                self.system.n_sites(),
                rng,
            )?),
            ModelKind::ChimeraCell => Couplings::Chimera(sample_chimera_with(&self.disorder, rng)?),
        })
    }
}

/// Builds the reference Hamiltonian for one coupling set.
pub fn build_reference(couplings: &Couplings, system: &SystemSpec) -> Result<DenseOperator> {
    match couplings {
        Couplings::Chain(c) => build_chain_reference(c, system),
        Couplings::Chimera(c) => build_chimera_reference(c, system),
    }
}

/// The time series of one disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub realization: u64,
    pub couplings: Couplings,
    pub e_max: f64,
    pub samples: Vec<MetricSample>,
    /// Per-realization `P̄₀`; `None` at `t = 0`.
    pub power: Vec<Option<f64>>,
    pub degenerate_ground: bool,
    /// Some reference level is degenerate: the coherent/incoherent split
    /// depends on the solver's basis choice.
    pub basis_dependent: bool,
    /// Audit trail of redraws caused by a vanishing capability.
    pub resamples: Vec<String>,
}

/// Samples, evolves and evaluates realization `n`.
pub fn run_realization(config: &EnsembleConfig, n: u64) -> Result<TrajectoryRecord> {
    config.validate()?;
    let system = &config.system;
    let mut rng = SeedScheme::new(config.master_seed, n).rng();
    let mut resamples = Vec::new();
    let mut attempt = 0;
    let (couplings, h_ref, href) = loop {
        attempt += 1;
        let couplings = config.sample(&mut rng)?;
        let h_ref = build_reference(&couplings, system)?;
        let href = eig_hermitian(&h_ref)?;
        if href.bandwidth() >= MIN_CAPABILITY {
            break (couplings, h_ref, href);
        }
        resamples.push(format!(
            "realization {n} attempt {attempt}: e_max = {:e} below {MIN_CAPABILITY:e}, redrawn",
            href.bandwidth()
        ));
        if attempt >= MAX_ATTEMPTS {
            return Err(Error::VanishingCapability {
                realization: n,
                attempts: attempt,
            });
        }
    };
    let e_max = href.bandwidth();
    let ground = href.eigenvector(0);

    let states = match config.charging.drive {
        Drive::Static => {
            let h_d = &h_ref + &build_charging(&config.charging, system, 0.0);
            propagate_static_with(&eig_hermitian(&h_d)?, &ground, &config.grid)?
        }
        Drive::Periodic { .. } => {
            propagate_periodic(&h_ref, &config.charging, &ground, &config.grid, config.step)?
        }
    };

    let mut samples = Vec::with_capacity(states.len());
    for (psi, &t) in states.iter().zip(config.grid.points()) {
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!(
                "realization {n}: ‖ψ({t})‖ = {norm}"
            )));
        }
        let m = pure_state_metrics(psi, &href);
        let s = MetricSample::from_pure(t, &m, e_max, system.n_sites());
        check_sample(n, &s)?;
        samples.push(s);
    }

    let curve: Vec<f64> = samples.iter().map(|s| s.ergotropy).collect();
    let power = dimensionless_power(&curve, config.grid.points(), config.charging.omega)?;

    Ok(TrajectoryRecord {
        realization: n,
        couplings,
        e_max,
        samples,
        power,
        degenerate_ground: href.is_ground_degenerate(),
        basis_dependent: href.is_degenerate(),
        resamples,
    })
}

fn check_sample(n: u64, s: &MetricSample) -> Result<()> {
    let fail = |what: String| {
        Err(Error::Invariant(format!(
            "realization {n}, t = {}: {what}",
            s.t
        )))
    };
    if !(-METRIC_TOL..=1.0 + METRIC_TOL).contains(&s.ergotropy) {
        return fail(format!(
            "normalized ergotropy {} outside [0, 1]",
            s.ergotropy
        ));
    }
    let gap = s.ergotropy - s.incoherent_ergotropy - s.coherent_ergotropy;
    if gap.abs() > METRIC_TOL {
        return fail(format!("ergotropy split off by {gap:e}"));
    }
    if s.coherent_ergotropy < -METRIC_TOL || s.incoherent_ergotropy < -METRIC_TOL {
        return fail("negative ergotropy component".into());
    }
    if s.t == 0.0 && (s.ergotropy.abs() > START_TOL || (s.fidelity - 1.0).abs() > START_TOL) {
        return fail(format!(
            "battery not empty at start (ergotropy {:e}, fidelity {})",
            s.ergotropy, s.fidelity
        ));
    }
    Ok(())
}

/// Per-time mean and standard error of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Curve {
    fn from_columns(columns: &[Vec<f64>]) -> Self {
        let (mean, stderr) = columns.iter().map(|c| mean_stderr(c)).unzip();
        Curve { mean, stderr }
    }
}

/// Capability statistics over the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityStats {
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

/// Disorder averages of every metric on the shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub n_realizations: usize,
    pub ergotropy: Curve,
    pub incoherent: Curve,
    pub coherent: Curve,
    pub fidelity: Curve,
    pub coherence: Curve,
    /// Mean `P̄₀`, undefined at `t = 0`.
    pub power: Vec<Option<f64>>,
    pub e_max: CapabilityStats,
    pub degenerate_ground_count: usize,
    pub basis_dependent_count: usize,
    pub resamples: Vec<String>,
}

/// Averages records realization by realization, in index order.
pub fn aggregate(records: &[TrajectoryRecord]) -> Result<EnsembleResult> {
    let mut sorted: Vec<&TrajectoryRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.realization);
    let first = sorted
        .first()
        .ok_or_else(|| Error::InvalidParameter("no records to aggregate".into()))?;
    let times: Vec<f64> = first.samples.iter().map(|s| s.t).collect();
    for r in &sorted {
        let same = r.samples.len() == times.len()
            && r.samples.iter().zip(&times).all(|(s, t)| s.t == *t)
            && r.power.len() == times.len();
        if !same {
            return Err(Error::GridMismatch);
        }
    }

    let column = |f: fn(&MetricSample) -> f64| -> Vec<Vec<f64>> {
        (0..times.len())
            .map(|i| sorted.iter().map(|r| f(&r.samples[i])).collect())
            .collect()
    };
    let power = (0..times.len())
        .map(|i| {
            let vals: Option<Vec<f64>> = sorted.iter().map(|r| r.power[i]).collect();
            vals.map(|v| mean_stderr(&v).0)
        })
        .collect();

    let caps: Vec<f64> = sorted.iter().map(|r| r.e_max).collect();
    let (mean, stderr) = mean_stderr(&caps);
    let e_max = CapabilityStats {
        mean,
        stderr,
        min: caps.iter().copied().fold(f64::INFINITY, f64::min),
        max: caps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };

    let result = EnsembleResult {
        n_realizations: sorted.len(),
        ergotropy: Curve::from_columns(&column(|s| s.ergotropy)),
        incoherent: Curve::from_columns(&column(|s| s.incoherent_ergotropy)),
        coherent: Curve::from_columns(&column(|s| s.coherent_ergotropy)),
        fidelity: Curve::from_columns(&column(|s| s.fidelity)),
        coherence: Curve::from_columns(&column(|s| s.coherence)),
        power,
        e_max,
        degenerate_ground_count: sorted.iter().filter(|r| r.degenerate_ground).count(),
        basis_dependent_count: sorted.iter().filter(|r| r.basis_dependent).count(),
        resamples: sorted.iter().flat_map(|r| r.resamples.clone()).collect(),
        times,
    };
    for (t, e) in result.times.iter().zip(&result.ergotropy.mean) {
        if !(-METRIC_TOL..=1.0 + METRIC_TOL).contains(e) {
            return Err(Error::Invariant(format!(
                "mean normalized ergotropy {e} outside [0, 1] at t = {t}"
            )));
        }
    }
    Ok(result)
}

/// Everything produced by [`run_ensemble`].
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub records: Vec<TrajectoryRecord>,
    pub result: EnsembleResult,
    /// Present for periodic drives.
    pub certificate: Option<ConvergenceCertificate>,
    pub wall_time_seconds: f64,
}

/// Step-halving check of the periodic stepper on realization 0.
pub fn certify_periodic(config: &EnsembleConfig) -> Result<ConvergenceCertificate> {
    let mut rng = SeedScheme::new(config.master_seed, 0).rng();
    let couplings = config.sample(&mut rng)?;
    let h_ref = build_reference(&couplings, &config.system)?;
    let ground = eig_hermitian(&h_ref)?.eigenvector(0);
    let (_, cert) = propagate_periodic_certified(
        &h_ref,
        &config.charging,
        &ground,
        &config.grid,
        config.step,
        CONVERGENCE_TOL,
    )?;
    Ok(cert)
}

/// Runs all realizations, in parallel, and aggregates them.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleRun> {
    config.validate()?;
    let start = Instant::now();
    let certificate = match config.charging.drive {
        Drive::Periodic { .. } => Some(certify_periodic(config)?),
        Drive::Static => None,
    };
    let n = config.n_realizations as u64;
    let work = || -> Result<Vec<TrajectoryRecord>> {
        (0..n)
            .into_par_iter()
            .map(|i| run_realization(config, i))
            .collect()
    };
    let records = match config.threads {
        Some(t) => thread_pool(t)?.install(work)?,
        None => work()?,
    };
    let result = aggregate(&records)?;
    Ok(EnsembleRun {
        records,
        result,
        certificate,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Mean over grid points with `lo ≤ t ≤ hi` of each realization's curve,
/// then mean and standard error across realizations.
pub fn window_average(
    records: &[TrajectoryRecord],
    lo: f64,
    hi: f64,
    f: fn(&MetricSample) -> f64,
) -> (f64, f64) {
    let per: Vec<f64> = records
        .iter()
        .map(|r| {
            let vals: Vec<f64> = r
                .samples
                .iter()
                .filter(|s| s.t >= lo && s.t <= hi)
                .map(f)
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        })
        .collect();
    mean_stderr(&per)
}

/// Disorder-averaged costs at strength `delta`, one draw per realization.
///
/// Realizations whose capability vanishes are kept in the raw cost means and
/// dropped, with a note, from the normalized ones.
pub fn cost_for_delta(config: &EnsembleConfig, delta: f64) -> Result<CostReport> {
    let mut config = config.clone();
    config.disorder.delta = delta;
    config.validate()?;
    let work = || -> Result<Vec<RealizationCost>> {
        (0..config.n_realizations as u64)
            .into_par_iter()
            .map(|n| {
                let mut rng = SeedScheme::new(config.master_seed, n).rng();
                let couplings = config.sample(&mut rng)?;
                realization_cost(&couplings, &config.system, &config.charging)
            })
            .collect()
    };
    let costs = match config.threads {
        Some(t) => thread_pool(t)?.install(work)?,
        None => work()?,
    };
    CostReport::from_realizations(delta, config.system.model().as_str(), &costs)
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}
