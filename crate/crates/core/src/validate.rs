// SPDX-License-Identifier: Apache-2.0

//! Self-checks against independent references.
//!
//! The helpers here (random states, Haar unitaries, the general Uhlmann
//! fidelity) are built on nalgebra directly rather than on the simulator's
//! own eigensolver wrapper, so they can serve as oracles for it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{
    chain_interaction_cost_closed, chain_interaction_cost_published, hs_norm, realization_cost,
};
use crate::disorder::{
    preset_parameters, sample_chain, sample_chimera, ChainCouplings, Couplings, PhasePreset,
    SeedScheme,
};
use crate::dynamics::{
    propagate_periodic_certified, propagate_static, StateVector, TimeGrid, CONVERGENCE_TOL,
    DEFAULT_STEP,
};
use crate::ensemble::build_reference;
use crate::metrics::{dephase, ergotropy, ergotropy_split, pure_state_metrics, DensityMatrix};
use crate::pauli::{
    build_chain_local, build_chain_reference, build_charging, embed_pauli, Axis, ChargingParams,
    DenseOperator, Drive, SystemSpec,
};
use crate::spectral::eig_hermitian;
use crate::{Error, Result, C64};

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; u1 in (0, 1] keeps the log finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// A Haar-random pure state.
pub fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let v = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let n = v.norm();
    StateVector::from_vector_unchecked(v / C64::from(n))
}

/// A Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = m / tr;
    DensityMatrix::new(hermitize(m)).expect("G G† is a density matrix")
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    let a = m.adjoint();
    (m + a) * C64::from(0.5)
}

/// Square root of a positive semidefinite Hermitian matrix. Eigenvalues at
/// round-off level are taken as zero, since their square roots would not be.
fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitize(m.clone()).symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut v = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = if l > 1e-14 * top { l.sqrt() } else { 0.0 };
        for i in 0..v.nrows() {
            v[(i, j)] *= s;
        }
    }
    v * eig.eigenvectors.adjoint()
}

/// Root fidelity `tr √(√ρ σ √ρ)`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::BadDimension(sigma.dim()));
    }
    let s = psd_sqrt(rho.matrix());
    let inner = &s * sigma.matrix() * &s;
    Ok(psd_sqrt(&inner).trace().re)
}

/// `U ρ U†`.
pub fn conjugate(rho: &DensityMatrix, u: &DMatrix<C64>) -> Result<DensityMatrix> {
    DensityMatrix::new(hermitize(u * rho.matrix() * u.adjoint()))
}

/// Ergotropy by brute force: the largest energy drop found over `samples`
/// Haar unitaries. A lower bound on the true value.
pub fn ergotropy_lower_bound(
    rho: &DensityMatrix,
    h: &DenseOperator,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let energy = |r: &DensityMatrix| (r.matrix() * h.matrix()).trace().re;
    let e0 = energy(rho);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let u = random_unitary(rho.dim(), rng);
        best = best.max(e0 - energy(&conjugate(rho, &u)?));
    }
    Ok(best)
}

/// One named self-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }

    fn within(name: &str, err: f64, tol: f64) -> Self {
        Check::new(
            name,
            err <= tol,
            format!("max error {err:.3e} (tolerance {tol:.0e})"),
        )
    }
}

/// Interaction cost of the clean 8-site chain by the matrix norm, the direct
/// closed form and the published closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCostDiscrepancy {
    pub h: f64,
    pub j1: f64,
    pub matrix: f64,
    pub direct: f64,
    pub published: f64,
    /// `published − matrix`.
    pub offset: f64,
    /// `16 (√8 − 4) |h|`, the offset predicted by the local-term mismatch.
    pub predicted_offset: f64,
}

pub fn chain_cost_discrepancy(h: f64, j1: f64) -> Result<ChainCostDiscrepancy> {
    let spec = SystemSpec::chain(8)?;
    let c = ChainCouplings::new(h, vec![j1; 7], vec![0.0; 6]);
    let matrix =
        hs_norm(&build_chain_reference(&c, &spec)?) - hs_norm(&build_chain_local(&c, &spec)?);
    let published = chain_interaction_cost_published(&c);
    Ok(ChainCostDiscrepancy {
        h,
        j1,
        matrix,
        direct: chain_interaction_cost_closed(&c, 8),
        published,
        offset: published - matrix,
        predicted_offset: 16.0 * (8f64.sqrt() - 4.0) * h.abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub chain_cost: ChainCostDiscrepancy,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check_pauli_orthogonality() -> Result<Check> {
    let spec = SystemSpec::chain(3)?;
    let axes = [None, Some(Axis::X), Some(Axis::Y), Some(Axis::Z)];
    let mut strings = Vec::new();
    for a in axes {
        for b in axes {
            let mut op = DenseOperator::zeros(&spec);
            let factors: Vec<(usize, Axis)> = [(0, a), (2, b)]
                .into_iter()
                .filter_map(|(s, x)| x.map(|x| (s, x)))
                .collect();
            op.add_pauli_term(1.0, &factors)?;
            strings.push(op);
        }
    }
    let mut err = 0.0f64;
    for (i, p) in strings.iter().enumerate() {
        for (j, q) in strings.iter().enumerate() {
            let tr = (p.matrix() * q.matrix()).trace();
            let want = if i == j { 8.0 } else { 0.0 };
            err = err.max((tr - C64::from(want)).norm());
        }
    }
    Ok(Check::within(
        "pauli strings are trace-orthogonal",
        err,
        1e-12,
    ))
}

fn check_rabi() -> Result<Check> {
    let spec = SystemSpec::chain(1)?;
    let omega = 0.7;
    let h = &embed_pauli(0, Axis::X, &spec)? * omega;
    let grid = TimeGrid::new((0..50).map(|k| 0.1 * k as f64).collect())?;
    let states = propagate_static(&h, &StateVector::basis(2, 0), &grid)?;
    let err = states
        .iter()
        .zip(grid.points())
        .map(|(s, t)| (s.amplitudes()[0].norm_sqr() - (omega * t).cos().powi(2)).abs())
        .fold(0.0, f64::max);
    Ok(Check::within("single-spin Rabi oscillation", err, 1e-9))
}

fn check_energy_conservation(seed: u64) -> Result<Check> {
    let spec = SystemSpec::chain(8)?;
    let c = sample_chain(
        &preset_parameters(PhasePreset::ChainErgodic),
        8,
        SeedScheme::new(seed, 0),
    )?;
    let h_ref = build_chain_reference(&c, &spec)?;
    let ground = eig_hermitian(&h_ref)?.eigenvector(0);
    let h = &h_ref + &build_charging(&ChargingParams::static_field(1.0)?, &spec, 0.0);
    let grid = TimeGrid::log_spaced(1e-2, 1e3, 30)?;
    let states = propagate_static(&h, &ground, &grid)?;
    let e0 = ground.expectation(&h);
    let err = states
        .iter()
        .map(|s| (s.expectation(&h) - e0).abs().max((s.norm() - 1.0).abs()))
        .fold(0.0, f64::max);
    Ok(Check::within(
        "static drive conserves energy and norm",
        err,
        1e-9,
    ))
}

fn check_periodic_convergence(seed: u64) -> Result<Check> {
    let spec = SystemSpec::chain(8)?;
    let c = sample_chain(
        &preset_parameters(PhasePreset::ChainErgodic),
        8,
        SeedScheme::new(seed, 0),
    )?;
    let h_ref = build_chain_reference(&c, &spec)?;
    let ground = eig_hermitian(&h_ref)?.eigenvector(0);
    let params = ChargingParams::new(1.0, Drive::Periodic { frequency: 0.3 })?;
    let grid = TimeGrid::log_spaced(1e-2, 20.0, 20)?;
    let cert = match propagate_periodic_certified(
        &h_ref,
        &params,
        &ground,
        &grid,
        DEFAULT_STEP,
        CONVERGENCE_TOL,
    ) {
        Ok((_, cert)) => cert,
        Err(Error::NotConverged { diff, .. }) => {
            return Ok(Check::within(
                "periodic stepper step-halving",
                diff,
                CONVERGENCE_TOL,
            ))
        }
        Err(e) => return Err(e),
    };
    Ok(Check::within(
        "periodic stepper step-halving",
        cert.final_difference,
        CONVERGENCE_TOL,
    ))
}

fn check_passivity(rng: &mut ChaCha8Rng) -> Result<Check> {
    let spec = SystemSpec::chain(2)?;
    let mut h = embed_pauli(0, Axis::Z, &spec)?;
    h.add_pauli_term(0.6, &[(1, Axis::Z)])?;
    h.add_pauli_term(-0.9, &[(0, Axis::X), (1, Axis::X)])?;
    let href = eig_hermitian(&h)?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..5 {
        let rho = random_density(4, rng);
        let exact = ergotropy(&rho, &href)?;
        let found = ergotropy_lower_bound(&rho, &h, 200, rng)?;
        worst = worst.max(found - exact);
    }
    Ok(Check::new(
        "no unitary beats the passive state",
        worst <= 1e-10,
        format!("largest excess over ergotropy {worst:.3e} across 10^3 unitaries"),
    ))
}

fn check_uhlmann(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut err = 0.0f64;
    for _ in 0..50 {
        let a = random_state(4, rng);
        let b = random_state(4, rng);
        let f = uhlmann_fidelity(&DensityMatrix::from_pure(&a), &DensityMatrix::from_pure(&b))?;
        err = err.max((f - a.overlap(&b).norm()).abs());
    }
    Ok(Check::within(
        "pure-state fidelity matches Uhlmann",
        err,
        1e-9,
    ))
}

fn check_dephasing(rng: &mut ChaCha8Rng) -> Result<Check> {
    let spec = SystemSpec::chain(2)?;
    let mut h = embed_pauli(0, Axis::X, &spec)?;
    h.add_pauli_term(0.3, &[(1, Axis::Z)])?;
    let href = eig_hermitian(&h)?;
    let mut err = 0.0f64;
    for _ in 0..20 {
        let rho = random_density(4, rng);
        let once = dephase(&rho, &href)?.state;
        let twice = dephase(&once, &href)?.state;
        err = err.max((once.matrix() - twice.matrix()).norm());
    }
    Ok(Check::within("dephasing is idempotent", err, 1e-12))
}

fn check_pure_shortcut(seed: u64) -> Result<Check> {
    let spec = SystemSpec::chain(4)?;
    let c = sample_chain(
        &preset_parameters(PhasePreset::ChainMbl),
        4,
        SeedScheme::new(seed, 1),
    )?;
    let h_ref = build_chain_reference(&c, &spec)?;
    let href = eig_hermitian(&h_ref)?;
    let h = &h_ref + &build_charging(&ChargingParams::static_field(1.0)?, &spec, 0.0);
    let grid = TimeGrid::log_spaced(1e-2, 1e2, 25)?;
    let mut err = 0.0f64;
    for psi in propagate_static(&h, &href.eigenvector(0), &grid)? {
        let fast = pure_state_metrics(&psi, &href);
        let split = ergotropy_split(&DensityMatrix::from_pure(&psi), &href)?;
        err = err
            .max((fast.ergotropy - split.total).abs())
            .max((fast.incoherent - split.incoherent).abs());
    }
    Ok(Check::within(
        "pure-state shortcut matches density-matrix path",
        err,
        1e-9,
    ))
}

fn check_closed_forms(seed: u64) -> Result<Check> {
    let charging = ChargingParams::static_field(1.0)?;
    let mut err = 0.0f64;
    for preset in PhasePreset::ALL {
        let d = preset_parameters(preset);
        for n in 0..5 {
            let s = SeedScheme::new(seed, n);
            let (couplings, spec) = match preset.model() {
                crate::pauli::ModelKind::IsingChain => (
                    Couplings::Chain(sample_chain(&d, 8, s)?),
                    SystemSpec::chain(8)?,
                ),
                crate::pauli::ModelKind::ChimeraCell => (
                    Couplings::Chimera(sample_chimera(&d, s)?),
                    SystemSpec::chimera(),
                ),
            };
            let c = realization_cost(&couplings, &spec, &charging)?;
            err = err
                .max((c.c_int - c.c_int_closed).abs())
                .max((c.c_ch - c.c_ch_closed).abs());
        }
    }
    Ok(Check::within("costs match their closed forms", err, 1e-9))
}

fn check_determinism(seed: u64) -> Result<Check> {
    let d = preset_parameters(PhasePreset::ChimeraMbl);
    let spec = SystemSpec::chimera();
    let a = Couplings::Chimera(sample_chimera(&d, SeedScheme::new(seed, 3))?);
    let b = Couplings::Chimera(sample_chimera(&d, SeedScheme::new(seed, 3))?);
    let same = a == b && build_reference(&a, &spec)? == build_reference(&b, &spec)?;
    Ok(Check::new(
        "same seed, same realization",
        same,
        "couplings and Hamiltonian compared bitwise".into(),
    ))
}

/// Runs every self-check.
pub fn run_validation(seed: u64) -> Result<ValidationReport> {
    let mut rng = SeedScheme::new(seed, u64::MAX).rng();
    let chain_cost = chain_cost_discrepancy(0.6, 1.0)?;
    let checks = vec![
        check_pauli_orthogonality()?,
        check_rabi()?,
        check_energy_conservation(seed)?,
        check_periodic_convergence(seed)?,
        check_passivity(&mut rng)?,
        check_uhlmann(&mut rng)?,
        check_dephasing(&mut rng)?,
        check_pure_shortcut(seed)?,
        check_closed_forms(seed)?,
        check_determinism(seed)?,
        Check::within(
            "clean-chain interaction cost by trace",
            (chain_cost.matrix - chain_cost.direct).abs(),
            1e-9,
        ),
        Check::within(
            "published chain formula offset is the local-term mismatch",
            (chain_cost.offset - chain_cost.predicted_offset).abs(),
            1e-9,
        ),
    ];
    Ok(ValidationReport { checks, chain_cost })
}
