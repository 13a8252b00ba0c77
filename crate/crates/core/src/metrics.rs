// SPDX-License-Identifier: Apache-2.0

//! Figures of merit for a charged battery state.
//!
//! All ergotropies are measured against the reference Hamiltonian, passed in
//! as its [`SpectralDecomposition`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::StateVector;
use crate::pauli::DenseOperator;
use crate::spectral::{eig_hermitian, SpectralDecomposition};
use crate::{Error, Result, C64};

/// Tolerance on `tr ρ = 1` and on negative eigenvalues of `ρ`.
pub const DENSITY_TOL: f64 = 1e-10;

/// A positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let op = DenseOperator::new(matrix).map_err(|e| Error::InvalidDensity(e.to_string()))?;
        let tr = op.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace = {tr}")));
        }
        let min = eig_hermitian(&op)?.eigenvalues()[0];
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:e} < 0")));
        }
        Ok(DensityMatrix {
            matrix: op.into_matrix(),
        })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix {
            matrix: a * a.adjoint(),
        }
    }

    /// `Σ pᵢ |vᵢ⟩⟨vᵢ|` for orthonormal columns `vᵢ` of `basis`.
    fn from_spectrum_unchecked(populations: &[f64], basis: &DMatrix<C64>) -> Self {
        let mut scaled = basis.clone();
        for (j, &p) in populations.iter().enumerate() {
            scaled.column_mut(j).scale_mut(p);
        }
        DensityMatrix {
            matrix: scaled * basis.adjoint(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues sorted in descending order.
    pub fn populations_descending(&self) -> Result<Vec<f64>> {
        let op = DenseOperator::new(self.matrix.clone())?;
        let mut p = eig_hermitian(&op)?.eigenvalues().to_vec();
        p.reverse();
        Ok(p)
    }

    /// Diagonal `⟨εᵢ|ρ|εᵢ⟩` in the eigenbasis of the reference.
    pub fn populations_in(&self, href: &SpectralDecomposition) -> Vec<f64> {
        let v = href.eigenvectors();
        let rv = &self.matrix * v;
        (0..v.ncols())
            .map(|i| v.column(i).dotc(&rv.column(i)).re)
            .collect()
    }

    /// `tr(ρ H)` from the reference spectrum.
    pub fn energy(&self, href: &SpectralDecomposition) -> f64 {
        self.populations_in(href)
            .iter()
            .zip(href.eigenvalues())
            .map(|(q, e)| q * e)
            .sum()
    }
}

fn check_dim(rho: &DensityMatrix, href: &SpectralDecomposition) -> Result<()> {
    if rho.dim() != href.dim() {
        return Err(Error::InvalidDensity(format!(
            "dimension {} does not match Hamiltonian dimension {}",
            rho.dim(),
            href.dim()
        )));
    }
    Ok(())
}

/// `Σ εᵢ pᵢ` with `ε` ascending and `p` sorted descending.
pub fn passive_energy(populations: &[f64], energies: &[f64]) -> f64 {
    let mut p = populations.to_vec();
    p.sort_by(|a, b| b.total_cmp(a));
    p.iter().zip(energies).map(|(p, e)| p * e).sum()
}

/// The passive state of `rho`: its spectrum, sorted descending, placed on the
/// reference levels in ascending order.
pub fn passive_state(rho: &DensityMatrix, href: &SpectralDecomposition) -> Result<DensityMatrix> {
    check_dim(rho, href)?;
    let p = rho.populations_descending()?;
    Ok(DensityMatrix::from_spectrum_unchecked(
        &p,
        href.eigenvectors(),
    ))
}

/// Ergotropy `tr(ρH) − Σ εᵢ pᵢ`.
pub fn ergotropy(rho: &DensityMatrix, href: &SpectralDecomposition) -> Result<f64> {
    check_dim(rho, href)?;
    let p = rho.populations_descending()?;
    Ok(rho.energy(href) - passive_energy(&p, href.eigenvalues()))
}

#[derive(Debug, Clone)]
pub struct Dephased {
    pub state: DensityMatrix,
    /// The reference spectrum is degenerate, so the dephasing basis is a
    /// convention of the eigensolver.
    pub basis_dependent: bool,
}

/// `ρᴰ = Σ ⟨εᵢ|ρ|εᵢ⟩ |εᵢ⟩⟨εᵢ|`.
pub fn dephase(rho: &DensityMatrix, href: &SpectralDecomposition) -> Result<Dephased> {
    check_dim(rho, href)?;
    let q = rho.populations_in(href);
    Ok(Dephased {
        state: DensityMatrix::from_spectrum_unchecked(&q, href.eigenvectors()),
        basis_dependent: href.is_degenerate(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgotropySplit {
    pub total: f64,
    pub incoherent: f64,
    pub coherent: f64,
    pub basis_dependent: bool,
}

/// Incoherent part `ergotropy(ρᴰ)` and the coherent remainder.
pub fn ergotropy_split(
    rho: &DensityMatrix,
    href: &SpectralDecomposition,
) -> Result<ErgotropySplit> {
    let total = ergotropy(rho, href)?;
    let dephased = dephase(rho, href)?;
    let incoherent = ergotropy(&dephased.state, href)?;
    Ok(ErgotropySplit {
        total,
        incoherent,
        coherent: total - incoherent,
        basis_dependent: dephased.basis_dependent,
    })
}

/// `|⟨ground|ψ⟩|`, the Uhlmann fidelity of two pure states.
pub fn fidelity_to_ground(psi: &StateVector, ground: &StateVector) -> f64 {
    ground.overlap(psi).norm()
}

/// `Σ_{i≠j} |ρᵢⱼ|` in the computational basis.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut sum = 0.0;
    for j in 0..d {
        for i in 0..d {
            if i != j {
                sum += rho.matrix[(i, j)].norm();
            }
        }
    }
    sum
}

/// l1 coherence divided by that of the uniform product state, `2^N − 1`.
pub fn l1_coherence_normalized(rho: &DensityMatrix, n_sites: usize) -> f64 {
    l1_coherence(rho) / max_l1_coherence(n_sites)
}

pub fn max_l1_coherence(n_sites: usize) -> f64 {
    ((1u64 << n_sites) - 1) as f64
}

/// `(Ē(t) − Ē(0)) / (Ω t)` on each grid point; `None` at `t = 0` or when the
/// field vanishes.
///
/// The average power follows as `P = Ω · Ē_max · P̄₀`.
pub fn dimensionless_power(curve: &[f64], times: &[f64], omega: f64) -> Result<Vec<Option<f64>>> {
    if curve.len() != times.len() {
        return Err(Error::GridMismatch);
    }
    if curve.is_empty() {
        return Ok(Vec::new());
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidGrid("power needs the t = 0 value".into()));
    }
    let e0 = curve[0];
    Ok(curve
        .iter()
        .zip(times)
        .map(|(&e, &t)| (t > 0.0 && omega > 0.0).then(|| (e - e0) / (omega * t)))
        .collect())
}

/// Every figure of merit of a pure state, unnormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateMetrics {
    pub ergotropy: f64,
    pub incoherent: f64,
    pub coherent: f64,
    /// Fidelity with the reference ground state (eigenvector 0).
    pub fidelity: f64,
    pub l1_coherence: f64,
}

/// Evaluates a pure state without forming `|ψ⟩⟨ψ|`.
///
/// For `ρ = |ψ⟩⟨ψ|` the spectrum is `(1, 0, …)`, so the passive energy is
/// `ε₁`; the dephased state has the eigenbasis populations `|⟨εᵢ|ψ⟩|²` as its
/// spectrum.
pub fn pure_state_metrics(psi: &StateVector, href: &SpectralDecomposition) -> PureStateMetrics {
    let eps = href.eigenvalues();
    let comps: DVector<C64> = href.to_eigenbasis(psi.amplitudes());
    let q: Vec<f64> = comps.iter().map(|z| z.norm_sqr()).collect();
    let norm2: f64 = q.iter().sum();
    let energy: f64 = q.iter().zip(eps).map(|(q, e)| q * e).sum();
    let ergotropy = energy - eps[0] * norm2;
    let incoherent = energy - passive_energy(&q, eps);
    let l1: f64 = psi.amplitudes().iter().map(|z| z.norm()).sum();
    PureStateMetrics {
        ergotropy,
        incoherent,
        coherent: ergotropy - incoherent,
        fidelity: comps[0].norm(),
        l1_coherence: l1 * l1 - norm2,
    }
}

/// Per-realization metrics at one time, ergotropies normalized by `E_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub t: f64,
    pub ergotropy: f64,
    pub incoherent_ergotropy: f64,
    pub coherent_ergotropy: f64,
    pub fidelity: f64,
    /// l1 coherence normalized by `2^N − 1`.
    pub coherence: f64,
}

impl MetricSample {
    pub fn from_pure(t: f64, m: &PureStateMetrics, e_max: f64, n_sites: usize) -> Self {
        MetricSample {
            t,
            ergotropy: m.ergotropy / e_max,
            incoherent_ergotropy: m.incoherent / e_max,
            coherent_ergotropy: m.coherent / e_max,
            fidelity: m.fidelity,
            coherence: m.l1_coherence / max_l1_coherence(n_sites),
        }
    }
}
