// SPDX-License-Identifier: Apache-2.0

//! Hilbert–Schmidt energy cost of switching Hamiltonian terms on and off.
//!
//! The matrix norms are authoritative. The closed forms below follow from
//! trace-orthogonality of distinct Pauli strings, `tr(P Q) = 2^N δ_PQ`, and
//! serve as cross-checks.

use serde::{Deserialize, Serialize};

use crate::disorder::{ChainCouplings, ChimeraCouplings, Couplings};
use crate::pauli::{
    build_chain_local, build_chain_reference, build_charging, build_chimera_local,
    build_chimera_reference, ChargingParams, DenseOperator, SystemSpec,
};
use crate::spectral::eig_hermitian;
use crate::{Error, Result};

/// `√tr(A†A)`, the Frobenius norm.
pub fn hs_norm(a: &DenseOperator) -> f64 {
    a.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `N(H_ref) − N(H_0)`: cost of the native interactions on top of the
/// local part `h0`.
pub fn cost_interactions(h_ref: &DenseOperator, h0: &DenseOperator) -> f64 {
    hs_norm(h_ref) - hs_norm(h0)
}

/// `N(H_ref + H_ch) − N(H_ref)`: cost of the local charging field.
pub fn cost_charging(h_total: &DenseOperator, h_ref: &DenseOperator) -> f64 {
    hs_norm(h_total) - hs_norm(h_ref)
}

/// `Ξ² = N h² + Σ (J¹_k)² + Σ (J²_k)²`, the squared-coefficient sum of the
/// chain reference Hamiltonian.
pub fn chain_xi_squared(c: &ChainCouplings, n_sites: usize) -> f64 {
    n_sites as f64 * c.h * c.h
        + c.j1.iter().map(|j| j * j).sum::<f64>()
        + c.j2.iter().map(|j| j * j).sum::<f64>()
}

/// `Λ² = Σ h_k² + Σ J_kj²`.
pub fn chimera_lambda_squared(c: &ChimeraCouplings) -> f64 {
    c.h.iter().chain(&c.j).map(|v| v * v).sum()
}

/// Closed-form charging cost `√(2^N) (√(X² + N Ω²) − |X|)` where `X²` is the
/// squared-coefficient sum of the reference Hamiltonian. For `N = 8` the
/// prefactor is 16.
pub fn charging_cost_closed(coeff_sq: f64, n_sites: usize, omega: f64) -> f64 {
    let pref = ((1u64 << n_sites) as f64).sqrt();
    pref * ((coeff_sq + n_sites as f64 * omega * omega).sqrt() - coeff_sq.sqrt())
}

/// Closed-form chain interaction cost from a direct trace:
/// `√(2^N) (√Ξ² − √(N h²))`.
pub fn chain_interaction_cost_closed(c: &ChainCouplings, n_sites: usize) -> f64 {
    let pref = ((1u64 << n_sites) as f64).sqrt();
    pref * (chain_xi_squared(c, n_sites).sqrt() - (n_sites as f64 * c.h * c.h).sqrt())
}

/// The published `N = 8` chain interaction formula, whose local term is
/// `−2√(4h²) = −4|h|` instead of the direct `−√(8h²)`. Kept only to
/// quantify the difference.
pub fn chain_interaction_cost_published(c: &ChainCouplings) -> f64 {
    16.0 * (-2.0 * (4.0 * c.h * c.h).sqrt() + chain_xi_squared(c, 8).sqrt())
}

/// `16 (√Λ² − √Σh²)`.
pub fn chimera_interaction_cost_closed(c: &ChimeraCouplings) -> f64 {
    let hs: f64 = c.h.iter().map(|v| v * v).sum();
    16.0 * (chimera_lambda_squared(c).sqrt() - hs.sqrt())
}

/// Costs of one realization, by matrix norm and in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationCost {
    pub c_int: f64,
    pub c_ch: f64,
    pub c_int_closed: f64,
    pub c_ch_closed: f64,
    pub e_max: f64,
}

/// Costs for one coupling set, with the charging field evaluated at `t = 0`.
pub fn realization_cost(
    couplings: &Couplings,
    spec: &SystemSpec,
    charging: &ChargingParams,
) -> Result<RealizationCost> {
    let (h_ref, h0, coeff_sq, c_int_closed) = match couplings {
        Couplings::Chain(c) => (
            build_chain_reference(c, spec)?,
            build_chain_local(c, spec)?,
            chain_xi_squared(c, spec.n_sites()),
            chain_interaction_cost_closed(c, spec.n_sites()),
        ),
        Couplings::Chimera(c) => (
            build_chimera_reference(c, spec)?,
            build_chimera_local(c, spec)?,
            chimera_lambda_squared(c),
            chimera_interaction_cost_closed(c),
        ),
    };
    let omega = charging.amplitude(0.0);
    let h_total = &h_ref + &build_charging(charging, spec, 0.0);
    let e_max = eig_hermitian(&h_ref)?.bandwidth();
    Ok(RealizationCost {
        c_int: cost_interactions(&h_ref, &h0),
        c_ch: cost_charging(&h_total, &h_ref),
        c_int_closed,
        c_ch_closed: charging_cost_closed(coeff_sq, spec.n_sites(), omega),
        e_max,
    })
}

/// Mean and standard error of `cost / e_max` over the accepted realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAverage {
    pub mean: f64,
    pub stderr: f64,
    pub used: usize,
    /// Diagnostics for realizations dropped because `e_max` vanished.
    pub rejected: Vec<String>,
}

/// Smallest capability accepted as a normalizer.
pub const MIN_CAPABILITY: f64 = 1e-8;

/// `(1/N_r) Σ C_n / E_n^max`, the ratio taken inside the average.
pub fn normalized_average_cost(costs: &[f64], e_max: &[f64]) -> Result<NormalizedAverage> {
    if costs.len() != e_max.len() {
        return Err(Error::InvalidParameter(format!(
            "{} costs but {} capabilities",
            costs.len(),
            e_max.len()
        )));
    }
    let mut rejected = Vec::new();
    let mut ratios = Vec::with_capacity(costs.len());
    for (n, (&c, &e)) in costs.iter().zip(e_max).enumerate() {
        if e.abs() < MIN_CAPABILITY {
            rejected.push(format!("realization {n}: e_max = {e:e}, cost dropped"));
        } else {
            ratios.push(c / e);
        }
    }
    let (mean, stderr) = mean_stderr(&ratios);
    Ok(NormalizedAverage {
        mean,
        stderr,
        used: ratios.len(),
        rejected,
    })
}

/// Arithmetic mean and `s / √n` (zero for fewer than two samples).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Disorder-averaged costs for one disorder strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub delta: f64,
    pub model: String,
    pub mean_c_int: f64,
    pub stderr_c_int: f64,
    pub mean_c_ch: f64,
    pub stderr_c_ch: f64,
    pub normalized_c_int: NormalizedAverage,
    pub normalized_c_ch: NormalizedAverage,
    /// Largest `|matrix − closed form|` over realizations, per cost.
    pub max_closed_form_error_int: f64,
    pub max_closed_form_error_ch: f64,
}

impl CostReport {
    pub fn from_realizations(delta: f64, model: &str, costs: &[RealizationCost]) -> Result<Self> {
        let pick = |f: fn(&RealizationCost) -> f64| costs.iter().map(f).collect::<Vec<_>>();
        let e_max = pick(|c| c.e_max);
        let c_int = pick(|c| c.c_int);
        let c_ch = pick(|c| c.c_ch);
        let (mean_c_int, stderr_c_int) = mean_stderr(&c_int);
        let (mean_c_ch, stderr_c_ch) = mean_stderr(&c_ch);
        let max_err = |f: fn(&RealizationCost) -> f64| costs.iter().map(f).fold(0.0f64, f64::max);
        Ok(CostReport {
            delta,
            model: model.to_string(),
            mean_c_int,
            stderr_c_int,
            mean_c_ch,
            stderr_c_ch,
            normalized_c_int: normalized_average_cost(&c_int, &e_max)?,
            normalized_c_ch: normalized_average_cost(&c_ch, &e_max)?,
            max_closed_form_error_int: max_err(|c| (c.c_int - c.c_int_closed).abs()),
            max_closed_form_error_ch: max_err(|c| (c.c_ch - c.c_ch_closed).abs()),
        })
    }
}
