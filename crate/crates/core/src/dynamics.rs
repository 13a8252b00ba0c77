// SPDX-License-Identifier: Apache-2.0

//! Unitary evolution of pure states.
//!
//! Times are measured in units of `1/J0`; with the charging amplitude set to
//! `Ω = J0` they coincide with the dimensionless `Ωt`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::pauli::{transverse_field, ChargingParams, DenseOperator, SystemSpec};
use crate::spectral::{eig_hermitian, SpectralDecomposition};
use crate::{Error, Result, C64};

/// Allowed deviation of `‖ψ‖₂` from one.
pub const NORM_TOL: f64 = 1e-9;

/// Default midpoint substep.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Default tolerance on the step-halving difference.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Wraps `amplitudes`, rejecting vectors whose norm is not one.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL || !amplitudes.len().is_power_of_two() {
            return Err(Error::Unnormalized(norm));
        }
        Ok(StateVector { amplitudes })
    }

    pub(crate) fn from_vector_unchecked(amplitudes: DVector<C64>) -> Self {
        StateVector { amplitudes }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        StateVector { amplitudes: v }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `⟨ψ|A|ψ⟩` (real for Hermitian `A`).
    pub fn expectation(&self, op: &DenseOperator) -> f64 {
        self.amplitudes.dotc(&(op.matrix() * &self.amplitudes)).re
    }
}

/// Output times, strictly increasing from `0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.first() != Some(&0.0) {
            return Err(Error::InvalidGrid("first point must be 0".into()));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(TimeGrid { points })
    }

    /// `0` followed by `n` logarithmically spaced times from `min` to `max`.
    pub fn log_spaced(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min > 0.0 && min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid(format!("min = {min} must be positive")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("need at least one point".into()));
        }
        if n > 1 && max <= min {
            return Err(Error::InvalidGrid(format!(
                "max = {max} must exceed min = {min}"
            )));
        }
        let (lo, hi) = (min.log10(), max.log10());
        let mut points = Vec::with_capacity(n + 1);
        points.push(0.0);
        for i in 0..n {
            let t = if n == 1 {
                min
            } else if i == n - 1 {
                max
            } else {
                10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64)
            };
            points.push(t);
        }
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.points.last().expect("grid holds at least t = 0")
    }
}

fn check_input(psi0: &StateVector, dim: usize) -> Result<()> {
    if psi0.dim() != dim {
        return Err(Error::InvalidParameter(format!(
            "state dimension {} does not match operator dimension {dim}",
            psi0.dim()
        )));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized(norm));
    }
    Ok(())
}

/// `ψ(t) = e^{−iH t} ψ0` on every grid point for a time-independent `H`.
pub fn propagate_static(
    h_d: &DenseOperator,
    psi0: &StateVector,
    grid: &TimeGrid,
) -> Result<Vec<StateVector>> {
    propagate_static_with(&eig_hermitian(h_d)?, psi0, grid)
}

/// As [`propagate_static`], reusing a decomposition of the generator.
pub fn propagate_static_with(
    spec: &SpectralDecomposition,
    psi0: &StateVector,
    grid: &TimeGrid,
) -> Result<Vec<StateVector>> {
    check_input(psi0, spec.dim())?;
    let coeffs = spec.to_eigenbasis(psi0.amplitudes());
    let v = spec.eigenvectors();
    let states = grid
        .points()
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return psi0.clone();
            }
            let rotated = DVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(spec.eigenvalues())
                    .map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
            );
            StateVector::from_vector_unchecked(v * rotated)
        })
        .collect();
    Ok(states)
}

/// Entries `A[i, i ^ m]` along one flip mask `m`.
#[derive(Debug, Clone)]
enum MaskValues {
    /// Every row carries the same value (bare σˣ strings).
    Uniform(C64),
    Varying(Vec<C64>),
}

/// An operator written as `Σ_m D_m P_m`, with `P_m` the bit-flip permutation
/// `|i⟩ → |i ^ m⟩` and `D_m` diagonal. Pauli-string sums have one mask per
/// distinct X/Y pattern, so this is compact and scans memory in order.
#[derive(Debug, Clone)]
struct MaskedOperator {
    diag: Vec<C64>,
    masks: Vec<(usize, MaskValues)>,
    /// Max absolute row sum, an upper bound on the spectral norm.
    bound: f64,
}

impl MaskedOperator {
    fn new(op: &DenseOperator) -> Self {
        let d = op.dim();
        let a = op.matrix();
        let zero = C64::new(0.0, 0.0);
        let diag: Vec<C64> = (0..d).map(|i| a[(i, i)]).collect();
        let mut row_sums: Vec<f64> = diag.iter().map(|z| z.norm()).collect();
        let mut masks = Vec::new();
        for m in 1..d {
            let vals: Vec<C64> = (0..d).map(|i| a[(i, i ^ m)]).collect();
            if vals.iter().all(|&z| z == zero) {
                continue;
            }
            for (r, v) in row_sums.iter_mut().zip(&vals) {
                *r += v.norm();
            }
            let entry = if vals.iter().all(|&z| z == vals[0]) {
                MaskValues::Uniform(vals[0])
            } else {
                MaskValues::Varying(vals)
            };
            masks.push((m, entry));
        }
        MaskedOperator {
            diag,
            masks,
            bound: row_sums.iter().fold(0.0, |b: f64, &r| b.max(r)),
        }
    }

    /// `out += scale · A x`.
    fn mul_add(&self, x: &[C64], scale: C64, out: &mut [C64]) {
        for ((o, d), xi) in out.iter_mut().zip(&self.diag).zip(x) {
            *o += scale * d * xi;
        }
        for (m, vals) in &self.masks {
            match vals {
                MaskValues::Uniform(c) => {
                    let c = scale * c;
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += c * x[i ^ m];
                    }
                }
                MaskValues::Varying(v) => {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += scale * v[i] * x[i ^ m];
                    }
                }
            }
        }
    }
}

/// Applies `exp(−i (H_ref + a X) dt)` for a frozen field amplitude `a`.
struct FrozenStepper {
    reference: MaskedOperator,
    field: MaskedOperator,
    term: Vec<C64>,
    next: Vec<C64>,
}

impl FrozenStepper {
    fn new(h_ref: &DenseOperator, spec: &SystemSpec) -> Self {
        let d = h_ref.dim();
        FrozenStepper {
            reference: MaskedOperator::new(h_ref),
            field: MaskedOperator::new(&transverse_field(spec)),
            term: vec![C64::new(0.0, 0.0); d],
            next: vec![C64::new(0.0, 0.0); d],
        }
    }

    /// Taylor series of the exact exponential, summed to round-off. The
    /// interval is split so every piece has `‖A‖ dt ≤ 1`.
    fn apply(&mut self, psi: &mut [C64], amplitude: f64, dt: f64) {
        let bound = self.reference.bound + amplitude.abs() * self.field.bound;
        let pieces = (bound * dt).ceil().max(1.0) as usize;
        let h = dt / pieces as f64;
        for _ in 0..pieces {
            self.term.copy_from_slice(psi);
            for k in 1..64 {
                self.next.fill(C64::new(0.0, 0.0));
                let scale = C64::new(0.0, -h / k as f64);
                self.reference.mul_add(&self.term, scale, &mut self.next);
                self.field
                    .mul_add(&self.term, scale * amplitude, &mut self.next);
                std::mem::swap(&mut self.term, &mut self.next);
                let mut size = 0.0;
                for (p, t) in psi.iter_mut().zip(&self.term) {
                    *p += t;
                    size += t.norm_sqr();
                }
                if size < 1e-34 {
                    break;
                }
            }
        }
    }
}

/// Midpoint propagation under `H_ref + Ω cos(ω t) Σ σˣ`.
///
/// Each grid interval is cut into equal substeps no longer than `step`; on
/// every substep `[t, t + dt]` the Hamiltonian is frozen at `t + dt/2` and
/// its exponential applied exactly. A static drive gives the constant-field
/// limit.
pub fn propagate_periodic(
    h_ref: &DenseOperator,
    params: &ChargingParams,
    psi0: &StateVector,
    grid: &TimeGrid,
    step: f64,
) -> Result<Vec<StateVector>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step = {step} must be > 0"
        )));
    }
    check_input(psi0, h_ref.dim())?;
    let spec = SystemSpec::chain(h_ref.n_sites())?;
    let mut stepper = FrozenStepper::new(h_ref, &spec);
    let mut psi: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    let mut states = Vec::with_capacity(grid.len());
    states.push(psi0.clone());
    for w in grid.points().windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let n = ((tb - ta) / step - 1e-9).ceil().max(1.0) as usize;
        let dt = (tb - ta) / n as f64;
        for s in 0..n {
            let mid = ta + (s as f64 + 0.5) * dt;
            stepper.apply(&mut psi, params.amplitude(mid), dt);
        }
        states.push(StateVector::from_vector_unchecked(
            DVector::from_column_slice(&psi),
        ));
    }
    Ok(states)
}

/// Outcome of the step-halving check on the midpoint stepper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub step: f64,
    pub half_step: f64,
    /// `‖ψ_step(T) − ψ_{step/2}(T)‖₂` at the last grid time.
    pub final_difference: f64,
    /// Largest difference over all grid times.
    pub max_difference: f64,
    pub tolerance: f64,
    pub converged: bool,
}

/// Runs the stepper at `step` and `step / 2` and compares the results.
///
/// Returns the states at `step` together with the certificate; a failed
/// certificate is an error.
pub fn propagate_periodic_certified(
    h_ref: &DenseOperator,
    params: &ChargingParams,
    psi0: &StateVector,
    grid: &TimeGrid,
    step: f64,
    tolerance: f64,
) -> Result<(Vec<StateVector>, ConvergenceCertificate)> {
    let coarse = propagate_periodic(h_ref, params, psi0, grid, step)?;
    let fine = propagate_periodic(h_ref, params, psi0, grid, step / 2.0)?;
    let diffs: Vec<f64> = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a.amplitudes() - b.amplitudes()).norm())
        .collect();
    let final_difference = *diffs.last().expect("grid is non-empty");
    let max_difference = diffs.iter().fold(0.0f64, |m, &d| m.max(d));
    let cert = ConvergenceCertificate {
        step,
        half_step: step / 2.0,
        final_difference,
        max_difference,
        tolerance,
        converged: final_difference < tolerance,
    };
    if !cert.converged {
        return Err(Error::NotConverged {
            step,
            diff: final_difference,
            tolerance,
        });
    }
    Ok((coarse, cert))
}
