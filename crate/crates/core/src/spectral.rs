// SPDX-License-Identifier: Apache-2.0

//! Hermitian eigendecomposition with deterministic ordering and phases.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dynamics::StateVector;
use crate::pauli::{DenseOperator, HERMITIAN_TOL};
use crate::{Error, Result, C64};

/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const DEGENERACY_RTOL: f64 = 1e-10;

/// Ascending eigenvalues with orthonormal eigenvectors (column `i` ↔ `εᵢ`).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
    degenerate: bool,
    degenerate_ground: bool,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> StateVector {
        StateVector::from_vector_unchecked(self.eigenvectors.column(i).into_owned())
    }

    /// Any cluster of (near-)equal eigenvalues. Rank-1 dephasing is then
    /// basis dependent.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn is_ground_degenerate(&self) -> bool {
        self.degenerate_ground
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()))
    }

    /// `ε_d − ε_1`.
    pub fn bandwidth(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// Components `V† ψ` of a state in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &DVector<C64>) -> DVector<C64> {
        self.eigenvectors.ad_mul(psi)
    }

    /// `V diag(ε) V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(e);
        }
        scaled * v.adjoint()
    }
}

/// Full eigendecomposition of a Hermitian operator.
///
/// Eigenvalues are sorted ascending (ties keep solver order). Inside a
/// degenerate cluster the eigenvectors are replaced by the Gram–Schmidt
/// orthonormalization of the projected computational basis, and every
/// eigenvector is phased so that its largest component is real and positive.
/// The result is a deterministic function of the input matrix.
pub fn eig_hermitian(h: &DenseOperator) -> Result<SpectralDecomposition> {
    let dev = h.hermitian_deviation();
    if dev >= HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let d = h.dim();
    let (values, vectors) = if h.is_diagonal() {
        let values: Vec<f64> = (0..d).map(|i| h.get(i, i).re).collect();
        (values, DMatrix::identity(d, d))
    } else if h.is_real() {
        let real = h.matrix().map(|z| z.re);
        let eig = SymmetricEigen::new(real);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(h.matrix().clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }

    let scale = eigenvalues
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = DEGENERACY_RTOL * scale;
    let mut degenerate = false;
    let mut degenerate_ground = false;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && eigenvalues[end] - eigenvalues[end - 1] < tol {
            end += 1;
        }
        if end - start > 1 {
            degenerate = true;
            degenerate_ground |= start == 0;
            canonicalize_cluster(&mut eigenvectors, start, end);
        }
        start = end;
    }
    for j in 0..d {
        fix_phase(&mut eigenvectors, j);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        degenerate,
        degenerate_ground,
    })
}

fn canonicalize_cluster(v: &mut DMatrix<C64>, start: usize, end: usize) {
    let d = v.nrows();
    let m = end - start;
    let block = v.columns(start, m).into_owned();
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(m);
    for j in 0..d {
        if basis.len() == m {
            break;
        }
        // Projection of e_j onto the cluster: B (B† e_j).
        let coeffs = block.row(j).adjoint();
        let mut w = &block * coeffs;
        for b in &basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
        let norm = w.norm();
        if norm > 1e-6 {
            basis.push(w / C64::new(norm, 0.0));
        }
    }
    // The projected basis always spans the cluster; keep the solver's
    // vectors if round-off ever says otherwise.
    if basis.len() == m {
        for (k, b) in basis.into_iter().enumerate() {
            v.set_column(start + k, &b);
        }
    }
}

fn fix_phase(v: &mut DMatrix<C64>, j: usize) {
    let col = v.column(j);
    let max = col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("maximum is attained");
    let z = col[pivot];
    let phase = z.conj() / z.norm();
    for x in v.column_mut(j).iter_mut() {
        *x *= phase;
    }
}

/// Ground state, most excited state and the maximum capability between them.
#[derive(Debug, Clone)]
pub struct GroundTop {
    pub ground: StateVector,
    pub top: StateVector,
    pub e_max: f64,
    /// Set when the lowest level is degenerate; `ground` is then the first
    /// vector of the canonical cluster basis.
    pub degenerate_ground: bool,
}

impl GroundTop {
    pub fn from_decomposition(spec: &SpectralDecomposition) -> Self {
        GroundTop {
            ground: spec.eigenvector(0),
            top: spec.eigenvector(spec.dim() - 1),
            e_max: spec.bandwidth(),
            degenerate_ground: spec.is_ground_degenerate(),
        }
    }
}

pub fn ground_and_top(h: &DenseOperator) -> Result<GroundTop> {
    Ok(GroundTop::from_decomposition(&eig_hermitian(h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{preset_parameters, sample_chain, PhasePreset, SeedScheme};
    use crate::pauli::{build_chain_reference, embed_pauli, Axis, SystemSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, seed: u64) -> DenseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        DenseOperator::new((&a + a.adjoint()) * C64::new(0.5, 0.0)).unwrap()
    }

    fn check_invariants(h: &DenseOperator, s: &SpectralDecomposition) {
        let hn = s.spectral_norm().max(1e-300);
        for w in s.eigenvalues().windows(2) {
            assert!(w[0] <= w[1]);
        }
        let v = s.eigenvectors();
        let gram = v.adjoint() * v;
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - C64::new(want, 0.0)).norm() < 1e-10);
            }
            let col = v.column(i);
            let r = h.matrix() * col - col * C64::new(s.eigenvalues()[i], 0.0);
            assert!(r.norm() < 1e-9 * hn);
        }
    }

    #[test]
    fn sigma_z() {
        let spec = SystemSpec::chain(1).unwrap();
        let z = embed_pauli(0, Axis::Z, &spec).unwrap();
        let s = eig_hermitian(&z).unwrap();
        assert_eq!(s.eigenvalues(), &[-1.0, 1.0]);
        // ε = −1 ↔ |1⟩, ε = +1 ↔ |0⟩.
        assert_eq!(s.eigenvectors()[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(s.eigenvectors()[(0, 1)], C64::new(1.0, 0.0));
        let gt = GroundTop::from_decomposition(&s);
        assert_eq!(gt.e_max, 2.0);
        assert!(!gt.degenerate_ground);
    }

    #[test]
    fn sigma_x() {
        let spec = SystemSpec::chain(1).unwrap();
        let x = embed_pauli(0, Axis::X, &spec).unwrap();
        let s = eig_hermitian(&x).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = s.eigenvectors();
        assert!((v[(0, 0)] - C64::new(r, 0.0)).norm() < 1e-14);
        assert!((v[(1, 0)] - C64::new(-r, 0.0)).norm() < 1e-14);
        assert!((v[(0, 1)] - C64::new(r, 0.0)).norm() < 1e-14);
        assert!((v[(1, 1)] - C64::new(r, 0.0)).norm() < 1e-14);
        check_invariants(&x, &s);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        for seed in 0..4 {
            let h = random_hermitian(16, seed);
            let s = eig_hermitian(&h).unwrap();
            check_invariants(&h, &s);
            let diff = (s.reconstruct() - h.matrix()).norm();
            assert!(diff < 1e-9 * h.matrix().norm(), "{diff}");
        }
    }

    #[test]
    fn large_random_hermitian_reconstructs() {
        let h = random_hermitian(256, 7);
        let s = eig_hermitian(&h).unwrap();
        let rel = (s.reconstruct() - h.matrix()).norm() / h.matrix().norm();
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn deterministic_output() {
        let h = random_hermitian(32, 3);
        let a = eig_hermitian(&h).unwrap();
        let b = eig_hermitian(&h).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.eigenvectors(), b.eigenvectors());
    }

    #[test]
    fn degenerate_cluster_is_canonical() {
        // −σˣσˣ has two doubly degenerate levels.
        let spec = SystemSpec::chain(2).unwrap();
        let mut h = DenseOperator::zeros(&spec);
        h.add_pauli_term(-1.0, &[(0, Axis::X), (1, Axis::X)])
            .unwrap();
        let s = eig_hermitian(&h).unwrap();
        assert!(s.is_degenerate() && s.is_ground_degenerate());
        let ev = s.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] + 1.0).abs() < 1e-14);
        assert!((ev[2] - 1.0).abs() < 1e-14 && (ev[3] - 1.0).abs() < 1e-14);
        check_invariants(&h, &s);
        // Ground cluster spanned by (|00⟩+|11⟩)/√2 and (|01⟩+|10⟩)/√2;
        // the canonical first vector is the projection of |00⟩.
        let g = s.eigenvector(0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.amplitudes()[0] - C64::new(r, 0.0)).norm() < 1e-12);
        assert!((g.amplitudes()[3] - C64::new(r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_capability() {
        let h = DenseOperator::from_real_diagonal(&[2.0, 0.0, 0.0, -2.0]).unwrap();
        let gt = ground_and_top(&h).unwrap();
        assert_eq!(gt.e_max, 4.0);
        assert_eq!(gt.ground.amplitudes()[3], C64::new(1.0, 0.0));
        assert_eq!(gt.top.amplitudes()[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn chain_capability_matches_full_spectrum() {
        let spec = SystemSpec::chain(8).unwrap();
        let d = preset_parameters(PhasePreset::ChainErgodic);
        let c = sample_chain(&d, 8, SeedScheme::new(5, 17)).unwrap();
        let h = build_chain_reference(&c, &spec).unwrap();
        let s = eig_hermitian(&h).unwrap();
        check_invariants(&h, &s);
        let gt = ground_and_top(&h).unwrap();
        assert!(gt.e_max > 0.0);
        assert_eq!(gt.e_max, s.eigenvalues()[255] - s.eigenvalues()[0]);
        let energy = |psi: &StateVector| psi.expectation(&h);
        assert!((energy(&gt.top) - energy(&gt.ground) - gt.e_max).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_hermitian() {
        let spec = SystemSpec::chain(1).unwrap();
        let y = embed_pauli(0, Axis::Y, &spec).unwrap();
        let m = y.matrix() * C64::new(0.0, 1.0);
        assert!(DenseOperator::new(m).is_err());
    }
}
