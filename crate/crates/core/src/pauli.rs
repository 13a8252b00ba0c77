// SPDX-License-Identifier: Apache-2.0

//! Dense many-body operators built from Pauli strings.
//!
//! Basis convention: site `k` (0-based) is the `k`-th tensor factor from the
//! left, i.e. bit `n - 1 - k` of the basis index. `|0⟩` is the `σᶻ = +1`
//! state, so `σᶻ = diag(+1, -1)`.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::disorder::{ChainCouplings, ChimeraCouplings};
use crate::{Error, Result, C64};

/// Largest system the dense solver is budgeted for.
pub const MAX_SITES: usize = 12;

/// Entrywise tolerance on `A - A†` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Number of qubits in a Chimera unit cell.
pub const CHIMERA_SITES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    IsingChain,
    ChimeraCell,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::IsingChain => "chain",
            ModelKind::ChimeraCell => "chimera",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(ModelKind::IsingChain),
            "chimera" => Ok(ModelKind::ChimeraCell),
            other => Err(Error::config(
                "model",
                format!("unknown model `{other}` (expected `chain` or `chimera`)"),
            )),
        }
    }
}

/// Size and geometry of the battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    n_sites: usize,
    model: ModelKind,
}

impl SystemSpec {
    pub fn new(n_sites: usize, model: ModelKind) -> Result<Self> {
        if !(1..=MAX_SITES).contains(&n_sites) {
            return Err(Error::InvalidSystem(format!(
                "n_sites = {n_sites} outside 1..={MAX_SITES}"
            )));
        }
        if model == ModelKind::ChimeraCell && n_sites != CHIMERA_SITES {
            return Err(Error::InvalidSystem(format!(
                "the Chimera cell has {CHIMERA_SITES} sites, got {n_sites}"
            )));
        }
        Ok(SystemSpec { n_sites, model })
    }

    pub fn chain(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, ModelKind::IsingChain)
    }

    pub fn chimera() -> Self {
        SystemSpec {
            n_sites: CHIMERA_SITES,
            model: ModelKind::ChimeraCell,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A Hermitian matrix of dimension `2^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
}

impl DenseOperator {
    /// Wraps `matrix`, checking squareness, power-of-two size and hermiticity.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || dim == 0 || !dim.is_power_of_two() {
            return Err(Error::BadDimension(dim.max(matrix.ncols())));
        }
        let dev = hermitian_deviation(&matrix);
        if dev >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(DenseOperator { matrix })
    }

    pub fn zeros(spec: &SystemSpec) -> Self {
        DenseOperator {
            matrix: DMatrix::zeros(spec.dim(), spec.dim()),
        }
    }

    pub fn identity(spec: &SystemSpec) -> Self {
        DenseOperator {
            matrix: DMatrix::identity(spec.dim(), spec.dim()),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let m = DMatrix::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    /// `true` when no off-diagonal entry is nonzero.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.matrix[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// Adds `coeff · P` for the Pauli string `P = ⊗ σ^axis` on `factors`.
    ///
    /// Sites not listed carry the identity. A site may appear at most once.
    pub fn add_pauli_term(&mut self, coeff: f64, factors: &[(usize, Axis)]) -> Result<()> {
        let n = self.n_sites();
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ymask = 0usize;
        for &(site, axis) in factors {
            if site >= n {
                return Err(Error::SiteOutOfRange { site, n_sites: n });
            }
            let bit = 1usize << (n - 1 - site);
            if (flip | zmask) & bit != 0 {
                return Err(Error::InvalidParameter(format!(
                    "site {site} repeated in Pauli string"
                )));
            }
            match axis {
                Axis::X => flip |= bit,
                Axis::Y => {
                    flip |= bit;
                    ymask |= bit;
                }
                Axis::Z => zmask |= bit,
            }
        }
        let n_y = ymask.count_ones();
        for row in 0..self.dim() {
            let col = row ^ flip;
            // ⟨b|σʸ|1-b⟩ = -i for b = 0 and +i for b = 1.
            let minus = (row & zmask).count_ones() + (!row & ymask).count_ones();
            let sign = if minus.is_multiple_of(2) { 1.0 } else { -1.0 };
            let phase = match n_y % 4 {
                0 => C64::new(sign, 0.0),
                1 => C64::new(0.0, sign),
                2 => C64::new(-sign, 0.0),
                _ => C64::new(0.0, -sign),
            };
            self.matrix[(row, col)] += phase * coeff;
        }
        Ok(())
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator {
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Mul<f64> for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: f64) -> DenseOperator {
        DenseOperator {
            matrix: &self.matrix * C64::new(rhs, 0.0),
        }
    }
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut dev = 0.0f64;
    for j in 0..d {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `I ⊗ … ⊗ σ^axis ⊗ … ⊗ I` with the Pauli matrix on `site` (0-based).
pub fn embed_pauli(site: usize, axis: Axis, spec: &SystemSpec) -> Result<DenseOperator> {
    let mut op = DenseOperator::zeros(spec);
    op.add_pauli_term(1.0, &[(site, axis)])?;
    Ok(op)
}

/// Open-boundary Ising chain:
/// `H = Σ h σᶻ_k − Σ J¹_k σˣ_k σˣ_{k+1} + Σ J²_k σˣ_k σˣ_{k+2}`.
pub fn build_chain_reference(c: &ChainCouplings, spec: &SystemSpec) -> Result<DenseOperator> {
    let mut h = build_chain_local(c, spec)?;
    add_chain_interactions(&mut h, c, spec)?;
    Ok(h)
}

/// The on-site part `h Σ σᶻ_k` of the chain reference Hamiltonian.
pub fn build_chain_local(c: &ChainCouplings, spec: &SystemSpec) -> Result<DenseOperator> {
    c.check_len(spec.n_sites())?;
    let mut h = DenseOperator::zeros(spec);
    for k in 0..spec.n_sites() {
        h.add_pauli_term(c.h, &[(k, Axis::Z)])?;
    }
    Ok(h)
}

fn add_chain_interactions(
    h: &mut DenseOperator,
    c: &ChainCouplings,
    spec: &SystemSpec,
) -> Result<()> {
    c.check_len(spec.n_sites())?;
    for (k, &j) in c.j1.iter().enumerate() {
        h.add_pauli_term(-j, &[(k, Axis::X), (k + 1, Axis::X)])?;
    }
    for (k, &j) in c.j2.iter().enumerate() {
        h.add_pauli_term(j, &[(k, Axis::X), (k + 2, Axis::X)])?;
    }
    Ok(())
}

/// Edges of the K(4,4) Chimera unit cell: each of sites 0–3 couples to each
/// of sites 4–7, in row-major order.
pub fn chimera_edges() -> [(usize, usize); 16] {
    let mut edges = [(0, 0); 16];
    for a in 0..4 {
        for b in 0..4 {
            edges[4 * a + b] = (a, 4 + b);
        }
    }
    edges
}

/// `H = Σ h_k σᶻ_k + Σ_{⟨k,j⟩} J_kj σᶻ_k σᶻ_j` on the Chimera cell.
pub fn build_chimera_reference(c: &ChimeraCouplings, spec: &SystemSpec) -> Result<DenseOperator> {
    let mut h = build_chimera_local(c, spec)?;
    for (&(a, b), &j) in chimera_edges().iter().zip(&c.j) {
        h.add_pauli_term(j, &[(a, Axis::Z), (b, Axis::Z)])?;
    }
    Ok(h)
}

/// The on-site part `Σ h_k σᶻ_k` of the Chimera reference Hamiltonian.
pub fn build_chimera_local(c: &ChimeraCouplings, spec: &SystemSpec) -> Result<DenseOperator> {
    if spec.model() != ModelKind::ChimeraCell {
        return Err(Error::InvalidSystem(
            "Chimera couplings need a Chimera system".into(),
        ));
    }
    c.check_len()?;
    let mut h = DenseOperator::zeros(spec);
    for (k, &hk) in c.h.iter().enumerate() {
        h.add_pauli_term(hk, &[(k, Axis::Z)])?;
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Drive {
    Static,
    /// `Ω cos(ω t)` with drive frequency `frequency = ω`.
    Periodic {
        frequency: f64,
    },
}

/// Uniform transverse charging field of amplitude `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargingParams {
    pub omega: f64,
    pub drive: Drive,
}

impl ChargingParams {
    pub fn new(omega: f64, drive: Drive) -> Result<Self> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega = {omega} must be ≥ 0"
            )));
        }
        if let Drive::Periodic { frequency } = drive {
            if !(frequency > 0.0 && frequency.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "drive frequency {frequency} must be > 0"
                )));
            }
        }
        Ok(ChargingParams { omega, drive })
    }

    pub fn static_field(omega: f64) -> Result<Self> {
        Self::new(omega, Drive::Static)
    }

    /// Instantaneous field amplitude at time `t`.
    pub fn amplitude(&self, t: f64) -> f64 {
        match self.drive {
            Drive::Static => self.omega,
            Drive::Periodic { frequency } => self.omega * (frequency * t).cos(),
        }
    }
}

/// `Σ_k σˣ_k` with unit amplitude.
pub fn transverse_field(spec: &SystemSpec) -> DenseOperator {
    let mut op = DenseOperator::zeros(spec);
    for k in 0..spec.n_sites() {
        op.add_pauli_term(1.0, &[(k, Axis::X)])
            .expect("site in range by construction");
    }
    op
}

/// Charging Hamiltonian `Ω(t) Σ σˣ_k` at time `t`.
pub fn build_charging(params: &ChargingParams, spec: &SystemSpec, t: f64) -> DenseOperator {
    &transverse_field(spec) * params.amplitude(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pauli_2x2(axis: Axis) -> DMatrix<C64> {
        let z = c(0.0);
        let i = C64::new(0.0, 1.0);
        match axis {
            Axis::X => DMatrix::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
            Axis::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Axis::Z => DMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c(-1.0)]),
        }
    }

    /// Reference construction by explicit Kronecker products.
    fn kron_embed(site: usize, axis: Axis, n: usize) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(1, 1, c(1.0));
        for k in 0..n {
            let f = if k == site {
                pauli_2x2(axis)
            } else {
                DMatrix::identity(2, 2)
            };
            m = m.kronecker(&f);
        }
        m
    }

    #[test]
    fn single_qubit_z() {
        let spec = SystemSpec::chain(1).unwrap();
        let z = embed_pauli(0, Axis::Z, &spec).unwrap();
        assert_eq!(z.get(0, 0), c(1.0));
        assert_eq!(z.get(1, 1), c(-1.0));
        assert_eq!(z.get(0, 1), c(0.0));
    }

    #[test]
    fn x_on_first_of_two() {
        let spec = SystemSpec::chain(2).unwrap();
        let x = embed_pauli(0, Axis::X, &spec).unwrap();
        let ones = [(0, 2), (2, 0), (1, 3), (3, 1)];
        for i in 0..4 {
            for j in 0..4 {
                let want = if ones.contains(&(i, j)) { 1.0 } else { 0.0 };
                assert_eq!(x.get(i, j), c(want), "({i},{j})");
            }
        }
    }

    #[test]
    fn embedding_matches_kronecker_products() {
        for n in 1..=4 {
            let spec = SystemSpec::chain(n).unwrap();
            for site in 0..n {
                for axis in [Axis::X, Axis::Y, Axis::Z] {
                    let fast = embed_pauli(site, axis, &spec).unwrap();
                    assert_eq!(fast.matrix(), &kron_embed(site, axis, n));
                }
            }
        }
    }

    #[test]
    fn pauli_trace_orthogonality() {
        let spec = SystemSpec::chain(3).unwrap();
        let axes = [Axis::X, Axis::Y, Axis::Z];
        for k in 0..3 {
            for j in 0..3 {
                for a in axes {
                    for b in axes {
                        let p = embed_pauli(k, a, &spec).unwrap();
                        let q = embed_pauli(j, b, &spec).unwrap();
                        let tr = (p.matrix() * q.matrix()).trace();
                        let want = if k == j && a == b { 8.0 } else { 0.0 };
                        assert!((tr - c(want)).norm() < 1e-14, "k={k} j={j} {a:?} {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn site_out_of_range() {
        let spec = SystemSpec::chain(2).unwrap();
        assert!(matches!(
            embed_pauli(2, Axis::Z, &spec),
            Err(Error::SiteOutOfRange {
                site: 2,
                n_sites: 2
            })
        ));
    }

    #[test]
    fn system_spec_bounds() {
        assert!(SystemSpec::chain(0).is_err());
        assert!(SystemSpec::chain(13).is_err());
        assert!(SystemSpec::new(6, ModelKind::ChimeraCell).is_err());
        assert!(SystemSpec::new(8, ModelKind::ChimeraCell).is_ok());
    }

    #[test]
    fn chain_local_fields_only() {
        let spec = SystemSpec::chain(2).unwrap();
        let cp = ChainCouplings::new(1.0, vec![0.0], vec![]);
        let h = build_chain_reference(&cp, &spec).unwrap();
        let want = DenseOperator::from_real_diagonal(&[2.0, 0.0, 0.0, -2.0]).unwrap();
        assert_eq!(h, want);
    }

    #[test]
    fn chain_nearest_neighbour_sign() {
        let spec = SystemSpec::chain(2).unwrap();
        let cp = ChainCouplings::new(0.0, vec![1.0], vec![]);
        let h = build_chain_reference(&cp, &spec).unwrap();
        // −σˣ⊗σˣ is the anti-diagonal of −1.
        for i in 0..4 {
            for j in 0..4 {
                let want = if i + j == 3 { -1.0 } else { 0.0 };
                assert_eq!(h.get(i, j), c(want));
            }
        }
    }

    #[test]
    fn chain_n3_norm_identity() {
        let spec = SystemSpec::chain(3).unwrap();
        let cp = ChainCouplings::new(0.6, vec![1.0, 1.0], vec![0.3]);
        let h = build_chain_reference(&cp, &spec).unwrap();
        assert!(h.hermitian_deviation() < HERMITIAN_TOL);
        assert!(h.trace().norm() < 1e-14);
        let hs2: f64 = h.matrix().iter().map(|z| z.norm_sqr()).sum();
        let want = 8.0 * (3.0 * 0.36 + 2.0 + 0.09);
        assert!((hs2 - want).abs() < 1e-12, "{hs2} vs {want}");
    }

    #[test]
    fn chain_length_mismatch() {
        let spec = SystemSpec::chain(4).unwrap();
        let cp = ChainCouplings::new(0.6, vec![1.0, 1.0], vec![0.3, 0.3]);
        assert!(matches!(
            build_chain_reference(&cp, &spec),
            Err(Error::CouplingLength { name: "j1", .. })
        ));
    }

    #[test]
    fn chimera_edge_set_is_complete_bipartite() {
        let edges = chimera_edges();
        for a in 0..4 {
            for b in 4..8 {
                assert!(edges.contains(&(a, b)));
            }
        }
        let mut sorted = edges.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 16);
    }

    #[test]
    fn chimera_zero_couplings() {
        let spec = SystemSpec::chimera();
        let cp = ChimeraCouplings::new(vec![0.0; 8], vec![0.0; 16]);
        let h = build_chimera_reference(&cp, &spec).unwrap();
        assert!(h.matrix().iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn chimera_fields_count_magnetization() {
        let spec = SystemSpec::chimera();
        let cp = ChimeraCouplings::new(vec![1.0; 8], vec![0.0; 16]);
        let h = build_chimera_reference(&cp, &spec).unwrap();
        assert!(h.is_diagonal());
        for i in 0..256usize {
            let down = i.count_ones() as f64;
            let up = 8.0 - down;
            assert_eq!(h.get(i, i), c(up - down));
        }
    }

    #[test]
    fn chimera_uniform_coupling_ground_energy() {
        let spec = SystemSpec::chimera();
        let cp = ChimeraCouplings::new(vec![0.0; 8], vec![1.0; 16]);
        let h = build_chimera_reference(&cp, &spec).unwrap();
        // Enumerate bit strings directly: E = Σ_{a<4≤b} z_a z_b.
        let mut ground = f64::INFINITY;
        for i in 0..256usize {
            let z = |k: usize| if i >> (7 - k) & 1 == 0 { 1.0 } else { -1.0 };
            let mut e = 0.0;
            for a in 0..4 {
                for b in 4..8 {
                    e += z(a) * z(b);
                }
            }
            assert_eq!(h.get(i, i), c(e));
            ground = f64::min(ground, e);
        }
        assert_eq!(ground, -16.0);
    }

    #[test]
    fn chimera_wrong_edge_count() {
        let spec = SystemSpec::chimera();
        let cp = ChimeraCouplings::new(vec![0.0; 8], vec![0.0; 15]);
        assert!(matches!(
            build_chimera_reference(&cp, &spec),
            Err(Error::CouplingLength { name: "j", .. })
        ));
    }

    #[test]
    fn chimera_commutes_with_every_z_chain_does_not() {
        let spec = SystemSpec::chimera();
        let cp = ChimeraCouplings::new(
            (0..8).map(|k| 0.1 * k as f64 - 0.3).collect(),
            (0..16).map(|k| 0.05 * k as f64 - 0.4).collect(),
        );
        let h = build_chimera_reference(&cp, &spec).unwrap();
        for k in 0..8 {
            let z = embed_pauli(k, Axis::Z, &spec).unwrap();
            let comm = h.matrix() * z.matrix() - z.matrix() * h.matrix();
            assert!(comm.norm() < 1e-12);
        }
        let spec = SystemSpec::chain(4).unwrap();
        let cp = ChainCouplings::new(0.6, vec![1.0, 0.5, 1.5], vec![0.3, 0.3]);
        let h = build_chain_reference(&cp, &spec).unwrap();
        let z = embed_pauli(1, Axis::Z, &spec).unwrap();
        let comm = h.matrix() * z.matrix() - z.matrix() * h.matrix();
        assert!(comm.norm() > 0.1);
    }

    #[test]
    fn static_charging_single_site() {
        let spec = SystemSpec::chain(1).unwrap();
        let p = ChargingParams::static_field(1.0).unwrap();
        let h = build_charging(&p, &spec, 7.0);
        assert_eq!(h, embed_pauli(0, Axis::X, &spec).unwrap());
    }

    #[test]
    fn periodic_charging_at_zero_and_quarter_period() {
        let spec = SystemSpec::chain(3).unwrap();
        let stat = ChargingParams::static_field(1.0).unwrap();
        let per = ChargingParams::new(1.0, Drive::Periodic { frequency: 0.3 }).unwrap();
        assert_eq!(
            build_charging(&per, &spec, 0.0),
            build_charging(&stat, &spec, 0.0)
        );
        let quarter = build_charging(&per, &spec, PI / (2.0 * 0.3));
        assert!(quarter.matrix().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn charging_params_validation() {
        assert!(ChargingParams::static_field(-1.0).is_err());
        assert!(ChargingParams::new(1.0, Drive::Periodic { frequency: 0.0 }).is_err());
    }

    #[test]
    fn dense_operator_rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(DenseOperator::new(m), Err(Error::NotHermitian(_))));
        let m = DMatrix::<C64>::zeros(3, 3);
        assert!(matches!(DenseOperator::new(m), Err(Error::BadDimension(3))));
    }
}
