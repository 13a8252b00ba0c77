// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use qbattery::config::{parse_delta_list, RawConfig};
use qbattery::cost::realization_cost;
use qbattery::disorder::{
    sample_chain, sample_chimera, ChainCouplings, Couplings, DisorderSpec, NextNearest, SeedScheme,
};
use qbattery::dynamics::{propagate_static, TimeGrid};
use qbattery::ensemble::{aggregate, run_realization, EnsembleConfig};
use qbattery::metrics::{ergotropy, ergotropy_split, pure_state_metrics, DensityMatrix};
use qbattery::pauli::{build_chain_reference, build_charging, ChargingParams, SystemSpec};
use qbattery::spectral::eig_hermitian;
use qbattery::validate::{random_density, random_state};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain_couplings(n: usize) -> impl Strategy<Value = ChainCouplings> {
    (
        -2.0..2.0f64,
        prop::collection::vec(-3.0..3.0f64, n - 1),
        prop::collection::vec(-1.0..1.0f64, n.saturating_sub(2)),
    )
        .prop_map(|(h, j1, j2)| ChainCouplings::new(h, j1, j2))
}

fn sized_chain() -> impl Strategy<Value = (usize, ChainCouplings)> {
    (2usize..=5).prop_flat_map(|n| (Just(n), chain_couplings(n)))
}

fn disorder(delta: f64, random_j2: bool) -> DisorderSpec {
    DisorderSpec {
        delta,
        j0: 1.0,
        h: 0.6,
        j2: if random_j2 {
            NextNearest::Random
        } else {
            NextNearest::Fixed(0.3)
        },
        preset: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reference_hamiltonian_is_traceless_and_hermitian((n, c) in sized_chain()) {
        let spec = SystemSpec::chain(n).unwrap();
        let h = build_chain_reference(&c, &spec).unwrap();
        prop_assert!(h.trace().norm() < 1e-12);
        prop_assert!(h.hermitian_deviation() < 1e-12);
        prop_assert!(h.is_real());
    }

    #[test]
    fn eigendecomposition_reconstructs((n, c) in sized_chain()) {
        let spec = SystemSpec::chain(n).unwrap();
        let h = build_chain_reference(&c, &spec).unwrap();
        let e = eig_hermitian(&h).unwrap();
        prop_assert!((e.reconstruct() - h.matrix()).norm() < 1e-9);
        prop_assert!(e.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        let v = e.eigenvectors();
        let d = v.nrows();
        prop_assert!((v.adjoint() * v - nalgebra::DMatrix::identity(d, d)).norm() < 1e-9);
    }

    #[test]
    fn chain_samples_stay_in_range(
        delta in 0.0..8.0f64,
        seed in any::<u64>(),
        n in 0u64..1000,
        random_j2 in any::<bool>(),
    ) {
        let d = disorder(delta, random_j2);
        let c = sample_chain(&d, 8, SeedScheme::new(seed, n)).unwrap();
        prop_assert_eq!(c.j1.len(), 7);
        for j in &c.j1 {
            prop_assert!(*j >= 1.0 - delta && *j <= 1.0 + delta);
        }
        for j in &c.j2 {
            if random_j2 {
                prop_assert!(j.abs() <= delta);
            } else {
                prop_assert_eq!(*j, 0.3);
            }
        }
        let again = sample_chain(&d, 8, SeedScheme::new(seed, n)).unwrap();
        prop_assert_eq!(c, again);
    }

    #[test]
    fn chimera_samples_stay_in_range(delta in 0.0..8.0f64, seed in any::<u64>()) {
        let c = sample_chimera(&disorder(delta, false), SeedScheme::new(seed, 0)).unwrap();
        prop_assert_eq!(c.h.len(), 8);
        prop_assert_eq!(c.j.len(), 16);
        prop_assert!(c.h.iter().chain(&c.j).all(|v| v.abs() <= delta));
    }

    #[test]
    fn static_evolution_keeps_norm_and_bounds_metrics(
        (n, c) in sized_chain(),
        omega in 0.0..3.0f64,
    ) {
        let spec = SystemSpec::chain(n).unwrap();
        let h_ref = build_chain_reference(&c, &spec).unwrap();
        let href = eig_hermitian(&h_ref).unwrap();
        prop_assume!(href.bandwidth() > 1e-6);
        let h = &h_ref + &build_charging(&ChargingParams::static_field(omega).unwrap(), &spec, 0.0);
        let grid = TimeGrid::log_spaced(1e-2, 1e2, 12).unwrap();
        let ground = href.eigenvector(0);
        for psi in propagate_static(&h, &ground, &grid).unwrap() {
            prop_assert!((psi.norm() - 1.0).abs() < 1e-9);
            let m = pure_state_metrics(&psi, &href);
            let tol = 1e-9 * href.bandwidth().max(1.0);
            prop_assert!(m.ergotropy >= -tol && m.ergotropy <= href.bandwidth() + tol);
            prop_assert!(m.coherent >= -tol && m.incoherent >= -tol);
            prop_assert!(m.fidelity <= 1.0 + 1e-12);
            let max_l1 = ((1u64 << n) - 1) as f64;
            prop_assert!(m.l1_coherence >= -1e-12 && m.l1_coherence <= max_l1 + 1e-9);
        }
    }

    #[test]
    fn mixed_state_ergotropy_is_bounded(seed in any::<u64>(), (n, c) in sized_chain()) {
        prop_assume!(n <= 3);
        let spec = SystemSpec::chain(n).unwrap();
        let href = eig_hermitian(&build_chain_reference(&c, &spec).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(spec.dim(), &mut rng);
        let split = ergotropy_split(&rho, &href).unwrap();
        prop_assert!(split.total >= -1e-10);
        prop_assert!(split.incoherent >= -1e-10);
        prop_assert!(split.total <= href.bandwidth() + 1e-10);
        let pure = DensityMatrix::from_pure(&random_state(spec.dim(), &mut rng));
        let e = ergotropy(&pure, &href).unwrap();
        let fast = pure_state_metrics(&random_state(spec.dim(), &mut ChaCha8Rng::seed_from_u64(seed)), &href);
        prop_assert!(e >= -1e-10 && fast.ergotropy >= -1e-10);
    }

    #[test]
    fn charging_cost_is_monotone_in_omega(
        (n, c) in sized_chain(),
        w1 in 0.0..2.0f64,
        dw in 0.0..2.0f64,
    ) {
        let spec = SystemSpec::chain(n).unwrap();
        let couplings = Couplings::Chain(c);
        let lo = realization_cost(&couplings, &spec, &ChargingParams::static_field(w1).unwrap()).unwrap();
        let hi = realization_cost(&couplings, &spec, &ChargingParams::static_field(w1 + dw).unwrap()).unwrap();
        prop_assert!(lo.c_ch >= -1e-12);
        prop_assert!(hi.c_ch >= lo.c_ch - 1e-9);
        prop_assert!((lo.c_ch - lo.c_ch_closed).abs() < 1e-9);
        prop_assert!((lo.c_int - lo.c_int_closed).abs() < 1e-9);
    }

    #[test]
    fn aggregation_ignores_record_order(seed in any::<u64>(), rot in 0usize..5) {
        let mut cfg = EnsembleConfig::new(
            SystemSpec::chain(4).unwrap(),
            disorder(2.0, false),
            ChargingParams::static_field(1.0).unwrap(),
            TimeGrid::log_spaced(1e-2, 1e2, 8).unwrap(),
        );
        cfg.master_seed = seed;
        let recs: Vec<_> = (0..5).map(|n| run_realization(&cfg, n).unwrap()).collect();
        let mut shuffled = recs.clone();
        shuffled.rotate_left(rot);
        prop_assert_eq!(aggregate(&recs).unwrap(), aggregate(&shuffled).unwrap());
    }

    #[test]
    fn rendered_configs_round_trip(
        chimera in any::<bool>(),
        n_sites in 1usize..=12,
        delta in 0.0..10.0f64,
        omega in 0.0..5.0f64,
        n_realizations in 1usize..1000,
        seed in any::<u64>(),
        points in 1usize..500,
    ) {
        let mut text = format!(
            "model = {}\ndelta = {delta}\nomega = {omega}\nn_realizations = {n_realizations}\n\
             seed = {seed}\ngrid.points = {points}\n",
            if chimera { "chimera" } else { "chain" }
        );
        if !chimera {
            text.push_str(&format!("n_sites = {n_sites}\n"));
        }
        let p = RawConfig::parse_str(&text).unwrap().build().unwrap().ensemble;
        prop_assert_eq!(p.disorder.delta, delta);
        prop_assert_eq!(p.charging.omega, omega);
        prop_assert_eq!(p.n_realizations, n_realizations);
        prop_assert_eq!(p.master_seed, seed);
        prop_assert_eq!(p.grid.len(), points + 1);
        prop_assert_eq!(p.system.n_sites(), if chimera { 8 } else { n_sites });
    }

    #[test]
    fn config_parser_never_panics(text in "\\PC*") {
        if let Ok(raw) = RawConfig::parse_str(&text) {
            let _ = raw.build();
        }
    }

    #[test]
    fn delta_lists_round_trip(ds in prop::collection::vec(0.0..100.0f64, 1..8)) {
        let text = ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_delta_list(&text).unwrap(), ds);
    }
}
