//! Engines checked against each other and against the dense reference path.

use spinbath::ed::{
    self, eigh, evolve_reduced, thermal_state, transition_probability_ed, transition_probability_ed_with, BlockedDynamics,
    Blocking, EdOptions,
};
use spinbath::jw::{occupation_weights, single_particle_energies, transition_probability_exact};
use spinbath::operators::{build_h_total, build_h_xy, magnon_count};
use spinbath::{BathCoupling, SpinChainParams, TimeSearchConfig, TlsParams, TransitionMeasure};

fn tls() -> TlsParams {
    TlsParams::new(0.2, 0.1).unwrap()
}

fn coupling() -> BathCoupling {
    BathCoupling::new(0.05).unwrap()
}

#[test]
fn jw_matches_ed_on_isotropic_chains() {
    let search = TimeSearchConfig::default();
    for n in [2, 3, 4, 6] {
        for h in [0.0, 0.45, 1.0, 1.3] {
            for beta in [1.0, 40.0] {
                let chain = SpinChainParams::new(n, 0.0, h).unwrap();
                let jw = transition_probability_exact(&chain, &tls(), &coupling(), beta, &search).unwrap();
                let ed = transition_probability_ed(&chain, &tls(), &coupling(), beta, &search).unwrap();
                assert!(
                    (jw.p_tr - ed.p_tr).abs() < 1e-8,
                    "N={n} h={h} beta={beta}: jw {} ed {}",
                    jw.p_tr,
                    ed.p_tr
                );
            }
        }
    }
}

#[test]
fn jw_matches_ed_with_coherence_measure() {
    let search = TimeSearchConfig {
        measure: TransitionMeasure::Coherence,
        ..TimeSearchConfig::default()
    };
    let chain = SpinChainParams::new(4, 0.0, 0.7).unwrap();
    let jw = transition_probability_exact(&chain, &tls(), &coupling(), 10.0, &search).unwrap();
    let ed = transition_probability_ed(&chain, &tls(), &coupling(), 10.0, &search).unwrap();
    assert!((jw.p_tr - ed.p_tr).abs() < 1e-8, "{} vs {}", jw.p_tr, ed.p_tr);
}

#[test]
fn blocking_does_not_change_results() {
    let search = TimeSearchConfig::default();
    for (n, gamma) in [(3, 0.0), (4, 0.0), (3, 0.6), (5, 1.0)] {
        let chain = SpinChainParams::new(n, gamma, 0.4).unwrap();
        let run = |blocking| {
            let opts = EdOptions {
                blocking,
                ..EdOptions::default()
            };
            transition_probability_ed_with(&chain, &tls(), &coupling(), 5.0, &search, &opts)
                .unwrap()
                .p_tr
        };
        let dense = run(Blocking::None);
        let parity = run(Blocking::Parity);
        let auto = run(Blocking::Auto);
        assert!((dense - parity).abs() < 1e-10, "N={n} γ={gamma}: {dense} vs {parity}");
        assert!((dense - auto).abs() < 1e-10, "N={n} γ={gamma}: {dense} vs {auto}");
    }
}

#[test]
fn magnetization_blocking_needs_isotropy() {
    let chain = SpinChainParams::new(3, 0.5, 0.4).unwrap();
    let opts = EdOptions {
        blocking: Blocking::Magnetization,
        ..EdOptions::default()
    };
    let err = transition_probability_ed_with(&chain, &tls(), &coupling(), 5.0, &TimeSearchConfig::default(), &opts)
        .unwrap_err();
    assert!(err.to_string().contains("gamma = 0"), "{err}");
}

#[test]
fn blocked_profile_matches_dense_evolution() {
    let times: Vec<f64> = (0..9).map(|i| 3.7 * i as f64).collect();
    for (n, gamma, h, beta) in [(3, 0.8, 0.5, 2.0), (4, 0.0, 0.9, 10.0), (2, 0.3, 0.0, 1.0)] {
        let chain = SpinChainParams::new(n, gamma, h).unwrap();
        let htot = eigh(&build_h_total(&tls(), &chain, &coupling()).unwrap()).unwrap();
        let rho0 = ed::initial_state(&chain, beta).unwrap();
        let reference = evolve_reduced(&htot, &rho0, &times).unwrap();
        let blocked = BlockedDynamics::new(&chain, &tls(), &coupling(), beta, Blocking::Auto, TransitionMeasure::Population)
            .unwrap()
            .profile(&times);
        let coherent = BlockedDynamics::new(&chain, &tls(), &coupling(), beta, Blocking::Auto, TransitionMeasure::Coherence)
            .unwrap()
            .coherence(&times);
        for ((rho, p), c) in reference.iter().zip(&blocked).zip(&coherent) {
            assert!((rho.get(0, 0).re - p).abs() < 1e-10, "N={n}: {} vs {p}", rho.get(0, 0).re);
            assert!((rho.get(1, 0) - c).norm() < 1e-10, "N={n}: {} vs {c}", rho.get(1, 0));
        }
    }
}

#[test]
fn occupation_weights_match_dense_gibbs_state() {
    for n in [2, 3, 4, 6] {
        for (h, beta) in [(0.0, 1.0), (0.3, 40.0), (1.0, 10.0), (1.3, 40.0)] {
            let chain = SpinChainParams::new(n, 0.0, h).unwrap();
            let w = occupation_weights(&single_particle_energies(&chain).unwrap(), beta).unwrap();
            let rho = thermal_state(&build_h_xy(&chain).unwrap(), beta).unwrap();
            let mut dense = vec![0.0; n + 1];
            for b in 0..1usize << n {
                dense[magnon_count(b)] += rho.get(b, b).re;
            }
            for (k, (a, b)) in w.weights().iter().zip(&dense).enumerate() {
                assert!((a - b).abs() < 1e-10, "N={n} h={h} β={beta} n={k}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn ed_cap_is_enforced() {
    let chain = SpinChainParams::new(13, 0.5, 0.5).unwrap();
    let err = transition_probability_ed(&chain, &tls(), &coupling(), 1.0, &TimeSearchConfig::default()).unwrap_err();
    assert!(err.to_string().contains("capped at 12"), "{err}");
}
