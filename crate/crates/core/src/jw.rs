//! Exact solution of the isotropic (`γ = 0`) chain through its free-fermion
//! structure.
//!
//! `H_XX` commutes with the coupling, so each bath eigenstate with `n`
//! magnons only shifts the upper level of the two-level system. The bath
//! therefore enters through the thermal probability `W_n` of holding `n`
//! magnons, and the reduced dynamics is a `W_n`-weighted mixture of
//! two-level Rabi problems with detuning `Δ − Γ(1 − 2n/N)`.
//!
//! On a periodic ring the fermion momenta depend on fermion parity: states
//! with an even magnon number live on `φ_k = 2π(k + ½)/N`, odd ones on
//! `φ_k = 2πk/N`. Single-particle energies are `e_k = 2(h − J cos φ_k)`,
//! measured from the fully polarized state.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::operators::{BathCoupling, SpinChainParams, TlsParams};
use crate::result::{Engine, TransitionResult};
use crate::time_search::{maximize, TimeSearchConfig, TransitionMeasure};

const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleParticleSpectrum {
    /// Antiperiodic momenta, used for even magnon numbers.
    pub even_sector_energies: Vec<f64>,
    /// Periodic momenta, used for odd magnon numbers.
    pub odd_sector_energies: Vec<f64>,
}

impl SingleParticleSpectrum {
    pub fn n_sites(&self) -> usize {
        self.even_sector_energies.len()
    }

    /// Energies on the momentum grid matching the parity of `n`.
    pub fn sector_for(&self, n: usize) -> &[f64] {
        if n % 2 == 0 {
            &self.even_sector_energies
        } else {
            &self.odd_sector_energies
        }
    }

    /// Lowest many-body energy with exactly `n` magnons, relative to the
    /// polarized state.
    pub fn lowest_energy_with(&self, n: usize) -> f64 {
        let mut e = self.sector_for(n).to_vec();
        e.sort_by(f64::total_cmp);
        e[..n].iter().sum()
    }
}

fn require_isotropic(chain: &SpinChainParams) -> Result<()> {
    if !chain.is_isotropic() {
        return Err(Error::Unsupported(format!(
            "the free-fermion solution requires gamma = 0 (got {}); use the ed engine",
            chain.anisotropy()
        )));
    }
    Ok(())
}

pub fn single_particle_energies(chain: &SpinChainParams) -> Result<SingleParticleSpectrum> {
    require_isotropic(chain)?;
    let n = chain.n_sites();
    let energy = |phi: f64| 2.0 * (chain.field() - chain.coupling() * phi.cos());
    let grid = |shift: f64| -> Vec<f64> {
        (0..n)
            .map(|k| energy(2.0 * PI * (k as f64 + shift) / n as f64))
            .collect()
    };
    Ok(SingleParticleSpectrum {
        even_sector_energies: grid(0.5),
        odd_sector_energies: grid(0.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GroundStateOccupation {
    /// Smallest magnon number among the lowest-energy fillings.
    pub n: usize,
    /// Several magnon numbers share the ground energy (zero modes or a
    /// level crossing).
    pub degenerate: bool,
}

pub fn ground_state_occupation(chain: &SpinChainParams) -> Result<GroundStateOccupation> {
    let spec = single_particle_energies(chain)?;
    let n_sites = chain.n_sites();
    let energies: Vec<f64> = (0..=n_sites).map(|n| spec.lowest_energy_with(n)).collect();
    let best = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = 1.0 + best.abs();
    let ties: Vec<usize> = (0..=n_sites)
        .filter(|&n| energies[n] - best <= ZERO_MODE_TOL * scale)
        .collect();
    Ok(GroundStateOccupation {
        n: ties[0],
        degenerate: ties.len() > 1,
    })
}

/// Fields at which the ground-state magnon number drops from `n` to `n − 1`,
/// for `n = 1..=N/2`, in descending order of `h` (first entry is `h = J`).
pub fn occupation_change_fields(n_sites: usize, coupling: f64) -> Result<Vec<f64>> {
    let chain = SpinChainParams::with_coupling(n_sites, coupling, 0.0, 0.0)?;
    let spec = single_particle_energies(&chain)?;
    // at h = 0, E_n = −2J S_n with S_n the sum of the n largest cosines
    let lowest = |n: usize| spec.lowest_energy_with(n);
    Ok((1..=n_sites / 2)
        .map(|n| 0.5 * (lowest(n - 1) - lowest(n)))
        .collect())
}

/// Thermal probability `W_n` that the bath holds `n` magnons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationWeights {
    weights: Vec<f64>,
    /// `None` marks the infinite-temperature limit.
    beta: Option<f64>,
}

impl OccupationWeights {
    /// `W_n = C(N, n) / 2^N`.
    pub fn infinite_temperature(n_sites: usize) -> Self {
        let mut w = vec![1.0_f64; n_sites + 1];
        for n in 1..=n_sites {
            w[n] = w[n - 1] * (n_sites - n + 1) as f64 / n as f64;
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        Self {
            weights: w,
            beta: None,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn n_sites(&self) -> usize {
        self.weights.len() - 1
    }

    /// Thermal average of `m_z = 1 − 2n/N`.
    pub fn mean_magnetization(&self) -> f64 {
        let n_sites = self.n_sites() as f64;
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * (1.0 - 2.0 * n as f64 / n_sites))
            .sum()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Logarithms of the coefficients of `Π_k (1 + x e^{−β e_k})`.
fn log_generating_coefficients(energies: &[f64], beta: f64) -> Vec<f64> {
    let mut log_c = vec![f64::NEG_INFINITY; energies.len() + 1];
    log_c[0] = 0.0;
    for (k, &e) in energies.iter().enumerate() {
        let term = -beta * e;
        for n in (1..=k + 1).rev() {
            log_c[n] = log_add_exp(log_c[n], log_c[n - 1] + term);
        }
    }
    log_c
}

/// Thermal magnon-number distribution via the generating polynomial of each
/// momentum grid, `O(N²)`. Coefficients are kept in log space and shifted by
/// the largest sector weight before exponentiation, so any finite `β` is safe.
pub fn occupation_weights(spec: &SingleParticleSpectrum, beta: f64) -> Result<OccupationWeights> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain(format!(
            "beta must be finite and > 0, got {beta} (use OccupationWeights::infinite_temperature)"
        )));
    }
    let even = log_generating_coefficients(&spec.even_sector_energies, beta);
    let odd = log_generating_coefficients(&spec.odd_sector_energies, beta);
    let log_w: Vec<f64> = (0..=spec.n_sites())
        .map(|n| if n % 2 == 0 { even[n] } else { odd[n] })
        .collect();
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(OccupationWeights {
        weights: w,
        beta: Some(beta),
    })
}

/// `Δ̃_n = Δ − Γ(1 − 2n/N)`.
///
/// Panics if `n > N`.
pub fn effective_detuning(n: usize, chain: &SpinChainParams, tls: &TlsParams, g: &BathCoupling) -> f64 {
    detuning_for(n, chain.n_sites(), tls, g)
}

pub(crate) fn detuning_for(n: usize, n_sites: usize, tls: &TlsParams, g: &BathCoupling) -> f64 {
    assert!(n <= n_sites, "magnon number {n} exceeds chain length {n_sites}");
    tls.gap() - g.strength() * (1.0 - 2.0 * n as f64 / n_sites as f64)
}

/// Slowest Rabi frequency over every magnon sector `n = 0..=N`; sets the
/// time-search horizon for both finite-chain engines.
pub fn slowest_rabi_frequency(tls: &TlsParams, g: &BathCoupling, n_sites: usize) -> f64 {
    (0..=n_sites)
        .map(|n| tls.rabi_frequency(detuning_for(n, n_sites, tls, g)))
        .fold(f64::INFINITY, f64::min)
}

/// Upper-level population at time `t` starting from `|↓⟩` with detuning `δ`.
pub fn rabi_population(delta_eff: f64, tls: &TlsParams, t: f64) -> f64 {
    let omega = tls.rabi_frequency(delta_eff);
    let t2 = tls.tunneling() * tls.tunneling();
    t2 / (omega * omega) * (omega * t).sin().powi(2)
}

/// `⟨↓|ρ(t)|↑⟩` for the pure two-level evolution from `|↓⟩`.
pub fn rabi_coherence(delta_eff: f64, tls: &TlsParams, t: f64) -> Complex64 {
    let omega = tls.rabi_frequency(delta_eff);
    let (s, c) = (omega * t).sin_cos();
    let up = Complex64::new(0.0, -tls.tunneling() * s / omega);
    let down = Complex64::new(c, 0.5 * delta_eff * s / omega);
    down * up.conj()
}

/// Profile of the mixture `Σ_n W_n p_n(t)`, accumulated in index order.
struct MixtureProfile {
    weights: Vec<f64>,
    detunings: Vec<f64>,
    tls: TlsParams,
    measure: TransitionMeasure,
}

impl MixtureProfile {
    fn at(&self, t: f64) -> f64 {
        match self.measure {
            TransitionMeasure::Population => self
                .weights
                .iter()
                .zip(&self.detunings)
                .map(|(w, &d)| w * rabi_population(d, &self.tls, t))
                .sum(),
            TransitionMeasure::Coherence => self
                .weights
                .iter()
                .zip(&self.detunings)
                .map(|(w, &d)| rabi_coherence(d, &self.tls, t) * *w)
                .sum::<Complex64>()
                .norm_sqr(),
        }
    }
}

pub fn transition_probability_exact(
    chain: &SpinChainParams,
    tls: &TlsParams,
    g: &BathCoupling,
    beta: f64,
    search: &TimeSearchConfig,
) -> Result<TransitionResult> {
    let spec = single_particle_energies(chain)?;
    let weights = occupation_weights(&spec, beta)?;
    transition_probability_from_weights(&weights, tls, g, search)
}

/// Time-maximized mixture for an arbitrary occupation distribution.
pub fn transition_probability_from_weights(
    weights: &OccupationWeights,
    tls: &TlsParams,
    g: &BathCoupling,
    search: &TimeSearchConfig,
) -> Result<TransitionResult> {
    let n_sites = weights.n_sites();
    let profile = MixtureProfile {
        weights: weights.weights().to_vec(),
        detunings: (0..=n_sites).map(|n| detuning_for(n, n_sites, tls, g)).collect(),
        tls: *tls,
        measure: search.measure,
    };
    let omega_min = slowest_rabi_frequency(tls, g, n_sites);
    let out = maximize(
        search,
        omega_min,
        |ts| ts.iter().map(|&t| profile.at(t)).collect(),
        |t| profile.at(t),
    )?;
    let mut diagnostics = out.diagnostics;
    diagnostics.insert("omega_min".into(), omega_min);
    Ok(TransitionResult {
        p_tr: out.value.clamp(0.0, 1.0),
        t_star: out.t_star,
        engine: Engine::JwExact,
        diagnostics,
    })
}
