//! Exact diagonalization backend for any anisotropy.
//!
//! [`eigh`], [`thermal_state`], [`evolve_reduced`] and [`partial_trace_bath`]
//! work on full dense operators and serve as building blocks and checks.
//! [`transition_probability_ed`] uses the symmetry-blocked solver in
//! [`sectors`], which never forms the joint density matrix.

mod dynamics;
pub mod sectors;
mod spectral;

pub use dynamics::{evolve_full, evolve_reduced, partial_trace_bath, EigenbasisState};
pub use sectors::{bath_sectors, BlockedDynamics, Blocking};
pub use spectral::{boltzmann_weights, eigh, thermal_state, thermal_state_from, SpectralDecomposition};

use crate::error::{Error, Result};
use crate::jw::slowest_rabi_frequency;
use crate::operators::{BathCoupling, DensityMatrix, HermitianOperator, SpinChainParams, TlsParams, DEFAULT_MAX_BATH_SITES};
use crate::result::{Engine, TransitionResult};
use crate::time_search::{maximize, TimeSearchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdOptions {
    pub blocking: Blocking,
    pub max_bath_sites: usize,
}

impl Default for EdOptions {
    fn default() -> Self {
        Self {
            blocking: Blocking::Auto,
            max_bath_sites: DEFAULT_MAX_BATH_SITES,
        }
    }
}

pub fn transition_probability_ed(
    chain: &SpinChainParams,
    tls: &TlsParams,
    g: &BathCoupling,
    beta: f64,
    search: &TimeSearchConfig,
) -> Result<TransitionResult> {
    transition_probability_ed_with(chain, tls, g, beta, search, &EdOptions::default())
}

pub fn transition_probability_ed_with(
    chain: &SpinChainParams,
    tls: &TlsParams,
    g: &BathCoupling,
    beta: f64,
    search: &TimeSearchConfig,
    options: &EdOptions,
) -> Result<TransitionResult> {
    search.validate()?;
    let n = chain.n_sites();
    if n > options.max_bath_sites {
        return Err(Error::Resource(format!(
            "ed engine is capped at {} bath sites (dimension {}); requested {n}",
            options.max_bath_sites,
            2usize << options.max_bath_sites.min(60)
        )));
    }
    let dynamics = BlockedDynamics::new(chain, tls, g, beta, options.blocking, search.measure)?;
    let omega_min = slowest_rabi_frequency(tls, g, n);
    let out = maximize(search, omega_min, |ts| dynamics.profile(ts), |t| dynamics.profile(&[t])[0])?;
    let mut diagnostics = out.diagnostics;
    diagnostics.insert("omega_min".into(), omega_min);
    diagnostics.insert("sectors".into(), dynamics.sector_count as f64);
    diagnostics.insert("largest_block".into(), dynamics.largest_block as f64);
    Ok(TransitionResult {
        p_tr: out.value.clamp(0.0, 1.0),
        t_star: out.t_star,
        engine: Engine::Ed,
        diagnostics,
    })
}

/// `|↓⟩⟨↓| ⊗ e^{−βH_XY}/Z` on the joint space.
pub fn initial_state(chain: &SpinChainParams, beta: f64) -> Result<DensityMatrix> {
    let bath = thermal_state(&crate::operators::build_h_xy(chain)?, beta)?;
    let down = DensityMatrix::new(HermitianOperator::diagonal(&[0.0, 1.0]))?;
    Ok(down.tensor(&bath))
}
