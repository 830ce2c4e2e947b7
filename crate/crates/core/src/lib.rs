//! Noise-assisted transitions of a two-level system coupled to the total
//! magnetization of a periodic XY spin chain.
//!
//! Three backends compute the time-maximized transition probability:
//!
//! - [`jw`]: closed-form free-fermion solution of the isotropic chain,
//! - [`ed`]: exact diagonalization of the full system–bath Hamiltonian,
//! - [`meanfield`]: thermodynamic limit with the bath magnetization replaced
//!   by its thermal average.
//!
//! [`sweep`] drives parameter sweeps over any of them.

pub mod ed;
pub mod error;
pub mod jw;
pub mod meanfield;
pub mod operators;
pub mod quadrature;
pub mod result;
pub mod sweep;
pub mod time_search;

pub use error::{Error, Result};
pub use operators::{BathCoupling, DensityMatrix, HermitianOperator, SpinChainParams, TlsParams};
pub use result::{Engine, TransitionResult};
pub use time_search::{TimeSearchConfig, TransitionMeasure};
