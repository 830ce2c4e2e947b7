use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ChainLength;
use crate::result::Engine;

/// `jw_exact` and `ed` values at the same grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub p_tr_ed: Option<f64>,
    pub difference: Option<f64>,
}

/// One evaluated grid point, carrying its full parameter tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub engine: Engine,
    pub n_sites: ChainLength,
    pub gamma: f64,
    pub h: f64,
    pub beta: f64,
    pub delta: f64,
    pub tunneling: f64,
    pub coupling: f64,
    pub p_tr: Option<f64>,
    pub t_star: Option<f64>,
    pub m_z: Option<f64>,
    pub dptr_dh: Option<f64>,
    /// `ok`, or `error: <message>`.
    pub status: String,
    pub wall_time_s: Option<f64>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

impl ResultRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Same parameters except `h`.
    pub(crate) fn same_curve(&self, other: &ResultRecord) -> bool {
        self.engine == other.engine
            && self.n_sites == other.n_sites
            && self.gamma == other.gamma
            && self.beta == other.beta
            && self.delta == other.delta
            && self.tunneling == other.tunneling
            && self.coupling == other.coupling
    }
}
