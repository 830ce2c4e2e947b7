use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Backend that produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    JwExact,
    Ed,
    Meanfield,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::JwExact => "jw_exact",
            Engine::Ed => "ed",
            Engine::Meanfield => "meanfield",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maximized transition probability from a finite-chain engine.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionResult {
    pub p_tr: f64,
    pub t_star: f64,
    pub engine: Engine,
    pub diagnostics: BTreeMap<String, f64>,
}
