//! Maximization of a transition profile `p(t)` over a finite horizon:
//! a uniform coarse grid followed by golden-section refinement around the
//! best grid point.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Which system observable gets maximized over time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionMeasure {
    /// `⟨↑|ρ_S(t)|↑⟩` starting from `|↓⟩`.
    #[default]
    Population,
    /// `|⟨↓|ρ_S(t)|↑⟩|²`, kept for comparison only.
    Coherence,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeSearchConfig {
    /// Horizon is `horizon_multiplier / Ω_min`.
    pub horizon_multiplier: f64,
    pub coarse_points: usize,
    /// Refinement stops once the bracket is narrower than `refine_tolerance / Ω_min`.
    pub refine_tolerance: f64,
    pub measure: TransitionMeasure,
}

impl Default for TimeSearchConfig {
    fn default() -> Self {
        Self {
            horizon_multiplier: 8.0 * PI,
            coarse_points: 2048,
            refine_tolerance: 1e-6,
            measure: TransitionMeasure::Population,
        }
    }
}

impl TimeSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_points < 64 {
            return Err(domain(format!("coarse_points must be >= 64, got {}", self.coarse_points)));
        }
        if !(self.refine_tolerance > 0.0 && self.refine_tolerance.is_finite()) {
            return Err(domain("refine_tolerance must be > 0"));
        }
        if !(self.horizon_multiplier > 0.0 && self.horizon_multiplier.is_finite()) {
            return Err(domain("horizon_multiplier must be > 0"));
        }
        Ok(())
    }

    /// Coarse sample times `0, …, horizon_multiplier/Ω_min`.
    pub fn coarse_grid(&self, omega_min: f64) -> Vec<f64> {
        let horizon = self.horizon_multiplier / omega_min;
        let last = (self.coarse_points - 1) as f64;
        (0..self.coarse_points).map(|i| horizon * i as f64 / last).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub value: f64,
    pub t_star: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `p` on `[0, horizon]`. `batch` evaluates the coarse grid in one
/// call (engines vectorize it); `point` evaluates single refinement times.
pub fn maximize(
    cfg: &TimeSearchConfig,
    omega_min: f64,
    batch: impl FnOnce(&[f64]) -> Vec<f64>,
    mut point: impl FnMut(f64) -> f64,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    if !(omega_min > 0.0 && omega_min.is_finite()) {
        return Err(domain(format!("Ω_min must be positive, got {omega_min}")));
    }
    let times = cfg.coarse_grid(omega_min);
    let values = batch(&times);
    debug_assert_eq!(values.len(), times.len());

    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("profile is not finite at t = {}", times[i])));
        }
        if *v > values[best] {
            best = i;
        }
    }
    if best == 0 || best == times.len() - 1 {
        return Err(Error::NoBracket {
            best_index: best,
            profile: times.into_iter().zip(values).collect(),
        });
    }

    let tol = cfg.refine_tolerance / omega_min;
    let (mut a, mut b) = (times[best - 1], times[best + 1]);
    let (mut t_best, mut v_best) = (times[best], values[best]);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = point(x1);
    let mut f2 = point(x2);
    let mut iterations = 0usize;
    while b - a > tol {
        iterations += 1;
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = point(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = point(x2);
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f > v_best {
                v_best = f;
                t_best = x;
            }
        }
    }

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("coarse_points".into(), cfg.coarse_points as f64);
    diagnostics.insert("horizon".into(), *times.last().unwrap());
    diagnostics.insert("grid_step".into(), times[1] - times[0]);
    diagnostics.insert("refine_iterations".into(), iterations as f64);
    diagnostics.insert("achieved_tolerance".into(), b - a);
    Ok(SearchOutcome {
        value: v_best,
        t_star: t_best,
        diagnostics,
    })
}
