//! Thermodynamic limit: the bath magnetization entering the coupling is
//! replaced by its thermal average per spin
//!
//! ```text
//! m_z(h, γ, β) = (1/π) ∫₀^π tanh(βΛ/2)/Λ · (h − cos φ) dφ,
//! Λ(φ) = [(h − cos φ)² + γ² sin² φ]^{1/2},
//! ```
//!
//! which leaves a static two-level problem with detuning `Δ − Γ m_z`. Its
//! time maximum is the Rabi envelope, so no time search is needed here.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::operators::{BathCoupling, TlsParams};
use crate::quadrature::{integrate, QuadratureConfig, QuadratureResult};
use crate::time_search::TransitionMeasure;

/// Below this `Λ` the integrand uses the series of `tanh(x)/x`.
const SMALL_LAMBDA: f64 = 1e-8;

pub fn dispersion_lambda(phi: f64, h: f64, gamma: f64) -> f64 {
    (h - phi.cos()).hypot(gamma * phi.sin())
}

/// `tanh(x)/x`, continuous through `x = 0`.
fn tanhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}

fn integrand(phi: f64, h: f64, gamma: f64, beta: f64) -> f64 {
    let lambda = dispersion_lambda(phi, h, gamma);
    let kernel = if lambda < SMALL_LAMBDA {
        0.5 * beta * tanhc(0.5 * beta * lambda)
    } else {
        (0.5 * beta * lambda).tanh() / lambda
    };
    kernel * (h - phi.cos())
}

fn check_inputs(h: f64, gamma: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain(format!("beta must be finite and > 0, got {beta}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(domain(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    if !h.is_finite() {
        return Err(domain("field h must be finite"));
    }
    Ok(())
}

/// Thermal magnetization per spin with the quadrature error estimate.
pub fn magnetization_with_error(h: f64, gamma: f64, beta: f64, q: &QuadratureConfig) -> Result<QuadratureResult> {
    check_inputs(h, gamma, beta)?;
    // the sharpest feature sits where cos φ = h
    let points: Vec<f64> = if h.abs() < 1.0 {
        vec![0.0, h.acos(), PI]
    } else {
        vec![0.0, PI]
    };
    let q_scaled = QuadratureConfig {
        abs_tolerance: q.abs_tolerance * PI,
        ..*q
    };
    let r = integrate(|phi| integrand(phi, h, gamma, beta), &points, &q_scaled)?;
    Ok(QuadratureResult {
        value: r.value / PI,
        error_bound: r.error_bound / PI,
        subdivisions: r.subdivisions,
    })
}

pub fn magnetization(h: f64, gamma: f64, beta: f64, q: &QuadratureConfig) -> Result<f64> {
    Ok(magnetization_with_error(h, gamma, beta, q)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanFieldResult {
    pub m_z: f64,
    pub m_z_error: f64,
    pub delta_eff: f64,
    pub p_tr: f64,
}

/// Time maximum of the static two-level problem for the chosen measure.
fn static_maximum(tls: &TlsParams, delta_eff: f64, measure: TransitionMeasure) -> f64 {
    let t2 = tls.tunneling() * tls.tunneling();
    let envelope = t2 / (t2 + 0.25 * delta_eff * delta_eff);
    match measure {
        TransitionMeasure::Population => envelope,
        // |ρ_↓↑|² = p(1 − p) peaks at p = ½ when the envelope reaches it
        TransitionMeasure::Coherence if envelope >= 0.5 => 0.25,
        TransitionMeasure::Coherence => envelope * (1.0 - envelope),
    }
}

pub fn transition_probability_mf(
    tls: &TlsParams,
    g: &BathCoupling,
    h: f64,
    gamma: f64,
    beta: f64,
) -> Result<MeanFieldResult> {
    transition_probability_mf_with(tls, g, h, gamma, beta, &QuadratureConfig::default(), TransitionMeasure::Population)
}

pub fn transition_probability_mf_with(
    tls: &TlsParams,
    g: &BathCoupling,
    h: f64,
    gamma: f64,
    beta: f64,
    q: &QuadratureConfig,
    measure: TransitionMeasure,
) -> Result<MeanFieldResult> {
    let m = magnetization_with_error(h, gamma, beta, q)?;
    let delta_eff = tls.gap() - g.strength() * m.value;
    Ok(MeanFieldResult {
        m_z: m.value,
        m_z_error: m.error_bound,
        delta_eff,
        p_tr: static_maximum(tls, delta_eff, measure),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeConfig {
    pub step: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        Self {
            step: 1e-4,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl DerivativeConfig {
    /// The step must dominate the quadrature noise: `step² > 10 · abs_tolerance`.
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(domain("derivative step must be > 0"));
        }
        if self.step * self.step <= 10.0 * self.quadrature.abs_tolerance {
            return Err(domain(format!(
                "derivative step {} too small for quadrature tolerance {:e} (need step² > 10·tol)",
                self.step, self.quadrature.abs_tolerance
            )));
        }
        Ok(())
    }
}

/// `dP_tr/dh` by central differences, forward differences when `h < step`.
pub fn dptr_dh(tls: &TlsParams, g: &BathCoupling, h: f64, gamma: f64, beta: f64, cfg: &DerivativeConfig) -> Result<f64> {
    cfg.validate()?;
    if h < 0.0 {
        return Err(domain(format!("field h must be >= 0, got {h}")));
    }
    let p = |x: f64| -> Result<f64> {
        Ok(transition_probability_mf_with(tls, g, x, gamma, beta, &cfg.quadrature, TransitionMeasure::Population)?.p_tr)
    };
    let s = cfg.step;
    if h >= s {
        Ok((p(h + s)? - p(h - s)?) / (2.0 * s))
    } else {
        // second-order one-sided stencil
        Ok((-3.0 * p(h)? + 4.0 * p(h + s)? - p(h + 2.0 * s)?) / (2.0 * s))
    }
}

/// Uniform field grid `start, …, stop` with `points` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl FieldGrid {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / last)
            .collect()
    }
}

/// Field of steepest `P_tr` rise: the grid argmax of [`dptr_dh`], refined by
/// the vertex of the parabola through the best point and its neighbours.
pub fn critical_field_estimate(
    tls: &TlsParams,
    g: &BathCoupling,
    gamma: f64,
    beta: f64,
    grid: &FieldGrid,
    cfg: &DerivativeConfig,
) -> Result<f64> {
    if grid.points < 100 {
        return Err(domain(format!("field grid needs >= 100 points, got {}", grid.points)));
    }
    if !(grid.start >= 0.0 && grid.stop > grid.start) {
        return Err(domain("field grid must satisfy 0 <= start < stop"));
    }
    let hs = grid.values();
    let d: Vec<f64> = hs
        .par_iter()
        .map(|&h| dptr_dh(tls, g, h, gamma, beta, cfg))
        .collect::<Result<_>>()?;
    let best = (0..d.len()).fold(0, |b, i| if d[i] > d[b] { i } else { b });
    if d[best] <= 0.0 {
        return Err(Error::FlatProfile);
    }
    if best == 0 || best == d.len() - 1 {
        return Ok(hs[best]);
    }
    let (y0, y1, y2) = (d[best - 1], d[best], d[best + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    let dh = hs[1] - hs[0];
    if curvature >= 0.0 {
        return Ok(hs[best]);
    }
    let offset = 0.5 * (y0 - y2) / curvature;
    Ok(hs[best] + offset.clamp(-1.0, 1.0) * dh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn lambda_values() {
        assert_eq!(dispersion_lambda(0.0, 1.0, 0.37), 0.0);
        assert!((dispersion_lambda(PI / 2.0, 0.0, 0.8) - 0.8).abs() < 1e-15);
        for k in 0..50 {
            let phi = PI * k as f64 / 49.0;
            let l = dispersion_lambda(phi, 2.0, 0.0);
            assert!((l - (2.0 - phi.cos())).abs() < 1e-15 && l >= 1.0);
        }
    }

    #[test]
    fn removable_singularity_branch_is_continuous() {
        let beta = 40.0;
        // approach φ = 0 at h = 1 where Λ → 0
        let near = integrand(1e-5, 1.0, 0.0, beta);
        let nearer = integrand(1e-9, 1.0, 0.0, beta);
        assert!(near.is_finite() && nearer.is_finite());
        assert!(nearer.abs() < near.abs());
        assert!((tanhc(1e-5) - (1e-5f64).tanh() / 1e-5).abs() < 1e-15);
    }

    #[test]
    fn zero_field_magnetization_vanishes() {
        for beta in [0.5, 40.0, 5000.0] {
            assert!(magnetization(0.0, 0.0, beta, &q()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn cold_limits() {
        let m = magnetization(0.5, 0.0, 5000.0, &q()).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-6, "{m}");
        let m = magnetization(2.0, 0.0, 5000.0, &q()).unwrap();
        assert!((m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn monotone_and_bounded_in_field() {
        for gamma in [0.0, 0.5, 1.0] {
            for beta in [1.0, 40.0] {
                let ms: Vec<f64> = (0..=40)
                    .map(|i| magnetization(0.05 * i as f64, gamma, beta, &q()).unwrap())
                    .collect();
                assert!(ms.windows(2).all(|w| w[1] >= w[0] - 1e-12), "γ={gamma} β={beta}");
                assert!(ms.iter().all(|&m| (-1e-12..=1.0 + 1e-12).contains(&m)));
            }
        }
    }

    #[test]
    fn tighter_tolerance_stays_within_error_bound() {
        for &(h, gamma, beta) in &[(0.5, 0.0, 40.0), (0.95, 0.8, 40.0), (1.0, 0.0, 500.0)] {
            let coarse = magnetization_with_error(h, gamma, beta, &q()).unwrap();
            let fine_cfg = QuadratureConfig {
                abs_tolerance: 0.5e-10,
                ..q()
            };
            let fine = magnetization(h, gamma, beta, &fine_cfg).unwrap();
            assert!((coarse.value - fine).abs() <= coarse.error_bound.max(1e-15));
        }
    }

    #[test]
    fn mean_field_transition_values() {
        let tls = TlsParams::new(0.2, 0.1).unwrap();
        let g = BathCoupling::new(0.05).unwrap();
        let r = transition_probability_mf(&tls, &g, 0.0, 0.0, 40.0).unwrap();
        assert!((r.delta_eff - 0.2).abs() < 1e-12 && (r.p_tr - 0.5).abs() < 1e-12);
        let r = transition_probability_mf(&tls, &g, 2.0, 0.0, 5000.0).unwrap();
        assert!((r.delta_eff - 0.15).abs() < 1e-9);
        assert!((r.p_tr - 0.64).abs() < 1e-8);
        let expect = 0.01 / (0.01 + r.delta_eff * r.delta_eff / 4.0);
        assert!((r.p_tr - expect).abs() < 1e-12);
        let free = BathCoupling::new(0.0).unwrap();
        for (h, gamma, beta) in [(0.3, 0.2, 3.0), (1.7, 1.0, 100.0)] {
            let r = transition_probability_mf(&tls, &free, h, gamma, beta).unwrap();
            assert!((r.p_tr - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_flat_when_polarized_and_finite_at_zero() {
        let tls = TlsParams::new(0.2, 0.1).unwrap();
        let g = BathCoupling::new(0.05).unwrap();
        let cfg = DerivativeConfig::default();
        assert!(dptr_dh(&tls, &g, 3.0, 0.0, 40.0, &cfg).unwrap().abs() < 1e-4);
        let d0 = dptr_dh(&tls, &g, 0.0, 0.0, 40.0, &cfg).unwrap();
        let d1 = dptr_dh(&tls, &g, 2e-3, 0.0, 40.0, &cfg).unwrap();
        assert!(d0.is_finite() && (d0 - d1).abs() < 1e-3, "{d0} {d1}");
    }

    #[test]
    fn derivative_config_links_step_and_tolerance() {
        let cfg = DerivativeConfig {
            step: 1e-5,
            quadrature: QuadratureConfig::default(),
        };
        assert!(cfg.validate().is_err());
        assert!(DerivativeConfig::default().validate().is_ok());
    }

    #[test]
    fn critical_field_estimates() {
        let tls = TlsParams::new(0.2, 0.1).unwrap();
        let g = BathCoupling::new(0.05).unwrap();
        let cfg = DerivativeConfig::default();
        let grid = FieldGrid {
            start: 0.0,
            stop: 1.5,
            points: 151,
        };
        let cold = critical_field_estimate(&tls, &g, 0.0, 5000.0, &grid, &cfg).unwrap();
        assert!((cold - 1.0).abs() < 0.02, "{cold}");
        let warm = critical_field_estimate(&tls, &g, 0.0, 40.0, &grid, &cfg).unwrap();
        assert!(warm > 0.8 && warm < 1.0, "{warm}");
        let aniso = critical_field_estimate(&tls, &g, 0.8, 40.0, &grid, &cfg).unwrap();
        assert!(aniso > 0.5 && aniso < 1.2, "{aniso}");
        let small = FieldGrid { points: 50, ..grid };
        assert!(critical_field_estimate(&tls, &g, 0.0, 40.0, &small, &cfg).is_err());
        let free = BathCoupling::new(0.0).unwrap();
        assert!(matches!(
            critical_field_estimate(&tls, &free, 0.0, 40.0, &grid, &cfg),
            Err(Error::FlatProfile)
        ));
    }
}
