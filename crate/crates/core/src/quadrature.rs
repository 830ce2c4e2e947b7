//! Globally adaptive Gauss–Kronrod (7/15) quadrature with bisection.

use serde::Serialize;

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub abs_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tolerance: 1e-10,
            max_subdivisions: 60,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tolerance > 0.0 && self.abs_tolerance.is_finite()) {
            return Err(domain("abs_tolerance must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_bound: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[points[0], points.last()]`, starting from one panel
/// per consecutive pair of `points` and bisecting the panel with the largest
/// error estimate until the summed estimate drops below `abs_tolerance`.
pub fn integrate(f: impl Fn(f64) -> f64, points: &[f64], cfg: &QuadratureConfig) -> Result<QuadratureResult> {
    cfg.validate()?;
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain("integration points must be strictly increasing with at least two entries"));
    }
    let mut panels: Vec<Panel> = points.windows(2).map(|w| gauss_kronrod(&f, w[0], w[1])).collect();
    let mut subdivisions = 0;
    loop {
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let value: f64 = panels.iter().map(|p| p.value).sum();
        if !value.is_finite() {
            return Err(Error::Numeric("integrand produced a non-finite value".into()));
        }
        if error <= cfg.abs_tolerance {
            return Ok(QuadratureResult {
                value,
                error_bound: error,
                subdivisions,
            });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
                tolerance: cfg.abs_tolerance,
                subdivisions,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.error > panels[best].error { i } else { best });
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        panels[worst] = gauss_kronrod(&f, a, mid);
        panels.insert(worst + 1, gauss_kronrod(&f, mid, b));
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, &[0.0, 2.0], &cfg).unwrap();
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-13);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn smooth_periodic_integrand() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| x.cos().powi(2), &[0.0, PI], &cfg).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn steep_step_needs_subdivision() {
        let cfg = QuadratureConfig {
            abs_tolerance: 1e-10,
            max_subdivisions: 200,
        };
        let f = |x: f64| (2000.0 * (x - 0.3)).tanh();
        let r = integrate(f, &[0.0, 1.0], &cfg).unwrap();
        // ∫ tanh(c(x − x0)) = [ln cosh(c(x − x0))]/c
        let lc = |y: f64| (y.abs() + (-2.0 * y.abs()).exp().ln_1p() - 2f64.ln()) / 2000.0;
        let exact = lc(2000.0 * 0.7) - lc(-2000.0 * 0.3);
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
        assert!(r.subdivisions > 0);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let cfg = QuadratureConfig {
            abs_tolerance: 1e-14,
            max_subdivisions: 3,
        };
        let err = integrate(|x| (5000.0 * (x - 0.3)).tanh(), &[0.0, 1.0], &cfg).unwrap_err();
        match err {
            Error::Accuracy { subdivisions, error_bound, .. } => {
                assert_eq!(subdivisions, 3);
                assert!(error_bound > 1e-14);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_bad_points() {
        let cfg = QuadratureConfig::default();
        assert!(integrate(|x| x, &[1.0, 0.0], &cfg).is_err());
        assert!(integrate(|x| x, &[1.0], &cfg).is_err());
    }
}
