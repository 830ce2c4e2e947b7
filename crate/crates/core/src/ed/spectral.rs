use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::operators::{DensityMatrix, HermitianOperator};

/// Eigenvalues in ascending order with orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<Complex64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max|V diag(E) V† − H|`.
    pub fn reconstruction_residual(&self, h: &HermitianOperator) -> f64 {
        let v = &self.eigenvectors;
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * self.eigenvalues[j]);
        let rebuilt = &scaled * v.adjoint();
        max_abs_diff(&rebuilt, h.entries())
    }

    /// `max|V†V − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.adjoint() * v;
        max_abs_diff(&gram, HermitianOperator::identity(self.dim()).entries())
    }

    /// `V† A V` for an operator on the same space.
    pub fn to_eigenbasis(&self, a: &HermitianOperator) -> Mat<Complex64> {
        let v = &self.eigenvectors;
        v.adjoint() * a.entries() * v
    }

    /// `V B V†`.
    pub fn from_eigenbasis(&self, b: &Mat<Complex64>) -> Mat<Complex64> {
        let v = &self.eigenvectors;
        v * b * v.adjoint()
    }
}

fn max_abs_diff(a: &Mat<Complex64>, b: faer::MatRef<'_, Complex64>) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

fn fingerprint(h: &HermitianOperator) -> String {
    let frob: f64 = {
        let n = h.dim();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += h.get(i, j).norm_sqr();
            }
        }
        s.sqrt()
    };
    format!("dim={} trace={:.6e} frobenius={:.6e}", h.dim(), h.trace(), frob)
}

/// Full eigendecomposition. Real symmetric input goes through the real solver.
pub fn eigh(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let fail = |e: faer::linalg::evd::EvdError| {
        Error::Numeric(format!("eigendecomposition did not converge ({e:?}); {}", fingerprint(h)))
    };
    if h.is_real() {
        let (eigenvalues, vectors) = eigh_real(h.real_part().as_ref()).map_err(fail)?;
        let n = h.dim();
        let eigenvectors = Mat::from_fn(n, n, |i, j| Complex64::new(vectors[(i, j)], 0.0));
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        })
    } else {
        let evd = h.entries().self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = evd.S().column_vector();
        let eigenvalues = (0..h.dim()).map(|i| s[i].re).collect();
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors: evd.U().to_owned(),
        })
    }
}

/// Real symmetric eigendecomposition, ascending eigenvalues.
pub(crate) fn eigh_real(
    a: faer::MatRef<'_, f64>,
) -> std::result::Result<(Vec<f64>, Mat<f64>), faer::linalg::evd::EvdError> {
    let evd = a.self_adjoint_eigen(Side::Lower)?;
    let s = evd.S().column_vector();
    Ok(((0..a.nrows()).map(|i| s[i]).collect(), evd.U().to_owned()))
}

/// Boltzmann weights `e^{−β(E_i − E_min)}/Z`.
pub fn boltzmann_weights(eigenvalues: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain(format!("beta must be finite and > 0, got {beta}")));
    }
    let e0 = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    Ok(w)
}

/// Gibbs state `e^{−βH}/Z`, built in the eigenbasis.
pub fn thermal_state(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    let spec = eigh(h)?;
    thermal_state_from(&spec, beta)
}

pub fn thermal_state_from(spec: &SpectralDecomposition, beta: f64) -> Result<DensityMatrix> {
    let w = boltzmann_weights(&spec.eigenvalues, beta)?;
    let n = spec.dim();
    let v = &spec.eigenvectors;
    let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * w[j]);
    let rho = &scaled * v.adjoint();
    // symmetrize away rounding so the Hermiticity check sees exact structure
    let sym = Mat::from_fn(n, n, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5);
    DensityMatrix::new(HermitianOperator::new(sym)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_h_s, build_h_xy, SpinChainParams, TlsParams};

    #[test]
    fn diagonal_input() {
        let d = eigh(&HermitianOperator::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_level_closed_form() {
        let h = build_h_s(&TlsParams::new(0.2, 0.1).unwrap());
        let d = eigh(&h).unwrap();
        let e = 0.02f64.sqrt();
        assert!((d.eigenvalues[0] + e).abs() < 1e-14);
        assert!((d.eigenvalues[1] - e).abs() < 1e-14);
    }

    #[test]
    fn ising_ring_reconstruction() {
        let h = build_h_xy(&SpinChainParams::new(3, 1.0, 0.5).unwrap()).unwrap();
        let d = eigh(&h).unwrap();
        assert!(d.reconstruction_residual(&h) < 1e-10);
        assert!(d.orthonormality_residual() < 1e-10);
        // spectrum of −Σσxσx − hΣσz is invariant under the global flip Πσx,
        // which maps h → −h; with h > 0 check instead the trace identity
        let tr: f64 = d.eigenvalues.iter().sum();
        assert!(tr.abs() < 1e-12);
    }

    #[test]
    fn complex_input_uses_complex_solver() {
        let mut m = Mat::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.0, -1.0);
        m[(1, 0)] = Complex64::new(0.0, 1.0);
        let h = HermitianOperator::new(m).unwrap();
        let d = eigh(&h).unwrap();
        assert!((d.eigenvalues[0] + 1.0).abs() < 1e-15 && (d.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert!(d.reconstruction_residual(&h) < 1e-14);
    }

    #[test]
    fn cold_state_is_ground_projector() {
        let h = build_h_xy(&SpinChainParams::new(4, 0.8, 0.3).unwrap()).unwrap();
        let d = eigh(&h).unwrap();
        assert!(d.eigenvalues[1] - d.eigenvalues[0] > 1e-3);
        let rho = thermal_state(&h, 1e4).unwrap();
        let g: Vec<Complex64> = (0..16).map(|i| d.eigenvectors[(i, 0)]).collect();
        let mut fidelity = Complex64::new(0.0, 0.0);
        for i in 0..16 {
            for j in 0..16 {
                fidelity += g[i].conj() * rho.get(i, j) * g[j];
            }
        }
        assert!(fidelity.re > 1.0 - 1e-8);
    }

    #[test]
    fn hot_state_is_maximally_mixed() {
        let h = build_h_xy(&SpinChainParams::new(3, 0.5, 0.7).unwrap()).unwrap();
        let rho = thermal_state(&h, 1e-9).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 0.125 } else { 0.0 };
                assert!((rho.get(i, j) - expect).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn two_site_gibbs_weights() {
        // N=2, γ=0, h=0.5: H_XX is diagonal in {|↑↑⟩, |↓↓⟩} with −2h, +2h, and
        // ∓2 on the symmetric / antisymmetric one-magnon states.
        let h = build_h_xy(&SpinChainParams::new(2, 0.0, 0.5).unwrap()).unwrap();
        let rho = thermal_state(&h, 1.0).unwrap();
        let z = 1f64.exp() + (-1f64).exp() + 2f64.exp() + (-2f64).exp();
        assert!((rho.get(0, 0).re - 1f64.exp() / z).abs() < 1e-14);
        assert!((rho.get(3, 3).re - (-1f64).exp() / z).abs() < 1e-14);
        let one_magnon = (2f64.exp() + (-2f64).exp()) / (2.0 * z);
        assert!((rho.get(1, 1).re - one_magnon).abs() < 1e-14);
        let coherence = (2f64.exp() - (-2f64).exp()) / (2.0 * z);
        assert!((rho.get(1, 2).re - coherence).abs() < 1e-14);
    }

    #[test]
    fn thermal_rejects_nonpositive_beta() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]);
        assert!(thermal_state(&h, 0.0).is_err());
        assert!(thermal_state(&h, -1.0).is_err());
    }
}
