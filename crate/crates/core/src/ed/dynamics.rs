use faer::Mat;
use num_complex::Complex64;

use super::spectral::SpectralDecomposition;
use crate::error::{domain, Result};
use crate::operators::{DensityMatrix, HermitianOperator};

const OUTPUT_TOL: f64 = 1e-8;

/// Initial state rotated into the eigenbasis of `H_tot`, reused for every time.
pub struct EigenbasisState<'a> {
    spec: &'a SpectralDecomposition,
    rotated: Mat<Complex64>,
}

impl<'a> EigenbasisState<'a> {
    pub fn new(spec: &'a SpectralDecomposition, rho0: &DensityMatrix) -> Result<Self> {
        if rho0.dim() != spec.dim() {
            return Err(domain(format!(
                "initial state has dimension {} but the Hamiltonian has {}",
                rho0.dim(),
                spec.dim()
            )));
        }
        Ok(Self {
            spec,
            rotated: spec.to_eigenbasis(rho0.op()),
        })
    }

    /// Full state `e^{−iHt} ρ0 e^{iHt}`.
    pub fn at(&self, t: f64) -> Result<DensityMatrix> {
        let e = &self.spec.eigenvalues;
        let n = self.spec.dim();
        let phases: Vec<Complex64> = e.iter().map(|&x| Complex64::from_polar(1.0, -x * t)).collect();
        let evolved = Mat::from_fn(n, n, |i, j| self.rotated[(i, j)] * phases[i] * phases[j].conj());
        let back = self.spec.from_eigenbasis(&evolved);
        let sym = Mat::from_fn(n, n, |i, j| (back[(i, j)] + back[(j, i)].conj()) * 0.5);
        DensityMatrix::with_tolerance(HermitianOperator::new(sym)?, OUTPUT_TOL)
    }
}

/// Full joint state at each requested time.
pub fn evolve_full(htot: &SpectralDecomposition, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    let state = EigenbasisState::new(htot, rho0)?;
    times.iter().map(|&t| state.at(t)).collect()
}

/// Reduced two-level state `Tr_B[e^{−iHt} ρ0 e^{iHt}]` at each requested time.
pub fn evolve_reduced(
    htot: &SpectralDecomposition,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let state = EigenbasisState::new(htot, rho0)?;
    times
        .iter()
        .map(|&t| partial_trace_bath(&state.at(t)?))
        .collect()
}

/// Traces out everything but the most significant qubit.
pub fn partial_trace_bath(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = rho.dim();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(domain(format!(
            "partial trace needs dimension 2·2^N with the system first, got {dim}"
        )));
    }
    let bath = dim / 2;
    let mut reduced = Mat::<Complex64>::zeros(2, 2);
    for s in 0..2 {
        for sp in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..bath {
                acc += rho.get(s * bath + b, sp * bath + b);
            }
            reduced[(s, sp)] = acc;
        }
    }
    DensityMatrix::with_tolerance(HermitianOperator::new(reduced)?, OUTPUT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::spectral::{eigh, thermal_state};
    use crate::jw::rabi_population;
    use crate::operators::{build_h_total, build_h_xy, BathCoupling, SpinChainParams, TlsParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn down() -> DensityMatrix {
        DensityMatrix::new(HermitianOperator::diagonal(&[0.0, 1.0])).unwrap()
    }

    fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = Mat::from_fn(dim, dim, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let p = &a * a.adjoint();
        let tr: f64 = (0..dim).map(|i| p[(i, i)].re).sum();
        let p = Mat::from_fn(dim, dim, |i, j| (p[(i, j)] + p[(j, i)].conj()) * (0.5 / tr));
        DensityMatrix::new(HermitianOperator::new(p).unwrap()).unwrap()
    }

    /// Reference partial trace by explicit index bookkeeping on (s, b, s', b').
    fn partial_trace_reference(rho: &DensityMatrix, n_bath: usize) -> [[Complex64; 2]; 2] {
        let bath = 1usize << n_bath;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (s, row) in out.iter_mut().enumerate() {
            for (sp, slot) in row.iter_mut().enumerate() {
                for b in 0..bath {
                    let i = (s << n_bath) | b;
                    let j = (sp << n_bath) | b;
                    *slot += rho.get(i, j);
                }
            }
        }
        out
    }

    #[test]
    fn product_state_traces_to_system_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rs = random_density(2, &mut rng);
        let rb = random_density(8, &mut rng);
        let red = partial_trace_bath(&rs.tensor(&rb)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((red.get(i, j) - rs.get(i, j)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_state_traces_to_mixed() {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let bell = DensityMatrix::pure(&[a, z, z, a]).unwrap();
        let red = partial_trace_bath(&bell).unwrap();
        assert!((red.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((red.get(1, 1).re - 0.5).abs() < 1e-15);
        assert!(red.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn random_state_partial_trace_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let rho = random_density(8, &mut rng);
            let red = partial_trace_bath(&rho).unwrap();
            let reference = partial_trace_reference(&rho, 2);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((red.get(i, j) - reference[i][j]).norm() < 1e-15);
                }
            }
            assert!((red.trace() - 1.0).abs() < 1e-12);
            assert!(red.min_eigenvalue().unwrap() >= -1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dimension() {
        let rho = DensityMatrix::maximally_mixed(6);
        assert!(partial_trace_bath(&rho).is_err());
    }

    #[test]
    fn decoupled_evolution_is_free_rabi() {
        let tls = TlsParams::new(0.2, 0.1).unwrap();
        let chain = SpinChainParams::new(3, 0.8, 0.4).unwrap();
        let h = build_h_total(&tls, &chain, &BathCoupling::new(0.0).unwrap()).unwrap();
        let spec = eigh(&h).unwrap();
        let rho_b = thermal_state(&build_h_xy(&chain).unwrap(), 2.0).unwrap();
        let rho0 = down().tensor(&rho_b);
        let times: Vec<f64> = (0..25).map(|k| k as f64 * 1.7).collect();
        let out = evolve_reduced(&spec, &rho0, &times).unwrap();
        assert!((out[0].get(1, 1).re - 1.0).abs() < 1e-12);
        for (rho, &t) in out.iter().zip(&times) {
            assert!((rho.get(0, 0).re - rabi_population(0.2, &tls, t)).abs() < 1e-10);
            assert!((rho.trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let spec = eigh(&HermitianOperator::diagonal(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert!(evolve_reduced(&spec, &down(), &[0.0]).is_err());
    }
}
