//! Symmetry-blocked reduced dynamics for the full system–bath Hamiltonian.
//!
//! `H_XY` conserves the magnon-number parity for every `γ`, and the magnon
//! number itself at `γ = 0`. The coupling is diagonal in magnon number, the
//! system Hamiltonian acts only on the two-level factor and the initial state
//! `|↓⟩⟨↓| ⊗ e^{−βH_XY}/Z` is block diagonal, so each bath sector evolves
//! independently and the reduced observable is a sum over sectors.
//!
//! Within a sector with eigenpairs `(E_m, v_m)` of `H_tot` the observable is
//! `Σ_mn G_mn e^{−i(E_m − E_n)t}` with `G_mn = R_mn Õ_nm`, where `R` and `Õ`
//! are the initial state and observable in the eigenbasis. All blocks are
//! real symmetric, so the sum reduces to quadratic forms in `cos(E t)` and
//! `sin(E t)`, which batch into matrix products over the time grid.

use faer::Mat;
use num_complex::Complex64;

use super::spectral::eigh_real;
use crate::error::{Error, Result};
use crate::operators::{magnon_count, xy_diagonal, xy_offdiagonal, BathCoupling, SpinChainParams, TlsParams};
use crate::time_search::TransitionMeasure;

/// How the bath Hilbert space is split before diagonalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Blocking {
    /// Magnon number at `γ = 0`, parity otherwise.
    #[default]
    Auto,
    /// One dense block holding the whole space.
    None,
    Parity,
    /// Only valid for `γ = 0`.
    Magnetization,
}

impl Blocking {
    fn resolve(self, chain: &SpinChainParams) -> Result<Blocking> {
        match self {
            Blocking::Auto if chain.is_isotropic() => Ok(Blocking::Magnetization),
            Blocking::Auto => Ok(Blocking::Parity),
            Blocking::Magnetization if !chain.is_isotropic() => Err(Error::Unsupported(
                "magnetization blocking requires gamma = 0".into(),
            )),
            other => Ok(other),
        }
    }
}

/// Bath basis states grouped by conserved label, each list ascending.
pub fn bath_sectors(chain: &SpinChainParams, blocking: Blocking) -> Result<Vec<Vec<usize>>> {
    let n = chain.n_sites();
    let dim = 1usize << n;
    let sectors = match blocking.resolve(chain)? {
        Blocking::None => vec![(0..dim).collect()],
        Blocking::Parity => {
            let mut s = vec![Vec::new(), Vec::new()];
            for b in 0..dim {
                s[magnon_count(b) % 2].push(b);
            }
            s
        }
        Blocking::Magnetization => {
            let mut s = vec![Vec::new(); n + 1];
            for b in 0..dim {
                s[magnon_count(b)].push(b);
            }
            s
        }
        Blocking::Auto => unreachable!(),
    };
    Ok(sectors)
}

/// `H_XY` restricted to one sector, as a real symmetric block.
fn bath_block(chain: &SpinChainParams, states: &[usize], local: &[usize]) -> Result<Mat<f64>> {
    let d = states.len();
    let mut h = Mat::<f64>::zeros(d, d);
    let mut leaked = false;
    for (col, &s) in states.iter().enumerate() {
        h[(col, col)] += xy_diagonal(chain, s);
        xy_offdiagonal(chain, s, |target, amp| {
            let row = local[target];
            if row == usize::MAX {
                leaked = true;
            } else {
                h[(row, col)] += amp;
            }
        });
    }
    if leaked {
        return Err(Error::Numeric("bath sector is not invariant under H_XY".into()));
    }
    Ok(h)
}

/// Eigen-data of one sector needed to evaluate the observable at any time.
struct SectorDynamics {
    energies: Vec<f64>,
    weights: Mat<f64>,
}

impl SectorDynamics {
    /// `(Re, Im)` of `Σ_mn G_mn e^{−i(E_m−E_n)t}` for each time.
    fn evaluate(&self, times: &[f64], symmetric: bool) -> Vec<Complex64> {
        const CHUNK: usize = 256;
        let dim = self.energies.len();
        let mut out = Vec::with_capacity(times.len());
        for chunk in times.chunks(CHUNK) {
            let c = Mat::from_fn(dim, chunk.len(), |m, k| (self.energies[m] * chunk[k]).cos());
            let s = Mat::from_fn(dim, chunk.len(), |m, k| (self.energies[m] * chunk[k]).sin());
            // G acts from the right index: cᵀ G c = Σ_m c_m (G c)_m
            let gc = &self.weights * &c;
            let gs = &self.weights * &s;
            for k in 0..chunk.len() {
                let (mut re, mut im) = (0.0, 0.0);
                for m in 0..dim {
                    re += c[(m, k)] * gc[(m, k)] + s[(m, k)] * gs[(m, k)];
                    if !symmetric {
                        im += c[(m, k)] * gs[(m, k)] - s[(m, k)] * gc[(m, k)];
                    }
                }
                out.push(Complex64::new(re, im));
            }
        }
        out
    }
}

/// Blocked solver for the reduced observable of `H_tot` started from
/// `|↓⟩ ⊗ thermal bath`.
pub struct BlockedDynamics {
    sectors: Vec<SectorDynamics>,
    measure: TransitionMeasure,
    pub(crate) sector_count: usize,
    pub(crate) largest_block: usize,
}

/// Sectors whose total thermal weight is below this are dropped.
const NEGLIGIBLE_SECTOR_WEIGHT: f64 = 1e-20;

impl BlockedDynamics {
    pub fn new(
        chain: &SpinChainParams,
        tls: &TlsParams,
        g: &BathCoupling,
        beta: f64,
        blocking: Blocking,
        measure: TransitionMeasure,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(crate::error::domain(format!("beta must be finite and > 0, got {beta}")));
        }
        let n = chain.n_sites();
        let sectors = bath_sectors(chain, blocking)?;
        let mut local = vec![usize::MAX; 1usize << n];

        // bath spectra first: the thermal state needs the global ground energy
        let mut bath = Vec::with_capacity(sectors.len());
        for states in &sectors {
            for (i, &s) in states.iter().enumerate() {
                local[s] = i;
            }
            let block = bath_block(chain, states, &local)?;
            for &s in states {
                local[s] = usize::MAX;
            }
            let (e, u) = eigh_real(block.as_ref())
                .map_err(|e| Error::Numeric(format!("bath block eigendecomposition failed: {e:?}")))?;
            bath.push((block, e, u));
        }
        let e0 = bath
            .iter()
            .flat_map(|(_, e, _)| e.iter().cloned())
            .fold(f64::INFINITY, f64::min);
        let boltz: Vec<Vec<f64>> = bath
            .iter()
            .map(|(_, e, _)| e.iter().map(|x| (-beta * (x - e0)).exp()).collect())
            .collect();
        let z: f64 = boltz.iter().flatten().sum();

        let hs = crate::operators::build_h_s(tls);
        let (hs_up, hs_down, t_amp) = (hs.get(0, 0).re, hs.get(1, 1).re, hs.get(0, 1).re);
        let mut out = Vec::new();
        let mut largest = 0;
        for ((states, (hb, _, u)), w) in sectors.iter().zip(&bath).zip(&boltz) {
            let sector_weight: f64 = w.iter().sum::<f64>() / z;
            if sector_weight < NEGLIGIBLE_SECTOR_WEIGHT {
                continue;
            }
            let d = states.len();
            largest = largest.max(2 * d);
            let mut h = Mat::<f64>::zeros(2 * d, 2 * d);
            for j in 0..d {
                for i in 0..d {
                    h[(i, j)] = hb[(i, j)];
                    h[(d + i, d + j)] = hb[(i, j)];
                }
                let m = (n as f64 - 2.0 * magnon_count(states[j]) as f64) / n as f64;
                h[(j, j)] += hs_up - g.strength() * m;
                h[(d + j, d + j)] += hs_down;
                h[(j, d + j)] = t_amp;
                h[(d + j, j)] = t_amp;
            }
            let (energies, v) = eigh_real(h.as_ref())
                .map_err(|e| Error::Numeric(format!("H_tot block (dim {}) did not converge: {e:?}", 2 * d)))?;

            // ρ_B restricted to the sector: U diag(w/Z) Uᵀ
            let uw = Mat::from_fn(d, d, |i, k| u[(i, k)] * w[k] / z);
            let rho_b = &uw * u.transpose();
            let v_up = v.as_ref().subrows(0, d);
            let v_down = v.as_ref().subrows(d, d);
            let r = v_down.transpose() * &rho_b * v_down;
            let obs = match measure {
                TransitionMeasure::Population => v_up.transpose() * v_up,
                // |↑⟩⟨↓| ⊗ I in the eigenbasis
                TransitionMeasure::Coherence => v_up.transpose() * v_down,
            };
            let dim = 2 * d;
            let weights = Mat::from_fn(dim, dim, |m, k| r[(m, k)] * obs[(k, m)]);
            out.push(SectorDynamics { energies, weights });
        }
        Ok(Self {
            sectors: out,
            measure,
            sector_count: sectors.len(),
            largest_block: largest,
        })
    }

    fn observable(&self, times: &[f64]) -> Vec<Complex64> {
        let symmetric = self.measure == TransitionMeasure::Population;
        let mut acc = vec![Complex64::new(0.0, 0.0); times.len()];
        for sector in &self.sectors {
            for (a, v) in acc.iter_mut().zip(sector.evaluate(times, symmetric)) {
                *a += v;
            }
        }
        acc
    }

    /// Maximization target at each time: population or squared coherence.
    pub fn profile(&self, times: &[f64]) -> Vec<f64> {
        self.observable(times)
            .into_iter()
            .map(|z| match self.measure {
                TransitionMeasure::Population => z.re,
                TransitionMeasure::Coherence => z.norm_sqr(),
            })
            .collect()
    }

    /// `⟨↓|ρ_S(t)|↑⟩`; only meaningful for the coherence measure.
    pub fn coherence(&self, times: &[f64]) -> Vec<Complex64> {
        self.observable(times)
    }
}
