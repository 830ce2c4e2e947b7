//! Model parameters and dense operators for the two-level system, the XY
//! chain bath and their coupling.
//!
//! Basis convention: computational `σ_z` product basis, `|↑⟩` is bit `0`
//! and `|↓⟩` is bit `1`. Site 1 is the most significant bit of the bath
//! index. In the joint space the system qubit is the most significant
//! factor, so a joint index reads `system_bit · 2^N + bath_index`.

use std::io::{Read, Write};

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Largest bath accepted by [`build_h_total`] unless a caller passes its own cap.
pub const DEFAULT_MAX_BATH_SITES: usize = 12;

const HERMITICITY_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-10;

/// XY chain on a periodic ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinChainParams {
    n_sites: usize,
    coupling: f64,
    anisotropy: f64,
    field: f64,
}

impl SpinChainParams {
    /// Chain with `J = 1`.
    pub fn new(n_sites: usize, anisotropy: f64, field: f64) -> Result<Self> {
        Self::with_coupling(n_sites, 1.0, anisotropy, field)
    }

    pub fn with_coupling(n_sites: usize, coupling: f64, anisotropy: f64, field: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(domain(format!("n_sites must be >= 2 for a periodic ring, got {n_sites}")));
        }
        if !coupling.is_finite() {
            return Err(domain("coupling J must be finite"));
        }
        if !(0.0..=1.0).contains(&anisotropy) {
            return Err(domain(format!("anisotropy must lie in [0, 1], got {anisotropy}")));
        }
        if !(field >= 0.0 && field.is_finite()) {
            return Err(domain(format!("field h must be finite and >= 0, got {field}")));
        }
        Ok(Self {
            n_sites,
            coupling,
            anisotropy,
            field,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }
    pub fn field(&self) -> f64 {
        self.field
    }
    pub fn is_isotropic(&self) -> bool {
        self.anisotropy == 0.0
    }
}

/// `H_S = Δ/2 σ_z + T σ_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TlsParams {
    gap: f64,
    tunneling: f64,
}

impl TlsParams {
    pub fn new(gap: f64, tunneling: f64) -> Result<Self> {
        if !gap.is_finite() {
            return Err(domain("gap must be finite"));
        }
        if !(tunneling > 0.0 && tunneling.is_finite()) {
            return Err(domain(format!("tunneling T must be finite and > 0, got {tunneling}")));
        }
        Ok(Self { gap, tunneling })
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }
    pub fn tunneling(&self) -> f64 {
        self.tunneling
    }

    /// Rabi frequency `sqrt(T² + δ²/4)` for detuning `δ`.
    pub fn rabi_frequency(&self, detuning: f64) -> f64 {
        (self.tunneling * self.tunneling + 0.25 * detuning * detuning).sqrt()
    }

    /// Maximum transition probability of the isolated system.
    pub fn free_transition_probability(&self) -> f64 {
        let t2 = self.tunneling * self.tunneling;
        t2 / (t2 + 0.25 * self.gap * self.gap)
    }
}

/// Strength `Γ` of `H_I = −Γ |↑⟩⟨↑| ⊗ M_z/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BathCoupling {
    strength: f64,
}

impl BathCoupling {
    pub fn new(strength: f64) -> Result<Self> {
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(domain(format!("coupling Γ must be finite and >= 0, got {strength}")));
        }
        Ok(Self { strength })
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Dense complex matrix with verified Hermiticity.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: Mat<Complex64>,
}

impl HermitianOperator {
    /// Wraps `mat`, rejecting it when
    /// `max|a_ij − conj(a_ji)| > 1e−12 · max|a_ij|`.
    pub fn new(mat: Mat<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(domain(format!(
                "operator must be square and non-empty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let op = Self { mat };
        let scale = op.max_abs();
        let residual = op.hermiticity_residual();
        if residual > HERMITICITY_TOL * scale {
            return Err(domain(format!(
                "matrix is not Hermitian: residual {residual:e} vs scale {scale:e}"
            )));
        }
        Ok(op)
    }

    /// Builds from real symmetric data.
    pub fn from_real(mat: MatRef<'_, f64>) -> Result<Self> {
        Self::new(Mat::from_fn(mat.nrows(), mat.ncols(), |i, j| Complex64::new(mat[(i, j)], 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::from_fn(dim, dim, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            mat: Mat::from_fn(n, n, |i, j| Complex64::new(if i == j { values[i] } else { 0.0 }, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entries(&self) -> MatRef<'_, Complex64> {
        self.mat.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn into_inner(self) -> Mat<Complex64> {
        self.mat
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0_f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut r = 0.0_f64;
        for j in 0..n {
            for i in 0..=j {
                r = r.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| self.mat[(i, j)].im == 0.0))
    }

    pub fn real_part(&self) -> Mat<f64> {
        Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)].re)
    }

    /// Plain matrix product; the result is generally not Hermitian.
    pub fn matmul(&self, other: &HermitianOperator) -> Mat<Complex64> {
        &self.mat * &other.mat
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.is_real() {
            self.real_part()
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Numeric(format!("eigenvalue solver failed: {e:?}")))
        } else {
            self.mat
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Numeric(format!("eigenvalue solver failed: {e:?}")))
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * factor),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    /// Debug dump: magic `HOPR`, `u32` version, `u64` dimension, then the
    /// entries row-major as little-endian `f64` pairs `(re, im)`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.mat[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let io = |source| Error::Io {
            path: "<operator dump>".into(),
            source,
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != DUMP_MAGIC {
            return Err(domain("not an operator dump (bad magic)"));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(io)?;
        if u32::from_le_bytes(b4) != DUMP_VERSION {
            return Err(domain("unsupported operator dump version"));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(io)?;
        let dim = u64::from_le_bytes(b8) as usize;
        let mut mat = Mat::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                r.read_exact(&mut b8).map_err(io)?;
                let re = f64::from_le_bytes(b8);
                r.read_exact(&mut b8).map_err(io)?;
                let im = f64::from_le_bytes(b8);
                mat[(i, j)] = Complex64::new(re, im);
            }
        }
        Self::new(mat)
    }

    /// One row per matrix row, interleaved `re,im` columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .flat_map(|j| {
                    let z = self.mat[(i, j)];
                    [format!("{:.16e}", z.re), format!("{:.16e}", z.im)]
                })
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

const DUMP_MAGIC: &[u8; 4] = b"HOPR";
const DUMP_VERSION: u32 = 1;

fn check_same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(domain(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Unit-trace positive-semidefinite operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, DENSITY_TOL)
    }

    /// Validates trace and smallest eigenvalue against `tol`.
    pub fn with_tolerance(op: HermitianOperator, tol: f64) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > tol {
            return Err(domain(format!("density matrix trace {tr} differs from 1 by more than {tol:e}")));
        }
        let min = op.eigenvalues()?[0];
        if min < -tol {
            return Err(domain(format!("density matrix has eigenvalue {min:e} < -{tol:e}")));
        }
        Ok(Self { op })
    }

    pub fn pure(state: &[Complex64]) -> Result<Self> {
        let n = state.len();
        let mat = Mat::from_fn(n, n, |i, j| state[i] * state[j].conj());
        Self::new(HermitianOperator::new(mat)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.op.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.op.eigenvalues()?[0])
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.op.get(i, j).norm_sqr();
            }
        }
        s
    }

    /// `Re Tr(ρ A)`.
    pub fn expectation(&self, a: &HermitianOperator) -> Result<f64> {
        check_same_dim(&self.op, a)?;
        let n = self.dim();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += self.op.get(i, j) * a.get(j, i);
            }
        }
        Ok(s.re)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            op: tensor(&self.op, &other.op),
        }
    }
}

/// Kronecker product `a ⊗ b` with `a` as the most significant factor.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let (na, nb) = (a.dim(), b.dim());
    HermitianOperator {
        mat: Mat::from_fn(na * nb, na * nb, |i, j| a.get(i / nb, j / nb) * b.get(i % nb, j % nb)),
    }
}

/// Bit of `site` (1-based, site 1 most significant) in a basis index.
#[inline]
pub fn site_bit(index: usize, n_sites: usize, site: usize) -> usize {
    (index >> (n_sites - site)) & 1
}

/// Number of down spins (magnons) in a bath basis state.
#[inline]
pub fn magnon_count(index: usize) -> usize {
    index.count_ones() as usize
}

pub fn pauli_on_site(n_sites: usize, site: usize, axis: Axis) -> Result<HermitianOperator> {
    if n_sites == 0 || site == 0 || site > n_sites {
        return Err(domain(format!("site {site} outside [1, {n_sites}]")));
    }
    if n_sites >= usize::BITS as usize {
        return Err(Error::Resource(format!("{n_sites} sites do not fit a dense basis")));
    }
    let dim = 1usize << n_sites;
    let mask = 1usize << (n_sites - site);
    let mut mat = Mat::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let down = col & mask != 0;
        match axis {
            Axis::Z => mat[(col, col)] = Complex64::new(if down { -1.0 } else { 1.0 }, 0.0),
            Axis::X => mat[(col ^ mask, col)] = Complex64::new(1.0, 0.0),
            // σ_y |↑⟩ = i|↓⟩, σ_y |↓⟩ = −i|↑⟩
            Axis::Y => mat[(col ^ mask, col)] = Complex64::new(0.0, if down { -1.0 } else { 1.0 }),
        }
    }
    Ok(HermitianOperator { mat })
}

/// Nearest-neighbour bonds `(l, l+1)` for `l = 1..N` with `N+1 ≡ 1`.
/// For `N = 2` the single physical bond is listed twice.
pub fn ring_bonds(n_sites: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n_sites).map(move |l| (l, l % n_sites + 1))
}

/// Diagonal element of `H_XY` on a bath basis state.
#[inline]
pub fn xy_diagonal(chain: &SpinChainParams, state: usize) -> f64 {
    let n = chain.n_sites;
    -chain.field * (n as f64 - 2.0 * magnon_count(state) as f64)
}

/// Off-diagonal action of `H_XY` on a bath basis state: calls `emit(target, amplitude)`
/// once per bond. Antiparallel pairs hop with amplitude `−J`, parallel pairs
/// flip together with amplitude `−Jγ`.
pub fn xy_offdiagonal(chain: &SpinChainParams, state: usize, mut emit: impl FnMut(usize, f64)) {
    let n = chain.n_sites;
    for (a, b) in ring_bonds(n) {
        let mask = (1usize << (n - a)) | (1usize << (n - b));
        let antiparallel = site_bit(state, n, a) != site_bit(state, n, b);
        let amp = if antiparallel {
            -chain.coupling
        } else {
            -chain.coupling * chain.anisotropy
        };
        if amp != 0.0 {
            emit(state ^ mask, amp);
        }
    }
}

fn bath_dim(n_sites: usize) -> Result<usize> {
    if n_sites >= 30 {
        return Err(Error::Resource(format!("{n_sites} bath sites do not fit a dense basis")));
    }
    Ok(1usize << n_sites)
}

pub fn build_h_xy(chain: &SpinChainParams) -> Result<HermitianOperator> {
    let dim = bath_dim(chain.n_sites)?;
    let mut mat = Mat::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        mat[(col, col)] += Complex64::new(xy_diagonal(chain, col), 0.0);
        xy_offdiagonal(chain, col, |row, amp| mat[(row, col)] += Complex64::new(amp, 0.0));
    }
    Ok(HermitianOperator { mat })
}

/// Total bath magnetization `M_z = Σ σ_l^z`.
pub fn build_m_z(n_sites: usize) -> Result<HermitianOperator> {
    if n_sites == 0 {
        return Err(domain("n_sites must be >= 1"));
    }
    let dim = bath_dim(n_sites)?;
    let diag: Vec<f64> = (0..dim)
        .map(|s| n_sites as f64 - 2.0 * magnon_count(s) as f64)
        .collect();
    Ok(HermitianOperator::diagonal(&diag))
}

pub fn build_h_s(tls: &TlsParams) -> HermitianOperator {
    let c = |x: f64| Complex64::new(x, 0.0);
    let half = 0.5 * tls.gap;
    let mut mat = Mat::<Complex64>::zeros(2, 2);
    mat[(0, 0)] = c(half);
    mat[(0, 1)] = c(tls.tunneling);
    mat[(1, 0)] = c(tls.tunneling);
    mat[(1, 1)] = c(-half);
    HermitianOperator { mat }
}

/// `H_S ⊗ I + I ⊗ H_XY − Γ |↑⟩⟨↑| ⊗ M_z/N` with the default bath cap.
pub fn build_h_total(tls: &TlsParams, chain: &SpinChainParams, g: &BathCoupling) -> Result<HermitianOperator> {
    build_h_total_capped(tls, chain, g, DEFAULT_MAX_BATH_SITES)
}

pub fn build_h_total_capped(
    tls: &TlsParams,
    chain: &SpinChainParams,
    g: &BathCoupling,
    max_bath_sites: usize,
) -> Result<HermitianOperator> {
    let n = chain.n_sites;
    if n > max_bath_sites {
        return Err(Error::Resource(format!(
            "bath of {n} sites exceeds the cap of {max_bath_sites} sites (dimension {})",
            2usize << max_bath_sites.min(60)
        )));
    }
    let bdim = bath_dim(n)?;
    let hs = build_h_s(tls);
    let mut mat = Mat::<Complex64>::zeros(2 * bdim, 2 * bdim);
    for s in 0..2 {
        for sp in 0..2 {
            let v = hs.get(s, sp);
            if v != Complex64::new(0.0, 0.0) {
                for b in 0..bdim {
                    mat[(s * bdim + b, sp * bdim + b)] += v;
                }
            }
        }
    }
    for s in 0..2 {
        let off = s * bdim;
        for col in 0..bdim {
            mat[(off + col, off + col)] += Complex64::new(xy_diagonal(chain, col), 0.0);
            xy_offdiagonal(chain, col, |row, amp| mat[(off + row, off + col)] += Complex64::new(amp, 0.0));
        }
    }
    for b in 0..bdim {
        let m = (n as f64 - 2.0 * magnon_count(b) as f64) / n as f64;
        mat[(b, b)] -= Complex64::new(g.strength * m, 0.0);
    }
    Ok(HermitianOperator { mat })
}

/// `max_ij |(ab − ba)_ij|`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_same_dim(a, b)?;
    let ab = a.matmul(b);
    let ba = b.matmul(a);
    let n = a.dim();
    let mut m = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            m = m.max((ab[(i, j)] - ba[(i, j)]).norm());
        }
    }
    Ok(m)
}
