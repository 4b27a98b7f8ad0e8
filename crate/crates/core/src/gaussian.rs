//! Fermionic Gaussian states at the covariance-matrix level.
//!
//! A state of N modes is described by the 2N×2N covariance matrix
//! Γ_{jj'} = ½Tr([ĉ_j, ĉ_j'] ρ̂), which is purely imaginary and antisymmetric.
//! We store its real part m (Γ = i·m), so antisymmetry is exact in f64 and
//! Hermiticity of Γ is automatic. Mode j (0-based) owns Majorana rows
//! 2j and 2j+1.

use ndarray::{s, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative entrywise tolerance for the antisymmetry check.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Allowed excess of singular values above 1.
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Singular-value excess up to which the matrix is rescaled (with a warning)
/// instead of rejected.
pub const SPECTRAL_CLIP_MAX: f64 = 1e-8;

/// Validity report for a candidate covariance matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub antisymmetry_defect: f64,
    pub max_singular_value: f64,
    pub antisymmetry_ok: bool,
    pub spectrum_ok: bool,
    pub is_valid: bool,
}

/// Check a raw real matrix against the covariance-matrix invariants.
pub fn validate_matrix(m: &Array2<f64>) -> Result<ValidationReport> {
    let defect = {
        let mut d = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                d = d.max((m[[i, j]] + m[[j, i]]).abs());
            }
        }
        d
    };
    let scale = linalg::max_abs(m).max(1.0);
    let max_sv = linalg::operator_norm(m)?;
    let antisymmetry_ok = defect <= ANTISYMMETRY_TOL * scale;
    let spectrum_ok = max_sv <= 1.0 + SPECTRAL_TOL;
    Ok(ValidationReport {
        antisymmetry_defect: defect,
        max_singular_value: max_sv,
        antisymmetry_ok,
        spectrum_ok,
        is_valid: antisymmetry_ok && spectrum_ok,
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceMatrixData {
    n_modes: usize,
    m: Vec<f64>,
}

/// Covariance matrix of a fermionic Gaussian state, Γ = i·m.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    m: Array2<f64>,
}

impl CovarianceMatrix {
    /// Build from the real part m of Γ = i·m, enforcing antisymmetry and the
    /// spectral bound ‖Γ‖ ≤ 1. Singular values exceeding 1 by at most
    /// [`SPECTRAL_CLIP_MAX`] are clipped by rescaling, with a warning.
    pub fn new(n_modes: usize, m: Array2<f64>) -> Result<Self> {
        Self::with_clip(n_modes, m, SPECTRAL_CLIP_MAX)
    }

    /// As [`CovarianceMatrix::new`] but with a caller-chosen clip threshold
    /// (integrators tolerate larger transient excess).
    pub fn with_clip(n_modes: usize, m: Array2<f64>, clip_max: f64) -> Result<Self> {
        let dim = 2 * n_modes;
        if m.dim() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.nrows(),
            });
        }
        let report = validate_matrix(&m)?;
        if !report.antisymmetry_ok {
            return Err(Error::NotAntisymmetric {
                defect: report.antisymmetry_defect,
                tol: ANTISYMMETRY_TOL * linalg::max_abs(&m).max(1.0),
            });
        }
        let max_sv = report.max_singular_value;
        let mut m = m;
        if max_sv > 1.0 + SPECTRAL_TOL {
            if max_sv <= 1.0 + clip_max {
                log::warn!(
                    "covariance spectrum exceeds 1 by {:.3e}; rescaling to the physical ball",
                    max_sv - 1.0
                );
                m.mapv_inplace(|x| x / max_sv);
            } else {
                return Err(Error::SpectrumOutOfRange { max_sv });
            }
        }
        Ok(Self { n_modes, m })
    }

    /// The maximally mixed state Γ = 0.
    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            m: Array2::zeros((2 * n_modes, 2 * n_modes)),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Real part m of Γ = i·m.
    pub fn m(&self) -> &Array2<f64> {
        &self.m
    }

    /// The complex covariance matrix Γ itself.
    pub fn gamma(&self) -> Array2<Complex64> {
        linalg::times_i(&self.m)
    }

    /// Williamson-type pair values ν_j ≥ 0 (each singular value of m occurs
    /// twice; one representative per pair, descending).
    pub fn nu_values(&self) -> Result<Vec<f64>> {
        let sv = linalg::singular_values(&self.m)?;
        let mut out = Vec::with_capacity(self.n_modes);
        let mut sorted: Vec<f64> = sv.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for j in 0..self.n_modes {
            out.push(0.5 * (sorted[2 * j] + sorted[2 * j + 1]));
        }
        Ok(out)
    }

    /// Validity report for this (already constructed) matrix.
    pub fn validate(&self) -> Result<ValidationReport> {
        validate_matrix(&self.m)
    }

    /// Purity tr[ρ̂²] = ∏_j (1 + ν_j²)/2.
    pub fn purity(&self) -> Result<f64> {
        Ok(self
            .nu_values()?
            .iter()
            .map(|nu| 0.5 * (1.0 + nu * nu))
            .product())
    }

    /// Williamson-type spectrum as CSV ("index,nu" rows).
    pub fn spectrum_csv(&self) -> Result<String> {
        let mut out = String::from("index,nu\n");
        for (j, nu) in self.nu_values()?.iter().enumerate() {
            out.push_str(&format!("{j},{nu:.16e}\n"));
        }
        Ok(out)
    }
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("CovarianceMatrix", 2)?;
        st.serialize_field("n_modes", &self.n_modes)?;
        let flat: Vec<f64> = self.m.iter().cloned().collect();
        st.serialize_field("m", &flat)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CovarianceMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let data = CovarianceMatrixData::deserialize(deserializer)?;
        let dim = 2 * data.n_modes;
        if data.m.len() != dim * dim {
            return Err(serde::de::Error::custom(format!(
                "covariance matrix needs {} entries, got {}",
                dim * dim,
                data.m.len()
            )));
        }
        let m = Array2::from_shape_vec((dim, dim), data.m)
            .map_err(|e| serde::de::Error::custom(e.to_string()))?;
        CovarianceMatrix::new(data.n_modes, m).map_err(serde::de::Error::custom)
    }
}

/// Quadratic Hamiltonian Ĥ = Σ_{jj'} H_{jj'} ĉ_j ĉ_j' with H = i·k.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    n_modes: usize,
    k: Array2<f64>,
}

impl QuadraticHamiltonian {
    pub fn new(n_modes: usize, k: Array2<f64>) -> Result<Self> {
        let dim = 2 * n_modes;
        if k.dim() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: k.nrows(),
            });
        }
        let scale = linalg::max_abs(&k).max(1.0);
        let mut defect = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                defect = defect.max((k[[i, j]] + k[[j, i]]).abs());
            }
        }
        if defect > ANTISYMMETRY_TOL * scale {
            return Err(Error::NotAntisymmetric {
                defect,
                tol: ANTISYMMETRY_TOL * scale,
            });
        }
        Ok(Self { n_modes, k })
    }

    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            k: Array2::zeros((2 * n_modes, 2 * n_modes)),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Real part k of H = i·k.
    pub fn k(&self) -> &Array2<f64> {
        &self.k
    }

    /// The complex Hermitian matrix H itself.
    pub fn h(&self) -> Array2<Complex64> {
        linalg::times_i(&self.k)
    }
}

/// Gibbs covariance matrix of ρ̂ ∝ e^{-βĤ}.
///
/// Matching e^{-βĤ} against the Gaussian normal form gives Ω = -4βH and
/// Γ = tanh(2βH); at high temperature Γ ≃ 2βH. The sign is pinned by the
/// two-mode closed form and by the dense-oracle round trip.
pub fn gibbs_covariance(h: &QuadraticHamiltonian, beta: f64) -> Result<CovarianceMatrix> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Numerical(format!(
            "inverse temperature must be finite and >= 0, got {beta}"
        )));
    }
    let dim = 2 * h.n_modes();
    if beta == 0.0 {
        return Ok(CovarianceMatrix::zero(h.n_modes()));
    }
    let hc = h.h();
    let gamma = linalg::hermitian_function(&hc, |w| (2.0 * beta * w).tanh())?;
    // m = Re(-i Γ), re-antisymmetrized to kill rounding residue.
    let mut m = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            m[[i, j]] = gamma[[i, j]].im;
        }
    }
    let anti = 0.5 * (&m - &m.t());
    CovarianceMatrix::new(h.n_modes(), anti)
}

/// Covariance of the extremal (β → ∞) Gibbs state: Γ = sign(2H) spectrally.
pub fn ground_state_projector_covariance(h: &QuadraticHamiltonian) -> Result<CovarianceMatrix> {
    let dim = 2 * h.n_modes();
    let hc = h.h();
    let gamma = linalg::hermitian_function(&hc, |w| {
        if w > 0.0 {
            1.0
        } else if w < 0.0 {
            -1.0
        } else {
            0.0
        }
    })?;
    let mut m = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            m[[i, j]] = gamma[[i, j]].im;
        }
    }
    let anti = 0.5 * (&m - &m.t());
    CovarianceMatrix::new(h.n_modes(), anti)
}

/// Ordered bipartition of the modes into subsystems A and B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    n_modes: usize,
    modes_a: Vec<usize>,
    modes_b: Vec<usize>,
}

impl Bipartition {
    /// Subsystem A is the given (ordered, distinct) mode list; B is the
    /// ascending complement. Neither side may be empty.
    pub fn new(n_modes: usize, modes_a: Vec<usize>) -> Result<Self> {
        if modes_a.is_empty() {
            return Err(Error::InvalidBipartition("subsystem A is empty".into()));
        }
        let mut seen = vec![false; n_modes];
        for &m in &modes_a {
            if m >= n_modes {
                return Err(Error::ModeIndexOutOfRange { index: m, n_modes });
            }
            if seen[m] {
                return Err(Error::InvalidBipartition(format!("mode {m} listed twice")));
            }
            seen[m] = true;
        }
        let modes_b: Vec<usize> = (0..n_modes).filter(|&m| !seen[m]).collect();
        if modes_b.is_empty() {
            return Err(Error::InvalidBipartition("subsystem B is empty".into()));
        }
        Ok(Self {
            n_modes,
            modes_a,
            modes_b,
        })
    }

    /// Contiguous cut: A = modes 0..n_a.
    pub fn contiguous(n_modes: usize, n_a: usize) -> Result<Self> {
        Self::new(n_modes, (0..n_a).collect())
    }

    /// Half-chain cut A = modes 0..N/2.
    pub fn half_chain(n_modes: usize) -> Result<Self> {
        Self::contiguous(n_modes, n_modes / 2)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn modes_a(&self) -> &[usize] {
        &self.modes_a
    }

    pub fn modes_b(&self) -> &[usize] {
        &self.modes_b
    }

    pub fn n_a(&self) -> usize {
        self.modes_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.modes_b.len()
    }

    /// Majorana index permutation placing A's Majorana pairs before B's:
    /// entry p of the result is the original row moved to permuted row p.
    pub fn majorana_permutation(&self) -> Vec<usize> {
        let mut perm = Vec::with_capacity(2 * self.n_modes);
        for &m in self.modes_a.iter().chain(self.modes_b.iter()) {
            perm.push(2 * m);
            perm.push(2 * m + 1);
        }
        perm
    }

    /// Permute a 2N×2N matrix into the A-first Majorana ordering.
    pub fn permute(&self, mat: &Array2<f64>) -> Array2<f64> {
        let perm = self.majorana_permutation();
        let dim = perm.len();
        let mut out = Array2::zeros((dim, dim));
        for (i_new, &i_old) in perm.iter().enumerate() {
            for (j_new, &j_old) in perm.iter().enumerate() {
                out[[i_new, j_new]] = mat[[i_old, j_old]];
            }
        }
        out
    }

    /// Inverse of [`Bipartition::permute`].
    pub fn unpermute_complex(&self, mat: &Array2<Complex64>) -> Array2<Complex64> {
        let perm = self.majorana_permutation();
        let dim = perm.len();
        let mut out = Array2::zeros((dim, dim));
        for (i_new, &i_old) in perm.iter().enumerate() {
            for (j_new, &j_old) in perm.iter().enumerate() {
                out[[i_old, j_old]] = mat[[i_new, j_new]];
            }
        }
        out
    }

    /// True if Majorana row index `row` (original ordering) belongs to A.
    pub fn row_in_a(&self, row: usize) -> bool {
        self.modes_a.contains(&(row / 2))
    }

    /// Keep only the block-diagonal (A-A and B-B) entries of a matrix in the
    /// original Majorana ordering.
    pub fn block_diagonal_part(&self, mat: &Array2<f64>) -> Array2<f64> {
        let dim = 2 * self.n_modes;
        let mut mask = vec![false; dim];
        for &m in &self.modes_a {
            mask[2 * m] = true;
            mask[2 * m + 1] = true;
        }
        let mut out = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                if mask[i] == mask[j] {
                    out[[i, j]] = mat[[i, j]];
                }
            }
        }
        out
    }

    /// The complementary (A-B and B-A) entries.
    pub fn inter_part(&self, mat: &Array2<f64>) -> Array2<f64> {
        mat - &self.block_diagonal_part(mat)
    }
}

/// Blocks of the covariance matrix in the A-first Majorana ordering.
/// Γ_A = i·m_a, Γ_B = i·m_b, Γ_AB = i·m_ab, and Γ_BA = -Γ_ABᵀ = Γ_AB†.
#[derive(Debug, Clone)]
pub struct BlockView {
    n_a: usize,
    n_b: usize,
    m_a: Array2<f64>,
    m_b: Array2<f64>,
    m_ab: Array2<f64>,
}

impl BlockView {
    /// Assemble a block view directly from its real parts.
    pub fn from_parts(m_a: Array2<f64>, m_b: Array2<f64>, m_ab: Array2<f64>) -> Result<Self> {
        let da = m_a.nrows();
        let db = m_b.nrows();
        if m_a.ncols() != da || !da.is_multiple_of(2) {
            return Err(Error::NotSquare(m_a.nrows(), m_a.ncols()));
        }
        if m_b.ncols() != db || !db.is_multiple_of(2) {
            return Err(Error::NotSquare(m_b.nrows(), m_b.ncols()));
        }
        if m_ab.dim() != (da, db) {
            return Err(Error::DimensionMismatch {
                expected: da,
                got: m_ab.nrows(),
            });
        }
        Ok(Self {
            n_a: da / 2,
            n_b: db / 2,
            m_a,
            m_b,
            m_ab,
        })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn m_a(&self) -> &Array2<f64> {
        &self.m_a
    }

    pub fn m_b(&self) -> &Array2<f64> {
        &self.m_b
    }

    pub fn m_ab(&self) -> &Array2<f64> {
        &self.m_ab
    }

    /// m_ba = -m_abᵀ.
    pub fn m_ba(&self) -> Array2<f64> {
        -self.m_ab.t().to_owned()
    }

    pub fn gamma_a(&self) -> Array2<Complex64> {
        linalg::times_i(&self.m_a)
    }

    pub fn gamma_b(&self) -> Array2<Complex64> {
        linalg::times_i(&self.m_b)
    }

    pub fn gamma_ab(&self) -> Array2<Complex64> {
        linalg::times_i(&self.m_ab)
    }

    pub fn gamma_ba(&self) -> Array2<Complex64> {
        linalg::times_i(&self.m_ba())
    }
}

/// Partition a covariance matrix into blocks under the given bipartition.
pub fn partition(gamma: &CovarianceMatrix, part: &Bipartition) -> Result<BlockView> {
    if part.n_modes() != gamma.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: gamma.n_modes(),
            got: part.n_modes(),
        });
    }
    let permuted = part.permute(gamma.m());
    let da = 2 * part.n_a();
    let dim = 2 * part.n_modes();
    let m_a = permuted.slice(s![..da, ..da]).to_owned();
    let m_b = permuted.slice(s![da..dim, da..dim]).to_owned();
    let m_ab = permuted.slice(s![..da, da..dim]).to_owned();
    Ok(BlockView {
        n_a: part.n_a(),
        n_b: part.n_b(),
        m_a,
        m_b,
        m_ab,
    })
}

/// Reassemble the original covariance matrix from its blocks; exact inverse
/// of [`partition`].
pub fn reassemble(blocks: &BlockView, part: &Bipartition) -> Array2<f64> {
    let da = 2 * blocks.n_a;
    let dim = 2 * (blocks.n_a + blocks.n_b);
    let mut permuted = Array2::zeros((dim, dim));
    permuted.slice_mut(s![..da, ..da]).assign(&blocks.m_a);
    permuted.slice_mut(s![da.., da..]).assign(&blocks.m_b);
    permuted.slice_mut(s![..da, da..]).assign(&blocks.m_ab);
    permuted.slice_mut(s![da.., ..da]).assign(&blocks.m_ba());
    let perm = part.majorana_permutation();
    let mut out = Array2::zeros((dim, dim));
    for (i_new, &i_old) in perm.iter().enumerate() {
        for (j_new, &j_old) in perm.iter().enumerate() {
            out[[i_old, j_old]] = permuted[[i_new, j_new]];
        }
    }
    out
}

/// Random mixed Gaussian state: Γ = i·O(⊕_j ν_j J₂)Oᵀ with O Haar-random in
/// SO(2N) and ν_j uniform on [0, nu_max]. Deterministic for a fixed seed.
///
/// The ensemble is our choice; only the canonical form is dictated.
pub fn random_mixed_covariance(n_modes: usize, seed: u64, nu_max: f64) -> Result<CovarianceMatrix> {
    if !(0.0..1.0).contains(&nu_max) {
        return Err(Error::Numerical(format!(
            "nu_max must lie in [0, 1), got {nu_max}"
        )));
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    random_mixed_covariance_with(n_modes, nu_max, &mut rng)
}

/// As [`random_mixed_covariance`] but drawing from a caller-supplied RNG.
pub fn random_mixed_covariance_with<R: Rng + ?Sized>(
    n_modes: usize,
    nu_max: f64,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    let dim = 2 * n_modes;
    let o = linalg::haar_special_orthogonal(dim, rng)?;
    let mut sigma = Array2::<f64>::zeros((dim, dim));
    for j in 0..n_modes {
        let nu: f64 = rng.random_range(0.0..=nu_max.max(0.0));
        sigma[[2 * j, 2 * j + 1]] = nu;
        sigma[[2 * j + 1, 2 * j]] = -nu;
    }
    let m = o.dot(&sigma).dot(&o.t());
    let anti = 0.5 * (&m - &m.t());
    CovarianceMatrix::new(n_modes, anti)
}

/// Expectation value Tr[Ĥ ρ̂] = Tr[k·m] of a quadratic Hamiltonian in a
/// Gaussian state.
pub fn energy_expectation(h: &QuadraticHamiltonian, gamma: &CovarianceMatrix) -> f64 {
    h.k().dot(gamma.m()).diag().sum()
}
