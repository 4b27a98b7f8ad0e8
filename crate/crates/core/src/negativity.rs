//! Logarithmic negativity from the covariance matrix.
//!
//! The twisted characteristic polynomial
//!
//!   P(λ) = λ^{2N_A} det[[Γ_A + λ⁻¹I, Γ_AB], [Γ_BA, Γ_B - λI]]
//!
//! equals det(a0 + λ a1) for the pencil a0 = [[I, 0], [Γ_BA, Γ_B]],
//! a1 = [[Γ_A, Γ_AB], [0, -I]]. A unitary generalized Schur decomposition
//! gives P(λ) = κ ∏_j (s_j + λ t_j) with |κ| = 1, and the negativity is
//!
//!   E = ½ ln|P_>(0)| = ½ Σ_j ln max(|s_j|, |t_j|),
//!
//! which needs no polynomial coefficients and is insensitive to singular Γ_A
//! (roots at infinity carry t_j = 0 and contribute |s_j|).

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{partition, Bipartition, BlockView, CovarianceMatrix};
use crate::linalg;

/// Roots closer to the unit circle than this are classified as |λ| ≤ 1;
/// both branches of the max agree to first order there.
pub const UNIT_CIRCLE_TIE_TOL: f64 = 1e-9;
/// Γ_A counts as invertible when its smallest singular value exceeds this.
pub const SINGULAR_GAMMA_TOL: f64 = 1e-8;

/// The matrix pencil (a0, a1) whose generalized eigenvalues are the zeros of
/// the twisted characteristic polynomial.
#[derive(Debug, Clone)]
pub struct TwistedPencil {
    n_a: usize,
    n_b: usize,
    a0: Array2<Complex64>,
    a1: Array2<Complex64>,
}

impl TwistedPencil {
    pub fn a0(&self) -> &Array2<Complex64> {
        &self.a0
    }

    pub fn a1(&self) -> &Array2<Complex64> {
        &self.a1
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    /// det(a0 + λ a1), evaluated directly (test/diagnostic path).
    pub fn determinant_at(&self, lambda: Complex64) -> Result<Complex64> {
        use ndarray_linalg::Determinant;
        let m = &self.a0 + &self.a1.mapv(|z| z * lambda);
        Ok(m.det()?)
    }
}

/// Diagonals of the simultaneous unitary triangularization of (a0, a1).
#[derive(Debug, Clone, Serialize)]
pub struct PencilSpectrum {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub s_diag: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub t_diag: Vec<Complex64>,
    /// Finite generalized eigenvalues λ_j = -s_j/t_j, sorted by |λ|.
    #[serde(serialize_with = "serialize_complex_vec")]
    pub roots: Vec<Complex64>,
    /// Number of infinite eigenvalues (t_j = 0).
    pub infinite_count: usize,
}

fn serialize_complex_vec<S: serde::Serializer>(
    v: &[Complex64],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Re2 {
        re: f64,
        im: f64,
    }
    let mut seq = serializer.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&Re2 { re: z.re, im: z.im })?;
    }
    seq.end()
}

/// Negativity value together with the pencil spectrum that produced it.
/// Serializes flat as {value, roots: [{re, im}], infinite_count}.
#[derive(Debug, Clone)]
pub struct NegativityResult {
    pub value: f64,
    pub spectrum: PencilSpectrum,
}

impl Serialize for NegativityResult {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Root {
            re: f64,
            im: f64,
        }
        let roots: Vec<Root> = self
            .spectrum
            .roots
            .iter()
            .map(|z| Root { re: z.re, im: z.im })
            .collect();
        let mut st = serializer.serialize_struct("NegativityResult", 3)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("roots", &roots)?;
        st.serialize_field("infinite_count", &self.spectrum.infinite_count)?;
        st.end()
    }
}

/// Assemble the twisted pencil from covariance blocks.
pub fn build_pencil(blocks: &BlockView) -> TwistedPencil {
    let da = 2 * blocks.n_a();
    let db = 2 * blocks.n_b();
    let dim = da + db;
    let mut a0 = Array2::<Complex64>::zeros((dim, dim));
    let mut a1 = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..da {
        a0[[i, i]] = Complex64::new(1.0, 0.0);
    }
    a0.slice_mut(s![da.., ..da]).assign(&blocks.gamma_ba());
    a0.slice_mut(s![da.., da..]).assign(&blocks.gamma_b());
    a1.slice_mut(s![..da, ..da]).assign(&blocks.gamma_a());
    a1.slice_mut(s![..da, da..]).assign(&blocks.gamma_ab());
    for i in da..dim {
        a1[[i, i]] = Complex64::new(-1.0, 0.0);
    }
    TwistedPencil {
        n_a: blocks.n_a(),
        n_b: blocks.n_b(),
        a0,
        a1,
    }
}

/// Threshold below which a |t_j| is treated as an exact infinite eigenvalue.
fn is_infinite(s: Complex64, t: Complex64) -> bool {
    let scale = s.norm().max(t.norm()).max(1.0);
    t.norm() <= 1e-280 * scale
}

/// Generalized Schur decomposition of the pencil. Both matrices are scaled by
/// their joint max entry before the decomposition and the diagonals are
/// rescaled back, so the returned (s, t) factor the original polynomial.
pub fn pencil_spectrum(pencil: &TwistedPencil) -> Result<PencilSpectrum> {
    let c = linalg::max_abs_complex(&pencil.a0)
        .max(linalg::max_abs_complex(&pencil.a1))
        .max(f64::MIN_POSITIVE);
    let a0 = pencil.a0.mapv(|z| z / c);
    let a1 = pencil.a1.mapv(|z| z / c);
    let (mut s_diag, mut t_diag) = linalg::pencil_schur_diagonals(&a0, &a1)?;
    for v in s_diag.iter_mut().chain(t_diag.iter_mut()) {
        *v *= c;
    }

    let mut roots = Vec::new();
    let mut infinite_count = 0usize;
    for (&s, &t) in s_diag.iter().zip(&t_diag) {
        if is_infinite(s, t) {
            infinite_count += 1;
        } else {
            roots.push(-s / t);
        }
    }
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    Ok(PencilSpectrum {
        s_diag,
        t_diag,
        roots,
        infinite_count,
    })
}

fn negativity_from_spectrum(spectrum: &PencilSpectrum) -> Result<f64> {
    let mut e = 0.0f64;
    for (&s, &t) in spectrum.s_diag.iter().zip(&spectrum.t_diag) {
        let (sn, tn) = (s.norm(), t.norm());
        if tn > 0.0 {
            let dist = (sn / tn - 1.0).abs();
            if dist <= UNIT_CIRCLE_TIE_TOL {
                log::debug!("pencil root within {dist:.1e} of the unit circle; max() branches agree to first order");
            }
        }
        e += 0.5 * sn.max(tn).ln();
    }
    if e < -1e-10 {
        return Err(Error::Numerical(format!(
            "negativity came out {e:.3e} < 0 beyond the numerical floor"
        )));
    }
    Ok(e.max(0.0))
}

/// Logarithmic negativity E = ½ ln|P_>(0)| of a Gaussian state.
pub fn negativity(gamma: &CovarianceMatrix, part: &Bipartition) -> Result<NegativityResult> {
    let blocks = partition(gamma, part)?;
    negativity_of_blocks(&blocks)
}

/// Negativity from pre-partitioned blocks.
pub fn negativity_of_blocks(blocks: &BlockView) -> Result<NegativityResult> {
    let pencil = build_pencil(blocks);
    let spectrum = pencil_spectrum(&pencil)?;
    let value = negativity_from_spectrum(&spectrum)?;
    Ok(NegativityResult { value, spectrum })
}

/// Exact negativity when Γ_A (or Γ_B) vanishes:
/// E = ½ tr ln(I_B + Γ_BA Γ_AB) = ½ Σ_i ln(1 + σ_i²) over the singular
/// values σ_i of m_AB.
pub fn vanishing_block_negativity(blocks: &BlockView) -> Result<f64> {
    let sv = linalg::singular_values(blocks.m_ab())?;
    Ok(0.5 * sv.iter().map(|s| (1.0 + s * s).ln()).sum::<f64>())
}

/// Covariance matrix of the twisted partial transpose, stored through the
/// real matrix G with Γ̃₊ = i·G:
///
///   G = [[m_A⁻¹, m_A⁻¹ m_AB], [-m_BA m_A⁻¹, m_B - m_BA m_A⁻¹ m_AB]].
#[derive(Debug, Clone)]
pub struct TwistedCovariance {
    n_a: usize,
    n_b: usize,
    g: Array2<f64>,
}

impl TwistedCovariance {
    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    /// Real representation G of Γ̃₊ = i·G (blocks in A-first ordering).
    pub fn g(&self) -> &Array2<f64> {
        &self.g
    }

    /// The complex twisted covariance matrix Γ̃₊ itself.
    pub fn gamma_tilde(&self) -> Array2<Complex64> {
        linalg::times_i(&self.g)
    }

    /// Eigenvalues λ̃ of Γ̃₊ (pairs ±λ̃_j, real for physical states).
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let (vals, _) = linalg::real_eig(&self.g)?;
        let i = Complex64::new(0.0, 1.0);
        let mut out: Vec<Complex64> = vals.iter().map(|&v| i * v).collect();
        out.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        Ok(out)
    }

    /// Eigendecomposition of G (shared by the rate machinery).
    pub(crate) fn real_eigensystem(
        &self,
    ) -> Result<(ndarray::Array1<Complex64>, Array2<Complex64>)> {
        linalg::real_eig(&self.g)
    }
}

/// Build the twisted covariance matrix; requires Γ_A invertible.
pub fn twisted_covariance(blocks: &BlockView) -> Result<TwistedCovariance> {
    use ndarray_linalg::Inverse;
    let sv = linalg::singular_values(blocks.m_a())?;
    let min_sv = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_sv.is_nan() || min_sv <= SINGULAR_GAMMA_TOL {
        return Err(Error::SingularGammaA { min_sv });
    }
    let ma_inv = blocks.m_a().inv()?;
    let da = 2 * blocks.n_a();
    let db = 2 * blocks.n_b();
    let dim = da + db;
    let top_right = ma_inv.dot(blocks.m_ab());
    let m_ba = blocks.m_ba();
    let bottom_left = -m_ba.dot(&ma_inv);
    let bottom_right = blocks.m_b() - &m_ba.dot(&ma_inv).dot(blocks.m_ab());
    let mut g = Array2::zeros((dim, dim));
    g.slice_mut(s![..da, ..da]).assign(&ma_inv);
    g.slice_mut(s![..da, da..]).assign(&top_right);
    g.slice_mut(s![da.., ..da]).assign(&bottom_left);
    g.slice_mut(s![da.., da..]).assign(&bottom_right);
    Ok(TwistedCovariance {
        n_a: blocks.n_a(),
        n_b: blocks.n_b(),
        g,
    })
}

/// Negativity along the twisted-covariance route:
/// E = ½ ln|det Γ_A| + Σ_{λ̃_j > 1} ln λ̃_j (using |Pf|² = |det|).
pub fn negativity_via_twisted(gamma: &CovarianceMatrix, part: &Bipartition) -> Result<f64> {
    let blocks = partition(gamma, part)?;
    let twisted = twisted_covariance(&blocks)?;
    let ln_det = linalg::ln_abs_det(blocks.m_a())?;
    // Eigenvalues come in ± pairs; summing ln|λ̃| over all |λ̃| > 1 double
    // counts each pair, so half of it is the single-branch sum.
    let mut sum = 0.0;
    for lam in twisted.eigenvalues()? {
        let a = lam.norm();
        if a > 1.0 {
            sum += a.ln();
        }
    }
    let e = 0.5 * ln_det + 0.5 * sum;
    if e < -1e-10 {
        return Err(Error::Numerical(format!(
            "twisted-route negativity came out {e:.3e} < 0 beyond the numerical floor"
        )));
    }
    Ok(e.max(0.0))
}
