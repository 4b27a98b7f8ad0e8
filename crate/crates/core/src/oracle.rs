//! Independent exponential-cost verification path: build the 2^N-dimensional
//! density matrix from Γ, apply the fermionic (twisted) partial transpose in
//! the Majorana monomial basis, and compute E = ln‖ρ^{T_A}‖₁ directly.
//!
//! Index-ordering conventions are the dominant bug source here, so every
//! construction is pinned by an exactness invariant: monomial reassembly must
//! reproduce ρ, and the covariance recomputed from ρ must reproduce Γ.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{Bipartition, CovarianceMatrix, QuadraticHamiltonian};
use crate::linalg;

/// Mode cap for dense-state construction (2^N × 2^N matrices).
pub const MAX_DENSE_MODES: usize = 6;
/// Mode cap for the 4^N-monomial partial transpose.
pub const MAX_TRANSPOSE_MODES: usize = 5;

/// Jordan–Wigner Majorana operators on the Fock basis. The basis index b
/// encodes occupations with n_1 in the least significant bit.
#[derive(Debug, Clone)]
pub struct MajoranaBasis {
    n_modes: usize,
    ops: Vec<Array2<Complex64>>,
}

impl MajoranaBasis {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// The 2N Majorana matrices; mode j owns entries 2j and 2j+1.
    pub fn ops(&self) -> &[Array2<Complex64>] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }
}

/// Build the Jordan–Wigner Majorana matrices
/// c_{2j} = f_j + f_j†, c_{2j+1} = -i(f_j - f_j†) with the
/// (-1)^{Σ_{i<j} n_i} string.
pub fn jordan_wigner_basis(n_modes: usize) -> Result<MajoranaBasis> {
    if n_modes > MAX_DENSE_MODES {
        return Err(Error::SizeCap {
            what: "Jordan-Wigner basis",
            n_modes,
            cap: MAX_DENSE_MODES,
        });
    }
    let dim = 1usize << n_modes;
    let mut ops = Vec::with_capacity(2 * n_modes);
    for j in 0..n_modes {
        let mut f = Array2::<Complex64>::zeros((dim, dim));
        for b in 0..dim {
            if b & (1 << j) != 0 {
                let sign = if (b & ((1 << j) - 1)).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                f[[b ^ (1 << j), b]] = Complex64::new(sign, 0.0);
            }
        }
        let f_dag = f.t().mapv(|z| z.conj());
        let c_even = &f + &f_dag;
        let c_odd = (&f - &f_dag).mapv(|z| Complex64::new(0.0, -1.0) * z);
        ops.push(c_even);
        ops.push(c_odd);
    }
    Ok(MajoranaBasis { n_modes, ops })
}

/// Dense density matrix of an N-mode state.
#[derive(Debug, Clone)]
pub struct DenseState {
    n_modes: usize,
    rho: Array2<Complex64>,
}

impl DenseState {
    /// Wrap a candidate density matrix, enforcing Hermiticity, unit trace,
    /// and positive semidefiniteness.
    pub fn new(n_modes: usize, rho: Array2<Complex64>) -> Result<Self> {
        let dim = 1usize << n_modes;
        if rho.dim() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rho.nrows(),
            });
        }
        let herm_defect = {
            let mut d = 0.0f64;
            for i in 0..dim {
                for j in 0..dim {
                    d = d.max((rho[[i, j]] - rho[[j, i]].conj()).norm());
                }
            }
            d
        };
        if herm_defect > 1e-10 {
            return Err(Error::Numerical(format!(
                "density matrix not Hermitian: defect {herm_defect:.3e}"
            )));
        }
        let trace: Complex64 = rho.diag().sum();
        if (trace - 1.0).norm() > 1e-10 {
            return Err(Error::Numerical(format!(
                "density matrix trace {trace} != 1"
            )));
        }
        let vals = linalg::hermitian_eigenvalues(&rho)?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::Numerical(format!(
                "density matrix not PSD: min eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { n_modes, rho })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn rho(&self) -> &Array2<Complex64> {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        let sq = self.rho.dot(&self.rho);
        sq.diag().iter().map(|z| z.re).sum()
    }
}

/// Build the Gaussian density matrix with covariance Γ: bring m to canonical
/// form m = O(⊕ν_j J₂)Oᵀ, rotate the Majorana basis by the columns of O, and
/// take ρ = 2^{-N} ∏_j (I - i ν_j c̃_{2j} c̃_{2j+1}). The sign convention is
/// pinned by recomputing Γ from ρ (must round-trip to 1e-9).
pub fn density_from_covariance(gamma: &CovarianceMatrix) -> Result<DenseState> {
    let n = gamma.n_modes();
    if n > MAX_DENSE_MODES {
        return Err(Error::SizeCap {
            what: "dense state construction",
            n_modes: n,
            cap: MAX_DENSE_MODES,
        });
    }
    let basis = jordan_wigner_basis(n)?;
    let dim = basis.dim();
    let (o, nus) = linalg::antisymmetric_canonical_form(gamma.m(), 1e-10)?;

    // c̃_k = Σ_j O_{jk} c_j
    let rotated: Vec<Array2<Complex64>> = (0..2 * n)
        .map(|k| {
            let mut acc = Array2::<Complex64>::zeros((dim, dim));
            for j in 0..2 * n {
                let w = o[[j, k]];
                if w != 0.0 {
                    acc = acc + basis.ops[j].mapv(|z| z * w);
                }
            }
            acc
        })
        .collect();

    let mut rho = Array2::<Complex64>::eye(dim);
    for (j, &nu) in nus.iter().enumerate() {
        let pair = rotated[2 * j].dot(&rotated[2 * j + 1]);
        let factor = Array2::<Complex64>::eye(dim) + pair.mapv(|z| Complex64::new(0.0, -nu) * z);
        rho = rho.dot(&factor);
    }
    rho.mapv_inplace(|z| z / dim as f64);
    // kill rounding residue off the Hermitian axis
    let rho_h = rho.t().mapv(|z| z.conj());
    let rho = (rho + rho_h).mapv(|z| 0.5 * z);

    let state = DenseState::new(n, rho)?;
    let back = covariance_from_density(&state, &basis)?;
    let defect = linalg::max_abs(&(back.m() - gamma.m()));
    if defect > 1e-9 {
        return Err(Error::Numerical(format!(
            "covariance round trip failed in dense construction: defect {defect:.3e}"
        )));
    }
    Ok(state)
}

/// Recompute the covariance matrix Γ_{jj'} = ½Tr([c_j, c_j']ρ) from a dense
/// state.
pub fn covariance_from_density(
    state: &DenseState,
    basis: &MajoranaBasis,
) -> Result<CovarianceMatrix> {
    let n = state.n_modes;
    let dim = basis.dim();
    let mut m = Array2::<f64>::zeros((2 * n, 2 * n));
    for j in 0..2 * n {
        for jp in (j + 1)..2 * n {
            let prod = basis.ops[j].dot(&basis.ops[jp]);
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                for k in 0..dim {
                    tr += prod[[i, k]] * state.rho[[k, i]];
                }
            }
            // Γ_{jj'} = ⟨c_j c_j'⟩ is purely imaginary for j ≠ j'
            m[[j, jp]] = tr.im;
            m[[jp, j]] = -tr.im;
        }
    }
    CovarianceMatrix::with_clip(n, m, 1e-6)
}

/// Subsystem parity operator P̂_A = ∏_{j∈A} (i c_{2j} c_{2j+1}).
pub fn parity_operator(basis: &MajoranaBasis, part: &Bipartition) -> Array2<Complex64> {
    let dim = basis.dim();
    let mut p = Array2::<Complex64>::eye(dim);
    for &mode in part.modes_a() {
        let pair = basis.ops[2 * mode].dot(&basis.ops[2 * mode + 1]);
        p = p.dot(&pair.mapv(|z| Complex64::new(0.0, 1.0) * z));
    }
    p
}

struct MonomialAccumulator<'a> {
    rho: &'a Array2<Complex64>,
    ops: &'a [Array2<Complex64>],
    a_mask: Vec<bool>,
    dim: usize,
    reconstruction: Array2<Complex64>,
    transposed: Array2<Complex64>,
}

impl MonomialAccumulator<'_> {
    fn descend(&mut self, idx: usize, prod: &Array2<Complex64>, degree: usize, a_degree: usize) {
        if idx == self.a_mask.len() {
            if !degree.is_multiple_of(2) {
                return; // superselection: only even monomials carry weight
            }
            // coefficient ρ_S = Tr[ρ c_{p_k}···c_{p_1}]/2^N = ⟨c_S, ρ⟩
            let mut coeff = Complex64::new(0.0, 0.0);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    coeff += prod[[i, j]].conj() * self.rho[[i, j]];
                }
            }
            coeff /= self.dim as f64;
            if coeff.norm() == 0.0 {
                return;
            }
            let twist = Complex64::new(0.0, 1.0).powu(a_degree as u32) * coeff;
            ndarray::Zip::from(&mut self.reconstruction)
                .and(&mut self.transposed)
                .and(prod)
                .for_each(|r, t, &p| {
                    *r += coeff * p;
                    *t += twist * p;
                });
            return;
        }
        self.descend(idx + 1, prod, degree, a_degree);
        let next = prod.dot(&self.ops[idx]);
        let a_inc = usize::from(self.a_mask[idx]);
        self.descend(idx + 1, &next, degree + 1, a_degree + a_inc);
    }
}

/// Expand ρ in ordered Majorana monomials and return
/// (ρ^{T_A} without the parity twist, exact reassembly of ρ).
///
/// The reassembly is the self-check of the expansion: it must reproduce ρ to
/// machine precision before the transposed output can be trusted.
pub fn untwisted_partial_transpose(
    state: &DenseState,
    part: &Bipartition,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    let n = state.n_modes;
    if n > MAX_TRANSPOSE_MODES {
        return Err(Error::SizeCap {
            what: "partial transpose",
            n_modes: n,
            cap: MAX_TRANSPOSE_MODES,
        });
    }
    if part.n_modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: part.n_modes(),
        });
    }
    let basis = jordan_wigner_basis(n)?;
    let dim = basis.dim();
    let mut a_mask = vec![false; 2 * n];
    for &mode in part.modes_a() {
        a_mask[2 * mode] = true;
        a_mask[2 * mode + 1] = true;
    }
    let mut acc = MonomialAccumulator {
        rho: &state.rho,
        ops: &basis.ops,
        a_mask,
        dim,
        reconstruction: Array2::zeros((dim, dim)),
        transposed: Array2::zeros((dim, dim)),
    };
    let identity = Array2::<Complex64>::eye(dim);
    acc.descend(0, &identity, 0, 0);
    let recon_defect = linalg::max_abs_complex(&(&acc.reconstruction - &state.rho));
    if recon_defect > 1e-12 {
        return Err(Error::Numerical(format!(
            "monomial expansion does not reassemble the state: defect {recon_defect:.3e}"
        )));
    }
    Ok((acc.transposed, acc.reconstruction))
}

/// Twisted partial transpose ρ^{T̃_A} = ρ^{T_A} P̂_A (Hermitian by
/// construction; checked to 1e-9).
pub fn twisted_partial_transpose(
    state: &DenseState,
    part: &Bipartition,
) -> Result<Array2<Complex64>> {
    let (untwisted, _) = untwisted_partial_transpose(state, part)?;
    let basis = jordan_wigner_basis(state.n_modes)?;
    let parity = parity_operator(&basis, part);
    let twisted = untwisted.dot(&parity);
    let dim = twisted.nrows();
    let mut defect = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            defect = defect.max((twisted[[i, j]] - twisted[[j, i]].conj()).norm());
        }
    }
    if defect > 1e-9 {
        return Err(Error::Numerical(format!(
            "twisted partial transpose not Hermitian: defect {defect:.3e}"
        )));
    }
    let twisted_h = twisted.t().mapv(|z| z.conj());
    Ok((twisted + twisted_h).mapv(|z| 0.5 * z))
}

/// E = ln‖ρ^{T_A}‖₁ from the spectrum of the Hermitian twisted transpose.
pub fn oracle_negativity(gamma: &CovarianceMatrix, part: &Bipartition) -> Result<f64> {
    let state = density_from_covariance(gamma)?;
    let twisted = twisted_partial_transpose(&state, part)?;
    let vals = linalg::hermitian_eigenvalues(&twisted)?;
    Ok(vals.iter().map(|v| v.abs()).sum::<f64>().ln())
}

/// Spectrum of the twisted transpose, ascending (debugging aid).
pub fn twisted_transpose_spectrum(
    gamma: &CovarianceMatrix,
    part: &Bipartition,
) -> Result<Vec<f64>> {
    let state = density_from_covariance(gamma)?;
    let twisted = twisted_partial_transpose(&state, part)?;
    let vals = linalg::hermitian_eigenvalues(&twisted)?;
    Ok(vals.to_vec())
}

/// Tr[Ĥ ρ̂] with Ĥ = Σ_{jj'} H_{jj'} ĉ_j ĉ_j' evaluated dense, for
/// cross-checking the covariance-level energy.
pub fn dense_energy_expectation(h: &QuadraticHamiltonian, gamma: &CovarianceMatrix) -> Result<f64> {
    let n = gamma.n_modes();
    let basis = jordan_wigner_basis(n)?;
    let state = density_from_covariance(gamma)?;
    let dim = basis.dim();
    let mut h_dense = Array2::<Complex64>::zeros((dim, dim));
    for j in 0..2 * n {
        for jp in 0..2 * n {
            let k = h.k()[[j, jp]];
            if k != 0.0 {
                let prod = basis.ops[j].dot(&basis.ops[jp]);
                h_dense = h_dense + prod.mapv(|z| Complex64::new(0.0, k) * z);
            }
        }
    }
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for k in 0..dim {
            tr += h_dense[[i, k]] * state.rho[[k, i]];
        }
    }
    Ok(tr.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::random_mixed_covariance;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_mode_majoranas_are_pauli_matrices() {
        let basis = jordan_wigner_basis(1).unwrap();
        let c1 = &basis.ops[0];
        let c2 = &basis.ops[1];
        assert_abs_diff_eq!(c1[[0, 1]].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c1[[1, 0]].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c2[[0, 1]].im, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c2[[1, 0]].im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn majoranas_anticommute_and_square_to_identity() {
        for n in [2usize, 3] {
            let basis = jordan_wigner_basis(n).unwrap();
            let dim = basis.dim();
            for i in 0..2 * n {
                // Hermitian
                for r in 0..dim {
                    for c in 0..dim {
                        let d = basis.ops[i][[r, c]] - basis.ops[i][[c, r]].conj();
                        assert!(d.norm() < 1e-12);
                    }
                }
                for j in 0..2 * n {
                    let anti = basis.ops[i].dot(&basis.ops[j]) + basis.ops[j].dot(&basis.ops[i]);
                    for r in 0..dim {
                        for c in 0..dim {
                            let expect = if i == j && r == c { 2.0 } else { 0.0 };
                            assert!(
                                (anti[[r, c]] - expect).norm() < 1e-12,
                                "{{c_{i}, c_{j}}} defect at ({r},{c})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn size_caps_are_enforced() {
        assert!(matches!(jordan_wigner_basis(7), Err(Error::SizeCap { .. })));
        let g = CovarianceMatrix::zero(7);
        assert!(matches!(
            density_from_covariance(&g),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn maximally_mixed_state_density() {
        let g = CovarianceMatrix::zero(3);
        let state = density_from_covariance(&g).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 0.125 } else { 0.0 };
                assert!((state.rho()[[i, j]] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cdw_density_is_the_fock_projector() {
        let g = crate::models::cdw_covariance(2).unwrap();
        let state = density_from_covariance(&g).unwrap();
        // |01⟩ (mode 2 occupied) is basis index 2 with n_1 in the LSB.
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == 2 && j == 2 { 1.0 } else { 0.0 };
                assert!(
                    (state.rho()[[i, j]] - expect).norm() < 1e-10,
                    "rho[{i},{j}] = {}",
                    state.rho()[[i, j]]
                );
            }
        }
    }

    #[test]
    fn covariance_round_trip_on_random_states() {
        for seed in [1u64, 12, 33] {
            let g = random_mixed_covariance(4, seed, 0.9).unwrap();
            // density_from_covariance runs the 1e-9 round-trip check internally
            let state = density_from_covariance(&g).unwrap();
            assert_abs_diff_eq!(state.purity(), g.purity().unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn transpose_of_the_maximally_mixed_state_is_trivial() {
        let g = CovarianceMatrix::zero(3);
        let part = Bipartition::new(3, vec![0, 2]).unwrap();
        let state = density_from_covariance(&g).unwrap();
        let twisted = twisted_partial_transpose(&state, &part).unwrap();
        let vals = linalg::hermitian_eigenvalues(&twisted).unwrap();
        let trace_norm: f64 = vals.iter().map(|v| v.abs()).sum();
        assert_abs_diff_eq!(trace_norm, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(oracle_negativity(&g, &part).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn bell_state_oracle_negativity_is_ln2() {
        let mut m = Array2::<f64>::zeros((4, 4));
        m[[0, 3]] = -1.0;
        m[[3, 0]] = 1.0;
        m[[1, 2]] = 1.0;
        m[[2, 1]] = -1.0;
        let g = CovarianceMatrix::new(2, m).unwrap();
        let part = Bipartition::new(2, vec![0]).unwrap();
        let e = oracle_negativity(&g, &part).unwrap();
        assert_abs_diff_eq!(e, std::f64::consts::LN_2, epsilon = 1e-10);
    }

    #[test]
    fn product_states_have_no_oracle_negativity() {
        // Gaussian product state on 4 modes: two independent two-mode blocks.
        let ga = random_mixed_covariance(2, 5, 0.9).unwrap();
        let gb = random_mixed_covariance(2, 6, 0.9).unwrap();
        let mut m = Array2::<f64>::zeros((8, 8));
        for i in 0..4 {
            for j in 0..4 {
                m[[i, j]] = ga.m()[[i, j]];
                m[[4 + i, 4 + j]] = gb.m()[[i, j]];
            }
        }
        let g = CovarianceMatrix::new(4, m).unwrap();
        let part = Bipartition::new(4, vec![0, 1]).unwrap();
        let e = oracle_negativity(&g, &part).unwrap();
        assert!(e.abs() < 1e-9, "product state E = {e}");
    }

    #[test]
    fn untwisted_and_twisted_trace_norms_agree() {
        let g = random_mixed_covariance(3, 21, 0.9).unwrap();
        let part = Bipartition::new(3, vec![1]).unwrap();
        let state = density_from_covariance(&g).unwrap();
        let (untwisted, _) = untwisted_partial_transpose(&state, &part).unwrap();
        let twisted = twisted_partial_transpose(&state, &part).unwrap();
        let untwisted_norm = linalg::norms_complex(&untwisted).unwrap().trace;
        let vals = linalg::hermitian_eigenvalues(&twisted).unwrap();
        let twisted_norm: f64 = vals.iter().map(|v| v.abs()).sum();
        assert_abs_diff_eq!(untwisted_norm, twisted_norm, epsilon = 1e-9);
    }

    #[test]
    fn two_mode_gibbs_oracle_matches_closed_form() {
        let h = crate::models::tight_binding(2, 1.0).unwrap();
        let g = crate::gaussian::gibbs_covariance(&h, 1.0).unwrap();
        let part = Bipartition::new(2, vec![0]).unwrap();
        let e = oracle_negativity(&g, &part).unwrap();
        let expect = (2.0 * 1.0f64.cosh() / (1.0 + 1.0f64.cosh())).ln();
        assert_abs_diff_eq!(e, expect, epsilon = 1e-10);
        assert_abs_diff_eq!(e, 0.193548, epsilon = 1e-5);
    }

    #[test]
    fn two_mode_loss_oracle_matches_closed_form() {
        let gamma_rate = 1.0;
        let t = 0.5;
        let gen = crate::models::uniform_loss(2, gamma_rate).unwrap();
        let mut m = Array2::<f64>::zeros((4, 4));
        m[[0, 3]] = -1.0;
        m[[3, 0]] = 1.0;
        m[[1, 2]] = 1.0;
        m[[2, 1]] = -1.0;
        let g0 = CovarianceMatrix::new(2, m).unwrap();
        let g = crate::lindblad::evolve_exact(&g0, &gen.parts(), t).unwrap();
        let part = Bipartition::new(2, vec![0]).unwrap();
        let e = oracle_negativity(&g, &part).unwrap();
        let d = (-gamma_rate * t).exp();
        let r = 1.0 - d;
        let expect = 0.5 * (2.0 * d * d + r * r + 2.0 * d * (d * d + r * r).sqrt()).ln();
        assert_abs_diff_eq!(e, expect, epsilon = 1e-8);
    }

    #[test]
    fn oracle_agrees_with_pencil_on_random_states() {
        for seed in [2u64, 9, 31] {
            let n = 3;
            let g = random_mixed_covariance(n, seed, 0.9).unwrap();
            let part = Bipartition::new(n, vec![seed as usize % 3]).unwrap();
            let e_oracle = oracle_negativity(&g, &part).unwrap();
            let e_pencil = crate::negativity::negativity(&g, &part).unwrap().value;
            assert!(
                (e_oracle - e_pencil).abs() < 1e-8,
                "seed {seed}: oracle {e_oracle} vs pencil {e_pencil}"
            );
        }
    }

    #[test]
    fn purity_matches_covariance_formula() {
        for seed in [3u64, 14] {
            let g = random_mixed_covariance(4, seed, 0.9).unwrap();
            let state = density_from_covariance(&g).unwrap();
            assert_abs_diff_eq!(state.purity(), g.purity().unwrap(), epsilon = 1e-9);
        }
    }
}
