//! Negativity change rate ∂_t E = ½ Tr[P_AB(Γ) ∂_t Γ] and the superoperator
//!
//!   P_AB(Γ) = ∫_{-π}^{π} dk/2π (Z_AB(k) + Γ)⁻¹,
//!   Z_AB(k) = e^{ik} I_A ⊕ (-e^{-ik}) I_B,
//!
//! computed either by periodic-trapezoid quadrature or from the spectral
//! projectors of the twisted covariance matrix:
//!
//!   P_A P_AB P_A = -P_A P^< Γ̃₊ P_A,
//!   P_B P_AB P_B = +P_B P^> Γ̃₊⁻¹ P_B,
//!   P_A P_AB P_B = +i P_A P^> P_B,     P_B P_AB P_A = (P_A P_AB P_B)†,
//!
//! where P^≶ project onto eigenvectors of Γ̃₊ with |λ̃| ≶ 1. The residue
//! calculus fixes the B-block sign as +: the pole of ∮ dζ/2πi (1+ζλ̃)⁻¹ at
//! ζ = -1/λ̃ contributes +1/λ̃ for |λ̃| > 1. The block route is preferred;
//! quadrature is the cross-check (its convergence degrades as eigenvalues
//! approach the unit circle).

use ndarray::{s, Array2};
use ndarray_linalg::{Inverse, Solve, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{partition, Bipartition, CovarianceMatrix};
use crate::linalg;
use crate::lindblad::{dgamma_dt, GeneratorParts, LindbladGenerator};
use crate::negativity::{twisted_covariance, SINGULAR_GAMMA_TOL};

/// Eigenvalues of Γ̃₊ within this distance of the unit circle make the block
/// representation ill-defined.
pub const UNIT_CIRCLE_HARD_TOL: f64 = 1e-9;
/// Distance below which the result is flagged as near-singular.
pub const UNIT_CIRCLE_SOFT_TOL: f64 = 1e-6;
/// Condition-number guard on the eigenvector matrix of Γ̃₊.
pub const EIGENBASIS_COND_LIMIT: f64 = 1e10;
/// Default quadrature node count.
pub const DEFAULT_QUADRATURE_NODES: usize = 1024;

/// How a P_AB matrix was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PabMethod {
    Quadrature,
    Block,
}

/// The P_AB superoperator evaluated at a state, in the original Majorana
/// ordering.
#[derive(Debug, Clone)]
pub struct PabMatrix {
    pub p: Array2<Complex64>,
    pub method: PabMethod,
    /// Some |λ̃_j| within [`UNIT_CIRCLE_SOFT_TOL`] of 1: the rate may sit
    /// near one of its discontinuities.
    pub singularity_flag: bool,
}

impl PabMatrix {
    /// Operator norm of P_AB (bounded by 2 whenever defined).
    pub fn operator_norm(&self) -> Result<f64> {
        Ok(linalg::norms_complex(&self.p)?.operator)
    }
}

fn z_ab(n_a: usize, n_b: usize, k: f64) -> Array2<Complex64> {
    let dim = 2 * (n_a + n_b);
    let mut z = Array2::zeros((dim, dim));
    let e_plus = Complex64::from_polar(1.0, k);
    let e_minus = -Complex64::from_polar(1.0, -k);
    for i in 0..2 * n_a {
        z[[i, i]] = e_plus;
    }
    for i in 2 * n_a..dim {
        z[[i, i]] = e_minus;
    }
    z
}

/// P_AB by periodic trapezoid quadrature with `nodes` equispaced points on
/// the half-open interval (midpoint-shifted so k = 0, ±π are never hit).
/// Spectrally accurate while the eigenvalues of Γ̃ stay away from the unit
/// circle.
pub fn pab_quadrature(
    gamma: &CovarianceMatrix,
    part: &Bipartition,
    nodes: usize,
) -> Result<PabMatrix> {
    use ndarray_linalg::FactorizeInto;
    if nodes == 0 {
        return Err(Error::Numerical(
            "quadrature needs at least one node".into(),
        ));
    }
    let m_perm = part.permute(gamma.m());
    let gamma_c = linalg::times_i(&m_perm);
    let dim = gamma_c.nrows();
    let mut acc = Array2::<Complex64>::zeros((dim, dim));
    let identity = Array2::<Complex64>::eye(dim);
    for node in 0..nodes {
        let k =
            -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (node as f64 + 0.5) / nodes as f64;
        let mat = z_ab(part.n_a(), part.n_b(), k) + &gamma_c;
        let (_, sv, _) = mat.svd(false, false)?;
        let sv_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let sv_max = sv.iter().cloned().fold(0.0f64, f64::max);
        if sv_min <= 1e-12 * sv_max {
            return Err(Error::NearSingularNode {
                k,
                rcond: sv_min / sv_max,
            });
        }
        let lu = mat.factorize_into()?;
        for j in 0..dim {
            let col = identity.column(j).to_owned();
            let x = lu.solve(&col)?;
            acc.column_mut(j).zip_mut_with(&x, |a, b| *a += b);
        }
    }
    let p_perm = acc.mapv(|z| z / nodes as f64);
    Ok(PabMatrix {
        p: part.unpermute_complex(&p_perm),
        method: PabMethod::Quadrature,
        singularity_flag: false,
    })
}

/// P_AB through the block-diagonal spectral representation of Γ̃₊.
pub fn pab_block(gamma: &CovarianceMatrix, part: &Bipartition) -> Result<PabMatrix> {
    let blocks = partition(gamma, part)?;
    // Both diagonal blocks must be invertible for the twisted matrix and its
    // inverse blocks to exist.
    let sv_b = linalg::singular_values(blocks.m_b())?;
    let min_b = sv_b.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_b.is_nan() || min_b <= SINGULAR_GAMMA_TOL {
        return Err(Error::SingularBlock {
            block: 'B',
            min_sv: min_b,
        });
    }
    let twisted = twisted_covariance(&blocks).map_err(|e| match e {
        Error::SingularGammaA { min_sv } => Error::SingularBlock { block: 'A', min_sv },
        other => other,
    })?;

    let (g_vals, w) = twisted.real_eigensystem()?;
    let dim = g_vals.len();
    let cond = linalg::condition_number(&w)?;
    if cond > EIGENBASIS_COND_LIMIT {
        return Err(Error::IllConditioned {
            what: "twisted covariance eigenbasis",
            cond,
            limit: EIGENBASIS_COND_LIMIT,
        });
    }
    let mut min_dist = f64::INFINITY;
    let mut offender = 0.0f64;
    for v in g_vals.iter() {
        let dist = (v.norm() - 1.0).abs();
        if dist < min_dist {
            min_dist = dist;
            offender = v.norm();
        }
    }
    if min_dist <= UNIT_CIRCLE_HARD_TOL {
        return Err(Error::UnitCircleEigenvalue {
            lambda_abs: offender,
            distance: min_dist,
        });
    }
    let singularity_flag = min_dist <= UNIT_CIRCLE_SOFT_TOL;

    let w_inv = w.inv()?;
    // Γ̃₊ = i·G with G = W diag(g) W⁻¹; |λ̃_j| = |g_j|.
    let weighted = |f: &dyn Fn(Complex64) -> Complex64| -> Array2<Complex64> {
        let mut scaled = w.clone();
        for (j, &g) in g_vals.iter().enumerate() {
            let fv = f(g);
            for i in 0..dim {
                scaled[[i, j]] *= fv;
            }
        }
        scaled.dot(&w_inv)
    };
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // P^< Γ̃₊ = i · W diag(g·1_<) W⁻¹
    let below = weighted(&|g| if g.norm() < 1.0 { g } else { zero });
    // P^> Γ̃₊⁻¹ = -i · W diag(1_>/g) W⁻¹
    let above_inv = weighted(&|g| if g.norm() > 1.0 { one / g } else { zero });
    // P^>
    let above = weighted(&|g| if g.norm() > 1.0 { one } else { zero });

    let da = 2 * part.n_a();
    let i_unit = Complex64::new(0.0, 1.0);
    let mut p_perm = Array2::<Complex64>::zeros((dim, dim));
    // A-A block: -(P^< Γ̃₊)_AA = -(i·below)_AA
    p_perm
        .slice_mut(s![..da, ..da])
        .assign(&below.slice(s![..da, ..da]).mapv(|z| -i_unit * z));
    // B-B block: +(P^> Γ̃₊⁻¹)_BB = (-i·above_inv)_BB
    p_perm
        .slice_mut(s![da.., da..])
        .assign(&above_inv.slice(s![da.., da..]).mapv(|z| -i_unit * z));
    // A-B block: +i (P^>)_AB, and B-A is its Hermitian partner.
    let ab = above.slice(s![..da, da..]).mapv(|z| i_unit * z);
    p_perm.slice_mut(s![..da, da..]).assign(&ab);
    let ba = ab.t().mapv(|z| z.conj());
    p_perm.slice_mut(s![da.., ..da]).assign(&ba);

    // P_AB is Hermitian; fold the diagonal blocks onto the Hermitian axis to
    // shed eigenbasis rounding.
    let p_h = p_perm.t().mapv(|z| z.conj());
    let p_perm = (&p_perm + &p_h).mapv(|z| 0.5 * z);

    Ok(PabMatrix {
        p: part.unpermute_complex(&p_perm),
        method: PabMethod::Block,
        singularity_flag,
    })
}

/// P_AB with the preferred method: block representation, falling back to
/// quadrature when the block preconditions fail.
pub fn pab(gamma: &CovarianceMatrix, part: &Bipartition) -> Result<PabMatrix> {
    match pab_block(gamma, part) {
        Ok(p) => Ok(p),
        Err(
            err @ (Error::SingularBlock { .. }
            | Error::SingularGammaA { .. }
            | Error::UnitCircleEigenvalue { .. }
            | Error::IllConditioned { .. }),
        ) => {
            log::warn!("block P_AB unavailable ({err}); falling back to quadrature");
            let mut p = pab_quadrature(gamma, part, DEFAULT_QUADRATURE_NODES)?;
            p.singularity_flag = true;
            Ok(p)
        }
        Err(e) => Err(e),
    }
}

/// ½ Tr[P_AB · dΓ] for dΓ = i·dm; the result must be real up to a 1e-9
/// residue, which is checked and discarded.
pub fn rate_given_pab(p: &PabMatrix, dm: &Array2<f64>) -> Result<f64> {
    let dim = dm.nrows();
    if p.p.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.p.nrows(),
        });
    }
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            tr += p.p[[i, j]] * dm[[j, i]];
        }
    }
    let full = Complex64::new(0.0, 0.5) * tr;
    let scale = 1.0f64.max(full.re.abs());
    if full.im.abs() > 1e-9 * scale {
        return Err(Error::Numerical(format!(
            "negativity rate has imaginary residue {:.3e}",
            full.im
        )));
    }
    Ok(full.re)
}

/// ∂_t E = ½ Tr[P_AB(Γ) ∂_t Γ] for a given velocity dΓ = i·dm.
pub fn rate(gamma: &CovarianceMatrix, dm: &Array2<f64>, part: &Bipartition) -> Result<f64> {
    let p = pab(gamma, part)?;
    rate_given_pab(&p, dm)
}

/// Rate split into local-operation and inter-subsystem generator parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateDecomposition {
    pub total: f64,
    pub lo: f64,
    pub inter: f64,
    pub singularity_flag: bool,
}

/// Decompose the rate by splitting (H, X, Y) into block-diagonal and
/// off-diagonal parts; total = lo + inter by linearity (one shared P_AB).
pub fn rate_decomposition(
    gamma: &CovarianceMatrix,
    gen: &LindbladGenerator,
    part: &Bipartition,
) -> Result<RateDecomposition> {
    let p = pab(gamma, part)?;
    let parts = gen.parts();
    let dm_lo = dgamma_dt(gamma, &parts.block_diagonal(part));
    let dm_inter = dgamma_dt(gamma, &parts.inter(part));
    let lo = rate_given_pab(&p, &dm_lo)?;
    let inter = rate_given_pab(&p, &dm_inter)?;
    Ok(RateDecomposition {
        total: lo + inter,
        lo,
        inter,
        singularity_flag: p.singularity_flag,
    })
}

/// Lindbladian-only bounds on the rate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateBounds {
    /// 2(4‖H‖₁ + ‖X‖₁ + ‖Y‖₁), bounding |∂_t E|.
    pub magnitude_bound: f64,
    /// 2(4‖H_inter‖₁ + ‖X_inter‖₁ + ‖Y_inter‖₁), bounding ∂_t E from above.
    pub increase_bound: f64,
}

/// Evaluate both rate bounds from the generator alone.
pub fn rate_bounds(gen: &LindbladGenerator, part: &Bipartition) -> Result<RateBounds> {
    let parts = gen.parts();
    let inter = parts.inter(part);
    let combo = |p: &GeneratorParts| -> Result<f64> {
        Ok(2.0
            * (4.0 * linalg::trace_norm(&p.k_h)?
                + linalg::trace_norm(&p.x)?
                + linalg::trace_norm(&p.y)?))
    };
    Ok(RateBounds {
        magnitude_bound: combo(&parts)?,
        increase_bound: combo(&inter)?,
    })
}
