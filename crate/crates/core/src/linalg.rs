//! Dense linear-algebra helpers: generalized Schur decomposition of a matrix
//! pencil (LAPACK `zgges`), matrix norms, the canonical form of real
//! antisymmetric matrices, and Haar-random special orthogonal matrices.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, Eig, EigValsh, Eigh, QR, SVD, UPLO};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

// LAPACK driver for the generalized Schur factorization of a complex pencil.
// Linked through the OpenBLAS backend already pulled in by ndarray-linalg.
extern "C" {
    fn zgges_(
        jobvsl: *const u8,
        jobvsr: *const u8,
        sort: *const u8,
        selctg: *const std::ffi::c_void,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        b: *mut Complex64,
        ldb: *const i32,
        sdim: *mut i32,
        alpha: *mut Complex64,
        beta: *mut Complex64,
        vsl: *mut Complex64,
        ldvsl: *const i32,
        vsr: *mut Complex64,
        ldvsr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        bwork: *mut i32,
        info: *mut i32,
    );
}

fn column_major(a: &Array2<Complex64>) -> Vec<Complex64> {
    let (rows, cols) = a.dim();
    let mut out = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            out.push(a[[i, j]]);
        }
    }
    out
}

/// Simultaneous unitary triangularization of the pencil (a0, a1):
/// a0 = Q S Z†, a1 = Q T Z† with S, T upper triangular.
///
/// Returns the diagonals (s, t) of (S, T). Since Q and Z are unitary,
/// det(a0 + λ a1) = κ ∏_j (s_j + λ t_j) with |κ| = 1, and the generalized
/// eigenvalues are λ_j = -s_j / t_j (infinite when t_j = 0).
pub fn pencil_schur_diagonals(
    a0: &Array2<Complex64>,
    a1: &Array2<Complex64>,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = a0.nrows();
    if a0.ncols() != n {
        return Err(Error::NotSquare(a0.nrows(), a0.ncols()));
    }
    if a1.dim() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a1.nrows(),
        });
    }
    let mut a = column_major(a0);
    let mut b = column_major(a1);
    let mut alpha = vec![Complex64::new(0.0, 0.0); n];
    let mut beta = vec![Complex64::new(0.0, 0.0); n];
    let n_i32 = n as i32;
    let mut sdim = 0i32;
    let mut info = 0i32;
    let mut rwork = vec![0.0f64; 8 * n];
    let mut bwork = vec![0i32; n];
    let job = b'N';
    let one = 1i32;

    // Workspace query, then the actual decomposition.
    let mut work_query = [Complex64::new(0.0, 0.0)];
    let query = -1i32;
    unsafe {
        zgges_(
            &job,
            &job,
            &job,
            std::ptr::null(),
            &n_i32,
            a.as_mut_ptr(),
            &n_i32,
            b.as_mut_ptr(),
            &n_i32,
            &mut sdim,
            alpha.as_mut_ptr(),
            beta.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            work_query.as_mut_ptr(),
            &query,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zgges (workspace query)",
            info,
        });
    }
    let lwork = (work_query[0].re as i32).max(2 * n_i32).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zgges_(
            &job,
            &job,
            &job,
            std::ptr::null(),
            &n_i32,
            a.as_mut_ptr(),
            &n_i32,
            b.as_mut_ptr(),
            &n_i32,
            &mut sdim,
            alpha.as_mut_ptr(),
            beta.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zgges",
            info,
        });
    }
    Ok((alpha, beta))
}

/// Operator norm, Frobenius norm, and trace norm of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MatrixNorms {
    /// Largest singular value.
    pub operator: f64,
    /// sqrt of the sum of squared absolute entries.
    pub frobenius: f64,
    /// Sum of singular values.
    pub trace: f64,
}

/// Norms of a complex matrix (operator and trace norms via SVD).
pub fn norms_complex(m: &Array2<Complex64>) -> Result<MatrixNorms> {
    let (_, sv, _) = m.svd(false, false)?;
    Ok(MatrixNorms {
        operator: sv.iter().cloned().fold(0.0, f64::max),
        frobenius: m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        trace: sv.sum(),
    })
}

/// Norms of a real matrix.
pub fn norms_real(m: &Array2<f64>) -> Result<MatrixNorms> {
    let (_, sv, _) = m.svd(false, false)?;
    Ok(MatrixNorms {
        operator: sv.iter().cloned().fold(0.0, f64::max),
        frobenius: m.iter().map(|x| x * x).sum::<f64>().sqrt(),
        trace: sv.sum(),
    })
}

pub fn singular_values(m: &Array2<f64>) -> Result<Array1<f64>> {
    let (_, sv, _) = m.svd(false, false)?;
    Ok(sv)
}

pub fn operator_norm(m: &Array2<f64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().cloned().fold(0.0, f64::max))
}

pub fn trace_norm(m: &Array2<f64>) -> Result<f64> {
    Ok(singular_values(m)?.sum())
}

pub fn frobenius_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Condition number (ratio of extreme singular values) of a complex matrix.
pub fn condition_number(m: &Array2<Complex64>) -> Result<f64> {
    let (_, sv, _) = m.svd(false, false)?;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

pub fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_complex(m: &Array2<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Lift a real matrix to complex entries.
pub fn to_complex(m: &Array2<f64>) -> Array2<Complex64> {
    m.mapv(|x| Complex64::new(x, 0.0))
}

/// i·m, the purely imaginary matrix represented by its real part m.
pub fn times_i(m: &Array2<f64>) -> Array2<Complex64> {
    m.mapv(|x| Complex64::new(0.0, x))
}

/// Eigendecomposition of a complex Hermitian matrix with columns as right
/// eigenvectors of the matrix itself.
///
/// ndarray-linalg 0.18 hands row-major complex buffers to LAPACK unchanged,
/// so zheev factorizes the memory-transpose (= conjugate) and the returned
/// vectors belong to h̄; conjugating restores the eigenvectors of h.
pub fn hermitian_eig(h: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let (vals, vecs) = h.eigh(UPLO::Lower)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Apply a real scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(
    h: &Array2<Complex64>,
    f: impl Fn(f64) -> f64,
) -> Result<Array2<Complex64>> {
    let (vals, vecs) = hermitian_eig(h)?;
    let n = h.nrows();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let fv = Complex64::new(f(v), 0.0);
        for i in 0..n {
            scaled[[i, j]] *= fv;
        }
    }
    let vecs_h = vecs.t().mapv(|z| z.conj());
    Ok(scaled.dot(&vecs_h))
}

/// Eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &Array2<Complex64>) -> Result<Array1<f64>> {
    Ok(h.eigvalsh(UPLO::Lower)?)
}

/// Log of |det| of a real matrix (sign discarded).
pub fn ln_abs_det(m: &Array2<f64>) -> Result<f64> {
    let (_, ln_det) = m.sln_det()?;
    Ok(ln_det)
}

/// Canonical form of a real antisymmetric matrix:
/// m = O (⊕_j ν_j J₂) Oᵀ with O special orthogonal, J₂ = [[0, 1], [-1, 0]].
///
/// The ν_j are real and may be negative (one sign flip absorbs the
/// det(O) = +1 normalization). Pairs with |ν| below `kernel_tol` are taken
/// from a real SVD kernel basis so that near-degenerate complex eigenvectors
/// never mix.
pub fn antisymmetric_canonical_form(
    m: &Array2<f64>,
    kernel_tol: f64,
) -> Result<(Array2<f64>, Vec<f64>)> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if !dim.is_multiple_of(2) {
        return Err(Error::Numerical(format!(
            "antisymmetric canonical form needs even dimension, got {dim}"
        )));
    }
    let n_pairs = dim / 2;

    // Hermitian i·m has eigenpairs (±ν, u, ū); the real and imaginary parts
    // of u span the corresponding 2-plane.
    let im = times_i(m);
    let (vals, vecs) = hermitian_eig(&im)?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());

    let mut o = Array2::<f64>::zeros((dim, dim));
    let mut nus = Vec::with_capacity(n_pairs);
    let mut col = 0usize;

    for &idx in order.iter() {
        let nu = vals[idx];
        if nu <= kernel_tol {
            break; // remaining eigenvalues are kernel-level or the -ν partners
        }
        let u = vecs.column(idx);
        let mut x: Vec<f64> = u.iter().map(|z| z.re).collect();
        let mut y: Vec<f64> = u.iter().map(|z| z.im).collect();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx < 1e-8 || ny < 1e-8 {
            return Err(Error::Numerical(
                "degenerate eigenvector in antisymmetric canonical form".into(),
            ));
        }
        x.iter_mut().for_each(|v| *v /= nx);
        y.iter_mut().for_each(|v| *v /= ny);
        // Columns (y, x) realize the block ν J₂: m y = -ν x, m x = ν y.
        for i in 0..dim {
            o[[i, col]] = y[i];
            o[[i, col + 1]] = x[i];
        }
        nus.push(nu);
        col += 2;
    }

    // Fill the (near-)kernel with a real orthonormal basis from the SVD.
    if col < dim {
        let (_, sv, vt) = m.svd(false, true)?;
        let vt = vt.expect("svd requested vt");
        let mut kernel_cols: Vec<usize> = (0..dim).filter(|&i| sv[i] <= kernel_tol).collect();
        // Orthonormality against the filled columns is automatic (kernel ⊥ range
        // for normal matrices), but guard against tolerance mismatches.
        while col < dim {
            let k = kernel_cols.pop().ok_or_else(|| {
                Error::Numerical("antisymmetric canonical form: kernel basis exhausted".into())
            })?;
            let mut v: Vec<f64> = (0..dim).map(|i| vt[[k, i]]).collect();
            // Project out everything already placed.
            for c in 0..col {
                let dot: f64 = (0..dim).map(|i| o[[i, c]] * v[i]).sum();
                for i in 0..dim {
                    v[i] -= dot * o[[i, c]];
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            for i in 0..dim {
                o[[i, col]] = v[i] / norm;
            }
            col += 1;
            if col.is_multiple_of(2) {
                nus.push(0.0);
            }
        }
    }

    // Normalize to det(O) = +1 by flipping one column; flipping the first
    // column of a block negates its ν, which the signed convention absorbs.
    let (sign, _) = o.sln_det()?;
    if sign < 0.0 {
        for i in 0..dim {
            o[[i, 0]] = -o[[i, 0]];
        }
        nus[0] = -nus[0];
    }
    Ok((o, nus))
}

/// Haar-distributed special orthogonal matrix (QR of a Gaussian matrix with
/// the R-diagonal sign fix, then one column flip onto SO if needed).
pub fn haar_special_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Array2<f64>> {
    let mut g = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            g[[i, j]] = StandardNormal.sample(rng);
        }
    }
    let (q, r) = g.qr()?;
    let mut q = q;
    for j in 0..dim {
        if r[[j, j]] < 0.0 {
            for i in 0..dim {
                q[[i, j]] = -q[[i, j]];
            }
        }
    }
    let (sign, _) = q.sln_det()?;
    if sign < 0.0 {
        for i in 0..dim {
            q[[i, dim - 1]] = -q[[i, dim - 1]];
        }
    }
    Ok(q)
}

/// Complex eigendecomposition of a real matrix.
pub fn real_eig(a: &Array2<f64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    let (vals, vecs) = a.eig()?;
    Ok((vals, vecs))
}

/// Complex eigendecomposition of a complex matrix.
pub fn complex_eig(a: &Array2<Complex64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    let (vals, vecs) = a.eig()?;
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::SeedableRng;

    #[test]
    fn pencil_schur_reproduces_small_determinants() {
        // Pencil with one finite eigenvalue (-2) and one infinite eigenvalue.
        let a0 = array![
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)]
        ];
        let a1 = array![
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let (s, t) = pencil_schur_diagonals(&a0, &a1).unwrap();
        // det(a0 + λ a1) = (2 + λ)·3; check |∏(s_j + λ t_j)| at a sample point.
        let lambda = Complex64::new(0.3, 0.7);
        let prod: Complex64 = s.iter().zip(&t).map(|(si, ti)| si + lambda * ti).product();
        let det = (Complex64::new(2.0, 0.0) + lambda) * 3.0;
        assert_abs_diff_eq!(prod.norm(), det.norm(), epsilon = 1e-12);
        // Exactly one infinite eigenvalue.
        assert_eq!(t.iter().filter(|ti| ti.norm() == 0.0).count(), 1);
    }

    #[test]
    fn norms_of_diag_3_minus_4() {
        let m = array![[3.0, 0.0], [0.0, -4.0]];
        let n = norms_real(&m).unwrap();
        assert_abs_diff_eq!(n.operator, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.frobenius, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.trace, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn canonical_form_reconstructs() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for dim in [4usize, 6, 8] {
            let mut m = Array2::<f64>::zeros((dim, dim));
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    m[[i, j]] = 0.3 * v;
                    m[[j, i]] = -0.3 * v;
                }
            }
            let (o, nus) = antisymmetric_canonical_form(&m, 1e-10).unwrap();
            // O orthogonal
            let ot_o = o.t().dot(&o);
            for i in 0..dim {
                for j in 0..dim {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(ot_o[[i, j]], expect, epsilon = 1e-10);
                }
            }
            let (sign, _) = o.sln_det().unwrap();
            assert!(sign > 0.0);
            // Reconstruction
            let mut sigma = Array2::<f64>::zeros((dim, dim));
            for (k, nu) in nus.iter().enumerate() {
                sigma[[2 * k, 2 * k + 1]] = *nu;
                sigma[[2 * k + 1, 2 * k]] = -*nu;
            }
            let rec = o.dot(&sigma).dot(&o.t());
            for i in 0..dim {
                for j in 0..dim {
                    assert_abs_diff_eq!(rec[[i, j]], m[[i, j]], epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn canonical_form_handles_kernel() {
        // Rank-2 antisymmetric 4x4: one ν-block plus an exact kernel pair.
        let mut m = Array2::<f64>::zeros((4, 4));
        m[[0, 1]] = 0.7;
        m[[1, 0]] = -0.7;
        let (o, nus) = antisymmetric_canonical_form(&m, 1e-10).unwrap();
        assert_eq!(nus.len(), 2);
        assert_abs_diff_eq!(nus[0].abs(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(nus[1], 0.0, epsilon = 1e-12);
        let ot_o = o.t().dot(&o);
        for i in 0..4 {
            assert_abs_diff_eq!(ot_o[[i, i]], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn haar_sampling_is_deterministic_and_special_orthogonal() {
        let mut rng1 = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let mut rng2 = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let o1 = haar_special_orthogonal(6, &mut rng1).unwrap();
        let o2 = haar_special_orthogonal(6, &mut rng2).unwrap();
        assert_eq!(o1, o2);
        let (sign, _) = o1.sln_det().unwrap();
        assert!(sign > 0.0);
        let id = o1.t().dot(&o1);
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(id[[i, j]], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_function_tanh() {
        // tanh of a Pauli-y-like Hermitian matrix.
        let h = array![
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5)],
            [Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.0)]
        ];
        let f = hermitian_function(&h, |x| x.tanh()).unwrap();
        let expect = 0.5f64.tanh();
        assert_abs_diff_eq!(f[[0, 1]].im, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(f[[1, 0]].im, -expect, epsilon = 1e-12);
        assert_abs_diff_eq!(f[[0, 0]].norm(), 0.0, epsilon = 1e-12);
    }
}
