//! Quadratic Lindblad dynamics of the covariance matrix,
//!
//!   ∂Γ/∂t = -i[4H, Γ] - {X, Γ} + 2Y,
//!
//! with X = 2 Re B, Y = 2i Im B, B = L†L built from Lindblad operators
//! L̂_μ = Σ_j L_{μ,j} ĉ_j. In the real representation (Γ = i·m, H = i·k,
//! Y = i·y) this is ∂m/∂t = -A m - m Aᵀ + 2y with the real matrix
//! A = X - 4k, solved exactly through the Lyapunov steady state
//! A m_ss + m_ss Aᵀ = 2y and the propagator e^{-At}.

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{Bipartition, CovarianceMatrix, QuadraticHamiltonian};
use crate::linalg;
use crate::negativity;

/// Denominators |a_i + a_j| below this declare the Lyapunov solve singular.
pub const LYAPUNOV_TOL: f64 = 1e-10;
/// Condition-number guard on the eigenvector matrix of A.
pub const PROPAGATOR_COND_LIMIT: f64 = 1e10;
/// Covariance excess tolerated before the RK4 integrator aborts.
pub const RK4_VALIDITY_TOL: f64 = 1e-6;

/// Raw generator matrices (H = i·k_h, X, Y = i·y); no complete-positivity
/// requirement, so block splittings remain representable.
#[derive(Debug, Clone)]
pub struct GeneratorParts {
    pub k_h: Array2<f64>,
    pub x: Array2<f64>,
    pub y: Array2<f64>,
}

impl GeneratorParts {
    pub fn zero(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            k_h: Array2::zeros((dim, dim)),
            x: Array2::zeros((dim, dim)),
            y: Array2::zeros((dim, dim)),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.k_h.nrows() / 2
    }

    /// A = X - 4k, the real drift matrix of ∂m/∂t = -Am - mAᵀ + 2y.
    pub fn drift(&self) -> Array2<f64> {
        &self.x - &(4.0 * &self.k_h)
    }

    /// Restriction to the intra-subsystem (block-diagonal) terms.
    pub fn block_diagonal(&self, part: &Bipartition) -> GeneratorParts {
        GeneratorParts {
            k_h: part.block_diagonal_part(&self.k_h),
            x: part.block_diagonal_part(&self.x),
            y: part.block_diagonal_part(&self.y),
        }
    }

    /// Restriction to the inter-subsystem (off-diagonal) terms.
    pub fn inter(&self, part: &Bipartition) -> GeneratorParts {
        GeneratorParts {
            k_h: part.inter_part(&self.k_h),
            x: part.inter_part(&self.x),
            y: part.inter_part(&self.y),
        }
    }
}

/// Validated quadratic Lindblad generator.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    h: QuadraticHamiltonian,
    l_coeffs: Array2<Complex64>,
    parts: GeneratorParts,
}

impl LindbladGenerator {
    /// Build from a Hamiltonian and Lindblad coefficient rows L_{μ,·}.
    /// Derives X = 2 Re B and y = 2 Im B with B = L†L and checks the
    /// complete-positivity conditions X ± Y ⪰ 0.
    pub fn new(h: QuadraticHamiltonian, l_coeffs: Array2<Complex64>) -> Result<Self> {
        let dim = 2 * h.n_modes();
        if l_coeffs.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: l_coeffs.ncols(),
            });
        }
        let l_dag = l_coeffs.t().mapv(|z| z.conj());
        let b = l_dag.dot(&l_coeffs);
        let mut x = Array2::zeros((dim, dim));
        let mut y = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                x[[i, j]] = 2.0 * b[[i, j]].re;
                y[[i, j]] = 2.0 * b[[i, j]].im;
            }
        }
        // Symmetry cleanup against rounding.
        let x = 0.5 * (&x + &x.t());
        let y = 0.5 * (&y - &y.t());
        let parts = GeneratorParts {
            k_h: h.k().clone(),
            x,
            y,
        };
        let gen = Self { h, l_coeffs, parts };
        gen.check_positivity()?;
        Ok(gen)
    }

    fn check_positivity(&self) -> Result<()> {
        let dim = self.parts.x.nrows();
        let mut plus = linalg::to_complex(&self.parts.x);
        let mut minus = plus.clone();
        for i in 0..dim {
            for j in 0..dim {
                let iy = Complex64::new(0.0, self.parts.y[[i, j]]);
                plus[[i, j]] += iy;
                minus[[i, j]] -= iy;
            }
        }
        for (name, mat) in [("X+Y", &plus), ("X-Y", &minus)] {
            let vals = linalg::hermitian_eigenvalues(mat)?;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -1e-10 {
                return Err(Error::Numerical(format!(
                    "generator violates complete positivity: min eig({name}) = {min:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> &QuadraticHamiltonian {
        &self.h
    }

    pub fn l_coeffs(&self) -> &Array2<Complex64> {
        &self.l_coeffs
    }

    pub fn parts(&self) -> GeneratorParts {
        self.parts.clone()
    }

    pub fn n_modes(&self) -> usize {
        self.h.n_modes()
    }
}

/// Right-hand side of the covariance equation of motion, as the real part
/// dm of ∂Γ/∂t = i·dm: dm = 4[k, m] - {x, m} + 2y.
pub fn dgamma_dt(gamma: &CovarianceMatrix, parts: &GeneratorParts) -> Array2<f64> {
    dm_dt(gamma.m(), parts)
}

pub(crate) fn dm_dt(m: &Array2<f64>, parts: &GeneratorParts) -> Array2<f64> {
    let km = parts.k_h.dot(m);
    let mk = m.dot(&parts.k_h);
    let xm = parts.x.dot(m);
    let mx = m.dot(&parts.x);
    4.0 * (&km - &mk) - (&xm + &mx) + 2.0 * &parts.y
}

/// Precomputed spectral data for exact semigroup propagation.
pub struct ExactPropagator {
    eigvals: Array1<Complex64>,
    v: Array2<Complex64>,
    v_inv: Array2<Complex64>,
    m_ss: Option<Array2<f64>>,
}

impl ExactPropagator {
    /// Diagonalize A = X - 4k and solve the Lyapunov equation
    /// A m_ss + m_ss Aᵀ = 2y spectrally. With Y = 0 the steady-state shift is
    /// dropped and the propagator alone evolves the state; a singular
    /// Lyapunov equation with nonzero Y is reported as an error.
    pub fn new(parts: &GeneratorParts) -> Result<Self> {
        let a = parts.drift();
        let (eigvals, v) = linalg::real_eig(&a)?;
        let cond = linalg::condition_number(&v)?;
        if cond > PROPAGATOR_COND_LIMIT {
            return Err(Error::IllConditioned {
                what: "drift eigenvector matrix",
                cond,
                limit: PROPAGATOR_COND_LIMIT,
            });
        }
        let v_inv = v.inv()?;
        let dim = a.nrows();
        let y_scale = linalg::max_abs(&parts.y);
        let scale = eigvals
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut min_sum = f64::INFINITY;
        for i in 0..dim {
            for j in 0..dim {
                min_sum = min_sum.min((eigvals[i] + eigvals[j]).norm());
            }
        }
        let m_ss = if y_scale == 0.0 {
            None
        } else if min_sum <= LYAPUNOV_TOL * scale {
            return Err(Error::LyapunovSingular { min_sum });
        } else {
            let y2 = linalg::to_complex(&(2.0 * &parts.y));
            let rhs = v_inv.dot(&y2).dot(&v_inv.t());
            let mut n = rhs;
            for i in 0..dim {
                for j in 0..dim {
                    n[[i, j]] /= eigvals[i] + eigvals[j];
                }
            }
            let ss = v.dot(&n).dot(&v.t());
            let mut ss_real = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    ss_real[[i, j]] = ss[[i, j]].re;
                }
            }
            let ss_real = 0.5 * (&ss_real - &ss_real.t());
            Some(ss_real)
        };
        Ok(Self {
            eigvals,
            v,
            v_inv,
            m_ss,
        })
    }

    /// Steady-state covariance part m_ss (zero when Y = 0).
    pub fn steady_state_m(&self) -> Array2<f64> {
        match &self.m_ss {
            Some(m) => m.clone(),
            None => Array2::zeros(self.v.dim()),
        }
    }

    fn exp_minus_at(&self, t: f64) -> Array2<Complex64> {
        let dim = self.v.nrows();
        let mut scaled = self.v.clone();
        for (j, lam) in self.eigvals.iter().enumerate() {
            let f = (-lam * t).exp();
            for i in 0..dim {
                scaled[[i, j]] *= f;
            }
        }
        scaled.dot(&self.v_inv)
    }

    /// m(t) = m_ss + e^{-At}(m₀ - m_ss)e^{-Aᵀt}.
    pub fn propagate_m(&self, m0: &Array2<f64>, t: f64) -> Array2<f64> {
        let dim = m0.nrows();
        let m_ss = self.steady_state_m();
        let delta = linalg::to_complex(&(m0 - &m_ss));
        let e = self.exp_minus_at(t);
        let moved = e.dot(&delta).dot(&e.t());
        let mut out = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                out[[i, j]] = m_ss[[i, j]] + moved[[i, j]].re;
            }
        }
        0.5 * (&out - &out.t())
    }
}

/// Exact semigroup propagation of the covariance matrix to time t. Falls
/// back to RK4 (with a warning) when the Lyapunov equation is singular with
/// nonzero Y or the drift is defective.
pub fn evolve_exact(
    gamma0: &CovarianceMatrix,
    parts: &GeneratorParts,
    t: f64,
) -> Result<CovarianceMatrix> {
    if t == 0.0 {
        return Ok(gamma0.clone());
    }
    match ExactPropagator::new(parts) {
        Ok(prop) => {
            let m = prop.propagate_m(gamma0.m(), t);
            CovarianceMatrix::with_clip(gamma0.n_modes(), m, RK4_VALIDITY_TOL)
        }
        Err(Error::LyapunovSingular { min_sum }) => {
            log::warn!(
                "Lyapunov equation singular (min |a_i+a_j| = {min_sum:.3e}); integrating with RK4"
            );
            evolve_rk4(gamma0, parts, t, default_rk4_dt(parts)?)
        }
        Err(Error::IllConditioned { cond, .. }) => {
            log::warn!("drift eigenbasis ill-conditioned (cond {cond:.3e}); integrating with RK4");
            evolve_rk4(gamma0, parts, t, default_rk4_dt(parts)?)
        }
        Err(e) => Err(e),
    }
}

/// Stability-motivated default RK4 step: min(1e-2, 0.1/(4‖H‖+‖X‖+‖Y‖)).
pub fn default_rk4_dt(parts: &GeneratorParts) -> Result<f64> {
    let h_norm = linalg::operator_norm(&parts.k_h)?;
    let x_norm = linalg::operator_norm(&parts.x)?;
    let y_norm = linalg::operator_norm(&parts.y)?;
    let scale = 4.0 * h_norm + x_norm + y_norm;
    Ok(if scale > 0.0 {
        (0.1 / scale).min(1e-2)
    } else {
        1e-2
    })
}

/// Classical RK4 integration of the covariance equation of motion, with a
/// final partial step landing exactly on t. The iterate is re-antisymmetrized
/// each step and aborted if its spectrum leaves the physical ball by more
/// than [`RK4_VALIDITY_TOL`].
pub fn evolve_rk4(
    gamma0: &CovarianceMatrix,
    parts: &GeneratorParts,
    t: f64,
    dt: f64,
) -> Result<CovarianceMatrix> {
    if dt <= 0.0 {
        return Err(Error::Numerical(format!(
            "RK4 step must be positive, got {dt}"
        )));
    }
    if t < 0.0 {
        return Err(Error::Numerical(format!(
            "RK4 target time must be >= 0, got {t}"
        )));
    }
    let mut m = gamma0.m().clone();
    let mut time = 0.0f64;
    let mut steps_since_check = 0usize;
    while time < t {
        let step = dt.min(t - time);
        let k1 = dm_dt(&m, parts);
        let k2 = dm_dt(&(&m + &(0.5 * step * &k1)), parts);
        let k3 = dm_dt(&(&m + &(0.5 * step * &k2)), parts);
        let k4 = dm_dt(&(&m + &(step * &k3)), parts);
        m = &m + &((step / 6.0) * (&k1 + &(2.0 * &k2) + &(2.0 * &k3) + &k4));
        m = 0.5 * (&m - &m.t());
        time += step;
        steps_since_check += 1;
        if steps_since_check >= 64 {
            steps_since_check = 0;
            let max_sv = linalg::operator_norm(&m)?;
            if max_sv > 1.0 + RK4_VALIDITY_TOL {
                return Err(Error::IntegratorDiverged { t: time, max_sv });
            }
        }
    }
    CovarianceMatrix::with_clip(gamma0.n_modes(), m, RK4_VALIDITY_TOL)
}

/// Steady state of the dynamics (Lyapunov solution).
pub fn steady_state(parts: &GeneratorParts) -> Result<CovarianceMatrix> {
    let prop = ExactPropagator::new(parts)?;
    CovarianceMatrix::new(parts.n_modes(), prop.steady_state_m())
}

/// Negativity along an exactly propagated trajectory. Times must be sorted
/// ascending; the spectral factorization of the drift is reused across the
/// whole grid.
pub fn negativity_trajectory(
    gamma0: &CovarianceMatrix,
    parts: &GeneratorParts,
    times: &[f64],
    part: &Bipartition,
) -> Result<Vec<(f64, f64)>> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Numerical(
            "trajectory times must be sorted ascending".into(),
        ));
    }
    let prop = ExactPropagator::new(parts)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let m = if t == 0.0 {
            gamma0.m().clone()
        } else {
            prop.propagate_m(gamma0.m(), t)
        };
        let g = CovarianceMatrix::with_clip(gamma0.n_modes(), m, RK4_VALIDITY_TOL)?;
        let e = negativity::negativity(&g, part)?.value;
        out.push((t, e));
    }
    Ok(out)
}
