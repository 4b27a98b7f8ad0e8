//! JSON run configurations. Schemas are strict: unknown keys are rejected so
//! a typo never silently changes a run.

use fermineg::gaussian::{
    gibbs_covariance, random_mixed_covariance, Bipartition, CovarianceMatrix, QuadraticHamiltonian,
};
use fermineg::lindblad::LindbladGenerator;
use fermineg::models;
use ndarray::Array2;
use serde::Deserialize;

use crate::AppError;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    TightBinding { n: usize, t: f64 },
    Kitaev { n: usize, t: f64 },
    LongRange { n: usize, t: f64, alpha: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<QuadraticHamiltonian, AppError> {
        let h = match self {
            ModelSpec::TightBinding { n, t } => models::tight_binding(*n, *t),
            ModelSpec::Kitaev { n, t } => models::kitaev_chain(*n, *t),
            ModelSpec::LongRange { n, t, alpha } => models::long_range_hopping(*n, *t, *alpha),
        };
        h.map_err(AppError::config_from_core)
    }

    pub fn n_modes(&self) -> usize {
        match self {
            ModelSpec::TightBinding { n, .. }
            | ModelSpec::Kitaev { n, .. }
            | ModelSpec::LongRange { n, .. } => *n,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Zero {
        n_modes: usize,
    },
    Cdw {
        n_modes: usize,
    },
    Gibbs {
        model: ModelSpec,
        beta: f64,
    },
    Random {
        n_modes: usize,
        seed: u64,
        nu_max: f64,
    },
    Matrix {
        n_modes: usize,
        m: Vec<f64>,
    },
}

impl StateSpec {
    pub fn build(&self) -> Result<CovarianceMatrix, AppError> {
        match self {
            StateSpec::Zero { n_modes } => Ok(CovarianceMatrix::zero(*n_modes)),
            StateSpec::Cdw { n_modes } => {
                models::cdw_covariance(*n_modes).map_err(AppError::config_from_core)
            }
            StateSpec::Gibbs { model, beta } => {
                let h = model.build()?;
                gibbs_covariance(&h, *beta).map_err(AppError::Numerical)
            }
            StateSpec::Random {
                n_modes,
                seed,
                nu_max,
            } => random_mixed_covariance(*n_modes, *seed, *nu_max)
                .map_err(AppError::config_from_core),
            StateSpec::Matrix { n_modes, m } => {
                let dim = 2 * n_modes;
                if m.len() != dim * dim {
                    return Err(AppError::Config(format!(
                        "matrix state needs {} entries, got {}",
                        dim * dim,
                        m.len()
                    )));
                }
                let arr = Array2::from_shape_vec((dim, dim), m.clone())
                    .map_err(|e| AppError::Config(e.to_string()))?;
                CovarianceMatrix::new(*n_modes, arr).map_err(AppError::config_from_core)
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            StateSpec::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Either an explicit A-mode list or a contiguous cut A = 0..cut.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    #[serde(default)]
    pub modes_a: Option<Vec<usize>>,
    #[serde(default)]
    pub cut: Option<usize>,
}

impl PartitionSpec {
    pub fn build(&self, n_modes: usize) -> Result<Bipartition, AppError> {
        let part = match (&self.modes_a, self.cut) {
            (Some(modes), None) => Bipartition::new(n_modes, modes.clone()),
            (None, Some(cut)) => Bipartition::contiguous(n_modes, cut),
            _ => {
                return Err(AppError::Config(
                    "partition needs exactly one of `modes_a` or `cut`".into(),
                ))
            }
        };
        part.map_err(AppError::config_from_core)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default)]
    pub hamiltonian: Option<ModelSpec>,
    #[serde(default)]
    pub loss_rate: f64,
}

impl GeneratorSpec {
    pub fn build(&self, n_modes: usize) -> Result<LindbladGenerator, AppError> {
        let h = match &self.hamiltonian {
            Some(spec) => {
                if spec.n_modes() != n_modes {
                    return Err(AppError::Config(format!(
                        "generator Hamiltonian has {} modes but the state has {n_modes}",
                        spec.n_modes()
                    )));
                }
                spec.build()?
            }
            None => QuadraticHamiltonian::zero(n_modes),
        };
        models::uniform_loss_with_hamiltonian(h, self.loss_rate).map_err(AppError::config_from_core)
    }
}

/// Numeric grid: explicit values, a linear range, or a log10 range.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub log10: bool,
}

impl GridSpec {
    pub fn build(&self) -> Result<Vec<f64>, AppError> {
        let grid = match (&self.values, self.start, self.stop, self.count) {
            (Some(values), None, None, None) => values.clone(),
            (None, Some(start), Some(stop), Some(count)) => {
                if count < 2 {
                    return Err(AppError::Config("grid count must be at least 2".into()));
                }
                (0..count)
                    .map(|k| {
                        let x = start + (stop - start) * k as f64 / (count - 1) as f64;
                        if self.log10 {
                            10f64.powf(x)
                        } else {
                            x
                        }
                    })
                    .collect()
            }
            _ => {
                return Err(AppError::Config(
                    "grid needs either `values` or all of `start`, `stop`, `count`".into(),
                ))
            }
        };
        if grid.is_empty() {
            return Err(AppError::Config("grid is empty".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativityConfig {
    pub state: StateSpec,
    pub partition: PartitionSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub model: ModelSpec,
    pub betas: GridSpec,
    pub partition: PartitionSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub state: StateSpec,
    pub generator: GeneratorSpec,
    pub times: GridSpec,
    pub partition: PartitionSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub state: StateSpec,
    pub generator: GeneratorSpec,
    /// Contiguous cut sizes to sweep; defaults to 1..N-1.
    #[serde(default)]
    pub cuts: Option<Vec<usize>>,
    /// Propagate the state this long before evaluating (use 1e-8 to
    /// regularize pure initial states).
    #[serde(default)]
    pub evolve_time: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTemperatureConfig {
    pub model: ModelSpec,
    pub betas: GridSpec,
    #[serde(default)]
    pub cut: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAreaLawConfig {
    pub sizes: Vec<usize>,
    pub alpha: f64,
    pub t: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicInitSpec {
    Cdw,
    Random { nu_max: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDynamicConfig {
    pub sizes: Vec<usize>,
    pub alpha: f64,
    pub t: f64,
    pub loss_rate: f64,
    pub init: DynamicInitSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub n_modes: usize,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_nu_max")]
    pub nu_max: f64,
}

fn default_nu_max() -> f64 {
    0.9
}
