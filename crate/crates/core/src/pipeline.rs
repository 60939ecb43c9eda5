//! The five-step PSED detector: linear detection, slicing, sparse transform,
//! sparse error recovery, and correction followed by a final slice.

use std::fmt;
use std::str::FromStr;

use crate::detectors::{detect, residual_stream_variance, stream_gain, weight_matrix, LinearKind, WeightMatrix};
use crate::error::{PsedError, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::model::Constellation;
use crate::recovery::{lmmse_on_support, mmp, MmpParams, RecoveryResult, SupportSet};
use crate::slicer::{hard_slice, soft_slice, SliceMode, SlicedVector};

/// Estimator applied on the recovered support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SupportEstimator {
    #[default]
    Ls,
    Lmmse,
}

impl fmt::Display for SupportEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupportEstimator::Ls => "LS",
            SupportEstimator::Lmmse => "LMMSE",
        })
    }
}

impl FromStr for SupportEstimator {
    type Err = PsedError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LS" => Ok(SupportEstimator::Ls),
            "LMMSE" => Ok(SupportEstimator::Lmmse),
            other => Err(PsedError::Config(format!("unknown support estimator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsedConfig {
    pub base_detector: LinearKind,
    pub slicer_mode: SliceMode,
    pub k: usize,
    pub l: usize,
    pub estimator: SupportEstimator,
    /// Absolute residual tolerance for early stopping; 0 runs all `k` layers.
    pub tol: f64,
    pub max_paths: usize,
    /// Error-entry energy for the LMMSE support estimator. `None` uses the
    /// squared minimum distance of the constellation.
    pub sigma_e2: Option<f64>,
}

impl PsedConfig {
    /// `K = ⌊0.15·n_t⌋` (at least 1), `L = 2`, LS on support, hard slicing.
    pub fn for_system(base_detector: LinearKind, n_t: usize) -> Self {
        PsedConfig {
            base_detector,
            slicer_mode: SliceMode::Hard,
            k: default_sparsity(n_t),
            l: 2,
            estimator: SupportEstimator::Ls,
            tol: 0.0,
            max_paths: MmpParams::DEFAULT_MAX_PATHS,
            sigma_e2: None,
        }
    }

    pub fn validate(&self, n_t: usize) -> Result<()> {
        if self.k == 0 || self.l == 0 || self.max_paths == 0 {
            return Err(PsedError::Config(format!(
                "PSED needs K ≥ 1, L ≥ 1 and max_paths ≥ 1 (got K = {}, L = {}, max_paths = {})",
                self.k, self.l, self.max_paths
            )));
        }
        if self.k > n_t {
            return Err(PsedError::Config(format!("sparsity K = {} exceeds n_t = {n_t}", self.k)));
        }
        if !(self.tol >= 0.0) {
            return Err(PsedError::Config(format!("tolerance must be non-negative (got {})", self.tol)));
        }
        if let Some(s) = self.sigma_e2 {
            if !(s > 0.0) {
                return Err(PsedError::Config(format!("σ_e² must be positive (got {s})")));
            }
        }
        Ok(())
    }

    fn mmp_params(&self) -> MmpParams {
        MmpParams::new(self.k, self.l)
            .with_tol(self.tol)
            .with_max_paths(self.max_paths)
    }
}

pub fn default_sparsity(n_t: usize) -> usize {
    ((0.15 * n_t as f64).floor() as usize).max(1)
}

/// Every intermediate of one PSED run.
#[derive(Debug, Clone)]
pub struct DetectorOutput {
    pub s_tilde: CVector,
    pub s_hat: SlicedVector,
    pub y_prime: CVector,
    pub recovery: RecoveryResult,
    /// Correction actually added to `s_hat`.
    pub e_hat: CVector,
    pub s_doublehat: CVector,
    pub s_final: SlicedVector,
    /// Set when recovery failed and the linear-stage slice was kept.
    pub recovery_failure: Option<String>,
    /// Streams where soft slicing fell back to a hard decision.
    pub soft_fallbacks: usize,
}

impl DetectorOutput {
    pub fn flagged(&self) -> bool {
        self.recovery_failure.is_some()
    }
}

/// `y′ = y − √P·H·ŝ`.
pub fn sparse_transform(y: &CVector, h: &CMatrix, s_hat: &CVector, power: f64) -> Result<CVector> {
    if h.nrows() != y.len() || h.ncols() != s_hat.len() {
        return Err(PsedError::Dimension(format!(
            "sparse transform with H {}x{}, y {}, ŝ {}",
            h.nrows(),
            h.ncols(),
            y.len(),
            s_hat.len()
        )));
    }
    Ok(y - h * s_hat * C64::from(power.sqrt()))
}

/// Sparse transform through final slice for an already sliced estimate.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub y_prime: CVector,
    pub recovery: RecoveryResult,
    pub e_hat: CVector,
    pub s_doublehat: CVector,
    pub s_final: SlicedVector,
    pub recovery_failure: Option<String>,
}

/// Sparse transform, recovery, correction and final slice, starting from `s_hat`.
pub fn refine(
    y: &CVector,
    h: &CMatrix,
    power: f64,
    noise_var: f64,
    s_hat: &CVector,
    constellation: &Constellation,
    config: &PsedConfig,
) -> Result<Refinement> {
    config.validate(h.ncols())?;
    let y_prime = sparse_transform(y, h, s_hat, power)?;
    let recovered = mmp(h, &y_prime, power, &config.mmp_params()).and_then(|rec| {
        let e_hat = match config.estimator {
            SupportEstimator::Ls => rec.e_hat.clone(),
            SupportEstimator::Lmmse => {
                let sigma_e2 = config.sigma_e2.unwrap_or_else(|| constellation.min_distance().powi(2));
                lmmse_on_support(h, &y_prime, power, &rec.support, sigma_e2, noise_var)?
            }
        };
        Ok((rec, e_hat))
    });
    let (recovery, e_hat, recovery_failure) = match recovered {
        Ok((rec, e)) => (rec, e, None),
        Err(err) if err.is_numerical() => {
            let empty = RecoveryResult {
                support: SupportSet::empty(),
                e_hat: CVector::zeros(h.ncols()),
                residual_norm: y_prime.norm(),
                paths_explored: 0,
                paths_pruned: 0,
                iterations: 0,
            };
            (empty, CVector::zeros(h.ncols()), Some(err.to_string()))
        }
        Err(err) => return Err(err),
    };
    let s_doublehat = s_hat + &e_hat;
    let s_final = hard_slice(&s_doublehat, constellation);
    Ok(Refinement {
        y_prime,
        recovery,
        e_hat,
        s_doublehat,
        s_final,
        recovery_failure,
    })
}

/// Runs the full PSED detector on one observation.
pub fn psed_detect(
    y: &CVector,
    h: &CMatrix,
    power: f64,
    noise_var: f64,
    constellation: &Constellation,
    config: &PsedConfig,
) -> Result<DetectorOutput> {
    let weights = weight_matrix(h, config.base_detector, power, noise_var)?;
    psed_detect_with_weights(y, h, power, noise_var, constellation, config, &weights)
}

/// [`psed_detect`] with the linear-stage weights supplied by the caller, who must
/// have built them for `config.base_detector`.
pub fn psed_detect_with_weights(
    y: &CVector,
    h: &CMatrix,
    power: f64,
    noise_var: f64,
    constellation: &Constellation,
    config: &PsedConfig,
    weights: &WeightMatrix,
) -> Result<DetectorOutput> {
    config.validate(h.ncols())?;
    if weights.kind != config.base_detector {
        return Err(PsedError::Config(format!(
            "weights are {} but the PSED base detector is {}",
            weights.kind, config.base_detector
        )));
    }
    let s_tilde = detect(weights, y)?;

    let mut soft_fallbacks = 0;
    let s_hat = match config.slicer_mode {
        SliceMode::Hard => hard_slice(&s_tilde, constellation),
        SliceMode::Soft => {
            let priors = vec![1.0 / constellation.len() as f64; constellation.len()];
            let mut values = CVector::zeros(s_tilde.len());
            for i in 0..s_tilde.len() {
                let gain = stream_gain(h, weights, power, i);
                let var = residual_stream_variance(h, weights, power, noise_var, i);
                let out = soft_slice(s_tilde[i], &priors, gain, var, constellation)?;
                soft_fallbacks += usize::from(out.fell_back);
                values[i] = out.value;
            }
            SlicedVector {
                values,
                mode: SliceMode::Soft,
            }
        }
    };

    let tail = refine(y, h, power, noise_var, &s_hat.values, constellation, config)?;
    Ok(DetectorOutput {
        s_tilde,
        s_hat,
        y_prime: tail.y_prime,
        recovery: tail.recovery,
        e_hat: tail.e_hat,
        s_doublehat: tail.s_doublehat,
        s_final: tail.s_final,
        recovery_failure: tail.recovery_failure,
        soft_fallbacks,
    })
}

/// Number of entries where `a` and `b` differ by more than 1e-9.
pub fn symbol_errors(a: &CVector, b: &CVector) -> usize {
    a.iter().zip(b.iter()).filter(|(x, y)| (*x - *y).norm() > 1e-9).count()
}
