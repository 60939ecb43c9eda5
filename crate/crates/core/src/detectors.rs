//! Linear detectors `s̃ = Wᴴ·y` with matched-filter, zero-forcing and LMMSE weights.

use std::fmt;
use std::str::FromStr;

use crate::error::{PsedError, Result};
use crate::linalg::{invert, CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearKind {
    Mf,
    Zf,
    Lmmse,
}

impl fmt::Display for LinearKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinearKind::Mf => "MF",
            LinearKind::Zf => "ZF",
            LinearKind::Lmmse => "LMMSE",
        })
    }
}

impl FromStr for LinearKind {
    type Err = PsedError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MF" => Ok(LinearKind::Mf),
            "ZF" => Ok(LinearKind::Zf),
            "LMMSE" | "MMSE" => Ok(LinearKind::Lmmse),
            other => Err(PsedError::Config(format!("unknown linear detector `{other}`"))),
        }
    }
}

/// An `n_r × n_t` weight matrix; column `i` filters stream `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub kind: LinearKind,
    pub w: CMatrix,
}

/// Builds the weight matrix for `kind`:
///
/// - MF: `H/√P`
/// - ZF: `H(HᴴH)⁻¹/√P`
/// - LMMSE: `H(HᴴH + (σ_v²/P)I)⁻¹`
pub fn weight_matrix(h: &CMatrix, kind: LinearKind, power: f64, noise_var: f64) -> Result<WeightMatrix> {
    if !(power > 0.0) || !(noise_var >= 0.0) {
        return Err(PsedError::Config(format!(
            "power must be positive and noise variance non-negative (P = {power}, σ_v² = {noise_var})"
        )));
    }
    let sqrt_p = power.sqrt();
    let w = match kind {
        LinearKind::Mf => h.map(|z| z / sqrt_p),
        LinearKind::Zf => {
            let gram = h.adjoint() * h;
            let inv = invert(&gram, "ZF weight matrix (HᴴH)")?;
            (h * inv).map(|z| z / sqrt_p)
        }
        LinearKind::Lmmse => {
            let mut gram = h.adjoint() * h;
            let reg = noise_var / power;
            for i in 0..gram.nrows() {
                gram[(i, i)] += C64::from(reg);
            }
            let inv = invert(&gram, "LMMSE weight matrix (HᴴH + σ_v²/P·I)")?;
            h * inv
        }
    };
    Ok(WeightMatrix { kind, w })
}

/// `s̃ = Wᴴ·y`.
pub fn detect(weights: &WeightMatrix, y: &CVector) -> Result<CVector> {
    if weights.w.nrows() != y.len() {
        return Err(PsedError::Dimension(format!(
            "weight matrix has {} rows, observation has length {}",
            weights.w.nrows(),
            y.len()
        )));
    }
    Ok(weights.w.adjoint() * y)
}

/// Effective gain `√P·w_iᴴh_i` of stream `i` through its own filter.
pub fn stream_gain(h: &CMatrix, weights: &WeightMatrix, power: f64, i: usize) -> C64 {
    weights.w.column(i).dotc(&h.column(i)) * power.sqrt()
}

/// Interference-plus-noise variance at the output of stream `i` (0-based):
/// `w_iᴴ(P·H·Hᴴ + σ_v²·I)w_i − P·|w_iᴴh_i|²`.
pub fn residual_stream_variance(h: &CMatrix, weights: &WeightMatrix, power: f64, noise_var: f64, i: usize) -> f64 {
    let w_i = weights.w.column(i);
    let hw = h.adjoint() * w_i;
    let own = w_i.dotc(&h.column(i)).norm_sqr();
    let total = power * hw.norm_squared() + noise_var * w_i.norm_squared();
    // Rounding can leave a tiny negative value when the stream is interference-free.
    (total - power * own).max(0.0)
}
