//! Large-system limits for i.i.d. `CN(0, 1/n_r)` channels with `n_t/n_r → β`.

use crate::analysis::special::q_function;
use crate::error::{PsedError, Result};

/// `F(x, z) = (√(x(1+√z)² + 1) − √(x(1−√z)² + 1))²`.
pub fn f_functional(x: f64, z: f64) -> f64 {
    let sz = z.sqrt();
    let a = (x * (1.0 + sz).powi(2) + 1.0).sqrt();
    let b = (x * (1.0 - sz).powi(2) + 1.0).sqrt();
    (a - b).powi(2)
}

/// Per-stream LMMSE output SINR in the large-system limit: `snr − F(snr, β)/4`.
pub fn asymptotic_sinr(snr: f64, beta: f64) -> f64 {
    assert!(snr >= 0.0 && beta > 0.0, "snr must be non-negative and beta positive");
    snr - f_functional(snr, beta) / 4.0
}

/// BPSK symbol error probability `Q(√(2·sinr))`.
pub fn pe_bpsk(sinr: f64) -> f64 {
    assert!(sinr >= 0.0, "sinr must be non-negative");
    q_function((2.0 * sinr).sqrt())
}

/// Normalised LMMSE MSE limit `1 − F(snr, β)/(4·β·snr)`.
pub fn mse_conv_asymptotic(snr: f64, beta: f64) -> f64 {
    assert!(snr > 0.0 && beta > 0.0, "snr and beta must be positive");
    1.0 - f_functional(snr, beta) / (4.0 * beta * snr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MseBoundForm {
    /// `(1/snr)·p_e/(1 − p_e·β)`
    #[default]
    Full,
    /// `p_e/snr`, valid when `p_e ≪ 1`
    HighSnr,
}

/// Oracle-LS lower bound on the PSED MSE given the per-stream error probability.
pub fn mse_psed_bound(snr: f64, beta: f64, p_e: f64, form: MseBoundForm) -> Result<f64> {
    if !(snr > 0.0) || !(beta > 0.0) {
        return Err(PsedError::Domain(format!("snr and beta must be positive (got {snr}, {beta})")));
    }
    if !(0.0..1.0).contains(&p_e) {
        return Err(PsedError::Domain(format!("p_e = {p_e} outside [0, 1)")));
    }
    if p_e * beta >= 1.0 {
        return Err(PsedError::Domain(format!("p_e·β = {} must be below 1", p_e * beta)));
    }
    Ok(match form {
        MseBoundForm::Full => p_e / (1.0 - p_e * beta) / snr,
        MseBoundForm::HighSnr => p_e / snr,
    })
}

/// High-SNR BPSK form of the PSED MSE bound.
///
/// - `β = 1`: `snr^{−5/4}·e^{−√snr} / (2√π)`
/// - `β < 1`: `snr^{−3/2}·e^{−(1−β)snr} / (2√(π(1−β)))`
pub fn mse_psed_closed_form(snr: f64, beta: f64) -> Result<f64> {
    if !(snr > 0.0) || !(beta > 0.0) {
        return Err(PsedError::Domain(format!("snr and beta must be positive (got {snr}, {beta})")));
    }
    if beta > 1.0 {
        return Err(PsedError::Domain(format!("no closed form for β = {beta} > 1")));
    }
    let pi = std::f64::consts::PI;
    if beta == 1.0 {
        Ok(snr.powf(-1.25) * (-snr.sqrt()).exp() / (2.0 * pi.sqrt()))
    } else {
        let g = 1.0 - beta;
        Ok(snr.powf(-1.5) * (-g * snr).exp() / (2.0 * (pi * g).sqrt()))
    }
}

/// Limit of `(1/|𝓔|)·tr(H_𝓔ᴴH_𝓔)⁻¹` for a random `|𝓔|`-column submatrix: `1/(1 − β′)`.
pub fn trace_inverse_limit(beta_prime: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta_prime) {
        return Err(PsedError::Domain(format!("β′ = {beta_prime} outside [0, 1)")));
    }
    Ok(1.0 / (1.0 - beta_prime))
}

/// Gaussian approximation `2·Q(ε/√(p_e(1−p_e)/n_t))` of
/// `Pr(| |𝓔|/n_t − p_e | > ε)` for a binomial error count.
pub fn error_count_concentration(n_t: usize, p_e: f64, epsilon: f64) -> Result<f64> {
    if n_t == 0 || !(p_e > 0.0 && p_e < 1.0) || !(epsilon > 0.0) {
        return Err(PsedError::Domain(format!(
            "need n_t ≥ 1, 0 < p_e < 1, ε > 0 (got {n_t}, {p_e}, {epsilon})"
        )));
    }
    if epsilon.is_infinite() {
        return Ok(0.0);
    }
    let sd = (p_e * (1.0 - p_e) / n_t as f64).sqrt();
    Ok(2.0 * q_function(epsilon / sd))
}
