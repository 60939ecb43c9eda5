use crate::analysis::special::gamma_pq_int;
use crate::error::{PsedError, Result};

/// Right-hand side `√L/(√K + 2√L)` of the noiseless MMP recovery condition.
pub fn mmp_exact_threshold(k: usize, l: usize) -> f64 {
    let (sk, sl) = ((k as f64).sqrt(), (l as f64).sqrt());
    sl / (sk + 2.0 * sl)
}

/// True iff `δ_{K+L} < √L/(√K + 2√L)`, under which MMP recovers any
/// `K`-sparse vector from noiseless measurements.
pub fn mmp_exact_condition(delta_lk: f64, k: usize, l: usize) -> bool {
    delta_lk < mmp_exact_threshold(k, l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeReport {
    pub delta_lk: f64,
    pub delta_k: f64,
    pub delta_2k: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub tau: f64,
    pub exact_condition: bool,
    /// Multiply by `‖v‖₂` to get the smallest error magnitude that guarantees
    /// support recovery.
    pub min_signal_threshold: f64,
}

/// Noisy support-recovery constants of MMP.
///
/// If the noiseless condition holds and `min |e_i| ≥ τ·‖v‖₂` with
/// `τ = max(γ, μ, λ)`, MMP identifies the true support.
pub fn mmp_support_threshold(delta_lk: f64, delta_k: f64, delta_2k: f64, k: usize, l: usize) -> Result<GuaranteeReport> {
    if k == 0 || l == 0 {
        return Err(PsedError::Domain(format!("K and L must be positive (got K = {k}, L = {l})")));
    }
    for (name, d) in [("δ_{K+L}", delta_lk), ("δ_K", delta_k), ("δ_2K", delta_2k)] {
        if !(d >= 0.0) {
            return Err(PsedError::Domain(format!("{name} must be non-negative (got {d})")));
        }
    }
    let (kf, lf) = (k as f64, l as f64);
    let (sk, sl, slk) = (kf.sqrt(), lf.sqrt(), (lf * kf).sqrt());

    let mu_den = sl - (2.0 * sl + sk) * delta_lk;
    if !(mu_den > 0.0) {
        return Err(PsedError::Domain(format!(
            "√L − (2√L + √K)·δ_{{K+L}} = {mu_den} is not positive"
        )));
    }
    let gamma_den = slk - (slk + kf) * delta_lk;
    if !(gamma_den > 0.0) {
        return Err(PsedError::Domain(format!(
            "√(LK) − (√(LK) + K)·δ_{{K+L}} = {gamma_den} is not positive"
        )));
    }
    let lambda_den = (1.0 - delta_k).powi(3) - (1.0 + delta_k) * delta_2k * delta_2k;
    if !(lambda_den > 0.0) {
        return Err(PsedError::Domain(format!(
            "(1 − δ_K)³ − (1 + δ_K)·δ_2K² = {lambda_den} is not positive"
        )));
    }

    let root = (1.0 + delta_lk).sqrt();
    let gamma = root * (sl + sk) / gamma_den;
    let mu = root * (1.0 - delta_lk) * (sl + sk) / mu_den;
    let lambda = (2.0 * (1.0 - delta_k).powi(2) / lambda_den).sqrt();
    let tau = gamma.max(mu).max(lambda);
    Ok(GuaranteeReport {
        delta_lk,
        delta_k,
        delta_2k,
        gamma,
        mu,
        lambda,
        tau,
        exact_condition: mmp_exact_condition(delta_lk, k, l),
        min_signal_threshold: tau,
    })
}

/// `Pr(‖v‖₂² ≤ d²/τ²)` for `v ~ CN(0, σ_v²·I_{n_r})`, i.e. the regularised
/// lower incomplete gamma `P(n_r, d²/(σ_v²τ²))`.
pub fn support_recovery_prob(n_r: u32, d: f64, noise_var: f64, tau: f64) -> f64 {
    assert!(n_r >= 1, "n_r must be positive");
    assert!(noise_var > 0.0 && tau > 0.0, "σ_v² and τ must be positive");
    let x = d * d / (noise_var * tau * tau);
    gamma_pq_int(n_r, x).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_is_one_third_when_k_equals_l() {
        for k in 1..10 {
            assert!((mmp_exact_threshold(k, k) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_condition_is_strict() {
        for (k, l) in [(1, 1), (4, 2), (19, 2), (3, 7)] {
            assert!(mmp_exact_condition(0.0, k, l));
            assert!(!mmp_exact_condition(mmp_exact_threshold(k, l), k, l));
        }
    }

    #[test]
    fn zero_deltas() {
        let (k, l) = (3usize, 2usize);
        let r = mmp_support_threshold(0.0, 0.0, 0.0, k, l).unwrap();
        let (sk, sl) = ((k as f64).sqrt(), (l as f64).sqrt());
        assert!((r.gamma - (sl + sk) / (sl * sk)).abs() < 1e-14);
        assert!((r.mu - (sl + sk) / sl).abs() < 1e-14);
        assert!((r.lambda - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(r.tau, r.gamma.max(r.mu).max(r.lambda));
    }

    #[test]
    fn k2_l2_delta_tenth() {
        // evaluated independently: γ = √1.1·2√2 / (2 − 0.4), μ = √1.1·0.9·2√2 / (√2 − 0.3√2),
        // λ = √(2·0.81 / (0.729 − 1.1·0.01))
        let r = mmp_support_threshold(0.1, 0.1, 0.1, 2, 2).unwrap();
        assert!((r.gamma - 1.854_049_621_773_916).abs() < 1e-12, "{}", r.gamma);
        assert!((r.mu - 2.696_937_038_151_818).abs() < 1e-12, "{}", r.mu);
        assert!((r.lambda - 1.502_087_683_682_531).abs() < 1e-12, "{}", r.lambda);
        assert_eq!(r.tau, r.mu);
    }

    #[test]
    fn denominator_sign_is_checked() {
        match mmp_support_threshold(0.5, 0.1, 0.1, 4, 4) {
            Err(PsedError::Domain(msg)) => assert!(msg.contains("√L − (2√L + √K)")),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn recovery_probability_limits() {
        assert!((support_recovery_prob(16, 1e3, 1.0, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(support_recovery_prob(16, 0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn recovery_probability_monotone() {
        let mut prev = 0.0;
        for i in 1..50 {
            let p = support_recovery_prob(8, i as f64 * 0.2, 0.5, 1.3);
            assert!(p >= prev);
            prev = p;
        }
        let mut prev = 1.0;
        for i in 1..50 {
            let p = support_recovery_prob(8, 3.0, i as f64 * 0.1, 1.3);
            assert!(p <= prev);
            prev = p;
        }
    }
}
