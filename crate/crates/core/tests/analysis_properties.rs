use proptest::prelude::*;
use psed::analysis::{
    asymptotic_sinr, mse_conv_asymptotic, rip_constant, subset_delta, support_recovery_prob,
};
use psed::model::generate_channel;
use psed::rng::{stream, Purpose};
use psed::{CMatrix, C64};
use rand_distr::{ChiSquared, Distribution};

#[test]
fn support_probability_matches_chi_square_sampling() {
    // ‖v‖²/σ² for v ~ CN(0, σ²I₈) is half a χ²₁₆ variable
    let (n_r, d, noise_var, tau) = (8u32, 8f64.sqrt(), 1.0, 1.0);
    let predicted = support_recovery_prob(n_r, d, noise_var, tau);
    let chi = ChiSquared::new(16.0).unwrap();
    let mut rng = stream(101, Purpose::Sampling, &[]);
    let draws = 1_000_000;
    let hits = (0..draws).filter(|_| chi.sample(&mut rng) / 2.0 <= d * d / (tau * tau)).count();
    let empirical = hits as f64 / draws as f64;
    assert!((empirical - predicted).abs() < 0.003, "{empirical} vs {predicted}");
}

#[test]
fn conventional_mse_matches_trace_average() {
    let (n, snr) = (128, 100.0);
    let mut total = 0.0;
    for seed in 0..20 {
        let h = generate_channel(n, n, &mut stream(seed, Purpose::Channel, &[128]));
        let mut g = h.adjoint() * &h * C64::from(snr);
        for i in 0..n {
            g[(i, i)] += C64::from(1.0);
        }
        let inv = g.try_inverse().unwrap();
        total += inv.trace().re / n as f64;
    }
    let empirical = total / 20.0;
    let predicted = mse_conv_asymptotic(snr, 1.0);
    assert!((empirical / predicted - 1.0).abs() < 0.05, "{empirical} vs {predicted}");
}

fn small_matrix(seed: u64) -> CMatrix {
    generate_channel(6, 8, &mut stream(seed, Purpose::Channel, &[6, 8]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rip_constant_grows_with_sparsity(seed in 0u64..100_000) {
        let h = small_matrix(seed);
        let deltas: Vec<f64> = (1..=5).map(|k| rip_constant(&h, k).unwrap().delta).collect();
        prop_assert!(deltas.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{:?}", deltas);
    }

    #[test]
    fn subset_delta_is_nonnegative(seed in 0u64..100_000, a in 0usize..8, b in 0usize..8) {
        prop_assume!(a != b);
        prop_assert!(subset_delta(&small_matrix(seed), &[a.min(b), a.max(b)]) >= 0.0);
    }

    #[test]
    fn support_probability_is_monotone(
        n_r in 1u32..64,
        d in 0.0f64..20.0,
        dd in 0.0f64..5.0,
        var in 0.05f64..5.0,
        dv in 0.0f64..5.0,
        tau in 0.5f64..4.0,
    ) {
        let base = support_recovery_prob(n_r, d, var, tau);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(support_recovery_prob(n_r, d + dd, var, tau) >= base);
        prop_assert!(support_recovery_prob(n_r, d, var + dv, tau) <= base);
    }

    #[test]
    fn asymptotic_sinr_below_snr(snr in 0.0f64..1e6, beta in 0.01f64..4.0) {
        prop_assert!(asymptotic_sinr(snr, beta) <= snr * (1.0 + 1e-12));
    }

    #[test]
    fn conventional_mse_is_a_fraction(snr in 1e-3f64..1e6, beta in 0.01f64..1.0) {
        let m = mse_conv_asymptotic(snr, beta);
        prop_assert!(m > 0.0 && m <= 1.0, "{}", m);
    }
}
