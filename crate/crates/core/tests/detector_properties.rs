mod common;

use common::{max_abs, rotated_etf};
use proptest::prelude::*;
use psed::baselines::{kbest_detect, ml_cost, ml_detect, KBestConfig};
use psed::detectors::{detect, weight_matrix, LinearKind};
use psed::harness::trial_instance;
use psed::model::{make_constellation, ConstellationKind};
use psed::pipeline::{psed_detect, refine, symbol_errors, PsedConfig};
use psed::rng::{stream, Purpose};
use psed::slicer::hard_slice;
use psed::CVector;
use rand::Rng;

fn kbest_cost(inst: &psed::model::SystemInstance, c: &psed::model::Constellation, m: usize) -> f64 {
    let out = kbest_detect(&inst.y, &inst.h, 1.0, c, KBestConfig::new(m).unwrap()).unwrap();
    ml_cost(&inst.y, &inst.h, 1.0, &out.symbols)
}

#[test]
fn widest_kbest_is_never_beaten_by_a_narrower_one() {
    // with |Ω|^(n_t − 1) survivors no partial candidate is ever discarded
    let c = make_constellation(ConstellationKind::Qpsk);
    for seed in 0..40 {
        let inst = trial_instance(seed, 8, 8, 6.0, 0, &c).unwrap();
        let full = kbest_cost(&inst, &c, 4usize.pow(7));
        let ml = ml_detect(&inst.y, &inst.h, 1.0, &c, 8).unwrap();
        assert_eq!(full, ml.cost, "seed {seed}");
        for m in [1, 2, 4, 8, 16, 64, 256] {
            assert!(full <= kbest_cost(&inst, &c, m), "seed {seed}, m = {m}");
        }
    }
}

#[test]
fn kbest_cost_can_rise_between_narrow_widths() {
    // survivor sets are not nested: a wider search can keep a different
    // partial candidate and end on a worse leaf
    let c = make_constellation(ConstellationKind::Qpsk);
    let inst = trial_instance(7, 8, 8, 6.0, 0, &c).unwrap();
    assert!(kbest_cost(&inst, &c, 8) > kbest_cost(&inst, &c, 4));
}

#[test]
fn ml_cost_lower_bounds_every_detector() {
    let c = make_constellation(ConstellationKind::Qpsk);
    for seed in 0..20 {
        let inst = trial_instance(seed, 8, 8, 8.0, 0, &c).unwrap();
        let ml = ml_detect(&inst.y, &inst.h, 1.0, &c, 8).unwrap();
        let cfg = PsedConfig::for_system(LinearKind::Lmmse, 8);
        let psed = psed_detect(&inst.y, &inst.h, 1.0, inst.noise_var, &c, &cfg).unwrap();
        let w = weight_matrix(&inst.h, LinearKind::Lmmse, 1.0, inst.noise_var).unwrap();
        let lmmse = hard_slice(&detect(&w, &inst.y).unwrap(), &c).values;
        let kb = kbest_detect(&inst.y, &inst.h, 1.0, &c, KBestConfig::new(4).unwrap()).unwrap();
        for other in [&psed.s_final.values, &lmmse, &kb.symbols] {
            assert!(ml.cost <= ml_cost(&inst.y, &inst.h, 1.0, other));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Planted errors on a certified matrix: recovery finds `e`, the final
    /// slice returns `s`, and running the tail again changes nothing.
    #[test]
    fn exact_recovery_restores_symbols_and_tail_is_idempotent(seed in 0u64..10_000) {
        let c = make_constellation(ConstellationKind::Qpsk);
        let h = rotated_etf(seed);
        let s = c.random_symbols(&mut stream(seed, Purpose::Symbols, &[]), 17);
        let y = &h * &s;
        let mut rng = stream(seed, Purpose::Support, &[]);
        let mut s_hat = s.clone();
        let first = rng.random_range(0..17);
        let second = (first + rng.random_range(1..17)) % 17;
        for i in [first, second] {
            s_hat[i] = c.points()[(c.index_of(s[i]).unwrap() + rng.random_range(1..4)) % 4];
        }
        let mut cfg = PsedConfig::for_system(LinearKind::Lmmse, 17);
        cfg.k = 2;
        let out = refine(&y, &h, 1.0, 0.0, &s_hat, &c, &cfg).unwrap();
        let e: CVector = &s - &s_hat;
        prop_assert!(max_abs((&out.e_hat - &e).iter().copied()) < 1e-8);
        prop_assert_eq!(&out.s_final.values, &s);

        let again = refine(&y, &h, 1.0, 0.0, &out.s_final.values, &c, &cfg).unwrap();
        prop_assert!(symbol_errors(&again.s_final.values, &s) <= symbol_errors(&out.s_final.values, &s));
    }
}
