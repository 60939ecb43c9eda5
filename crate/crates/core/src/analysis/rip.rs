use rand::seq::index::sample;
use rand::Rng;

use crate::error::{PsedError, Result};
use crate::linalg::{select_columns, CMatrix};

/// Largest number of supports enumerated by [`rip_constant`].
pub const EXHAUSTIVE_BUDGET: u128 = 1_000_000;

/// Supports drawn by [`rip_constant_sampled`] when the caller has no preference.
pub const SAMPLED_SUBSETS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipEstimate {
    pub k: usize,
    pub delta: f64,
    pub subsets_checked: u64,
    /// False for sampled estimates, which are only lower bounds.
    pub exhaustive: bool,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Isometry defect of one support: `max(σ_max² − 1, 1 − σ_min²)` of `H_T`.
pub fn subset_delta(h: &CMatrix, cols: &[usize]) -> f64 {
    let sub = select_columns(h, cols);
    let sv = sub.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    // a support wider than the row count has a zero singular value
    let smin = if cols.len() > h.nrows() {
        0.0
    } else {
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    (smax * smax - 1.0).max(1.0 - smin * smin)
}

fn check_k(h: &CMatrix, k: usize) -> Result<()> {
    if k == 0 || k > h.ncols() {
        return Err(PsedError::Config(format!(
            "RIP order K = {k} must lie in 1..={}",
            h.ncols()
        )));
    }
    Ok(())
}

/// Exact `δ_K` by enumerating all `C(n_t, K)` supports.
pub fn rip_constant(h: &CMatrix, k: usize) -> Result<RipEstimate> {
    check_k(h, k)?;
    let n = h.ncols();
    let count = binomial(n, k);
    if count > EXHAUSTIVE_BUDGET {
        return Err(PsedError::Capacity(format!(
            "C({n}, {k}) = {count} supports exceed the exhaustive budget of {EXHAUSTIVE_BUDGET}; use the sampled estimate"
        )));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut delta = 0.0f64;
    let mut checked = 0u64;
    loop {
        delta = delta.max(subset_delta(h, &idx));
        checked += 1;
        // advance to the next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(RipEstimate {
                    k,
                    delta,
                    subsets_checked: checked,
                    exhaustive: true,
                });
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lower bound on `δ_K` from `samples` uniformly drawn supports.
pub fn rip_constant_sampled<R: Rng + ?Sized>(h: &CMatrix, k: usize, samples: usize, rng: &mut R) -> Result<RipEstimate> {
    check_k(h, k)?;
    let mut delta = 0.0f64;
    for _ in 0..samples {
        let mut cols = sample(rng, h.ncols(), k).into_vec();
        cols.sort_unstable();
        delta = delta.max(subset_delta(h, &cols));
    }
    Ok(RipEstimate {
        k,
        delta,
        subsets_checked: samples as u64,
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, C64};
    use crate::model::generate_channel;
    use crate::rng::{stream, Purpose};
    use nalgebra::SymmetricEigen;

    fn orthonormal(seed: u64, m: usize, n: usize) -> CMatrix {
        let mut rng = stream(seed, Purpose::Channel, &[]);
        let a = CMatrix::from_fn(m, n, |_, _| complex_gaussian(&mut rng, 1.0));
        a.qr().q()
    }

    #[test]
    fn orthonormal_columns_have_zero_delta() {
        let h = orthonormal(1, 8, 5);
        for k in 1..=5 {
            assert!(rip_constant(&h, k).unwrap().delta < 1e-12);
        }
    }

    #[test]
    fn duplicated_column_breaks_isometry() {
        let mut h = orthonormal(2, 8, 5);
        let c = h.column(1).into_owned();
        h.set_column(4, &c);
        assert!(rip_constant(&h, 2).unwrap().delta >= 1.0 - 1e-12);
    }

    #[test]
    fn matches_gram_eigenvalues() {
        let h = generate_channel(16, 20, &mut stream(3, Purpose::Channel, &[]));
        let est = rip_constant(&h, 2).unwrap();
        assert_eq!(est.subsets_checked as u128, binomial(20, 2));
        let mut oracle = 0.0f64;
        for a in 0..20 {
            for b in a + 1..20 {
                let sub = select_columns(&h, &[a, b]);
                let eig = SymmetricEigen::new(sub.adjoint() * sub).eigenvalues;
                let lmax = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lmin = eig.iter().cloned().fold(f64::INFINITY, f64::min);
                oracle = oracle.max((lmax - 1.0).max(1.0 - lmin));
            }
        }
        assert!((est.delta - oracle).abs() < 1e-10);
    }

    #[test]
    fn budget_is_enforced_and_sampling_bounds_below() {
        let h = generate_channel(8, 40, &mut stream(4, Purpose::Channel, &[]));
        assert!(matches!(rip_constant(&h, 8), Err(PsedError::Capacity(_))));
        let h = generate_channel(10, 12, &mut stream(5, Purpose::Channel, &[]));
        let exact = rip_constant(&h, 3).unwrap();
        let sampled = rip_constant_sampled(&h, 3, 50, &mut stream(5, Purpose::Sampling, &[])).unwrap();
        assert!(!sampled.exhaustive);
        assert!(sampled.delta <= exact.delta + 1e-15);
    }

    #[test]
    fn wide_support_has_unit_defect() {
        let h = CMatrix::from_element(1, 2, C64::new(1.0, 0.0));
        assert!(rip_constant(&h, 2).unwrap().delta >= 1.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 4), 4845);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
    }
}
