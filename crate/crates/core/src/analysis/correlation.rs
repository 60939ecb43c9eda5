//! Cross-correlation of LMMSE output streams.

use crate::error::{PsedError, Result};
use crate::linalg::{invert, CMatrix, C64};

fn check(h: &CMatrix, power: f64, noise_var: f64, i: usize, j: usize) -> Result<()> {
    if i == j || i >= h.ncols() || j >= h.ncols() {
        return Err(PsedError::Config(format!(
            "stream pair ({i}, {j}) must be distinct columns of a {}-column channel",
            h.ncols()
        )));
    }
    if !(power > 0.0) || !(noise_var > 0.0) {
        return Err(PsedError::Config(format!(
            "stream correlation needs P > 0 and σ_v² > 0 (got {power}, {noise_var})"
        )));
    }
    Ok(())
}

/// `(H_rest·H_restᴴ + c·I)⁻¹` where `H_rest` drops the listed columns.
fn resolvent_without(h: &CMatrix, drop: &[usize], c: f64) -> Result<CMatrix> {
    let n_r = h.nrows();
    let mut g = CMatrix::identity(n_r, n_r) * C64::from(c);
    for (k, col) in h.column_iter().enumerate() {
        if !drop.contains(&k) {
            g += &col * col.adjoint();
        }
    }
    invert(&g, "stream resolvent")
}

/// `E[ŝ_i ŝ_j*] = P·h_iᴴ(HHᴴ + I/SNR)⁻¹h_j` with `SNR = P/σ_v²` (0-based streams).
pub fn stream_correlation(h: &CMatrix, power: f64, noise_var: f64, i: usize, j: usize) -> Result<C64> {
    check(h, power, noise_var, i, j)?;
    let r = resolvent_without(h, &[], noise_var / power)?;
    Ok(h.column(i).dotc(&(r * h.column(j))) * power)
}

/// The same correlation after removing streams `i` and `j` from the resolvent
/// with two rank-one updates:
///
/// `P·h_iᴴA⁻¹h_j / ((1 + h_iᴴB⁻¹h_i)(1 + h_jᴴA⁻¹h_j))`
///
/// where `A` omits both columns and `B` omits only column `i`.
pub fn stream_correlation_lemma(h: &CMatrix, power: f64, noise_var: f64, i: usize, j: usize) -> Result<C64> {
    check(h, power, noise_var, i, j)?;
    let c = noise_var / power;
    let a = resolvent_without(h, &[i, j], c)?;
    let b = resolvent_without(h, &[i], c)?;
    let (hi, hj) = (h.column(i), h.column(j));
    let num = hi.dotc(&(&a * hj));
    let di = C64::from(1.0) + hi.dotc(&(b * hi));
    let dj = C64::from(1.0) + hj.dotc(&(&a * hj));
    Ok(num / (di * dj) * power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_channel;
    use crate::rng::{stream, Purpose};

    #[test]
    fn identity_channel_is_uncorrelated() {
        let h = CMatrix::identity(2, 2);
        assert!(stream_correlation(&h, 1.0, 0.1, 0, 1).unwrap().norm() < 1e-15);
    }

    #[test]
    fn lemma_form_agrees_with_direct_form() {
        let h = generate_channel(8, 8, &mut stream(9, Purpose::Channel, &[]));
        for (i, j) in [(0, 1), (3, 6), (7, 2)] {
            let d = stream_correlation(&h, 1.0, 0.1, i, j).unwrap();
            let l = stream_correlation_lemma(&h, 1.0, 0.1, i, j).unwrap();
            assert!((d - l).norm() < 1e-9, "{d} vs {l}");
        }
    }

    #[test]
    fn rejects_diagonal_pairs() {
        let h = CMatrix::identity(3, 3);
        assert!(stream_correlation(&h, 1.0, 0.1, 1, 1).is_err());
        assert!(stream_correlation(&h, 1.0, 0.0, 0, 1).is_err());
    }
}
