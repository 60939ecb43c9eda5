#![allow(dead_code)]

use std::f64::consts::PI;

use psed::linalg::complex_gaussian;
use psed::rng::{stream, Purpose};
use psed::{CMatrix, C64};
use rand::Rng;

/// 16×17 equiangular tight frame: the 17-point DFT with its first row
/// removed, scaled to unit-norm columns. Every column pair has coherence
/// exactly 1/16.
pub fn simplex_etf() -> CMatrix {
    CMatrix::from_fn(16, 17, |r, c| C64::from_polar(0.25, 2.0 * PI * ((r + 1) * c) as f64 / 17.0))
}

/// Haar-like random unitary from the QR of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng, 1.0));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution does not depend on the QR convention
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::from(1.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// The frame rotated by a random unitary and given random column phases.
/// Rotations and phases leave every RIP constant unchanged.
pub fn rotated_etf(seed: u64) -> CMatrix {
    let mut rng = stream(seed, Purpose::Channel, &[17]);
    let u = random_unitary(16, &mut rng);
    let mut h = u * simplex_etf();
    for j in 0..h.ncols() {
        let ph = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        let col = h.column(j) * ph;
        h.set_column(j, &col);
    }
    h
}

pub fn max_abs(v: impl IntoIterator<Item = C64>) -> f64 {
    v.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}
