//! Complex-multiplication counts of MF, LMMSE and their PSED variants.

use std::fmt;
use std::str::FromStr;

use crate::error::{PsedError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexityDetector {
    Mf,
    PsedMf,
    Lmmse,
    PsedLmmse,
}

impl ComplexityDetector {
    pub const ALL: [ComplexityDetector; 4] = [
        ComplexityDetector::Mf,
        ComplexityDetector::PsedMf,
        ComplexityDetector::Lmmse,
        ComplexityDetector::PsedLmmse,
    ];

    fn is_psed(self) -> bool {
        matches!(self, ComplexityDetector::PsedMf | ComplexityDetector::PsedLmmse)
    }

    fn uses_inversion(self) -> bool {
        matches!(self, ComplexityDetector::Lmmse | ComplexityDetector::PsedLmmse)
    }
}

impl fmt::Display for ComplexityDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplexityDetector::Mf => "MF",
            ComplexityDetector::PsedMf => "PSED-MF",
            ComplexityDetector::Lmmse => "LMMSE",
            ComplexityDetector::PsedLmmse => "PSED-LMMSE",
        })
    }
}

impl FromStr for ComplexityDetector {
    type Err = PsedError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MF" => Ok(ComplexityDetector::Mf),
            "PSED-MF" => Ok(ComplexityDetector::PsedMf),
            "LMMSE" => Ok(ComplexityDetector::Lmmse),
            "PSED-LMMSE" => Ok(ComplexityDetector::PsedLmmse),
            other => Err(PsedError::Config(format!("no complexity model for detector `{other}`"))),
        }
    }
}

/// Multiplications of an `n × n` Gaussian-elimination inversion: `(2n³ + 3n² − 5n)/6`.
pub fn inversion_mults(n: u64) -> u64 {
    // n(n−1)(2n+5) is always divisible by 6
    (2 * n * n * n + 3 * n * n - 5 * n) / 6
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityReport {
    pub detector: ComplexityDetector,
    pub n_r: u64,
    pub n_t: u64,
    pub k: u64,
    pub l: u64,
    pub rows: Vec<(&'static str, u64)>,
    pub total: u64,
}

pub fn complexity_count(detector: ComplexityDetector, n_r: u64, n_t: u64, k: u64, l: u64) -> Result<ComplexityReport> {
    if n_r == 0 || n_t == 0 {
        return Err(PsedError::Config("n_r and n_t must be positive".into()));
    }
    if detector.is_psed() && (k == 0 || l == 0 || k > n_t) {
        return Err(PsedError::Config(format!(
            "PSED counts need 1 ≤ K ≤ n_t and L ≥ 1 (got K = {k}, L = {l}, n_t = {n_t})"
        )));
    }
    let weight = if detector.uses_inversion() {
        2 * n_r * n_t * n_t + inversion_mults(n_t)
    } else {
        0
    };
    let mut rows = vec![("filter weight generation", weight), ("filtering", n_r * n_t)];
    if detector.is_psed() {
        let ks = 1..=k;
        let matching: u64 = ks.clone().map(|i| n_r * (n_t - i + 1)).sum();
        let projection: u64 = ks.clone().map(|i| (2 * n_r * i * i + inversion_mults(i) + i * n_r) * l).sum();
        let residual: u64 = ks.map(|i| i * n_r * l).sum();
        rows.push(("sparse transform", n_r * n_t));
        rows.push(("sparse recovery (matching)", matching));
        rows.push(("sparse recovery (orthogonal projection)", projection));
        rows.push(("sparse recovery (residual generation)", residual));
    }
    let total = rows.iter().map(|(_, c)| c).sum();
    Ok(ComplexityReport {
        detector,
        n_r,
        n_t,
        k: if detector.is_psed() { k } else { 0 },
        l: if detector.is_psed() { l } else { 0 },
        rows,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_small_sizes() {
        assert_eq!(inversion_mults(1), 0);
        assert_eq!(inversion_mults(2), 3);
        assert_eq!(inversion_mults(3), 11);
        assert_eq!(inversion_mults(32), 11_408);
    }

    #[test]
    fn table_totals_32() {
        let t = |d| complexity_count(d, 32, 32, 4, 2).unwrap().total;
        assert_eq!(t(ComplexityDetector::Mf), 1_024);
        assert_eq!(t(ComplexityDetector::Lmmse), 77_968);
        assert_eq!(t(ComplexityDetector::PsedLmmse), 88_096);
        assert_eq!(t(ComplexityDetector::PsedMf), 11_152);
    }

    /// Closed-form total: base + Σ_k n_r(n_t−k+1) + (2n_r k² + I_v(k) + 2k n_r)L.
    fn hand_total(d: ComplexityDetector, nr: u64, nt: u64, k: u64, l: u64) -> u64 {
        let iv = |n: u64| (2 * n.pow(3) + 3 * n * n - 5 * n) / 6;
        let tail: u64 = (1..=k).map(|i| nr * (nt - i + 1) + (2 * nr * i * i + iv(i) + 2 * i * nr) * l).sum();
        match d {
            ComplexityDetector::Mf => nr * nt,
            ComplexityDetector::Lmmse => 2 * nr * nt * nt + iv(nt) + nr * nt,
            ComplexityDetector::PsedMf => 2 * nr * nt + tail,
            ComplexityDetector::PsedLmmse => 2 * nr * nt * nt + iv(nt) + 2 * nr * nt + tail,
        }
    }

    #[test]
    fn totals_match_expanded_sums() {
        for (nr, nt, k, l) in [(32, 32, 4, 2), (64, 64, 9, 2), (48, 32, 4, 3), (128, 32, 4, 1), (7, 5, 5, 4)] {
            for d in ComplexityDetector::ALL {
                let rep = complexity_count(d, nr, nt, k, l).unwrap();
                assert_eq!(rep.total, hand_total(d, nr, nt, k, l), "{d} {nr}x{nt}");
                assert_eq!(rep.total, rep.rows.iter().map(|r| r.1).sum::<u64>());
            }
        }
    }

    #[test]
    fn unknown_detector_name() {
        assert!("KBEST".parse::<ComplexityDetector>().is_err());
        assert!(complexity_count(ComplexityDetector::PsedMf, 8, 4, 5, 1).is_err());
    }
}
