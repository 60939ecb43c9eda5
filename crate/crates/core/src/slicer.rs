//! Symbol slicing: nearest-point hard decisions and posterior-mean soft decisions.

use std::fmt;
use std::str::FromStr;

use crate::error::{PsedError, Result};
use crate::linalg::{CVector, C64};
use crate::model::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SliceMode {
    #[default]
    Hard,
    Soft,
}

impl fmt::Display for SliceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SliceMode::Hard => "HARD",
            SliceMode::Soft => "SOFT",
        })
    }
}

impl FromStr for SliceMode {
    type Err = PsedError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HARD" => Ok(SliceMode::Hard),
            "SOFT" => Ok(SliceMode::Soft),
            other => Err(PsedError::Config(format!("unknown slicer mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlicedVector {
    pub values: CVector,
    pub mode: SliceMode,
}

/// Index of the nearest constellation point; ties go to the lowest index.
pub fn nearest_index(z: C64, constellation: &Constellation) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, p) in constellation.points().iter().enumerate() {
        let d = (z - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

pub fn hard_slice_value(z: C64, constellation: &Constellation) -> C64 {
    constellation.points()[nearest_index(z, constellation)]
}

pub fn hard_slice(soft: &CVector, constellation: &Constellation) -> SlicedVector {
    SlicedVector {
        values: soft.map(|z| hard_slice_value(z, constellation)),
        mode: SliceMode::Hard,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftSlice {
    pub value: C64,
    /// Set when no likelihood survived and the hard decision on `s̃/g` was used.
    pub fell_back: bool,
}

/// Posterior mean `E[s | s̃]` under `s̃ ~ CN(g·s, σ_s²)` with the given priors.
///
/// Log-likelihoods are max-shifted before exponentiation.
pub fn soft_slice(soft: C64, priors: &[f64], gain: C64, sigma_s2: f64, constellation: &Constellation) -> Result<SoftSlice> {
    let points = constellation.points();
    if priors.len() != points.len() {
        return Err(PsedError::Dimension(format!(
            "{} priors for a {}-point constellation",
            priors.len(),
            points.len()
        )));
    }
    let total: f64 = priors.iter().sum();
    if priors.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(PsedError::Config(format!("priors do not form a probability vector (sum {total})")));
    }
    let fallback = || {
        let z = if gain.norm() > 0.0 { soft / gain } else { soft };
        SoftSlice {
            value: hard_slice_value(z, constellation),
            fell_back: true,
        }
    };
    if !(sigma_s2 > 0.0) || !sigma_s2.is_finite() {
        return Ok(fallback());
    }
    let logs: Vec<f64> = points
        .iter()
        .zip(priors)
        .map(|(p, &prior)| {
            if prior > 0.0 {
                -(soft - gain * p).norm_sqr() / sigma_s2 + prior.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Ok(fallback());
    }
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for (p, l) in points.iter().zip(&logs) {
        let w = (l - peak).exp();
        num += p * w;
        den += w;
    }
    if !(den > 0.0) || !den.is_finite() {
        return Ok(fallback());
    }
    Ok(SoftSlice {
        value: num / den,
        fell_back: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_constellation, ConstellationKind};

    fn qpsk() -> Constellation {
        make_constellation(ConstellationKind::Qpsk)
    }

    fn bpsk() -> Constellation {
        make_constellation(ConstellationKind::Bpsk)
    }

    #[test]
    fn nearest_qpsk_point() {
        let a = 0.5f64.sqrt();
        assert_eq!(hard_slice_value(C64::new(0.9, 0.8), &qpsk()), C64::new(a, a));
    }

    #[test]
    fn hard_slice_fixes_constellation_points() {
        let c = qpsk();
        let v = CVector::from_vec(c.points().to_vec());
        assert_eq!(hard_slice(&v, &c).values, v);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        assert_eq!(hard_slice_value(C64::new(0.0, 0.0), &bpsk()), C64::new(1.0, 0.0));
        assert_eq!(nearest_index(C64::new(0.0, 0.0), &qpsk()), 0);
    }

    #[test]
    fn soft_slice_symmetric_zero() {
        let out = soft_slice(C64::new(0.0, 0.0), &[0.5, 0.5], C64::new(1.0, 0.0), 0.7, &bpsk()).unwrap();
        assert!(out.value.norm() < 1e-15);
        assert!(!out.fell_back);
    }

    #[test]
    fn soft_slice_point_mass_prior() {
        let c = qpsk();
        for z in [C64::new(5.0, -3.0), C64::new(-0.2, 0.1)] {
            let out = soft_slice(z, &[0.0, 0.0, 1.0, 0.0], C64::new(1.0, 0.0), 0.3, &c).unwrap();
            assert_eq!(out.value, c.points()[2]);
        }
    }

    #[test]
    fn soft_slice_bpsk_two_term_sum() {
        // explicit two-term posterior mean with unnormalised Gaussian weights
        let (z, var) = (0.3f64, 0.5f64);
        let wp = (-(z - 1.0).powi(2) / var).exp();
        let wm = (-(z + 1.0).powi(2) / var).exp();
        let direct = (wp - wm) / (wp + wm);
        assert!((direct - (0.3f64 / 0.25).tanh()).abs() < 1e-14);
        let out = soft_slice(C64::new(z, 0.0), &[0.5, 0.5], C64::new(1.0, 0.0), var, &bpsk()).unwrap();
        assert!((out.value - C64::new(direct, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn soft_slice_survives_extreme_snr() {
        let out = soft_slice(C64::new(0.4, 0.3), &[0.25; 4], C64::new(1.0, 0.0), 1e-300, &qpsk()).unwrap();
        assert!(!out.fell_back);
        assert!((out.value - qpsk().points()[0]).norm() < 1e-12);
    }

    #[test]
    fn soft_slice_falls_back_without_variance() {
        let out = soft_slice(C64::new(-0.4, 0.3), &[0.25; 4], C64::new(2.0, 0.0), 0.0, &qpsk()).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.value, qpsk().points()[2]);
    }

    #[test]
    fn soft_slice_rejects_bad_priors() {
        assert!(soft_slice(C64::new(0.0, 0.0), &[0.6, 0.6], C64::new(1.0, 0.0), 1.0, &bpsk()).is_err());
        assert!(soft_slice(C64::new(0.0, 0.0), &[1.0], C64::new(1.0, 0.0), 1.0, &bpsk()).is_err());
    }
}
