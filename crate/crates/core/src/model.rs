//! System model: constellations, i.i.d. Rayleigh channels and noisy observations
//! `y = √P·H·s + v`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PsedError, Result};
use crate::linalg::{complex_gaussian, complex_gaussian_vector, CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
}

impl FromStr for ConstellationKind {
    type Err = PsedError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BPSK" => Ok(ConstellationKind::Bpsk),
            "QPSK" => Ok(ConstellationKind::Qpsk),
            other => Err(PsedError::Config(format!("unsupported constellation `{other}`"))),
        }
    }
}

impl TryFrom<String> for ConstellationKind {
    type Error = PsedError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConstellationKind> for String {
    fn from(k: ConstellationKind) -> String {
        k.to_string()
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstellationKind::Bpsk => "BPSK",
            ConstellationKind::Qpsk => "QPSK",
        })
    }
}

/// A finite unit-energy symbol alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<C64>,
    bits_per_symbol: u32,
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        match kind {
            ConstellationKind::Bpsk => Constellation {
                kind,
                points: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
                bits_per_symbol: 1,
            },
            ConstellationKind::Qpsk => {
                let a = std::f64::consts::FRAC_1_SQRT_2;
                Constellation {
                    kind,
                    points: vec![
                        C64::new(a, a),
                        C64::new(a, -a),
                        C64::new(-a, a),
                        C64::new(-a, -a),
                    ],
                    bits_per_symbol: 2,
                }
            }
        }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    pub fn max_magnitude(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        d
    }

    /// Index of `z` in the alphabet, compared with a 1e-12 tolerance.
    pub fn index_of(&self, z: C64) -> Option<usize> {
        self.points.iter().position(|p| (p - z).norm() <= 1e-12)
    }

    pub fn contains(&self, z: C64) -> bool {
        self.index_of(z).is_some()
    }

    /// Uniform i.i.d. symbol vector of length `n`.
    pub fn random_symbols<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> CVector {
        let m = self.points.len();
        CVector::from_iterator(n, (0..n).map(|_| self.points[rng.random_range(0..m)]))
    }
}

pub fn make_constellation(kind: ConstellationKind) -> Constellation {
    Constellation::new(kind)
}

/// i.i.d. `CN(0, 1/n_r)` channel, drawn column by column.
pub fn generate_channel<R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> CMatrix {
    assert!(n_r >= 1 && n_t >= 1, "channel dimensions must be positive");
    let var = 1.0 / n_r as f64;
    let mut h = CMatrix::zeros(n_r, n_t);
    for j in 0..n_t {
        for i in 0..n_r {
            h[(i, j)] = complex_gaussian(rng, var);
        }
    }
    h
}

/// SNR bookkeeping: `snr = P/σ_v²`, `beta = n_t/n_r`, `snr_rx = beta·snr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub snr: f64,
    pub snr_rx: f64,
    pub beta: f64,
}

impl SnrSpec {
    pub fn new(snr: f64, n_r: usize, n_t: usize) -> Result<Self> {
        if !(snr > 0.0) || n_r == 0 || n_t == 0 {
            return Err(PsedError::Config(format!(
                "invalid SNR specification (snr = {snr}, n_r = {n_r}, n_t = {n_t})"
            )));
        }
        let beta = n_t as f64 / n_r as f64;
        Ok(SnrSpec {
            snr,
            snr_rx: beta * snr,
            beta,
        })
    }

    pub fn from_db(snr_db: f64, n_r: usize, n_t: usize) -> Result<Self> {
        Self::new(db_to_linear(snr_db), n_r, n_t)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One realisation of the system model.
#[derive(Debug, Clone)]
pub struct SystemInstance {
    pub h: CMatrix,
    pub s: CVector,
    pub v: CVector,
    pub y: CVector,
    pub power: f64,
    pub noise_var: f64,
}

impl SystemInstance {
    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    pub fn snr(&self) -> Result<SnrSpec> {
        SnrSpec::new(self.power / self.noise_var, self.n_r(), self.n_t())
    }

    /// `√P·H·s + v` recomputed from the stored parts.
    pub fn rebuild_y(&self) -> CVector {
        &self.h * &self.s * C64::from(self.power.sqrt()) + &self.v
    }
}

/// Passes `s` through the channel and adds `CN(0, σ_v²·I)` noise.
pub fn transmit<R: Rng + ?Sized>(
    h: &CMatrix,
    s: &CVector,
    power: f64,
    noise_var: f64,
    rng: &mut R,
) -> Result<SystemInstance> {
    if h.ncols() != s.len() {
        return Err(PsedError::Dimension(format!(
            "channel has {} columns but symbol vector has length {}",
            h.ncols(),
            s.len()
        )));
    }
    if !(power > 0.0) || !(noise_var >= 0.0) {
        return Err(PsedError::Config(format!(
            "power must be positive and noise variance non-negative (P = {power}, σ_v² = {noise_var})"
        )));
    }
    let v = if noise_var > 0.0 {
        complex_gaussian_vector(rng, h.nrows(), noise_var)
    } else {
        CVector::zeros(h.nrows())
    };
    let y = h * s * C64::from(power.sqrt()) + &v;
    Ok(SystemInstance {
        h: h.clone(),
        s: s.clone(),
        v,
        y,
        power,
        noise_var,
    })
}
