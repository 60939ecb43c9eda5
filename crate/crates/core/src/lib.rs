//! Post sparse error detection (PSED) for large-scale linear systems.
//!
//! A conventional linear detector produces a rough symbol estimate. Slicing
//! that estimate and re-encoding it turns the observation into a measurement
//! of a sparse error vector, which a greedy sparse solver (OMP or multipath
//! matching pursuit) recovers and cancels.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: constellations, channels, and noisy observations
//! - [`detectors`]: MF / ZF / LMMSE weight matrices
//! - [`slicer`]: hard and posterior-mean slicing
//! - [`recovery`]: OMP, MMP and support-restricted estimators
//! - [`pipeline`]: the five-step PSED detector
//! - [`baselines`]: exhaustive ML and K-best reference detectors
//! - [`analysis`]: RIP constants, recovery guarantees, large-system formulas, complexity counts
//! - [`harness`]: Monte Carlo sweeps, configuration, and CSV output

pub mod analysis;
pub mod baselines;
pub mod detectors;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod recovery;
pub mod rng;
pub mod slicer;

pub use error::{PsedError, Result};
pub use linalg::{CMatrix, CVector, C64};
