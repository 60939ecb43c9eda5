use rayon::prelude::*;

use crate::analysis::{mse_conv_asymptotic, mse_psed_closed_form};
use crate::baselines::{default_ml_max_dim, kbest_detect, ml_detect, KBestConfig};
use crate::detectors::{detect, weight_matrix, LinearKind, WeightMatrix};
use crate::error::{PsedError, Result};
use crate::linalg::CVector;
use crate::model::{db_to_linear, generate_channel, make_constellation, transmit, Constellation, ConstellationKind, SystemInstance};
use crate::pipeline::{psed_detect_with_weights, symbol_errors, PsedConfig};
use crate::rng::{stream, Purpose};
use crate::slicer::hard_slice;

use super::config::{DetectorKind, SweepConfig};

/// One `(detector, snr)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub detector: DetectorKind,
    pub n_r: usize,
    pub n_t: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub symbol_errors: u64,
    pub ser: f64,
    pub mse: f64,
    pub seed: u64,
}

/// A trial that needed attention: either PSED fell back to the linear-stage slice,
/// or the detector failed outright and the trial was dropped from its cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedTrial {
    pub detector: DetectorKind,
    pub snr_db: f64,
    pub trial: usize,
    pub dropped: bool,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub flagged: Vec<FlaggedTrial>,
}

impl SweepResult {
    pub fn row(&self, detector: DetectorKind, snr_db: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.detector == detector && r.snr_db == snr_db)
    }

    /// SNR grid and SER of one detector, in grid order.
    pub fn ser_curve(&self, detector: DetectorKind) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.detector == detector)
            .map(|r| (r.snr_db, r.ser))
            .collect()
    }

    pub fn has_dropped_trials(&self) -> bool {
        self.flagged.iter().any(|f| f.dropped)
    }
}

/// Channel, symbols and noise for one trial. Every detector sees the same
/// instance for a given `(seed, size, snr, trial)`.
pub fn trial_instance(
    master_seed: u64,
    n_r: usize,
    n_t: usize,
    snr_db: f64,
    trial: usize,
    constellation: &Constellation,
) -> Result<SystemInstance> {
    let key = [n_r as u64, n_t as u64, snr_db.to_bits(), trial as u64];
    let h = generate_channel(n_r, n_t, &mut stream(master_seed, Purpose::Channel, &key));
    let s = constellation.random_symbols(&mut stream(master_seed, Purpose::Symbols, &key), n_t);
    let noise_var = 1.0 / db_to_linear(snr_db);
    transmit(&h, &s, 1.0, noise_var, &mut stream(master_seed, Purpose::Noise, &key))
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    errors: u64,
    sq_error: f64,
}

enum Outcome {
    Done(Tally, Option<String>),
    Failed(String),
}

struct Runner<'a> {
    cfg: &'a SweepConfig,
    constellation: Constellation,
    psed_mf: PsedConfig,
    psed_lmmse: PsedConfig,
}

impl Runner<'_> {
    fn run(
        &self,
        kind: DetectorKind,
        inst: &SystemInstance,
        weights: &mut [Option<WeightMatrix>; 2],
    ) -> Result<(CVector, CVector, Option<String>)> {
        let (y, h, p, nv) = (&inst.y, &inst.h, inst.power, inst.noise_var);
        let c = &self.constellation;
        if let Some(base) = kind.linear_base() {
            let slot = &mut weights[usize::from(base == LinearKind::Lmmse)];
            if slot.is_none() {
                *slot = Some(weight_matrix(h, base, p, nv)?);
            }
            let w = slot.as_ref().expect("weights just built");
            if kind.is_psed() {
                let cfg = if base == LinearKind::Mf { &self.psed_mf } else { &self.psed_lmmse };
                let out = psed_detect_with_weights(y, h, p, nv, c, cfg, w)?;
                return Ok((out.s_final.values, out.s_doublehat, out.recovery_failure));
            }
            let s_tilde = detect(w, y)?;
            let sliced = hard_slice(&s_tilde, c).values;
            return Ok((sliced, s_tilde, None));
        }
        let symbols = if kind == DetectorKind::KBest {
            kbest_detect(y, h, p, c, KBestConfig::new(self.cfg.kbest_m)?)?.symbols
        } else {
            ml_detect(y, h, p, c, default_ml_max_dim(c.kind()))?.symbols
        };
        Ok((symbols.clone(), symbols, None))
    }

    fn trial(&self, snr_db: f64, trial: usize) -> Result<Vec<Outcome>> {
        let cfg = self.cfg;
        let inst = trial_instance(cfg.master_seed, cfg.n_r, cfg.n_t, snr_db, trial, &self.constellation)?;
        let n_t = cfg.n_t as f64;
        // MF and LMMSE weights, shared by the plain and PSED variants
        let mut weights = [None, None];
        cfg.detectors
            .iter()
            .map(|&kind| match self.run(kind, &inst, &mut weights) {
                Ok((decided, estimate, note)) => {
                    let tally = Tally {
                        errors: symbol_errors(&decided, &inst.s) as u64,
                        sq_error: (&inst.s - &estimate).norm_squared() / n_t,
                    };
                    Ok(Outcome::Done(tally, note))
                }
                Err(e) if e.is_numerical() => Ok(Outcome::Failed(e.to_string())),
                Err(e) => Err(e),
            })
            .collect()
    }
}

/// Runs every `(detector, snr)` cell for `trials` fresh instances.
///
/// Trials run in parallel; each writes to its own slot and the slots are
/// reduced in trial order, so the output is independent of scheduling.
/// A detector that fails numerically on a trial is flagged and that trial is
/// left out of the cell's counts.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let runner = Runner {
        cfg,
        constellation: make_constellation(cfg.constellation),
        psed_mf: cfg.psed.pipeline_config(LinearKind::Mf),
        psed_lmmse: cfg.psed.pipeline_config(LinearKind::Lmmse),
    };

    let mut result = SweepResult::default();
    for &snr_db in &cfg.snr_db_grid {
        let slots: Vec<Vec<Outcome>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| runner.trial(snr_db, t))
            .collect::<Result<_>>()?;

        for (d, &kind) in cfg.detectors.iter().enumerate() {
            let mut total = Tally::default();
            let mut used = 0usize;
            for (t, outcomes) in slots.iter().enumerate() {
                match &outcomes[d] {
                    Outcome::Done(tally, note) => {
                        total.errors += tally.errors;
                        total.sq_error += tally.sq_error;
                        used += 1;
                        if let Some(msg) = note {
                            result.flagged.push(FlaggedTrial {
                                detector: kind,
                                snr_db,
                                trial: t,
                                dropped: false,
                                message: msg.clone(),
                            });
                        }
                    }
                    Outcome::Failed(msg) => result.flagged.push(FlaggedTrial {
                        detector: kind,
                        snr_db,
                        trial: t,
                        dropped: true,
                        message: msg.clone(),
                    }),
                }
            }
            let (ser, mse) = if used == 0 {
                (0.0, 0.0)
            } else {
                (
                    total.errors as f64 / (cfg.n_t * used) as f64,
                    total.sq_error / used as f64,
                )
            };
            result.rows.push(SweepRow {
                detector: kind,
                n_r: cfg.n_r,
                n_t: cfg.n_t,
                snr_db,
                trials: used,
                symbol_errors: total.errors,
                ser,
                mse,
                seed: cfg.master_seed,
            });
        }
    }
    result.rows.sort_by(|a, b| {
        let da = cfg.detectors.iter().position(|d| *d == a.detector);
        let db = cfg.detectors.iter().position(|d| *d == b.detector);
        da.cmp(&db)
    });
    Ok(result)
}

/// Closed-form MSE curves at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub snr_db: f64,
    pub mse_conv_asymptotic: f64,
    pub mse_psed_closed_form: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseCurves {
    pub sweep: SweepResult,
    pub analytic: Vec<AnalyticPoint>,
}

impl MseCurves {
    pub fn analytic_at(&self, snr_db: f64) -> Option<&AnalyticPoint> {
        self.analytic.iter().find(|a| a.snr_db == snr_db)
    }
}

/// Empirical LMMSE and PSED-LMMSE MSE next to the large-system predictions.
/// The detector list of `cfg` is replaced; the constellation must be BPSK and
/// `n_t ≤ n_r`.
pub fn run_mse_curves(cfg: &SweepConfig) -> Result<MseCurves> {
    if cfg.constellation != ConstellationKind::Bpsk {
        return Err(PsedError::Config(format!(
            "MSE curves are defined for BPSK (got {})",
            cfg.constellation
        )));
    }
    if cfg.n_t > cfg.n_r {
        return Err(PsedError::Config(format!(
            "MSE curves need n_t ≤ n_r (got {}x{})",
            cfg.n_r, cfg.n_t
        )));
    }
    let mut cfg = cfg.clone();
    cfg.detectors = vec![DetectorKind::Lmmse, DetectorKind::PsedLmmse];
    let sweep = run_sweep(&cfg)?;
    let beta = cfg.n_t as f64 / cfg.n_r as f64;
    let analytic = cfg
        .snr_db_grid
        .iter()
        .map(|&snr_db| {
            let snr = db_to_linear(snr_db);
            Ok(AnalyticPoint {
                snr_db,
                mse_conv_asymptotic: mse_conv_asymptotic(snr, beta),
                mse_psed_closed_form: mse_psed_closed_form(snr, beta)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MseCurves { sweep, analytic })
}

/// SNR at which a decreasing SER curve crosses `target`, interpolating
/// linearly in `log10(SER)` between the bracketing grid points.
pub fn snr_at_ser(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    if let Some(&(snr, ser)) = curve.first() {
        if ser <= target {
            return Some(snr);
        }
    }
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 > target && y1 <= target {
            if y1 <= 0.0 {
                return Some(x1);
            }
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1))
        } else {
            None
        }
    })
}
