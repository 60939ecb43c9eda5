use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::baselines::default_ml_max_dim;
use crate::detectors::LinearKind;
use crate::error::{PsedError, Result};
use crate::model::ConstellationKind;
use crate::pipeline::{default_sparsity, PsedConfig, SupportEstimator};
use crate::recovery::MmpParams;
use crate::slicer::SliceMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Mf,
    Lmmse,
    PsedMf,
    PsedLmmse,
    KBest,
    Ml,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Mf,
        DetectorKind::Lmmse,
        DetectorKind::PsedMf,
        DetectorKind::PsedLmmse,
        DetectorKind::KBest,
        DetectorKind::Ml,
    ];

    /// Linear front end, if the detector has one.
    pub fn linear_base(self) -> Option<LinearKind> {
        match self {
            DetectorKind::Mf | DetectorKind::PsedMf => Some(LinearKind::Mf),
            DetectorKind::Lmmse | DetectorKind::PsedLmmse => Some(LinearKind::Lmmse),
            DetectorKind::KBest | DetectorKind::Ml => None,
        }
    }

    pub fn is_psed(self) -> bool {
        matches!(self, DetectorKind::PsedMf | DetectorKind::PsedLmmse)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Mf => "MF",
            DetectorKind::Lmmse => "LMMSE",
            DetectorKind::PsedMf => "PSED-MF",
            DetectorKind::PsedLmmse => "PSED-LMMSE",
            DetectorKind::KBest => "KBEST",
            DetectorKind::Ml => "ML",
        })
    }
}

impl FromStr for DetectorKind {
    type Err = PsedError;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        DetectorKind::ALL
            .into_iter()
            .find(|d| d.to_string() == up || (up == "K-BEST" && *d == DetectorKind::KBest))
            .ok_or_else(|| PsedError::Config(format!("unknown detector `{}`", s.trim())))
    }
}

/// A fully validated sweep description.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n_r: usize,
    pub n_t: usize,
    pub constellation: ConstellationKind,
    pub detectors: Vec<DetectorKind>,
    pub snr_db_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub psed: PsedSettings,
    pub kbest_m: usize,
    pub output: Option<PathBuf>,
}

/// PSED parameters shared by PSED-MF and PSED-LMMSE; the base detector comes
/// from the detector name.
#[derive(Debug, Clone, PartialEq)]
pub struct PsedSettings {
    pub k: usize,
    pub l: usize,
    pub estimator: SupportEstimator,
    pub slicer: SliceMode,
    pub max_paths: usize,
}

impl PsedSettings {
    pub fn for_system(n_t: usize) -> Self {
        PsedSettings {
            k: default_sparsity(n_t),
            l: 2,
            estimator: SupportEstimator::Ls,
            slicer: SliceMode::Hard,
            max_paths: MmpParams::DEFAULT_MAX_PATHS,
        }
    }

    pub fn pipeline_config(&self, base: LinearKind) -> PsedConfig {
        PsedConfig {
            base_detector: base,
            slicer_mode: self.slicer,
            k: self.k,
            l: self.l,
            estimator: self.estimator,
            tol: 0.0,
            max_paths: self.max_paths,
            sigma_e2: None,
        }
    }
}

impl SweepConfig {
    /// Defaults for an `n_r × n_t` system: MF, LMMSE and both PSED variants,
    /// QPSK, 0–20 dB in 2 dB steps, 1000 trials.
    pub fn for_system(n_r: usize, n_t: usize) -> Self {
        SweepConfig {
            n_r,
            n_t,
            constellation: ConstellationKind::Qpsk,
            detectors: vec![
                DetectorKind::Mf,
                DetectorKind::Lmmse,
                DetectorKind::PsedMf,
                DetectorKind::PsedLmmse,
            ],
            snr_db_grid: (0..=10).map(|i| 2.0 * i as f64).collect(),
            trials: 1000,
            master_seed: 0,
            psed: PsedSettings::for_system(n_t),
            kbest_m: 15,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 || self.n_t == 0 {
            return Err(PsedError::Config(format!(
                "system size must be positive (n_r = {}, n_t = {})",
                self.n_r, self.n_t
            )));
        }
        if self.detectors.is_empty() {
            return Err(PsedError::Config("detector list is empty".into()));
        }
        if self.snr_db_grid.is_empty() {
            return Err(PsedError::Config("snr_db_grid is empty".into()));
        }
        if let Some(bad) = self.snr_db_grid.iter().find(|x| !x.is_finite()) {
            return Err(PsedError::Config(format!("snr_db_grid contains {bad}")));
        }
        if self.trials == 0 {
            return Err(PsedError::Config("trials must be at least 1".into()));
        }
        if self.detectors.iter().any(|d| d.is_psed()) {
            self.psed.pipeline_config(LinearKind::Lmmse).validate(self.n_t)?;
        }
        if self.detectors.contains(&DetectorKind::KBest) {
            if self.kbest_m == 0 {
                return Err(PsedError::Config("kbest.m must be at least 1".into()));
            }
            if self.n_r < self.n_t {
                return Err(PsedError::Config(format!(
                    "K-best needs n_r ≥ n_t (got {}x{})",
                    self.n_r, self.n_t
                )));
            }
        }
        if self.detectors.contains(&DetectorKind::Ml) {
            let max_dim = default_ml_max_dim(self.constellation);
            if self.n_t > max_dim {
                return Err(PsedError::Config(format!(
                    "ML detection is limited to n_t ≤ {max_dim} for {} (got n_t = {})",
                    self.constellation, self.n_t
                )));
            }
        }
        Ok(())
    }
}

/// The on-disk config format. Every field is optional; missing fields fall
/// back to [`SweepConfig::for_system`].
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_r: Option<usize>,
    pub n_t: Option<usize>,
    pub constellation: Option<ConstellationKind>,
    pub detectors: Option<Vec<String>>,
    pub snr_db_grid: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub psed: PsedSection,
    #[serde(default)]
    pub kbest: KBestSection,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PsedSection {
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub estimator: Option<String>,
    pub slicer: Option<String>,
    pub max_paths: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KBestSection {
    pub m: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| PsedError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PsedError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Fields of `other` that are set replace those of `self`.
    pub fn overlay(mut self, other: ConfigFile) -> Self {
        macro_rules! take {
            ($($f:ident).+) => {
                if other.$($f).+.is_some() {
                    self.$($f).+ = other.$($f).+;
                }
            };
        }
        take!(n_r);
        take!(n_t);
        take!(constellation);
        take!(detectors);
        take!(snr_db_grid);
        take!(trials);
        take!(master_seed);
        take!(output);
        take!(psed.k);
        take!(psed.l);
        take!(psed.estimator);
        take!(psed.slicer);
        take!(psed.max_paths);
        take!(kbest.m);
        self
    }

    /// Resolves defaults and validates. A preset, if given, supplies the
    /// system size and K-best width before explicit keys are applied.
    pub fn resolve(&self, preset: Option<&Preset>) -> Result<SweepConfig> {
        let n_r = self.n_r.or(preset.map(|p| p.n_r));
        let n_t = self.n_t.or(preset.map(|p| p.n_t));
        let (n_r, n_t) = match (n_r, n_t) {
            (Some(r), Some(t)) => (r, t),
            _ => return Err(PsedError::Config("n_r and n_t must be given (or a preset chosen)".into())),
        };
        let mut cfg = SweepConfig::for_system(n_r, n_t);
        if let Some(p) = preset {
            cfg.kbest_m = p.kbest_m;
        }
        if let Some(c) = self.constellation {
            cfg.constellation = c;
        }
        if let Some(d) = &self.detectors {
            cfg.detectors = d.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(g) = &self.snr_db_grid {
            cfg.snr_db_grid = g.clone();
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.master_seed {
            cfg.master_seed = s;
        }
        cfg.output = self.output.clone();
        let p = &self.psed;
        if let Some(k) = p.k {
            cfg.psed.k = k;
        }
        if let Some(l) = p.l {
            cfg.psed.l = l;
        }
        if let Some(e) = &p.estimator {
            cfg.psed.estimator = e.parse()?;
        }
        if let Some(s) = &p.slicer {
            cfg.psed.slicer = s.parse()?;
        }
        if let Some(m) = p.max_paths {
            cfg.psed.max_paths = m;
        }
        if let Some(m) = self.kbest.m {
            cfg.kbest_m = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A named system size with its K-best width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub n_r: usize,
    pub n_t: usize,
    pub kbest_m: usize,
    pub long_running: bool,
}

pub const PRESETS: [Preset; 7] = [
    Preset { name: "32x32", n_r: 32, n_t: 32, kbest_m: 15, long_running: false },
    Preset { name: "64x64", n_r: 64, n_t: 64, kbest_m: 40, long_running: false },
    Preset { name: "128x128", n_r: 128, n_t: 128, kbest_m: 95, long_running: false },
    Preset { name: "256x256", n_r: 256, n_t: 256, kbest_m: 260, long_running: true },
    Preset { name: "48x32", n_r: 48, n_t: 32, kbest_m: 15, long_running: false },
    Preset { name: "64x32", n_r: 64, n_t: 32, kbest_m: 15, long_running: false },
    Preset { name: "128x32", n_r: 128, n_t: 32, kbest_m: 15, long_running: false },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name.trim()).ok_or_else(|| {
        let known: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        PsedError::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}
