//! Greedy recovery of the sparse error vector from `y′ = √P·H·e + v`.
//!
//! Both solvers work on the scaled dictionary `A = √P·H`. Candidate supports
//! are evaluated with a Cholesky solve on the Gram matrix `AᴴA`; the support
//! that is finally returned is re-solved with [`ls_on_support`] so the
//! reported estimate is always the QR least-squares solution.
//!
//! Indices are 0-based throughout.

use std::collections::HashSet;

use crate::error::{PsedError, Result};
use crate::linalg::{hpd_solve, qr_least_squares, select_columns, CMatrix, CVector, C64};

/// A set of column indices kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Builds a support from arbitrary-order indices; `n` is the number of columns.
    pub fn new(indices: &[usize], n: usize) -> Result<Self> {
        let mut v = indices.to_vec();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(PsedError::Config(format!("duplicate index in support {indices:?}")));
        }
        if let Some(&bad) = v.iter().find(|&&i| i >= n) {
            return Err(PsedError::Config(format!("support index {bad} out of range for {n} columns")));
        }
        Ok(SupportSet(v))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub support: SupportSet,
    /// Full-length estimate, zero off the support.
    pub e_hat: CVector,
    pub residual_norm: f64,
    /// Number of distinct candidate supports evaluated, pruned ones included.
    pub paths_explored: usize,
    /// Number of candidates dropped by the `max_paths` cap.
    pub paths_pruned: usize,
    pub iterations: usize,
}

fn check_dims(h: &CMatrix, y: &CVector) -> Result<()> {
    if h.nrows() != y.len() {
        return Err(PsedError::Dimension(format!(
            "matrix has {} rows, measurement has length {}",
            h.nrows(),
            y.len()
        )));
    }
    Ok(())
}

fn scatter(n: usize, support: &[usize], values: &CVector) -> CVector {
    let mut e = CVector::zeros(n);
    for (k, &j) in support.iter().enumerate() {
        e[j] = values[k];
    }
    e
}

/// Oracle least squares on a known support:
/// `(1/√P)(H_𝓔ᴴH_𝓔)⁻¹H_𝓔ᴴ·y′`, scattered to length `n_t`.
pub fn ls_on_support(h: &CMatrix, y: &CVector, power: f64, support: &SupportSet) -> Result<CVector> {
    check_dims(h, y)?;
    let sub = select_columns(h, support.indices());
    let x = qr_least_squares(&sub, y, &format!("least squares on support {:?}", support.indices()))?;
    Ok(scatter(h.ncols(), support.indices(), &x.map(|z| z / power.sqrt())))
}

/// Regularised estimate on a known support:
/// `(1/√P)(H_𝓔ᴴH_𝓔 + σ_v²/(P·σ_e²)·I)⁻¹H_𝓔ᴴ·y′`.
pub fn lmmse_on_support(
    h: &CMatrix,
    y: &CVector,
    power: f64,
    support: &SupportSet,
    sigma_e2: f64,
    noise_var: f64,
) -> Result<CVector> {
    check_dims(h, y)?;
    if !(sigma_e2 > 0.0) || !(noise_var >= 0.0) {
        return Err(PsedError::Config(format!(
            "LMMSE on support needs σ_e² > 0 and σ_v² ≥ 0 (got {sigma_e2}, {noise_var})"
        )));
    }
    if support.is_empty() {
        return Ok(CVector::zeros(h.ncols()));
    }
    let sub = select_columns(h, support.indices());
    let mut gram = sub.adjoint() * &sub;
    let reg = noise_var / (power * sigma_e2);
    for i in 0..gram.nrows() {
        gram[(i, i)] += C64::from(reg);
    }
    let rhs = sub.adjoint() * y;
    let x = hpd_solve(&gram, &rhs, &format!("LMMSE on support {:?}", support.indices()))?;
    Ok(scatter(h.ncols(), support.indices(), &x.map(|z| z / power.sqrt())))
}

/// Early-stop tolerance for noiseless problems: `1e-9·‖y′‖₂`.
pub fn default_tol(y: &CVector) -> f64 {
    1e-9 * y.norm()
}

#[derive(Debug, Clone)]
struct Path {
    /// Indices in selection order.
    order: Vec<usize>,
    key: Vec<usize>,
    /// Least-squares coefficients of `order`.
    coef: CVector,
    residual_norm: f64,
    parent: Option<usize>,
}

/// Shared kernels of OMP and MMP so that `L = 1` reproduces OMP bit for bit.
struct Engine<'a> {
    h: &'a CMatrix,
    y: &'a CVector,
    power: f64,
    a: CMatrix,
    gram: CMatrix,
    aty: CVector,
}

impl<'a> Engine<'a> {
    fn new(h: &'a CMatrix, y: &'a CVector, power: f64) -> Result<Self> {
        check_dims(h, y)?;
        if !(power > 0.0) {
            return Err(PsedError::Config(format!("power must be positive (got {power})")));
        }
        let sp = C64::from(power.sqrt());
        let a = h * sp;
        let gram = a.adjoint() * &a;
        let aty = a.adjoint() * y;
        Ok(Engine { h, y, power, a, gram, aty })
    }

    fn root(&self) -> Path {
        Path {
            order: Vec::new(),
            key: Vec::new(),
            coef: CVector::zeros(0),
            residual_norm: self.y.norm(),
            parent: None,
        }
    }

    /// `|a_jᴴ r|²` for every column, with `Aᴴr = Aᴴy − G·x` on the path's support.
    fn correlations(&self, path: &Path) -> Vec<f64> {
        let mut atr = self.aty.clone();
        for (t, &col) in path.order.iter().enumerate() {
            atr.axpy(-path.coef[t], &self.gram.column(col), C64::new(1.0, 0.0));
        }
        atr.iter().map(|z| z.norm_sqr()).collect()
    }

    /// The `l` unselected columns of largest correlation, ties to the lower index.
    fn best_indices(&self, corr: &[f64], exclude: &[usize], l: usize) -> Vec<usize> {
        let mut cand: Vec<usize> = (0..corr.len()).filter(|j| !exclude.contains(j)).collect();
        cand.sort_by(|&i, &j| corr[j].total_cmp(&corr[i]).then(i.cmp(&j)));
        cand.truncate(l);
        cand
    }

    fn extend(&self, parent: &Path, parent_idx: usize, j: usize) -> Result<Path> {
        let mut order = parent.order.clone();
        order.push(j);
        let k = order.len();
        let g = CMatrix::from_fn(k, k, |r, c| self.gram[(order[r], order[c])]);
        let rhs = CVector::from_fn(k, |r, _| self.aty[order[r]]);
        let x = hpd_solve(&g, &rhs, &format!("least squares on support {order:?}"))?;
        let mut residual = self.y.clone();
        for (t, &col) in order.iter().enumerate() {
            residual.axpy(-x[t], &self.a.column(col), C64::new(1.0, 0.0));
        }
        let residual_norm = residual.norm();
        let mut key = order.clone();
        key.sort_unstable();
        Ok(Path {
            order,
            key,
            coef: x,
            residual_norm,
            parent: Some(parent_idx),
        })
    }

    fn finish(&self, order: &[usize], paths_explored: usize, paths_pruned: usize, iterations: usize) -> Result<RecoveryResult> {
        let support = SupportSet::new(order, self.h.ncols())?;
        let e_hat = if support.is_empty() {
            CVector::zeros(self.h.ncols())
        } else {
            ls_on_support(self.h, self.y, self.power, &support)?
        };
        let residual = self.y - &self.a * &e_hat;
        Ok(RecoveryResult {
            support,
            e_hat,
            residual_norm: residual.norm(),
            paths_explored,
            paths_pruned,
            iterations,
        })
    }
}

/// Orthogonal matching pursuit: at most `k` greedy selections, stopping once
/// the residual norm drops to `tol`.
pub fn omp(h: &CMatrix, y: &CVector, power: f64, k: usize, tol: f64) -> Result<RecoveryResult> {
    if k == 0 {
        return Err(PsedError::Config("OMP needs K ≥ 1".into()));
    }
    let engine = Engine::new(h, y, power)?;
    let mut path = engine.root();
    let mut iterations = 0;
    let mut explored = 0;
    let max_k = k.min(h.ncols());
    while path.residual_norm > tol && iterations < max_k {
        let corr = engine.correlations(&path);
        let j = engine.best_indices(&corr, &path.order, 1)[0];
        path = engine.extend(&path, 0, j)?;
        explored += 1;
        iterations += 1;
    }
    engine.finish(&path.order, explored, 0, iterations)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmpParams {
    /// Sparsity, i.e. the number of layers.
    pub k: usize,
    /// Children spawned per path.
    pub l: usize,
    pub tol: f64,
    pub max_paths: usize,
}

impl MmpParams {
    pub const DEFAULT_MAX_PATHS: usize = 64;

    pub fn new(k: usize, l: usize) -> Self {
        MmpParams {
            k,
            l,
            tol: 0.0,
            max_paths: Self::DEFAULT_MAX_PATHS,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_paths(mut self, max_paths: usize) -> Self {
        self.max_paths = max_paths;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 || self.max_paths == 0 {
            return Err(PsedError::Config(format!(
                "MMP needs K ≥ 1, L ≥ 1 and max_paths ≥ 1 (got K = {}, L = {}, max_paths = {})",
                self.k, self.l, self.max_paths
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(PsedError::Config(format!("tolerance must be non-negative (got {})", self.tol)));
        }
        Ok(())
    }
}

/// One candidate support of an MMP layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    pub order: Vec<usize>,
    pub residual_norm: f64,
    /// Index of the parent in the previous layer.
    pub parent: Option<usize>,
}

/// Surviving candidates of every layer, root first.
#[derive(Debug, Clone, Default)]
pub struct MmpTrace {
    pub layers: Vec<Vec<PathSummary>>,
}

/// Multipath matching pursuit with deduplicated breadth-first expansion.
pub fn mmp(h: &CMatrix, y: &CVector, power: f64, params: &MmpParams) -> Result<RecoveryResult> {
    mmp_run(h, y, power, params, None)
}

/// As [`mmp`], also returning the candidate tree layer by layer.
pub fn mmp_traced(h: &CMatrix, y: &CVector, power: f64, params: &MmpParams) -> Result<(RecoveryResult, MmpTrace)> {
    let mut trace = MmpTrace::default();
    let res = mmp_run(h, y, power, params, Some(&mut trace))?;
    Ok((res, trace))
}

fn summarize(layer: &[Path]) -> Vec<PathSummary> {
    layer
        .iter()
        .map(|p| PathSummary {
            order: p.order.clone(),
            residual_norm: p.residual_norm,
            parent: p.parent,
        })
        .collect()
}

fn mmp_run(h: &CMatrix, y: &CVector, power: f64, params: &MmpParams, mut trace: Option<&mut MmpTrace>) -> Result<RecoveryResult> {
    params.validate()?;
    let engine = Engine::new(h, y, power)?;
    let mut layer = vec![engine.root()];
    if let Some(t) = trace.as_deref_mut() {
        t.layers.push(summarize(&layer));
    }
    let mut explored = 0;
    let mut pruned = 0;
    let mut iterations = 0;
    let max_k = params.k.min(h.ncols());

    let best_of = |layer: &[Path]| -> usize {
        let mut best = 0;
        for (u, p) in layer.iter().enumerate() {
            if p.residual_norm < layer[best].residual_norm {
                best = u;
            }
        }
        best
    };

    if layer[0].residual_norm <= params.tol {
        return engine.finish(&[], 0, 0, 0);
    }

    while iterations < max_k {
        let mut next: Vec<Path> = Vec::new();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for (i, parent) in layer.iter().enumerate() {
            let corr = engine.correlations(parent);
            for j in engine.best_indices(&corr, &parent.order, params.l) {
                let mut key = parent.key.clone();
                key.push(j);
                key.sort_unstable();
                if !seen.insert(key) {
                    continue;
                }
                next.push(engine.extend(parent, i, j)?);
                explored += 1;
            }
        }
        if next.len() > params.max_paths {
            let mut idx: Vec<usize> = (0..next.len()).collect();
            idx.sort_by(|&a, &b| next[a].residual_norm.total_cmp(&next[b].residual_norm).then(a.cmp(&b)));
            idx.truncate(params.max_paths);
            idx.sort_unstable();
            pruned += next.len() - idx.len();
            let mut slots: Vec<Option<Path>> = next.into_iter().map(Some).collect();
            next = idx.into_iter().map(|i| slots[i].take().expect("index kept once")).collect();
        }
        layer = next;
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.layers.push(summarize(&layer));
        }
        if layer.iter().any(|p| p.residual_norm <= params.tol) {
            break;
        }
    }

    let best = best_of(&layer);
    engine.finish(&layer[best].order, explored, pruned, iterations)
}
