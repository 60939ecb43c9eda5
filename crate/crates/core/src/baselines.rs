//! Reference detectors: exhaustive maximum likelihood and K-best tree search.

use crate::error::{PsedError, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::model::{Constellation, ConstellationKind};

/// Largest `n_t` for which exhaustive ML is attempted by default.
pub fn default_ml_max_dim(kind: ConstellationKind) -> usize {
    match kind {
        ConstellationKind::Bpsk => 12,
        ConstellationKind::Qpsk => 8,
    }
}

/// `‖y − √P·H·s‖²`.
pub fn ml_cost(y: &CVector, h: &CMatrix, power: f64, s: &CVector) -> f64 {
    (y - h * s * C64::from(power.sqrt())).norm_squared()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlOutput {
    pub symbols: CVector,
    /// `ml_cost` of `symbols`.
    pub cost: f64,
}

/// Exhaustive search over `Ωⁿᵗ`. Candidates are visited in lexicographic order
/// of constellation index and only a strictly smaller cost replaces the incumbent.
pub fn ml_detect(y: &CVector, h: &CMatrix, power: f64, constellation: &Constellation, max_dim: usize) -> Result<MlOutput> {
    let (n_r, n_t) = h.shape();
    if y.len() != n_r {
        return Err(PsedError::Dimension(format!("H has {n_r} rows, y has length {}", y.len())));
    }
    if n_t > max_dim {
        return Err(PsedError::Capacity(format!(
            "exhaustive ML over {} symbols of a {}-point alphabet exceeds max_dim = {max_dim}",
            n_t,
            constellation.len()
        )));
    }
    let sp = C64::from(power.sqrt());
    // columns[j][k] = √P·h_j·γ_k
    let columns: Vec<Vec<CVector>> = (0..n_t)
        .map(|j| constellation.points().iter().map(|&g| h.column(j) * (sp * g)).collect())
        .collect();

    let mut idx = vec![0usize; n_t];
    let mut best_idx = vec![0usize; n_t];
    let mut best = f64::INFINITY;
    // partial[d] = y minus the contribution of the first d symbols
    let mut partial: Vec<CVector> = vec![y.clone(); n_t + 1];
    let m = constellation.len();
    let mut depth = 0usize;
    loop {
        if depth == n_t {
            let cost = partial[n_t].norm_squared();
            if cost < best {
                best = cost;
                best_idx.copy_from_slice(&idx);
            }
            // backtrack
            loop {
                if depth == 0 {
                    let symbols = CVector::from_iterator(n_t, best_idx.iter().map(|&k| constellation.points()[k]));
                    // report the cost on the same arithmetic path as ml_cost
                    let cost = ml_cost(y, h, power, &symbols);
                    return Ok(MlOutput { symbols, cost });
                }
                depth -= 1;
                idx[depth] += 1;
                if idx[depth] < m {
                    break;
                }
                idx[depth] = 0;
            }
        }
        let next = &partial[depth] - &columns[depth][idx[depth]];
        partial[depth + 1] = next;
        depth += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KBestConfig {
    pub m: usize,
}

impl KBestConfig {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(PsedError::Config("K-best needs m ≥ 1".into()));
        }
        Ok(KBestConfig { m })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KBestOutput {
    pub symbols: CVector,
    /// Accumulated `‖Qᴴy − √P·R·s‖²` of the returned candidate.
    pub metric: f64,
}

/// Triangularised system `z = Qᴴy`, `R` from a thin QR of `√P·H`.
#[derive(Debug, Clone)]
pub struct TriangularSystem {
    pub r: CMatrix,
    pub z: CVector,
}

impl TriangularSystem {
    pub fn new(y: &CVector, h: &CMatrix, power: f64) -> Result<Self> {
        let (n_r, n_t) = h.shape();
        if y.len() != n_r {
            return Err(PsedError::Dimension(format!("H has {n_r} rows, y has length {}", y.len())));
        }
        if n_r < n_t {
            return Err(PsedError::Dimension(format!(
                "K-best needs n_r ≥ n_t for a triangular system (got {n_r} x {n_t})"
            )));
        }
        let qr = (h * C64::from(power.sqrt())).qr();
        let mut z = y.clone();
        qr.q_tr_mul(&mut z);
        Ok(TriangularSystem {
            r: qr.r(),
            z: z.rows(0, n_t).into_owned(),
        })
    }

    /// Metric increment of layer `i` given the symbols of layers `i..n_t`.
    fn increment(&self, i: usize, tail: &[C64]) -> f64 {
        let n = self.r.ncols();
        let mut acc = self.z[i];
        for (t, j) in (i..n).enumerate() {
            acc -= self.r[(i, j)] * tail[t];
        }
        acc.norm_sqr()
    }

    pub fn metric(&self, s: &CVector) -> f64 {
        (&self.z - &self.r * s).norm_squared()
    }
}

/// Breadth-first K-best search from the last layer to the first, keeping the
/// `m` partial candidates of smallest accumulated metric.
pub fn kbest_detect(y: &CVector, h: &CMatrix, power: f64, constellation: &Constellation, config: KBestConfig) -> Result<KBestOutput> {
    let sys = TriangularSystem::new(y, h, power)?;
    let n_t = h.ncols();
    // each candidate stores symbols for layers i..n_t, front = layer i
    let mut survivors: Vec<(f64, Vec<C64>)> = vec![(0.0, Vec::new())];
    for i in (0..n_t).rev() {
        let mut children = Vec::with_capacity(survivors.len() * constellation.len());
        for (metric, tail) in &survivors {
            for &g in constellation.points() {
                let mut cand = Vec::with_capacity(tail.len() + 1);
                cand.push(g);
                cand.extend_from_slice(tail);
                let m = metric + sys.increment(i, &cand);
                children.push((m, cand));
            }
        }
        // stable sort keeps generation order among equal metrics
        children.sort_by(|a, b| a.0.total_cmp(&b.0));
        children.truncate(config.m);
        survivors = children;
    }
    let (metric, symbols) = survivors.into_iter().next().expect("at least one survivor");
    Ok(KBestOutput {
        symbols: CVector::from_vec(symbols),
        metric,
    })
}
