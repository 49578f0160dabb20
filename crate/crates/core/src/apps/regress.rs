//! Leave-one-out nearest-neighbour regression for residual computation.

use crate::error::{Error, Result};
use crate::kernelcore::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegressorKind {
    KNearestNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Regressor {
    pub kind: RegressorKind,
    pub k: usize,
}

impl Regressor {
    pub fn knn(k: usize) -> Self {
        Self {
            kind: RegressorKind::KNearestNeighbor,
            k,
        }
    }

    /// `k = ⌈√n⌉`, kept below `n`.
    pub fn default_for(n: usize) -> Self {
        let k = (n as f64).sqrt().ceil() as usize;
        Self::knn(k.clamp(1, n.saturating_sub(1).max(1)))
    }

    /// Leave-one-out predictions of `y` from `x`.
    pub fn predict_loo(&self, x: &DataMatrix, y: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            RegressorKind::KNearestNeighbor => knn_regress(x, y, self.k),
        }
    }

    /// `y − ŷ` with leave-one-out predictions.
    pub fn residuals(&self, x: &DataMatrix, y: &[f64]) -> Result<Vec<f64>> {
        let fit = self.predict_loo(x, y)?;
        Ok(y.iter().zip(&fit).map(|(a, b)| a - b).collect())
    }
}

fn squared_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `ŷ_i` is the mean of `y` over the `k` rows nearest to row `i`, excluding
/// `i` itself. Equal distances go to the lower sample index.
pub fn knn_regress(x: &DataMatrix, y: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = x.n();
    if y.len() != n {
        return Err(Error::RowCountMismatch(n, y.len()));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got k = {k} with n = {n}")));
    }
    let mut neighbours: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        neighbours.clear();
        let xi = x.row(i);
        neighbours.extend((0..n).filter(|&j| j != i).map(|j| (squared_difference(xi, x.row(j)), j)));
        neighbours.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut chosen: Vec<usize> = neighbours[..k].iter().map(|&(_, j)| j).collect();
        chosen.sort_unstable();
        out.push(chosen.iter().map(|&j| y[j]).sum::<f64>() / k as f64);
    }
    Ok(out)
}
