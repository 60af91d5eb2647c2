use serde::{Deserialize, Serialize};

use super::Embeddings;
use crate::error::{RenalError, Result};

/// Equal-width partition of embedding space, flattened row-major with
/// dimension 0 as the most significant digit.
///
/// Intervals are half-open `[lo, hi)` except the last bin of each dimension,
/// which also takes its upper edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    bins: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Dimensions with zero pooled range, collapsed to a single bin.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    collapsed: Vec<usize>,
}

impl BinGrid {
    pub fn new(bins: Vec<usize>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if bins.is_empty() || bins.len() != lower.len() || bins.len() != upper.len() {
            return Err(RenalError::invalid(format!(
                "grid needs matching, non-empty bins/lower/upper (got {}, {}, {})",
                bins.len(),
                lower.len(),
                upper.len()
            )));
        }
        for j in 0..bins.len() {
            if bins[j] == 0 {
                return Err(RenalError::invalid(format!("dimension {j} has zero bins")));
            }
            if !(lower[j].is_finite() && upper[j].is_finite()) {
                return Err(RenalError::invalid(format!("dimension {j} has non-finite bounds")));
            }
            if lower[j] >= upper[j] {
                return Err(RenalError::invalid(format!(
                    "dimension {j}: lower bound {} is not below upper bound {}",
                    lower[j], upper[j]
                )));
            }
        }
        let grid = Self {
            bins,
            lower,
            upper,
            collapsed: Vec::new(),
        };
        grid.checked_state_count()?;
        Ok(grid)
    }

    /// Same bin count on every dimension.
    pub fn uniform(bins_per_dim: usize, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(vec![bins_per_dim; lower.len()], lower, upper)
    }

    /// Componentwise min/max over every row of every trajectory.
    pub fn pooled_bounds(trajectories: &[&Embeddings]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dim = trajectories
            .first()
            .map(|e| e.dim())
            .ok_or_else(|| RenalError::invalid("no trajectories to bound"))?;
        if trajectories.iter().any(|e| e.dim() != dim) {
            return Err(RenalError::invalid("trajectories have different embedding dimensions"));
        }
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for row in trajectories.iter().flat_map(|e| e.rows()) {
            for j in 0..dim {
                lower[j] = lower[j].min(row[j]);
                upper[j] = upper[j].max(row[j]);
            }
        }
        if lower.iter().any(|v| !v.is_finite()) || upper.iter().any(|v| !v.is_finite()) {
            return Err(RenalError::InsufficientData(
                "cannot bound empty or non-finite trajectories".into(),
            ));
        }
        Ok((lower, upper))
    }

    /// Grid with `bins[j]` bins over the pooled range of dimension `j`.
    /// Dimensions with zero range collapse to one bin.
    pub fn from_pooled(trajectories: &[&Embeddings], bins: &[usize]) -> Result<Self> {
        let (lower, mut upper) = Self::pooled_bounds(trajectories)?;
        if bins.len() != lower.len() {
            return Err(RenalError::invalid(format!(
                "{} bin counts for {} dimensions",
                bins.len(),
                lower.len()
            )));
        }
        let mut bins = bins.to_vec();
        let mut collapsed = Vec::new();
        for j in 0..lower.len() {
            if upper[j] <= lower[j] {
                upper[j] = lower[j] + 1.0;
                bins[j] = 1;
                collapsed.push(j);
            }
        }
        let mut grid = Self::new(bins, lower, upper)?;
        grid.collapsed = collapsed;
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn collapsed(&self) -> &[usize] {
        &self.collapsed
    }

    /// Common bin count of the non-collapsed dimensions, if there is one.
    pub fn bins_per_dim(&self) -> Option<usize> {
        let mut active = (0..self.dim())
            .filter(|j| !self.collapsed.contains(j))
            .map(|j| self.bins[j]);
        let first = active.next()?;
        active.all(|b| b == first).then_some(first)
    }

    fn checked_state_count(&self) -> Result<usize> {
        self.bins
            .iter()
            .try_fold(1usize, |acc, &b| acc.checked_mul(b))
            .ok_or_else(|| RenalError::invalid("grid state count overflows"))
    }

    /// Number of flattened states, the product of the per-dimension counts.
    pub fn state_count(&self) -> usize {
        self.bins.iter().product()
    }

    /// Interior boundaries of dimension `j`, including both outer edges.
    pub fn edges(&self, j: usize) -> Vec<f64> {
        let width = (self.upper[j] - self.lower[j]) / self.bins[j] as f64;
        (0..=self.bins[j])
            .map(|k| {
                if k == self.bins[j] {
                    self.upper[j]
                } else {
                    self.lower[j] + k as f64 * width
                }
            })
            .collect()
    }

    /// Bin of `v` along dimension `j`, clamping values outside the bounds.
    fn bin_of(&self, j: usize, v: f64) -> usize {
        let m = self.bins[j];
        if v <= self.lower[j] {
            return 0;
        }
        if v >= self.upper[j] {
            return m - 1;
        }
        let pos = (v - self.lower[j]) / (self.upper[j] - self.lower[j]) * m as f64;
        (pos.floor() as usize).min(m - 1)
    }

    /// Flattened state index of one embedding.
    pub fn state_of(&self, point: &[f64]) -> usize {
        point
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &v)| acc * self.bins[j] + self.bin_of(j, v))
    }
}

/// Maps each embedding to its flattened bin index.
pub fn assign_bins(embeddings: &Embeddings, grid: &BinGrid) -> Result<Vec<usize>> {
    if embeddings.is_empty() {
        return Ok(Vec::new());
    }
    if embeddings.dim() != grid.dim() {
        return Err(RenalError::invalid(format!(
            "embedding dimension {} does not match grid dimension {}",
            embeddings.dim(),
            grid.dim()
        )));
    }
    Ok(embeddings.rows().map(|row| grid.state_of(row)).collect())
}
