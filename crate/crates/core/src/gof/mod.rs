//! Discretised transition-matrix goodness-of-fit test.
//!
//! Two embedding trajectories are binned on a shared equal-width grid, each
//! is summarised by its empirical transition matrix, and the matrices are
//! compared with a chi-square homogeneity statistic. The grid resolution is
//! chosen per test by maximising a discrepancy-plus-smoothness objective.

mod bins;
pub mod chi2;
mod select;
mod statistic;
mod test;
mod transition;

pub use bins::{assign_bins, BinGrid};
pub use chi2::{chi_square_cdf, chi_square_quantile, chi_square_sf};
pub use select::{bin_objective, select_bin_grid, BinSelection, BinSelectionConfig, CandidateScore};
pub use statistic::{chi_square_statistic, degrees_of_freedom};
pub use test::{fixed_grid_test, renal_test_embeddings, run_renal_test, test_tables, TestReport};
pub use transition::{compact_states, smoothness, transition_counts, transition_probabilities, TransitionTable};

use crate::error::{RenalError, Result};

/// A trajectory of `dim`-dimensional vectors stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    dim: usize,
    data: Vec<f64>,
}

impl Embeddings {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(RenalError::invalid("embedding dimension must be positive"));
        }
        if data.len() % dim != 0 {
            return Err(RenalError::invalid(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(RenalError::invalid("rows have differing dimensions"));
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}
