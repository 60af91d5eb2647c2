use serde::{Deserialize, Serialize};

use super::{assign_bins, smoothness, transition_counts, BinGrid, Embeddings, TransitionTable};
use crate::error::{RenalError, Result};

/// Search space and penalties for choosing the bin grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinSelectionConfig {
    /// Weight of the smoothness penalty.
    pub lambda: f64,
    /// Bins-per-dimension candidates, searched in increasing order.
    pub candidate_bins: Vec<usize>,
    /// Largest admissible number of flattened states.
    pub max_states: usize,
    /// Minimum density of non-zero cells in the occupied block of the pooled
    /// count matrix.
    pub min_nonzero_fraction: f64,
}

impl Default for BinSelectionConfig {
    fn default() -> Self {
        Self::event_data()
    }
}

impl BinSelectionConfig {
    /// Defaults for regularly sampled series: up to 6 bins, λ = 0.1.
    pub fn time_series() -> Self {
        Self::with_max_bins(6, 0.1)
    }

    /// Defaults for point-process data: up to 20 bins, λ = 0.08.
    pub fn event_data() -> Self {
        Self::with_max_bins(20, 0.08)
    }

    pub fn with_max_bins(max_bins: usize, lambda: f64) -> Self {
        Self {
            lambda,
            candidate_bins: (2..=max_bins).collect(),
            max_states: 100,
            min_nonzero_fraction: 0.15,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(RenalError::Config(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if self.candidate_bins.is_empty() {
            return Err(RenalError::Config("candidate_bins must not be empty".into()));
        }
        if let Some(&b) = self.candidate_bins.iter().find(|&&b| b < 2) {
            return Err(RenalError::Config(format!("bin candidates must be at least 2, got {b}")));
        }
        if self.max_states == 0 {
            return Err(RenalError::Config("max_states must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_nonzero_fraction) {
            return Err(RenalError::Config(format!(
                "min_nonzero_fraction must lie in [0, 1], got {}",
                self.min_nonzero_fraction
            )));
        }
        Ok(())
    }
}

/// Diagnostics for one evaluated candidate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateScore {
    pub bins_per_dim: usize,
    pub states: usize,
    pub nonzero_fraction: f64,
    pub discrepancy: f64,
    pub smoothness: f64,
    pub objective: f64,
    /// False when the candidate failed the sparsity guard.
    pub admissible: bool,
}

/// The chosen grid together with both transition tables on it.
#[derive(Clone, Debug)]
pub struct BinSelection {
    pub grid: BinGrid,
    pub table0: TransitionTable,
    pub table1: TransitionTable,
    pub objective: f64,
    pub candidates: Vec<CandidateScore>,
}

struct Evaluated {
    score: CandidateScore,
    table0: TransitionTable,
    table1: TransitionTable,
}

fn evaluate(emb0: &Embeddings, emb1: &Embeddings, grid: &BinGrid, lambda: f64) -> Result<Evaluated> {
    let m = grid.state_count();
    let t0 = transition_counts(&assign_bins(emb0, grid)?, m)?;
    let t1 = transition_counts(&assign_bins(emb1, grid)?, m)?;

    let mut nnz = 0usize;
    let mut rows = vec![false; m];
    let mut cols = vec![false; m];
    for u in 0..m {
        for v in 0..m {
            if t0.count(u, v) + t1.count(u, v) > 0 {
                nnz += 1;
                rows[u] = true;
                cols[v] = true;
            }
        }
    }
    let block = rows.iter().filter(|&&r| r).count() * cols.iter().filter(|&&c| c).count();
    let nonzero_fraction = if block == 0 { 0.0 } else { nnz as f64 / block as f64 };

    let discrepancy = t0.frobenius_distance(&t1)?;
    let smooth = smoothness(&t0) + smoothness(&t1);
    Ok(Evaluated {
        score: CandidateScore {
            bins_per_dim: grid.bins_per_dim().unwrap_or(1),
            states: m,
            nonzero_fraction,
            discrepancy,
            smoothness: smooth,
            objective: discrepancy + lambda * smooth,
            admissible: true,
        },
        table0: t0,
        table1: t1,
    })
}

/// Value of the selection objective for a fixed grid:
/// `‖Q₀ − Q₁‖_F + λ (S(Q₀) + S(Q₁))`.
pub fn bin_objective(emb0: &Embeddings, emb1: &Embeddings, grid: &BinGrid, lambda: f64) -> Result<f64> {
    Ok(evaluate(emb0, emb1, grid, lambda)?.score.objective)
}

/// Picks the bins-per-dimension count maximising the selection objective.
///
/// Grid bounds come from the pooled range of both trajectories. Candidates
/// with too many states or too sparse a pooled count matrix are skipped; ties
/// go to the smaller count.
pub fn select_bin_grid(
    emb0: &Embeddings,
    emb1: &Embeddings,
    cfg: &BinSelectionConfig,
) -> Result<BinSelection> {
    cfg.validate()?;
    if emb0.is_empty() || emb1.is_empty() {
        return Err(RenalError::InsufficientData("embedding trajectories must be non-empty".into()));
    }
    if emb0.dim() != emb1.dim() {
        return Err(RenalError::invalid(format!(
            "embedding dimensions differ: {} vs {}",
            emb0.dim(),
            emb1.dim()
        )));
    }
    let dim = emb0.dim();
    let mut candidates = cfg.candidate_bins.clone();
    candidates.sort_unstable();
    candidates.dedup();

    let mut best: Option<(BinGrid, Evaluated)> = None;
    let mut scores = Vec::new();
    for m in candidates {
        let grid = BinGrid::from_pooled(&[emb0, emb1], &vec![m; dim])?;
        if grid.state_count() > cfg.max_states {
            continue;
        }
        let mut ev = evaluate(emb0, emb1, &grid, cfg.lambda)?;
        if ev.score.nonzero_fraction < cfg.min_nonzero_fraction {
            ev.score.admissible = false;
            scores.push(ev.score);
            continue;
        }
        scores.push(ev.score.clone());
        let better = match &best {
            None => true,
            Some((_, b)) => ev.score.objective > b.score.objective,
        };
        if better {
            best = Some((grid, ev));
        }
    }

    match best {
        Some((grid, ev)) => Ok(BinSelection {
            grid,
            objective: ev.score.objective,
            table0: ev.table0,
            table1: ev.table1,
            candidates: scores,
        }),
        None => Err(RenalError::DegenerateData(format!(
            "no bin candidate satisfies max_states = {} and min_nonzero_fraction = {}; \
             lower min_nonzero_fraction or widen candidate_bins",
            cfg.max_states, cfg.min_nonzero_fraction
        ))),
    }
}
