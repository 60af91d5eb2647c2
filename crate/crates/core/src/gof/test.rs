use serde::{Deserialize, Serialize};

use super::{
    assign_bins, chi_square_quantile, chi_square_sf, chi_square_statistic, compact_states,
    degrees_of_freedom, select_bin_grid, transition_counts, BinGrid, BinSelectionConfig,
    Embeddings, TransitionTable,
};
use crate::embedding::EmbeddingModel;
use crate::error::{RenalError, Result};
use crate::sequence::ObservationSequence;

/// Outcome of one two-sample test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub dof: u64,
    pub critical_value: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub selected_bins: BinGrid,
    pub occupied_states: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(RenalError::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Statistic, reference distribution and decision for two tables on `grid`.
pub fn test_tables(
    t0: &TransitionTable,
    t1: &TransitionTable,
    grid: BinGrid,
    alpha: f64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let (statistic, occupied_states) = chi_square_statistic(t0, t1)?;
    let dof = degrees_of_freedom(occupied_states);
    let critical_value = chi_square_quantile(1.0 - alpha, dof)?;
    let p_value = chi_square_sf(statistic, dof)?;
    Ok(TestReport {
        statistic,
        dof,
        critical_value,
        p_value,
        alpha,
        reject: statistic >= critical_value,
        selected_bins: grid,
        occupied_states,
    })
}

/// Adaptive-grid test on two embedding trajectories.
pub fn renal_test_embeddings(
    emb0: &Embeddings,
    emb1: &Embeddings,
    cfg: &BinSelectionConfig,
    alpha: f64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let sel = select_bin_grid(emb0, emb1, cfg)?;
    test_tables(&sel.table0, &sel.table1, sel.grid, alpha)
}

/// Test on a caller-supplied grid. Only visited states are materialised, so
/// grids with far more cells than observations are fine.
pub fn fixed_grid_test(
    emb0: &Embeddings,
    emb1: &Embeddings,
    grid: BinGrid,
    alpha: f64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let s0 = assign_bins(emb0, &grid)?;
    let s1 = assign_bins(emb1, &grid)?;
    let (compact, k) = compact_states(&[&s0, &s1]);
    let t0 = transition_counts(&compact[0], k)?;
    let t1 = transition_counts(&compact[1], k)?;
    test_tables(&t0, &t1, grid, alpha)
}

/// Embeds both sequences with the reference-trained model and runs the
/// adaptive-grid test.
pub fn run_renal_test(
    d0: &ObservationSequence,
    d1: &ObservationSequence,
    model: &EmbeddingModel,
    cfg: &BinSelectionConfig,
    alpha: f64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let emb0 = model.embed_sequence(d0)?;
    let emb1 = model.embed_sequence(d1)?;
    renal_test_embeddings(&emb0, &emb1, cfg, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof::transition_probabilities;

    #[test]
    fn decision_agrees_with_p_value() {
        let t0 = transition_probabilities(3, vec![30, 5, 5, 5, 30, 5, 5, 5, 30]).unwrap();
        for c in [vec![30, 5, 5, 5, 30, 5, 5, 5, 30], vec![5, 30, 5, 30, 5, 5, 5, 5, 30], vec![25, 8, 7, 6, 28, 6, 5, 9, 26]] {
            let t1 = transition_probabilities(3, c).unwrap();
            let grid = BinGrid::uniform(3, vec![0.0], vec![1.0]).unwrap();
            let r = test_tables(&t0, &t1, grid, 0.05).unwrap();
            assert_eq!(r.reject, r.p_value <= r.alpha);
            assert_eq!(r.dof, 6);
        }
    }

    #[test]
    fn alpha_out_of_range() {
        let t = transition_probabilities(2, vec![1, 1, 1, 1]).unwrap();
        let grid = BinGrid::uniform(2, vec![0.0], vec![1.0]).unwrap();
        for a in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(test_tables(&t, &t, grid.clone(), a), Err(RenalError::InvalidInput(_))));
        }
    }

    #[test]
    fn fixed_grid_ignores_unvisited_cells() {
        let a = Embeddings::new(1, vec![0.0, 0.9, 0.1, 0.95, 0.05, 1.0]).unwrap();
        let b = Embeddings::new(1, vec![0.0, 0.1, 0.9, 0.95, 1.0, 0.05]).unwrap();
        let coarse = BinGrid::uniform(2, vec![0.0], vec![1.0]).unwrap();
        let fine = BinGrid::uniform(1000, vec![0.0], vec![1.0]).unwrap();
        let rc = fixed_grid_test(&a, &b, coarse, 0.05).unwrap();
        let rf = fixed_grid_test(&a, &b, fine, 0.05).unwrap();
        assert_eq!(rc.occupied_states, 2);
        assert!(rf.occupied_states <= 6);
        assert!(rc.statistic.is_finite() && rf.statistic.is_finite());
    }
}
