use std::collections::BTreeMap;

use crate::error::{RenalError, Result};

/// Empirical transition counts and row-normalised probabilities over `m`
/// states, both stored row-major.
///
/// Rows with no outgoing transitions keep an all-zero probability row.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionTable {
    m: usize,
    counts: Vec<u64>,
    probs: Vec<f64>,
    row_totals: Vec<u64>,
    n_events: u64,
}

impl TransitionTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self, u: usize, v: usize) -> u64 {
        self.counts[u * self.m + v]
    }

    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.probs[u * self.m + v]
    }

    pub fn row_total(&self, u: usize) -> u64 {
        self.row_totals[u]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn n_events(&self) -> u64 {
        self.n_events
    }

    /// Frobenius norm of the difference of the two probability matrices.
    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        if self.m != other.m {
            return Err(RenalError::invalid(format!(
                "tables have {} and {} states",
                self.m, other.m
            )));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Builds a table from an `m × m` row-major count matrix, normalising rows.
pub fn transition_probabilities(m: usize, counts: Vec<u64>) -> Result<TransitionTable> {
    if counts.len() != m * m {
        return Err(RenalError::invalid(format!(
            "expected {} counts for {m} states, got {}",
            m * m,
            counts.len()
        )));
    }
    let row_totals: Vec<u64> = counts.chunks_exact(m.max(1)).map(|r| r.iter().sum()).collect();
    let mut probs = vec![0.0; m * m];
    for u in 0..m {
        let total = row_totals[u];
        if total == 0 {
            continue;
        }
        for v in 0..m {
            probs[u * m + v] = counts[u * m + v] as f64 / total as f64;
        }
    }
    let n_events = row_totals.iter().sum();
    Ok(TransitionTable {
        m,
        counts,
        probs,
        row_totals,
        n_events,
    })
}

/// Counts transitions between consecutive states.
pub fn transition_counts(states: &[usize], m: usize) -> Result<TransitionTable> {
    if states.len() < 2 {
        return Err(RenalError::InsufficientData(format!(
            "need at least 2 states to count transitions, got {}",
            states.len()
        )));
    }
    if let Some(&bad) = states.iter().find(|&&s| s >= m) {
        return Err(RenalError::invalid(format!("state {bad} out of range for {m} states")));
    }
    let mut counts = vec![0u64; m * m];
    for w in states.windows(2) {
        counts[w[0] * m + w[1]] += 1;
    }
    transition_probabilities(m, counts)
}

/// Negative root-sum-square of the five-point discrete Laplacian over the
/// interior cells of the probability matrix. Zero when `m < 3`.
pub fn smoothness(table: &TransitionTable) -> f64 {
    let m = table.m;
    if m < 3 {
        return 0.0;
    }
    let q = |u: usize, v: usize| table.probs[u * m + v];
    let mut acc = 0.0;
    for u in 1..m - 1 {
        for v in 1..m - 1 {
            let lap = q(u + 1, v) + q(u - 1, v) + q(u, v + 1) + q(u, v - 1) - 4.0 * q(u, v);
            acc += lap * lap;
        }
    }
    -acc.sqrt()
}

/// Relabels the states visited by any of the sequences as `0..k`, in
/// increasing order of the original label. Returns the relabelled sequences
/// and `k`.
pub fn compact_states(sequences: &[&[usize]]) -> (Vec<Vec<usize>>, usize) {
    let mut map: BTreeMap<usize, usize> = sequences.iter().flat_map(|s| s.iter().map(|&x| (x, 0))).collect();
    for (i, v) in map.values_mut().enumerate() {
        *v = i;
    }
    let relabelled = sequences
        .iter()
        .map(|s| s.iter().map(|x| map[x]).collect())
        .collect();
    (relabelled, map.len())
}
