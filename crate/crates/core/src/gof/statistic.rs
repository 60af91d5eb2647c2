use super::TransitionTable;
use crate::error::{RenalError, Result};

/// Chi-square transition discrepancy between two tables over the same states.
///
/// Returns the statistic and the number of states with a positive pooled row
/// total. Cells that neither table ever visits contribute nothing.
pub fn chi_square_statistic(t0: &TransitionTable, t1: &TransitionTable) -> Result<(f64, usize)> {
    let m = t0.m();
    if m != t1.m() {
        return Err(RenalError::invalid(format!(
            "tables have {} and {} states",
            m,
            t1.m()
        )));
    }
    let mut w = 0.0;
    let mut occupied = 0;
    for u in 0..m {
        let (r0, r1) = (t0.row_total(u), t1.row_total(u));
        if r0 + r1 > 0 {
            occupied += 1;
        }
        if r0 == 0 || r1 == 0 {
            continue;
        }
        let weight = r0 as f64 * r1 as f64;
        for v in 0..m {
            let pooled = t0.count(u, v) + t1.count(u, v);
            if pooled == 0 {
                continue;
            }
            let d = t0.prob(u, v) - t1.prob(u, v);
            w += weight / pooled as f64 * d * d;
        }
    }
    Ok((w, occupied))
}

/// `k (k - 1)` for `k` occupied states, floored at one.
pub fn degrees_of_freedom(occupied_states: usize) -> u64 {
    let k = occupied_states as u64;
    (k * k.saturating_sub(1)).max(1)
}
