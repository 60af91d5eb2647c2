use crate::error::{RenalError, Result};
use crate::gof::{fixed_grid_test, BinGrid, Embeddings, TestReport};

/// `m` equal-width bins per dimension over the pooled range. Zero-range
/// dimensions collapse to one bin and are listed in `BinGrid::collapsed`.
pub fn ewd_bins(pooled: &[&Embeddings], m: usize) -> Result<BinGrid> {
    if m < 2 {
        return Err(RenalError::Config(format!("EWD needs at least 2 bins per dimension, got {m}")));
    }
    let dim = pooled.first().map(|e| e.dim()).unwrap_or(0);
    let grid = BinGrid::from_pooled(pooled, &vec![m; dim])?;
    if !grid.collapsed().is_empty() {
        log::warn!("EWD grid: dimensions {:?} have zero range and use one bin", grid.collapsed());
    }
    Ok(grid)
}

/// Per-dimension counts `ceil(range / (3.5 σ n^(-1/3)))` with the population
/// standard deviation; a dimension with σ = 0 gets one bin.
pub fn scott_bins(pooled: &[&Embeddings]) -> Result<BinGrid> {
    let (lower, upper) = BinGrid::pooled_bounds(pooled)?;
    let dim = lower.len();
    let n: usize = pooled.iter().map(|e| e.len()).sum();
    if n < 2 {
        return Err(RenalError::InsufficientData("Scott's rule needs at least 2 points".into()));
    }
    let nf = n as f64;
    let mut bins = Vec::with_capacity(dim);
    for j in 0..dim {
        let rows = || pooled.iter().flat_map(|e| e.rows()).map(|r| r[j]);
        let mean = rows().sum::<f64>() / nf;
        let sd = (rows().map(|v| (v - mean).powi(2)).sum::<f64>() / nf).sqrt();
        let range = upper[j] - lower[j];
        let m = if sd > 0.0 && range > 0.0 {
            (range / (3.5 * sd * nf.powf(-1.0 / 3.0))).ceil().max(1.0) as usize
        } else {
            1
        };
        bins.push(m);
    }
    BinGrid::from_pooled(pooled, &bins)
}

pub fn ewd_test(emb0: &Embeddings, emb1: &Embeddings, m: usize, alpha: f64) -> Result<TestReport> {
    fixed_grid_test(emb0, emb1, ewd_bins(&[emb0, emb1], m)?, alpha)
}

pub fn scott_test(emb0: &Embeddings, emb1: &Embeddings, alpha: f64) -> Result<TestReport> {
    fixed_grid_test(emb0, emb1, scott_bins(&[emb0, emb1])?, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(v: &[f64]) -> Embeddings {
        Embeddings::new(1, v.to_vec()).unwrap()
    }

    #[test]
    fn ewd_two_bins_on_unit_range() {
        let e = line(&[0.0, 0.3, 1.0, 0.7]);
        let g = ewd_bins(&[&e], 2).unwrap();
        assert_eq!(g.edges(0), vec![0.0, 0.5, 1.0]);
        let e2 = Embeddings::new(2, vec![0.0, 0.0, 1.0, 2.0, 0.5, 1.0]).unwrap();
        assert_eq!(ewd_bins(&[&e2], 4).unwrap().state_count(), 16);
        assert!(matches!(ewd_bins(&[&e], 1), Err(RenalError::Config(_))));
    }

    #[test]
    fn ewd_collapses_flat_dimension() {
        let e = Embeddings::new(2, vec![0.0, 5.0, 1.0, 5.0, 0.5, 5.0]).unwrap();
        let g = ewd_bins(&[&e], 3).unwrap();
        assert_eq!(g.bins(), &[3, 1]);
        assert_eq!(g.collapsed(), &[1]);
    }

    #[test]
    fn scott_formula() {
        // n = 1000 with σ = 1: m = ceil(range / 0.35). Range 6.9 gives
        // 19.71 -> 20, away from the integer boundary that 7.0 would sit on.
        let e = 3.45f64;
        let b = ((1000.0 - 2.0 * e * e) / 998.0).sqrt();
        let mut v = vec![e, -e];
        v.extend((0..998).map(|i| if i % 2 == 0 { b } else { -b }));
        let mean = v.iter().sum::<f64>() / 1000.0;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 1000.0).sqrt();
        assert!(mean.abs() < 1e-12 && (sd - 1.0).abs() < 1e-12);
        assert_eq!(scott_bins(&[&line(&v)]).unwrap().bins(), &[20]);
    }

    #[test]
    fn scott_degenerate_and_invariant() {
        let flat = line(&[2.0; 10]);
        assert_eq!(scott_bins(&[&flat]).unwrap().bins(), &[1]);

        let v: Vec<f64> = (0..300).map(|i| ((i * 37) % 101) as f64 * 0.13 - 2.0).collect();
        let base = scott_bins(&[&line(&v)]).unwrap().bins().to_vec();
        let doubled: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        let shifted: Vec<f64> = v.iter().map(|x| x + 0.5).collect();
        assert_eq!(scott_bins(&[&line(&doubled)]).unwrap().bins(), &base[..]);
        assert_eq!(scott_bins(&[&line(&shifted)]).unwrap().bins(), &base[..]);
    }
}
