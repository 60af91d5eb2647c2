use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RenalError, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sequence::ObservationSequence;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmdConfig {
    pub n_subsequences: usize,
    pub n_permutations: usize,
}

impl Default for MmdConfig {
    fn default() -> Self {
        Self {
            n_subsequences: 50,
            n_permutations: 200,
        }
    }
}

impl MmdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subsequences < 2 {
            return Err(RenalError::Config(format!(
                "n_subsequences must be at least 2, got {}",
                self.n_subsequences
            )));
        }
        if self.n_permutations < 100 {
            return Err(RenalError::Config(format!(
                "n_permutations must be at least 100, got {}",
                self.n_permutations
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmdReport {
    /// Unbiased squared MMD.
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub bandwidth: f64,
    pub window_len: usize,
}

/// `count` contiguous windows of `len` feature rows each, flattened.
pub fn split_windows(seq: &ObservationSequence, count: usize, len: usize) -> Vec<Vec<f64>> {
    let f = seq.features();
    (0..count)
        .map(|k| f.data[k * len * f.width..(k + 1) * len * f.width].to_vec())
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pairwise squared distances over the pooled windows and their median.
fn pooled_distances(x: &[Vec<f64>], y: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let pooled: Vec<&Vec<f64>> = x.iter().chain(y).collect();
    let n = pooled.len();
    let mut d = vec![0.0; n * n];
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let v = sq_dist(pooled[i], pooled[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
            upper.push(v);
        }
    }
    upper.sort_by(f64::total_cmp);
    let k = upper.len();
    let median = if k % 2 == 1 { upper[k / 2] } else { 0.5 * (upper[k / 2 - 1] + upper[k / 2]) };
    (d, median)
}

/// Unbiased squared MMD for the index split `a | b` of a pooled kernel matrix.
/// Cross terms are summed in sorted order so swapping the samples gives a
/// bitwise-identical value.
fn split_statistic(k: &[f64], n: usize, a: &[usize], b: &[usize]) -> f64 {
    let within = |idx: &[usize]| {
        let mut s = 0.0;
        for &i in idx {
            for &j in idx {
                if i != j {
                    s += k[i * n + j];
                }
            }
        }
        s / (idx.len() * (idx.len() - 1)) as f64
    };
    let mut cross: Vec<f64> = a.iter().flat_map(|&i| b.iter().map(move |&j| k[i * n + j])).collect();
    cross.sort_by(f64::total_cmp);
    let c: f64 = cross.iter().sum();
    within(a) + within(b) - 2.0 * c / (a.len() * b.len()) as f64
}

fn kernel_matrix(d: &[f64], bandwidth: f64) -> Vec<f64> {
    d.iter().map(|v| (-v / bandwidth).exp()).collect()
}

fn effective_bandwidth(median: f64) -> f64 {
    if median > 0.0 && median.is_finite() {
        median
    } else {
        1.0
    }
}

/// Unbiased squared MMD between two sets of equal-length vectors with the
/// kernel `exp(-‖u − v‖² / h)`, `h` the median pooled pairwise squared
/// distance. Returns the statistic and `h`.
pub fn mmd_statistic(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<(f64, f64)> {
    if x.len() < 2 || y.len() < 2 {
        return Err(RenalError::InsufficientData("MMD needs at least 2 vectors per sample".into()));
    }
    let w = x[0].len();
    if x.iter().chain(y).any(|v| v.len() != w) {
        return Err(RenalError::invalid("MMD vectors differ in length"));
    }
    let (d, median) = pooled_distances(x, y);
    let h = effective_bandwidth(median);
    let k = kernel_matrix(&d, h);
    let n = x.len() + y.len();
    let a: Vec<usize> = (0..x.len()).collect();
    let b: Vec<usize> = (x.len()..n).collect();
    Ok((split_statistic(&k, n, &a, &b), h))
}

/// Kernel two-sample test on contiguous raw-feature windows with a
/// label-permutation p-value `(1 + #{T_b ≥ T}) / (1 + B)`.
///
/// Both sequences are cut into `n_subsequences` windows of the common length
/// `min(⌊n0/k⌋, ⌊n1/k⌋)`; trailing rows are dropped.
pub fn mmd_test(
    d0: &ObservationSequence,
    d1: &ObservationSequence,
    cfg: &MmdConfig,
    alpha: f64,
    seed: u64,
) -> Result<MmdReport> {
    cfg.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RenalError::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if d0.feature_dim() != d1.feature_dim() {
        return Err(RenalError::invalid("sequences have different feature dimensions"));
    }
    let k = cfg.n_subsequences;
    let len = (d0.len() / k).min(d1.len() / k);
    if len == 0 {
        return Err(RenalError::InsufficientData(format!(
            "sequences of length {} and {} cannot fill {k} windows",
            d0.len(),
            d1.len()
        )));
    }
    let x = split_windows(d0, k, len);
    let y = split_windows(d1, k, len);
    let (d, median) = pooled_distances(&x, &y);
    let h = effective_bandwidth(median);
    let km = kernel_matrix(&d, h);
    let n = 2 * k;
    let a: Vec<usize> = (0..k).collect();
    let b: Vec<usize> = (k..n).collect();
    let observed = split_statistic(&km, n, &a, &b);

    let exceed = (0..cfg.n_permutations as u64)
        .into_par_iter()
        .filter(|&p| {
            let mut rng = rng_from_seed(derive_seed(seed, &[p]));
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            split_statistic(&km, n, &idx[..k], &idx[k..]) >= observed
        })
        .count();
    let p_value = (1 + exceed) as f64 / (1 + cfg.n_permutations) as f64;
    Ok(MmdReport {
        statistic: observed,
        p_value,
        alpha,
        reject: p_value <= alpha,
        bandwidth: h,
        window_len: len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, shift: f64, seed: u64) -> ObservationSequence {
        let mut rng = rng_from_seed(seed);
        let v = (0..n).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); shift + z }).collect::<Vec<f64>>();
        ObservationSequence::regular(v, 1, 1.0).unwrap()
    }

    #[test]
    fn statistic_is_symmetric() {
        let (a, b) = (gaussian(500, 0.0, 1), gaussian(520, 0.4, 2));
        let r01 = mmd_test(&a, &b, &MmdConfig::default(), 0.05, 3).unwrap();
        let r10 = mmd_test(&b, &a, &MmdConfig::default(), 0.05, 3).unwrap();
        assert_eq!(r01.statistic.to_bits(), r10.statistic.to_bits());
        assert_eq!(r01.bandwidth, r10.bandwidth);
        assert_eq!(r01.window_len, 10);
    }

    #[test]
    fn separated_means_reject() {
        let r = mmd_test(&gaussian(500, 0.0, 5), &gaussian(500, 3.0, 6), &MmdConfig::default(), 0.05, 1).unwrap();
        assert!(r.reject && r.p_value < 0.01);
    }

    #[test]
    fn too_short_and_bad_config() {
        let short = gaussian(40, 0.0, 0);
        assert!(matches!(
            mmd_test(&short, &short, &MmdConfig::default(), 0.05, 0),
            Err(RenalError::InsufficientData(_))
        ));
        let bad = MmdConfig { n_permutations: 10, ..Default::default() };
        assert!(matches!(mmd_test(&short, &short, &bad, 0.05, 0), Err(RenalError::Config(_))));
    }

    #[test]
    fn seeded_p_value_is_thread_independent() {
        let (a, b) = (gaussian(500, 0.0, 7), gaussian(500, 0.1, 8));
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = one.install(|| mmd_test(&a, &b, &MmdConfig::default(), 0.05, 9).unwrap());
        let r4 = four.install(|| mmd_test(&a, &b, &MmdConfig::default(), 0.05, 9).unwrap());
        assert_eq!(r1, r4);
    }
}
