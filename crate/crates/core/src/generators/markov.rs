use rand::Rng as _;

use crate::error::{RenalError, Result};
use crate::rng::rng_from_seed;

/// `n` states of a chain with row-stochastic `m × m` matrix `p` (row-major),
/// starting from `start`.
pub fn simulate_markov_chain(p: &[f64], m: usize, start: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 || p.len() != m * m || start >= m {
        return Err(RenalError::invalid(format!(
            "need an m×m matrix and start < m, got {} entries, m = {m}, start = {start}",
            p.len()
        )));
    }
    for row in p.chunks(m) {
        let s: f64 = row.iter().sum();
        if row.iter().any(|v| !(*v >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return Err(RenalError::invalid("transition matrix rows must be probability vectors"));
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(n);
    let mut s = start;
    for _ in 0..n {
        out.push(s);
        let u: f64 = rng.random();
        let row = &p[s * m..(s + 1) * m];
        let mut acc = 0.0;
        s = m - 1;
        for (j, q) in row.iter().enumerate() {
            acc += q;
            if u < acc {
                s = j;
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_transitions_match() {
        let p = [0.7, 0.2, 0.1, 0.3, 0.4, 0.3, 0.2, 0.2, 0.6];
        let s = simulate_markov_chain(&p, 3, 0, 200_000, 5).unwrap();
        let mut c = [0usize; 9];
        for w in s.windows(2) {
            c[w[0] * 3 + w[1]] += 1;
        }
        for u in 0..3 {
            let tot: usize = c[u * 3..u * 3 + 3].iter().sum();
            for v in 0..3 {
                assert!((c[u * 3 + v] as f64 / tot as f64 - p[u * 3 + v]).abs() < 0.01);
            }
        }
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(simulate_markov_chain(&[0.5, 0.6, 0.5, 0.5], 2, 0, 10, 0).is_err());
        assert!(simulate_markov_chain(&[1.0, 0.0, 0.0, 1.0], 2, 2, 10, 0).is_err());
    }
}
