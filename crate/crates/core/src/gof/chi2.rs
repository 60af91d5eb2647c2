//! Chi-square distribution: CDF, survival function and quantile.
//!
//! The CDF is the regularized lower incomplete gamma function
//! `P(dof/2, x/2)`, evaluated by its power series below `a + 1` and by a
//! Lentz continued fraction for the upper tail above it.

use crate::error::{RenalError, Result};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Series for `P(a, x)`, valid for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

/// Continued fraction for `Q(a, x)`, valid for `x >= a + 1`.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

fn check_args(x: f64, dof: u64) -> Result<()> {
    if !x.is_finite() {
        return Err(RenalError::invalid(format!("chi-square argument must be finite, got {x}")));
    }
    if dof == 0 {
        return Err(RenalError::invalid("chi-square needs at least one degree of freedom"));
    }
    Ok(())
}

/// `P(χ²_dof ≤ x)`.
pub fn chi_square_cdf(x: f64, dof: u64) -> Result<f64> {
    check_args(x, dof)?;
    Ok(gamma_p(dof as f64 / 2.0, x / 2.0))
}

/// `P(χ²_dof > x)`, computed directly so that small tail probabilities keep
/// their relative precision.
pub fn chi_square_sf(x: f64, dof: u64) -> Result<f64> {
    check_args(x, dof)?;
    Ok(gamma_q(dof as f64 / 2.0, x / 2.0))
}

/// Density of `χ²_dof` at `x`.
pub fn chi_square_pdf(x: f64, dof: u64) -> f64 {
    if x <= 0.0 {
        return if dof == 2 && x == 0.0 { 0.5 } else { 0.0 };
    }
    let k = dof as f64 / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Standard normal quantile (Acklam's rational approximation, ~1e-9
/// relative error). Only used to seed root finding.
pub(crate) fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// `x` such that `P(χ²_dof ≤ x) = prob`.
///
/// Seeded by the Wilson–Hilferty cube-root approximation, then refined by
/// Newton steps that fall back to bisection whenever they leave the bracket.
pub fn chi_square_quantile(prob: f64, dof: u64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(RenalError::invalid(format!("probability must lie in (0, 1), got {prob}")));
    }
    if dof == 0 {
        return Err(RenalError::invalid("chi-square needs at least one degree of freedom"));
    }
    let k = dof as f64;
    let z = normal_quantile(prob);
    let c = 2.0 / (9.0 * k);
    let wh = k * (1.0 - c + z * c.sqrt()).powi(3);
    let mut x = if wh > 0.0 { wh } else { k * prob.powf(2.0 / k).max(1e-300) };

    // Bracket the root.
    let f = |x: f64| gamma_p(k / 2.0, x / 2.0) - prob;
    let mut lo = 0.0;
    let mut hi = x.max(1.0);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }

    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let pdf = chi_square_pdf(x, dof);
        let newton = if pdf > 0.0 { x - fx / pdf } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Γ(k/2) for integer k by the half-integer recursion.
    fn gamma_half(k: u64) -> f64 {
        let mut g = if k % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
        let mut a = if k % 2 == 0 { 1.0 } else { 0.5 };
        while a < k as f64 / 2.0 {
            g *= a;
            a += 1.0;
        }
        g
    }

    fn density_oracle(x: f64, k: u64) -> f64 {
        let h = k as f64 / 2.0;
        x.powf(h - 1.0) * (-x / 2.0).exp() / (2f64.powf(h) * gamma_half(k))
    }

    /// ∫_0^x density via the substitution x = u², composite Simpson.
    fn cdf_oracle(x: f64, k: u64) -> f64 {
        let n = 20_000;
        let b = x.sqrt();
        let h = b / n as f64;
        let g = |u: f64| {
            if u == 0.0 {
                if k == 1 { 2.0 * density_oracle(1.0, 1) * (0.5f64).exp() } else { 0.0 }
            } else {
                density_oracle(u * u, k) * 2.0 * u
            }
        };
        let mut s = g(0.0) + g(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut f = 1.0f64;
        for n in 1..20u32 {
            assert!((ln_gamma(n as f64 + 1.0) - f.ln()).abs() < 1e-12, "n = {n}");
            f *= (n + 1) as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn cdf_at_zero_is_zero() {
        for dof in [1, 2, 6, 90] {
            assert_eq!(chi_square_cdf(0.0, dof).unwrap(), 0.0);
        }
    }

    #[test]
    fn dof_two_closed_form() {
        for x in [0.01, 0.5, 2.0, 5.991, 10.0, 40.0] {
            let want = 1.0 - (-x / 2.0f64).exp();
            assert!((chi_square_cdf(x, 2).unwrap() - want).abs() < 1e-13, "x = {x}");
        }
        assert!((chi_square_cdf(5.991, 2).unwrap() - 0.95).abs() < 1e-4);
    }

    #[test]
    fn cdf_matches_quadrature() {
        for dof in [1, 2, 3, 6, 17, 90] {
            for x in [0.3, 1.0, 4.0, 9.5, 60.0, 110.0] {
                let got = chi_square_cdf(x, dof).unwrap();
                let want = cdf_oracle(x, dof);
                assert!((got - want).abs() < 1e-8, "dof {dof} x {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn survival_complements_cdf() {
        for dof in [1, 6, 90] {
            for x in [0.5, 5.0, 90.0, 200.0] {
                let s = chi_square_cdf(x, dof).unwrap() + chi_square_sf(x, dof).unwrap();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn non_finite_argument_is_rejected() {
        assert!(chi_square_cdf(f64::NAN, 3).is_err());
        assert!(chi_square_cdf(f64::INFINITY, 3).is_err());
        assert!(chi_square_quantile(1.0, 3).is_err());
        assert!(chi_square_quantile(0.0, 3).is_err());
    }

    #[test]
    fn quantile_dof_two_closed_form() {
        let q = chi_square_quantile(0.95, 2).unwrap();
        assert!((q - (-2.0 * 0.05f64.ln())).abs() < 1e-9);
        assert!((q - 5.991).abs() < 1e-3);
    }

    #[test]
    fn quantile_round_trip() {
        for dof in [1, 2, 6, 90] {
            for x in [0.5, 2.0, 10.0] {
                let p = chi_square_cdf(x, dof).unwrap();
                if p <= 0.0 || p >= 1.0 {
                    continue;
                }
                let back = chi_square_quantile(p, dof).unwrap();
                assert!((back - x).abs() < 1e-6, "dof {dof} x {x} -> {back}");
            }
        }
    }

    #[test]
    fn quantile_dof_90_matches_quadrature() {
        let got = chi_square_quantile(0.95, 90).unwrap();
        // Bisection on the quadrature CDF.
        let (mut lo, mut hi) = (60.0, 160.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if cdf_oracle(mid, 90) < 0.95 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((got - 0.5 * (lo + hi)).abs() < 1e-4, "{got} vs {lo}");
    }

    #[test]
    fn quantile_residual_is_tiny() {
        for dof in [1, 3, 6, 20, 90, 500] {
            for p in [1e-6, 0.01, 0.05, 0.5, 0.95, 0.99, 1.0 - 1e-9] {
                let x = chi_square_quantile(p, dof).unwrap();
                assert!((chi_square_cdf(x, dof).unwrap() - p).abs() < 1e-8, "dof {dof} p {p}");
            }
        }
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(a in 0.0f64..300.0, b in 0.0f64..300.0, dof in 1u64..200) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(chi_square_cdf(lo, dof).unwrap() <= chi_square_cdf(hi, dof).unwrap());
        }
    }
}
