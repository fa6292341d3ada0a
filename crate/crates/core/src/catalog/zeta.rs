//! Riemann zeta and Hurwitz-type tails Σ_{n≥start} n^{-s} via Euler–Maclaurin.

use crate::error::{Error, Result};

/// B_{2k}/(2k)! for k = 1..=10.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// Number of terms summed directly before the Euler–Maclaurin correction.
const DIRECT_TERMS: u64 = 16;

/// Riemann zeta function for real s > 1, absolute error below 1e-13.
pub fn zeta(s: f64) -> Result<f64> {
    tail_sum(s, 1)
}

/// Σ_{n ≥ start} n^{-s} for s > 1 and start ≥ 1.
pub fn tail_sum(s: f64, start: u64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain { what: "zeta (requires s > 1)", value: s });
    }
    if start == 0 {
        return Err(Error::Domain { what: "zeta tail start", value: 0.0 });
    }
    // Direct part summed smallest-first.
    let cut = start.max(DIRECT_TERMS);
    let mut direct = 0.0;
    for n in (start..cut).rev() {
        direct += (n as f64).powf(-s);
    }
    Ok(direct + euler_maclaurin_tail(s, cut as f64))
}

/// Σ_{n ≥ N} n^{-s} by Euler–Maclaurin about N (N ≥ 16).
fn euler_maclaurin_tail(s: f64, n: f64) -> f64 {
    let n_pow = n.powf(-s);
    let mut total = n * n_pow / (s - 1.0) + 0.5 * n_pow;
    // term_k = B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut rising = s;
    let mut power = n_pow / n;
    let inv_n2 = 1.0 / (n * n);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = coeff * rising * power;
        total += term;
        if term.abs() < 1e-18 * total.abs() {
            break;
        }
        let j = 2.0 * k as f64 + 1.0;
        rising *= (s + j) * (s + j + 1.0);
        power *= inv_n2;
    }
    total
}

/// Integral-comparison upper bound Σ_{n>M} n^{-s} ≤ M^{1−s}/(s−1), M ≥ 1.
pub fn integral_tail_bound(s: f64, m: u64) -> f64 {
    (m as f64).powf(1.0 - s) / (s - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_values() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(6.0).unwrap() - PI.powi(6) / 945.0).abs() < 1e-14);
    }

    #[test]
    fn slowly_convergent_arguments() {
        // mpmath, 30 digits
        assert!((zeta(1.5).unwrap() - 2.612_375_348_685_488).abs() < 1e-13);
        assert!((zeta(1.01).unwrap() - 100.577_943_338_496_78).abs() < 1e-10);
    }

    #[test]
    fn domain_error() {
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
        assert!(zeta(f64::NAN).is_err());
    }

    #[test]
    fn tail_matches_difference() {
        let s = 3.5;
        let head: f64 = (1..=100u64).map(|n| (n as f64).powf(-s)).sum();
        let tail = tail_sum(s, 101).unwrap();
        assert!((head + tail - zeta(s).unwrap()).abs() < 1e-14);
        assert!(tail <= integral_tail_bound(s, 100));
    }

    #[test]
    fn decreasing_and_above_one() {
        let mut prev = f64::INFINITY;
        for i in 0..=80 {
            let s = 2.0 + 0.1 * i as f64;
            let z = zeta(s).unwrap();
            assert!(z > 1.0 && z < prev);
            prev = z;
        }
    }
}
