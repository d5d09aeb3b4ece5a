//! Difference scores, the agreement gate and the level-entropy measure that
//! ranks recommenders.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use crate::error::{Error, Result};

/// Similarity threshold in (0, 1]. The gate compares agreement counts
/// against `beta * length` on exact rationals: beta is taken as the decimal
/// it prints as (0.4 means exactly 4/10), so boundary cases like 2
/// agreements out of 5 at beta = 0.4 are inclusive regardless of
/// floating-point rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    pub beta: f64,
}

impl SimilarityConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be in (0,1], got {beta}"
            )));
        }
        Ok(SimilarityConfig { beta })
    }
}

/// Elementwise absolute difference of two binary page-view rows. An entry is
/// 0 exactly when both users either viewed or skipped the page.
pub fn difference_score(row_t: &[u8], row_x: &[u8]) -> Result<Vec<u8>> {
    if row_t.len() != row_x.len() {
        return Err(Error::DimensionMismatch(format!(
            "difference score over rows of length {} and {}",
            row_t.len(),
            row_x.len()
        )));
    }
    if row_t.is_empty() {
        return Err(Error::DimensionMismatch("difference score over empty rows".into()));
    }
    Ok(row_t.iter().zip(row_x).map(|(&a, &b)| a.abs_diff(b)).collect())
}

/// Number of zero entries (pages the two users agree on).
pub fn zero_count(d: &[u8]) -> usize {
    d.iter().filter(|&&e| e == 0).count()
}

/// `count >= beta * total`, evaluated on exact rationals. The threshold is
/// the decimal `beta` round-trips to (its shortest `Display` form), not its
/// dyadic bit pattern — 0.4f64 is slightly above 4/10, and using the bit
/// pattern would silently turn the inclusive boundary exclusive.
pub fn meets_fraction(count: usize, total: usize, beta: f64) -> bool {
    let beta = match decimal_rational(beta) {
        Some(b) => b,
        None => return false,
    };
    let lhs = BigRational::from_integer(BigInt::from(count));
    let rhs = beta * BigRational::from_integer(BigInt::from(total));
    lhs >= rhs
}

/// Exact rational value of the shortest decimal representation of `x`.
/// `None` for non-finite values.
fn decimal_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{x}");
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text.as_str(), ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let numerator = BigInt::from_str(&digits).ok()?;
    let denominator = BigInt::from(10).pow(frac_part.len() as u32);
    Some(BigRational::new(numerator, denominator))
}

/// The beta gate: a user is a valuable recommender when the number of
/// agreeing pages reaches `beta * length` of the difference vector.
pub fn is_valuable(d: &[u8], beta: f64) -> bool {
    meets_fraction(zero_count(d), d.len(), beta)
}

/// Entropy of a difference vector in bits: `k * log2(n) / n` where `k` is
/// the number of disagreeing pages and `n` the vector length. Each
/// disagreement is treated as a distinct outcome of probability `1/n`;
/// agreements contribute nothing. Zero when the users agree everywhere
/// (and trivially when n = 1). Lower entropy means higher similarity.
pub fn level_entropy(d: &[u8]) -> f64 {
    let n = d.len();
    if n == 0 {
        return 0.0;
    }
    let k = n - zero_count(d);
    k as f64 * (n as f64).log2() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 5e-5;

    #[test]
    fn difference_score_of_table1_rows() {
        // Sample rows U1 and U2 over the page columns P1, P2, P41, P42, P43.
        let u1 = [1, 0, 0, 1, 1];
        let u2 = [1, 1, 1, 0, 1];
        assert_eq!(difference_score(&u1, &u2).unwrap(), vec![0, 1, 1, 1, 0]);
    }

    #[test]
    fn difference_score_identical_and_complementary() {
        let a = [1, 0, 1, 0];
        assert_eq!(difference_score(&a, &a).unwrap(), vec![0, 0, 0, 0]);
        let b = [0, 1, 0, 1];
        assert_eq!(difference_score(&a, &b).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn difference_score_rejects_mismatched_lengths() {
        assert!(difference_score(&[1, 0], &[1]).is_err());
        assert!(difference_score(&[], &[]).is_err());
    }

    #[test]
    fn zero_count_examples() {
        assert_eq!(zero_count(&[0, 1, 1, 1, 0]), 2);
        assert_eq!(zero_count(&[0; 7]), 7);
        assert_eq!(zero_count(&[1; 7]), 0);
    }

    #[test]
    fn beta_gate_boundary_is_inclusive() {
        let d = [0, 1, 1, 1, 0];
        assert!(!is_valuable(&d, 0.8)); // 2 < 4
        assert!(is_valuable(&d, 0.4)); // 2 >= 0.4 * 5 = 2 exactly
        assert!(is_valuable(&[0; 3], 1.0));
        assert!(is_valuable(&[0; 3], 0.1));
    }

    #[test]
    fn beta_gate_has_no_float_round_off() {
        // 0.7 * 10 evaluates to 7.000000000000001 in f64; the exact gate
        // must still accept 7 agreements out of 10.
        let d = [0, 0, 0, 0, 0, 0, 0, 1, 1, 1];
        assert_eq!(zero_count(&d), 7);
        assert!(is_valuable(&d, 0.7));
        assert!(!is_valuable(&d, 0.71));
    }

    #[test]
    fn level_entropy_fixture_values() {
        // Level-I entries are multiples of log2(22)/22, level-II entries of
        // log2(21)/21.
        let mut d = vec![0u8; 22];
        d[..4].fill(1);
        assert!((level_entropy(&d) - 0.8108).abs() < TOL);
        let mut d = vec![0u8; 21];
        d[..2].fill(1);
        assert!((level_entropy(&d) - 0.4183).abs() < TOL);
    }

    #[test]
    fn level_entropy_hand_computed() {
        // n = 5, k = 2: 2 * log2(5) / 5
        let d = [1, 1, 0, 0, 0];
        assert!((level_entropy(&d) - 0.9288).abs() < TOL);
        assert_eq!(level_entropy(&[0; 8]), 0.0);
        assert_eq!(level_entropy(&[1]), 0.0); // n = 1: log2(1) = 0
    }

    #[test]
    fn level_entropy_bounds_and_monotonicity() {
        for n in 2usize..40 {
            let mut prev = -1.0;
            for k in 0..=n {
                let mut d = vec![0u8; n];
                d[..k].fill(1);
                let h = level_entropy(&d);
                assert!(h >= 0.0 && h <= (n as f64).log2() + 1e-12);
                assert!(h > prev, "entropy must strictly increase with k");
                if k == 0 {
                    assert_eq!(h, 0.0);
                }
                if k == n {
                    assert!((h - (n as f64).log2()).abs() < 1e-12);
                }
                prev = h;
            }
        }
    }
}
