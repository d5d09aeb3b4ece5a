//! Single-level entropy baseline (SLE): no level split. Valuable users are
//! gated over the full matrix, entropy is computed over the full matrix, and
//! the trust cut is a system-wide threshold at half the spread between the
//! maximum and minimum entropy observed across all valuable pairs.

use crate::entropy::{difference_score, is_valuable, level_entropy};
use crate::error::{Error, Result};
use crate::matrix::PageViewMatrix;

use super::{TrustStrategy, TrustedNeighbor};

/// System threshold: `(max - min) / 2` over the entropies of every valuable
/// pair of every target in the matrix. `None` when no pair passes the gate.
pub fn sle_threshold(full: &PageViewMatrix, beta: f64) -> Result<Option<f64>> {
    let mut min: Option<f64> = None;
    let mut max: Option<f64> = None;
    for t in 0..full.n_users() {
        for x in 0..full.n_users() {
            if x == t {
                continue;
            }
            let d = difference_score(full.row(t), full.row(x))?;
            if !is_valuable(&d, beta) {
                continue;
            }
            let h = level_entropy(&d);
            min = Some(min.map_or(h, |m: f64| m.min(h)));
            max = Some(max.map_or(h, |m: f64| m.max(h)));
        }
    }
    Ok(max.zip(min).map(|(hi, lo)| (hi - lo) / 2.0))
}

/// Trustworthy recommenders for `target` under the baseline: valuable users
/// whose full-matrix entropy falls strictly below the system threshold,
/// sorted ascending by entropy, ties by row index.
///
/// The threshold is recomputed from the whole matrix on every call; batch
/// callers should go through [`SingleLevelEntropy`], which computes it once.
pub fn sle_trustworthy(
    full: &PageViewMatrix,
    target: usize,
    beta: f64,
) -> Result<Vec<(usize, f64)>> {
    let tau = sle_threshold(full, beta)?;
    sle_trustworthy_with_threshold(full, target, beta, tau)
}

fn sle_trustworthy_with_threshold(
    full: &PageViewMatrix,
    target: usize,
    beta: f64,
    tau: Option<f64>,
) -> Result<Vec<(usize, f64)>> {
    if target >= full.n_users() {
        return Err(Error::UnknownUser(format!("row {target} of {}", full.n_users())));
    }
    let tau = match tau {
        Some(t) => t,
        None => return Ok(Vec::new()),
    };
    let mut out = Vec::new();
    for x in 0..full.n_users() {
        if x == target {
            continue;
        }
        let d = difference_score(full.row(target), full.row(x))?;
        if !is_valuable(&d, beta) {
            continue;
        }
        let h = level_entropy(&d);
        if h < tau {
            out.push((x, h));
        }
    }
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(out)
}

pub struct SingleLevelEntropy;

impl TrustStrategy for SingleLevelEntropy {
    fn name(&self) -> &'static str {
        "single-level"
    }

    fn neighbors(
        &self,
        train: &PageViewMatrix,
        target: usize,
        beta: f64,
    ) -> Result<Vec<TrustedNeighbor>> {
        Ok(sle_trustworthy(train, target, beta)?
            .into_iter()
            .map(|(recommender, entropy)| TrustedNeighbor { recommender, entropy })
            .collect())
    }

    fn neighbors_for_all(
        &self,
        train: &PageViewMatrix,
        beta: f64,
    ) -> Result<Vec<Vec<TrustedNeighbor>>> {
        let tau = sle_threshold(train, beta)?;
        (0..train.n_users())
            .map(|t| {
                Ok(sle_trustworthy_with_threshold(train, t, beta, tau)?
                    .into_iter()
                    .map(|(recommender, entropy)| TrustedNeighbor { recommender, entropy })
                    .collect())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[u8]]) -> PageViewMatrix {
        PageViewMatrix::new(
            (0..rows.len()).map(|i| format!("u{i}")).collect(),
            (0..rows[0].len()).map(|p| format!("/p{p}")).collect(),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn all_identical_users_yield_empty_lists() {
        // Every pairwise entropy is 0, so tau = 0 and the strict cut admits
        // nobody.
        let m = matrix(&[&[1, 0, 1, 0], &[1, 0, 1, 0], &[1, 0, 1, 0]]);
        assert_eq!(sle_threshold(&m, 0.5).unwrap(), Some(0.0));
        for t in 0..3 {
            assert!(sle_trustworthy(&m, t, 0.5).unwrap().is_empty());
        }
    }

    #[test]
    fn two_cluster_matrix_keeps_within_cluster_partners() {
        // Two perfect clusters of three users over six pages. Across
        // clusters the rows disagree everywhere, so the beta gate at 0.5
        // rejects those pairs outright. Within clusters user 1 / user 4
        // differ from their peers on one page, producing an entropy spread
        // and a threshold that admits exactly the agreeing pairs.
        let m = matrix(&[
            &[1, 1, 1, 0, 0, 0],
            &[1, 1, 0, 0, 0, 0],
            &[1, 1, 1, 0, 0, 0],
            &[0, 0, 0, 1, 1, 1],
            &[0, 0, 0, 1, 1, 0],
            &[0, 0, 0, 1, 1, 1],
        ]);
        // Valuable pairs have entropies 0 (identical) or log2(6)/6 (one
        // page apart); tau is half the spread.
        let h1 = (6f64).log2() / 6.0;
        assert_eq!(sle_threshold(&m, 0.5).unwrap(), Some(h1 / 2.0));
        assert_eq!(sle_trustworthy(&m, 0, 0.5).unwrap(), vec![(2, 0.0)]);
        assert_eq!(sle_trustworthy(&m, 1, 0.5).unwrap(), vec![]);
        assert_eq!(sle_trustworthy(&m, 3, 0.5).unwrap(), vec![(5, 0.0)]);
        // No cross-cluster pair anywhere.
        for t in 0..6 {
            for (x, _) in sle_trustworthy(&m, t, 0.5).unwrap() {
                assert_eq!(x / 3, t / 3, "cross-cluster pair {t}->{x}");
            }
        }
    }

    #[test]
    fn no_valuable_pairs_means_no_threshold() {
        let m = matrix(&[&[1, 1, 1, 1], &[0, 0, 0, 0]]);
        assert_eq!(sle_threshold(&m, 0.9).unwrap(), None);
        assert!(sle_trustworthy(&m, 0, 0.9).unwrap().is_empty());
    }
}
