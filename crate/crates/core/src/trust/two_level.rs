//! Two-level entropy selection: valuable recommenders at level I, trustworthy
//! recommenders at level II.

use crate::entropy::{difference_score, is_valuable, level_entropy};
use crate::error::{Error, Result};
use crate::matrix::PageViewMatrix;

use super::{TrustRecord, TrustStrategy, TrustedNeighbor};

/// Valuable recommenders for `target` over the level-I matrix: every other
/// user whose agreement count passes the beta gate, paired with its level-I
/// entropy. Sorted ascending by entropy (most similar first), ties by row
/// index.
pub fn select_valuable(
    level1: &PageViewMatrix,
    target: usize,
    beta: f64,
) -> Result<Vec<(usize, f64)>> {
    if target >= level1.n_users() {
        return Err(Error::UnknownUser(format!("row {target} of {}", level1.n_users())));
    }
    let target_row = level1.row(target);
    let mut out = Vec::new();
    for x in 0..level1.n_users() {
        if x == target {
            continue;
        }
        let d = difference_score(target_row, level1.row(x))?;
        if is_valuable(&d, beta) {
            out.push((x, level_entropy(&d)));
        }
    }
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Level-II filter: recompute entropy for each valuable recommender over the
/// level-II matrix and keep only those whose entropy strictly dropped —
/// their interest stayed aligned with the target. Actual entropy is half
/// the drop; the list is sorted ascending by it (highest priority first),
/// ties by row index.
pub fn select_trustworthy(
    valuable: &[(usize, f64)],
    level2: &PageViewMatrix,
    target: usize,
) -> Result<Vec<TrustRecord>> {
    if target >= level2.n_users() {
        return Err(Error::UnknownUser(format!("row {target} of {}", level2.n_users())));
    }
    let target_row = level2.row(target);
    let mut out = Vec::new();
    for &(x, entropy_l1) in valuable {
        let d = difference_score(target_row, level2.row(x))?;
        let entropy_l2 = level_entropy(&d);
        if entropy_l2 < entropy_l1 {
            out.push(TrustRecord {
                target,
                recommender: x,
                entropy_l1,
                entropy_l2,
                actual_entropy: (entropy_l1 - entropy_l2) / 2.0,
            });
        }
    }
    out.sort_by(|a, b| {
        a.actual_entropy
            .partial_cmp(&b.actual_entropy)
            .unwrap()
            .then(a.recommender.cmp(&b.recommender))
    });
    Ok(out)
}

/// Run both levels for every training user. Splits the matrix internally.
pub fn trust_records_for_all(train: &PageViewMatrix, beta: f64) -> Result<Vec<Vec<TrustRecord>>> {
    let (level1, level2) = train.split_levels()?;
    (0..train.n_users())
        .map(|t| {
            let valuable = select_valuable(&level1, t, beta)?;
            select_trustworthy(&valuable, &level2, t)
        })
        .collect()
}

/// TSV export of trust records, one row per (target, recommender) pair:
/// `target<TAB>recommender<TAB>E_I<TAB>E_II<TAB>E_A`, entropies printed to
/// four decimals, rows sorted by target then priority.
pub fn trust_records_tsv(matrix: &PageViewMatrix, lists: &[Vec<TrustRecord>]) -> String {
    let mut out = String::from("target\trecommender\tlevel1_entropy\tlevel2_entropy\tactual_entropy\n");
    for records in lists {
        for r in records {
            out.push_str(&format!(
                "{}\t{}\t{:.4}\t{:.4}\t{:.4}\n",
                matrix.users()[r.target],
                matrix.users()[r.recommender],
                r.entropy_l1,
                r.entropy_l2,
                r.actual_entropy
            ));
        }
    }
    out
}

/// The proposed selector: beta gate and entropy at level I, strict entropy
/// drop at level II, priority by actual entropy.
pub struct TwoLevelEntropy;

impl TrustStrategy for TwoLevelEntropy {
    fn name(&self) -> &'static str {
        "two-level"
    }

    fn neighbors(
        &self,
        train: &PageViewMatrix,
        target: usize,
        beta: f64,
    ) -> Result<Vec<TrustedNeighbor>> {
        let (level1, level2) = train.split_levels()?;
        let valuable = select_valuable(&level1, target, beta)?;
        let records = select_trustworthy(&valuable, &level2, target)?;
        Ok(records.iter().map(TrustedNeighbor::from).collect())
    }
}
