//! Trustworthy-recommender selection strategies.
//!
//! Both the two-level entropy selector and the single-level baseline expose
//! the same [`TrustStrategy`] interface: given a training matrix and a
//! similarity threshold, produce a priority-ordered trusted-neighbor list
//! per training user. Strategies are registered by name and selected at
//! runtime (`--strategy` on the CLI).

mod single_level;
mod two_level;

pub use single_level::{sle_threshold, sle_trustworthy, SingleLevelEntropy};
pub use two_level::{
    select_trustworthy, select_valuable, trust_records_for_all, trust_records_tsv, TwoLevelEntropy,
};

use crate::error::{Error, Result};
use crate::matrix::PageViewMatrix;

/// One row of the trustworthy-recommender table: the target user, a
/// recommender that passed both the beta gate and the level-II entropy
/// filter, and the three entropy values. `actual_entropy` is
/// `(entropy_l1 - entropy_l2) / 2` and is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRecord {
    pub target: usize,
    pub recommender: usize,
    pub entropy_l1: f64,
    pub entropy_l2: f64,
    pub actual_entropy: f64,
}

/// Strategy-agnostic trusted neighbor: the recommender's row index plus the
/// entropy the strategy assigned to it (actual entropy for the two-level
/// selector, full-matrix entropy for the single-level baseline). Lower
/// entropy means higher priority; the DOI formula consumes it as E_c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustedNeighbor {
    pub recommender: usize,
    pub entropy: f64,
}

impl From<&TrustRecord> for TrustedNeighbor {
    fn from(r: &TrustRecord) -> Self {
        TrustedNeighbor { recommender: r.recommender, entropy: r.actual_entropy }
    }
}

/// A trust-selection algorithm. Implementations must be deterministic:
/// identical matrix and beta produce identical neighbor lists.
pub trait TrustStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Priority-ordered trusted neighbors for one target row.
    fn neighbors(&self, train: &PageViewMatrix, target: usize, beta: f64)
        -> Result<Vec<TrustedNeighbor>>;

    /// Neighbor lists for every training user. The default iterates
    /// [`TrustStrategy::neighbors`]; implementations override it when a
    /// whole-matrix pass is cheaper.
    fn neighbors_for_all(&self, train: &PageViewMatrix, beta: f64)
        -> Result<Vec<Vec<TrustedNeighbor>>> {
        (0..train.n_users()).map(|t| self.neighbors(train, t, beta)).collect()
    }
}

pub struct StrategyEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn() -> Box<dyn TrustStrategy>,
}

/// All registered strategies. `two-level` is the default everywhere.
pub const STRATEGIES: &[StrategyEntry] = &[
    StrategyEntry {
        name: "two-level",
        summary: "beta gate at level I, keep recommenders whose level-II entropy drops",
        build: || Box::new(TwoLevelEntropy),
    },
    StrategyEntry {
        name: "single-level",
        summary: "baseline: one entropy over the unsplit matrix, half-spread threshold",
        build: || Box::new(SingleLevelEntropy),
    },
];

pub fn strategy(name: &str) -> Result<Box<dyn TrustStrategy>> {
    STRATEGIES
        .iter()
        .find(|e| e.name == name)
        .map(|e| (e.build)())
        .ok_or_else(|| Error::UnknownStrategy(name.to_string(), strategy_names().join(", ")))
}

pub fn strategy_names() -> Vec<&'static str> {
    STRATEGIES.iter().map(|e| e.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_both_strategies() {
        for entry in STRATEGIES {
            let s = strategy(entry.name).unwrap();
            assert_eq!(s.name(), entry.name);
        }
        assert!(matches!(strategy("nope"), Err(Error::UnknownStrategy(_, _))));
    }
}
