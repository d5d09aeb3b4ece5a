//! User-based collaborative web recommender built on entropy similarity.
//!
//! The pipeline runs in three stages, mirroring the offline unit of the
//! system this crate implements:
//!
//! 1. [`logparse`] / [`session`] turn raw web-access logs into user sessions.
//! 2. [`matrix`] builds a binary page-view matrix, prunes it and splits it
//!    into train/test halves and level-I/level-II page blocks.
//! 3. [`trust`] selects trustworthy recommenders per user (two-level entropy
//!    or the single-level baseline, both behind [`trust::TrustStrategy`]),
//!    and [`kb`] turns them into a degree-of-importance-ranked knowledge
//!    base that answers online click-stream queries.
//!
//! [`eval`] scores the recommender with MAE / precision / recall over a
//! held-out test split, and [`synth`] generates seeded synthetic corpora
//! (including interest-drift corpora) for benchmarks.

pub mod entropy;
pub mod error;
pub mod eval;
pub mod kb;
pub mod logparse;
pub mod matrix;
pub mod session;
pub mod synth;
pub mod trust;

pub use entropy::{difference_score, is_valuable, level_entropy, zero_count, SimilarityConfig};
pub use error::{Error, Result};
pub use kb::{KnowledgeBase, Recommendation};
pub use matrix::{MatrixSplit, PageViewMatrix};
pub use session::Session;
pub use trust::{TrustRecord, TrustStrategy, TrustedNeighbor};
