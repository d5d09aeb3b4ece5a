//! Seeded synthetic page-view corpora with group structure and optional
//! interest drift between the level-I and level-II page blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::PageViewMatrix;

/// Generator parameters. Users belong to one of `groups` interest groups
/// and view their group's pages with probability `p_in`, everything else
/// with `p_out`. A `drift_fraction` of users switch to the next group for
/// the level-II column block, modelling interest drift within a session.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub groups: usize,
    pub users_per_group: usize,
    pub pages_per_group: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub drift_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// Paper-scale defaults: 122 users over 44 pages in two interest groups.
    fn default() -> Self {
        SynthConfig {
            groups: 2,
            users_per_group: 61,
            pages_per_group: 22,
            p_in: 0.95,
            p_out: 0.0,
            drift_fraction: 0.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.users_per_group == 0 || self.pages_per_group == 0 {
            return Err(Error::InvalidParameter(
                "groups, users-per-group and pages-per-group must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_in) || !(0.0..=1.0).contains(&self.p_out) {
            return Err(Error::InvalidParameter("p_in and p_out must be probabilities".into()));
        }
        if self.p_out >= self.p_in {
            return Err(Error::InvalidParameter(format!(
                "need p_out < p_in, got {} >= {}",
                self.p_out, self.p_in
            )));
        }
        if !(0.0..=1.0).contains(&self.drift_fraction) {
            return Err(Error::InvalidParameter("drift fraction must be in [0,1]".into()));
        }
        if self.drift_fraction > 0.0 && self.groups < 2 {
            return Err(Error::InvalidParameter("drift requires at least two groups".into()));
        }
        Ok(())
    }
}

/// Ground truth for one generated user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthUser {
    pub label: String,
    pub group: usize,
    /// The group this user's interest drifted to for the level-II block,
    /// when drifted.
    pub drift_group: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub matrix: PageViewMatrix,
    pub users: Vec<SynthUser>,
}

/// Column layout: pages of the `groups` groups are interleaved round-robin,
/// so every group owns pages in both the level-I and the level-II block.
pub fn page_group(col: usize, groups: usize) -> usize {
    col % groups
}

/// Row layout: users are interleaved round-robin as well, so positional
/// train/test splits stay group-balanced.
pub fn user_group(user: usize, groups: usize) -> usize {
    user % groups
}

fn page_label(col: usize, groups: usize) -> String {
    format!("/g{}/p{:02}", col % groups, col / groups)
}

fn user_label(idx: usize, group: usize, drift: Option<usize>) -> String {
    match drift {
        Some(d) => format!("u{:03}.g{}d{}", idx + 1, group, d),
        None => format!("u{:03}.g{}", idx + 1, group),
    }
}

// Counter-based draws: stream 0 holds the per-user drift decisions, stream
// 1 + u the page cells of user u. Each f64 consumes two ChaCha words, so a
// user's draws are addressable by word position and generation order never
// depends on which users run first.
fn drift_draw(seed: u64, user: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng.set_word_pos(user as u128 * 2);
    rng.gen()
}

fn user_row(user: usize, cfg: &SynthConfig, group: usize, level2_group: usize) -> Vec<u8> {
    let n_pages = cfg.groups * cfg.pages_per_group;
    let level1_cols = n_pages.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1 + user as u64);
    (0..n_pages)
        .map(|col| {
            let effective = if col < level1_cols { group } else { level2_group };
            let p = if page_group(col, cfg.groups) == effective { cfg.p_in } else { cfg.p_out };
            let draw: f64 = rng.gen();
            u8::from(draw < p)
        })
        .collect()
}

/// Generate the corpus. Deterministic for a given config: the same seed
/// yields the same matrix whether users are generated in parallel or
/// sequentially, because every draw is keyed by (seed, user, page).
pub fn generate_synthetic(cfg: &SynthConfig, parallel: bool) -> Result<SynthCorpus> {
    cfg.validate()?;
    let n_users = cfg.groups * cfg.users_per_group;
    let n_pages = cfg.groups * cfg.pages_per_group;

    let make_user = |u: usize| -> (SynthUser, Vec<u8>) {
        let group = user_group(u, cfg.groups);
        let drifted = cfg.drift_fraction > 0.0 && drift_draw(cfg.seed, u) < cfg.drift_fraction;
        let drift_group = drifted.then(|| (group + 1) % cfg.groups);
        let row = user_row(u, cfg, group, drift_group.unwrap_or(group));
        (
            SynthUser { label: user_label(u, group, drift_group), group, drift_group },
            row,
        )
    };

    let generated: Vec<(SynthUser, Vec<u8>)> = if parallel {
        (0..n_users).into_par_iter().map(make_user).collect()
    } else {
        (0..n_users).map(make_user).collect()
    };

    let users: Vec<SynthUser> = generated.iter().map(|(u, _)| u.clone()).collect();
    let matrix = PageViewMatrix::new(
        users.iter().map(|u| u.label.clone()).collect(),
        (0..n_pages).map(|c| page_label(c, cfg.groups)).collect(),
        generated.into_iter().map(|(_, row)| row).collect(),
    )?;
    Ok(SynthCorpus { matrix, users })
}

/// Sidecar ground-truth table: `user<TAB>group<TAB>drifted<TAB>level2_group`.
pub fn ground_truth_tsv(corpus: &SynthCorpus) -> String {
    let mut out = String::from("user\tgroup\tdrifted\tlevel2_group\n");
    for u in &corpus.users {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            u.label,
            u.group,
            u.drift_group.is_some() as u8,
            u.drift_group.unwrap_or(u.group)
        ));
    }
    out
}
