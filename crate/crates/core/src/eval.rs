//! Offline top-N evaluation: MAE, precision and recall over a held-out test
//! split, plus the side-by-side comparison against the single-level
//! baseline.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::entropy::{difference_score, is_valuable, SimilarityConfig};
use crate::error::{Error, Result};
use crate::kb::{build_knowledge_base_with, KnowledgeBase};
use crate::matrix::PageViewMatrix;
use crate::trust::{SingleLevelEntropy, TwoLevelEntropy};

/// Evaluation protocol parameters. The first `visited_prefix` page columns
/// play the role of the pages an online user has already visited; the rest
/// are the held-out block that recommendations are scored against.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub top_n_sizes: Vec<usize>,
    pub visited_prefix: usize,
    pub eval_beta: f64,
    pub train_beta: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { top_n_sizes: vec![2, 3, 5, 10], visited_prefix: 6, eval_beta: 0.5, train_beta: 0.8 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.visited_prefix < 1 {
            return Err(Error::InvalidParameter("visited prefix must be >= 1".into()));
        }
        if self.top_n_sizes.is_empty() || self.top_n_sizes.iter().any(|&n| n == 0) {
            return Err(Error::InvalidParameter("top-N sizes must be positive".into()));
        }
        for beta in [self.eval_beta, self.train_beta] {
            SimilarityConfig::new(beta)?;
        }
        Ok(())
    }
}

/// Per-N evaluation metrics. `mae` is `None` when no (user, page) pair was
/// scored at this size — the "no predictions" case.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub n: usize,
    pub mae: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub system: String,
    pub rows: Vec<EvalRow>,
    pub test_users: usize,
    /// Test users with a non-empty relevant set; only these enter the
    /// macro-averaged precision/recall.
    pub evaluated_users: usize,
}

/// Mean absolute error between paired prediction/actual lists.
pub fn mae(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch(format!(
            "mae over {} predictions and {} actuals",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidParameter("mae over empty lists".into()));
    }
    let sum: f64 = predicted.iter().zip(actual).map(|(p, q)| (p - q).abs()).sum();
    Ok(sum / predicted.len() as f64)
}

/// Fraction of retrieved items that are relevant; 0 when nothing was
/// retrieved.
pub fn precision<T: Ord>(relevant: &BTreeSet<T>, retrieved: &BTreeSet<T>) -> f64 {
    if retrieved.is_empty() {
        return 0.0;
    }
    relevant.intersection(retrieved).count() as f64 / retrieved.len() as f64
}

/// Fraction of relevant items that were retrieved; 0 when nothing is
/// relevant (callers exclude such users from macro averages).
pub fn recall<T: Ord>(relevant: &BTreeSet<T>, retrieved: &BTreeSet<T>) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    relevant.intersection(retrieved).count() as f64 / relevant.len() as f64
}

/// One test user's pooled recommendation ranking and ground truth.
#[derive(Debug, Clone)]
pub struct UserOutcome {
    /// (page, score) sorted by score descending, ties by page index. The
    /// score is the maximum DOI across matched training users.
    pub ranked: Vec<(usize, f64)>,
    /// Pages the test user viewed in the held-out block.
    pub relevant: BTreeSet<usize>,
    pub matched_users: usize,
}

/// Run the matching and pooling stage for every test user: find training
/// users that agree with the test user on the visited block (beta gate at
/// `eval_beta`), pool their stored recommendations by max DOI.
pub fn evaluate_users(
    train: &PageViewMatrix,
    test: &PageViewMatrix,
    kb: &KnowledgeBase,
    cfg: &EvalConfig,
    parallel: bool,
) -> Result<Vec<UserOutcome>> {
    cfg.validate()?;
    if train.pages() != test.pages() {
        return Err(Error::DimensionMismatch("train/test page columns differ".into()));
    }
    if kb.pages != train.pages() || kb.entries.len() != train.n_users() {
        return Err(Error::DimensionMismatch("knowledge base does not match training matrix".into()));
    }
    if cfg.visited_prefix >= train.n_pages() {
        return Err(Error::InvalidParameter(format!(
            "visited prefix {} must be smaller than the page count {}",
            cfg.visited_prefix,
            train.n_pages()
        )));
    }
    let vp = cfg.visited_prefix;
    let eval_one = |i: usize| -> Result<UserOutcome> {
        let test_block = &test.row(i)[..vp];
        let mut matched = Vec::new();
        for j in 0..train.n_users() {
            let d = difference_score(test_block, &train.row(j)[..vp])?;
            if is_valuable(&d, cfg.eval_beta) {
                matched.push(j);
            }
        }
        let mut best: BTreeMap<usize, f64> = BTreeMap::new();
        for &j in &matched {
            for rec in &kb.entries[j].recs {
                let slot = best.entry(rec.page).or_insert(f64::NEG_INFINITY);
                if rec.doi > *slot {
                    *slot = rec.doi;
                }
            }
        }
        let mut ranked: Vec<(usize, f64)> = best.into_iter().collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let relevant: BTreeSet<usize> =
            (vp..test.n_pages()).filter(|&p| test.cell(i, p) == 1).collect();
        Ok(UserOutcome { ranked, relevant, matched_users: matched.len() })
    };
    if parallel {
        (0..test.n_users()).into_par_iter().map(eval_one).collect()
    } else {
        (0..test.n_users()).map(eval_one).collect()
    }
}

/// Score the protocol at every configured top-N size. Precision and recall
/// are macro-averaged over test users with non-empty relevant sets; MAE is
/// taken over every retrieved (user, page) pair, predicting the page's
/// trust confidence `clamp(DOI / F_c, 0, 1)` against binary ground truth.
pub fn run_offline_eval(
    train: &PageViewMatrix,
    test: &PageViewMatrix,
    kb: &KnowledgeBase,
    cfg: &EvalConfig,
    system: &str,
    parallel: bool,
) -> Result<EvalReport> {
    let outcomes = evaluate_users(train, test, kb, cfg, parallel)?;
    report_from_outcomes(train, &outcomes, cfg, system)
}

pub fn report_from_outcomes(
    train: &PageViewMatrix,
    outcomes: &[UserOutcome],
    cfg: &EvalConfig,
    system: &str,
) -> Result<EvalReport> {
    let evaluated_users = outcomes.iter().filter(|o| !o.relevant.is_empty()).count();
    if evaluated_users == 0 {
        return Err(Error::NoEvaluableUsers);
    }
    let mut rows = Vec::new();
    for &n in &cfg.top_n_sizes {
        let mut precision_sum = 0.0;
        let mut recall_sum = 0.0;
        let mut abs_err = 0.0;
        let mut pairs = 0usize;
        for outcome in outcomes {
            let retrieved: BTreeSet<usize> =
                outcome.ranked.iter().take(n).map(|&(p, _)| p).collect();
            if !outcome.relevant.is_empty() {
                precision_sum += precision(&outcome.relevant, &retrieved);
                recall_sum += recall(&outcome.relevant, &retrieved);
            }
            for &(page, score) in outcome.ranked.iter().take(n) {
                let f_c = train.col_sum(page) as f64;
                let p_i = if f_c > 0.0 { (score / f_c).clamp(0.0, 1.0) } else { 0.0 };
                let q_i = if outcome.relevant.contains(&page) { 1.0 } else { 0.0 };
                abs_err += (p_i - q_i).abs();
                pairs += 1;
            }
        }
        rows.push(EvalRow {
            n,
            mae: (pairs > 0).then(|| abs_err / pairs as f64),
            precision: precision_sum / evaluated_users as f64,
            recall: recall_sum / evaluated_users as f64,
            pairs,
        });
    }
    Ok(EvalReport {
        system: system.to_string(),
        rows,
        test_users: outcomes.len(),
        evaluated_users,
    })
}

/// Build knowledge bases with the proposed two-level strategy and the
/// single-level baseline, run the identical protocol on both, and return
/// the paired reports.
pub fn compare_sle(
    train: &PageViewMatrix,
    test: &PageViewMatrix,
    cfg: &EvalConfig,
    parallel: bool,
) -> Result<(EvalReport, EvalReport)> {
    let sim = SimilarityConfig::new(cfg.train_beta)?;
    let proposed_kb = build_knowledge_base_with(train, &sim, &TwoLevelEntropy, parallel)?;
    let sle_kb = build_knowledge_base_with(train, &sim, &SingleLevelEntropy, parallel)?;
    let proposed = run_offline_eval(train, test, &proposed_kb, cfg, "proposed", parallel)?;
    let sle = run_offline_eval(train, test, &sle_kb, cfg, "sle", parallel)?;
    Ok((proposed, sle))
}

/// Reference metrics reported by the original study on its (now
/// unavailable) 2009 institutional web log; emitted as comments so reports
/// can be read side by side. Values are fractions, indexed like
/// `[top2, top3, top5, top10]`.
pub mod reference {
    pub const TOP_N: [usize; 4] = [2, 3, 5, 10];
    pub const MAE_PROPOSED: [f64; 4] = [0.2114, 0.2591, 0.3245, 0.4027];
    pub const PRECISION_SLE: [f64; 4] = [0.1990, 0.1810, 0.1810, 0.1800];
    pub const PRECISION_PROPOSED: [f64; 4] = [0.3030, 0.2710, 0.2450, 0.2210];
    pub const RECALL_SLE: [f64; 4] = [0.2150, 0.2370, 0.2410, 0.2410];
    pub const RECALL_PROPOSED: [f64; 4] = [0.3010, 0.3870, 0.5310, 0.6190];
}

fn reference_comments() -> String {
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join("/");
    format!(
        "# reference (original study, top 2/3/5/10):\n\
         #   mae proposed {}\n\
         #   precision sle {} proposed {}\n\
         #   recall sle {} proposed {}\n",
        fmt(&reference::MAE_PROPOSED),
        fmt(&reference::PRECISION_SLE),
        fmt(&reference::PRECISION_PROPOSED),
        fmt(&reference::RECALL_SLE),
        fmt(&reference::RECALL_PROPOSED),
    )
}

/// Tab-separated report, one row per (system, N).
pub fn report_tsv(reports: &[&EvalReport]) -> String {
    let mut out = String::from("# offline top-N evaluation\n");
    out.push_str(&reference_comments());
    out.push_str("system\tn\tmae\tprecision\trecall\tpairs\tusers\n");
    for report in reports {
        for row in &report.rows {
            let mae = row.mae.map_or("no_predictions".to_string(), |m| format!("{m:.4}"));
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.4}\t{:.4}\t{}\t{}\n",
                report.system, row.n, mae, row.precision, row.recall, row.pairs,
                report.evaluated_users
            ));
        }
    }
    out
}

/// Long-form plot data: `n,metric,system,value`.
pub fn plot_csv(reports: &[&EvalReport]) -> String {
    let mut out = String::new();
    out.push_str(&reference_comments());
    out.push_str("n,metric,system,value\n");
    for report in reports {
        for row in &report.rows {
            if let Some(m) = row.mae {
                out.push_str(&format!("{},mae,{},{:.6}\n", row.n, report.system, m));
            }
            out.push_str(&format!("{},precision,{},{:.6}\n", row.n, report.system, row.precision));
            out.push_str(&format!("{},recall,{},{:.6}\n", row.n, report.system, row.recall));
        }
    }
    out
}
