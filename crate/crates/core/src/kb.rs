//! Offline knowledge base: per-user click patterns with DOI-ranked
//! recommendations, the `ENTROPY-REC-KB v1` file format, and the online
//! matcher that answers partial click-stream queries from it.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::entropy::{meets_fraction, SimilarityConfig};
use crate::error::{Error, Result};
use crate::matrix::PageViewMatrix;
use crate::trust::{strategy, TrustStrategy, TrustedNeighbor};

const KB_HEADER: &str = "ENTROPY-REC-KB v1";

/// A recommended page with its degree of importance.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub url: String,
    pub doi: f64,
}

/// Stored recommendation inside a KB entry; pages are column indices into
/// the KB page list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoredRec {
    pub page: usize,
    pub doi: f64,
}

/// One training user's knowledge-base entry: the pages they visited and the
/// DOI-descending recommendations generated for them. Recommended pages are
/// always disjoint from the pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct KbEntry {
    pub user: String,
    pub pattern: Vec<usize>,
    pub recs: Vec<StoredRec>,
}

/// The offline unit's output, consumed read-only by the online generator.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub beta: f64,
    pub level1_pages: usize,
    pub level2_pages: usize,
    pub pages: Vec<String>,
    pub entries: Vec<KbEntry>,
}

/// Result of matching an online click stream against the KB.
#[derive(Debug, Clone)]
pub struct MatchOutcome {
    /// Entry indices sorted by overlap descending, ties by entry order.
    pub matched: Vec<usize>,
    /// Unknown URLs that were dropped from the query.
    pub dropped: Vec<String>,
}

/// Online response: top-N recommendations plus match diagnostics.
#[derive(Debug, Clone)]
pub struct OnlineRecommendation {
    pub recommendations: Vec<Recommendation>,
    pub matched_users: usize,
    pub dropped: Vec<String>,
}

/// Candidate pages for a target: pages the target has not visited but at
/// least one trusted neighbor has. Each candidate maps to its supporters in
/// ascending recommender order (the order DOI sums them in).
pub fn candidate_pages(
    target: usize,
    neighbors: &[TrustedNeighbor],
    pv: &PageViewMatrix,
) -> BTreeMap<usize, Vec<TrustedNeighbor>> {
    let mut by_recommender: Vec<TrustedNeighbor> = neighbors.to_vec();
    by_recommender.sort_by_key(|n| n.recommender);
    let mut out: BTreeMap<usize, Vec<TrustedNeighbor>> = BTreeMap::new();
    for p in 0..pv.n_pages() {
        if pv.cell(target, p) == 1 {
            continue;
        }
        let supporters: Vec<TrustedNeighbor> = by_recommender
            .iter()
            .filter(|n| pv.cell(n.recommender, p) == 1)
            .copied()
            .collect();
        if !supporters.is_empty() {
            out.insert(p, supporters);
        }
    }
    out
}

/// Degree of importance: `(1 - E_c / T_c) * F_c` where T_c is the supporter
/// count, E_c the sum of their entropies (in the given order) and F_c the
/// page's view count over the full training matrix.
pub fn degree_of_importance(
    page: usize,
    supporters: &[TrustedNeighbor],
    pv: &PageViewMatrix,
) -> Result<f64> {
    if supporters.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "page {page} has no supporting recommender"
        )));
    }
    let t_c = supporters.len() as f64;
    let e_c: f64 = supporters.iter().map(|n| n.entropy).sum();
    let f_c = pv.col_sum(page) as f64;
    Ok((1.0 - e_c / t_c) * f_c)
}

/// Candidate pages scored by DOI, sorted descending, ties by page index.
pub fn build_recommendations(
    target: usize,
    neighbors: &[TrustedNeighbor],
    pv: &PageViewMatrix,
) -> Result<Vec<StoredRec>> {
    let mut recs = Vec::new();
    for (page, supporters) in candidate_pages(target, neighbors, pv) {
        recs.push(StoredRec { page, doi: degree_of_importance(page, &supporters, pv)? });
    }
    recs.sort_by(|a, b| b.doi.partial_cmp(&a.doi).unwrap().then(a.page.cmp(&b.page)));
    Ok(recs)
}

/// Build the knowledge base with the default two-level strategy.
pub fn build_knowledge_base(pv: &PageViewMatrix, config: &SimilarityConfig) -> Result<KnowledgeBase> {
    build_knowledge_base_with(pv, config, strategy("two-level")?.as_ref(), false)
}

/// Build the knowledge base with an explicit trust strategy. When `parallel`
/// is set, per-target recommendation generation runs on the rayon pool; the
/// merge is index-ordered, so output is identical to the sequential mode.
pub fn build_knowledge_base_with(
    pv: &PageViewMatrix,
    config: &SimilarityConfig,
    strategy: &dyn TrustStrategy,
    parallel: bool,
) -> Result<KnowledgeBase> {
    let neighbor_lists = strategy.neighbors_for_all(pv, config.beta)?;
    build_knowledge_base_from_neighbors(pv, config, neighbor_lists, parallel)
}

/// Build the knowledge base from precomputed trusted-neighbor lists (one per
/// training user, in row order).
pub fn build_knowledge_base_from_neighbors(
    pv: &PageViewMatrix,
    config: &SimilarityConfig,
    neighbor_lists: Vec<Vec<TrustedNeighbor>>,
    parallel: bool,
) -> Result<KnowledgeBase> {
    if neighbor_lists.len() != pv.n_users() {
        return Err(Error::DimensionMismatch(format!(
            "{} neighbor lists for {} training users",
            neighbor_lists.len(),
            pv.n_users()
        )));
    }
    let build_entry = |t: usize| -> Result<KbEntry> {
        Ok(KbEntry {
            user: pv.users()[t].clone(),
            pattern: pv.visited_pages(t),
            recs: build_recommendations(t, &neighbor_lists[t], pv)?,
        })
    };
    let entries: Result<Vec<KbEntry>> = if parallel {
        (0..pv.n_users()).into_par_iter().map(build_entry).collect()
    } else {
        (0..pv.n_users()).map(build_entry).collect()
    };
    let level1_pages = pv.n_pages().div_ceil(2);
    Ok(KnowledgeBase {
        beta: config.beta,
        level1_pages,
        level2_pages: pv.n_pages() - level1_pages,
        pages: pv.pages().to_vec(),
        entries: entries?,
    })
}

impl KnowledgeBase {
    /// Match a visited-URL set against the stored click patterns: an entry
    /// matches when the overlap reaches `beta * |visited|` (exact-rational
    /// comparison, inclusive boundary). Unknown URLs are dropped first;
    /// if nothing recognizable remains the query is rejected.
    pub fn match_online(&self, visited: &[String], beta: f64) -> Result<MatchOutcome> {
        let page_index: HashMap<&str, usize> =
            self.pages.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let mut known: Vec<usize> = Vec::new();
        let mut dropped = Vec::new();
        for url in visited {
            match page_index.get(url.as_str()) {
                Some(&i) => {
                    if !known.contains(&i) {
                        known.push(i);
                    }
                }
                None => dropped.push(url.clone()),
            }
        }
        if known.is_empty() {
            return Err(Error::NoRecognizablePages);
        }
        let mut scored: Vec<(usize, usize)> = self
            .entries
            .iter()
            .enumerate()
            .filter_map(|(idx, entry)| {
                let overlap = known.iter().filter(|p| entry.pattern.contains(p)).count();
                meets_fraction(overlap, known.len(), beta).then_some((idx, overlap))
            })
            .collect();
        scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(MatchOutcome { matched: scored.into_iter().map(|(idx, _)| idx).collect(), dropped })
    }

    /// Top-N recommendations for an online click stream: pool the matched
    /// entries' recommendation lists, score each page by its maximum DOI
    /// across matches, drop pages already visited, and return the best `n`
    /// (DOI descending, ties by page index).
    pub fn top_n(&self, visited: &[String], n: usize, beta: f64) -> Result<OnlineRecommendation> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let outcome = self.match_online(visited, beta)?;
        let visited_idx: Vec<usize> = visited
            .iter()
            .filter_map(|url| self.pages.iter().position(|p| p == url))
            .collect();
        let mut best: BTreeMap<usize, f64> = BTreeMap::new();
        for &idx in &outcome.matched {
            for rec in &self.entries[idx].recs {
                if visited_idx.contains(&rec.page) {
                    continue;
                }
                let slot = best.entry(rec.page).or_insert(f64::NEG_INFINITY);
                if rec.doi > *slot {
                    *slot = rec.doi;
                }
            }
        }
        let mut ranked: Vec<(usize, f64)> = best.into_iter().collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        ranked.truncate(n);
        Ok(OnlineRecommendation {
            recommendations: ranked
                .into_iter()
                .map(|(page, doi)| Recommendation { url: self.pages[page].clone(), doi })
                .collect(),
            matched_users: outcome.matched.len(),
            dropped: outcome.dropped,
        })
    }

    /// Serialize to the `ENTROPY-REC-KB v1` format. Byte-identical across
    /// round-trips.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(KB_HEADER);
        out.push('\n');
        out.push_str("[CONFIG]\n");
        out.push_str(&format!("beta\t{}\n", self.beta));
        out.push_str(&format!("level1\t{}\n", self.level1_pages));
        out.push_str(&format!("level2\t{}\n", self.level2_pages));
        out.push_str("[PAGES]\n");
        for (i, p) in self.pages.iter().enumerate() {
            out.push_str(&format!("{i}\t{p}\n"));
        }
        out.push_str("[ENTRIES]\n");
        for entry in &self.entries {
            let pattern: Vec<String> = entry.pattern.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("PATTERN\t{}\t{}\n", entry.user, pattern.join(",")));
            let recs: Vec<String> =
                entry.recs.iter().map(|r| format!("{}:{:.6}", r.page, r.doi)).collect();
            out.push_str(&format!("RECS\t{}\t{}\n", entry.user, recs.join(",")));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<KnowledgeBase> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty KB file".into()))?;
        if header != KB_HEADER {
            return Err(Error::Format(format!(
                "unsupported KB header '{header}', expected '{KB_HEADER}'"
            )));
        }
        if lines.next() != Some("[CONFIG]") {
            return Err(Error::Format("expected [CONFIG] section".into()));
        }
        let mut config: HashMap<String, String> = HashMap::new();
        let mut line = lines.next();
        while let Some(l) = line {
            if l == "[PAGES]" {
                break;
            }
            let (key, value) = l
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("bad config line '{l}'")))?;
            config.insert(key.to_string(), value.to_string());
            line = lines.next();
        }
        if line != Some("[PAGES]") {
            return Err(Error::Format("expected [PAGES] section".into()));
        }
        let beta: f64 = config
            .get("beta")
            .ok_or_else(|| Error::Format("config missing beta".into()))?
            .parse()
            .map_err(|_| Error::Format("beta is not a number".into()))?;
        let parse_count = |key: &str| -> Result<usize> {
            config
                .get(key)
                .ok_or_else(|| Error::Format(format!("config missing {key}")))?
                .parse()
                .map_err(|_| Error::Format(format!("{key} is not a count")))
        };
        let level1_pages = parse_count("level1")?;
        let level2_pages = parse_count("level2")?;

        let mut pages = Vec::new();
        let mut line = lines.next();
        while let Some(l) = line {
            if l == "[ENTRIES]" {
                break;
            }
            let (idx, url) = l
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("bad page line '{l}'")))?;
            let idx: usize =
                idx.parse().map_err(|_| Error::Format(format!("bad page index '{idx}'")))?;
            if idx != pages.len() {
                return Err(Error::Format(format!(
                    "page index {idx} out of order (expected {})",
                    pages.len()
                )));
            }
            pages.push(url.to_string());
            line = lines.next();
        }
        if line != Some("[ENTRIES]") {
            return Err(Error::Format("expected [ENTRIES] section".into()));
        }

        let mut entries = Vec::new();
        while let Some(pattern_line) = lines.next() {
            let mut fields = pattern_line.splitn(3, '\t');
            if fields.next() != Some("PATTERN") {
                return Err(Error::Format(format!("expected PATTERN line, got '{pattern_line}'")));
            }
            let user = fields
                .next()
                .ok_or_else(|| Error::Format("PATTERN line missing user".into()))?
                .to_string();
            let pattern = parse_index_list(fields.next().unwrap_or(""), pages.len())?;
            let recs_line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing RECS line for user '{user}'")))?;
            let mut fields = recs_line.splitn(3, '\t');
            if fields.next() != Some("RECS") || fields.next() != Some(user.as_str()) {
                return Err(Error::Format(format!("RECS line does not match user '{user}'")));
            }
            let recs = parse_rec_list(fields.next().unwrap_or(""), pages.len())?;
            entries.push(KbEntry { user, pattern, recs });
        }
        Ok(KnowledgeBase { beta, level1_pages, level2_pages, pages, entries })
    }
}

fn parse_index_list(text: &str, n_pages: usize) -> Result<Vec<usize>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let idx: usize =
                t.parse().map_err(|_| Error::Format(format!("bad page index '{t}'")))?;
            if idx >= n_pages {
                return Err(Error::Format(format!("page index {idx} out of range")));
            }
            Ok(idx)
        })
        .collect()
}

fn parse_rec_list(text: &str, n_pages: usize) -> Result<Vec<StoredRec>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let (page, doi) = t
                .split_once(':')
                .ok_or_else(|| Error::Format(format!("bad recommendation '{t}'")))?;
            let page: usize =
                page.parse().map_err(|_| Error::Format(format!("bad page index '{page}'")))?;
            if page >= n_pages {
                return Err(Error::Format(format!("page index {page} out of range")));
            }
            let doi: f64 =
                doi.parse().map_err(|_| Error::Format(format!("bad DOI value '{doi}'")))?;
            Ok(StoredRec { page, doi })
        })
        .collect()
}
