//! Session reconstruction: split each visitor's requests at inactivity
//! gaps, cap session duration.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::logparse::LogRecord;

/// An ordered group of one visitor's requests. Consecutive gaps never
/// exceed the timeout and the whole session fits the duration cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    /// `visitor_key#ordinal`, ordinal 1-based per visitor in time order.
    pub session_id: String,
    pub visitor_key: String,
    /// (timestamp, url), sorted non-decreasing by timestamp.
    pub requests: Vec<(i64, String)>,
    pub start: i64,
    pub end: i64,
}

#[derive(Debug, Clone, Copy)]
pub struct SessionizeConfig {
    /// Inactivity gap that starts a new session. Default 30 minutes.
    pub timeout_secs: i64,
    /// Sessions longer than this are eliminated. Default 2 hours.
    pub max_duration_secs: i64,
}

impl Default for SessionizeConfig {
    fn default() -> Self {
        SessionizeConfig { timeout_secs: 30 * 60, max_duration_secs: 2 * 60 * 60 }
    }
}

/// Build sessions from (possibly unordered) records. Requests are grouped
/// by visitor, sorted by time, split wherever the gap to the previous
/// request exceeds the timeout, and sessions longer than the duration cap
/// are dropped. Output is sorted by (visitor_key, start), so the result is
/// independent of input order and of the `parallel` flag.
pub fn sessionize(records: &[LogRecord], cfg: &SessionizeConfig, parallel: bool) -> Vec<Session> {
    let mut by_visitor: BTreeMap<&str, Vec<(i64, &str)>> = BTreeMap::new();
    for r in records {
        by_visitor.entry(&r.visitor_key).or_default().push((r.timestamp, &r.url));
    }
    let visitors: Vec<(&str, Vec<(i64, &str)>)> = by_visitor.into_iter().collect();
    let build = |(visitor, mut requests): (&str, Vec<(i64, &str)>)| -> Vec<Session> {
        requests.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let mut chunks: Vec<Vec<(i64, &str)>> = Vec::new();
        for req in requests {
            match chunks.last_mut() {
                Some(chunk)
                    if req.0 - chunk.last().unwrap().0 <= cfg.timeout_secs =>
                {
                    chunk.push(req);
                }
                _ => chunks.push(vec![req]),
            }
        }
        let mut ordinal = 0;
        chunks
            .into_iter()
            .filter(|c| c.last().unwrap().0 - c[0].0 <= cfg.max_duration_secs)
            .map(|chunk| {
                ordinal += 1;
                Session {
                    session_id: format!("{visitor}#{ordinal}"),
                    visitor_key: visitor.to_string(),
                    start: chunk[0].0,
                    end: chunk.last().unwrap().0,
                    requests: chunk.into_iter().map(|(t, u)| (t, u.to_string())).collect(),
                }
            })
            .collect()
    };
    let per_visitor: Vec<Vec<Session>> = if parallel {
        visitors.into_par_iter().map(build).collect()
    } else {
        visitors.into_iter().map(build).collect()
    };
    per_visitor.into_iter().flatten().collect()
}

/// TSV dump, one line per request: `session_id<TAB>visitor<TAB>timestamp<TAB>url`.
pub fn sessions_tsv(sessions: &[Session]) -> String {
    let mut out = String::new();
    for s in sessions {
        for (ts, url) in &s.requests {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", s.session_id, s.visitor_key, ts, url));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: i64 = 60;

    fn record(visitor: &str, t: i64, url: &str) -> LogRecord {
        LogRecord {
            visitor_key: visitor.to_string(),
            timestamp: t,
            url: url.to_string(),
            method: "GET".into(),
            status: 200,
            user_agent: String::new(),
        }
    }

    #[test]
    fn gap_over_timeout_starts_a_new_session() {
        let records = vec![
            record("v", 0, "/a"),
            record("v", 10 * MIN, "/b"),
            record("v", 50 * MIN, "/c"),
        ];
        let sessions = sessionize(&records, &SessionizeConfig::default(), false);
        assert_eq!(sessions.len(), 2);
        assert_eq!(sessions[0].session_id, "v#1");
        assert_eq!(sessions[0].requests.len(), 2);
        assert_eq!((sessions[0].start, sessions[0].end), (0, 10 * MIN));
        assert_eq!(sessions[1].session_id, "v#2");
        assert_eq!((sessions[1].start, sessions[1].end), (50 * MIN, 50 * MIN));
    }

    #[test]
    fn gap_of_exactly_the_timeout_stays_in_the_session() {
        let records = vec![record("v", 0, "/a"), record("v", 30 * MIN, "/b")];
        let sessions = sessionize(&records, &SessionizeConfig::default(), false);
        assert_eq!(sessions.len(), 1);
    }

    #[test]
    fn single_request_makes_a_single_request_session() {
        let sessions =
            sessionize(&[record("v", 5, "/a")], &SessionizeConfig::default(), false);
        assert_eq!(sessions.len(), 1);
        assert_eq!(sessions[0].requests, vec![(5, "/a".to_string())]);
    }

    #[test]
    fn long_session_is_eliminated_by_the_duration_cap() {
        // Requests every 25 minutes across 125 minutes: the gap rule keeps
        // one session, the 2-hour cap removes it.
        let records: Vec<LogRecord> =
            (0..6).map(|i| record("v", i * 25 * MIN, "/a")).collect();
        let sessions = sessionize(&records, &SessionizeConfig::default(), false);
        assert!(sessions.is_empty());
    }

    #[test]
    fn empty_input_empty_output() {
        assert!(sessionize(&[], &SessionizeConfig::default(), false).is_empty());
    }

    #[test]
    fn partition_and_order_independence() {
        let mut records = vec![
            record("b", 100, "/x"),
            record("a", 0, "/a"),
            record("a", 5 * MIN, "/b"),
            record("a", 90 * MIN, "/c"),
            record("b", 95, "/y"),
        ];
        let expected = sessionize(&records, &SessionizeConfig::default(), false);
        records.reverse();
        let shuffled = sessionize(&records, &SessionizeConfig::default(), false);
        assert_eq!(shuffled, expected);
        let parallel = sessionize(&records, &SessionizeConfig::default(), true);
        assert_eq!(parallel, expected);
        // Every record lands in exactly one session, none crosses visitors.
        let total: usize = expected.iter().map(|s| s.requests.len()).sum();
        assert_eq!(total, 5);
        for s in &expected {
            assert!(s.session_id.starts_with(&s.visitor_key));
            for w in s.requests.windows(2) {
                assert!(w[1].0 - w[0].0 <= 30 * MIN);
                assert!(w[0].0 <= w[1].0);
            }
            assert!(s.end - s.start <= 120 * MIN);
        }
    }
}
