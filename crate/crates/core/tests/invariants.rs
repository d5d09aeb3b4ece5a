//! Property tests for the pipeline invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use entrec_core::entropy::{is_valuable, level_entropy, SimilarityConfig};
use entrec_core::kb::build_knowledge_base;
use entrec_core::logparse::LogRecord;
use entrec_core::matrix::PageViewMatrix;
use entrec_core::session::{sessionize, SessionizeConfig};
use entrec_core::trust::{select_trustworthy, select_valuable};

fn arb_matrix(max_users: usize, max_pages: usize) -> impl Strategy<Value = PageViewMatrix> {
    (2..=max_users, 2..=max_pages).prop_flat_map(|(u, p)| {
        proptest::collection::vec(proptest::collection::vec(0u8..=1, p), u).prop_map(
            move |cells| {
                PageViewMatrix::new(
                    (0..u).map(|i| format!("u{i}")).collect(),
                    (0..p).map(|i| format!("/p{i}")).collect(),
                    cells,
                )
                .unwrap()
            },
        )
    })
}

fn arb_records() -> impl Strategy<Value = Vec<LogRecord>> {
    proptest::collection::vec(
        (0u8..3, 0i64..20_000, 0u8..5).prop_map(|(v, t, u)| LogRecord {
            visitor_key: format!("v{v}"),
            timestamp: t,
            url: format!("/p{u}"),
            method: "GET".into(),
            status: 200,
            user_agent: String::new(),
        }),
        0..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sessionize_partitions_and_ignores_input_order(mut records in arb_records()) {
        let cfg = SessionizeConfig { timeout_secs: 1800, max_duration_secs: 7200 };
        let sessions = sessionize(&records, &cfg, false);
        // Within-session constraints.
        for s in &sessions {
            prop_assert!(!s.requests.is_empty());
            for w in s.requests.windows(2) {
                prop_assert!(w[0].0 <= w[1].0);
                prop_assert!(w[1].0 - w[0].0 <= cfg.timeout_secs);
            }
            prop_assert!(s.end - s.start <= cfg.max_duration_secs);
            prop_assert_eq!(s.start, s.requests[0].0);
            prop_assert_eq!(s.end, s.requests.last().unwrap().0);
        }
        // No session mixes visitors, and sessions of one visitor do not
        // overlap in time.
        for s in &sessions {
            prop_assert!(s.session_id.starts_with(&s.visitor_key));
        }
        // Permuting the input changes nothing.
        records.reverse();
        let again = sessionize(&records, &cfg, false);
        prop_assert_eq!(&again, &sessions);
        let parallel = sessionize(&records, &cfg, true);
        prop_assert_eq!(&parallel, &sessions);
    }

    #[test]
    fn prune_never_grows_and_enforces_thresholds(m in arb_matrix(8, 8),
                                                 min_pages in 1usize..4,
                                                 min_sessions in 1usize..4) {
        if let Ok(pruned) = m.prune(min_pages, min_sessions) {
            prop_assert!(pruned.n_users() <= m.n_users());
            prop_assert!(pruned.n_pages() <= m.n_pages());
            for u in 0..pruned.n_users() {
                // Row sums only shrink when columns are dropped afterwards,
                // so re-check against the original matrix rows.
                let orig = m.user_index(&pruned.users()[u]).unwrap();
                prop_assert!(m.row_sum(orig) >= min_pages);
            }
            for p in 0..pruned.n_pages() {
                prop_assert!(pruned.col_sum(p) >= min_sessions);
            }
        }
    }

    #[test]
    fn splits_reconstruct_the_input(m in arb_matrix(8, 8), fraction in 0.2f64..0.9) {
        if let Ok((train, test)) = m.split_train_test(fraction) {
            let mut users = train.users().to_vec();
            users.extend_from_slice(test.users());
            prop_assert_eq!(users, m.users().to_vec());
        }
        let (l1, l2) = m.split_levels().unwrap();
        prop_assert_eq!(l1.n_pages(), m.n_pages().div_ceil(2));
        for u in 0..m.n_users() {
            let mut row = l1.row(u).to_vec();
            row.extend_from_slice(l2.row(u));
            prop_assert_eq!(row, m.row(u).to_vec());
        }
    }

    #[test]
    fn lowering_beta_never_removes_valuable_recommenders(m in arb_matrix(8, 8),
                                                         hi in 1u8..=10) {
        let hi_beta = hi as f64 / 10.0;
        let lo_beta = hi_beta / 2.0;
        let strict: BTreeSet<usize> =
            select_valuable(&m, 0, hi_beta).unwrap().into_iter().map(|(x, _)| x).collect();
        let loose: BTreeSet<usize> =
            select_valuable(&m, 0, lo_beta).unwrap().into_iter().map(|(x, _)| x).collect();
        prop_assert!(strict.is_subset(&loose));
    }

    #[test]
    fn trustworthy_is_a_subset_of_valuable_with_positive_actual_entropy(
        m in arb_matrix(8, 10), beta in prop::sample::select(vec![0.3, 0.5, 0.8])) {
        let (l1, l2) = m.split_levels().unwrap();
        for t in 0..m.n_users() {
            let valuable = select_valuable(&l1, t, beta).unwrap();
            let valuable_set: BTreeSet<usize> = valuable.iter().map(|(x, _)| x).copied().collect();
            let trusted = select_trustworthy(&valuable, &l2, t).unwrap();
            for r in &trusted {
                prop_assert!(valuable_set.contains(&r.recommender));
                prop_assert!(r.actual_entropy > 0.0);
                prop_assert_eq!(r.actual_entropy, (r.entropy_l1 - r.entropy_l2) / 2.0);
            }
        }
    }

    #[test]
    fn label_equivariance_of_selection(m in arb_matrix(7, 8),
                                       beta in prop::sample::select(vec![0.4, 0.6])) {
        // Swap the last two rows (never the target, row 0) and check the
        // valuable set maps through the swap with identical entropies.
        let n = m.n_users();
        prop_assume!(n >= 3);
        let (a, b) = (n - 2, n - 1);
        let mut cells: Vec<Vec<u8>> = (0..n).map(|u| m.row(u).to_vec()).collect();
        cells.swap(a, b);
        let swapped = PageViewMatrix::new(
            m.users().to_vec(),
            m.pages().to_vec(),
            cells,
        ).unwrap();
        let map = |x: usize| if x == a { b } else if x == b { a } else { x };
        let mut original: Vec<(usize, f64)> = select_valuable(&m, 0, beta).unwrap();
        let mut mapped: Vec<(usize, f64)> = select_valuable(&swapped, 0, beta)
            .unwrap()
            .into_iter()
            .map(|(x, h)| (map(x), h))
            .collect();
        original.sort_by(|x, y| x.0.cmp(&y.0));
        mapped.sort_by(|x, y| x.0.cmp(&y.0));
        prop_assert_eq!(original, mapped);
    }

    #[test]
    fn entropy_ranking_matches_hamming_ranking(m in arb_matrix(8, 8)) {
        // Level entropy is strictly increasing in the disagreement count,
        // so sorting by entropy equals sorting by Hamming distance.
        let valuable = select_valuable(&m, 0, 0.1).unwrap();
        let hamming = |x: usize| -> usize {
            m.row(0).iter().zip(m.row(x)).filter(|(a, b)| a != b).count()
        };
        for w in valuable.windows(2) {
            prop_assert!(hamming(w[0].0) <= hamming(w[1].0));
        }
    }

    #[test]
    fn top_n_respects_length_order_and_visited(m in arb_matrix(8, 8),
                                               n in 1usize..6,
                                               visits in proptest::collection::vec(0usize..8, 1..5)) {
        let kb = build_knowledge_base(&m, &SimilarityConfig::new(0.5).unwrap()).unwrap();
        let visited: Vec<String> = visits
            .iter()
            .filter(|&&p| p < kb.pages.len())
            .map(|&p| kb.pages[p].clone())
            .collect();
        prop_assume!(!visited.is_empty());
        let out = kb.top_n(&visited, n, 0.5).unwrap();
        prop_assert!(out.recommendations.len() <= n);
        for w in out.recommendations.windows(2) {
            prop_assert!(w[0].doi >= w[1].doi);
        }
        for rec in &out.recommendations {
            prop_assert!(!visited.contains(&rec.url));
        }
    }

    #[test]
    fn matrix_tsv_round_trip(m in arb_matrix(8, 8)) {
        let text = m.to_tsv();
        let parsed = PageViewMatrix::from_tsv(&text).unwrap();
        prop_assert_eq!(&parsed, &m);
        prop_assert_eq!(parsed.to_tsv(), text);
    }

    #[test]
    fn doi_lower_bound_from_the_beta_gate(m in arb_matrix(8, 10)) {
        // Supporters from a beta-gated trust set satisfy
        // E_A < (1 - beta) * log2(n1) / 2, which bounds every DOI below by
        // (1 - that) * F_c; F_c >= T_c always.
        let beta = 0.8;
        let n1 = m.n_pages().div_ceil(2);
        let bound = (1.0 - beta) * (n1 as f64).log2() / 2.0;
        let kb = build_knowledge_base(&m, &SimilarityConfig::new(beta).unwrap()).unwrap();
        for (t, entry) in kb.entries.iter().enumerate() {
            let _ = t;
            for rec in &entry.recs {
                let f_c = (0..m.n_users()).filter(|&u| m.cell(u, rec.page) == 1).count() as f64;
                prop_assert!(rec.doi > (1.0 - bound) * f_c - 1e-9);
                prop_assert!(f_c >= 1.0);
            }
        }
    }

    #[test]
    fn entropy_zero_only_at_full_agreement(d in proptest::collection::vec(0u8..=1, 2..30)) {
        let h = level_entropy(&d);
        let k = d.iter().filter(|&&x| x != 0).count();
        prop_assert_eq!(h == 0.0, k == 0);
        prop_assert!(h <= (d.len() as f64).log2() + 1e-12);
        prop_assert!(is_valuable(&d, 1.0) == (k == 0));
    }
}
