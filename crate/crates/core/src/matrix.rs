//! Binary page-view matrix: construction from sessions, pruning, splits and
//! the `PVMATRIX v1` file format.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::session::Session;

const MATRIX_HEADER: &str = "PVMATRIX v1";

/// Users-by-pages binary matrix. A cell is 1 iff the page was accessed in
/// that user's session. Row and column labels are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageViewMatrix {
    users: Vec<String>,
    pages: Vec<String>,
    cells: Vec<Vec<u8>>,
}

impl PageViewMatrix {
    pub fn new(users: Vec<String>, pages: Vec<String>, cells: Vec<Vec<u8>>) -> Result<Self> {
        if users.len() != cells.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} user labels but {} rows",
                users.len(),
                cells.len()
            )));
        }
        for (i, row) in cells.iter().enumerate() {
            if row.len() != pages.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} cells but there are {} pages",
                    i,
                    row.len(),
                    pages.len()
                )));
            }
            if let Some(bad) = row.iter().find(|&&c| c > 1) {
                return Err(Error::Format(format!(
                    "row {i} contains non-binary cell value {bad}"
                )));
            }
        }
        let mut seen = HashSet::new();
        for u in &users {
            if !seen.insert(u.as_str()) {
                return Err(Error::Format(format!("duplicate user label '{u}'")));
            }
        }
        seen.clear();
        for p in &pages {
            if !seen.insert(p.as_str()) {
                return Err(Error::Format(format!("duplicate page label '{p}'")));
            }
        }
        Ok(PageViewMatrix { users, pages, cells })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_pages(&self) -> usize {
        self.pages.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn pages(&self) -> &[String] {
        &self.pages
    }

    pub fn row(&self, user: usize) -> &[u8] {
        &self.cells[user]
    }

    pub fn cell(&self, user: usize, page: usize) -> u8 {
        self.cells[user][page]
    }

    pub fn user_index(&self, label: &str) -> Option<usize> {
        self.users.iter().position(|u| u == label)
    }

    pub fn row_sum(&self, user: usize) -> usize {
        self.cells[user].iter().map(|&c| c as usize).sum()
    }

    /// Number of users who viewed the page (the F_c of the DOI formula).
    pub fn col_sum(&self, page: usize) -> usize {
        self.cells.iter().map(|row| row[page] as usize).sum()
    }

    /// Page indices the user has viewed, ascending.
    pub fn visited_pages(&self, user: usize) -> Vec<usize> {
        self.cells[user]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(p, _)| p)
            .collect()
    }

    /// Drop users with fewer than `min_pages` page views, then pages viewed
    /// in fewer than `min_url_sessions` of the surviving sessions. Single
    /// pass, in that order.
    pub fn prune(&self, min_pages: usize, min_url_sessions: usize) -> Result<PageViewMatrix> {
        if min_pages < 1 || min_url_sessions < 1 {
            return Err(Error::InvalidParameter(
                "min_pages and min_url_sessions must be >= 1".into(),
            ));
        }
        let kept_rows: Vec<usize> = (0..self.n_users())
            .filter(|&u| self.row_sum(u) >= min_pages)
            .collect();
        if kept_rows.is_empty() {
            return Err(Error::TooSparse(format!(
                "no session visited at least {min_pages} pages"
            )));
        }
        let kept_cols: Vec<usize> = (0..self.n_pages())
            .filter(|&p| {
                let sum: usize = kept_rows.iter().map(|&u| self.cells[u][p] as usize).sum();
                sum >= min_url_sessions
            })
            .collect();
        if kept_cols.is_empty() {
            return Err(Error::TooSparse(format!(
                "no page was visited in at least {min_url_sessions} sessions"
            )));
        }
        let users = kept_rows.iter().map(|&u| self.users[u].clone()).collect();
        let pages = kept_cols.iter().map(|&p| self.pages[p].clone()).collect();
        let cells = kept_rows
            .iter()
            .map(|&u| kept_cols.iter().map(|&p| self.cells[u][p]).collect())
            .collect();
        PageViewMatrix::new(users, pages, cells)
    }

    /// Positional train/test split: the first `floor(fraction * users)` rows
    /// become the training matrix, the remainder the test matrix. Columns
    /// are shared.
    pub fn split_train_test(&self, train_fraction: f64) -> Result<(PageViewMatrix, PageViewMatrix)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction must be in (0,1), got {train_fraction}"
            )));
        }
        let n_train = (train_fraction * self.n_users() as f64).floor() as usize;
        if n_train == 0 || n_train == self.n_users() {
            return Err(Error::TooSparse(format!(
                "cannot split {} users {}/{}",
                self.n_users(),
                n_train,
                self.n_users() - n_train
            )));
        }
        Ok((self.take_rows(0..n_train)?, self.take_rows(n_train..self.n_users())?))
    }

    /// Vertical level split: the first `ceil(P/2)` columns form the level-I
    /// matrix, the rest the level-II matrix. Rows are shared.
    pub fn split_levels(&self) -> Result<(PageViewMatrix, PageViewMatrix)> {
        if self.n_pages() < 2 {
            return Err(Error::TooSparse(format!(
                "need at least 2 pages to split levels, got {}",
                self.n_pages()
            )));
        }
        let cut = self.n_pages().div_ceil(2);
        Ok((self.take_cols(0..cut)?, self.take_cols(cut..self.n_pages())?))
    }

    fn take_rows(&self, range: std::ops::Range<usize>) -> Result<PageViewMatrix> {
        PageViewMatrix::new(
            self.users[range.clone()].to_vec(),
            self.pages.clone(),
            self.cells[range].to_vec(),
        )
    }

    fn take_cols(&self, range: std::ops::Range<usize>) -> Result<PageViewMatrix> {
        PageViewMatrix::new(
            self.users.clone(),
            self.pages[range.clone()].to_vec(),
            self.cells.iter().map(|row| row[range.clone()].to_vec()).collect(),
        )
    }

    /// Serialize to the `PVMATRIX v1` TSV format. Byte-identical across
    /// round-trips.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(MATRIX_HEADER);
        out.push('\n');
        out.push_str(&self.pages.join("\t"));
        out.push('\n');
        for (u, row) in self.cells.iter().enumerate() {
            out.push_str(&self.users[u]);
            for &c in row {
                out.push('\t');
                out.push(if c == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<PageViewMatrix> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty matrix file".into()))?;
        if header != MATRIX_HEADER {
            return Err(Error::Format(format!(
                "unsupported matrix header '{header}', expected '{MATRIX_HEADER}'"
            )));
        }
        let pages: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Format("missing page header line".into()))?
            .split('\t')
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        let mut users = Vec::new();
        let mut cells = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut fields = line.split('\t');
            let user = fields
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::Format(format!("row {}: missing user label", i + 3)))?;
            let row: Vec<u8> = fields
                .map(|f| match f {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Format(format!(
                        "row {}: cell '{}' is not 0/1",
                        i + 3,
                        other
                    ))),
                })
                .collect::<Result<_>>()?;
            users.push(user.to_string());
            cells.push(row);
        }
        PageViewMatrix::new(users, pages, cells)
    }
}

/// The four matrices of the offline protocol: train/test user split plus the
/// level-I/level-II page split of the training half.
#[derive(Debug, Clone)]
pub struct MatrixSplit {
    pub train: PageViewMatrix,
    pub test: PageViewMatrix,
    pub level1: PageViewMatrix,
    pub level2: PageViewMatrix,
}

impl MatrixSplit {
    pub fn new(matrix: &PageViewMatrix, train_fraction: f64) -> Result<MatrixSplit> {
        let (train, test) = matrix.split_train_test(train_fraction)?;
        let (level1, level2) = train.split_levels()?;
        Ok(MatrixSplit { train, test, level1, level2 })
    }
}

/// Build the page-view matrix from sessions: one row per session (sessions
/// are the "users" of the offline protocol), one column per distinct URL.
/// Rows are ordered by session start (ties by session id), columns in
/// first-appearance order.
pub fn build_pv_matrix(sessions: &[Session]) -> Result<PageViewMatrix> {
    if sessions.is_empty() {
        return Err(Error::TooSparse("no sessions".into()));
    }
    let mut order: Vec<&Session> = sessions.iter().collect();
    order.sort_by(|a, b| a.start.cmp(&b.start).then_with(|| a.session_id.cmp(&b.session_id)));

    let mut pages: Vec<String> = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for s in &order {
        for (_, url) in &s.requests {
            if seen.insert(url.as_str()) {
                pages.push(url.clone());
            }
        }
    }
    let page_idx: HashMap<&str, usize> =
        pages.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();

    let users: Vec<String> = order.iter().map(|s| s.session_id.clone()).collect();
    let cells: Vec<Vec<u8>> = order
        .iter()
        .map(|s| {
            let mut row = vec![0u8; pages.len()];
            for (_, url) in &s.requests {
                row[page_idx[url.as_str()]] = 1;
            }
            row
        })
        .collect();
    PageViewMatrix::new(users, pages, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[u8]]) -> PageViewMatrix {
        PageViewMatrix::new(
            (0..rows.len()).map(|i| format!("U{}", i + 1)).collect(),
            (0..rows[0].len()).map(|p| format!("/p{}", p + 1)).collect(),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn session(id: &str, start: i64, urls: &[&str]) -> Session {
        Session {
            session_id: id.to_string(),
            visitor_key: id.split('#').next().unwrap().to_string(),
            requests: urls.iter().enumerate().map(|(i, u)| (start + i as i64, u.to_string())).collect(),
            start,
            end: start + urls.len() as i64 - 1,
        }
    }

    /// The five-user sample: U1 = [1,0,...,1,1] over P1, P2, P41, P42, P43.
    fn sample_five_users() -> PageViewMatrix {
        matrix(&[
            &[1, 0, 0, 1, 1],
            &[1, 1, 1, 0, 1],
            &[1, 1, 0, 0, 0],
            &[1, 0, 1, 0, 1],
            &[0, 0, 0, 1, 0],
        ])
    }

    #[test]
    fn sample_matrix_shape_and_cells() {
        let m = sample_five_users();
        assert_eq!((m.n_users(), m.n_pages()), (5, 5));
        assert_eq!(m.row(0)[0], 1);
        assert_eq!(m.row(0)[1], 0);
        assert_eq!(&m.row(0)[3..], &[1, 1]);
        assert_eq!(m.col_sum(0), 4);
        assert_eq!(m.row_sum(4), 1);
    }

    #[test]
    fn build_orders_rows_by_start_and_columns_by_first_appearance() {
        let sessions = vec![
            session("b#1", 100, &["/x", "/y"]),
            session("a#1", 50, &["/y", "/z"]),
            session("a#2", 200, &["/z"]),
        ];
        let m = build_pv_matrix(&sessions).unwrap();
        assert_eq!(m.users(), &["a#1".to_string(), "b#1".into(), "a#2".into()]);
        assert_eq!(m.pages(), &["/y".to_string(), "/z".into(), "/x".into()]);
        assert_eq!(m.row(0), &[1, 1, 0]);
        assert_eq!(m.row(1), &[1, 0, 1]);
        assert_eq!(m.row(2), &[0, 1, 0]);
        assert!(build_pv_matrix(&[]).is_err());
    }

    #[test]
    fn shared_page_has_a_one_per_session() {
        let sessions = vec![session("a#1", 0, &["/x"]), session("b#1", 10, &["/x"])];
        let m = build_pv_matrix(&sessions).unwrap();
        assert_eq!(m.col_sum(0), 2);
    }

    #[test]
    fn prune_drops_rows_then_columns() {
        // Row sums (1, 5, 5): the first row goes; afterwards column 5 is
        // only visited twice and goes too at min_url_sessions = 3.
        let m = matrix(&[
            &[1, 0, 0, 0, 0, 0],
            &[1, 1, 1, 1, 1, 0],
            &[1, 1, 1, 1, 0, 1],
        ]);
        let pruned = m.prune(5, 2).unwrap();
        assert_eq!(pruned.n_users(), 2);
        assert_eq!(pruned.n_pages(), 4);
        for u in 0..pruned.n_users() {
            assert!(pruned.row_sum(u) >= 4);
        }
        let pruned = m.prune(5, 1).unwrap();
        assert_eq!(pruned.n_pages(), 6);
    }

    #[test]
    fn prune_single_view_column_drops_at_default_threshold() {
        let m = matrix(&[
            &[1, 1, 1, 1, 1],
            &[1, 1, 1, 1, 0],
            &[1, 1, 1, 1, 0],
        ]);
        let pruned = m.prune(1, 3).unwrap();
        assert_eq!(pruned.n_pages(), 4);
    }

    #[test]
    fn prune_errors_when_everything_goes() {
        let m = matrix(&[&[1, 0], &[0, 1]]);
        assert!(matches!(m.prune(5, 3), Err(Error::TooSparse(_))));
    }

    #[test]
    fn train_test_split_is_positional_floor() {
        let m = PageViewMatrix::new(
            (0..122).map(|i| format!("U{}", i + 1)).collect(),
            vec!["/p".into()],
            vec![vec![1u8]; 122],
        )
        .unwrap();
        let (train, test) = m.split_train_test(0.8).unwrap();
        assert_eq!((train.n_users(), test.n_users()), (97, 25));
        assert_eq!(train.users()[0], "U1");
        assert_eq!(test.users()[0], "U98");

        let m = sample_five_users();
        let (train, test) = m.split_train_test(0.8).unwrap();
        assert_eq!((train.n_users(), test.n_users()), (4, 1));
        assert!(matrix(&[&[1, 0]]).split_train_test(0.8).is_err());
    }

    #[test]
    fn level_split_is_ceil_floor_on_columns() {
        let m = PageViewMatrix::new(
            vec!["u".into()],
            (0..43).map(|p| format!("/p{p}")).collect(),
            vec![vec![0u8; 43]],
        )
        .unwrap();
        let (l1, l2) = m.split_levels().unwrap();
        assert_eq!((l1.n_pages(), l2.n_pages()), (22, 21));

        let m = sample_five_users();
        let (l1, l2) = m.split_levels().unwrap();
        assert_eq!((l1.n_pages(), l2.n_pages()), (3, 2));

        let m = matrix(&[&[1, 0]]);
        let (l1, l2) = m.split_levels().unwrap();
        assert_eq!((l1.n_pages(), l2.n_pages()), (1, 1));
        assert!(matrix(&[&[1]]).split_levels().is_err());
    }

    #[test]
    fn splits_partition_the_matrix() {
        let m = sample_five_users();
        let (train, test) = m.split_train_test(0.6).unwrap();
        let mut users = train.users().to_vec();
        users.extend_from_slice(test.users());
        assert_eq!(users, m.users());
        let (l1, l2) = m.split_levels().unwrap();
        let mut pages = l1.pages().to_vec();
        pages.extend_from_slice(l2.pages());
        assert_eq!(pages, m.pages());
        for u in 0..m.n_users() {
            let mut row = l1.row(u).to_vec();
            row.extend_from_slice(l2.row(u));
            assert_eq!(row, m.row(u));
        }
    }

    #[test]
    fn tsv_round_trips_byte_identically() {
        let m = sample_five_users();
        let text = m.to_tsv();
        let parsed = PageViewMatrix::from_tsv(&text).unwrap();
        assert_eq!(parsed, m);
        assert_eq!(parsed.to_tsv(), text);
    }

    #[test]
    fn tsv_rejects_unknown_versions_and_bad_cells() {
        assert!(PageViewMatrix::from_tsv("PVMATRIX v2\n/p\nu\t1\n").is_err());
        assert!(PageViewMatrix::from_tsv("").is_err());
        assert!(PageViewMatrix::from_tsv("PVMATRIX v1\n/p\nu\t2\n").is_err());
        assert!(PageViewMatrix::from_tsv("PVMATRIX v1\n/p\nu\t1\nu\t0\n").is_err());
    }

    #[test]
    fn constructor_rejects_duplicates_and_bad_dimensions() {
        assert!(PageViewMatrix::new(
            vec!["a".into(), "a".into()],
            vec!["/p".into()],
            vec![vec![0], vec![1]],
        )
        .is_err());
        assert!(PageViewMatrix::new(
            vec!["a".into()],
            vec!["/p".into(), "/p".into()],
            vec![vec![0, 1]],
        )
        .is_err());
        assert!(PageViewMatrix::new(vec!["a".into()], vec!["/p".into()], vec![vec![0, 1]]).is_err());
        assert!(PageViewMatrix::new(vec!["a".into()], vec!["/p".into()], vec![vec![7]]).is_err());
    }
}
