//! Common / Combined Log Format parsing and page-request filtering.

use chrono::DateTime;

use crate::error::{Error, Result};

/// Asset extensions dropped by [`filter_page_requests`] by default.
pub const DEFAULT_ASSET_EXTENSIONS: &[&str] = &[
    "css", "js", "png", "jpg", "jpeg", "gif", "ico", "svg", "woff", "woff2", "pdf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Common,
    Combined,
    /// Decide per line from the field count.
    Auto,
}

impl std::str::FromStr for LogFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common" => Ok(LogFormat::Common),
            "combined" => Ok(LogFormat::Combined),
            "auto" => Ok(LogFormat::Auto),
            other => Err(Error::InvalidParameter(format!(
                "unknown log format '{other}' (expected common, combined or auto)"
            ))),
        }
    }
}

/// One parsed web request. The visitor key is the client host joined with
/// the user agent when one is present (`host|agent`), the host alone
/// otherwise; the URL is normalized (query/fragment stripped, duplicate
/// slashes collapsed, lowercased).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub visitor_key: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub url: String,
    pub method: String,
    pub status: u16,
    pub user_agent: String,
}

impl LogRecord {
    /// Render the record back into a log line (Combined when a user agent
    /// is present, Common otherwise). Parsing the result reproduces the
    /// record exactly.
    pub fn to_log_line(&self) -> String {
        let host = self.visitor_key.split('|').next().unwrap_or("");
        let ts = DateTime::from_timestamp(self.timestamp, 0)
            .expect("valid epoch timestamp")
            .format("%d/%b/%Y:%H:%M:%S %z");
        let base = format!(
            "{host} - - [{ts}] \"{} {} HTTP/1.1\" {} -",
            self.method, self.url, self.status
        );
        if self.user_agent.is_empty() {
            base
        } else {
            format!("{base} \"-\" \"{}\"", self.user_agent)
        }
    }
}

enum Token<'a> {
    Plain(&'a str),
    Bracketed(&'a str),
    Quoted(&'a str),
}

fn tokenize(line: &str) -> Option<Vec<Token<'_>>> {
    let mut tokens = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' => i += 1,
            b'[' => {
                let end = line[i + 1..].find(']')? + i + 1;
                tokens.push(Token::Bracketed(&line[i + 1..end]));
                i = end + 1;
            }
            b'"' => {
                let end = line[i + 1..].find('"')? + i + 1;
                tokens.push(Token::Quoted(&line[i + 1..end]));
                i = end + 1;
            }
            _ => {
                let end = line[i..]
                    .find(|c| c == ' ' || c == '\t')
                    .map(|o| o + i)
                    .unwrap_or(line.len());
                tokens.push(Token::Plain(&line[i..end]));
                i = end;
            }
        }
    }
    Some(tokens)
}

/// Strip query string and fragment, collapse duplicate slashes, lowercase.
/// Absolute-URI request targets are reduced to their path.
pub fn normalize_url(target: &str) -> String {
    let mut path = target;
    if let Some(scheme) = path.find("://") {
        path = match path[scheme + 3..].find('/') {
            Some(slash) => &path[scheme + 3 + slash..],
            None => "/",
        };
    }
    if let Some(q) = path.find(['?', '#']) {
        path = &path[..q];
    }
    let mut out = String::with_capacity(path.len() + 1);
    if !path.starts_with('/') {
        out.push('/');
    }
    let mut prev_slash = false;
    for c in path.chars() {
        if c == '/' {
            if prev_slash {
                continue;
            }
            prev_slash = true;
        } else {
            prev_slash = false;
        }
        out.extend(c.to_lowercase());
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Parse one Common or Combined Log Format line. `line_no` is carried into
/// the error so the caller can decide between skipping and aborting.
pub fn parse_log_line(line: &str, format: LogFormat, line_no: usize) -> Result<LogRecord> {
    let err = |reason: &str| Error::LogParse { line: line_no, reason: reason.to_string() };
    let tokens = tokenize(line).ok_or_else(|| err("unterminated bracket or quote"))?;
    if tokens.len() < 7 {
        return Err(err(&format!("expected at least 7 fields, found {}", tokens.len())));
    }
    let host = match tokens[0] {
        Token::Plain(h) if !h.is_empty() => h,
        _ => return Err(err("missing host field")),
    };
    let ts_text = match tokens[3] {
        Token::Bracketed(t) => t,
        _ => return Err(err("expected [timestamp] as the fourth field")),
    };
    let timestamp = DateTime::parse_from_str(ts_text, "%d/%b/%Y:%H:%M:%S %z")
        .map_err(|e| err(&format!("malformed timestamp '{ts_text}': {e}")))?
        .timestamp();
    let request = match tokens[4] {
        Token::Quoted(r) => r,
        _ => return Err(err("expected quoted request as the fifth field")),
    };
    let mut parts = request.split_whitespace();
    let method = parts.next().ok_or_else(|| err("empty request token"))?;
    let target = parts.next().ok_or_else(|| err("request token has no URL"))?;
    let status: u16 = match tokens[5] {
        Token::Plain(s) => s.parse().map_err(|_| err(&format!("bad status '{s}'")))?,
        _ => return Err(err("expected numeric status field")),
    };

    let combined = match format {
        LogFormat::Common => false,
        LogFormat::Combined => true,
        LogFormat::Auto => tokens.len() >= 9,
    };
    let user_agent = if combined {
        match tokens.get(8) {
            Some(Token::Quoted(ua)) if *ua != "-" => ua.to_string(),
            Some(Token::Quoted(_)) => String::new(),
            _ => return Err(err("combined format needs quoted referer and user agent")),
        }
    } else {
        String::new()
    };
    let visitor_key = if user_agent.is_empty() {
        host.to_string()
    } else {
        format!("{host}|{user_agent}")
    };
    Ok(LogRecord {
        visitor_key,
        timestamp,
        url: normalize_url(target),
        method: method.to_string(),
        status,
        user_agent,
    })
}

/// Keep only successful GET requests for pages (not static assets).
/// `extensions` are compared without the leading dot, case-insensitively.
pub fn filter_page_requests<I>(records: I, extensions: &[String]) -> Vec<LogRecord>
where
    I: IntoIterator<Item = LogRecord>,
{
    records
        .into_iter()
        .filter(|r| {
            r.method == "GET"
                && (200..=399).contains(&r.status)
                && !extensions.iter().any(|e| has_extension(&r.url, e))
        })
        .collect()
}

pub fn default_extensions() -> Vec<String> {
    DEFAULT_ASSET_EXTENSIONS.iter().map(|s| s.to_string()).collect()
}

fn has_extension(url: &str, ext: &str) -> bool {
    let file = url.rsplit('/').next().unwrap_or(url);
    match file.rsplit_once('.') {
        Some((_, tail)) => tail.eq_ignore_ascii_case(ext),
        None => false,
    }
}

/// Decode raw log bytes: UTF-8 when valid, Latin-1 otherwise.
pub fn decode_log_bytes(bytes: Vec<u8>) -> String {
    match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => e.into_bytes().iter().map(|&b| b as char).collect(),
    }
}

/// Parse a whole log. In strict mode the first malformed line aborts;
/// otherwise malformed lines are skipped and counted. Handles CRLF and
/// skips blank lines.
pub fn parse_log_text(
    text: &str,
    format: LogFormat,
    strict: bool,
) -> Result<(Vec<LogRecord>, usize)> {
    let mut records = Vec::new();
    let mut skipped = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        match parse_log_line(line, format, idx + 1) {
            Ok(r) => records.push(r),
            Err(e) if strict => return Err(e),
            Err(_) => skipped += 1,
        }
    }
    Ok((records, skipped))
}
