//! Numeric tokens from free text and delimited tables.
//!
//! Text scanning is line-local and never fails on content: anything that is
//! not a number is skipped. A token must not touch a letter or digit on
//! either side, so `A4`, `v2.0` and `4th` yield nothing.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::gof::{self, DigitCensus, GofError};
use crate::significand::{match_token_prefix, parse_token, ExactDecimal};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8 (byte offset {offset})")]
    Encoding { offset: usize },
    #[error("row {row}: {message}")]
    Format { row: u64, message: String },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, IngestError>;

/// A numeric token and where it came from (1-based line and column; for
/// tables the column is the field index).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NumberToken {
    #[serde(serialize_with = "display")]
    pub value: ExactDecimal,
    pub line: u64,
    pub column: u64,
    pub raw: String,
}

fn display<S: serde::Serializer>(v: &ExactDecimal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// A raw-token shape to exclude. `#` matches any digit; other characters
/// match themselves. The whole raw token must match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipShape(String);

impl SkipShape {
    pub fn new(pattern: &str) -> Self {
        Self(pattern.to_string())
    }

    /// Shapes for a named alias or a literal pattern. `year` expands to
    /// `19##` and `20##`.
    pub fn parse_all(pattern: &str) -> Vec<Self> {
        match pattern {
            "year" => vec![Self::new("19##"), Self::new("20##")],
            other => vec![Self::new(other)],
        }
    }

    pub fn matches(&self, raw: &str) -> bool {
        raw.len() == self.0.len()
            && self
                .0
                .bytes()
                .zip(raw.bytes())
                .all(|(p, c)| if p == b'#' { c.is_ascii_digit() } else { p == c })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanPolicy {
    pub thousands_separators: bool,
    pub skip_shapes: Vec<SkipShape>,
    /// Table columns to read by header name; all columns when `None`.
    pub columns: Option<Vec<String>>,
}

impl ScanPolicy {
    fn skipped(&self, raw: &str) -> bool {
        self.skip_shapes.iter().any(|s| s.matches(raw))
    }

    /// One-line description for report metadata.
    pub fn describe(&self) -> String {
        let shapes: Vec<&str> = self.skip_shapes.iter().map(|s| s.0.as_str()).collect();
        format!(
            "separators={} skip=[{}] columns=[{}]",
            self.thousands_separators,
            shapes.join(","),
            self.columns.as_deref().unwrap_or_default().join(",")
        )
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Streaming tokenizer over UTF-8 text.
#[derive(Debug, Clone)]
pub struct TextScanner<'a> {
    lines: std::str::Lines<'a>,
    line_no: u64,
    current: &'a str,
    pos: usize,
    policy: &'a ScanPolicy,
    exclusions: u64,
}

impl<'a> TextScanner<'a> {
    pub fn new(text: &'a str, policy: &'a ScanPolicy) -> Self {
        Self {
            lines: text.lines(),
            line_no: 0,
            current: "",
            pos: 0,
            policy,
            exclusions: 0,
        }
    }

    /// Tokens dropped so far by skip shapes.
    pub fn exclusions(&self) -> u64 {
        self.exclusions
    }

    fn prev_char(&self, i: usize) -> Option<char> {
        self.current[..i].chars().next_back()
    }

    fn skip_word(&mut self) {
        let bytes = self.current.as_bytes();
        self.pos += 1;
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] >= 0x80 || bytes[self.pos] == b'_') {
            self.pos += 1;
        }
        while !self.current.is_char_boundary(self.pos) {
            self.pos += 1;
        }
    }

    /// Next token on the current line, if any.
    fn next_in_line(&mut self) -> Option<NumberToken> {
        let bytes = self.current.as_bytes();
        let digit_at = |i: usize| bytes.get(i).is_some_and(u8::is_ascii_digit);
        while self.pos < bytes.len() {
            let i = self.pos;
            let c = bytes[i];
            let starts = c.is_ascii_digit()
                || (c == b'.' && digit_at(i + 1))
                || (matches!(c, b'+' | b'-')
                    && (digit_at(i + 1) || (bytes.get(i + 1) == Some(&b'.') && digit_at(i + 2))));
            if !starts {
                self.pos += 1;
                while !self.current.is_char_boundary(self.pos) {
                    self.pos += 1;
                }
                continue;
            }
            let prev = self.prev_char(i);
            if prev.is_some_and(is_word_char) || (c == b'.' && prev == Some('.')) {
                if c.is_ascii_digit() || c == b'.' {
                    self.skip_word();
                } else {
                    self.pos += 1;
                }
                continue;
            }
            let len = match_token_prefix(&bytes[i..], self.policy.thousands_separators)
                .expect("start position matches the grammar");
            let end = i + len;
            if self.current[end..].chars().next().is_some_and(is_word_char) {
                self.pos = end;
                self.skip_word();
                continue;
            }
            self.pos = end;
            let raw = &self.current[i..end];
            if self.policy.skipped(raw) {
                self.exclusions += 1;
                continue;
            }
            let value = parse_token(raw, self.policy.thousands_separators)
                .expect("matched tokens parse");
            return Some(NumberToken {
                value,
                line: self.line_no,
                column: self.current[..i].chars().count() as u64 + 1,
                raw: raw.to_string(),
            });
        }
        None
    }
}

impl Iterator for TextScanner<'_> {
    type Item = NumberToken;

    fn next(&mut self) -> Option<NumberToken> {
        loop {
            if let Some(tok) = self.next_in_line() {
                return Some(tok);
            }
            self.current = self.lines.next()?;
            self.line_no += 1;
            self.pos = 0;
        }
    }
}

/// Tokenizes UTF-8 text. Only invalid encoding is an error.
pub fn scan_text<'a>(bytes: &'a [u8], policy: &'a ScanPolicy) -> Result<TextScanner<'a>> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::Encoding {
        offset: e.valid_up_to(),
    })?;
    Ok(TextScanner::new(text, policy))
}

/// Tokens gathered from a whole input plus the count of entries excluded
/// (skip shapes, and for tables, cells that are not numbers).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenScan {
    pub tokens: Vec<NumberToken>,
    pub exclusions: u64,
}

impl TokenScan {
    pub fn from_text(bytes: &[u8], policy: &ScanPolicy) -> Result<Self> {
        let mut scanner = scan_text(bytes, policy)?;
        let tokens: Vec<NumberToken> = scanner.by_ref().collect();
        Ok(Self {
            tokens,
            exclusions: scanner.exclusions(),
        })
    }

    /// Census of the tokens' `position`-th significant digit; zeros and the
    /// scan's own exclusions go to the exclusion tally.
    pub fn census(&self, position: usize, base: u32) -> std::result::Result<DigitCensus, GofError> {
        let mut census = gof::build_census(self.tokens.iter().map(|t| &t.value), position, base)?;
        census.exclude(self.exclusions);
        Ok(census)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Tsv,
}

impl TableFormat {
    fn delimiter(self) -> u8 {
        match self {
            TableFormat::Csv => b',',
            TableFormat::Tsv => b'\t',
        }
    }
}

/// Reads numeric cells from a delimited file with a header row.
pub fn read_table(bytes: &[u8], format: TableFormat, policy: &ScanPolicy) -> Result<TokenScan> {
    std::str::from_utf8(bytes).map_err(|e| IngestError::Encoding {
        offset: e.valid_up_to(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let selected: Vec<usize> = match &policy.columns {
        None => (0..headers.len()).collect(),
        Some(names) => names
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| IngestError::MissingColumn(name.clone()))
            })
            .collect::<Result<_>>()?,
    };

    let mut scan = TokenScan::default();
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => IngestError::Format {
                row: pos.as_ref().map_or(0, |p| p.line()),
                message: format!("expected {expected_len} fields, found {len}"),
            },
            _ => IngestError::Csv(e),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        for &col in &selected {
            let cell = record.get(col).unwrap_or("").trim();
            if policy.skipped(cell) {
                scan.exclusions += 1;
                continue;
            }
            match parse_token(cell, policy.thousands_separators) {
                Ok(value) => scan.tokens.push(NumberToken {
                    value,
                    line,
                    column: col as u64 + 1,
                    raw: cell.to_string(),
                }),
                Err(_) => scan.exclusions += 1,
            }
        }
    }
    Ok(scan)
}

/// Writes tokens as `line,column,raw,value` CSV for audit trails.
pub fn write_tokens_csv<W: Write>(tokens: &[NumberToken], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["line", "column", "raw", "value"])?;
    for t in tokens {
        w.serialize(t_row(t))?;
    }
    w.flush()?;
    Ok(())
}

fn t_row(t: &NumberToken) -> (u64, u64, &str, String) {
    (t.line, t.column, t.raw.as_str(), t.value.to_string())
}
