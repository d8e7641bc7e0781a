//! Serializable analysis reports and their exit-status contract.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::gof::{self, DigitCensus, GofError, Verdict, CRITICAL_P01, CRITICAL_P05};

/// Significant digits kept for every floating-point number in a report.
pub const REPORT_SIG_DIGITS: usize = 12;

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECT: i32 = 2;

/// Rounds to [`REPORT_SIG_DIGITS`] significant digits. Both the JSON and the
/// CSV writers print the resulting `f64` with its shortest round-trip form,
/// so the two outputs carry the same numbers.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", REPORT_SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Level {
    #[default]
    P05,
    P01,
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "5" => Ok(Level::P05),
            "1" => Ok(Level::P01),
            other => Err(format!("level must be 5 or 1, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub input: String,
    pub policy: String,
    pub position: usize,
    pub base: u32,
    pub timestamp: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(input: impl Into<String>, policy: impl Into<String>, position: usize, base: u32) -> Self {
        Self {
            input: input.into(),
            policy: policy.into(),
            position,
            base,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Critical {
    pub p05: f64,
    pub p01: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub p05: Option<Verdict>,
    pub p01: Option<Verdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramRow {
    pub digit: u32,
    pub observed_freq: f64,
    pub benford_freq: f64,
}

/// A census together with everything derived from it.
///
/// Statistics are present for first-digit censuses. Verdicts and critical
/// values only exist in base 10. Later digit positions are report-only:
/// frequencies are filled in, statistics are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub meta: Meta,
    pub counts: Vec<u64>,
    pub exclusions: u64,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    pub chi_square: Option<f64>,
    pub df: Option<u32>,
    pub critical: Option<Critical>,
    pub d1: Option<f64>,
    pub d_max: Option<f64>,
    pub d_max_digit: Option<u32>,
    pub verdict: Verdicts,
}

impl ReportDocument {
    pub fn from_census(meta: Meta, census: &DigitCensus) -> Result<Self, GofError> {
        let observed = census.frequencies()?;
        let expected = census.reference()?.probabilities().to_vec();
        let mut doc = Self {
            meta,
            counts: census.counts().to_vec(),
            exclusions: census.exclusions(),
            observed: observed.into_iter().map(round_sig).collect(),
            expected: expected.into_iter().map(round_sig).collect(),
            chi_square: None,
            df: None,
            critical: None,
            d1: None,
            d_max: None,
            d_max_digit: None,
            verdict: Verdicts { p05: None, p01: None },
        };
        doc.meta.position = census.position();
        doc.meta.base = census.base();
        if census.position() != 1 {
            return Ok(doc);
        }
        if census.base() == 10 {
            let r = gof::full_report(census)?;
            doc.chi_square = Some(round_sig(r.chi_square));
            doc.df = Some(r.df);
            doc.critical = Some(Critical {
                p05: CRITICAL_P05,
                p01: CRITICAL_P01,
            });
            doc.d1 = Some(round_sig(r.d1));
            doc.d_max = Some(round_sig(r.d_max));
            doc.d_max_digit = Some(r.d_max_digit);
            doc.verdict = Verdicts {
                p05: Some(r.verdict_5pct),
                p01: Some(r.verdict_1pct),
            };
        } else {
            let (d_max, digit) = gof::max_deviation(census)?;
            doc.chi_square = Some(round_sig(gof::chi_square(census)?));
            doc.df = Some(census.base() - 2);
            doc.d1 = Some(round_sig(gof::tvd_benford(census)?));
            doc.d_max = Some(round_sig(d_max));
            doc.d_max_digit = Some(digit);
        }
        Ok(doc)
    }

    pub fn census(&self) -> Result<DigitCensus, GofError> {
        let mut c = DigitCensus::from_counts(self.meta.position, self.meta.base, self.counts.clone())?;
        c.exclude(self.exclusions);
        Ok(c)
    }

    fn first_digit(&self) -> u32 {
        if self.meta.position == 1 {
            1
        } else {
            0
        }
    }

    pub fn sample_size(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn histogram(&self) -> Vec<HistogramRow> {
        self.observed
            .iter()
            .zip(&self.expected)
            .enumerate()
            .map(|(i, (o, e))| HistogramRow {
                digit: self.first_digit() + i as u32,
                observed_freq: *o,
                benford_freq: *e,
            })
            .collect()
    }

    /// Rebuilds the document from its own counts and checks that every
    /// derived number comes out identical.
    pub fn verify(&self) -> Result<bool, GofError> {
        let again = Self::from_census(self.meta.clone(), &self.census()?)?;
        Ok(again == *self)
    }

    pub fn verdict_at(&self, level: Level) -> Option<Verdict> {
        match level {
            Level::P05 => self.verdict.p05,
            Level::P01 => self.verdict.p01,
        }
    }

    /// Process exit status: reject maps to 2, anything else to 0.
    pub fn exit_code(&self, level: Level) -> i32 {
        match self.verdict_at(level) {
            Some(Verdict::Reject) => EXIT_REJECT,
            _ => EXIT_ACCEPT,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Header line and one data row.
    pub fn to_csv(&self) -> String {
        let mut header = vec![
            "input", "position", "base", "sample_size", "exclusions", "chi_square", "df",
            "critical_p05", "critical_p01", "d1", "d_max", "d_max_digit", "verdict_p05", "verdict_p01",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        let mut row = vec![
            self.meta.input.clone(),
            self.meta.position.to_string(),
            self.meta.base.to_string(),
            self.sample_size().to_string(),
            self.exclusions.to_string(),
            opt(self.chi_square),
            opt(self.df),
            opt(self.critical.map(|c| c.p05)),
            opt(self.critical.map(|c| c.p01)),
            opt(self.d1),
            opt(self.d_max),
            opt(self.d_max_digit),
            opt(self.verdict.p05),
            opt(self.verdict.p01),
        ];
        for (h, count) in self.histogram().iter().zip(&self.counts) {
            header.push(format!("count_{}", h.digit));
            header.push(format!("observed_{}", h.digit));
            header.push(format!("expected_{}", h.digit));
            row.push(count.to_string());
            row.push(h.observed_freq.to_string());
            row.push(h.benford_freq.to_string());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        w.write_record(&row).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let m = &self.meta;
        let _ = writeln!(s, "input       {}", m.input);
        let _ = writeln!(s, "policy      {}", m.policy);
        let _ = writeln!(s, "position    {}  base {}", m.position, m.base);
        let _ = writeln!(s, "sample      {}  excluded {}", self.sample_size(), self.exclusions);
        let _ = writeln!(s, "chi_square  {}  df {}", opt(self.chi_square), opt(self.df));
        if let Some(c) = self.critical {
            let _ = writeln!(s, "critical    {} (5%)  {} (1%)", c.p05, c.p01);
        }
        let _ = writeln!(s, "d1          {}", opt(self.d1));
        let _ = writeln!(s, "d_max       {}  at digit {}", opt(self.d_max), opt(self.d_max_digit));
        let _ = writeln!(s, "verdict     {} (5%)  {} (1%)", opt(self.verdict.p05), opt(self.verdict.p01));
        let _ = writeln!(s);
        let _ = writeln!(s, "digit  count  observed        benford");
        for (h, count) in self.histogram().iter().zip(&self.counts) {
            let _ = writeln!(s, "{:>5}  {:>5}  {:<16}  {}", h.digit, count, h.observed_freq, h.benford_freq);
        }
        s
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "null".to_string(), |v| v.to_string())
}
