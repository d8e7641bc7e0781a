//! Digit censuses and first-digit conformance statistics.
//!
//! Three statistics compare observed first-digit frequencies `o_n` with the
//! logarithmic law `e_n = log_b(1 + 1/n)` over a sample of size `S`:
//!
//! * chi-square: `S · Σ (e_n − o_n)² / e_n`
//! * total variation distance: `½ Σ |o_n − e_n|`
//! * maximum deviation: `max |o_n − e_n|`
//!
//! Verdicts use the 8 degree-of-freedom critical values, so full reports are
//! limited to base-10 first-digit censuses.

use serde::Serialize;
use thiserror::Error;

use crate::model::{self, DigitDistribution, ModelError};
use crate::significand::{self, ExactDecimal, SignificantDigits, MAX_DIGITS};
use crate::sum::CompensatedSum;

/// Chi-square critical value at 5% for 8 degrees of freedom.
pub const CRITICAL_P05: f64 = 15.51;
/// Chi-square critical value at 1% for 8 degrees of freedom.
pub const CRITICAL_P01: f64 = 20.09;
/// Degrees of freedom of a base-10 first-digit test.
pub const DEGREES_OF_FREEDOM: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GofError {
    #[error("census is empty; no nonzero values were counted")]
    EmptyCensus,
    #[error("invalid census shape: position {position}, base {base}")]
    InvalidShape { position: usize, base: u32 },
    #[error("digit {digit} is outside the support of position {position} in base {base}")]
    DigitOutOfSupport { digit: u32, position: usize, base: u32 },
    #[error("cannot merge censuses of different shape")]
    ShapeMismatch,
    #[error("conformance tests need a first-digit census, got position {0}")]
    NotFirstDigit(usize),
    #[error("critical values are tabulated for base 10 only, got base {0}")]
    UnsupportedBase(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

type Result<T> = std::result::Result<T, GofError>;

/// Counts of each value of one significant-digit position over a sample,
/// plus the number of entries skipped because they had no such digit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitCensus {
    position: usize,
    base: u32,
    counts: Vec<u64>,
    exclusions: u64,
}

impl DigitCensus {
    pub fn new(position: usize, base: u32) -> Result<Self> {
        if position == 0 || position > MAX_DIGITS || base < 2 {
            return Err(GofError::InvalidShape { position, base });
        }
        let len = if position == 1 { base - 1 } else { base };
        Ok(Self {
            position,
            base,
            counts: vec![0; len as usize],
            exclusions: 0,
        })
    }

    pub fn from_counts(position: usize, base: u32, counts: Vec<u64>) -> Result<Self> {
        let mut census = Self::new(position, base)?;
        if counts.len() != census.counts.len() {
            return Err(GofError::InvalidShape { position, base });
        }
        census.counts = counts;
        Ok(census)
    }

    /// Census of a stream of first digits.
    pub fn from_first_digits<I: IntoIterator<Item = u32>>(digits: I, base: u32) -> Result<Self> {
        let mut census = Self::new(1, base)?;
        for d in digits {
            census.record(d)?;
        }
        Ok(census)
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn exclusions(&self) -> u64 {
        self.exclusions
    }

    /// Smallest digit in the support: 1 for the first position, else 0.
    pub fn first_digit(&self) -> u32 {
        u32::from(self.position == 1)
    }

    pub fn digits(&self) -> std::ops::Range<u32> {
        self.first_digit()..self.base
    }

    pub fn count(&self, digit: u32) -> u64 {
        digit
            .checked_sub(self.first_digit())
            .and_then(|i| self.counts.get(i as usize).copied())
            .unwrap_or(0)
    }

    pub fn sample_size(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn record(&mut self, digit: u32) -> Result<()> {
        let slot = digit
            .checked_sub(self.first_digit())
            .and_then(|i| self.counts.get_mut(i as usize))
            .ok_or(GofError::DigitOutOfSupport {
                digit,
                position: self.position,
                base: self.base,
            })?;
        *slot += 1;
        Ok(())
    }

    /// Records the census position of an extraction; extractions that are too
    /// short or in another base count as exclusions.
    pub fn record_digits(&mut self, digits: &SignificantDigits) {
        match digits.at(self.position) {
            Some(d) if digits.base() == self.base => {
                self.record(d).expect("extracted digit lies in the support");
            }
            _ => self.exclusions += 1,
        }
    }

    pub fn exclude(&mut self, n: u64) {
        self.exclusions += n;
    }

    pub fn merge(&mut self, other: &DigitCensus) -> Result<()> {
        if self.position != other.position || self.base != other.base {
            return Err(GofError::ShapeMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.exclusions += other.exclusions;
        Ok(())
    }

    /// Observed relative frequencies; empty censuses are an error.
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        let s = self.sample_size();
        if s == 0 {
            return Err(GofError::EmptyCensus);
        }
        Ok(self.counts.iter().map(|c| *c as f64 / s as f64).collect())
    }

    /// The law this census is compared against: `log_b(1 + 1/n)` for the
    /// first digit, the base-10 marginal for later positions.
    pub fn reference(&self) -> Result<DigitDistribution> {
        if self.position == 1 {
            Ok(model::first_digit_distribution(self.base)?)
        } else if self.base == 10 {
            Ok(model::marginal_distribution(self.position)?.clone())
        } else {
            Err(GofError::UnsupportedBase(self.base))
        }
    }
}

/// Census of the `position`-th significant digit over `values`. Zeros and
/// values that cannot be converted land in the exclusion tally.
pub fn build_census<'a, I>(values: I, position: usize, base: u32) -> Result<DigitCensus>
where
    I: IntoIterator<Item = &'a ExactDecimal>,
{
    let mut census = DigitCensus::new(position, base)?;
    for value in values {
        match significand::extract_digits(value, position, base) {
            Ok(d) => census.record_digits(&d),
            Err(_) => census.exclusions += 1,
        }
    }
    Ok(census)
}

/// Observed and law frequencies of a non-empty first-digit census.
fn paired_frequencies(census: &DigitCensus) -> Result<(Vec<f64>, Vec<f64>)> {
    if census.position != 1 {
        return Err(GofError::NotFirstDigit(census.position));
    }
    let observed = census.frequencies()?;
    let expected = census.reference()?.probabilities().to_vec();
    Ok((observed, expected))
}

pub fn chi_square(census: &DigitCensus) -> Result<f64> {
    let (observed, expected) = paired_frequencies(census)?;
    Ok(chi_square_of(&observed, &expected, census.sample_size()))
}

fn chi_square_of(observed: &[f64], expected: &[f64], sample_size: u64) -> f64 {
    let s: CompensatedSum = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (e - o).powi(2) / e)
        .collect();
    s.value() * sample_size as f64
}

/// Total variation distance `d1` between observed and law frequencies.
pub fn tvd_benford(census: &DigitCensus) -> Result<f64> {
    let (observed, expected) = paired_frequencies(census)?;
    Ok(tvd_of(&observed, &expected))
}

fn tvd_of(observed: &[f64], expected: &[f64]) -> f64 {
    let s: CompensatedSum = observed.iter().zip(expected).map(|(o, e)| (o - e).abs()).collect();
    0.5 * s.value()
}

/// Largest absolute frequency deviation and the digit where it occurs.
/// Ties go to the smaller digit.
pub fn max_deviation(census: &DigitCensus) -> Result<(f64, u32)> {
    let (observed, expected) = paired_frequencies(census)?;
    Ok(max_deviation_of(&observed, &expected, census.first_digit()))
}

fn max_deviation_of(observed: &[f64], expected: &[f64], first_digit: u32) -> (f64, u32) {
    let mut best = (0.0, first_digit);
    for (i, (o, e)) in observed.iter().zip(expected).enumerate() {
        let dev = (o - e).abs();
        if dev > best.0 {
            best = (dev, first_digit + i as u32);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    fn against(statistic: f64, critical: f64) -> Self {
        if statistic > critical {
            Verdict::Reject
        } else {
            Verdict::Accept
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        })
    }
}

/// All three statistics for a base-10 first-digit census, with verdicts at
/// the 5% and 1% levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub chi_square: f64,
    pub df: u32,
    pub d1: f64,
    pub d_max: f64,
    pub d_max_digit: u32,
    pub sample_size: u64,
    pub observed_freq: Vec<f64>,
    pub expected_freq: Vec<f64>,
    pub verdict_5pct: Verdict,
    pub verdict_1pct: Verdict,
}

pub fn full_report(census: &DigitCensus) -> Result<GofReport> {
    if census.position == 1 && census.base != 10 {
        return Err(GofError::UnsupportedBase(census.base));
    }
    let (observed, expected) = paired_frequencies(census)?;
    let sample_size = census.sample_size();
    let chi = chi_square_of(&observed, &expected, sample_size);
    let (d_max, d_max_digit) = max_deviation_of(&observed, &expected, 1);
    Ok(GofReport {
        chi_square: chi,
        df: DEGREES_OF_FREEDOM,
        d1: tvd_of(&observed, &expected),
        d_max,
        d_max_digit,
        sample_size,
        verdict_5pct: Verdict::against(chi, CRITICAL_P05),
        verdict_1pct: Verdict::against(chi, CRITICAL_P01),
        observed_freq: observed,
        expected_freq: expected,
    })
}
