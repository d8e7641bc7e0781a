//! The logarithmic significant-digit law.
//!
//! First-digit probabilities are available in any base. The joint law over
//! the first `k` digits, and everything derived from it (marginals, moments,
//! distances to uniform, correlations), is base 10 only.
//!
//! Joint probabilities read the digit prefix as one integer `m = d1 d2 … dk`
//! and evaluate `log10(1 + 1/m)`. All sums are compensated.

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::sum::CompensatedSum;

/// Largest digit position for which marginals and moments are tabulated.
pub const MAX_POSITION: usize = 8;
/// Largest second position accepted by [`digit_correlation`].
pub const MAX_CORRELATION_POSITION: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, ModelError>;

fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(ModelError::Domain(msg.into()))
}

/// `log_base(1 + 1/d)`, the probability that the first significant digit in
/// `base` is `d`.
pub fn first_digit_prob(d: u32, base: u32) -> Result<f64> {
    if base < 2 {
        return domain(format!("base must be at least 2, got {base}"));
    }
    if d == 0 || d >= base {
        return domain(format!("first digit {d} outside 1..={} for base {base}", base - 1));
    }
    Ok((1.0 / f64::from(d)).ln_1p() / f64::from(base).ln())
}

/// Probability that the leading digits of a base-10 value read as the
/// integer `m` (so `m` in `10^(k-1)..10^k` fixes the first `k` digits).
pub(crate) fn prefix_prob(m: u64) -> f64 {
    (1.0 / m as f64).ln_1p() / std::f64::consts::LN_10
}

/// A base-10 digit prefix `d1 … dk` with `d1 != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointDigitSpec {
    digits: Vec<u8>,
}

impl JointDigitSpec {
    pub fn new(digits: &[u8]) -> Result<Self> {
        match digits.first() {
            None => return domain("digit prefix must be non-empty"),
            Some(0) => return domain("first significant digit cannot be 0"),
            Some(_) => {}
        }
        if digits.len() > 19 {
            return domain("digit prefix longer than 19 digits");
        }
        if let Some(d) = digits.iter().find(|d| **d > 9) {
            return domain(format!("{d} is not a decimal digit"));
        }
        Ok(Self {
            digits: digits.to_vec(),
        })
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// The prefix read as one integer.
    pub fn as_integer(&self) -> u64 {
        self.digits.iter().fold(0u64, |acc, d| acc * 10 + u64::from(*d))
    }
}

/// Joint probability `P(D1 = d1, …, Dk = dk) = log10(1 + 1/m)`.
pub fn joint_prob(spec: &JointDigitSpec) -> f64 {
    prefix_prob(spec.as_integer())
}

/// A probability vector over the possible values of one digit position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitDistribution {
    position: usize,
    base: u32,
    probabilities: Vec<f64>,
}

impl DigitDistribution {
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Smallest digit in the support: 1 for the first position, else 0.
    pub fn first_digit(&self) -> u32 {
        u32::from(self.position == 1)
    }

    pub fn digits(&self) -> impl Iterator<Item = u32> + '_ {
        (self.first_digit()..self.base).take(self.probabilities.len())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, digit: u32) -> Option<f64> {
        digit
            .checked_sub(self.first_digit())
            .and_then(|i| self.probabilities.get(i as usize).copied())
    }

    /// `E(D)` and `Var(D)`, the variance taken about the mean.
    pub fn moments(&self) -> Moments {
        let mean: CompensatedSum = self
            .digits()
            .zip(&self.probabilities)
            .map(|(d, p)| f64::from(d) * p)
            .collect();
        let mean = mean.value();
        let var: CompensatedSum = self
            .digits()
            .zip(&self.probabilities)
            .map(|(d, p)| (f64::from(d) - mean).powi(2) * p)
            .collect();
        Moments {
            mean,
            variance: var.value(),
        }
    }

    /// Half the L1 distance to the uniform distribution on the same support.
    pub fn tvd_from_uniform(&self) -> f64 {
        let u = 1.0 / self.probabilities.len() as f64;
        let s: CompensatedSum = self.probabilities.iter().map(|p| (p - u).abs()).collect();
        0.5 * s.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// The generalized first-digit law `log_b(1 + 1/n)` for `n` in `1..b`.
pub fn first_digit_distribution(base: u32) -> Result<DigitDistribution> {
    let probabilities = (1..base.max(2))
        .map(|d| first_digit_prob(d, base))
        .collect::<Result<Vec<_>>>()?;
    Ok(DigitDistribution {
        position: 1,
        base,
        probabilities,
    })
}

fn check_position(k: usize) -> Result<()> {
    if k == 0 || k > MAX_POSITION {
        return domain(format!("digit position must be in 1..={MAX_POSITION}, got {k}"));
    }
    Ok(())
}

fn compute_marginal(k: usize) -> DigitDistribution {
    if k == 1 {
        return first_digit_distribution(10).expect("base 10 is valid");
    }
    let lo = 10u64.pow(k as u32 - 1);
    let mut sums = [CompensatedSum::new(); 10];
    // every prefix of length k ends in each digit exactly once per block of 10
    for block in (lo..lo * 10).step_by(10) {
        for (d, s) in sums.iter_mut().enumerate() {
            s.add(prefix_prob(block + d as u64));
        }
    }
    DigitDistribution {
        position: k,
        base: 10,
        probabilities: sums.iter().map(CompensatedSum::value).collect(),
    }
}

static MARGINALS: [OnceLock<DigitDistribution>; MAX_POSITION] =
    [const { OnceLock::new() }; MAX_POSITION];

/// Distribution of the `k`-th significant decimal digit, `1 <= k <= 8`.
pub fn marginal_distribution(k: usize) -> Result<&'static DigitDistribution> {
    check_position(k)?;
    Ok(MARGINALS[k - 1].get_or_init(|| compute_marginal(k)))
}

pub fn moments(k: usize) -> Result<Moments> {
    Ok(marginal_distribution(k)?.moments())
}

/// Total variation distance of `D_k` from uniform on its support: `{1..9}`
/// for the first digit and `{0..9}` otherwise.
pub fn tvd_from_uniform(k: usize) -> Result<f64> {
    Ok(marginal_distribution(k)?.tvd_from_uniform())
}

/// Pearson correlation of `D_i` and `D_j`, `1 <= i < j <= 5`, from the exact
/// joint law over all `j`-digit prefixes.
pub fn digit_correlation(i: usize, j: usize) -> Result<f64> {
    if i == 0 || i >= j || j > MAX_CORRELATION_POSITION {
        return domain(format!(
            "correlation needs 1 <= i < j <= {MAX_CORRELATION_POSITION}, got ({i}, {j})"
        ));
    }
    let mi = moments(i)?;
    let mj = moments(j)?;
    let lo = 10u64.pow(j as u32 - 1);
    let div = 10u64.pow((j - i) as u32);
    let mut cov = CompensatedSum::new();
    for m in lo..lo * 10 {
        let di = ((m / div) % 10) as f64;
        let dj = (m % 10) as f64;
        cov.add((di - mi.mean) * (dj - mj.mean) * prefix_prob(m));
    }
    Ok(cov.value() / (mi.variance * mj.variance).sqrt())
}

/// Expected digit counts for a sample of `sample_size` values at position `k`.
pub fn expected_counts(k: usize, sample_size: u64) -> Result<Vec<f64>> {
    if sample_size == 0 {
        return domain("sample size must be at least 1");
    }
    let s = sample_size as f64;
    Ok(marginal_distribution(k)?
        .probabilities()
        .iter()
        .map(|p| p * s)
        .collect())
}
