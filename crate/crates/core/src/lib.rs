//! Significant-digit (Benford) analysis in arbitrary base.
//!
//! The crate is organised bottom-up:
//!
//! * [`significand`] turns numeric tokens and exact integers into their
//!   leading significant digits without going through floating point.
//! * [`model`] evaluates the logarithmic digit law: first-digit
//!   probabilities in any base, the joint base-10 law, marginals, moments,
//!   distances to uniform and inter-digit correlations.
//! * [`gof`] holds digit censuses and the chi-square, total-variation and
//!   maximum-deviation conformance statistics.
//! * [`sequences`] generates exact first-digit streams of Fibonacci-type
//!   recurrences, primes, rational powers, factorials, integer powers and
//!   binomial coefficients.
//! * [`sim`] runs seeded ensembles of multiplicative and additive random
//!   processes.
//! * [`ingest`] extracts numeric tokens from free text and delimited tables.
//! * [`report`] assembles serialisable report documents for the CLI.

pub mod gof;
pub mod ingest;
pub mod model;
pub mod report;
pub mod sequences;
pub mod significand;
pub mod sim;

mod sum;

pub use gof::{DigitCensus, GofError, GofReport, Verdict};
pub use model::{DigitDistribution, JointDigitSpec, ModelError, Moments};
pub use significand::{ExactDecimal, Sign, SignificandError, SignificantDigits};
