//! Seeded ensembles of random multiplicative and additive processes.
//!
//! A multiplicative walker follows `N(t+1) = ξ·N(t)` and is stored as
//! `ln N`, so `ln N(t+1) = ln ξ + ln N(t)` is literally an additive walk in
//! log space. An additive walker follows `N(t+1) = ξ + N(t)` directly.
//!
//! Every walker owns a ChaCha8 stream selected by its index under the master
//! seed, so results do not depend on how walkers are partitioned and any
//! walker's noise can be replayed. Leading digits are read from the log value;
//! within `1e-12` of a digit boundary the walker is replayed and its value
//! rebuilt exactly as a product of the sampled `f64` factors.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::gof::{self, DigitCensus};
use crate::significand::leading_digits;

/// Name and version of the generator behind every run, echoed in output.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), stream = walker index";

/// Distance in `log_b` units below which a digit read is re-derived exactly.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// Runs longer than this record evenly spaced checkpoints instead of every step.
pub const MAX_RECORDED_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid noise: {0}")]
    InvalidNoise(String),
    #[error("invalid process: {0}")]
    InvalidSpec(String),
}

type Result<T> = std::result::Result<T, SimError>;

/// Distribution of the per-step noise `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Noise {
    /// `exp(Z)` with `Z ~ Normal(mu, sigma)`.
    LogNormal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    Constant { value: f64 },
    /// `ln ξ` for `ξ` drawn from the inner family.
    Ln { inner: Box<Noise> },
}

impl Noise {
    fn validate(&self) -> Result<()> {
        match self {
            Noise::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || *sigma < 0.0 {
                    return Err(SimError::InvalidNoise(format!("lognormal({mu}, {sigma})")));
                }
            }
            Noise::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(SimError::InvalidNoise(format!("uniform({lo}, {hi})")));
                }
            }
            Noise::Constant { value } if !value.is_finite() => {
                return Err(SimError::InvalidNoise(format!("constant({value})")));
            }
            Noise::Ln { inner } => {
                inner.validate()?;
                if !inner.strictly_positive() {
                    return Err(SimError::InvalidNoise(format!("ln of {inner}, which can be <= 0")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn strictly_positive(&self) -> bool {
        match self {
            Noise::LogNormal { .. } => true,
            Noise::Uniform { lo, .. } => *lo > 0.0,
            Noise::Constant { value } => *value > 0.0,
            Noise::Ln { .. } => false,
        }
    }

    fn sampler(&self) -> Sampler {
        match self {
            Noise::LogNormal { mu, sigma } => {
                Sampler::LogNormal(Normal::new(*mu, *sigma).expect("validated parameters"))
            }
            Noise::Uniform { lo, hi } => Sampler::Uniform(*lo, *hi),
            Noise::Constant { value } => Sampler::Constant(*value),
            Noise::Ln { inner } => Sampler::Ln(Box::new(inner.sampler())),
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::LogNormal { mu, sigma } => write!(f, "lognormal:{mu},{sigma}"),
            Noise::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Noise::Constant { value } => write!(f, "constant:{value}"),
            Noise::Ln { inner } => write!(f, "ln:{inner}"),
        }
    }
}

/// `FAMILY:PARAMS`, e.g. `lognormal:0,1`, `uniform:0.5,1.5`, `constant:10`,
/// `ln:lognormal:0,1`.
impl FromStr for Noise {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SimError::InvalidNoise(format!("cannot parse noise {s:?}"));
        let (family, params) = s.trim().split_once(':').ok_or_else(bad)?;
        if family == "ln" {
            let noise = Noise::Ln {
                inner: Box::new(params.parse()?),
            };
            noise.validate()?;
            return Ok(noise);
        }
        let values = params
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let noise = match (family, values.as_slice()) {
            ("lognormal", [mu, sigma]) => Noise::LogNormal { mu: *mu, sigma: *sigma },
            ("uniform", [lo, hi]) => Noise::Uniform { lo: *lo, hi: *hi },
            ("constant", [value]) => Noise::Constant { value: *value },
            _ => return Err(bad()),
        };
        noise.validate()?;
        Ok(noise)
    }
}

enum Sampler {
    LogNormal(Normal<f64>),
    Uniform(f64, f64),
    Constant(f64),
    Ln(Box<Sampler>),
}

impl Sampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::LogNormal(normal) => normal.sample(rng).exp(),
            Sampler::Uniform(lo, hi) => lo + (hi - lo) * rng.random::<f64>(),
            Sampler::Constant(v) => *v,
            Sampler::Ln(inner) => inner.sample(rng).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Multiplicative,
    Additive,
}

impl FromStr for ProcessKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mult" | "multiplicative" => Ok(ProcessKind::Multiplicative),
            "add" | "additive" => Ok(ProcessKind::Additive),
            _ => Err(SimError::InvalidSpec(format!("unknown process kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub noise: Noise,
    pub steps: usize,
    pub walkers: usize,
    pub initial_value: f64,
    pub base: u32,
    pub seed: u64,
}

impl Default for ProcessSpec {
    fn default() -> Self {
        Self {
            kind: ProcessKind::Multiplicative,
            noise: Noise::LogNormal { mu: 0.0, sigma: 1.0 },
            steps: 50,
            walkers: 10_000,
            initial_value: 1.0,
            base: 10,
            seed: 0,
        }
    }
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.kind == ProcessKind::Multiplicative && !self.noise.strictly_positive() {
            return Err(SimError::InvalidNoise(format!(
                "multiplicative noise must be strictly positive, {} is not",
                self.noise
            )));
        }
        if self.steps == 0 || self.walkers == 0 {
            return Err(SimError::InvalidSpec("steps and walkers must be at least 1".into()));
        }
        if !self.initial_value.is_finite() {
            return Err(SimError::InvalidSpec(format!(
                "initial value must be finite, got {}",
                self.initial_value
            )));
        }
        if self.kind == ProcessKind::Multiplicative && self.initial_value <= 0.0 {
            return Err(SimError::InvalidSpec(format!(
                "multiplicative start must be positive, got {}",
                self.initial_value
            )));
        }
        if self.base < 2 {
            return Err(SimError::InvalidSpec(format!("base must be at least 2, got {}", self.base)));
        }
        Ok(())
    }

    /// Every step up to 100 steps, else 100 evenly spaced checkpoints ending at `steps`.
    pub fn recorded_steps(&self) -> Vec<usize> {
        if self.steps <= MAX_RECORDED_STEPS {
            (1..=self.steps).collect()
        } else {
            (1..=MAX_RECORDED_STEPS)
                .map(|i| i * self.steps / MAX_RECORDED_STEPS)
                .collect()
        }
    }

    fn walker_rng(&self, walker: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(walker as u64);
        rng
    }

    /// The stored trajectory of one walker for steps `1..=steps`: `ln N(t)`
    /// for multiplicative processes, `N(t)` for additive ones.
    pub fn walker_trajectory(&self, walker: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let sampler = self.noise.sampler();
        let mut rng = self.walker_rng(walker);
        let mut state = self.initial_state();
        Ok((0..self.steps)
            .map(|_| {
                state = self.advance(state, &sampler, &mut rng);
                state
            })
            .collect())
    }

    fn initial_state(&self) -> f64 {
        match self.kind {
            ProcessKind::Multiplicative => self.initial_value.ln(),
            ProcessKind::Additive => self.initial_value,
        }
    }

    fn advance(&self, state: f64, sampler: &Sampler, rng: &mut ChaCha8Rng) -> f64 {
        let xi = sampler.sample(rng);
        match self.kind {
            ProcessKind::Multiplicative => state + xi.ln(),
            ProcessKind::Additive => state + xi,
        }
    }
}

/// Exact rational value of a finite nonzero `f64` as `num / den`.
fn dyadic(x: f64) -> (BigUint, BigUint) {
    let bits = x.abs().to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    if exp >= 0 {
        (BigUint::from(mantissa) << exp as usize, BigUint::one())
    } else {
        (BigUint::from(mantissa), BigUint::one() << exp.unsigned_abs() as usize)
    }
}

/// `floor(b^frac)` when `log_b` of the value is `log_value`, or `None` when
/// the fractional part lies within the guard of a digit boundary.
fn digit_from_log(log_value: f64, base: u32) -> Option<u32> {
    let frac = log_value - log_value.floor();
    let b = f64::from(base);
    let digit = (b.powf(frac).floor() as u32).clamp(1, base - 1);
    let lower = f64::from(digit).log(b);
    let upper = f64::from(digit + 1).log(b);
    (frac - lower > BOUNDARY_GUARD && upper - frac > BOUNDARY_GUARD).then_some(digit)
}

/// Leading digit of `|x|` in `base`; `None` for zero.
fn leading_digit_f64(x: f64, base: u32) -> Option<u32> {
    if x == 0.0 {
        return None;
    }
    digit_from_log(x.abs().log(f64::from(base)), base).or_else(|| {
        let (num, den) = dyadic(x);
        Some(leading_digits(&num, &den, 1, base).first())
    })
}

/// First-digit censuses of an ensemble at each recorded step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRun {
    pub spec: ProcessSpec,
    pub rng: &'static str,
    pub steps: Vec<usize>,
    pub censuses: Vec<DigitCensus>,
    /// Digit reads that needed an exact replay.
    pub exact_reads: u64,
}

impl EnsembleRun {
    pub fn final_census(&self) -> &DigitCensus {
        self.censuses.last().expect("at least one recorded step")
    }
}

struct WalkerReplay<'a> {
    spec: &'a ProcessSpec,
    walker: usize,
}

impl WalkerReplay<'_> {
    /// Exact leading digit of `N0 · Π ξ` over the first `step` factors.
    fn exact_digit(&self, step: usize) -> u32 {
        let sampler = self.spec.noise.sampler();
        let mut rng = self.spec.walker_rng(self.walker);
        let (mut num, mut den) = dyadic(self.spec.initial_value);
        for _ in 0..step {
            let (n, d) = dyadic(sampler.sample(&mut rng));
            num *= n;
            den *= d;
        }
        leading_digits(&num, &den, 1, self.spec.base).first()
    }
}

/// Simulates every walker and tallies first digits at the recorded steps.
pub fn run_ensemble(spec: &ProcessSpec) -> Result<EnsembleRun> {
    spec.validate()?;
    let steps = spec.recorded_steps();
    let mut censuses: Vec<DigitCensus> = steps
        .iter()
        .map(|_| DigitCensus::new(1, spec.base).expect("validated base"))
        .collect();
    let sampler = spec.noise.sampler();
    let ln_base = f64::from(spec.base).ln();
    let mut exact_reads = 0;

    for walker in 0..spec.walkers {
        let mut rng = spec.walker_rng(walker);
        let mut state = spec.initial_state();
        let mut next_record = 0;
        for t in 1..=spec.steps {
            state = spec.advance(state, &sampler, &mut rng);
            if steps.get(next_record) != Some(&t) {
                continue;
            }
            let census = &mut censuses[next_record];
            next_record += 1;
            let digit = match spec.kind {
                ProcessKind::Multiplicative => digit_from_log(state / ln_base, spec.base)
                    .or_else(|| {
                        exact_reads += 1;
                        Some(WalkerReplay { spec, walker }.exact_digit(t))
                    }),
                ProcessKind::Additive => leading_digit_f64(state, spec.base),
            };
            match digit {
                Some(d) => census.record(d).expect("digit within base"),
                None => census.exclude(1),
            }
        }
    }

    Ok(EnsembleRun {
        spec: spec.clone(),
        rng: RNG_ALGORITHM,
        steps,
        censuses,
        exact_reads,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub step: usize,
    pub d1: f64,
}

/// Total variation distance of the ensemble's first digits from
/// `log_b(1 + 1/n)` at each recorded step.
pub fn convergence_curve(spec: &ProcessSpec) -> Result<Vec<CurvePoint>> {
    curve_of(&run_ensemble(spec)?)
}

pub fn curve_of(run: &EnsembleRun) -> Result<Vec<CurvePoint>> {
    run.steps
        .iter()
        .zip(&run.censuses)
        .map(|(step, census)| {
            let d1 = gof::tvd_benford(census)
                .map_err(|e| SimError::InvalidSpec(format!("step {step}: {e}")))?;
            Ok(CurvePoint { step: *step, d1 })
        })
        .collect()
}
