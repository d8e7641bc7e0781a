//! Exact generators for integer and rational-power series.
//!
//! Every generator is a lazy iterator over exact values (big integers, or a
//! certified interval for rational powers), and the digit streams are read
//! off those values with [`crate::significand`].

use std::fmt;
use std::str::FromStr;
use std::thread;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::gof::DigitCensus;
use crate::significand::{self, extract_digits_bigint, first_digit_u64};

/// Largest sieve bound accepted by [`Primes`].
pub const MAX_PRIME_BOUND: u64 = 100_000_000;

/// Seed pairs used for the pooled Fibonacci-type runs.
pub const DEFAULT_FIBONACCI_SEEDS: [(u64, u64); 7] =
    [(1, 1), (1, 2), (1, 3), (1, 4), (2, 5), (3, 7), (4, 9)];
pub const DEFAULT_FIBONACCI_TERMS: u64 = 1474;

/// Significant decimal digits carried by the rational-power interval.
const ALPHA_PRECISION_DECIMAL: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("invalid sequence parameters: {0}")]
    InvalidSpec(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

type Result<T> = std::result::Result<T, SequenceError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SequenceError::InvalidSpec(msg.into()))
}

fn first_digit(value: &BigUint, base: u32) -> u32 {
    extract_digits_bigint(value, 1, base)
        .expect("series terms are positive")
        .first()
}

/// A positive rational `p/q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    p: u64,
    q: u64,
}

impl Rational {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return invalid(format!("rational {p}/{q} must have positive parts"));
        }
        let g = p.gcd(&q);
        Ok(Self { p: p / g, q: q / g })
    }

    pub fn numer(&self) -> u64 {
        self.p
    }

    pub fn denom(&self) -> u64 {
        self.q
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Accepts `p/q`, an integer, or a plain decimal such as `1.007`.
impl FromStr for Rational {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SequenceError::InvalidSpec(format!("cannot read {s:?} as a rational"));
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse().map_err(|_| bad())?;
            let q = q.trim().parse().map_err(|_| bad())?;
            return Rational::new(p, q);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let q = 10u64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let p = format!("{int}{frac}").parse().map_err(|_| bad())?;
        Rational::new(p, q)
    }
}

/// `a(n+2) = a(n+1) + a(n)` from two positive seeds.
#[derive(Debug, Clone)]
pub struct Fibonacci {
    current: BigUint,
    next: BigUint,
    remaining: u64,
}

impl Fibonacci {
    pub fn new(a1: BigUint, a2: BigUint, terms: u64) -> Self {
        Self {
            current: a1,
            next: a2,
            remaining: terms,
        }
    }
}

impl Iterator for Fibonacci {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let following = &self.current + &self.next;
        let next = std::mem::replace(&mut self.next, following);
        Some(std::mem::replace(&mut self.current, next))
    }
}

/// Primes below a bound, from a segmented sieve of Eratosthenes.
#[derive(Debug, Clone)]
pub struct Primes {
    below: u64,
    sieving: Vec<u64>,
    segment: Vec<bool>,
    segment_start: u64,
    cursor: usize,
}

impl Primes {
    const SEGMENT: u64 = 1 << 16;

    pub fn below(bound: u64) -> Result<Self> {
        if bound > MAX_PRIME_BOUND {
            return invalid(format!("prime bound {bound} exceeds {MAX_PRIME_BOUND}"));
        }
        let root = (bound as f64).sqrt() as u64 + 1;
        let mut small = vec![true; root as usize + 1];
        let mut sieving = Vec::new();
        for i in 2..=root as usize {
            if small[i] {
                sieving.push(i as u64);
                for j in (i * i..=root as usize).step_by(i) {
                    small[j] = false;
                }
            }
        }
        let mut primes = Self {
            below: bound,
            sieving,
            segment: Vec::new(),
            segment_start: 0,
            cursor: 0,
        };
        primes.fill_segment();
        Ok(primes)
    }

    fn fill_segment(&mut self) {
        let lo = self.segment_start;
        let hi = (lo + Self::SEGMENT).min(self.below);
        self.segment.clear();
        self.segment.resize(hi.saturating_sub(lo) as usize, true);
        for n in lo..hi.min(2) {
            self.segment[(n - lo) as usize] = false;
        }
        for &p in &self.sieving {
            if p * p >= hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            for m in (start..hi).step_by(p as usize) {
                self.segment[(m - lo) as usize] = false;
            }
        }
        self.cursor = 0;
    }
}

impl Iterator for Primes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            while self.cursor < self.segment.len() {
                let i = self.cursor;
                self.cursor += 1;
                if self.segment[i] {
                    return Some(self.segment_start + i as u64);
                }
            }
            self.segment_start += Self::SEGMENT;
            if self.segment_start >= self.below {
                return None;
            }
            self.fill_segment();
        }
    }
}

/// `1!, 2!, …, n_max!`.
#[derive(Debug, Clone)]
pub struct Factorials {
    n: u64,
    n_max: u64,
    product: BigUint,
}

impl Factorials {
    pub fn new(n_max: u64) -> Self {
        Self {
            n: 0,
            n_max,
            product: BigUint::one(),
        }
    }
}

impl Iterator for Factorials {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.n >= self.n_max {
            return None;
        }
        self.n += 1;
        self.product *= self.n;
        Some(self.product.clone())
    }
}

/// `n^k` for `n` in a range.
#[derive(Debug, Clone)]
pub struct Powers {
    exponent: u32,
    range: std::ops::RangeInclusive<u64>,
}

impl Powers {
    pub fn new(exponent: u32, n_max: u64) -> Self {
        Self::over(exponent, 1..=n_max)
    }

    pub fn over(exponent: u32, range: std::ops::RangeInclusive<u64>) -> Self {
        Self { exponent, range }
    }
}

impl Iterator for Powers {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        self.range.next().map(|n| BigUint::from(n).pow(self.exponent))
    }
}

/// Binomial coefficients `C(n, r)` for `n < rows`, row by row.
#[derive(Debug, Clone)]
pub struct Pascal {
    rows: u64,
    n: u64,
    r: u64,
    value: BigUint,
}

impl Pascal {
    pub fn new(rows: u64) -> Self {
        Self {
            rows,
            n: 0,
            r: 0,
            value: BigUint::one(),
        }
    }
}

impl Iterator for Pascal {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.n >= self.rows {
            return None;
        }
        let out = self.value.clone();
        if self.r == self.n {
            self.n += 1;
            self.r = 0;
            self.value = BigUint::one();
        } else {
            self.value = &self.value * (self.n - self.r) / (self.r + 1);
            self.r += 1;
        }
        Some(out)
    }
}

/// Leading base-`b` digits of `α^n`, `n = 1, 2, …`, for rational `α > 1`.
///
/// The power is tracked as an interval `[lo, hi] · b^scale` whose endpoints
/// carry about 60 significant decimal digits; `lo` is rounded down and `hi`
/// up at every step so the true value never leaves the interval. A digit is
/// emitted only when both endpoints agree on it. Otherwise the term is
/// recomputed exactly as `p^n / q^n`.
#[derive(Debug, Clone)]
pub struct AlphaPowers {
    p: BigUint,
    q: BigUint,
    base: u32,
    n: u64,
    n_max: u64,
    lo: BigUint,
    hi: BigUint,
    scale: i64,
    precision: usize,
    powers: Vec<BigUint>,
    fallbacks: u64,
}

impl AlphaPowers {
    pub fn new(alpha: Rational, n_max: u64, base: u32) -> Result<Self> {
        Self::with_precision(alpha, n_max, base, ALPHA_PRECISION_DECIMAL)
    }

    pub(crate) fn with_precision(
        alpha: Rational,
        n_max: u64,
        base: u32,
        decimal_digits: f64,
    ) -> Result<Self> {
        if alpha.p <= alpha.q {
            return invalid(format!("alpha = {alpha} must exceed 1"));
        }
        if base < 2 {
            return invalid(format!("base must be at least 2, got {base}"));
        }
        let precision = (decimal_digits / f64::from(base).log10()).ceil() as usize;
        let mut powers = vec![BigUint::one()];
        let b = BigUint::from(base);
        for i in 1..=precision + 1 {
            let next = &powers[i - 1] * &b;
            powers.push(next);
        }
        let unit = powers[precision].clone();
        Ok(Self {
            p: BigUint::from(alpha.p),
            q: BigUint::from(alpha.q),
            base,
            n: 0,
            n_max,
            lo: unit.clone(),
            hi: unit,
            scale: -(precision as i64),
            precision,
            powers,
            fallbacks: 0,
        })
    }

    /// Terms whose digit needed exact recomputation.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks
    }

    /// Lower end of the current term's interval as `(mantissa, scale)`,
    /// meaning `mantissa · base^scale`.
    pub fn lower_bound(&self) -> (&BigUint, i64) {
        (&self.lo, self.scale)
    }

    fn power(&mut self, i: usize) -> &BigUint {
        let b = BigUint::from(self.base);
        while self.powers.len() <= i {
            let next = self.powers.last().expect("non-empty") * &b;
            self.powers.push(next);
        }
        &self.powers[i]
    }

    /// Number of base-`b` digits of a positive integer.
    fn digit_len(&mut self, x: &BigUint) -> usize {
        let estimate = (x.bits() as f64 / f64::from(self.base).log2()) as usize;
        let mut len = estimate.saturating_sub(1).max(1);
        while x < self.power(len - 1) {
            len -= 1;
        }
        while x >= self.power(len) {
            len += 1;
        }
        len
    }

    fn leading(&mut self, x: &BigUint) -> (usize, u32) {
        let len = self.digit_len(x);
        let lead = (x / self.power(len - 1)).to_u32().expect("single digit");
        (len, lead)
    }

    fn step(&mut self) {
        self.lo = &self.lo * &self.p / &self.q;
        self.hi = (&self.hi * &self.p).div_ceil(&self.q);
        let lo = self.lo.clone();
        let len = self.digit_len(&lo);
        if len > self.precision {
            let t = len - self.precision;
            let d = self.power(t).clone();
            self.lo /= &d;
            self.hi = self.hi.div_ceil(&d);
            self.scale += t as i64;
        }
    }

    fn exact_digit(&mut self) -> u32 {
        self.fallbacks += 1;
        let exp = u32::try_from(self.n).expect("exponent fits in u32");
        let num = self.p.pow(exp);
        let den = self.q.pow(exp);
        significand::leading_digits(&num, &den, 1, self.base).first()
    }
}

impl Iterator for AlphaPowers {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.n >= self.n_max {
            return None;
        }
        self.n += 1;
        self.step();
        let (lo, hi) = (self.lo.clone(), self.hi.clone());
        let (len_lo, lead_lo) = self.leading(&lo);
        let (len_hi, lead_hi) = self.leading(&hi);
        if len_lo == len_hi && lead_lo == lead_hi {
            Some(lead_lo)
        } else {
            Some(self.exact_digit())
        }
    }
}

pub fn fibonacci_digits(a1: BigUint, a2: BigUint, terms: u64, base: u32) -> impl Iterator<Item = u32> {
    Fibonacci::new(a1, a2, terms).map(move |v| first_digit(&v, base))
}

pub fn prime_digits(below: u64, base: u32) -> Result<impl Iterator<Item = u32>> {
    Ok(Primes::below(below)?.map(move |p| first_digit_u64(p, base).expect("primes are positive")))
}

pub fn alpha_power_digits(alpha: Rational, n_max: u64, base: u32) -> Result<AlphaPowers> {
    AlphaPowers::new(alpha, n_max, base)
}

pub fn factorial_digits(n_max: u64, base: u32) -> impl Iterator<Item = u32> {
    Factorials::new(n_max).map(move |v| first_digit(&v, base))
}

pub fn n_power_digits(exponent: u32, n_max: u64, base: u32) -> impl Iterator<Item = u32> {
    Powers::new(exponent, n_max).map(move |v| first_digit(&v, base))
}

pub fn pascal_digits(rows: u64, base: u32) -> impl Iterator<Item = u32> {
    Pascal::new(rows).map(move |v| first_digit(&v, base))
}

/// First-digit census of `n^k` for `n = 1..=n_max`, split across `workers`
/// threads whose partial censuses are merged.
pub fn n_power_census(exponent: u32, n_max: u64, base: u32, workers: usize) -> Result<DigitCensus> {
    let workers = workers.max(1) as u64;
    let chunk = n_max.div_ceil(workers).max(1);
    let partials: Vec<DigitCensus> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| w * chunk + 1)
            .filter(|start| *start <= n_max)
            .map(|start| {
                let end = (start + chunk - 1).min(n_max);
                s.spawn(move || {
                    DigitCensus::from_first_digits(
                        Powers::over(exponent, start..=end).map(|v| first_digit(&v, base)),
                        base,
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("census worker panicked"))
            .collect::<std::result::Result<_, _>>()
    })
    .map_err(|e| SequenceError::InvalidSpec(e.to_string()))?;
    let mut census =
        DigitCensus::new(1, base).map_err(|e| SequenceError::InvalidSpec(e.to_string()))?;
    for p in &partials {
        census.merge(p).expect("partials share a shape");
    }
    Ok(census)
}

/// Which series to generate, with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Series {
    Fibonacci { a1: BigUint, a2: BigUint, terms: u64 },
    Primes { below: u64 },
    PowerAlpha { alpha: Rational, n_max: u64 },
    Factorial { n_max: u64 },
    PowerN { exponent: u32, n_max: u64 },
    Pascal { rows: u64 },
}

impl Series {
    pub fn kind(&self) -> &'static str {
        match self {
            Series::Fibonacci { .. } => "fibonacci",
            Series::Primes { .. } => "primes",
            Series::PowerAlpha { .. } => "power_alpha",
            Series::Factorial { .. } => "factorial",
            Series::PowerN { .. } => "power_n",
            Series::Pascal { .. } => "pascal",
        }
    }
}

/// A series plus the base its digits are read in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    pub series: Series,
    pub base: u32,
}

impl SequenceSpec {
    pub fn new(series: Series, base: u32) -> Result<Self> {
        let spec = Self { series, base };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base < 2 {
            return invalid(format!("base must be at least 2, got {}", self.base));
        }
        match &self.series {
            Series::Fibonacci { a1, a2, terms } => {
                if a1.is_zero() || a2.is_zero() {
                    return invalid("fibonacci seeds must be positive");
                }
                if *terms == 0 {
                    return invalid("fibonacci needs at least one term");
                }
            }
            Series::Primes { below } => {
                if *below < 2 {
                    return invalid("prime bound must be at least 2");
                }
                if *below > MAX_PRIME_BOUND {
                    return invalid(format!("prime bound {below} exceeds {MAX_PRIME_BOUND}"));
                }
            }
            Series::PowerAlpha { alpha, n_max } => {
                if alpha.p <= alpha.q {
                    return invalid(format!("alpha = {alpha} must exceed 1"));
                }
                if *n_max == 0 || *n_max > u64::from(u32::MAX) {
                    return invalid("power_alpha needs 1 <= n <= 2^32-1");
                }
            }
            Series::Factorial { n_max } if *n_max == 0 => {
                return invalid("factorial needs n >= 1");
            }
            Series::PowerN { exponent, n_max } if *exponent == 0 || *n_max == 0 => {
                return invalid("power_n needs k >= 1 and n >= 1");
            }
            Series::Pascal { rows } if *rows == 0 => return invalid("pascal needs rows >= 1"),
            _ => {}
        }
        Ok(())
    }

    /// Stream of first significant digits.
    pub fn digits(&self) -> Result<Box<dyn Iterator<Item = u32> + Send>> {
        self.validate()?;
        let base = self.base;
        Ok(match &self.series {
            Series::Fibonacci { a1, a2, terms } => {
                Box::new(fibonacci_digits(a1.clone(), a2.clone(), *terms, base))
            }
            Series::Primes { below } => Box::new(prime_digits(*below, base)?),
            Series::PowerAlpha { alpha, n_max } => Box::new(alpha_power_digits(*alpha, *n_max, base)?),
            Series::Factorial { n_max } => Box::new(factorial_digits(*n_max, base)),
            Series::PowerN { exponent, n_max } => Box::new(n_power_digits(*exponent, *n_max, base)),
            Series::Pascal { rows } => Box::new(pascal_digits(*rows, base)),
        })
    }

    /// Stream of the series values in decimal. Integer series are exact;
    /// rational powers print the certified lower bound to 20 significant
    /// digits, truncated.
    pub fn values(&self) -> Result<Box<dyn Iterator<Item = String> + Send>> {
        self.validate()?;
        let show = |v: BigUint| v.to_string();
        Ok(match &self.series {
            Series::Fibonacci { a1, a2, terms } => {
                Box::new(Fibonacci::new(a1.clone(), a2.clone(), *terms).map(show))
            }
            Series::Primes { below } => Box::new(Primes::below(*below)?.map(|p| p.to_string())),
            Series::PowerAlpha { alpha, n_max } => {
                let mut powers = AlphaPowers::new(*alpha, *n_max, 10)?;
                Box::new(std::iter::from_fn(move || {
                    powers.next()?;
                    let (mantissa, scale) = powers.lower_bound();
                    let digits = mantissa.to_string();
                    let exp = scale + digits.len() as i64 - 1;
                    let shown = &digits[..digits.len().min(20)];
                    Some(format!("{}.{}e{}", &shown[..1], &shown[1..], exp))
                }))
            }
            Series::Factorial { n_max } => Box::new(Factorials::new(*n_max).map(show)),
            Series::PowerN { exponent, n_max } => Box::new(Powers::new(*exponent, *n_max).map(show)),
            Series::Pascal { rows } => Box::new(Pascal::new(*rows).map(show)),
        })
    }

    /// First-digit census of the whole series.
    pub fn census(&self) -> Result<DigitCensus> {
        if let Series::PowerN { exponent, n_max } = &self.series {
            let workers = thread::available_parallelism().map_or(1, |n| n.get());
            return n_power_census(*exponent, *n_max, self.base, workers);
        }
        DigitCensus::from_first_digits(self.digits()?, self.base)
            .map_err(|e| SequenceError::InvalidSpec(e.to_string()))
    }

    /// Reads the `kind` plus `key = value` config format. Blank lines and
    /// `#` comments are ignored; the kind line may be bare or `kind = …`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut kind: Option<(usize, String)> = None;
        let mut params: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) if k.trim() == "kind" => kind = Some((line_no, v.trim().to_string())),
                Some((k, v)) => params.push((line_no, k.trim().to_string(), v.trim().to_string())),
                None if kind.is_none() => kind = Some((line_no, line.to_string())),
                None => {
                    return Err(SequenceError::Config {
                        line: line_no,
                        message: format!("expected key = value, got {line:?}"),
                    })
                }
            }
        }
        let (kind_line, kind) = kind.ok_or(SequenceError::Config {
            line: 0,
            message: "missing kind".into(),
        })?;

        let mut base = 10u32;
        let mut get = |key: &str| -> Option<(usize, String)> {
            let pos = params.iter().position(|(_, k, _)| k == key)?;
            let (line, _, v) = params.remove(pos);
            Some((line, v))
        };
        fn num<T: FromStr>(entry: Option<(usize, String)>, key: &str, default: Option<T>) -> Result<T> {
            match entry {
                Some((line, v)) => v.parse().map_err(|_| SequenceError::Config {
                    line,
                    message: format!("cannot parse {key} = {v:?}"),
                }),
                None => default.ok_or_else(|| SequenceError::Config {
                    line: 0,
                    message: format!("missing parameter {key}"),
                }),
            }
        }
        if let Some(entry) = get("base") {
            base = num(Some(entry), "base", None)?;
        }
        let series = match kind.replace('-', "_").as_str() {
            "fibonacci" => Series::Fibonacci {
                a1: num(get("a1"), "a1", Some(BigUint::one()))?,
                a2: num(get("a2"), "a2", Some(BigUint::one()))?,
                terms: num(get("terms"), "terms", None)?,
            },
            "primes" => Series::Primes {
                below: num(get("below"), "below", None)?,
            },
            "power_alpha" => Series::PowerAlpha {
                alpha: match get("alpha") {
                    Some((line, v)) => v.parse().map_err(|e: SequenceError| SequenceError::Config {
                        line,
                        message: e.to_string(),
                    })?,
                    None => {
                        return Err(SequenceError::Config {
                            line: 0,
                            message: "missing parameter alpha".into(),
                        })
                    }
                },
                n_max: num(get("n"), "n", None)?,
            },
            "factorial" => Series::Factorial {
                n_max: num(get("n"), "n", None)?,
            },
            "power_n" => Series::PowerN {
                exponent: num(get("k"), "k", None)?,
                n_max: num(get("n"), "n", None)?,
            },
            "pascal" => Series::Pascal {
                rows: num(get("rows"), "rows", None)?,
            },
            other => {
                return Err(SequenceError::Config {
                    line: kind_line,
                    message: format!("unknown sequence kind {other:?}"),
                })
            }
        };
        if let Some((line, key, _)) = params.first() {
            return Err(SequenceError::Config {
                line: *line,
                message: format!("unknown parameter {key:?} for {kind}"),
            });
        }
        Self::new(series, base)
    }

    pub fn to_config_string(&self) -> String {
        let mut out = format!("kind = {}\n", self.series.kind());
        match &self.series {
            Series::Fibonacci { a1, a2, terms } => {
                out += &format!("a1 = {a1}\na2 = {a2}\nterms = {terms}\n")
            }
            Series::Primes { below } => out += &format!("below = {below}\n"),
            Series::PowerAlpha { alpha, n_max } => out += &format!("alpha = {alpha}\nn = {n_max}\n"),
            Series::Factorial { n_max } => out += &format!("n = {n_max}\n"),
            Series::PowerN { exponent, n_max } => out += &format!("k = {exponent}\nn = {n_max}\n"),
            Series::Pascal { rows } => out += &format!("rows = {rows}\n"),
        }
        out += &format!("base = {}\n", self.base);
        out
    }
}
