//! Lossless significant-digit extraction.
//!
//! Numeric tokens are held as [`ExactDecimal`] (the decimal digits exactly as
//! written plus a power-of-ten exponent) and converted to other bases with
//! integer arithmetic only. Nothing here goes through a floating-point
//! logarithm, so values sitting exactly on a power of the base are classified
//! correctly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Largest number of significant digits a single extraction may request.
pub const MAX_DIGITS: usize = 18;

/// Largest decimal exponent accepted when converting to a base other than
/// ten. Base ten never needs the bound since it reads the digit string.
pub const MAX_CONVERSION_EXPONENT: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignificandError {
    #[error("malformed numeric token {token:?}: {reason}")]
    MalformedToken { token: String, reason: &'static str },
    #[error("value is zero and has no significant digit")]
    ZeroValue,
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u32),
    #[error("digit count must be between 1 and {MAX_DIGITS}, got {0}")]
    InvalidDigitCount(usize),
    #[error("decimal exponent {0} is too large for exact base conversion")]
    ExponentOutOfRange(i64),
}

type Result<T> = std::result::Result<T, SignificandError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// A decimal number exactly as written: `sign × 0.digits × 10^exponent`.
///
/// Leading zeros are folded into the exponent on construction, trailing zeros
/// are kept. Zero is stored as the single digit `"0"` with exponent 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactDecimal {
    sign: Sign,
    digits: String,
    exponent: i64,
}

impl ExactDecimal {
    pub fn new(sign: Sign, digits: &str, exponent: i64) -> Result<Self> {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(SignificandError::MalformedToken {
                token: digits.to_string(),
                reason: "digit string must be non-empty and contain only 0-9",
            });
        }
        let stripped = digits.trim_start_matches('0');
        if stripped.is_empty() {
            return Ok(Self {
                sign,
                digits: "0".to_string(),
                exponent: 0,
            });
        }
        let shift = (digits.len() - stripped.len()) as i64;
        let exponent = exponent
            .checked_sub(shift)
            .ok_or(SignificandError::ExponentOutOfRange(exponent))?;
        Ok(Self {
            sign,
            digits: stripped.to_string(),
            exponent,
        })
    }

    pub fn from_u64(value: u64) -> Self {
        let digits = value.to_string();
        let exponent = digits.len() as i64;
        Self::new(Sign::Plus, &digits, exponent).expect("integer digits are valid")
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn digits(&self) -> &str {
        &self.digits
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.digits == "0"
    }

    /// Nearest `f64`, for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        let magnitude: f64 = format!("0.{}e{}", self.digits, self.exponent)
            .parse()
            .unwrap_or(f64::NAN);
        match self.sign {
            Sign::Plus => magnitude,
            Sign::Minus => -magnitude,
        }
    }
}

impl fmt::Display for ExactDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == Sign::Minus {
            f.write_str("-")?;
        }
        if self.is_zero() {
            return f.write_str("0");
        }
        let len = self.digits.len() as i64;
        // padding an integer with zeros would add digits, so those go scientific
        if self.exponent > 0 && self.exponent <= len {
            if self.exponent == len {
                f.write_str(&self.digits)
            } else {
                let (int, frac) = self.digits.split_at(self.exponent as usize);
                write!(f, "{int}.{frac}")
            }
        } else if self.exponent <= 0 && self.exponent > -6 {
            f.write_str("0.")?;
            for _ in 0..(-self.exponent) {
                f.write_str("0")?;
            }
            f.write_str(&self.digits)
        } else {
            let (lead, rest) = self.digits.split_at(1);
            if rest.is_empty() {
                write!(f, "{lead}e{}", self.exponent - 1)
            } else {
                write!(f, "{lead}.{rest}e{}", self.exponent - 1)
            }
        }
    }
}

impl FromStr for ExactDecimal {
    type Err = SignificandError;

    fn from_str(s: &str) -> Result<Self> {
        parse_token(s, false)
    }
}

/// Length in bytes of the longest prefix of `bytes` matching the numeric
/// token grammar, or `None` when no prefix matches.
///
/// Grammar: optional sign, then either a digit run (optionally grouped by
/// commas every three digits when `separators` is set) with optional `.digits`
/// and optional `e[±]digits`, or `.digits` with no integer part.
pub fn match_token_prefix(bytes: &[u8], separators: bool) -> Option<usize> {
    let digit_at = |i: usize| bytes.get(i).is_some_and(u8::is_ascii_digit);
    let mut i = 0;
    if matches!(bytes.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while digit_at(i) {
        i += 1;
    }
    let int_len = i - int_start;
    if separators && (1..=3).contains(&int_len) {
        while bytes.get(i) == Some(&b',')
            && digit_at(i + 1)
            && digit_at(i + 2)
            && digit_at(i + 3)
            && !digit_at(i + 4)
        {
            i += 4;
        }
    }
    let mut has_frac = false;
    if bytes.get(i) == Some(&b'.') && digit_at(i + 1) {
        i += 1;
        while digit_at(i) {
            i += 1;
        }
        has_frac = true;
    }
    if int_len == 0 && !has_frac {
        return None;
    }
    if matches!(bytes.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if digit_at(j) {
            while digit_at(j) {
                j += 1;
            }
            i = j;
        }
    }
    Some(i)
}

/// Parses a complete numeric token. Zero is a valid result.
pub fn parse_token(text: &str, separators: bool) -> Result<ExactDecimal> {
    let malformed = |reason| SignificandError::MalformedToken {
        token: text.to_string(),
        reason,
    };
    let bytes = text.as_bytes();
    match match_token_prefix(bytes, separators) {
        Some(n) if n == bytes.len() => {}
        Some(_) => return Err(malformed("trailing characters after number")),
        None => return Err(malformed("not a number")),
    }

    let (sign, body) = match bytes[0] {
        b'-' => (Sign::Minus, &text[1..]),
        b'+' => (Sign::Plus, &text[1..]),
        _ => (Sign::Plus, text),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = body[pos + 1..]
                .parse()
                .map_err(|_| malformed("exponent out of range"))?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    let mut digits: String = int_part.chars().filter(|c| *c != ',').collect();
    let int_len = digits.len() as i64;
    digits.push_str(frac_part);
    let exponent = exp
        .checked_add(int_len)
        .ok_or_else(|| malformed("exponent out of range"))?;
    ExactDecimal::new(sign, &digits, exponent)
}

/// The first `k` significant digits of a nonzero value in some base, with
/// the power of the base carried by the leading digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignificantDigits {
    base: u32,
    digits: Vec<u32>,
    exponent: i64,
}

impl SignificantDigits {
    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn first(&self) -> u32 {
        self.digits[0]
    }

    /// The digit at 1-based significant position `position`.
    pub fn at(&self, position: usize) -> Option<u32> {
        position.checked_sub(1).and_then(|i| self.digits.get(i).copied())
    }
}

fn check_args(k: usize, base: u32) -> Result<()> {
    if base < 2 {
        return Err(SignificandError::InvalidBase(base));
    }
    if k == 0 || k > MAX_DIGITS {
        return Err(SignificandError::InvalidDigitCount(k));
    }
    Ok(())
}

/// First `k` significant digits of `|value|` in `base`.
pub fn extract_digits(value: &ExactDecimal, k: usize, base: u32) -> Result<SignificantDigits> {
    check_args(k, base)?;
    if value.is_zero() {
        return Err(SignificandError::ZeroValue);
    }
    if base == 10 {
        let mut digits: Vec<u32> = value
            .digits
            .bytes()
            .take(k)
            .map(|b| u32::from(b - b'0'))
            .collect();
        digits.resize(k, 0);
        return Ok(SignificantDigits {
            base,
            digits,
            exponent: value.exponent - 1,
        });
    }

    let trimmed = value.digits.trim_end_matches('0');
    let scale = value.exponent - trimmed.len() as i64;
    if scale.abs() > MAX_CONVERSION_EXPONENT {
        return Err(SignificandError::ExponentOutOfRange(value.exponent));
    }
    let mantissa: BigUint = trimmed.parse().expect("validated decimal digits");
    let ten_pow = BigUint::from(10u32).pow(scale.unsigned_abs() as u32);
    let (num, den) = if scale >= 0 {
        (mantissa * ten_pow, BigUint::one())
    } else {
        (mantissa, ten_pow)
    };
    Ok(leading_digits(&num, &den, k, base))
}

/// First `k` significant digits of a positive integer in `base`.
pub fn extract_digits_bigint(value: &BigUint, k: usize, base: u32) -> Result<SignificantDigits> {
    check_args(k, base)?;
    if value.is_zero() {
        return Err(SignificandError::ZeroValue);
    }
    Ok(leading_digits(value, &BigUint::one(), k, base))
}

/// First significant digit of a positive machine integer.
pub fn first_digit_u64(mut value: u64, base: u32) -> Result<u32> {
    if base < 2 {
        return Err(SignificandError::InvalidBase(base));
    }
    if value == 0 {
        return Err(SignificandError::ZeroValue);
    }
    let b = u64::from(base);
    while value >= b {
        value /= b;
    }
    Ok(value as u32)
}

fn approx_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_u64().expect("at most 64 bits remain") as f64;
    top.log2() + shift as f64
}

fn pow(base: u32, exp: u64) -> BigUint {
    BigUint::from(base).pow(u32::try_from(exp).expect("exponent fits in u32"))
}

/// Compares `num / den` with `base^exp`.
fn cmp_power(num: &BigUint, den: &BigUint, base: u32, exp: i64) -> Ordering {
    if exp >= 0 {
        num.cmp(&(den * pow(base, exp as u64)))
    } else {
        (num * pow(base, exp.unsigned_abs())).cmp(den)
    }
}

/// Leading `k` base-`base` digits of the positive rational `num / den`.
pub(crate) fn leading_digits(num: &BigUint, den: &BigUint, k: usize, base: u32) -> SignificantDigits {
    debug_assert!(!num.is_zero() && !den.is_zero());
    let estimate = (approx_log2(num) - approx_log2(den)) / f64::from(base).log2();
    let mut exponent = estimate.floor() as i64;
    while cmp_power(num, den, base, exponent) == Ordering::Less {
        exponent -= 1;
    }
    while cmp_power(num, den, base, exponent + 1) != Ordering::Less {
        exponent += 1;
    }

    let shift = k as i64 - 1 - exponent;
    let mut scaled = if shift >= 0 {
        (num * pow(base, shift as u64)) / den
    } else {
        num / (den * pow(base, shift.unsigned_abs()))
    };
    let b = BigUint::from(base);
    let mut digits = vec![0u32; k];
    for slot in digits.iter_mut().rev() {
        let (q, r) = scaled.div_rem(&b);
        *slot = r.to_u32().expect("remainder below base");
        scaled = q;
    }
    debug_assert!(scaled.is_zero() && digits[0] != 0);
    SignificantDigits {
        base,
        digits,
        exponent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dec(s: &str) -> ExactDecimal {
        s.parse().unwrap()
    }

    #[test]
    fn parses_leading_zero_fraction() {
        let v = dec("0.150");
        assert_eq!(v.digits(), "150");
        assert_eq!(v.exponent(), 0);
        assert_eq!(v.to_f64(), 0.150);
    }

    #[test]
    fn parses_scientific() {
        let v = dec("6.626e-34");
        assert_eq!(v.digits(), "6626");
        assert_eq!(v.exponent(), -33);
        assert_eq!(v.to_f64(), 6.626e-34);
    }

    #[test]
    fn separators_are_policy_gated() {
        let v = parse_token("2,300", true).unwrap();
        assert_eq!(v.digits(), "2300");
        assert_eq!(v.exponent(), 4);
        assert!(parse_token("2,300", false).is_err());
        assert!(parse_token("23,00", true).is_err());
        assert!(parse_token("1234,567", true).is_err());
        assert_eq!(parse_token("12,345,678.5", true).unwrap().digits(), "123456785");
    }

    #[test]
    fn grammar_edges() {
        assert_eq!(dec(".5").digits(), "5");
        assert_eq!(dec("+7").sign(), Sign::Plus);
        assert_eq!(dec("-7").sign(), Sign::Minus);
        assert_eq!(dec("1E3").exponent(), 4);
        for bad in ["", "-", ".", "5.", "1e", "0x1F", "1.2.3", "e5", "12a", "1,5"] {
            assert!(
                matches!(bad.parse::<ExactDecimal>(), Err(SignificandError::MalformedToken { .. })),
                "{bad:?} should be malformed"
            );
        }
    }

    #[test]
    fn zero_parses_but_has_no_digit() {
        for z in ["0", "0.00", "-0", "0e5", "000.000"] {
            let v = dec(z);
            assert!(v.is_zero());
            assert_eq!(extract_digits(&v, 1, 10), Err(SignificandError::ZeroValue));
            assert_eq!(extract_digits(&v, 1, 7), Err(SignificandError::ZeroValue));
        }
        assert_eq!(
            extract_digits_bigint(&BigUint::zero(), 1, 10),
            Err(SignificandError::ZeroValue)
        );
    }

    #[test]
    fn extraction_examples() {
        assert_eq!(extract_digits(&dec("0.150"), 1, 10).unwrap().digits(), &[1]);
        assert_eq!(extract_digits(&dec("129"), 3, 10).unwrap().digits(), &[1, 2, 9]);
        let ff = extract_digits(&dec("255"), 1, 16).unwrap();
        assert_eq!(ff.digits(), &[15]);
        assert_eq!(ff.exponent(), 1);
        assert_eq!(extract_digits(&dec("-0.0042"), 2, 10).unwrap().digits(), &[4, 2]);
        assert_eq!(extract_digits(&dec("7"), 4, 10).unwrap().digits(), &[7, 0, 0, 0]);
    }

    #[test]
    fn bigint_examples() {
        let d = |v: u64, k| extract_digits_bigint(&BigUint::from(v), k, 10).unwrap();
        assert_eq!(d(1024, 2).digits(), &[1, 0]);
        assert_eq!(d(120, 1).digits(), &[1]);
        assert_eq!(d(832_040, 1).digits(), &[8]);
        assert_eq!(d(832_040, 1).exponent(), 5);
    }

    #[test]
    fn fractional_values_in_other_bases() {
        // 0.75 = 0.11 in binary, 0.6 in base 8
        assert_eq!(extract_digits(&dec("0.75"), 2, 2).unwrap().digits(), &[1, 1]);
        let oct = extract_digits(&dec("0.75"), 1, 8).unwrap();
        assert_eq!(oct.digits(), &[6]);
        assert_eq!(oct.exponent(), -1);
        // 1/3 has no finite decimal form; 0.333... < 1/3 so base-3 reads 2,2,...
        let third = extract_digits(&dec("0.3333333333"), 3, 3).unwrap();
        assert_eq!(third.digits(), &[2, 2, 2]);
        assert_eq!(third.exponent(), -2);
    }

    #[test]
    fn exact_powers_of_the_base() {
        for base in [2u32, 3, 7, 16, 60] {
            for e in 0..40u32 {
                let v = BigUint::from(base).pow(e);
                let lo = &v - 1u32;
                let s = extract_digits_bigint(&v, 2, base).unwrap();
                assert_eq!(s.digits(), &[1, 0]);
                assert_eq!(s.exponent(), i64::from(e));
                if !lo.is_zero() {
                    assert_eq!(extract_digits_bigint(&lo, 1, base).unwrap().first(), base - 1);
                }
            }
        }
        let d = extract_digits(&dec("1e-300"), 1, 10).unwrap();
        assert_eq!((d.first(), d.exponent()), (1, -300));
        let b = extract_digits(&dec("0.0009765625"), 1, 2).unwrap();
        assert_eq!((b.first(), b.exponent()), (1, -10));
    }

    #[test]
    fn argument_validation() {
        let v = dec("12");
        assert_eq!(extract_digits(&v, 0, 10), Err(SignificandError::InvalidDigitCount(0)));
        assert_eq!(extract_digits(&v, 19, 10), Err(SignificandError::InvalidDigitCount(19)));
        assert_eq!(extract_digits(&v, 1, 1), Err(SignificandError::InvalidBase(1)));
        assert!(matches!(
            extract_digits(&dec("1e2000000"), 1, 3),
            Err(SignificandError::ExponentOutOfRange(_))
        ));
        assert_eq!(extract_digits(&dec("1e2000000"), 1, 10).unwrap().first(), 1);
    }

    #[test]
    fn first_digit_u64_matches_bigint() {
        for v in [1u64, 9, 10, 99, 100, 12345, u64::MAX] {
            for base in [2u32, 3, 10, 16] {
                assert_eq!(
                    first_digit_u64(v, base).unwrap(),
                    extract_digits_bigint(&BigUint::from(v), 1, base).unwrap().first()
                );
            }
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(dec("0.150").to_string(), "0.150");
        assert_eq!(dec("2300").to_string(), "2300");
        assert_eq!(dec("12.50").to_string(), "12.50");
        assert_eq!(dec("6.626e-34").to_string(), "6.626e-34");
        assert_eq!(dec("-0.0042").to_string(), "-0.0042");
        assert_eq!(dec("5e40").to_string(), "5e40");
    }

    fn arb_decimal() -> impl Strategy<Value = ExactDecimal> {
        (any::<bool>(), "[0-9]{1,25}", -400i64..400).prop_map(|(neg, digits, exp)| {
            let sign = if neg { Sign::Minus } else { Sign::Plus };
            ExactDecimal::new(sign, &digits, exp).unwrap()
        })
    }

    proptest! {
        #[test]
        fn format_then_parse_round_trips(v in arb_decimal()) {
            prop_assert_eq!(v.to_string().parse::<ExactDecimal>().unwrap(), v);
        }

        #[test]
        fn decimal_shift_only_moves_exponent(v in arb_decimal(), m in -50i64..50, k in 1usize..8) {
            prop_assume!(!v.is_zero());
            let shifted = ExactDecimal::new(v.sign(), v.digits(), v.exponent() + m).unwrap();
            let a = extract_digits(&v, k, 10).unwrap();
            let b = extract_digits(&shifted, k, 10).unwrap();
            prop_assert_eq!(a.digits(), b.digits());
            prop_assert_eq!(a.exponent() + m, b.exponent());
        }

        #[test]
        fn base_shift_only_moves_exponent(n in 1u64..u64::MAX, m in 0u32..30, base in 2u32..40, k in 1usize..6) {
            let x = BigUint::from(n);
            let y = &x * BigUint::from(base).pow(m);
            let a = extract_digits_bigint(&x, k, base).unwrap();
            let b = extract_digits_bigint(&y, k, base).unwrap();
            prop_assert_eq!(a.digits(), b.digits());
            prop_assert_eq!(a.exponent() + i64::from(m), b.exponent());
        }

        #[test]
        fn prefix_consistency(v in arb_decimal(), k in 2usize..=MAX_DIGITS, base in 2u32..20) {
            prop_assume!(!v.is_zero());
            let long = extract_digits(&v, k, base).unwrap();
            let short = extract_digits(&v, k - 1, base).unwrap();
            prop_assert_eq!(&long.digits()[..k - 1], short.digits());
            prop_assert!(long.first() >= 1 && long.digits().iter().all(|d| *d < base));
        }

        #[test]
        fn unit_interval_first_digit_is_floor(base in 2u32..=36, int in 1u32..36, frac in "[0-9]{0,12}") {
            prop_assume!(int < base);
            // x in [int, int+1) written in decimal; scale so base-b leading digit is int
            let v: ExactDecimal = format!("{int}.{frac}0").parse().unwrap();
            prop_assert_eq!(extract_digits(&v, 1, base).unwrap().first(), int);
        }
    }
}
