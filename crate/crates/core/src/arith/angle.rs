use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 256;
pub const MIN_PRECISION_BITS: u32 = 128;

/// An eigenangle centre α, always stored reduced modulo 1.
///
/// Irrational angles are binary fixed-point approximations: `scaled / 2^bits`
/// with `|α − scaled/2^bits| ≤ 2^-bits`. Their irrationality measure is
/// assumed finite and never checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Angle {
    Rational { num: u64, den: u64 },
    Irrational { scaled: BigUint, bits: u32, label: String },
}

/// Closed interval with exact rational endpoints. Degenerate when exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn exact(v: BigRational) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigInt::from(2)
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    /// Half the width, rounded upward; a bound on |midpoint − x| for x inside.
    pub fn radius_f64(&self) -> f64 {
        if self.is_exact() {
            return 0.0;
        }
        let r = (self.width() / BigInt::from(2)).to_f64().unwrap_or(f64::INFINITY);
        r * (1.0 + f64::EPSILON) + f64::MIN_POSITIVE
    }
}

impl Angle {
    /// s/t reduced to lowest terms and taken modulo 1.
    pub fn rational(s: i64, t: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::Parse(format!("angle {s}/{t} has zero denominator")));
        }
        let t_i = t as i128;
        let s = (s as i128).rem_euclid(t_i);
        let g = s.gcd(&t_i).max(1);
        Ok(Angle::Rational {
            num: (s / g) as u64,
            den: (t_i / g) as u64,
        })
    }

    pub fn zero() -> Self {
        Angle::Rational { num: 0, den: 1 }
    }

    /// Fractional part of √d for a non-square d.
    pub fn sqrt(d: u64, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let root = d.sqrt();
        if root * root == d {
            return Err(Error::InvalidParameter(format!(
                "sqrt{d} is an integer; pass it as a rational angle"
            )));
        }
        // floor(√d · 2^bits) is within one unit of √d · 2^bits
        let scaled = (BigUint::from(d) << (2 * bits as usize)).sqrt();
        let whole = BigUint::from(root) << bits as usize;
        Ok(Angle::Irrational {
            scaled: scaled - whole,
            bits,
            label: format!("frac(sqrt{d})"),
        })
    }

    /// Fractional part of the golden ratio, (√5 − 1)/2.
    pub fn golden(bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let guard = 8usize;
        let work = bits as usize + guard;
        let root5 = (BigUint::from(5u32) << (2 * work)).sqrt();
        // (√5 − 1)/2 at `work` bits, then round away the guard bits
        let value = (root5 - (BigUint::one() << work)) >> 1usize;
        Ok(Angle::Irrational {
            scaled: (value + (BigUint::one() << (guard - 1))) >> guard,
            bits,
            label: "frac(golden)".into(),
        })
    }

    /// Fractional part of Euler's number, e − 2.
    pub fn euler(bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let guard = 32;
        let one = BigUint::one() << (bits + guard) as usize;
        // Σ_{n≥2} 1/n!, each term truncated (error < 1 unit per term)
        let mut term = one.clone();
        let mut sum = BigUint::zero();
        let mut n = 1u32;
        loop {
            term /= BigUint::from(n);
            if n >= 2 {
                if term.is_zero() {
                    break;
                }
                sum += &term;
            }
            n += 1;
        }
        Ok(Angle::Irrational {
            scaled: (sum + (BigUint::one() << (guard - 1) as usize)) >> guard as usize,
            bits,
            label: "frac(e)".into(),
        })
    }

    /// A decimal literal asserted to approximate an irrational number to
    /// `digits` significant digits.
    pub fn decimal(literal: &str, digits: u32) -> Result<Self> {
        let value = parse_decimal(literal)?;
        let bits = ((digits as f64) * std::f64::consts::LOG2_10).floor() as i64 - 1;
        if bits < MIN_PRECISION_BITS as i64 {
            return Err(Error::PrecisionExhausted(format!(
                "{digits} declared digits give only {bits} bits; at least {MIN_PRECISION_BITS} are required"
            )));
        }
        let bits = bits as u32;
        let frac = &value - value.floor();
        let scaled = (frac * BigRational::from_integer(BigInt::one() << bits as usize)).round();
        let scaled = scaled.to_integer().to_biguint().expect("non-negative");
        let top = BigUint::one() << bits as usize;
        Ok(Angle::Irrational {
            scaled: if scaled == top { BigUint::zero() } else { scaled },
            bits,
            label: format!("{literal}:{digits}"),
        })
    }

    /// Parse the command-line syntax: `2/5`, `0`, `0.25`, `sqrt2`,
    /// `frac(sqrt2)`, `golden`, `e`, `0.7071067811865475:50`.
    pub fn parse(text: &str, bits: u32) -> Result<Self> {
        let s = text.trim();
        if let Some(inner) = s.strip_prefix("frac(").and_then(|r| r.strip_suffix(')')) {
            return Self::parse(inner, bits);
        }
        if let Some(d) = s.strip_prefix("sqrt") {
            let d: u64 = d
                .trim_matches(|c| c == '(' || c == ')')
                .parse()
                .map_err(|_| Error::Parse(format!("bad sqrt argument in '{text}'")))?;
            return Self::sqrt(d, bits);
        }
        match s {
            "golden" | "phi" => return Self::golden(bits),
            "e" => return Self::euler(bits),
            _ => {}
        }
        if let Some((lit, digits)) = s.split_once(':') {
            let digits: u32 = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad digit count in '{text}'")))?;
            return Self::decimal(lit, digits);
        }
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad angle '{text}'")))?;
            let b: u64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad angle '{text}'")))?;
            return Self::rational(a, b);
        }
        let exact = parse_decimal(s)?;
        let frac = &exact - exact.floor();
        let num = frac.numer().to_u64();
        let den = frac.denom().to_u64();
        match (num, den) {
            (Some(n), Some(d)) => Self::rational(n as i64, d),
            _ => Err(Error::Parse(format!("angle '{text}' is too large a fraction"))),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Angle::Rational { .. })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Angle::Rational { num: 0, .. })
    }

    /// Working precision in bits; rational angles are exact.
    pub fn precision_bits(&self) -> Option<u32> {
        match self {
            Angle::Rational { .. } => None,
            Angle::Irrational { bits, .. } => Some(*bits),
        }
    }

    /// α as a certified interval.
    pub fn enclosure(&self) -> Interval {
        match self {
            Angle::Rational { num, den } => Interval::exact(BigRational::new(
                BigInt::from(*num),
                BigInt::from(*den),
            )),
            Angle::Irrational { scaled, bits, .. } => {
                let den = BigInt::one() << *bits as usize;
                let s = BigInt::from(scaled.clone());
                Interval {
                    lo: BigRational::new(&s - 1, den.clone()),
                    hi: BigRational::new(s + 1, den),
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Angle::Rational { num, den } => *num as f64 / *den as f64,
            Angle::Irrational { .. } => self.enclosure().to_f64(),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Rational { num, den } => write!(f, "{num}/{den}"),
            Angle::Irrational { label, bits, .. } => write!(f, "{label}@{bits}b"),
        }
    }
}

fn check_bits(bits: u32) -> Result<()> {
    if bits < MIN_PRECISION_BITS {
        return Err(Error::InvalidParameter(format!(
            "precision {bits} bits is below the minimum {MIN_PRECISION_BITS}"
        )));
    }
    Ok(())
}

/// Exact value of a plain decimal literal such as `-1.25` or `3`.
pub(crate) fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad decimal literal '{s}'"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let v = BigRational::new(numer, denom);
    Ok(if neg { -v } else { v })
}

/// ψ_α(j): the least positive element of {q − jα : q ∈ ℤ}, i.e.
/// `1 − frac(jα)`, or 1 when jα is an integer.
///
/// Exact for rational α. For irrational α the result encloses the true value
/// with radius `j · 2^-bits`; if that enclosure reaches an integer the
/// fractional part cannot be certified and `PrecisionExhausted` is returned.
pub fn psi_alpha(j: u64, alpha: &Angle) -> Result<Interval> {
    if j == 0 {
        return Err(Error::InvalidParameter("psi_alpha needs j >= 1".into()));
    }
    match alpha {
        Angle::Rational { num, den } => {
            let r = ((j as u128 * *num as u128) % *den as u128) as u64;
            let v = if r == 0 {
                BigRational::one()
            } else {
                BigRational::new(BigInt::from(den - r), BigInt::from(*den))
            };
            Ok(Interval::exact(v))
        }
        Angle::Irrational { scaled, bits, .. } => {
            let b = *bits as usize;
            let unit = BigInt::one() << b;
            let centre = BigInt::from(scaled.clone()) * BigInt::from(j);
            let radius = BigInt::from(j);
            let lo = &centre - &radius;
            let hi = &centre + &radius;
            let (q_lo, r_lo) = lo.div_mod_floor(&unit);
            let q_hi = hi.div_floor(&unit);
            if q_lo != q_hi || r_lo.is_zero() {
                return Err(Error::PrecisionExhausted(format!(
                    "frac({j}·α) is within {j}·2^-{bits} of an integer"
                )));
            }
            let frac_lo = BigRational::new(lo - &q_lo * &unit, unit.clone());
            let frac_hi = BigRational::new(hi - &q_lo * &unit, unit);
            debug_assert!(frac_hi.is_positive());
            Ok(Interval {
                lo: BigRational::one() - frac_hi,
                hi: BigRational::one() - frac_lo,
            })
        }
    }
}


/// Decimal expansion of `r` rounded half-away-from-zero to `digits`
/// fractional digits.
pub fn format_decimal(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (r * BigRational::from_integer(scale.clone())).round().to_integer();
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let (int_part, frac_part) = abs.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
}
