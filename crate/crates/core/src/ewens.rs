//! Ewens(θ) random permutations, tracked only through their cycle type.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::arith::angle_parse_decimal;
use crate::{Error, Result};

/// The Ewens parameter θ > 0. Kept as an exact rational whenever the input
/// was one, so probabilities can be computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    exact: Option<BigRational>,
    value: f64,
}

impl Theta {
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("theta has zero denominator".into()));
        }
        Self::from_ratio(BigRational::new(num.into(), den.into()))
    }

    pub fn from_ratio(r: BigRational) -> Result<Self> {
        let value = r.to_f64().unwrap_or(f64::NAN);
        if r <= BigRational::zero() || !value.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {r}")));
        }
        Ok(Self { exact: Some(r), value })
    }

    pub fn from_f64(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {value}")));
        }
        Ok(Self { exact: None, value })
    }

    /// Accepts `3/2`, `1.5`, `2`, or anything `f64` parses (e.g. `1e-1`),
    /// the last only as an inexact value.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad theta '{text}'")))?;
            let b: i64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad theta '{text}'")))?;
            return Self::rational(a, b);
        }
        if let Ok(r) = angle_parse_decimal(s) {
            return Self::from_ratio(r);
        }
        let v: f64 = s.parse().map_err(|_| Error::Parse(format!("bad theta '{text}'")))?;
        Self::from_f64(v)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{}", self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EwensParams {
    n: u64,
    theta: Theta,
}

impl EwensParams {
    pub fn new(n: u64, theta: Theta) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        Ok(Self { n, theta })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }
}

/// Multiset of cycle lengths of a permutation of {1, …, n}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCycleType")]
pub struct CycleType {
    n: u64,
    #[serde(rename = "cycles")]
    counts: BTreeMap<u64, u64>,
}

#[derive(Deserialize)]
struct RawCycleType {
    n: u64,
    cycles: BTreeMap<u64, u64>,
}

impl TryFrom<RawCycleType> for CycleType {
    type Error = Error;

    fn try_from(raw: RawCycleType) -> Result<Self> {
        let ct = CycleType::from_counts(raw.cycles)?;
        if ct.n != raw.n {
            return Err(Error::InvalidParameter(format!(
                "cycle lengths sum to {} but n = {}",
                ct.n, raw.n
            )));
        }
        Ok(ct)
    }
}

impl CycleType {
    /// From a map `length -> count`; zero counts are dropped.
    pub fn from_counts(counts: BTreeMap<u64, u64>) -> Result<Self> {
        if counts.contains_key(&0) {
            return Err(Error::InvalidParameter("cycle length 0".into()));
        }
        let counts: BTreeMap<u64, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let n = counts.iter().map(|(j, c)| j * c).sum();
        if n == 0 {
            return Err(Error::InvalidParameter("empty cycle type".into()));
        }
        Ok(Self { n, counts })
    }

    pub fn from_lengths<I: IntoIterator<Item = u64>>(lengths: I) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for l in lengths {
            *counts.entry(l).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, j: u64) -> u64 {
        self.counts.get(&j).copied().unwrap_or(0)
    }

    pub fn num_cycles(&self) -> u64 {
        self.counts.values().sum()
    }

    /// The r largest cycle lengths L_1 ≥ L_2 ≥ …, repeated by multiplicity.
    pub fn largest(&self, r: usize) -> Vec<u64> {
        self.counts
            .iter()
            .rev()
            .flat_map(|(&j, &c)| std::iter::repeat_n(j, c as usize))
            .take(r)
            .collect()
    }

    /// Number of permutations of {1..n} with this cycle type, n!/Π j^{c_j} c_j!.
    pub fn class_size(&self) -> BigInt {
        let mut v = factorial(self.n);
        for (&j, &c) in &self.counts {
            v /= num_traits::pow(BigInt::from(j), c as usize) * factorial(c);
        }
        v
    }

    /// Every cycle type of S_n (integer partitions of n).
    pub fn all(n: u64) -> Vec<CycleType> {
        fn rec(rest: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<CycleType>) {
            if rest == 0 {
                out.push(CycleType::from_lengths(cur.iter().copied()).expect("nonempty"));
                return;
            }
            for part in (1..=rest.min(max)).rev() {
                cur.push(part);
                rec(rest - part, part, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, n, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|(j, c)| format!("{j}:{c}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Sequential-insertion (Chinese restaurant) construction of an Ewens
/// permutation. Element i opens a new cycle with probability θ/(θ+i−1) and
/// otherwise is inserted after a uniformly chosen earlier element.
///
/// The construction is consistent in n: advancing from n to n' > n extends
/// the same permutation, which couples all sizes on one random stream.
#[derive(Debug, Clone)]
pub struct ChineseRestaurant {
    theta: f64,
    owner: Vec<u32>,
    sizes: Vec<u64>,
}

impl ChineseRestaurant {
    pub fn new(theta: &Theta) -> Self {
        Self {
            theta: theta.value(),
            owner: Vec::new(),
            sizes: Vec::new(),
        }
    }

    pub fn len(&self) -> u64 {
        self.owner.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn advance_to<R: Rng + ?Sized>(&mut self, n: u64, rng: &mut R) {
        while (self.owner.len() as u64) < n {
            let placed = self.owner.len();
            let p_new = self.theta / (self.theta + placed as f64);
            let cycle = if placed == 0 || rng.random::<f64>() < p_new {
                self.sizes.push(0);
                self.sizes.len() - 1
            } else {
                self.owner[rng.random_range(0..placed)] as usize
            };
            self.sizes[cycle] += 1;
            self.owner.push(cycle as u32);
        }
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::from_lengths(self.sizes.iter().copied()).expect("at least one element placed")
    }
}

pub fn sample_cycle_type<R: Rng + ?Sized>(params: &EwensParams, rng: &mut R) -> CycleType {
    let mut crp = ChineseRestaurant::new(&params.theta);
    crp.advance_to(params.n, rng);
    crp.cycle_type()
}

/// Probability of a cycle type: exact when θ is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct Probability {
    pub exact: Option<BigRational>,
    pub value: f64,
}

/// Ewens sampling formula
/// n!/(θ(θ+1)…(θ+n−1)) · Π_j (θ/j)^{b_j} / b_j!.
pub fn cycle_type_pmf(params: &EwensParams, ct: &CycleType) -> Probability {
    if ct.n() != params.n {
        return Probability {
            exact: Some(BigRational::zero()),
            value: 0.0,
        };
    }
    match params.theta.exact() {
        Some(theta) => {
            let mut p = BigRational::from_integer(factorial(params.n));
            let mut rising = BigRational::one();
            for i in 0..params.n {
                rising *= theta + BigRational::from_integer(BigInt::from(i));
            }
            p /= rising;
            for (&j, &b) in ct.counts() {
                let base = theta / BigRational::from_integer(BigInt::from(j));
                p *= num_traits::pow(base, b as usize);
                p /= BigRational::from_integer(factorial(b));
            }
            let value = p.to_f64().unwrap_or(f64::NAN);
            Probability { exact: Some(p), value }
        }
        None => {
            let theta = params.theta.value();
            let n = params.n as f64;
            let mut log_p = ln_gamma(n + 1.0) - (ln_gamma(theta + n) - ln_gamma(theta));
            for (&j, &b) in ct.counts() {
                log_p += b as f64 * (theta.ln() - (j as f64).ln()) - ln_gamma(b as f64 + 1.0);
            }
            Probability { exact: None, value: log_p.exp() }
        }
    }
}
