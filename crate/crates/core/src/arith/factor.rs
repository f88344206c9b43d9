use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use super::primes;
use crate::{Error, Result};

/// How many primes a factorization looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeCutoff {
    /// Only the first `l` primes p_1 = 2, …, p_l.
    Index(usize),
    /// Complete factorization.
    Full,
}

/// Non-negative integer matrix e_{m,i}: row m is the m-th prime, column i a
/// slot. Only nonzero entries are stored, keyed by the prime itself.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExponentMatrix {
    columns: Vec<BTreeMap<u64, u32>>,
}

impl ExponentMatrix {
    pub fn from_columns(columns: Vec<BTreeMap<u64, u32>>) -> Self {
        let columns = columns
            .into_iter()
            .map(|c| c.into_iter().filter(|&(_, e)| e > 0).collect())
            .collect();
        Self { columns }
    }

    /// Build from dense columns whose row m (0-based) is the (m+1)-th prime.
    pub fn from_dense(columns: &[Vec<u32>]) -> Self {
        let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
        let table = primes::first(rows);
        Self::from_columns(
            columns
                .iter()
                .map(|col| col.iter().enumerate().map(|(m, &e)| (table[m], e)).collect())
                .collect(),
        )
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// Entry for the m-th prime (1-based) in column `i`.
    pub fn entry(&self, m: usize, i: usize) -> u32 {
        let p = primes::nth(m);
        self.columns[i].get(&p).copied().unwrap_or(0)
    }

    pub fn column(&self, i: usize) -> &BTreeMap<u64, u32> {
        &self.columns[i]
    }

    /// The p-part Π p^{e} reconstructed from column `i`.
    pub fn column_value(&self, i: usize) -> BigUint {
        self.columns[i]
            .iter()
            .fold(BigUint::one(), |acc, (&p, &e)| acc * BigUint::from(p).pow(e))
    }

    /// Columns permuted by `order` (column j of the result is column
    /// `order[j]` of `self`).
    pub fn select(&self, order: &[usize]) -> Self {
        Self {
            columns: order.iter().map(|&i| self.columns[i].clone()).collect(),
        }
    }
}

/// Exponent of every prime (up to the cutoff) in each value.
pub fn factor_exponents(values: &[u64], cutoff: PrimeCutoff) -> Result<ExponentMatrix> {
    if let Some(&bad) = values.iter().find(|&&v| v == 0) {
        return Err(Error::InvalidParameter(format!(
            "cannot factor {bad}; values must be positive"
        )));
    }
    let columns = values
        .iter()
        .map(|&v| match cutoff {
            PrimeCutoff::Index(l) => factor_limited(v, l),
            PrimeCutoff::Full => factor_full(v),
        })
        .collect();
    Ok(ExponentMatrix { columns })
}

fn factor_limited(mut v: u64, l: usize) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    for &p in primes::first(l).iter().take(l) {
        if v == 1 {
            break;
        }
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        if e > 0 {
            out.insert(p, e);
        }
    }
    out
}

fn factor_full(mut v: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= v {
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        if e > 0 {
            out.insert(p, e);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if v > 1 {
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

/// g_k(e) = Π_m p_m^{e_{m1}+…+e_{mk} − max_i e_{mi}}.
pub fn g_k(e: &ExponentMatrix) -> BigUint {
    let mut by_prime: BTreeMap<u64, (u32, u32)> = BTreeMap::new();
    for col in &e.columns {
        for (&p, &x) in col {
            let slot = by_prime.entry(p).or_insert((0, 0));
            slot.0 += x;
            slot.1 = slot.1.max(x);
        }
    }
    by_prime
        .into_iter()
        .fold(BigUint::one(), |acc, (p, (sum, max))| {
            acc * BigUint::from(p).pow(sum - max)
        })
}

pub fn lcm_u64(values: &[u64]) -> u64 {
    values.iter().fold(1u64, |acc, &v| acc.lcm(&v))
}
