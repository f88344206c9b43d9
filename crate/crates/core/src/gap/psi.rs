//! ψ(G) = Π_p (1 − 1/p)^{|V|} S_G^p with a certified error bound.
//!
//! Write F(q) = (1 − q)^{|V|} S_G(q) = 1 + Σ_{n≥2} f_n q^n. Primes up to P
//! are multiplied in directly. For p > P we use the exact coefficients
//! f_2..f_N: the terms n ≤ 4 are summed against prime-zeta tails, the rest
//! are bounded, and the remainder beyond q^N is bounded through Cauchy's
//! estimate at q = 1/2, where all coefficients of S_G are non-negative.
//! P doubles until the bound meets the tolerance.

use super::hypergraph::{EdgeSet, Hypergraph};
use super::sg::{s_g_f64, s_g_f64_with, s_g_series};
use crate::arith::{primes, zeta};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Mutex;

const SERIES_ORDER: usize = 12;
const FIRST_P: u64 = 1 << 10;
/// Resource guard on the direct part of the product.
pub const MAX_PRIME_BOUND: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiValue {
    pub value: f64,
    /// Certified bound on |value − ψ|.
    pub err: f64,
}

impl PsiValue {
    pub const ONE: PsiValue = PsiValue { value: 1.0, err: 0.0 };

    /// Product with interval-style error propagation. Both factors lie in
    /// [0, 1].
    pub fn times(self, other: PsiValue) -> PsiValue {
        if self == Self::ONE {
            return other;
        }
        if other == Self::ONE {
            return self;
        }
        let value = self.value * other.value;
        let hi = (self.value + self.err) * (other.value + other.err);
        PsiValue { value, err: (hi - value) * (1.0 + 4.0 * f64::EPSILON) + 2.0 * f64::EPSILON * value }
    }
}

fn binomial_f(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// ψ of one connected component (or of any edge multiset; disconnected
/// input is fine, just slower).
pub fn psi_component(g: &EdgeSet, tolerance: f64) -> Result<PsiValue> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if g.edges.iter().all(|e| e.count_ones() <= 1) {
        return Ok(PsiValue::ONE);
    }
    let v = g.v;
    let n_max = SERIES_ORDER;
    let s = s_g_series(g, n_max);
    let f: Vec<f64> = (0..=n_max)
        .map(|n| {
            (0..=n.min(v))
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial_f(v, j) * s[n - j] as f64
                })
                .sum()
        })
        .collect();
    debug_assert_eq!(f[0], 1.0);
    debug_assert_eq!(f[1], 0.0);
    // Cauchy bound: |f_n| ≤ S(1/2)·(3/2)^v·2^n.
    let cauchy = s_g_f64(g, 0.5) * (1.0 + 1e-12) * 1.5f64.powi(v as i32);
    let weights: Vec<u32> = (0..1u64 << v).map(|u| g.weight(u)).collect();
    let per_prime_rounding = ((v as f64) * (1u64 << v) as f64 + 8.0) * f64::EPSILON;

    let mut bound = FIRST_P;
    loop {
        let table = primes::up_to(bound);
        let ps: Vec<u64> = table.iter().copied().take_while(|&p| p <= bound).collect();
        let mut log_head = 0.0;
        let mut rounding = 0.0;
        for &p in &ps {
            let q = 1.0 / p as f64;
            let ln_s = s_g_f64_with(v, &weights, q).ln();
            let ln_one_minus = v as f64 * (-q).ln_1p();
            log_head += ln_s + ln_one_minus;
            rounding += per_prime_rounding * (ln_s.abs() + ln_one_minus.abs() + 1e-300);
        }
        let pf = bound as f64;
        // Σ_{p>P} p^{-n} for n = 2, 3, 4 from the prime zeta function.
        let mut main = log_head;
        let mut tau_error = 0.0;
        for n in 2..=4usize.min(n_max) {
            let head: f64 = ps.iter().rev().map(|&p| (p as f64).powi(-(n as i32))).sum();
            let tau = (zeta::prime_zeta(n as u32) - head).max(0.0);
            main += f[n] * tau;
            tau_error += f[n].abs() * (1e-15 + ps.len() as f64 * f64::EPSILON * head);
        }
        let mut err = rounding + tau_error;
        // n = 5..N: Σ_{p>P} p^{-n} ≤ P^{1−n}/(n−1).
        for n in 5..=n_max {
            err += f[n].abs() * pf.powi(1 - n as i32) / (n - 1) as f64;
        }
        let shrink = 1.0 / (1.0 - 2.0 / pf);
        let two_n = 2f64.powi(n_max as i32 + 1);
        err += cauchy * two_n * pf.powi(-(n_max as i32)) / n_max as f64 * shrink;
        // |log(1+δ) − δ| ≤ δ² once |δ| ≤ 1/2, with |δ_p| ≤ D/p².
        let d: f64 = (2..=n_max).map(|n| f[n].abs() * pf.powi(2 - n as i32)).sum::<f64>()
            + cauchy * two_n * pf.powi(1 - n_max as i32) * shrink;
        let small = d / (pf * pf) <= 0.5;
        if small {
            err += d * d * pf.powi(-3) / 3.0;
            let value = main.exp();
            let abs_err = value * err.exp_m1() + 4.0 * f64::EPSILON * value;
            if abs_err <= tolerance {
                return Ok(PsiValue { value, err: abs_err });
            }
        }
        bound *= 2;
        if bound > MAX_PRIME_BOUND {
            return Err(Error::ResourceLimit(format!(
                "Euler product for ψ needs primes beyond {MAX_PRIME_BOUND} to reach tolerance {tolerance:e}"
            )));
        }
    }
}

/// ψ evaluator with a cache keyed by canonical component.
#[derive(Debug)]
pub struct PsiCache {
    tolerance: f64,
    cache: Mutex<HashMap<EdgeSet, PsiValue>>,
}

impl PsiCache {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance, cache: Mutex::new(HashMap::new()) }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, c: &EdgeSet) -> Result<PsiValue> {
        let key = c.canonical_form();
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        // Computed outside the lock; a racing insert stores the same value.
        let val = psi_component(&key, self.tolerance)?;
        self.cache.lock().expect("cache lock").insert(key, val);
        Ok(val)
    }

    /// ψ(G) as the product over connected components.
    pub fn psi(&self, g: &Hypergraph) -> Result<PsiValue> {
        g.components()
            .iter()
            .try_fold(PsiValue::ONE, |acc, c| Ok(acc.times(self.component(c)?)))
    }
}

/// One-off ψ(G) within `tolerance` per component.
pub fn psi_g(g: &Hypergraph, tolerance: f64) -> Result<PsiValue> {
    PsiCache::new(tolerance).psi(g)
}
