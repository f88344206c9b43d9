//! Limiting point processes built from GEM(θ) sticks, geometric prime
//! exponents and per-subset phases.
//!
//! A replicate is drawn in a fixed order from its own stream: sticks, then
//! the prime-exponent column of every stick, then unit-group uniforms
//! (rational kind), then the continuous phase of every k-subset in
//! lexicographic order (irrational kind).

use crate::arith::{primes, zeta};
use crate::error::{Error, Result};
use crate::mc::{domain, StreamFactory};
use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Default prime cutoff: exponents are sampled for the first 10^4 primes.
pub const DEFAULT_PRIME_CUTOFF: usize = 10_000;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_R_MAX: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StickSample {
    pub sticks: Vec<f64>,
    pub residual: f64,
    pub theta: f64,
}

impl StickSample {
    pub fn len(&self) -> usize {
        self.sticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sticks.is_empty()
    }

    /// Decreasing rearrangement of the sticks drawn so far.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.sticks.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Break one more stick. U has density θ(1−x)^{θ−1}, so 1 − U = V^{1/θ}.
    fn extend<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let v = 1.0 - rng.random::<f64>();
        let keep = v.powf(1.0 / self.theta);
        self.sticks.push(self.residual * (1.0 - keep));
        self.residual *= keep;
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")))
    }
}

pub fn sample_gem<R: Rng + ?Sized>(theta: f64, r: usize, rng: &mut R) -> Result<StickSample> {
    check_theta(theta)?;
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let mut s = StickSample { sticks: Vec::with_capacity(r), residual: 1.0, theta };
    for _ in 0..r {
        s.extend(rng);
    }
    Ok(s)
}

/// Density of the largest PD(θ) part on (1/2, 1).
pub fn pd_largest_density(x: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(x > 0.5 && x < 1.0) {
        return Err(Error::Domain(format!("largest-part density needs 1/2 < x < 1, got {x}")));
    }
    Ok(theta * (1.0 - x).powf(theta - 1.0) / x)
}

/// How many sticks to break.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    Fixed(usize),
    /// Break sticks until the residual mass drops below `epsilon`, capped at
    /// `r_max`.
    Adaptive { epsilon: f64, r_max: usize },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Adaptive { epsilon: DEFAULT_EPSILON, r_max: DEFAULT_R_MAX }
    }
}

impl Truncation {
    fn validate(&self, k: usize) -> Result<()> {
        match *self {
            Truncation::Fixed(r) if r < k => {
                Err(Error::InvalidParameter(format!("need r >= k, got r={r}, k={k}")))
            }
            Truncation::Adaptive { epsilon, r_max } => {
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")));
                }
                if r_max < k {
                    return Err(Error::InvalidParameter(format!("need r_max >= k, got {r_max}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, theta: f64, k: usize, rng: &mut R) -> StickSample {
        let mut s = StickSample { sticks: Vec::new(), residual: 1.0, theta };
        match *self {
            Truncation::Fixed(r) => {
                for _ in 0..r {
                    s.extend(rng);
                }
            }
            Truncation::Adaptive { epsilon, r_max } => {
                while s.len() < r_max && (s.len() < k.max(1) || s.residual >= epsilon) {
                    s.extend(rng);
                }
            }
        }
        s
    }
}

/// Which limiting process to realize. Only the rationality class of the
/// angle matters for the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaKind {
    Irrational,
    Rational(u64),
    Zero,
}

impl AlphaKind {
    /// Parse `irr`, `rat:T` or `zero`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "irr" | "irrational" => Ok(AlphaKind::Irrational),
            "zero" | "0" => Ok(AlphaKind::Zero),
            _ => {
                let den = t
                    .strip_prefix("rat:")
                    .ok_or_else(|| Error::Parse(format!("unknown kind '{text}', expected irr, rat:T or zero")))?;
                let den: u64 = den.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in '{text}'")))?;
                if den == 0 {
                    return Err(Error::Parse("rational kind needs t >= 1".into()));
                }
                Ok(AlphaKind::Rational(den))
            }
        }
    }

    fn has_atom(&self) -> bool {
        !matches!(self, AlphaKind::Irrational)
    }
}

impl std::fmt::Display for AlphaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaKind::Irrational => write!(f, "irr"),
            AlphaKind::Rational(t) => write!(f, "rat:{t}"),
            AlphaKind::Zero => write!(f, "zero"),
        }
    }
}

/// Sparse column of prime exponents: (0-based prime index, exponent ≥ 1),
/// increasing in the index.
pub type SparseColumn = Vec<(u32, u32)>;

/// The array X_{m,i} restricted to primes of index ≤ L. Columns are drawn
/// lazily, one per stick, and kept for reuse across subsets.
#[derive(Debug, Clone)]
pub struct PrimeExponentArray {
    cutoff: usize,
    primes: std::sync::Arc<Vec<u64>>,
    columns: Vec<SparseColumn>,
}

impl PrimeExponentArray {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParameter("prime cutoff must be at least 1".into()));
        }
        Ok(Self { cutoff, primes: primes::first(cutoff), columns: Vec::new() })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &SparseColumn {
        &self.columns[i]
    }

    pub fn prime(&self, m: u32) -> u64 {
        self.primes[m as usize]
    }

    /// X_{m,i} with 1-based prime index m and 0-based column i.
    pub fn entry(&self, m: usize, i: usize) -> u32 {
        self.columns[i]
            .iter()
            .find(|&&(idx, _)| idx as usize + 1 == m)
            .map_or(0, |&(_, e)| e)
    }

    /// Make sure columns 0..n exist.
    pub fn ensure_columns<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) {
        while self.columns.len() < n {
            let c = self.draw_column(rng);
            self.columns.push(c);
        }
    }

    /// Sparse draw of one column. The events X ≥ 1 are independent with
    /// decreasing probabilities 1/p_m, so they are generated by thinning a
    /// Bernoulli envelope restarted after every candidate.
    fn draw_column<R: Rng + ?Sized>(&self, rng: &mut R) -> SparseColumn {
        let mut col = SparseColumn::new();
        let mut m = 0usize;
        while m < self.cutoff {
            let q = 1.0 / self.primes[m] as f64;
            let u = 1.0 - rng.random::<f64>();
            let skip = (u.ln() / (-q).ln_1p()).floor();
            if skip >= (self.cutoff - m) as f64 {
                break;
            }
            let cand = m + skip as usize;
            let qc = 1.0 / self.primes[cand] as f64;
            if rng.random::<f64>() * q < qc {
                let mut e = 1u32;
                while rng.random::<f64>() < qc {
                    e += 1;
                }
                col.push((cand as u32, e));
            }
            m = cand + 1;
        }
        col
    }

    /// g_k of the selected columns, with the part coming from primes of
    /// index < `below` (0-based) split off: returns (g_k, Π_{m<below} p^{max e}).
    pub(crate) fn g_split(&self, cols: &[usize], below: usize) -> Result<(u128, u128)> {
        let mut entries: Vec<(u32, u32)> = cols.iter().flat_map(|&c| self.columns[c].iter().copied()).collect();
        entries.sort_unstable();
        let mut g: u128 = 1;
        let mut low: u128 = 1;
        let overflow = || Error::ResourceLimit("g_k exceeds 128 bits".into());
        let mut i = 0;
        while i < entries.len() {
            let m = entries[i].0;
            let (mut sum, mut max) = (0u32, 0u32);
            while i < entries.len() && entries[i].0 == m {
                sum += entries[i].1;
                max = max.max(entries[i].1);
                i += 1;
            }
            let p = self.primes[m as usize] as u128;
            if sum > max {
                g = g.checked_mul(p.checked_pow(sum - max).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
            if (m as usize) < below {
                low = low.checked_mul(p.checked_pow(max).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
        }
        Ok((g, low))
    }

    pub fn g(&self, cols: &[usize]) -> Result<u128> {
        Ok(self.g_split(cols, 0)?.0)
    }
}

/// Σ_{m > L} 1/p_m², the tail controlling shared factors beyond the cutoff.
/// Memoized per cutoff; every replicate's truncation report needs it.
pub fn prime_square_tail(cutoff: usize) -> f64 {
    static MEMO: std::sync::OnceLock<std::sync::Mutex<std::collections::HashMap<usize, f64>>> = std::sync::OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(&v) = memo.lock().expect("memo lock").get(&cutoff) {
        return v;
    }
    let ps = primes::first(cutoff);
    let head: f64 = ps[..cutoff].iter().rev().map(|&p| 1.0 / (p as f64 * p as f64)).sum();
    let v = (zeta::prime_zeta(2) - head).max(0.0);
    memo.lock().expect("memo lock").insert(cutoff, v);
    v
}

/// Truncation disclosure attached to every limit sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    pub r: usize,
    pub prime_cutoff: usize,
    pub residual: f64,
    /// Expected number of window points carried by subsets touching an
    /// unsampled stick: at most W·k·residual.
    pub omitted_intensity_bound: f64,
    /// Probability that two of the first r columns share a prime beyond the
    /// cutoff: at most C(r,2)·Σ_{m>L} 1/p_m².
    pub prime_cutoff_bound: f64,
}

impl TruncationReport {
    pub fn total(&self) -> f64 {
        self.omitted_intensity_bound + self.prime_cutoff_bound
    }

    /// Worst case over a batch of replicates.
    pub fn worst<'a, I: IntoIterator<Item = &'a TruncationReport>>(reports: I) -> Option<TruncationReport> {
        reports.into_iter().copied().reduce(|a, b| TruncationReport {
            r: a.r.max(b.r),
            prime_cutoff: a.prime_cutoff,
            residual: a.residual.max(b.residual),
            omitted_intensity_bound: a.omitted_intensity_bound.max(b.omitted_intensity_bound),
            prime_cutoff_bound: a.prime_cutoff_bound.max(b.prime_cutoff_bound),
        })
    }
}

fn pair_count(r: usize) -> f64 {
    let r = r as f64;
    r * (r - 1.0) / 2.0
}

/// Parameters of the limiting process and of its truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitConfig {
    pub k: usize,
    pub theta: f64,
    pub kind: AlphaKind,
    pub window: (f64, f64),
    pub truncation: Truncation,
    pub prime_cutoff: usize,
    /// When set, a replicate whose total truncation bound exceeds this fails
    /// with `TruncationTooSmall`.
    pub tolerance: Option<f64>,
}

impl LimitConfig {
    pub fn new(k: usize, theta: f64, kind: AlphaKind, window: (f64, f64)) -> Self {
        Self {
            k,
            theta,
            kind,
            window,
            truncation: Truncation::default(),
            prime_cutoff: DEFAULT_PRIME_CUTOFF,
            tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        check_theta(self.theta)?;
        let (w1, w2) = self.window;
        if !(w1.is_finite() && w2.is_finite() && w1 < w2) {
            return Err(Error::InvalidParameter(format!("window needs w1 < w2, got [{w1}, {w2}]")));
        }
        self.truncation.validate(self.k)?;
        if self.prime_cutoff == 0 {
            return Err(Error::InvalidParameter("prime cutoff must be at least 1".into()));
        }
        if let AlphaKind::Rational(t) = self.kind {
            let largest = largest_prime_index(t);
            if largest > self.prime_cutoff {
                return Err(Error::InvalidParameter(format!(
                    "prime cutoff {} is below the primes dividing t={t}",
                    self.prime_cutoff
                )));
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter("tolerance must be positive".into()));
            }
        }
        Ok(())
    }
}

/// 1-based index of the largest prime dividing t (0 for t = 1).
fn largest_prime_index(t: u64) -> usize {
    let mut rest = t;
    let mut largest = 0;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            largest = p;
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += 1;
    }
    if rest > 1 {
        largest = rest;
    }
    if largest == 0 {
        0
    } else {
        primes::index_of(largest).expect("prime factor is prime")
    }
}

fn mod_pow(mut b: u128, mut e: u32, m: u128) -> u128 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

fn mod_inverse(a: u128, m: u128) -> u128 {
    let g = (a as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(g.gcd, 1);
    g.x.rem_euclid(m as i128) as u128
}

/// Everything a replicate needs before points are placed: sticks, exponent
/// columns and (rational kind) unit-group uniforms.
#[derive(Debug, Clone)]
pub struct LimitSkeleton {
    pub sticks: StickSample,
    pub exponents: Option<PrimeExponentArray>,
    pub units: Vec<u64>,
}

impl LimitSkeleton {
    pub fn sample<R: Rng + ?Sized>(
        k: usize,
        theta: f64,
        kind: AlphaKind,
        truncation: Truncation,
        prime_cutoff: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let sticks = truncation.sample(theta, k, rng);
        let r = sticks.len();
        let needs_columns = k >= 2 || matches!(kind, AlphaKind::Rational(t) if t > 1);
        let exponents = if needs_columns {
            let mut arr = PrimeExponentArray::new(prime_cutoff)?;
            arr.ensure_columns(r, rng);
            Some(arr)
        } else {
            None
        };
        let units = match kind {
            AlphaKind::Rational(t) => {
                let group: Vec<u64> = (1..=t).filter(|u| u.gcd(&t) == 1).collect();
                (0..r).map(|_| group[rng.random_range(0..group.len())]).collect()
            }
            _ => Vec::new(),
        };
        Ok(Self { sticks, exponents, units })
    }

    pub fn r(&self) -> usize {
        self.sticks.len()
    }

    /// g_k of a subset; identically 1 when no columns were drawn (k = 1).
    pub fn g(&self, subset: &[usize]) -> Result<u128> {
        match &self.exponents {
            Some(arr) if subset.len() >= 2 => arr.g(subset),
            _ => Ok(1),
        }
    }

    pub fn report(&self, k: usize, width: f64) -> TruncationReport {
        let prime_cutoff = self.exponents.as_ref().map_or(DEFAULT_PRIME_CUTOFF, |a| a.cutoff());
        let prime_cutoff_bound = if k >= 2 {
            pair_count(self.r()) * prime_square_tail(prime_cutoff)
        } else {
            0.0
        };
        TruncationReport {
            r: self.r(),
            prime_cutoff,
            residual: self.sticks.residual,
            omitted_intensity_bound: width * k as f64 * self.sticks.residual,
            prime_cutoff_bound,
        }
    }

    /// Phase V/t ∈ {1/t, …, 1} of a subset for the rational kind.
    fn rational_phase(&self, subset: &[usize], t: u64, g_low_below: usize) -> Result<(u128, f64)> {
        let arr = self.exponents.as_ref();
        let tm = t as u128;
        let (g, low) = match arr {
            Some(a) => a.g_split(subset, g_low_below)?,
            None => (1, 1),
        };
        // Π_{m≤M} p^{Σe} / g_k: primes up to M contribute p^{max e}; the rest
        // of g_k is coprime to t and is inverted.
        let mut high: u128 = 1;
        if let Some(a) = arr {
            let mut entries: Vec<(u32, u32)> = subset.iter().flat_map(|&c| a.column(c).iter().copied()).collect();
            entries.sort_unstable();
            let mut i = 0;
            while i < entries.len() {
                let m = entries[i].0;
                let (mut sum, mut max) = (0u32, 0u32);
                while i < entries.len() && entries[i].0 == m {
                    sum += entries[i].1;
                    max = max.max(entries[i].1);
                    i += 1;
                }
                if (m as usize) >= g_low_below && sum > max {
                    high = high * mod_pow(a.prime(m) as u128, sum - max, tm) % tm;
                }
            }
        }
        let mut v = low % tm * mod_inverse(high, tm) % tm;
        for &i in subset {
            v = v * self.units[i] as u128 % tm;
        }
        let v = if v == 0 { tm } else { v };
        Ok((g, v as f64 / t as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPoint {
    pub position: f64,
    pub multiplicity: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitWindowSample {
    /// Nonzero-position points in the closed window, sorted by position.
    pub points: Vec<LimitPoint>,
    /// The zero and rational processes carry an infinite mass at 0; it is
    /// flagged here instead of being listed.
    pub atom_at_zero: bool,
    pub truncation: TruncationReport,
}

impl LimitWindowSample {
    /// Number of nonzero-position points counted with multiplicity.
    pub fn count(&self) -> u128 {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Count inside the open interval (a, b), zero excluded.
    pub fn count_open(&self, a: f64, b: f64) -> u128 {
        self.points
            .iter()
            .filter(|p| p.position > a && p.position < b)
            .map(|p| p.multiplicity)
            .sum()
    }
}

/// Visit every k-subset of 0..r in lexicographic order.
pub(crate) fn for_each_subset<F: FnMut(&[usize]) -> Result<()>>(r: usize, k: usize, mut f: F) -> Result<()> {
    if k > r {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let mut j = k;
        loop {
            if j == 0 {
                return Ok(());
            }
            j -= 1;
            if idx[j] < r - k + j {
                idx[j] += 1;
                for l in j + 1..k {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

fn factorial_u128(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// One replicate of the limiting process restricted to the window.
pub fn simulate_limit_window<R: Rng + ?Sized>(cfg: &LimitConfig, rng: &mut R) -> Result<LimitWindowSample> {
    cfg.validate()?;
    let (w1, w2) = cfg.window;
    let k = cfg.k;
    let skel = LimitSkeleton::sample(k, cfg.theta, cfg.kind, cfg.truncation, cfg.prime_cutoff, rng)?;
    let report = skel.report(k, w2 - w1);
    if let Some(tol) = cfg.tolerance {
        if report.total() > tol {
            return Err(Error::TruncationTooSmall { bound: report.total(), tolerance: tol });
        }
    }
    let kfact = factorial_u128(k);
    let below = match cfg.kind {
        AlphaKind::Rational(t) => largest_prime_index(t),
        _ => 0,
    };
    let sticks = &skel.sticks.sticks;
    let mut points = Vec::new();
    for_each_subset(skel.r(), k, |subset| {
        let prod: f64 = subset.iter().map(|&i| sticks[i]).product();
        let (g, u) = match cfg.kind {
            AlphaKind::Irrational => (skel.g(subset)?, rng.random::<f64>()),
            AlphaKind::Zero => (skel.g(subset)?, 0.0),
            AlphaKind::Rational(t) => skel.rational_phase(subset, t, below)?,
        };
        let spacing = g as f64 / prod;
        let multiplicity = kfact
            .checked_mul(g)
            .ok_or_else(|| Error::ResourceLimit("multiplicity exceeds 128 bits".into()))?;
        let q_lo = (w1 / spacing - u).ceil();
        let q_hi = (w2 / spacing - u).floor();
        let mut q = q_lo;
        while q <= q_hi {
            let position = (q + u) * spacing;
            if q + u != 0.0 && position >= w1 && position <= w2 {
                points.push(LimitPoint { position, multiplicity });
            }
            q += 1.0;
        }
        Ok(())
    })?;
    points.sort_by(|a, b| a.position.total_cmp(&b.position));
    Ok(LimitWindowSample {
        points,
        atom_at_zero: cfg.kind.has_atom() && w1 <= 0.0 && 0.0 <= w2,
        truncation: report,
    })
}

/// `reps` independent replicates on the limit stream domain, in replicate
/// order.
pub fn simulate_limit_replicates(cfg: &LimitConfig, reps: u64, seed: u64) -> Result<Vec<LimitWindowSample>> {
    cfg.validate()?;
    StreamFactory::new(seed)
        .replicates(domain::LIMIT, reps, |_, rng| simulate_limit_window(cfg, rng))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{chi_square_gof, chi_square_two_sample, histogram, kolmogorov_smirnov, mean_and_stderr};

    fn factory() -> StreamFactory {
        StreamFactory::new(20240611)
    }

    #[test]
    fn density_values() {
        assert!((pd_largest_density(0.75, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((pd_largest_density(0.8, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((pd_largest_density(1.0 - 1e-12, 1.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(pd_largest_density(0.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(pd_largest_density(1.2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gem_validity() {
        let f = factory();
        for (i, &theta) in [0.5, 1.0, 3.0].iter().enumerate() {
            let mut rng = f.stream(99, i as u64);
            for _ in 0..200 {
                let s = sample_gem(theta, 40, &mut rng).unwrap();
                assert!(s.sticks.iter().all(|&v| v > 0.0));
                let mut partial = 0.0;
                for v in &s.sticks {
                    partial += v;
                    assert!(partial < 1.0 + 1e-15);
                }
                assert!(s.residual >= 0.0);
                assert!((partial + s.residual - 1.0).abs() < 10.0 * f64::EPSILON * 40.0);
            }
        }
        let mut rng = f.stream(99, 7);
        let one = sample_gem(2.0, 1, &mut rng).unwrap();
        assert!((one.sticks[0] + one.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gem_first_stick_mean() {
        let f = factory();
        let vals: Vec<f64> = f.replicates(98, 200_000, |_, rng| sample_gem(1.0, 1, rng).unwrap().sticks[0]);
        let (m, se) = mean_and_stderr(&vals);
        assert!((m - 0.5).abs() < 4.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn largest_part_matches_density() {
        // Conditional on L1 > 1/2 the largest part has density f/P(L1>1/2).
        for &theta in &[1.0, 2.0] {
            let f = factory();
            let draws: Vec<f64> = f.replicates(97, 100_000, |_, rng| {
                let s = sample_gem(theta, 64, rng).unwrap();
                s.sorted()[0]
            });
            let big: Vec<f64> = draws.into_iter().filter(|&x| x > 0.5).collect();
            // CDF of the conditional law by midpoint quadrature of the density.
            let grid = 20_000;
            let h = 0.5 / grid as f64;
            let mut cum = vec![0.0; grid + 1];
            for i in 0..grid {
                let mid = 0.5 + (i as f64 + 0.5) * h;
                cum[i + 1] = cum[i] + h * pd_largest_density(mid, theta).unwrap();
            }
            let total = cum[grid];
            let cdf = |x: f64| {
                let pos = ((x - 0.5) / h).clamp(0.0, grid as f64);
                let i = (pos.floor() as usize).min(grid - 1);
                let frac = pos - i as f64;
                (cum[i] + frac * (cum[i + 1] - cum[i])) / total
            };
            let (_, p) = kolmogorov_smirnov(&big, cdf);
            assert!(p > 1e-3, "theta {theta}: KS p-value {p}");
        }
    }

    #[test]
    fn column_marginals_are_geometric() {
        let f = factory();
        let arr_cols: Vec<SparseColumn> = f.replicates(96, 100_000, |_, rng| {
            let mut a = PrimeExponentArray::new(50).unwrap();
            a.ensure_columns(1, rng);
            a.column(0).clone()
        });
        for (m, p) in [(0usize, 2.0f64), (1, 3.0), (2, 5.0), (9, 29.0)] {
            let xs = histogram(arr_cols.iter().map(|c| {
                c.iter().find(|&&(i, _)| i as usize == m).map_or(0, |&(_, e)| e as u64).min(3)
            }));
            let q = 1.0 / p;
            let probs = [1.0 - q, (1.0 - q) * q, (1.0 - q) * q * q, q * q * q];
            let mut obs = xs.clone();
            obs.resize(4, 0);
            let t = chi_square_gof(&obs, &probs);
            assert!(t.p_value > 1e-3, "prime {p}: {t:?}");
        }
    }

    #[test]
    fn g_coprime_frequency() {
        // P{g_2 = 1} = Π_p (1 − 1/p²) = 6/π².
        let f = factory();
        let ones: Vec<f64> = f.replicates(95, 100_000, |_, rng| {
            let mut a = PrimeExponentArray::new(DEFAULT_PRIME_CUTOFF).unwrap();
            a.ensure_columns(2, rng);
            if a.g(&[0, 1]).unwrap() == 1 { 1.0 } else { 0.0 }
        });
        let (m, se) = mean_and_stderr(&ones);
        let target = 6.0 / std::f64::consts::PI.powi(2);
        assert!((m - target).abs() < 4.0 * se, "{m} vs {target}");
        assert!(prime_square_tail(DEFAULT_PRIME_CUTOFF) < 1e-6);
        assert!(prime_square_tail(10) > prime_square_tail(100));
    }

    #[test]
    fn subset_enumeration() {
        let mut seen = Vec::new();
        for_each_subset(5, 3, |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn intensity_k1() {
        let mut cfg = LimitConfig::new(1, 1.0, AlphaKind::Irrational, (0.0, 1.0));
        cfg.truncation = Truncation::Fixed(64);
        let samples = simulate_limit_replicates(&cfg, 100_000, 5).unwrap();
        let counts: Vec<f64> = samples.iter().map(|s| s.count() as f64).collect();
        let (m, se) = mean_and_stderr(&counts);
        assert!((m - 1.0).abs() < 4.0 * se, "{m} ± {se}");
    }

    #[test]
    fn rational_support_and_uniformity() {
        for &t in &[2u64, 3, 4, 6] {
            let mut cfg = LimitConfig::new(1, 1.0, AlphaKind::Rational(t), (-3.0, 3.0));
            cfg.truncation = Truncation::Fixed(8);
            let f = factory();
            let samples: Vec<LimitSkeleton> = f.replicates(94, 20_000, |_, rng| {
                LimitSkeleton::sample(1, 1.0, cfg.kind, cfg.truncation, cfg.prime_cutoff, rng).unwrap()
            });
            let mut cells = vec![0u64; t as usize];
            for s in &samples {
                for i in 0..s.r() {
                    let (_, u) = s.rational_phase(&[i], t, largest_prime_index(t)).unwrap();
                    let v = (u * t as f64).round() as usize;
                    assert!((1..=t as usize).contains(&v));
                    cells[v - 1] += 1;
                }
            }
            let probs = vec![1.0 / t as f64; t as usize];
            let res = chi_square_gof(&cells, &probs);
            assert!(res.p_value > 1e-3, "t={t}: {res:?}");

            // Positions are (q + u/t)·(1/V_i).
            let mut rng = f.stream(93, t);
            let w = simulate_limit_window(&cfg, &mut rng).unwrap();
            assert!(w.atom_at_zero);
            let skel_rng = &mut f.stream(93, t);
            let skel = LimitSkeleton::sample(1, 1.0, cfg.kind, cfg.truncation, cfg.prime_cutoff, skel_rng).unwrap();
            for p in &w.points {
                let ok = skel.sticks.sticks.iter().any(|&v| {
                    let x = p.position * v * t as f64;
                    (x - x.round()).abs() < 1e-6
                });
                assert!(ok, "position {} off the lattice", p.position);
                assert!(p.position != 0.0);
            }
        }
    }

    #[test]
    fn zero_kind_points_are_multiples() {
        let mut cfg = LimitConfig::new(2, 1.0, AlphaKind::Zero, (-5.0, 5.0));
        cfg.truncation = Truncation::Fixed(12);
        let mut rng = factory().stream(92, 0);
        let w = simulate_limit_window(&cfg, &mut rng).unwrap();
        assert!(w.atom_at_zero);
        assert!(w.points.iter().all(|p| p.position != 0.0 && p.multiplicity % 2 == 0));
        let mut cfg = cfg;
        cfg.window = (1.0, 5.0);
        let w = simulate_limit_window(&cfg, &mut factory().stream(92, 0)).unwrap();
        assert!(!w.atom_at_zero);
    }

    #[test]
    fn stationarity_irrational() {
        let mut hists = Vec::new();
        for (j, &a) in [0.0, 0.37, 5.1].iter().enumerate() {
            let cfg = LimitConfig::new(1, 1.0, AlphaKind::Irrational, (a, a + 2.0));
            let samples = StreamFactory::new(77 + j as u64)
                .replicates(domain::LIMIT, 20_000, |_, rng| simulate_limit_window(&cfg, rng).unwrap().count() as u64);
            hists.push(histogram(samples));
        }
        for pair in [(0, 1), (0, 2), (1, 2)] {
            let t = chi_square_two_sample(&hists[pair.0], &hists[pair.1]);
            assert!(t.p_value > 1e-3, "{pair:?}: {t:?}");
        }
    }

    #[test]
    fn tolerance_triggers() {
        let mut cfg = LimitConfig::new(2, 1.0, AlphaKind::Irrational, (0.0, 2.0));
        cfg.truncation = Truncation::Fixed(2);
        cfg.tolerance = Some(1e-9);
        let mut rng = factory().stream(91, 0);
        assert!(matches!(
            simulate_limit_window(&cfg, &mut rng),
            Err(Error::TruncationTooSmall { .. })
        ));
        assert!(AlphaKind::parse("rat:0").is_err());
        assert_eq!(AlphaKind::parse("rat:6").unwrap(), AlphaKind::Rational(6));
        assert_eq!(AlphaKind::parse("zero").unwrap().to_string(), "zero");
    }

    #[test]
    fn mod_helpers() {
        assert_eq!(mod_inverse(3, 7), 5);
        assert_eq!(mod_pow(2, 10, 1000), 24);
        assert_eq!(largest_prime_index(12), 2);
        assert_eq!(largest_prime_index(1), 0);
        assert_eq!(largest_prime_index(7), 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn gem_sticks_partition_unity(theta in 0.1f64..8.0, r in 1usize..200, seed in any::<u64>()) {
                let s = sample_gem(theta, r, &mut StreamFactory::new(seed).stream(domain::LIMIT, 0)).unwrap();
                prop_assert_eq!(s.len(), r);
                prop_assert!(s.sticks.iter().all(|&v| v > 0.0 || s.residual == 0.0));
                let total: f64 = s.sticks.iter().sum::<f64>() + s.residual;
                prop_assert!((total - 1.0).abs() < 1e-12);
                let sorted = s.sorted();
                prop_assert!(sorted.windows(2).all(|w| w[0] >= w[1]));
            }

            #[test]
            fn subsets_are_counted_once(r in 0usize..12, k in 1usize..5) {
                let mut n = 0u64;
                for_each_subset(r, k, |sub| {
                    assert!(sub.windows(2).all(|w| w[0] < w[1]) && sub.iter().all(|&i| i < r));
                    n += 1;
                    Ok(())
                }).unwrap();
                let binom = if k > r { 0 } else { (0..k as u64).fold(1u64, |a, i| a * (r as u64 - i) / (i + 1)) };
                prop_assert_eq!(n, binom);
            }
        }
    }
}
