//! Exact eigenangle multisets of the k-tuple permutation representation.
//!
//! A permutation σ acts on ordered k-tuples of distinct points; every orbit
//! of length j contributes the eigenangles {0, 1/j, …, (j−1)/j}. Because the
//! orbit length of a tuple is the lcm of the cycle lengths its coordinates
//! live in, the orbit counts depend on the cycle type only.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{Angle, Interval};
use crate::ewens::CycleType;
use crate::{Error, Result};

/// Orbit length j ↦ number of orbits C_{j,k} of σ on k-tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitSpectrum {
    n: u64,
    k: usize,
    entries: BTreeMap<u64, u128>,
}

impl OrbitSpectrum {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &BTreeMap<u64, u128> {
        &self.entries
    }

    /// Σ_j j·C_{j,k}, the dimension n!/(n−k)! of the representation.
    pub fn dimension(&self) -> u128 {
        self.entries.iter().map(|(&j, &c)| j as u128 * c).sum()
    }

    pub fn num_orbits(&self) -> u128 {
        self.entries.values().sum()
    }
}

pub(crate) fn falling(x: u64, m: usize) -> u128 {
    (0..m as u64).fold(1u128, |acc, i| if i >= x { 0 } else { acc * (x - i) as u128 })
}

/// Set partitions of {0..k} as restricted growth strings.
fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == k {
            out.push(cur.clone());
            return;
        }
        let limit = if pos == 0 { 0 } else { max + 1 };
        for b in 0..=limit {
            cur.push(b);
            rec(pos + 1, k, max.max(b), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Orbit-length multiplicities of σ acting on ordered k-tuples of distinct
/// points.
///
/// Coordinates are grouped into blocks that share a cycle; each block is
/// assigned a distinct cycle *length* (with the count of cycles of that
/// length supplying the number of injective choices), so the work is
/// polynomial in the number of distinct cycle lengths.
pub fn orbit_spectrum(ct: &CycleType, k: usize) -> Result<OrbitSpectrum> {
    if k == 0 || k as u64 > ct.n() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={}",
            ct.n()
        )));
    }
    let distinct: Vec<(u64, u64)> = ct.counts().iter().map(|(&j, &c)| (j, c)).collect();
    let d = distinct.len();
    let mut tuples: BTreeMap<u64, u128> = BTreeMap::new();

    for partition in set_partitions(k) {
        let blocks = partition.iter().max().map_or(0, |&b| b + 1);
        let mut sizes = vec![0usize; blocks];
        for &b in &partition {
            sizes[b] += 1;
        }
        // odometer over block -> distinct-length index
        let mut choice = vec![0usize; blocks];
        'outer: loop {
            let mut uses = vec![0usize; d];
            for &c in &choice {
                uses[c] += 1;
            }
            let mut count = 1u128;
            for (idx, &u) in uses.iter().enumerate() {
                if u > 0 {
                    count *= falling(distinct[idx].1, u);
                }
            }
            let mut orbit = 1u64;
            for (b, &c) in choice.iter().enumerate() {
                count *= falling(distinct[c].0, sizes[b]);
                orbit = orbit.lcm(&distinct[c].0);
            }
            if count > 0 {
                *tuples.entry(orbit).or_insert(0) += count;
            }
            for slot in choice.iter_mut() {
                *slot += 1;
                if *slot < d {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
    }

    let entries = tuples
        .into_iter()
        .map(|(j, t)| {
            debug_assert_eq!(t % j as u128, 0);
            (j, t / j as u128)
        })
        .collect();
    Ok(OrbitSpectrum { n: ct.n(), k, entries })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPoint {
    /// Rescaled position n^k (i/j − α); degenerate interval when exact.
    pub position: Interval,
    pub multiplicity: u128,
    /// The eigenangle i/j in lowest terms.
    pub angle: BigRational,
}

/// Points of the rescaled process n^k(Λ_{n,k} − α) inside the open window
/// (−T, T).
#[derive(Debug, Clone)]
pub struct WindowedPointSample {
    pub n: u64,
    pub k: usize,
    pub center: Angle,
    pub half_width: BigRational,
    pub scale: BigInt,
    /// Certified inside the window, sorted by position.
    pub points: Vec<WindowPoint>,
    /// Enclosures straddling ±T: membership could not be decided.
    pub flags: Vec<WindowPoint>,
}

impl WindowedPointSample {
    /// Total number of points counted with multiplicity.
    pub fn count(&self) -> u128 {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Count with multiplicity, skipping a point sitting exactly at 0.
    pub fn count_nonzero(&self) -> u128 {
        self.points
            .iter()
            .filter(|p| !(p.position.is_exact() && p.position.lo.is_zero()))
            .map(|p| p.multiplicity)
            .sum()
    }

    pub fn require_certified(&self) -> Result<()> {
        if self.flags.is_empty() {
            Ok(())
        } else {
            Err(Error::PrecisionExhausted(format!(
                "{} point(s) lie within the angle's error bound of the window edge; raise the precision",
                self.flags.len()
            )))
        }
    }
}

fn ceil_rat(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

fn floor_rat(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Cut the window (−T, T) out of the process Σ_j C_{j,k} Σ_{i∈ℤ} δ_{n^k(i/j − α)}.
///
/// Rational α is exact. For irrational α every candidate position is an
/// interval of width `2·n^k·2^-bits`; candidates whose interval straddles an
/// edge are returned in `flags` rather than guessed.
pub fn window_points(spec: &OrbitSpectrum, alpha: &Angle, half_width: &BigRational) -> Result<WindowedPointSample> {
    if !half_width.is_positive() {
        return Err(Error::InvalidParameter("window half-width T must be positive".into()));
    }
    let scale = num_traits::pow(BigInt::from(spec.n), spec.k);
    let scale_r = BigRational::from_integer(scale.clone());
    let alpha_enc = alpha.enclosure();
    let neg_t = -half_width.clone();

    // eigenangle i/j (reduced) -> (position, multiplicity, certain)
    let mut found: BTreeMap<BigRational, (Interval, u128, bool)> = BTreeMap::new();
    for (&j, &mult) in spec.entries() {
        if mult == 0 {
            continue;
        }
        let j_r = BigRational::from_integer(BigInt::from(j));
        let reach = half_width * &j_r / &scale_r;
        let first = ceil_rat(&(&alpha_enc.lo * &j_r - &reach));
        let last = floor_rat(&(&alpha_enc.hi * &j_r + &reach));
        let mut i = first;
        while i <= last {
            let angle = BigRational::new(i.clone(), BigInt::from(j));
            let position = Interval {
                lo: (&angle - &alpha_enc.hi) * &scale_r,
                hi: (&angle - &alpha_enc.lo) * &scale_r,
            };
            let inside = position.lo > neg_t && &position.hi < half_width;
            let outside = &position.lo >= half_width || position.hi <= neg_t;
            if inside || !outside {
                let entry = found.entry(angle).or_insert((position, 0, inside));
                entry.1 += mult;
            }
            i += 1;
        }
    }

    let mut points = Vec::new();
    let mut flags = Vec::new();
    for (angle, (position, multiplicity, certain)) in found {
        let p = WindowPoint { position, multiplicity, angle };
        if certain {
            points.push(p);
        } else {
            flags.push(p);
        }
    }
    Ok(WindowedPointSample {
        n: spec.n,
        k: spec.k,
        center: alpha.clone(),
        half_width: half_width.clone(),
        scale,
        points,
        flags,
    })
}

/// Sup over closed intervals [a, b] ⊂ [0, 1] of |#{x_i ∈ [a,b]}/N − (b − a)|.
///
/// With the sorted sample x_(1) ≤ … ≤ x_(N), the excess of points is
/// maximised by intervals spanning runs of sample points and the deficit by
/// gaps between consecutive points (or the ends of [0, 1]); both reduce to
/// a running-minimum sweep.
pub fn star_discrepancy_1d(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("discrepancy of an empty sample".into()));
    }
    if let Some(bad) = values.iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
        return Err(Error::Domain(format!("value {bad} outside [0, 1)")));
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;

    // excess: 1/N + max_{i<=j} (u_j − u_i), u_i = i/N − x_i
    let mut excess = f64::NEG_INFINITY;
    let mut min_u = f64::INFINITY;
    for (idx, &x) in xs.iter().enumerate() {
        let u = (idx + 1) as f64 / n - x;
        min_u = min_u.min(u);
        excess = excess.max(u - min_u);
    }
    let excess = 1.0 / n + excess;

    // deficit: 1/N + max_{i<j} (w_j − w_i), w_i = x_i − i/N with w_0 = 0 and
    // w_{N+1} = −1/N standing for the ends of [0, 1]
    let mut deficit = f64::NEG_INFINITY;
    let mut min_w = 0.0f64;
    let tail = std::iter::once(-1.0 / n);
    for w in xs.iter().enumerate().map(|(idx, &x)| x - (idx + 1) as f64 / n).chain(tail) {
        deficit = deficit.max(w - min_w);
        min_w = min_w.min(w);
    }
    let deficit = 1.0 / n + deficit;

    Ok(excess.max(deficit).clamp(0.0, 1.0))
}

/// Helper for callers holding f64 windows: T as an exact rational.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))
}

/// Exact rational from `3/2`, `0.25` or `2`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| Error::Parse(format!("bad rational '{text}'")))?;
        let b: BigInt = b.trim().parse().map_err(|_| Error::Parse(format!("bad rational '{text}'")))?;
        if b.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{text}'")));
        }
        return Ok(BigRational::new(a, b));
    }
    crate::arith::angle_parse_decimal(s)
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use num_traits::One;

    fn ct(pairs: &[(u64, u64)]) -> CycleType {
        CycleType::from_counts(pairs.iter().copied().collect()).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    /// Materialise a permutation with the given cycle type.
    fn permutation(ct: &CycleType) -> Vec<usize> {
        let mut perm = Vec::new();
        let mut start = 0;
        for (&j, &c) in ct.counts() {
            for _ in 0..c {
                for x in 0..j as usize {
                    perm.push(start + (x + 1) % j as usize);
                }
                start += j as usize;
            }
        }
        perm
    }

    /// Orbit lengths of σ on ordered k-tuples of distinct points, by direct
    /// enumeration of the tuples.
    pub(crate) fn brute_orbits(ct: &CycleType, k: usize) -> BTreeMap<u64, u128> {
        let perm = permutation(ct);
        let n = perm.len();
        let mut tuples: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..k {
            let mut next = Vec::new();
            for t in &tuples {
                for x in 0..n {
                    if !t.contains(&x) {
                        let mut u = t.clone();
                        u.push(x);
                        next.push(u);
                    }
                }
            }
            tuples = next;
        }
        let mut seen = BTreeSet::new();
        let mut out = BTreeMap::new();
        for t in tuples {
            if seen.contains(&t) {
                continue;
            }
            let mut cur = t.clone();
            let mut len = 0u64;
            loop {
                seen.insert(cur.clone());
                cur = cur.iter().map(|&x| perm[x]).collect();
                len += 1;
                if cur == t {
                    break;
                }
            }
            *out.entry(len).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn orbit_examples() {
        let s = orbit_spectrum(&ct(&[(7, 1)]), 1).unwrap();
        assert_eq!(s.entries(), &BTreeMap::from([(7, 1)]));
        let s = orbit_spectrum(&ct(&[(1, 1), (4, 1)]), 2).unwrap();
        assert_eq!(s.entries(), &BTreeMap::from([(4, 5)]));
        let s = orbit_spectrum(&ct(&[(2, 2)]), 2).unwrap();
        assert_eq!(s.entries(), &BTreeMap::from([(2, 6)]));
        assert!(orbit_spectrum(&ct(&[(2, 1)]), 3).is_err());
        assert!(orbit_spectrum(&ct(&[(2, 1)]), 0).is_err());
    }

    #[test]
    fn orbit_matches_brute_force_small() {
        for n in 1..=6 {
            for c in CycleType::all(n) {
                for k in 1..=(n as usize).min(3) {
                    let s = orbit_spectrum(&c, k).unwrap();
                    assert_eq!(s.entries(), &brute_orbits(&c, k), "{c} k={k}");
                    assert_eq!(s.dimension(), falling(n, k));
                }
            }
        }
    }

    #[test]
    fn dimension_identity_large() {
        let c = ct(&[(1, 3), (2, 2), (5, 1), (12, 2), (30, 1)]);
        for k in 1..=4 {
            assert_eq!(orbit_spectrum(&c, k).unwrap().dimension(), falling(c.n(), k));
        }
    }

    #[test]
    fn window_examples() {
        let four = orbit_spectrum(&ct(&[(4, 1)]), 1).unwrap();
        let w = window_points(&four, &Angle::rational(1, 2).unwrap(), &rat(1, 1)).unwrap();
        assert_eq!(w.points.len(), 1);
        assert_eq!(w.points[0].position, Interval::exact(rat(0, 1)));
        assert_eq!(w.points[0].multiplicity, 1);

        let w = window_points(&four, &Angle::rational(1, 8).unwrap(), &rat(1, 2)).unwrap();
        assert!(w.points.is_empty() && w.flags.is_empty());

        let c = ct(&[(2, 1), (3, 1), (1, 1)]);
        let s = orbit_spectrum(&c, 2).unwrap();
        let w = window_points(&s, &Angle::zero(), &rat(3, 2)).unwrap();
        assert_eq!(w.points.len(), 1);
        assert_eq!(w.points[0].position, Interval::exact(rat(0, 1)));
        assert_eq!(w.points[0].multiplicity, s.num_orbits());
        // widen until the nearest nonzero points ±36/6 enter
        let w = window_points(&s, &Angle::zero(), &rat(61, 10)).unwrap();
        let positions: Vec<_> = w.points.iter().map(|p| p.position.lo.clone()).collect();
        assert_eq!(positions, vec![rat(-6, 1), rat(0, 1), rat(6, 1)]);
        assert!(window_points(&s, &Angle::zero(), &rat(0, 1)).is_err());
    }

    /// Membership by integer inequality |n^k(i·t − j·s)|·b < a·j·t for α = s/t,
    /// T = a/b, over every eigenangle i/j with i in one period band.
    fn brute_window(ct: &CycleType, k: usize, s: i64, t: i64, a: i64, b: i64) -> BTreeMap<BigRational, u128> {
        let spec = orbit_spectrum(ct, k).unwrap();
        let nk = (ct.n() as i128).pow(k as u32);
        let mut out = BTreeMap::new();
        for (&j, &c) in spec.entries() {
            let j = j as i128;
            for i in -3 * j..=3 * j {
                let lhs = (nk * (i * t as i128 - j * s as i128)).abs() * b as i128;
                if lhs < a as i128 * j * t as i128 {
                    let pos = BigRational::new(BigInt::from(nk * (i * t as i128 - j * s as i128)), BigInt::from(j * t as i128));
                    *out.entry(pos).or_insert(0) += c;
                }
            }
        }
        out
    }

    #[test]
    fn rational_window_matches_integer_oracle() {
        let cases = [(0, 1), (1, 2), (1, 3), (2, 5), (3, 7)];
        for n in 3..=7u64 {
            for c in CycleType::all(n) {
                for k in 1..=2 {
                    for &(s, t) in &cases {
                        for &(a, b) in &[(1, 2), (1, 1), (5, 2)] {
                            let spec = orbit_spectrum(&c, k).unwrap();
                            let w = window_points(&spec, &Angle::rational(s, t as u64).unwrap(), &rat(a, b)).unwrap();
                            let got: BTreeMap<_, _> = w.points.iter().map(|p| (p.position.lo.clone(), p.multiplicity)).collect();
                            assert_eq!(got, brute_window(&c, k, s, t, a, b), "{c} k={k} α={s}/{t} T={a}/{b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn irrational_window_is_certified() {
        let c = ct(&[(3, 1), (97, 1), (900, 1)]);
        let spec = orbit_spectrum(&c, 1).unwrap();
        let alpha = Angle::sqrt(2, 256).unwrap();
        let w = window_points(&spec, &alpha, &rat(2, 1)).unwrap();
        w.require_certified().unwrap();
        let a = alpha.to_f64();
        let n = c.n() as f64;
        // compare against a plain f64 scan (no point is near the edges here)
        let mut expected = 0;
        for (&j, _) in spec.entries() {
            for i in 0..=j {
                let x = n * (i as f64 / j as f64 - a);
                if x.abs() < 2.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(w.count(), expected);
        for p in &w.points {
            assert!(!p.position.is_exact());
        }
    }

    #[test]
    fn coarse_angle_flags_edge_points() {
        // α known only to ±2^-128 around 1/4
        let alpha = Angle::Irrational {
            scaled: num_bigint::BigUint::one() << 126usize,
            bits: 128,
            label: "quarter".into(),
        };
        let spec = orbit_spectrum(&ct(&[(4, 1)]), 1).unwrap();
        // the window edge sits exactly at the point 4·(1/2 − 1/4) = 1
        let w = window_points(&spec, &alpha, &rat(1, 1)).unwrap();
        // both ±1 sit on an edge
        assert_eq!(w.flags.len(), 2);
        assert_eq!(w.points.len(), 1);
        assert!(w.require_certified().is_err());
    }

    /// Check every closed interval with endpoints at sample points or 0, 1.
    fn brute_discrepancy(xs: &[f64]) -> f64 {
        let mut cuts: Vec<f64> = xs.to_vec();
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mut best: f64 = 0.0;
        for &a in &cuts {
            for &b in &cuts {
                if b < a {
                    continue;
                }
                let closed = xs.iter().filter(|&&x| x >= a && x <= b).count() as f64;
                let open = xs.iter().filter(|&&x| x > a && x < b).count() as f64;
                best = best.max(closed / n - (b - a)).max((b - a) - open / n);
            }
        }
        best
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(star_discrepancy_1d(&[0.0]).unwrap(), 1.0);
        assert!((star_discrepancy_1d(&[0.0, 0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!(star_discrepancy_1d(&[]).is_err());
        assert!(star_discrepancy_1d(&[1.0]).is_err());
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let seq: Vec<f64> = (1..=100).map(|j| (j as f64 * g).fract()).collect();
        let d = star_discrepancy_1d(&seq).unwrap();
        assert!(d > 0.01 && d < 0.05, "{d}");
        assert!((d - brute_discrepancy(&seq)).abs() < 1e-12);
    }

    #[test]
    fn discrepancy_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for size in [1usize, 2, 3, 5, 17, 60] {
            for _ in 0..20 {
                let xs: Vec<f64> = (0..size).map(|_| (rng.random_range(0..40) as f64) / 40.0).collect();
                let fast = star_discrepancy_1d(&xs).unwrap();
                assert!((fast - brute_discrepancy(&xs)).abs() < 1e-12, "{xs:?}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn orbit_lengths_fill_the_tuples(lengths in prop::collection::vec(1u64..=12, 1..6), k in 1usize..=3) {
                let c = CycleType::from_lengths(lengths).unwrap();
                prop_assume!(k as u64 <= c.n());
                let spec = orbit_spectrum(&c, k).unwrap();
                prop_assert_eq!(spec.dimension(), falling(c.n(), k));
                // every orbit length divides the order of the permutation
                let order = c.counts().keys().fold(1u64, |a, &j| a.lcm(&j));
                prop_assert!(spec.entries().keys().all(|&j| order % j == 0));
            }

            #[test]
            fn window_at_zero_is_symmetric(lengths in prop::collection::vec(1u64..=10, 1..6), k in 1usize..=2, t in 1i64..=40) {
                let c = CycleType::from_lengths(lengths).unwrap();
                prop_assume!(k as u64 <= c.n());
                let w = window_points(&orbit_spectrum(&c, k).unwrap(), &Angle::zero(), &BigRational::from_integer(t.into())).unwrap();
                let mut pos: BTreeMap<BigRational, u128> = BTreeMap::new();
                for p in &w.points {
                    *pos.entry(p.position.lo.clone()).or_insert(0) += p.multiplicity;
                }
                for (x, m) in &pos {
                    prop_assert_eq!(pos.get(&-x.clone()), Some(m));
                }
            }
        }
    }
}
