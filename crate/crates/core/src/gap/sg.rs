//! The local factor S_G^p by the subset recursion
//! S[U] = (1 − q^{w(U)})^{−1} Σ_{W⊊U} q^{w(W)} S[W], S[∅] = 1,
//! where w(U) = |U| + Σ_{e∩U≠∅} (|e∩U| − 1).

use super::hypergraph::{full_mask, EdgeSet};
use num_rational::BigRational;
use num_traits::{One, Zero};

fn weights(g: &EdgeSet) -> Vec<u32> {
    (0..1u64 << g.v).map(|u| g.weight(u)).collect()
}

/// Proper submasks of `u`, the empty set included.
fn proper_submasks(u: u64) -> impl Iterator<Item = u64> {
    let mut w = u;
    let mut done = u == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        w = w.wrapping_sub(1) & u;
        if w == 0 {
            done = true;
        }
        Some(w)
    })
}

/// Exact S_G at a rational q in (0, 1).
pub fn s_g_exact(g: &EdgeSet, q: &BigRational) -> BigRational {
    let w = weights(g);
    let max_w = *w.iter().max().unwrap_or(&0) as usize;
    let mut qpow = vec![BigRational::one()];
    for i in 1..=max_w {
        let next = &qpow[i - 1] * q;
        qpow.push(next);
    }
    let mut s = vec![BigRational::zero(); 1 << g.v];
    s[0] = BigRational::one();
    for u in 1..(1u64 << g.v) {
        let sum = proper_submasks(u).fold(BigRational::zero(), |acc, x| acc + &qpow[w[x as usize] as usize] * &s[x as usize]);
        s[u as usize] = sum / (BigRational::one() - &qpow[w[u as usize] as usize]);
    }
    s[full_mask(g.v) as usize].clone()
}

/// S_G at a float q. Every term is positive, so rounding error stays
/// relative.
pub fn s_g_f64(g: &EdgeSet, q: f64) -> f64 {
    let w = weights(g);
    s_g_f64_with(g.v, &w, q)
}

pub(crate) fn s_g_f64_with(v: usize, w: &[u32], q: f64) -> f64 {
    let max_w = *w.iter().max().unwrap_or(&0) as usize;
    let mut qpow = vec![1.0; max_w + 1];
    for i in 1..=max_w {
        qpow[i] = qpow[i - 1] * q;
    }
    let mut s = vec![0.0; 1 << v];
    s[0] = 1.0;
    for u in 1..(1u64 << v) {
        let sum: f64 = proper_submasks(u).map(|x| qpow[w[x as usize] as usize] * s[x as usize]).sum();
        s[u as usize] = sum / (1.0 - qpow[w[u as usize] as usize]);
    }
    s[full_mask(v) as usize]
}

/// Power-series coefficients of S_G in q up to q^order. The coefficients are
/// non-negative integers.
pub fn s_g_series(g: &EdgeSet, order: usize) -> Vec<i128> {
    let w = weights(g);
    let n = order + 1;
    let mut s: Vec<Vec<i128>> = vec![Vec::new(); 1 << g.v];
    s[0] = {
        let mut one = vec![0; n];
        one[0] = 1;
        one
    };
    for u in 1..(1u64 << g.v) {
        let mut acc = vec![0i128; n];
        for x in proper_submasks(u) {
            let shift = w[x as usize] as usize;
            for (i, &c) in s[x as usize].iter().enumerate() {
                if i + shift < n {
                    acc[i + shift] += c;
                }
            }
        }
        // Multiply by 1/(1 − q^w) = Σ_j q^{jw}.
        let wu = w[u as usize] as usize;
        for i in wu..n {
            acc[i] += acc[i - wu];
        }
        s[u as usize] = acc;
    }
    s[full_mask(g.v) as usize].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn pow(q: &BigRational, n: u32) -> BigRational {
        (0..n).fold(BigRational::one(), |acc, _| acc * q)
    }

    fn poly(q: &BigRational, coeffs: &[(u32, i64)]) -> BigRational {
        coeffs.iter().fold(BigRational::zero(), |acc, &(e, c)| acc + pow(q, e) * BigRational::from_integer(c.into()))
    }

    fn one_minus(q: &BigRational, n: u32) -> BigRational {
        BigRational::one() - pow(q, n)
    }

    fn complete(n: usize) -> EdgeSet {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push(1 << i | 1 << j);
            }
        }
        EdgeSet::new(n, edges)
    }

    #[test]
    fn tabulated_examples() {
        for q in [r(1, 2), r(1, 3), r(1, 5), r(2, 7)] {
            let one = BigRational::one();
            // K1: a lone vertex, no edges.
            assert_eq!(s_g_exact(&EdgeSet::new(1, vec![]), &q), &one / one_minus(&q, 1));
            assert_eq!(s_g_exact(&EdgeSet::new(1, vec![1]), &q), &one / one_minus(&q, 1));
            let k2 = (&one + &q) / (one_minus(&q, 1) * one_minus(&q, 3));
            assert_eq!(s_g_exact(&complete(2), &q), k2);
            let k3 = poly(&q, &[(0, 1), (1, 2), (3, 2), (4, 1)]) / (one_minus(&q, 1) * one_minus(&q, 3) * one_minus(&q, 6));
            assert_eq!(s_g_exact(&complete(3), &q), k3);
            let k4 = poly(&q, &[(0, 1), (1, 3), (3, 5), (4, 3), (6, 3), (7, 5), (9, 3), (10, 1)])
                / (one_minus(&q, 1) * one_minus(&q, 3) * one_minus(&q, 6) * one_minus(&q, 10));
            assert_eq!(s_g_exact(&complete(4), &q), k4);
            // Single 3-edge and 4-edge.
            let g3 = poly(&q, &[(0, 1), (1, 2), (3, 2), (4, 1)]) / (one_minus(&q, 1) * one_minus(&q, 3) * one_minus(&q, 5));
            assert_eq!(s_g_exact(&EdgeSet::new(3, vec![0b111]), &q), g3);
            let g4 = poly(&q, &[(0, 1), (1, 3), (3, 5), (4, 3), (5, 3), (6, 5), (8, 3), (9, 1)])
                / (one_minus(&q, 1) * one_minus(&q, 3) * one_minus(&q, 5) * one_minus(&q, 7));
            assert_eq!(s_g_exact(&EdgeSet::new(4, vec![0b1111]), &q), g4);
            // Double edge on two vertices.
            let s222 = one_minus(&q, 2) / (one_minus(&q, 1) * one_minus(&q, 1) * one_minus(&q, 4));
            assert_eq!(s_g_exact(&EdgeSet::new(2, vec![0b11, 0b11]), &q), s222);
            // Path on three vertices.
            let sg1 = &one / one_minus(&q, 1);
            let sg2 = k2.clone();
            let s221 = (&one + r(3, 1) * &q * &sg1 + r(2, 1) * pow(&q, 3) * &sg2 + pow(&q, 2) * &sg1 * &sg1) / one_minus(&q, 5);
            assert_eq!(s_g_exact(&EdgeSet::new(3, vec![0b011, 0b110]), &q), s221);
        }
    }

    #[test]
    fn float_and_series_agree_with_exact() {
        let g = EdgeSet::new(4, vec![0b0011, 0b0110, 0b1100, 0b1001]);
        let q = r(1, 3);
        let exact: f64 = num_traits::ToPrimitive::to_f64(&s_g_exact(&g, &q)).unwrap();
        assert!((s_g_f64(&g, 1.0 / 3.0) - exact).abs() < 1e-14 * exact);
        let series = s_g_series(&g, 60);
        let summed: f64 = series.iter().enumerate().map(|(i, &c)| c as f64 * 3f64.powi(-(i as i32))).sum();
        assert!((summed - exact).abs() < 1e-12 * exact);
        assert_eq!(series[0], 1);
        assert_eq!(series[1], 4);
    }

    /// Direct count of exponent vectors by weight, for weights ≤ order. Every
    /// coordinate of a vector is at most its weight, so scanning entries
    /// ≤ order is exhaustive.
    fn direct_counts(g: &EdgeSet, order: u32) -> Vec<i128> {
        let v = g.v;
        let mut counts = vec![0i128; order as usize + 1];
        let mut e = vec![0u32; v];
        loop {
            let mut w: u32 = e.iter().sum();
            for &edge in &g.edges {
                let members: Vec<u32> = (0..v).filter(|&i| edge >> i & 1 == 1).map(|i| e[i]).collect();
                let sum: u32 = members.iter().sum();
                w += sum - *members.iter().max().unwrap();
            }
            if w <= order {
                counts[w as usize] += 1;
            }
            let mut i = 0;
            loop {
                if i == v {
                    return counts;
                }
                e[i] += 1;
                if e[i] <= order {
                    break;
                }
                e[i] = 0;
                i += 1;
            }
        }
    }

    fn arb_edgeset() -> impl Strategy<Value = EdgeSet> {
        (1usize..=5).prop_flat_map(|v| {
            let full = (1u64 << v) - 1;
            prop::collection::vec(1u64..=full, 0..6).prop_map(move |edges| EdgeSet::new(v, edges))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn recursion_matches_direct_sum(g in arb_edgeset(), qi in prop::sample::select(vec![2u32, 3, 5])) {
            let order = 8;
            let series = s_g_series(&g, order as usize);
            prop_assert_eq!(&series, &direct_counts(&g, order));
            // The truncated sum is a lower bound and the gap is the tail of
            // the series beyond `order`.
            let q = 1.0 / qi as f64;
            let rec = s_g_f64(&g, q);
            let partial: f64 = series.iter().enumerate().map(|(n, &c)| c as f64 * q.powi(n as i32)).sum();
            prop_assert!(partial <= rec * (1.0 + 1e-12));
            let longer = s_g_series(&g, 80);
            let tail: f64 = longer.iter().enumerate().skip(order as usize + 1).map(|(n, &c)| c as f64 * q.powi(n as i32)).sum();
            prop_assert!((rec - partial - tail).abs() < 1e-9 * rec, "rec {} partial {} tail {}", rec, partial, tail);
        }

        #[test]
        fn small_q_limit(g in arb_edgeset()) {
            prop_assert!((s_g_f64(&g, 1e-12) - 1.0).abs() < 1e-9);
        }
    }
}
