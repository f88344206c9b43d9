//! Riemann zeta and prime zeta values at integer arguments `s >= 2`, in f64.
//!
//! Used to sum Euler-product tails Σ_{p > P} p^{-s} without touching the
//! primes above P.

const BERNOULLI_2J: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// ζ(s) − 1 by Euler–Maclaurin summation (relative error near 1 ulp).
pub fn zeta_minus_one(s: u32) -> f64 {
    assert!(s >= 2, "zeta_minus_one needs s >= 2");
    let sf = s as f64;
    const M: f64 = 16.0;
    let mut head = 0.0;
    for m in (2..16).rev() {
        head += (m as f64).powf(-sf);
    }
    let mut tail = M.powf(1.0 - sf) / (sf - 1.0) + 0.5 * M.powf(-sf);
    // rising factorial s(s+1)…(s+2j−2) / (2j)!
    let mut coef = sf / 2.0;
    let mut power = M.powf(-sf - 1.0);
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        if j > 0 {
            let a = 2.0 * j as f64;
            coef *= (sf + a - 1.0) * (sf + a) / ((a + 1.0) * (a + 2.0));
            power /= M * M;
        }
        tail += b * coef * power;
    }
    head + tail
}

pub fn zeta(s: u32) -> f64 {
    1.0 + zeta_minus_one(s)
}

fn mobius(mut k: u32) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= k {
        if k % p == 0 {
            k /= p;
            if k % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if k > 1 {
        sign = -sign;
    }
    sign
}

/// Prime zeta P(s) = Σ_p p^{-s} = Σ_k μ(k)/k · ln ζ(ks).
pub fn prime_zeta(s: u32) -> f64 {
    assert!(s >= 2, "prime_zeta needs s >= 2");
    let mut total = 0.0;
    let mut k = 1u32;
    loop {
        let ks = k * s;
        if ks > 1100 {
            break;
        }
        let z = zeta_minus_one(ks);
        if z < 1e-22 {
            break;
        }
        let mu = mobius(k);
        if mu != 0 {
            total += mu as f64 / k as f64 * z.ln_1p();
        }
        k += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        assert!((zeta(2) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((zeta(3) - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((zeta(4) - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-15);
        let direct: f64 = (2..6).map(|j| (j as f64).powi(-40)).sum();
        assert!((zeta_minus_one(40) - direct).abs() < 1e-27);
    }

    #[test]
    fn prime_zeta_values() {
        assert!((prime_zeta(2) - 0.452_247_420_041_065_5).abs() < 1e-15);
        assert!((prime_zeta(3) - 0.174_762_639_299_443_54).abs() < 1e-15);
        // direct sum check for a fast-converging case
        let direct: f64 = crate::arith::primes::sieve(100_000)
            .iter()
            .map(|&p| (p as f64).powi(-5))
            .sum();
        assert!((prime_zeta(5) - direct).abs() < 1e-15);
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
    }
}
