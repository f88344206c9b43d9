//! Two-point correlation of the k = 1 limiting process.

use crate::error::{Error, Result};
use crate::limit::{simulate_limit_window, AlphaKind, LimitConfig, Truncation};
use crate::mc::{domain, StreamFactory};
use crate::stats::mean_and_stderr;
use serde::Serialize;

/// φ_θ(x) = θ/(θ+1) + (θ/x²) Σ_{1≤a≤|x|} a(1 − a/|x|)^{θ−1}.
pub fn pair_correlation_phi(theta: f64, x: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter("theta must be positive".into()));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("pair correlation is defined for finite x != 0, got {x}")));
    }
    let ax = x.abs();
    let sum: f64 = (1..=ax.floor() as u64)
        .map(|a| {
            let a = a as f64;
            a * (1.0 - a / ax).powf(theta - 1.0)
        })
        .sum();
    Ok(theta / (theta + 1.0) + theta / (x * x) * sum)
}

/// Exact ∫_{s1}^{s2} φ_θ for 0 < s1 < s2, from
/// ∫ θ a (1 − a/s)^{θ−1}/s² ds = (1 − a/s)^θ.
pub fn pair_correlation_integral(theta: f64, s1: f64, s2: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter("theta must be positive".into()));
    }
    if !(s1 > 0.0 && s1 < s2 && s2.is_finite()) {
        return Err(Error::Domain(format!("need 0 < s1 < s2, got [{s1}, {s2}]")));
    }
    let mut total = theta / (theta + 1.0) * (s2 - s1);
    for a in 1..=s2.floor() as u64 {
        let a = a as f64;
        let upper = (1.0 - a / s2).powf(theta);
        let lower = if a < s1 { (1.0 - a / s1).powf(theta) } else { 0.0 };
        total += upper - lower;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelationEstimate {
    pub lag: f64,
    pub half_bin: f64,
    pub density: f64,
    pub std_error: f64,
    /// Bin average of φ_θ, the target of `density`.
    pub expected: f64,
}

/// Monte Carlo estimate of the pair density at `lag`: ordered pairs of
/// points with the first in [0, width] and separation in
/// [lag − h, lag + h], divided by width·2h and averaged over replicates.
pub fn pair_correlation_mc(
    theta: f64,
    lag: f64,
    half_bin: f64,
    width: f64,
    truncation: Truncation,
    reps: u64,
    seed: u64,
) -> Result<PairCorrelationEstimate> {
    if !(half_bin > 0.0 && lag - half_bin > 0.0) {
        return Err(Error::InvalidParameter("need 0 < lag − half_bin".into()));
    }
    if !(width > 0.0) || reps == 0 {
        return Err(Error::InvalidParameter("width and reps must be positive".into()));
    }
    let mut cfg = LimitConfig::new(1, theta, AlphaKind::Irrational, (0.0, width + lag + half_bin));
    cfg.truncation = truncation;
    cfg.validate()?;
    let (lo, hi) = (lag - half_bin, lag + half_bin);
    let per_rep: Vec<f64> = StreamFactory::new(seed)
        .replicates(domain::CORRELATION, reps, |_, rng| {
            let sample = simulate_limit_window(&cfg, rng)?;
            let pts = &sample.points;
            let mut pairs = 0u128;
            for (i, p) in pts.iter().enumerate() {
                if p.position > width {
                    break;
                }
                for q in &pts[i + 1..] {
                    let d = q.position - p.position;
                    if d > hi {
                        break;
                    }
                    if d >= lo {
                        pairs += p.multiplicity * q.multiplicity;
                    }
                }
            }
            Ok(pairs as f64 / (width * 2.0 * half_bin))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let (density, std_error) = mean_and_stderr(&per_rep);
    Ok(PairCorrelationEstimate {
        lag,
        half_bin,
        density,
        std_error,
        expected: pair_correlation_integral(theta, lo, hi)? / (2.0 * half_bin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(pair_correlation_phi(1.0, 0.7).unwrap(), 0.5);
        assert_eq!(pair_correlation_phi(1.0, -0.3).unwrap(), 0.5);
        assert!((pair_correlation_phi(1.0, 2.0).unwrap() - 1.25).abs() < 1e-15);
        // θ=2, x=1.5: 2/3 + (2/2.25)·(1/3)
        assert!((pair_correlation_phi(2.0, 1.5).unwrap() - (2.0 / 3.0 + 2.0 / 2.25 / 3.0)).abs() < 1e-15);
        assert!(matches!(pair_correlation_phi(1.0, 0.0), Err(Error::Domain(_))));
        // Approaches the squared intensity.
        assert!((pair_correlation_phi(1.0, 1e4).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn integral_matches_quadrature() {
        for &theta in &[0.5, 1.0, 2.0, 3.5] {
            for &(a, b) in &[(0.2f64, 0.9f64), (1.25, 1.75), (0.5, 3.7), (2.25, 2.75)] {
                // Split at integers and substitute x = l + u² to tame the
                // (x − a)^{θ−1} endpoint singularities.
                let mut cuts = vec![a];
                cuts.extend((a.ceil() as u64..=b.floor() as u64).map(|i| i as f64).filter(|&i| i > a && i < b));
                cuts.push(b);
                let n = 20_000;
                let quad: f64 = cuts
                    .windows(2)
                    .map(|w| {
                        let top = (w[1] - w[0]).sqrt();
                        let h = top / n as f64;
                        (0..n)
                            .map(|i| {
                                let u = (i as f64 + 0.5) * h;
                                pair_correlation_phi(theta, w[0] + u * u).unwrap() * 2.0 * u * h
                            })
                            .sum::<f64>()
                    })
                    .sum();
                let exact = pair_correlation_integral(theta, a, b).unwrap();
                assert!((quad - exact).abs() < 1e-6, "θ={theta} [{a},{b}]: {quad} vs {exact}");
            }
        }
    }

    #[test]
    fn monte_carlo_small() {
        let est = pair_correlation_mc(1.0, 1.5, 0.25, 8.0, Truncation::Adaptive { epsilon: 1e-5, r_max: 4096 }, 20_000, 3).unwrap();
        assert!((est.density - est.expected).abs() < 4.0 * est.std_error, "{est:?}");
    }
}
