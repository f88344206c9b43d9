//! Monte Carlo gap probability
//! P = E[Π_{i_1<…<i_k} (1 − min(x·V_{i_1}…V_{i_k}/g_k, 1))], x = y₂ − y₁.

use crate::error::{Error, Result};
use crate::limit::{for_each_subset, AlphaKind, LimitSkeleton, TruncationReport, Truncation, DEFAULT_PRIME_CUTOFF};
use crate::mc::{domain, StreamFactory};
use crate::stats::mean_and_stderr;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapMcConfig {
    pub k: usize,
    pub theta: f64,
    pub y1: f64,
    pub y2: f64,
    pub truncation: Truncation,
    pub prime_cutoff: usize,
    pub reps: u64,
    pub seed: u64,
    /// Fail with `TruncationTooSmall` when the bias bound exceeds this.
    pub tolerance: Option<f64>,
}

impl GapMcConfig {
    pub fn new(k: usize, theta: f64, y1: f64, y2: f64, reps: u64, seed: u64) -> Self {
        Self {
            k,
            theta,
            y1,
            y2,
            truncation: Truncation::default(),
            prime_cutoff: DEFAULT_PRIME_CUTOFF,
            reps,
            seed,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapMcResult {
    pub estimate: f64,
    pub std_error: f64,
    /// Bound on |E[estimate] − P| from truncation: x·(residual stick mass)
    /// for the omitted subsets plus the prime-cutoff risk.
    pub bias_bound: f64,
    pub reps: u64,
    pub truncation: Option<TruncationReport>,
}

fn replicate(cfg: &GapMcConfig, x: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<(f64, TruncationReport)> {
    let skel = LimitSkeleton::sample(cfg.k, cfg.theta, AlphaKind::Irrational, cfg.truncation, cfg.prime_cutoff, rng)?;
    let sticks = &skel.sticks.sticks;
    let mut prod = 1.0f64;
    for_each_subset(skel.r(), cfg.k, |subset| {
        if prod == 0.0 {
            return Ok(());
        }
        let mass: f64 = subset.iter().map(|&i| sticks[i]).product();
        let g = skel.g(subset)? as f64;
        prod *= 1.0 - (x * mass / g).min(1.0);
        Ok(())
    })?;
    Ok((prod, skel.report(cfg.k, x)))
}

pub fn gap_mc(cfg: &GapMcConfig) -> Result<GapMcResult> {
    if cfg.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(cfg.theta > 0.0 && cfg.theta.is_finite()) {
        return Err(Error::InvalidParameter("theta must be positive".into()));
    }
    if !(cfg.y1.is_finite() && cfg.y2.is_finite() && cfg.y1 <= cfg.y2) {
        return Err(Error::InvalidParameter(format!("need y1 <= y2, got {} and {}", cfg.y1, cfg.y2)));
    }
    if cfg.reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    let x = cfg.y2 - cfg.y1;
    if x == 0.0 {
        return Ok(GapMcResult { estimate: 1.0, std_error: 0.0, bias_bound: 0.0, reps: cfg.reps, truncation: None });
    }
    // Validate truncation settings through the limit config checks.
    let mut probe = crate::limit::LimitConfig::new(cfg.k, cfg.theta, AlphaKind::Irrational, (0.0, x));
    probe.truncation = cfg.truncation;
    probe.prime_cutoff = cfg.prime_cutoff;
    probe.validate()?;

    let results: Vec<(f64, TruncationReport)> = StreamFactory::new(cfg.seed)
        .replicates(domain::GAP, cfg.reps, |_, rng| replicate(cfg, x, rng))
        .into_iter()
        .collect::<Result<_>>()?;
    let values: Vec<f64> = results.iter().map(|r| r.0).collect();
    let worst = TruncationReport::worst(results.iter().map(|r| &r.1)).expect("reps > 0");
    // omitted_intensity_bound is x·k·residual; the product bias needs only x·residual.
    let bias_bound = x * worst.residual + worst.prime_cutoff_bound;
    if let Some(tol) = cfg.tolerance {
        if bias_bound > tol {
            return Err(Error::TruncationTooSmall { bound: bias_bound, tolerance: tol });
        }
    }
    let (estimate, se) = mean_and_stderr(&values);
    Ok(GapMcResult {
        estimate,
        std_error: if cfg.reps > 1 { se } else { f64::NAN },
        bias_bound,
        reps: cfg.reps,
        truncation: Some(worst),
    })
}
