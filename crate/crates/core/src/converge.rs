//! Finite-n window counts against the limiting process.

use crate::arith::Angle;
use crate::error::{Error, Result};
use crate::ewens::{ChineseRestaurant, Theta};
use crate::limit::{simulate_limit_window, AlphaKind, LimitConfig, Truncation, DEFAULT_PRIME_CUTOFF};
use crate::mc::{domain, StreamFactory};
use crate::spectrum::{orbit_spectrum, to_f64, window_points};
use crate::stats::{chi_square_two_sample, histogram, total_variation};
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct ConvergeConfig {
    pub n_list: Vec<u64>,
    pub theta: Theta,
    pub k: usize,
    pub alpha: Angle,
    pub half_width: BigRational,
    pub reps: u64,
    pub seed: u64,
    pub truncation: Truncation,
    pub prime_cutoff: usize,
}

impl ConvergeConfig {
    pub fn new(n_list: Vec<u64>, theta: Theta, k: usize, alpha: Angle, half_width: BigRational, reps: u64, seed: u64) -> Self {
        Self {
            n_list,
            theta,
            k,
            alpha,
            half_width,
            reps,
            seed,
            truncation: Truncation::default(),
            prime_cutoff: DEFAULT_PRIME_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeRow {
    pub n: u64,
    pub mean_count: f64,
    pub histogram: Vec<u64>,
    pub total_variation: f64,
    pub chi_square_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeReport {
    pub limit_kind: String,
    pub limit_mean_count: f64,
    pub limit_histogram: Vec<u64>,
    pub rows: Vec<ConvergeRow>,
}

impl ConvergeReport {
    pub fn tv_nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].total_variation <= w[0].total_variation)
    }
}

/// The limit kind matching a centre α: irrational, rational with
/// denominator t, or zero.
pub fn limit_kind_for(alpha: &Angle) -> AlphaKind {
    match alpha {
        Angle::Rational { num: 0, .. } | Angle::Rational { den: 1, .. } => AlphaKind::Zero,
        Angle::Rational { den, .. } => AlphaKind::Rational(*den),
        Angle::Irrational { .. } => AlphaKind::Irrational,
    }
}

fn to_u64(c: u128) -> u64 {
    u64::try_from(c).unwrap_or(u64::MAX)
}

/// Count distributions in (−T, T), the atom at 0 excluded on both sides.
/// Finite-n replicates grow one Chinese restaurant through the sorted n
/// values, so the sizes are coupled within a replicate.
pub fn cmd_converge(cfg: &ConvergeConfig) -> Result<ConvergeReport> {
    if cfg.n_list.is_empty() || cfg.n_list.contains(&0) {
        return Err(Error::InvalidParameter("n_list must hold positive sizes".into()));
    }
    if cfg.reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    if !cfg.half_width.is_positive() {
        return Err(Error::InvalidParameter("window half-width T must be positive".into()));
    }
    let mut ns = cfg.n_list.clone();
    ns.sort_unstable();
    ns.dedup();

    let finite: Vec<Vec<u64>> = StreamFactory::new(cfg.seed)
        .replicates(domain::CONVERGE_FINITE, cfg.reps, |_, rng| {
            let mut crp = ChineseRestaurant::new(&cfg.theta);
            ns.iter()
                .map(|&n| {
                    crp.advance_to(n, rng);
                    let spec = orbit_spectrum(&crp.cycle_type(), cfg.k)?;
                    let w = window_points(&spec, &cfg.alpha, &cfg.half_width)?;
                    if !cfg.alpha.is_rational() {
                        w.require_certified()?;
                    }
                    Ok(to_u64(w.count_nonzero()))
                })
                .collect::<Result<Vec<u64>>>()
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let t = to_f64(&cfg.half_width);
    let kind = limit_kind_for(&cfg.alpha);
    let mut lcfg = LimitConfig::new(cfg.k, cfg.theta.value(), kind, (-t, t));
    lcfg.truncation = cfg.truncation;
    lcfg.prime_cutoff = cfg.prime_cutoff;
    lcfg.validate()?;
    let limit: Vec<u64> = StreamFactory::new(cfg.seed)
        .replicates(domain::CONVERGE_LIMIT, cfg.reps, |_, rng| {
            simulate_limit_window(&lcfg, rng).map(|s| to_u64(s.count_open(-t, t)))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let limit_hist = histogram(limit.iter().copied());
    let mean = |v: &mut dyn Iterator<Item = u64>| v.map(|c| c as f64).sum::<f64>() / cfg.reps as f64;

    let rows = ns
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let hist = histogram(finite.iter().map(|r| r[idx]));
            ConvergeRow {
                n,
                mean_count: mean(&mut finite.iter().map(|r| r[idx])),
                total_variation: total_variation(&hist, &limit_hist),
                chi_square_p: chi_square_two_sample(&hist, &limit_hist).p_value,
                histogram: hist,
            }
        })
        .collect();
    Ok(ConvergeReport {
        limit_kind: kind.to_string(),
        limit_mean_count: mean(&mut limit.iter().copied()),
        limit_histogram: limit_hist,
        rows,
    })
}
