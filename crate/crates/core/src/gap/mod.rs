//! Eigenvalue gap probabilities: Monte Carlo for any θ, and for θ = 1 an
//! exact power series assembled from hypergraphs, Euler products and PD(1)
//! moments.

mod correlation;
mod exppoly;
mod hypergraph;
mod moments;
mod montecarlo;
mod psi;
mod series;
mod sg;

pub use correlation::{pair_correlation_integral, pair_correlation_mc, pair_correlation_phi, PairCorrelationEstimate};
pub use exppoly::ExpPoly;
pub use hypergraph::{
    enumerate_hypergraphs, enumerate_hypergraphs_with_limit, enumeration_cost, DegreeSequence, EdgeSet, Hypergraph,
    DEFAULT_ENUMERATION_LIMIT,
};
pub use moments::pd1_label_summed_moment;
pub use montecarlo::{gap_mc, GapMcConfig, GapMcResult};
pub use psi::{psi_component, psi_g, PsiCache, PsiValue, MAX_PRIME_BOUND};
pub use series::{
    check_integral_equation, gap_series, gap_series_eval, gap_series_with, integrate, Coefficient, GapSeries,
    SeriesOptions,
};
pub use sg::{s_g_exact, s_g_f64, s_g_series};
