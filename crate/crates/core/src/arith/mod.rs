//! Exact integer and rational number theory shared by the rest of the crate.

mod angle;
mod factor;
pub mod primes;
pub mod zeta;

pub(crate) use angle::parse_decimal as angle_parse_decimal;
pub use angle::{format_decimal, psi_alpha, Angle, Interval, DEFAULT_PRECISION_BITS, MIN_PRECISION_BITS};
pub use factor::{factor_exponents, g_k, lcm_u64, ExponentMatrix, PrimeCutoff};
