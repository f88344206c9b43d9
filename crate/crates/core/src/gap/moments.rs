//! Label-summed PD(1) moments Σ_{i_1<…<i_v} E[L_{i_1}^{d_1} … L_{i_v}^{d_v}].

use super::exppoly::ExpPoly;
use super::hypergraph::DegreeSequence;
use crate::error::{Error, Result};
use crate::ewens::factorial;
use num_rational::BigRational;

/// (1/D!) ∫_{x_1 > x_2 > … > x_v > 0} Π x_i^{d_i−1} e^{−x_i}, D = Σ d_i,
/// evaluated from the innermost variable x_1 outwards.
pub fn pd1_label_summed_moment(d: &DegreeSequence) -> Result<BigRational> {
    if d.0.is_empty() {
        return Ok(BigRational::from_integer(1.into()));
    }
    if d.0.contains(&0) {
        return Err(Error::InvalidParameter("degrees must be at least 1".into()));
    }
    let mut f = ExpPoly::one();
    for &di in &d.0 {
        f = f.mul_monomial(di - 1, 1).tail_integral();
    }
    Ok(f.eval_at_zero() / BigRational::from_integer(factorial(d.total() as u64)))
}
