//! Exact linear combinations of x^a·e^{−bx}.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Σ c·x^a·e^{−bx} with rational c, keyed by (rate b, power a).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl ExpPoly {
    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0, 0)
    }

    pub fn monomial(coeff: BigRational, power: u32, rate: u32) -> Self {
        let mut p = Self::default();
        p.add_term(coeff, power, rate);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &BigRational)> {
        self.terms.iter().map(|(&(b, a), c)| (a, b, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, coeff: BigRational, power: u32, rate: u32) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry((rate, power)).or_insert_with(BigRational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&(rate, power));
        }
    }

    /// Multiply by x^a·e^{−bx}.
    pub fn mul_monomial(&self, power: u32, rate: u32) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(b, a), c)| ((b + rate, a + power), c.clone())).collect(),
        }
    }

    /// F(x) = ∫_x^∞ f(t) dt, using
    /// ∫_x^∞ t^a e^{−bt} dt = e^{−bx} Σ_{j≤a} a!/j! · x^j / b^{a−j+1}.
    ///
    /// Panics on a term with rate 0, whose tail integral diverges.
    pub fn tail_integral(&self) -> Self {
        let mut out = Self::default();
        for (&(b, a), c) in &self.terms {
            assert!(b > 0, "tail integral of a non-decaying term");
            let bb = BigInt::from(b);
            // a!/j! built downward from j = a.
            let mut ratio = BigInt::one();
            for j in (0..=a).rev() {
                let denom = bb.pow(a - j + 1);
                out.add_term(c * BigRational::new(ratio.clone(), denom), j, b);
                ratio *= BigInt::from(j.max(1));
            }
        }
        out
    }

    pub fn eval_at_zero(&self) -> BigRational {
        self.terms
            .iter()
            .filter(|(&(_, a), _)| a == 0)
            .fold(BigRational::zero(), |acc, (_, c)| acc + c)
    }

    /// ∫_0^∞ f.
    pub fn integral(&self) -> BigRational {
        self.tail_integral().eval_at_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ewens::factorial;

    #[test]
    fn gamma_integrals() {
        for a in 0..=20u32 {
            let p = ExpPoly::one().mul_monomial(a, 1);
            assert_eq!(p.integral(), BigRational::from_integer(factorial(a as u64)), "a={a}");
        }
    }

    #[test]
    fn rates_scale() {
        // ∫ x^2 e^{−3x} = 2/27
        let p = ExpPoly::one().mul_monomial(2, 3);
        assert_eq!(p.integral(), BigRational::new(2.into(), 27.into()));
    }

    #[test]
    fn tail_differentiates_back() {
        // d/dx of ∫_x^∞ t^2 e^{−t} = −x^2 e^{−x}: check the closed form
        // e^{−x}(x^2 + 2x + 2).
        let t = ExpPoly::one().mul_monomial(2, 1).tail_integral();
        let got: Vec<(u32, u32, BigRational)> = t.terms().map(|(a, b, c)| (a, b, c.clone())).collect();
        let two = BigRational::from_integer(2.into());
        assert_eq!(
            got,
            vec![(0, 1, two.clone()), (1, 1, two), (2, 1, BigRational::one())]
        );
    }
}
