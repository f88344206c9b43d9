//! Power series of the θ = 1 gap probability in x = y₂ − y₁:
//! P = Σ_m c_m (−x)^m, valid for x ≤ k^k.

use super::hypergraph::{enumerate_hypergraphs_with_limit, DegreeSequence, DEFAULT_ENUMERATION_LIMIT};
use super::moments::pd1_label_summed_moment;
use super::psi::PsiCache;
use crate::error::{Error, Result};
use crate::spectrum::to_f64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub m: usize,
    pub value: f64,
    /// Present when the coefficient is known exactly (always for k = 1).
    pub exact: Option<BigRational>,
    /// Certified bound on |value − c_m|; 0 for exact coefficients.
    pub err: f64,
}

impl Coefficient {
    fn exact(m: usize, r: BigRational) -> Self {
        Self { m, value: to_f64(&r), exact: Some(r), err: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSeries {
    pub k: usize,
    pub coeffs: Vec<Coefficient>,
}

impl GapSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest x the series represents the gap probability for.
    pub fn radius(&self) -> f64 {
        (self.k as f64).powi(self.k as i32)
    }

    /// |c_M| x^M, a proxy for the truncation error when terms decrease.
    pub fn last_term(&self, x: f64) -> f64 {
        let c = self.coeffs.last().expect("c_0 is always present");
        c.value.abs() * x.powi(c.m as i32)
    }

    /// `{"k":K,"coeffs":[{"m":0,"value":"1","err":"0"},…]}`; exact values are
    /// written as rationals.
    pub fn to_json(&self) -> String {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let (value, err) = match &c.exact {
                    Some(r) => (r.to_string(), "0".to_string()),
                    None => (format!("{:?}", c.value), format!("{:e}", c.err)),
                };
                CoefficientJson { m: c.m, value, err }
            })
            .collect();
        serde_json::to_string(&SeriesJson { k: self.k, coeffs }).expect("plain data serializes")
    }
}

#[derive(Serialize)]
struct CoefficientJson {
    m: usize,
    value: String,
    err: String,
}

#[derive(Serialize)]
struct SeriesJson {
    k: usize,
    coeffs: Vec<CoefficientJson>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub enumeration_limit: u128,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { enumeration_limit: DEFAULT_ENUMERATION_LIMIT }
    }
}

pub fn gap_series(k: usize, order: usize, tolerance: f64) -> Result<GapSeries> {
    gap_series_with(k, order, tolerance, SeriesOptions::default())
}

/// c_m = Σ_{G ∈ A_k^m} ψ(G) · Σ_{H ≅ G label-wise} E[L^H], for m ≤ order.
pub fn gap_series_with(k: usize, order: usize, tolerance: f64, opts: SeriesOptions) -> Result<GapSeries> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let psi = PsiCache::new(tolerance);
    let mut moments: HashMap<DegreeSequence, BigRational> = HashMap::new();
    let mut coeffs = vec![Coefficient::exact(0, BigRational::one())];
    for m in 1..=order {
        let graphs = enumerate_hypergraphs_with_limit(k, m, opts.enumeration_limit)?;
        let mut exact_sum = Some(BigRational::zero());
        let (mut value, mut err, mut weight) = (0.0f64, 0.0f64, 0.0f64);
        for g in &graphs {
            let d = g.degree_sequence();
            let moment = match moments.get(&d) {
                Some(mo) => mo.clone(),
                None => {
                    let mo = pd1_label_summed_moment(&d)?;
                    moments.insert(d, mo.clone());
                    mo
                }
            };
            let p = psi.psi(g)?;
            if p.err == 0.0 && p.value == 1.0 {
                if let Some(s) = exact_sum.as_mut() {
                    *s += &moment;
                }
            } else {
                exact_sum = None;
            }
            let mf = to_f64(&moment);
            value += p.value * mf;
            err += p.err * mf;
            weight += mf;
        }
        coeffs.push(match exact_sum {
            Some(r) => Coefficient::exact(m, r),
            None => Coefficient {
                m,
                value,
                exact: None,
                // Products and the running sum round at most once per term.
                err: err * (1.0 + 1e-12) + 4.0 * (graphs.len() as f64 + 2.0) * f64::EPSILON * weight,
            },
        });
    }
    Ok(GapSeries { k, coeffs })
}

/// (Σ c_m (−x)^m, Σ err_m x^m) for 0 ≤ x ≤ k^k.
pub fn gap_series_eval(series: &GapSeries, x: f64) -> Result<(f64, f64)> {
    if !(x >= 0.0 && x <= series.radius()) {
        return Err(Error::Domain(format!(
            "series for k={} is valid for 0 <= y2-y1 <= {}, got {x}",
            series.k,
            series.radius()
        )));
    }
    Ok(eval_unchecked(series, x))
}

fn eval_unchecked(series: &GapSeries, x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut err = 0.0;
    for c in series.coeffs.iter().rev() {
        value = value * -x + c.value;
        err = err * x + c.err;
    }
    (value, err + 4.0 * series.coeffs.len() as f64 * f64::EPSILON * value.abs().max(1.0))
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Max over the grid of |x·H(x) − ∫_0^1 (1−y) H(x−y) dy| with
/// H(u) = 1(u > 0)·(series at u); the θ = 1 gap equation for k = 1.
pub fn check_integral_equation(series: &GapSeries, grid: &[f64]) -> Result<f64> {
    if series.k != 1 {
        return Err(Error::InvalidParameter("the integral equation applies to k = 1".into()));
    }
    if let Some(&x) = grid.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::Domain(format!("grid points must lie in (0,1), got {x}")));
    }
    let h = |u: f64| if u > 0.0 { eval_unchecked(series, u).0 } else { 0.0 };
    Ok(grid
        .iter()
        .map(|&x| {
            let lhs = x * h(x);
            // H(x−y) vanishes for y ≥ x.
            let rhs = integrate(|y| (1.0 - y) * h(x - y), 0.0, x, 1e-15);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ewens::factorial;

    #[test]
    fn k1_is_bessel_series() {
        let s = gap_series(1, 10, 1e-12).unwrap();
        for c in &s.coeffs {
            let f = factorial(c.m as u64);
            assert_eq!(c.exact.as_ref().unwrap(), &BigRational::new(1.into(), f.clone() * f));
        }
        let (v, e) = gap_series_eval(&s, 1.0).unwrap();
        assert!((v - 0.223_890_779_141_235_67).abs() < 1e-9 + e);
        assert!(gap_series_eval(&s, 1.5).is_err());
    }

    #[test]
    fn k2_first_coefficients() {
        let s = gap_series(2, 2, 1e-9).unwrap();
        let c1 = &s.coeffs[1];
        let target = crate::arith::zeta::zeta(3) / (4.0 * crate::arith::zeta::zeta(2));
        assert!((c1.value - target).abs() <= c1.err + 1e-15);
        assert!((c1.value - 0.18269).abs() < 1e-5);
        assert!((s.coeffs[2].value - 0.01448).abs() < 1e-5);
        assert_eq!(s.coeffs[0].exact, Some(BigRational::one()));
    }

    #[test]
    fn c2_by_hand() {
        // ψ(path)·(11+5+2)/864 + 3ψ(matching)/576.
        use super::super::hypergraph::Hypergraph;
        use super::super::psi::psi_g;
        let path = psi_g(&Hypergraph::new(3, 2, &[vec![1, 2], vec![2, 3]]).unwrap(), 1e-10).unwrap();
        let matching = psi_g(&Hypergraph::new(4, 2, &[vec![1, 2], vec![3, 4]]).unwrap(), 1e-10).unwrap();
        let by_hand = path.value * 18.0 / 864.0 + 3.0 * matching.value / 576.0;
        let s = gap_series(2, 2, 1e-10).unwrap();
        assert!((s.coeffs[2].value - by_hand).abs() < 1e-10);
    }

    #[test]
    fn json_shape() {
        let s = gap_series(1, 2, 1e-9).unwrap();
        assert_eq!(
            s.to_json(),
            r#"{"k":1,"coeffs":[{"m":0,"value":"1","err":"0"},{"m":1,"value":"1","err":"0"},{"m":2,"value":"1/4","err":"0"}]}"#
        );
    }

    #[test]
    fn integral_equation() {
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let full = gap_series(1, 12, 1e-12).unwrap();
        assert!(check_integral_equation(&full, &grid).unwrap() < 1e-10);
        let short = gap_series(1, 3, 1e-12).unwrap();
        assert!(check_integral_equation(&short, &[0.9]).unwrap() > 1e-6);
        assert!(check_integral_equation(&full, &[1e-6]).unwrap() < 1e-12);
        assert!(check_integral_equation(&full, &[1.0]).is_err());
    }

    #[test]
    fn quadrature() {
        assert!((integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13) - 2.0).abs() < 1e-12);
    }
}
