//! Contour and ξ-moment integrals that turn `s₋₁₋ₖ(x₀)` into the local heat
//! coefficient `a_k(x₀)`.
//!
//! Values are kept as `c · Γ(T) · vol(S^{n−2}) / (2π)^{n−1}` with `c` exact
//! and the Γ-argument `T` stored alongside; see [`GammaTag`].

use std::fmt;

use thiserror::Error;

use crate::dtn::{pipeline, DtnError};
use crate::exact::{factorial, rising, Gauss, Rational};
use crate::geometry::GeometryJet;
use crate::jet::Mono;
use crate::symbol::{Key, Symbol};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HeatError {
    #[error(transparent)]
    Dtn(#[from] DtnError),
    #[error("term without a resolvent factor under the contour integral")]
    TauFreeTerm,
    #[error("moment integral diverges: Γ({arg}) with n = {n}")]
    Divergent { n: usize, arg: i64 },
    #[error("a_{k} needs n >= {needed}, got n = {n}")]
    Dimension { k: usize, n: usize, needed: usize },
}

/// `Γ(arg) · vol(S^{n−2}) / (2π)^{n−1}`, kept symbolic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GammaTag {
    pub n: usize,
    pub arg: i64,
}

impl GammaTag {
    /// The tag used for `a_k`: `Γ(n−1)` for `k ≤ 1`, `Γ(n−k)` otherwise.
    pub fn for_coefficient(n: usize, k: usize) -> GammaTag {
        GammaTag { n, arg: n as i64 - k.max(1) as i64 }
    }

    /// Floating-point value of the tag.
    pub fn to_f64(&self) -> f64 {
        let n = self.n as f64;
        let vol = 2.0 * std::f64::consts::PI.powf((n - 1.0) / 2.0) / gamma_f64((n - 1.0) / 2.0);
        gamma_f64(self.arg as f64) * vol / (2.0 * std::f64::consts::PI).powf(n - 1.0)
    }
}

impl fmt::Display for GammaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Γ({})·vol(S^{})/(2π)^{}", self.arg, self.n as i64 - 2, self.n - 1)
    }
}

/// Γ on positive integers and half-integers, which is all the tags need.
fn gamma_f64(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    assert!(twice > 0 && (2.0 * x - twice as f64).abs() < 1e-12, "Γ only at positive half-integers");
    if twice % 2 == 0 {
        (1..twice / 2).map(|k| k as f64).product()
    } else {
        let mut v = std::f64::consts::PI.sqrt();
        let mut t = 0.5;
        while t < x - 0.25 {
            v *= t;
            t += 1.0;
        }
        v
    }
}

/// Exact coefficient times a Γ-tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedValue {
    pub coeff: Gauss,
    pub tag: GammaTag,
}

impl TaggedValue {
    pub fn to_f64(&self) -> f64 {
        self.coeff.re.to_f64() * self.tag.to_f64()
    }
}

impl fmt::Display for TaggedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} × {}", self.coeff, self.tag)
    }
}

/// `Γ(a)/Γ(t)` for positive integers.
pub fn gamma_ratio(a: i64, t: i64) -> Rational {
    assert!(a > 0 && t > 0);
    if a >= t {
        rising(t, (a - t) as u32)
    } else {
        rising(a, (t - a) as u32).recip()
    }
}

/// Contour integral in `τ`: `s₋₁^p ↦ e^{−w₁}/(p−1)!`, with the orientation
/// fixed so that `a₀ > 0`. The result's terms carry an implicit `e^{−w₁}`.
pub fn tau_integral(s: &Symbol) -> Result<Symbol, HeatError> {
    let ctx = s.ctx().clone();
    let mut raw = Vec::with_capacity(s.len());
    for (k, c) in s.terms() {
        if k.q == 0 {
            return Err(HeatError::TauFreeTerm);
        }
        raw.push(crate::symbol::RawTerm {
            coeff: c.scale(&factorial(k.q as u32 - 1).recip()),
            xi: k.xi,
            x: k.x,
            w1_pow: k.eps as i32 - 2 * k.m as i32,
            s_pow: 0,
        });
    }
    Ok(Symbol::normalize(&ctx, s.order, &raw))
}

/// Average of `ω^β` over the unit sphere `S^{d−1}`, `d = n − 1`.
pub fn sphere_average(beta: &[u32], n: usize) -> Rational {
    if beta.iter().any(|b| b % 2 == 1) {
        return Rational::zero();
    }
    let mut num = Rational::one();
    let mut total = 0u32;
    for &b in beta {
        for j in (1..b).step_by(2) {
            num = &num * &Rational::from_int(j as i64);
        }
        total += b / 2;
    }
    let mut den = Rational::one();
    for j in 1..=total {
        den = &den * &Rational::from_int(n as i64 - 3 + 2 * j as i64);
    }
    &num / &den
}

/// `∫ ξ^β w₁^e e^{−w₁} dξ′` over `ℝ^{n−1}` at the flat base point, as a
/// multiple of `Γ(t)·vol(S^{n−2})`.
pub fn moment(beta: &[u32], e: i64, n: usize, t: i64) -> Result<Rational, HeatError> {
    let avg = sphere_average(beta, n);
    if avg.is_zero() {
        return Ok(avg);
    }
    let arg = n as i64 - 1 + e + beta.iter().map(|&b| b as i64).sum::<i64>();
    if arg <= 0 {
        return Err(HeatError::Divergent { n, arg });
    }
    Ok(&avg * &gamma_ratio(arg, t))
}

/// ξ-integral of a weighted symbol at the base point, relative to the tag.
pub fn xi_moment(s: &Symbol, tag: GammaTag) -> Result<Gauss, HeatError> {
    let n = tag.n;
    let d = n - 1;
    let mut total = Gauss::default();
    for (k, c) in s.eval_x0().terms() {
        debug_assert_eq!(k.q, 0);
        let beta: Vec<u32> = (0..d).map(|a| k.xi.get(a) as u32).collect();
        let m = moment(&beta, k.eps as i64 - 2 * k.m as i64, n, tag.arg)?;
        total = &total + &c.scale(&m);
    }
    Ok(total)
}

fn check_dimension(n: usize, k: usize) -> Result<(), HeatError> {
    let needed = (k + 1).max(2);
    if n < needed {
        return Err(HeatError::Dimension { k, n, needed });
    }
    Ok(())
}

/// `a₀(x₀) … a_{k_max}(x₀)` from one pass of the symbol recursions.
pub fn heat_coefficients(jet: &GeometryJet, k_max: usize) -> Result<Vec<TaggedValue>, HeatError> {
    check_dimension(jet.n, k_max)?;
    let p = pipeline(jet, k_max)?;
    (0..=k_max)
        .map(|k| {
            let s = p.s.get(-1 - k as i32).expect("ladder reaches depth k_max + 1");
            let tag = GammaTag::for_coefficient(jet.n, k);
            let weighted = tau_integral(&s.eval_x0())?;
            Ok(TaggedValue { coeff: xi_moment(&weighted, tag)?, tag })
        })
        .collect()
}

pub fn heat_coefficient(jet: &GeometryJet, k: usize) -> Result<TaggedValue, HeatError> {
    Ok(heat_coefficients(jet, k)?.pop().expect("nonempty"))
}

/// Key of a pure ξ-monomial, for building test symbols.
pub fn xi_key(xi: Mono, eps: u8, m: u16, q: u16) -> Key {
    Key { xi, x: Mono::ONE, eps, m, q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ball_jet, random_jet, GeometryJet, RandomJetOptions};

    #[test]
    fn lemma_fixed_points() {
        for n in 3..=8usize {
            let t = GammaTag { n, arg: n as i64 - 1 };
            let nn = n as i64;
            assert_eq!(moment(&[0; 7][..n - 1], 0, n, t.arg).unwrap(), Rational::one());
            let mut b = vec![0u32; n - 1];
            b[0] = 2;
            assert_eq!(moment(&b, -2, n, t.arg).unwrap(), Rational::new(1, nn - 1));
            b[0] = 4;
            assert_eq!(moment(&b, -4, n, t.arg).unwrap(), Rational::new(3, nn * nn - 1));
            b[0] = 2;
            b[1] = 2;
            assert_eq!(moment(&b, -4, n, t.arg).unwrap(), Rational::new(1, nn * nn - 1));
            b[1] = 1;
            assert!(moment(&b, -3, n, t.arg).unwrap().is_zero());
        }
    }

    #[test]
    fn moment_examples_n3() {
        // unit Γ(2)·vol(S¹) = 2π
        assert_eq!(moment(&[2, 0], -2, 3, 2).unwrap(), Rational::new(1, 2));
        assert_eq!(moment(&[2, 2], -4, 3, 2).unwrap(), Rational::new(1, 8));
    }

    #[test]
    fn divergent_moment() {
        assert!(matches!(moment(&[0, 0], -2, 3, 1), Err(HeatError::Divergent { .. })));
    }

    #[test]
    fn gamma_tag_values() {
        let t = GammaTag { n: 3, arg: 2 };
        assert!((t.to_f64() - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        let t = GammaTag { n: 2, arg: 1 };
        assert!((t.to_f64() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        let t = GammaTag { n: 4, arg: 3 };
        // Γ(3)·4π/(2π)³
        assert!((t.to_f64() - 8.0 * std::f64::consts::PI / (2.0 * std::f64::consts::PI).powi(3)).abs() < 1e-15);
        assert_eq!(gamma_ratio(5, 3), Rational::from_int(12));
        assert_eq!(gamma_ratio(3, 5), Rational::new(1, 12));
    }

    #[test]
    fn tau_integral_factorials() {
        let ctx = crate::symbol::SymCtx::flat(3);
        let s = Symbol::s(&ctx);
        let s3 = s.mul(&s).mul(&s);
        let out = tau_integral(&s3).unwrap();
        assert_eq!(out.coeff(&xi_key(Mono::ONE, 0, 0, 0)), Gauss::frac(1, 2));
        assert_eq!(tau_integral(&Symbol::w1(&ctx)), Err(HeatError::TauFreeTerm));
    }

    #[test]
    fn leading_coefficient_is_one() {
        for n in 2..=6 {
            let jet = random_jet(n, 1, 3, RandomJetOptions::default());
            let a = heat_coefficients(&jet, 0).unwrap();
            assert_eq!(a[0].coeff, Gauss::from_int(1));
            assert_eq!(a[0].tag, GammaTag { n, arg: n as i64 - 1 });
        }
    }

    #[test]
    fn a1_vanishes_for_n2() {
        for seed in 0..5 {
            let jet = random_jet(2, 1, seed, RandomJetOptions { with_a: true, with_q: true });
            assert!(heat_coefficient(&jet, 1).unwrap().coeff.is_zero());
        }
    }

    #[test]
    fn unit_three_ball() {
        let jet = ball_jet(3, Rational::one()).unwrap();
        let a = heat_coefficients(&jet, 2).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        // totals over the unit sphere: 2, 1, 1/3
        assert!((a[0].to_f64() * 2.0 * two_pi - 2.0).abs() < 1e-12);
        assert!((a[1].to_f64() * 2.0 * two_pi - 1.0).abs() < 1e-12);
        assert!((a[2].to_f64() - 1.0 / (12.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn dimension_guard() {
        let jet = GeometryJet::flat(3, 3).unwrap();
        assert!(matches!(heat_coefficient(&jet, 3), Err(HeatError::Dimension { needed: 4, .. })));
    }

    #[test]
    fn scale_covariance_on_balls() {
        for n in [3usize, 4] {
            let base = heat_coefficients(&ball_jet(n, Rational::one()).unwrap().with_q_const(Rational::new(1, 3)), n - 1)
                .unwrap();
            for r in [Rational::from_int(2), Rational::new(1, 2)] {
                let q = &Rational::new(1, 3) / &(&r * &r);
                let jet = ball_jet(n, r.clone()).unwrap().with_q_const(q);
                let a = heat_coefficients(&jet, n - 1).unwrap();
                for k in 0..a.len() {
                    let expect = base[k].coeff.scale(&r.pow(k as u32).recip());
                    assert_eq!(a[k].coeff, expect, "n {n} k {k}");
                }
            }
        }
    }
}
