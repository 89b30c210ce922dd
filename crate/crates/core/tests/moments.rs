//! Moment rule against direct numerical integration over `ℝ^{n−1}`.

use std::f64::consts::PI;

use dtn_heat::heat::{moment, sphere_average};
use dtn_heat::jet::monomials_of_degree;
use proptest::prelude::*;
use quadrature::double_exponential::integrate;

/// `∫_{S^{d−1}} ω^β dω` for d = 2, 3 by quadrature in polar / spherical angles.
fn sphere_integral(beta: &[u32]) -> f64 {
    let p = |x: f64, e: u32| x.powi(e as i32);
    match beta.len() {
        2 => integrate(|th| p(th.cos(), beta[0]) * p(th.sin(), beta[1]), 0.0, 2.0 * PI, 1e-13).integral,
        3 => integrate(
            |th| {
                let inner = integrate(
                    |ph| p(th.sin() * ph.cos(), beta[0]) * p(th.sin() * ph.sin(), beta[1]),
                    0.0,
                    2.0 * PI,
                    1e-13,
                )
                .integral;
                inner * p(th.cos(), beta[2]) * th.sin()
            },
            0.0,
            PI,
            1e-12,
        )
        .integral,
        _ => unreachable!(),
    }
}

/// `∫_0^∞ r^p e^{−r} dr`.
fn radial_integral(p: i64) -> f64 {
    integrate(|r| r.powi(p as i32) * (-r).exp(), 0.0, 60.0, 1e-13).integral
        + integrate(|r| r.powi(p as i32) * (-r).exp(), 60.0, 200.0, 1e-13).integral
}

fn sphere_volume(d: usize) -> f64 {
    match d {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    }
}

#[test]
fn even_moment_rule_matches_quadrature() {
    for n in [3usize, 4] {
        let d = n - 1;
        for deg in 0..=3u32 {
            for mono in monomials_of_degree(d, deg) {
                let beta: Vec<u32> = mono.exps(d);
                for e in -2i64..=2 {
                    let p = d as i64 - 1 + deg as i64 + e;
                    if p < 0 {
                        continue;
                    }
                    // tag Γ(1)·vol(S^{n−2})
                    let exact = moment(&beta, e, n, 1).unwrap().to_f64() * sphere_volume(d);
                    let numeric = sphere_integral(&beta) * radial_integral(p);
                    let scale = exact.abs().max(1.0);
                    assert!((exact - numeric).abs() <= 1e-8 * scale, "n {n} beta {beta:?} e {e}: {exact} vs {numeric}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn sphere_average_is_symmetric_and_consistent(
        beta in proptest::collection::vec(0u32..5, 2..5),
        n_extra in 0usize..3,
    ) {
        let n = beta.len() + 1 + n_extra;
        let mut padded = beta.clone();
        padded.resize(n - 1, 0);
        let avg = sphere_average(&padded, n);
        let mut rev = padded.clone();
        rev.reverse();
        prop_assert_eq!(&avg, &sphere_average(&rev, n));
        // Σ_i ω_i² = 1 on the sphere
        let mut total = dtn_heat::exact::Rational::zero();
        for i in 0..padded.len() {
            let mut b = padded.clone();
            b[i] += 2;
            total = &total + &sphere_average(&b, n);
        }
        prop_assert_eq!(total, avg);
    }

    #[test]
    fn odd_moments_vanish(beta in proptest::collection::vec(0u32..4, 3), e in 0i64..3) {
        prop_assume!(beta.iter().any(|b| b % 2 == 1));
        prop_assert!(moment(&beta, e, 4, 1).unwrap().is_zero());
    }
}
