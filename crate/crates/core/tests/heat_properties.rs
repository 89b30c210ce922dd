use dtn_heat::exact::{Gauss, Rational};
use dtn_heat::geometry::{curvature_package, random_jet, RandomJetOptions};
use dtn_heat::heat::heat_coefficients;
use dtn_heat::jet::Jet;
use dtn_heat::verify::{a_independence, grid_jet};
use proptest::prelude::*;

#[test]
fn magnetic_potential_drops_out() {
    for n in [4, 5, 6] {
        for seed in 0..20 {
            let runs = a_independence(n, seed, 3).unwrap();
            assert_eq!(runs.len(), 4);
            assert!(runs.iter().all(|r| r.equal), "n {n} seed {seed}");
        }
    }
}

#[test]
fn constant_shift_of_q_moves_a2() {
    let n = 3;
    let delta = Rational::new(7, 5);
    for seed in 0..5 {
        let jet = grid_jet(n, seed);
        let shifted = jet.clone().with_q(jet.q.add(&Jet::constant(n, jet.q.order, Gauss::real(delta.clone()))));
        let a = heat_coefficients(&jet, 2).unwrap();
        let b = heat_coefficients(&shifted, 2).unwrap();
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
        // tag Γ(1)·vol(S¹)/(2π)² for n = 3, so the shift is −δ/2 in tag units
        let diff = &b[2].coeff - &a[2].coeff;
        assert_eq!(diff, Gauss::real(&delta * &Rational::new(-1, 2)));
        assert_eq!(b[2].tag.arg, 1);
    }
}

#[test]
fn q_and_k_enter_as_q_minus_k_squared() {
    for (n, seed) in [(4, 3), (5, 4)] {
        let jet = grid_jet(n, seed);
        let k = Rational::new(3, 4);
        let k2 = &k * &k;
        let paired = jet
            .clone()
            .with_q(jet.q.add(&Jet::constant(n, jet.q.order, Gauss::real(k2))))
            .with_k(k);
        let base = jet.clone().with_k(Rational::zero());
        assert_eq!(heat_coefficients(&base, 3).unwrap(), heat_coefficients(&paired, 3).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn low_order_structure(n in 2usize..6, seed in any::<u64>()) {
        let jet = random_jet(n, 3, seed, RandomJetOptions { with_a: true, with_q: true });
        let inv = curvature_package(&jet).unwrap();
        let a = heat_coefficients(&jet, 1).unwrap();
        prop_assert_eq!(&a[0].coeff, &Gauss::real(Rational::one()));
        let nn = n as i64;
        let expect = &inv.h * &Rational::new(nn - 2, 2 * (nn - 1));
        prop_assert_eq!(&a[1].coeff, &Gauss::real(expect));
    }

    #[test]
    fn real_without_magnetic_potential(n in 3usize..5, seed in any::<u64>()) {
        let jet = random_jet(n, 3, seed, RandomJetOptions { with_a: false, with_q: true });
        for a in heat_coefficients(&jet, 2).unwrap() {
            prop_assert!(a.coeff.is_real());
        }
    }
}
