use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use quadform_games::forms::*;
use quadform_games::lattice::orbit_min_systole;

fn rational() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..10_000).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

proptest! {
    #[test]
    fn rationals_expand_exactly(x in rational()) {
        let cf = cf_expand_interval(x.clone(), x.clone(), 64).unwrap();
        prop_assert!(cf.exhausted);
        prop_assert!(cf.quotients.iter().all(|&a| a >= 1));
        let (p, q) = cf.convergents().pop().unwrap();
        prop_assert_eq!(BigRational::new(p, q), x);
    }

    #[test]
    fn convergents_bracket_the_interval(lo in rational(), w in 1i64..1000) {
        let hi = &lo + BigRational::new(BigInt::from(w), BigInt::from(10_000_000));
        let cf = cf_expand_interval(lo.clone(), hi.clone(), 40).unwrap();
        // every determined convergent is a best approximation of all points in [lo, hi],
        // so consecutive ones lie on alternate sides of the interval
        let cs = cf.convergents();
        for (i, (p, q)) in cs.iter().enumerate().take(cs.len().saturating_sub(1)) {
            let c = BigRational::new(p.clone(), q.clone());
            if i % 2 == 0 {
                prop_assert!(c <= lo);
            } else {
                prop_assert!(c >= hi);
            }
        }
    }

    #[test]
    fn gap_matches_brute_force(lambda in 1.05..3.0f64, a in -2.0..2.0f64, n in 1i64..25) {
        let x = lattice_of_lambda(lambda).unwrap();
        let g = gap_at(&x, a, n).unwrap();
        let mut brute = f64::INFINITY;
        for p in -n..=n {
            for q in -n..=n {
                if (p, q) != (0, 0) {
                    brute = brute.min((q_lambda(p, q, lambda) / (2.0 * lambda) - a).abs());
                }
            }
        }
        prop_assert!((g.gap - brute).abs() < 1e-9);
        prop_assert!((q_lambda(g.p, g.q, lambda) / (2.0 * lambda) - a).abs() - g.gap < 1e-9);
    }

    #[test]
    fn spectrum_is_scaled_form(lambda in 1.05..3.0f64, n in 1i64..12) {
        let spec = value_spectrum(&lattice_of_lambda(lambda).unwrap(), n).unwrap();
        prop_assert_eq!(spec.len() as i64, (2 * n + 1) * (2 * n + 1) - 1);
        prop_assert!(spec.windows(2).all(|w| w[0].value <= w[1].value));
        for e in &spec {
            prop_assert!((2.0 * lambda * e.value - q_lambda(e.p, e.q, lambda)).abs() < 1e-9);
        }
    }
}

#[test]
fn quadratic_irrationals_are_periodic() {
    let cases = [(2f64.sqrt(), 1, 2), (0.5 * (1.0 + 5f64.sqrt()), 1, 1), (3f64.sqrt(), 2, 2), (7f64.sqrt(), 4, 4)];
    for (x, period, max) in cases {
        let cf = cf_expand(x, 12).unwrap();
        let d = cf_diagnostics(&cf);
        assert_eq!(d.period_guess, Some(period), "{x}");
        assert_eq!(d.max_quotient, Some(max), "{x}");
    }
}

#[test]
fn large_quotient_dips_the_orbit() {
    // [1; 1, 1000, 1, 1, …]: the excursion at a quotient a reaches systole
    // about 1.4/√a, so 1000 is needed to go below 0.05
    let x = 1.0 + 1.0 / (1.0 + 1.0 / (1000.0 + 1.0 / (0.5 * (1.0 + 5f64.sqrt()))));
    let cf = cf_expand(x, 20).unwrap();
    assert!(cf.quotients.iter().any(|&a| a >= 50));
    let (s, _) = orbit_min_systole(&lattice_of_lambda(x).unwrap(), 25.0, 0.01).unwrap();
    assert!(s < 0.05, "{s}");
    // a quotient of 60 alone stays well above it
    let y = 1.0 + 1.0 / (1.0 + 1.0 / (60.0 + 1.0 / (0.5 * (1.0 + 5f64.sqrt()))));
    let (s60, _) = orbit_min_systole(&lattice_of_lambda(y).unwrap(), 25.0, 0.01).unwrap();
    assert!(s60 > 0.1, "{s60}");
}
