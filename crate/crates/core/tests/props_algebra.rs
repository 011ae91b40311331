use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use quadform_games::algebra::*;

fn close(g: &GroupElement, h: &GroupElement, tol: f64) -> bool {
    [(g.a, h.a), (g.b, h.b), (g.c, h.c), (g.d, h.d)].iter().all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

fn kind() -> impl Strategy<Value = OneParam> {
    prop_oneof![
        Just(OneParam::Diagonal),
        Just(OneParam::Upper),
        Just(OneParam::Lower),
        prop_oneof![0.1..5.0f64, -5.0..-0.1f64].prop_map(OneParam::Stabilizer),
    ]
}

fn small_vector(max: f64) -> impl Strategy<Value = AlgebraVector> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(move |(e, f, h)| {
        let v = AlgebraVector::new(e, f, h);
        let n = v.norm();
        if n > max { (max / n) * v } else { v }
    })
}

fn group() -> impl Strategy<Value = GroupElement> {
    (0.3..3.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| GroupElement::new(a, b, c, (1.0 + b * c) / a).unwrap())
}

proptest! {
    #[test]
    fn one_param_is_a_homomorphism(k in kind(), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let lhs = one_param(k, s).unwrap() * one_param(k, t).unwrap();
        let rhs = one_param(k, s + t).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-9), "{lhs:?} vs {rhs:?}");
    }

    #[test]
    fn log_inverts_exp(x in small_vector(0.25)) {
        let back = log_alg(&exp_alg(&x)).unwrap();
        prop_assert!((back - x).norm() < 1e-9);
    }

    #[test]
    fn exp_inverts_log(x in small_vector(0.45)) {
        let g = exp_alg(&x);
        let again = exp_alg(&log_alg(&g).unwrap());
        prop_assert!(close(&again, &g, 1e-9));
    }

    #[test]
    fn adjoint_is_an_action(g in group(), h in group(), x in small_vector(1.0)) {
        let lhs = adjoint(&(g * h), &x);
        let rhs = adjoint(&g, &adjoint(&h, &x));
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn flow_adjoint_is_diagonal(t in -3.0..3.0f64, x in small_vector(1.0)) {
        let y = adjoint_flow(t, &x);
        prop_assert!((y.e - (2.0 * t).exp() * x.e).abs() < 1e-9 * (1.0 + y.e.abs()));
        prop_assert!((y.f - (-2.0 * t).exp() * x.f).abs() < 1e-9);
        prop_assert!((y.h - x.h).abs() < 1e-12);
    }

    #[test]
    fn bracket_is_antisymmetric(x in small_vector(1.0), y in small_vector(1.0)) {
        prop_assert!((x.bracket(&y) + y.bracket(&x)).norm() < 1e-12);
    }

    #[test]
    fn stabilizer_fixes_its_vector(a in prop_oneof![0.1..9.0f64, -9.0..-0.1f64], s in -3.0..3.0f64) {
        let v = v_of_a(a).unwrap();
        let w = one_param(OneParam::Stabilizer(a), s).unwrap().apply(v);
        prop_assert!((w[0] - v[0]).abs() < 1e-9 && (w[1] - v[1]).abs() < 1e-9);
    }
}

// Unipotent one-parameter groups have polynomial entries, so their
// determinant can be checked exactly at rational parameters.
#[test]
fn unipotent_determinants_are_exactly_one() {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    for s in [q(0, 1), q(1, 3), q(-7, 5), q(22, 7), q(-1, 1_000_003)] {
        let one = BigRational::one();
        let zero = BigRational::zero();
        // [1 s; 0 1], [1 0; s 1] and the stabilizers I + sN with N² = 0
        let n_plus = [[one.clone(), -one.clone()], [one.clone(), -one.clone()]];
        let n_minus = [[-one.clone(), -one.clone()], [one.clone(), one.clone()]];
        let mats = [
            [[one.clone(), s.clone()], [zero.clone(), one.clone()]],
            [[one.clone(), zero.clone()], [s.clone(), one.clone()]],
            [[&one + &s * &n_plus[0][0], &s * &n_plus[0][1]], [&s * &n_plus[1][0], &one + &s * &n_plus[1][1]]],
            [[&one + &s * &n_minus[0][0], &s * &n_minus[0][1]], [&s * &n_minus[1][0], &one + &s * &n_minus[1][1]]],
        ];
        for m in &mats {
            assert_eq!(&m[0][0] * &m[1][1] - &m[0][1] * &m[1][0], one);
        }
    }
    // the matrices above are the ones the library uses
    for a in [4.0, -4.0] {
        let n = stabilizer_generator(a).unwrap();
        let g = one_param(OneParam::Stabilizer(a), 0.5).unwrap();
        let expect = [[1.0 + 0.5 * n.h, 0.5 * n.e], [0.5 * n.f, 1.0 - 0.5 * n.h]];
        assert!(close(&g, &GroupElement::new(expect[0][0], expect[0][1], expect[1][0], expect[1][1]).unwrap(), 1e-12));
    }
}
