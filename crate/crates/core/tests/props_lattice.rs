use proptest::prelude::*;
use quadform_games::algebra::{exp_alg, AlgebraVector, GroupElement};
use quadform_games::lattice::*;

fn lattice() -> impl Strategy<Value = Lattice> {
    (0.3..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
        .prop_map(|(a, b, c)| Lattice::from_group(&GroupElement::new(a, b, c, (1.0 + b * c) / a).unwrap()))
}

fn unimodular() -> impl Strategy<Value = [[i64; 2]; 2]> {
    // products of elementary moves stay in SL(2, Z); entries stay below 81
    // so that forming the new basis in f64 costs well under 1e-12
    prop::collection::vec((0..3u8, -2..=2i64), 0..5).prop_map(|ops| {
        let mut m = [[1i64, 0], [0, 1]];
        for (op, k) in ops {
            m = match op {
                0 => [[m[0][0] + k * m[0][1], m[0][1]], [m[1][0] + k * m[1][1], m[1][1]]],
                1 => [[m[0][0], m[0][1] + k * m[0][0]], [m[1][0], m[1][1] + k * m[1][0]]],
                _ => [[m[0][1], -m[0][0]], [m[1][1], -m[1][0]]],
            };
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn systole_matches_enumeration(x in lattice()) {
        let s = x.systole();
        // any basis vector bounds the systole from above
        let (b1, _) = x.basis();
        let pts = x.enumerate_ball(2.0 * b1[0].hypot(b1[1])).unwrap();
        let brute = pts.iter().map(|p| p.vector[0].hypot(p.vector[1])).filter(|&n| n > 0.0).fold(f64::INFINITY, f64::min);
        prop_assert!((s - brute).abs() < 1e-9, "{s} vs {brute}");
    }

    #[test]
    fn systole_ignores_basis_change(x in lattice(), u in unimodular()) {
        let (b1, b2) = x.basis();
        let col = |i: usize| [u[0][i] as f64 * b1[0] + u[1][i] as f64 * b2[0], u[0][i] as f64 * b1[1] + u[1][i] as f64 * b2[1]];
        let y = Lattice::new(col(0), col(1)).unwrap();
        prop_assert!((x.systole() - y.systole()).abs() < 1e-12, "{} vs {}", x.systole(), y.systole());
    }

    #[test]
    fn reduction_is_idempotent_and_tracks_its_transform(x in lattice()) {
        let r = x.reduce();
        prop_assert!(r.lattice.is_reduced());
        prop_assert_eq!(r.lattice.reduce().lattice.systole(), r.lattice.systole());
        let u = r.transform;
        prop_assert_eq!(u[0][0] * u[1][1] - u[0][1] * u[1][0], 1);
    }

    #[test]
    fn flow_is_two_lipschitz(x in lattice(), v in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), t in 0.0..0.34f64) {
        // e^{2τ} ≤ 2 for τ ≤ ln2/2
        let v = AlgebraVector::new(v.0, v.1, v.2);
        let v = (0.05 / v.norm().max(1e-9)) * v;
        let y = x.act(&exp_alg(&v));
        let d0 = dist_x(&x, &y);
        let d1 = dist_x(&x.flow(t), &y.flow(t));
        prop_assert!(d1 <= 2.0 * d0 + 1e-12, "{d1} > 2·{d0}");
    }

    #[test]
    fn dd_orbit_agrees_with_f64_for_short_times(x in lattice(), t in 0.0..3.0f64) {
        let a = x.flow(t).systole();
        let b = x.to_dd().flow(quadform_games::dd::dd(t)).systole();
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
    }
}

#[test]
fn trace_minimum_is_orbit_minimum() {
    let x = Lattice::from_group(&GroupElement::new(1.0, 0.3819660112501051, 0.0, 1.0).unwrap());
    let trace = orbit_systole_trace(&x, 5.0, 0.01).unwrap();
    assert_eq!(trace.len(), 501);
    let (m, t) = orbit_min_systole(&x, 5.0, 0.01).unwrap();
    let best = trace.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!((best.0, best.1), (t, m));
}
