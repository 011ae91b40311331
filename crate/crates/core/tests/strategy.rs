use std::sync::Arc;

use proptest::prelude::*;
use quadform_games::game::*;
use quadform_games::geometry::{Chart, CurveZ, Submanifold};
use quadform_games::lattice::Lattice;
use quadform_games::strategy::*;

fn point_z() -> Arc<dyn Submanifold> {
    target_submanifold(Target::Point).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derived_constants_keep_their_invariants(tau in 0.3..2.0f64, frac in 0.05..0.95f64) {
        let beta = frac * (-2.0 * tau).exp().min(0.19);
        let chart = Chart::new(&Lattice::standard(), 0.25).unwrap();
        let k = derive_constants(&CurveZ::point(&Lattice::standard()), &chart, beta, tau, 1e-4).unwrap();
        for (name, ok) in k.invariants() {
            prop_assert!(ok, "{name} fails for beta = {beta}, tau = {tau}");
        }
        // windows partition 0..=500 into consecutive runs of at most m
        let mut next = 0;
        let mut j = 1;
        while next <= 500 {
            let w = k.window(j);
            prop_assert!(!w.is_empty() && w.len() <= k.m as usize);
            prop_assert_eq!(w[0], next);
            prop_assert!(w.windows(2).all(|p| p[1] == p[0] + 1));
            prop_assert!(w.iter().all(|&i| k.window_of(i) == j));
            for &i in &w {
                prop_assert!(k.diameter_chain_holds(j, i), "j = {j}, k = {i}: {:?}", k.diameter_chain(j, i));
            }
            next = w[w.len() - 1] + 1;
            j += 1;
        }
    }
}

fn check_game(target: Target, bob: &mut dyn BobPolicy, seed: u64) {
    let scn = avoid_scenario(target, target_submanifold(target).unwrap(), seed).unwrap();
    let g = run_avoid_game(&scn, bob).unwrap();
    assert!(g.passed(6), "{target:?} seed {seed}: {:?} {:?}", g.check, g.transcript.outcome);
    assert!(g.transcript.records.iter().all(|r| r.verdict.is_legal()));
    for s in g.report.stages.iter().take(g.check.completed_stages as usize) {
        // each stage spans at least n rounds
        assert!(s.offered_per_round.len() >= g.consts.n as usize, "stage {}", s.stage);
        assert_eq!(s.survivors, Some(0));
        assert_eq!(s.window, g.consts.window(s.stage));
    }
}

#[test]
fn avoidance_outcomes_avoid_the_target() {
    for seed in 0..12 {
        for target in [Target::Point, Target::ARC4] {
            check_game(target, &mut RandomBob::default(), seed);
            check_game(target, &mut TargetSeekingBob { target: Point::origin(3).unwrap() }, seed);
        }
    }
}

// Without Alice the seeking Bob walks onto the point whose orbit meets Z.
#[test]
fn dummy_alice_does_not_avoid() {
    let z = point_z();
    for seed in 0..5 {
        let scn = avoid_scenario(Target::Point, z.clone(), seed).unwrap();
        let mut bob = TargetSeekingBob { target: Point::origin(3).unwrap() };
        let t = play(&mut Dummy, &mut bob, &scn.config).unwrap();
        let x = t.outcome.center().unwrap();
        let check = verify_avoidance(z.as_ref(), &scn.y, &scn.consts, x, 7);
        assert!(check.failures.contains(&scn.k_hit), "seed {seed}: {check:?}");
        assert!(!check.passed());
    }
}

#[test]
fn delegation_leaves_the_tail_unchanged() {
    let domain = Ball::new(Point::from_f64(&[0.2, -0.1]).unwrap(), 1.0).unwrap();
    let cfg = GameConfig::new(Variant::Haw { beta: 0.25 }, domain, 30, 0.0, 9).unwrap();
    let target = Point::from_f64(&[0.3, 0.3]).unwrap();
    let mut alice = alice_dummy(0.01, RandomAlice::new(4));
    let t = play(&mut alice, &mut TargetSeekingBob { target: target.clone() }, &cfg).unwrap();
    let at = alice.delegated_at().unwrap();
    let balls = t.balls();
    // replay from the ball where the inner policy took over
    let rest = GameConfig::new(cfg.variant, balls[at - 1].clone(), cfg.max_rounds + 1 - at, 0.0, 9).unwrap();
    let u = play(&mut RandomAlice::new(4), &mut TargetSeekingBob { target }, &rest).unwrap();
    let tail: Vec<_> = balls[at - 1..].iter().map(|b| (b.center.to_f64(), b.radius)).collect();
    let fresh: Vec<_> = u.balls().iter().map(|b| (b.center.to_f64(), b.radius)).collect();
    assert_eq!(tail, fresh);
}

#[test]
fn lift_keeps_radii_and_widths() {
    let cfg = bounded_config(80, 3).unwrap();
    let y = Lattice::standard();
    let mut alice = alice_projection_lift(alice_bounded_1d(&y), ProductChart { base: y });
    let t = play(&mut alice, &mut RandomBob::default(), &cfg).unwrap();
    let (hist, inner) = alice.projected();
    let lifted = t.alice_moves();
    assert_eq!(inner.len(), lifted.len());
    for ((p, b), (mi, ml)) in hist.iter().zip(t.balls()).zip(inner.iter().zip(lifted)) {
        assert_eq!(p.radius, b.radius);
        if let (AliceMove::Slab(si), AliceMove::Slab(sl)) = (mi, ml) {
            assert_eq!(si.epsilon, sl.epsilon);
            assert_eq!(sl.normal[1..], [0.0, 0.0]);
            assert_eq!(si.anchor.diff(&p.center)[0], sl.anchor.diff(&b.center)[0]);
        }
    }
    let (_, out) = run_bounded_game(&mut RandomBob::default(), 80, 3).unwrap();
    assert!(out.projection_consistent);
}

#[test]
fn avoid_point_keeps_bob_away() {
    let s_star = 1.0 / 3.0;
    for seed in 0..20 {
        let domain = Ball::new(Point::from_f64(&[0.3]).unwrap(), 0.1).unwrap();
        let cfg = GameConfig::new(Variant::Haw { beta: 0.2 }, domain, 60, 0.0, seed).unwrap();
        let mut bob = TargetSeekingBob { target: Point::from_f64(&[s_star]).unwrap() };
        let t = play(&mut AvoidPointAlice { s_star }, &mut bob, &cfg).unwrap();
        assert!(t.outcome.is_completed());
        let last = t.balls().last().unwrap().center.to_f64()[0];
        let r = t.balls().last().unwrap().radius;
        assert!((last - s_star).abs() > r, "seed {seed}");
    }
}

// Two avoidance policies at once, each for its own target, in one game.
#[test]
fn merged_avoidance_stays_legal() {
    let arc: Arc<dyn Submanifold> = Arc::new(zv4_arc().unwrap());
    for seed in 0..10 {
        let scn = avoid_scenario(Target::Point, point_z(), seed).unwrap();
        let arc_consts = derive_constants(arc.as_ref(), &scn.chart, AVOID_BETA, AVOID_TAU, AVOID_R0).unwrap();
        let mut alice = MergedAlice {
            first: alice_hpw_avoid(scn.z.clone(), &scn.chart, &scn.consts).unwrap(),
            second: alice_hpw_avoid(arc.clone(), &scn.chart, &arc_consts).unwrap(),
        };
        for bob in [&mut RandomBob::default() as &mut dyn BobPolicy, &mut TargetSeekingBob { target: Point::origin(3).unwrap() }] {
            let t = play(&mut alice, bob, &scn.config).unwrap();
            assert!(t.outcome.is_completed(), "seed {seed}: {:?}", t.outcome);
            assert!(t.records.iter().all(|r| r.verdict.is_legal()));
            alice = MergedAlice {
                first: alice_hpw_avoid(scn.z.clone(), &scn.chart, &scn.consts).unwrap(),
                second: alice_hpw_avoid(arc.clone(), &scn.chart, &arc_consts).unwrap(),
            };
        }
    }
}
