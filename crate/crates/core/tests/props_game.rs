use proptest::prelude::*;
use quadform_games::game::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn variant() -> impl Strategy<Value = (Variant, usize)> {
    prop_oneof![
        (0.05..0.32f64, 1..=3usize).prop_map(|(b, d)| (Variant::Haw { beta: b }, d)),
        (0.02..0.19f64).prop_map(|b| (Variant::Hpw { beta: b }, 1)),
        (0.02..0.076f64, 2..=3usize).prop_map(|(b, d)| (Variant::Hpw { beta: b }, d)),
        (0.1..0.9f64, 0.1..0.9f64, 1..=3usize).prop_map(|(a, b, d)| (Variant::Classic { alpha: a, beta: b }, d)),
    ]
}

fn random_game(v: Variant, d: usize, seed: u64, rounds: usize) -> Transcript {
    let domain = Ball::new(Point::origin(d).unwrap(), 1.0).unwrap();
    let cfg = GameConfig::new(v, domain, rounds, 0.0, seed).unwrap();
    play(&mut RandomAlice::new(seed), &mut RandomBob::default(), &cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transcripts_nest_and_shrink_slowly((v, d) in variant(), seed in any::<u64>()) {
        let t = random_game(v, d, seed, 40);
        prop_assert!(t.outcome.is_completed(), "{:?}", t.outcome);
        prop_assert!(t.records.iter().all(|r| r.verdict.is_legal()));
        prop_assert!(t.is_nested());
        let balls = t.balls();
        let ratio = match v {
            Variant::Classic { alpha, beta } => alpha * beta,
            other => other.beta(),
        };
        for w in balls.windows(2) {
            prop_assert!(w[1].radius >= ratio * w[0].radius * (1.0 - 1e-12));
        }
    }

    #[test]
    fn outcome_lies_in_every_ball((v, d) in variant(), seed in any::<u64>()) {
        let t = random_game(v, d, seed, 60);
        let x = t.outcome.center().unwrap();
        for b in t.balls() {
            prop_assert!(x.distance(&b.center) <= b.radius * (1.0 + 1e-9));
        }
    }

    #[test]
    fn single_slab_rules_coincide(seed in any::<u64>(), beta in 0.02..0.19f64, d in 1..=3usize) {
        prop_assume!(beta < hpw_beta_bound(d));
        let ball = Ball::new(Point::origin(d).unwrap(), 1.0).unwrap();
        let haw = GameConfig::new(Variant::Haw { beta }, ball.clone(), 1, 0.0, 0).unwrap();
        let hpw = GameConfig::new(Variant::Hpw { beta }, ball.clone(), 1, 0.0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slab = match RandomAlice::new(seed).play(&GameView { config: &haw, round: 1, ball: &ball, history: &[] }) {
            AliceMove::Slab(s) => s,
            other => panic!("{other:?}"),
        };
        let one = AliceMove::Slab(slab.clone());
        let many = AliceMove::Slabs(vec![slab]);
        prop_assert!(check_alice(&hpw, &ball, &many).unwrap().is_legal());
        for cand in candidate_balls(&haw, &ball, &one, &[], Some((&mut rng, 32))) {
            let a = check_bob(&haw, &ball, &one, &cand).unwrap().is_legal();
            let b = check_bob(&hpw, &ball, &many, &cand).unwrap().is_legal();
            prop_assert_eq!(a, b, "{:?}", cand);
        }
    }

    #[test]
    fn play_is_deterministic((v, d) in variant(), seed in any::<u64>()) {
        prop_assert_eq!(random_game(v, d, seed, 20).to_jsonl(), random_game(v, d, seed, 20).to_jsonl());
    }
}
