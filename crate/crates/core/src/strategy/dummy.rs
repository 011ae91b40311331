use crate::game::{AliceMove, AlicePolicy, Ball, GameView, Slab, Variant};

/// A move that constrains Bob as little as the rules allow: no slabs (hpw),
/// a thin slab outside the ball (haw), or the concentric ball (classic).
pub fn dummy_move(variant: Variant, ball: &Ball) -> AliceMove {
    let r = ball.radius;
    match variant {
        Variant::Hpw { .. } => AliceMove::Slabs(vec![]),
        Variant::Haw { beta } => {
            let d = ball.dim();
            let mut e1 = vec![0.0; d];
            e1[0] = 1.0;
            let mut off = vec![0.0; d];
            off[0] = 2.0 * r;
            let slab = Slab::new(ball.center.offset(&off), e1, 0.5 * beta * r).expect("positive width");
            AliceMove::Slab(slab)
        }
        Variant::Classic { alpha, .. } => AliceMove::Ball(Ball { center: ball.center.clone(), radius: alpha * r }),
    }
}

/// Only dummy moves.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dummy;

impl AlicePolicy for Dummy {
    fn name(&self) -> String {
        "dummy".into()
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        dummy_move(view.config.variant, view.ball)
    }
}

/// Dummy moves until Bob's radius is at most `goal`, then `inner` takes over
/// for the rest of the game.
pub struct DummyAlice<P> {
    goal: f64,
    inner: P,
    delegated_at: Option<usize>,
}

pub fn alice_dummy<P: AlicePolicy>(goal: f64, inner: P) -> DummyAlice<P> {
    DummyAlice { goal, inner, delegated_at: None }
}

impl<P> DummyAlice<P> {
    /// Round at which `inner` made its first move.
    pub fn delegated_at(&self) -> Option<usize> {
        self.delegated_at
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: AlicePolicy> AlicePolicy for DummyAlice<P> {
    fn name(&self) -> String {
        format!("dummy({})", self.inner.name())
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        if self.delegated_at.is_none() && view.ball.radius > self.goal {
            return dummy_move(view.config.variant, view.ball);
        }
        self.delegated_at.get_or_insert(view.round);
        self.inner.play(view)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{check_alice, check_bob, play, GameConfig, Point, RandomAlice, RandomBob};

    #[test]
    fn dummy_moves_are_legal_and_harmless() {
        let ball = Ball::new(Point::from_f64(&[0.1, 0.2]).unwrap(), 0.5).unwrap();
        for v in [Variant::Hpw { beta: 0.1 }, Variant::Haw { beta: 0.3 }, Variant::Classic { alpha: 0.4, beta: 0.5 }] {
            let cfg = GameConfig::new(v, ball.clone(), 10, 0.0, 0).unwrap();
            let mv = dummy_move(v, &ball);
            assert!(check_alice(&cfg, &ball, &mv).unwrap().is_legal());
            if let AliceMove::Slab(s) = &mv {
                // the concentric half-radius ball is still available
                let half = Ball::new(ball.center.clone(), 0.5 * ball.radius).unwrap();
                assert!(check_bob(&cfg, &ball, &mv, &half).unwrap().is_legal());
                assert!(!s.meets(&ball, 0.0));
            }
        }
    }

    #[test]
    fn delegates_immediately_when_goal_met() {
        let dom = Ball::new(Point::origin(1).unwrap(), 1.0).unwrap();
        let cfg = GameConfig::new(Variant::Haw { beta: 0.2 }, dom, 5, 0.0, 1).unwrap();
        let mut a = alice_dummy(2.0, RandomAlice::new(1));
        play(&mut a, &mut RandomBob::default(), &cfg).unwrap();
        assert_eq!(a.delegated_at(), Some(1));
    }
}
