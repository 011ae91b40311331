//! Lifting a one-dimensional policy to the absolute game in dimension 3.
//!
//! The ambient point `X = (s, p)` stands for the lattice `exp(p)·h_s·y`, with
//! `p` in the span of `F` and `Ĥ`. Projecting to `s` keeps radii and the
//! slab `{|s − s*| ≤ ε}` pulls back to a slab with normal along the `E` axis.
//! Since `exp(p)` lies in the group generated by `H⁻` and the flow, the orbit
//! of `exp(p)·h_s·y` is bounded exactly when the orbit of `h_s·y` is.

use super::dummy::dummy_move;
use crate::algebra::{dd_mul, exp_dd};
use crate::dd::{self, Dd};
use crate::game::{AliceMove, AlicePolicy, Ball, GameConfig, GameView, Point, Slab, Variant};
use crate::lattice::{DdBasis, Lattice};

/// `(s, f, √2·h) ↦ exp(fF + hĤ)·h_s·y`.
#[derive(Clone, Debug)]
pub struct ProductChart {
    pub base: Lattice,
}

impl ProductChart {
    pub fn lattice(&self, x: &Point) -> DdBasis {
        let c = x.eval_dd();
        let upper = [[dd::dd(1.0), c[0]], [dd::dd(0.0), dd::dd(1.0)]];
        let h = c[2] / dd::dd(2.0).sqrt();
        let g = dd_mul(&exp_dd(Dd::from(0.0), c[1], h), &upper);
        self.base.to_dd().left_mul(&g)
    }
}

fn project(ball: &Ball) -> Ball {
    Ball { center: ball.center.project(&[0]), radius: ball.radius }
}

/// Plays `inner` on the first coordinate.
pub struct ProjectionLift<P> {
    inner: P,
    chart: ProductChart,
    inner_config: Option<GameConfig>,
    history: Vec<Ball>,
    projected_moves: Vec<AliceMove>,
}

pub fn alice_projection_lift<P: AlicePolicy>(inner: P, chart: ProductChart) -> ProjectionLift<P> {
    ProjectionLift { inner, chart, inner_config: None, history: vec![], projected_moves: vec![] }
}

impl<P> ProjectionLift<P> {
    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn chart(&self) -> &ProductChart {
        &self.chart
    }

    /// The inner game as the inner policy saw it: Bob's projected balls and
    /// its own moves.
    pub fn projected(&self) -> (&[Ball], &[AliceMove]) {
        (&self.history, &self.projected_moves)
    }
}

impl<P: AlicePolicy> AlicePolicy for ProjectionLift<P> {
    fn name(&self) -> String {
        format!("lift({})", self.inner.name())
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        let cfg = self.inner_config.get_or_insert_with(|| {
            let mut c = view.config.clone();
            c.domain = project(&view.config.domain);
            c.dimension = 1;
            c
        });
        if !matches!(view.config.variant, Variant::Haw { .. }) || view.config.dimension != 3 {
            return dummy_move(view.config.variant, view.ball);
        }
        let ball = project(view.ball);
        self.history.push(ball.clone());
        let inner_view = GameView { config: cfg, round: view.round, ball: &ball, history: &self.history };
        let mv = self.inner.play(&inner_view);
        let lifted = match &mv {
            AliceMove::Slab(s) => {
                let dx = s.anchor.diff(&ball.center)[0];
                let anchor = view.ball.center.offset(&[dx, 0.0, 0.0]);
                Slab::new(anchor, vec![s.normal[0].signum(), 0.0, 0.0], s.epsilon).ok()
            }
            _ => None,
        };
        self.projected_moves.push(mv);
        match lifted {
            Some(s) => AliceMove::Slab(s),
            None => dummy_move(view.config.variant, view.ball),
        }
    }
}
