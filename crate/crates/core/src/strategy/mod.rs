//! Alice's policies: dummy moves, the avoidance strategy in the potential
//! game, a bounded-orbit policy on a line, and its lift to three dimensions.

mod avoid;
mod bounded;
mod constants;
mod dummy;
mod lift;
mod scenario;

pub use avoid::{
    alice_hpw_avoid, orbit_point, verify_avoidance, AvoidAlice, AvoidReport, AvoidanceCheck, SlabRecord,
    StageRecord, IMAGE_SLACK,
};
pub use bounded::{alice_bounded_1d, shortest_exact, AvoidPointAlice, BoundedAlice, BoundedStats};
pub use constants::{derive_constants, n_of_m, smallest_m, AvoidanceConstants};
pub use dummy::{alice_dummy, dummy_move, Dummy, DummyAlice};
pub use lift::{alice_projection_lift, ProductChart, ProjectionLift};
pub use scenario::{
    avoid_scenario, avoid_scenario_with, run_avoid_game, target_submanifold, zv4_arc, zv_arc, AvoidGame, AvoidParams,
    AvoidScenario, Target, AVOID_BETA, AVOID_CHART_RADIUS, AVOID_MAX_ROUNDS, AVOID_R0, AVOID_TAU, MAX_HIT,
};

use serde::Serialize;

use crate::error::Result;
use crate::forms::{cf_diagnostics, cf_expand_interval};
use crate::game::{play, AliceMove, AlicePolicy, Ball, BobPolicy, GameConfig, GameView, Point, Transcript, Variant};
use crate::lattice::{orbit_min_systole_dd, Lattice};

/// Plays two potential-game policies at once by offering both slab lists.
pub struct MergedAlice<A, B> {
    pub first: A,
    pub second: B,
}

fn slabs_of(mv: AliceMove) -> Vec<crate::game::Slab> {
    match mv {
        AliceMove::Slabs(v) => v,
        AliceMove::Slab(s) => vec![s],
        AliceMove::Ball(_) => vec![],
    }
}

impl<A: AlicePolicy, B: AlicePolicy> AlicePolicy for MergedAlice<A, B> {
    fn name(&self) -> String {
        format!("merged({}, {})", self.first.name(), self.second.name())
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        let mut v = slabs_of(self.first.play(view));
        v.extend(slabs_of(self.second.play(view)));
        AliceMove::Slabs(v)
    }
}

pub const BOUNDED_BETA: f64 = 0.2;
pub const BOUNDED_CENTER: f64 = 0.4;
pub const BOUNDED_RADIUS: f64 = 0.1;
/// Horizon and step of the orbit check on bounded outcomes.
pub const BOUNDED_HORIZON: f64 = 20.0;
pub const BOUNDED_STEP: f64 = 0.01;
pub const CF_DEPTH: usize = 30;
/// Pass thresholds for a bounded outcome.
pub const BOUNDED_MIN_SYSTOLE: f64 = 0.02;
pub const BOUNDED_MAX_QUOTIENT: i128 = 50;

pub fn bounded_domain() -> Result<Ball> {
    Ball::new(Point::from_f64(&[BOUNDED_CENTER, 0.0, 0.0])?, BOUNDED_RADIUS)
}

pub fn bounded_config(rounds: usize, seed: u64) -> Result<GameConfig> {
    GameConfig::new(Variant::Haw { beta: BOUNDED_BETA }, bounded_domain()?, rounds, 0.0, seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundedOutcome {
    pub seed: u64,
    pub rounds: usize,
    pub radius: f64,
    pub min_systole: f64,
    pub min_systole_time: f64,
    /// Largest partial quotient of the outcome parameter `s∞`, or `None`
    /// when the final interval does not determine `CF_DEPTH` quotients.
    pub max_quotient: Option<i128>,
    pub unique_fraction: f64,
    /// The projected game and the ambient game agree round by round.
    pub projection_consistent: bool,
}

impl BoundedOutcome {
    pub fn passed(&self) -> bool {
        self.min_systole >= BOUNDED_MIN_SYSTOLE
            && self.max_quotient.is_some_and(|q| q <= BOUNDED_MAX_QUOTIENT)
            && self.projection_consistent
    }
}

/// One game of the lifted bounded-orbit policy against `bob`, with its
/// outcome checked by orbit simulation and continued fractions.
pub fn run_bounded_game(
    bob: &mut dyn BobPolicy,
    rounds: usize,
    seed: u64,
) -> Result<(Transcript, BoundedOutcome)> {
    run_bounded_game_with(bob, &bounded_config(rounds, seed)?)
}

/// As [`run_bounded_game`] on any three-dimensional absolute-game `cfg`.
pub fn run_bounded_game_with(bob: &mut dyn BobPolicy, cfg: &GameConfig) -> Result<(Transcript, BoundedOutcome)> {
    if !matches!(cfg.variant, Variant::Haw { .. }) || cfg.dimension != 3 {
        return Err(crate::Error::WrongVariant("the lifted bounded policy plays haw in dimension 3".into()));
    }
    let seed = cfg.seed;
    let y = Lattice::standard();
    let mut alice = alice_projection_lift(alice_bounded_1d(&y), ProductChart { base: y });
    let t = play(&mut alice, bob, cfg)?;
    let last = (*t.balls().last().expect("domain is a ball")).clone();
    let (min_systole, min_systole_time) =
        orbit_min_systole_dd(&alice.chart().lattice(&last.center), BOUNDED_HORIZON, BOUNDED_STEP)?;
    let s = last.center.coord_exact(0);
    let r = num_rational::BigRational::from_float(last.radius).expect("finite");
    let cf = cf_expand_interval(&s - &r, &s + &r, CF_DEPTH)?;
    let max_quotient = (cf.quotients.len() >= CF_DEPTH).then(|| cf_diagnostics(&cf).max_quotient).flatten();
    let (hist, _) = alice.projected();
    let balls = t.balls();
    // Alice saw every ball but the last one
    let projection_consistent = hist.len() + 1 == balls.len()
        && hist.iter().zip(&balls).all(|(p, b)| {
            p.radius == b.radius && p.center.diff(&b.center.project(&[0]))[0] == 0.0
        });
    let stats = alice.inner().stats();
    let out = BoundedOutcome {
        seed,
        rounds: hist.len(),
        radius: last.radius,
        min_systole,
        min_systole_time,
        max_quotient,
        unique_fraction: stats.unique as f64 / stats.moves.max(1) as f64,
        projection_consistent,
    };
    Ok((t, out))
}
