//! Ready-made avoidance games: `y` is placed so that the center of the domain
//! is carried onto `Z` at a chosen time `K`, which gives a seeking Bob every
//! reason to walk into `Z`.

use std::sync::Arc;

use serde::Serialize;

use super::avoid::{alice_hpw_avoid, verify_avoidance, AvoidReport, AvoidanceCheck};
use super::constants::{derive_constants, AvoidanceConstants};
use crate::algebra::stabilizer_generator;
use crate::dd;
use crate::error::Result;
use crate::forms::lattice_of_lambda;
use crate::game::{play, Ball, BobPolicy, GameConfig, Point, Transcript, Variant};
use crate::geometry::{make_zv, Chart, CurveZ, Submanifold, DEFAULT_SPACING};
use crate::lattice::Lattice;

pub const AVOID_BETA: f64 = 0.07;
pub const AVOID_TAU: f64 = 1.0;
pub const AVOID_R0: f64 = 1e-4;
pub const AVOID_CHART_RADIUS: f64 = 0.25;
pub const AVOID_MAX_ROUNDS: usize = 400;
/// Times `K` cycle through `1..=MAX_HIT`, the first six windows.
pub const MAX_HIT: u32 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// The golden lattice.
    Point,
    /// `Z_{v(a)}` for `u ∈ [0, 1]`.
    Arc { a: f64 },
}

impl Target {
    pub const ARC4: Target = Target::Arc { a: 4.0 };

    pub fn name(self) -> &'static str {
        match self {
            Target::Point => "point",
            Target::Arc { .. } => "arc",
        }
    }
}

/// The arc `u ↦ exp(uX)·z(0)`, `u ∈ [0, 1]`, of the closed horocycle `Z_{v(a)}`.
pub fn zv_arc(a: f64) -> Result<CurveZ> {
    let z = make_zv(a, 1)?.remove(0);
    CurveZ::orbit(&z.at(0.0), stabilizer_generator(a)?, 1.0, false, DEFAULT_SPACING)
}

pub fn zv4_arc() -> Result<CurveZ> {
    zv_arc(4.0)
}

pub fn target_submanifold(target: Target) -> Result<Arc<dyn Submanifold>> {
    Ok(match target {
        Target::Point => Arc::new(CurveZ::point(&lattice_of_lambda(0.5 * (1.0 + 5f64.sqrt()))?)),
        Target::Arc { a } => Arc::new(zv_arc(a)?),
    })
}

/// Game parameters of an avoidance scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AvoidParams {
    pub beta: f64,
    pub tau: f64,
    pub r0: f64,
    pub chart_radius: f64,
    pub max_rounds: usize,
}

impl Default for AvoidParams {
    fn default() -> Self {
        Self {
            beta: AVOID_BETA,
            tau: AVOID_TAU,
            r0: AVOID_R0,
            chart_radius: AVOID_CHART_RADIUS,
            max_rounds: AVOID_MAX_ROUNDS,
        }
    }
}

pub struct AvoidScenario {
    pub target: Target,
    pub z: Arc<dyn Submanifold>,
    /// Point of `Z` hit by the domain center at time `k_hit`.
    pub z0: Lattice,
    pub k_hit: u32,
    pub y: Lattice,
    pub chart: Chart,
    pub consts: AvoidanceConstants,
    pub config: GameConfig,
}

/// `y = g_τ^{−K}·z0` with `K = 1 + seed mod 15`; for the arc, `z0 = z(u)` with
/// `u` spread over the middle half of the arc.
pub fn avoid_scenario(target: Target, z: Arc<dyn Submanifold>, seed: u64) -> Result<AvoidScenario> {
    avoid_scenario_with(target, z, seed, &AvoidParams::default())
}

pub fn avoid_scenario_with(
    target: Target,
    z: Arc<dyn Submanifold>,
    seed: u64,
    params: &AvoidParams,
) -> Result<AvoidScenario> {
    let k_hit = 1 + (seed % MAX_HIT as u64) as u32;
    let z0 = match target {
        Target::Point => z.samples()[0].point,
        Target::Arc { a } => {
            let golden = 0.5 * (5f64.sqrt() - 1.0);
            let u = 0.25 + 0.5 * (seed as f64 * golden).fract();
            zv_arc(a)?.at(u)
        }
    };
    let y = z0.to_dd().flow(-(dd::dd(k_hit as f64) * dd::dd(params.tau))).to_lattice();
    let chart = Chart::new(&y, params.chart_radius)?;
    let consts = derive_constants(z.as_ref(), &chart, params.beta, params.tau, params.r0)?;
    let floor = params.beta.powi(7 * consts.n as i32 + 1) * consts.delta;
    let domain = Ball::new(Point::origin(3)?, params.r0)?;
    let config = GameConfig::new(Variant::Hpw { beta: params.beta }, domain, params.max_rounds, floor, seed)?;
    Ok(AvoidScenario { target, z, z0, k_hit, y: *chart.base(), chart, consts, config })
}

pub struct AvoidGame {
    pub transcript: Transcript,
    pub report: AvoidReport,
    pub check: AvoidanceCheck,
    /// Constants with `r₁` as played.
    pub consts: AvoidanceConstants,
}

impl AvoidGame {
    /// Avoidance, endgame and width bookkeeping all hold, and at least
    /// `min_stages` stages were completed.
    pub fn passed(&self, min_stages: u32) -> bool {
        self.transcript.outcome.is_completed()
            && self.check.passed()
            && self.check.completed_stages >= min_stages
            && self.report.endgame_ok()
            && self.report.widths_ok()
            && self.report.line_lengths_ok(&self.consts)
    }
}

pub fn run_avoid_game(scn: &AvoidScenario, bob: &mut dyn BobPolicy) -> Result<AvoidGame> {
    let mut alice = alice_hpw_avoid(scn.z.clone(), &scn.chart, &scn.consts)?;
    alice.check_config(&scn.config)?;
    let transcript = play(&mut alice, bob, &scn.config)?;
    let last = transcript.balls().last().map(|b| (*b).clone()).unwrap_or_else(|| scn.config.domain.clone());
    alice.finish(&last);
    let report = alice.report().clone();
    let consts = alice.constants().clone();
    let completed = report.completed_stages();
    let check = verify_avoidance(scn.z.as_ref(), &scn.y, &consts, &last.center, completed);
    Ok(AvoidGame { transcript, report, check, consts })
}
