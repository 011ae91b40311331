//! Alice's strategy in the potential game for keeping the discrete orbit
//! `g_τ^k·exp(x)·y` away from a transversal submanifold `Z`.
//!
//! Rounds are grouped into stages by Bob's radius and orbit times into windows
//! by `e^{2kτ}`, so that stage `j` is responsible for the times in window `j`.
//! At the first round of a stage Alice looks at each such `k`; if the image of
//! the current ball can come within `ε` of `Z` she pulls back a neighborhood
//! of the tangent plane at the closest point and offers it as a slab. She
//! keeps offering the slabs Bob's ball still meets. Bob must dodge half of them
//! each round, so after `n` rounds none is left.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::constants::AvoidanceConstants;
use super::dummy::dummy_move;
use crate::algebra::{dexp_matrix, exp_dd, AlgebraVector};
use crate::dd;
use crate::error::{Error, Result};
use crate::game::{AliceMove, AlicePolicy, Ball, GameConfig, GameView, Point, Slab, Variant};
use crate::geometry::{transversality_constant, Chart, Horospherical, Submanifold, RANK_TOL};
use crate::lattice::{DdBasis, Lattice};

/// Slack on the adjoint bound `e^{2kτ}·r` for the image radius of a ball.
pub const IMAGE_SLACK: f64 = 1.01;

/// `g_τ^k·exp(x)·y`, evaluated in double-double.
pub fn orbit_point(y: &DdBasis, x: &Point, k: u32, tau: f64) -> Lattice {
    let c = x.eval_dd();
    let h = c[2] / dd::dd(2.0).sqrt();
    let g = exp_dd(c[0], c[1], h);
    let t = dd::dd(k as f64) * dd::dd(tau);
    y.left_mul(&g).flow(t).to_lattice()
}

fn point_vector(x: &Point) -> AlgebraVector {
    let v = x.to_f64();
    AlgebraVector::from_orthonormal([v[0], v[1], v[2]])
}

/// One slab laid down at the start of a stage.
#[derive(Clone, Debug, Serialize)]
pub struct SlabRecord {
    pub k: u32,
    /// Distance from the image of the ball center to `Z`.
    pub distance: f64,
    /// Half-width that covers every point of the ball whose image is within `ε` of `Z`.
    pub needed: f64,
    /// Half-width offered at the start of the stage.
    pub offered: f64,
    /// Length of the needed slab along lines in the `E` direction.
    pub line_length: f64,
    #[serde(skip)]
    pub slab: Slab,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: u32,
    pub first_round: usize,
    pub radius: f64,
    pub window: Vec<u32>,
    pub slabs: Vec<SlabRecord>,
    /// Number of slabs offered at each round of the stage.
    pub offered_per_round: Vec<usize>,
    /// Stage slabs still meeting the first ball of the next stage.
    pub survivors: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AvoidReport {
    pub r1: Option<f64>,
    pub dummy_rounds: usize,
    pub stages: Vec<StageRecord>,
}

impl AvoidReport {
    /// Largest `j` such that stages `1..=j` were all played and left.
    pub fn completed_stages(&self) -> u32 {
        self.stages
            .iter()
            .enumerate()
            .take_while(|(i, s)| s.stage as usize == i + 1 && s.survivors.is_some())
            .count() as u32
    }

    /// No stage slab survives into the next stage.
    pub fn endgame_ok(&self) -> bool {
        self.stages.iter().all(|s| s.survivors.is_none_or(|n| n == 0))
    }

    /// Every needed width fits in the offered one.
    pub fn widths_ok(&self) -> bool {
        self.stages.iter().flat_map(|s| &s.slabs).all(|r| r.needed <= r.offered)
    }

    /// Needed slabs meet lines along `E` in length at most `2β^n·r`.
    pub fn line_lengths_ok(&self, consts: &AvoidanceConstants) -> bool {
        let bn = consts.beta.powi(consts.n as i32);
        self.stages
            .iter()
            .all(|s| s.slabs.iter().all(|r| r.line_length <= 2.0 * bn * s.radius * (1.0 + 1e-9)))
    }
}

/// The avoidance policy. One instance plays one game.
pub struct AvoidAlice {
    z: Arc<dyn Submanifold>,
    y: DdBasis,
    chart: Chart,
    consts: AvoidanceConstants,
    report: AvoidReport,
}

/// Build the policy, checking that `z` is as transversal as `consts` assumes.
pub fn alice_hpw_avoid(z: Arc<dyn Submanifold>, chart: &Chart, consts: &AvoidanceConstants) -> Result<AvoidAlice> {
    if !consts.is_valid() {
        let bad: Vec<_> = consts.invariants().into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
        return Err(Error::Configuration(format!("constants violate {bad:?}")));
    }
    let c = transversality_constant(z.as_ref(), Horospherical::Upper);
    if !(c > RANK_TOL && c >= consts.c * (1.0 - 1e-9)) {
        return Err(Error::NotTransversal(format!("transversality constant {c} below {}", consts.c)));
    }
    Ok(AvoidAlice {
        z,
        y: chart.base().to_dd(),
        chart: chart.clone(),
        consts: consts.clone(),
        report: AvoidReport::default(),
    })
}

impl AvoidAlice {
    /// Reject games the strategy does not cover: it needs the potential game
    /// in dimension 3 with the constants' `β` and a domain inside the chart.
    pub fn check_config(&self, cfg: &GameConfig) -> Result<()> {
        match cfg.variant {
            Variant::Hpw { beta } if cfg.dimension == 3 && beta == self.consts.beta => {}
            _ => {
                return Err(Error::Configuration(format!(
                    "avoidance needs hpw in dimension 3 with beta = {}",
                    self.consts.beta
                )))
            }
        }
        let d = &cfg.domain;
        let reach = crate::game::norm(&d.center.to_f64()) + d.radius;
        if reach > self.chart.radius() {
            return Err(Error::Configuration(format!("domain reaches {reach}, chart radius {}", self.chart.radius())));
        }
        if (d.radius - self.consts.r0).abs() > 1e-12 * self.consts.r0 {
            return Err(Error::Configuration(format!("domain radius {} is not r0 = {}", d.radius, self.consts.r0)));
        }
        Ok(())
    }

    pub fn report(&self) -> &AvoidReport {
        &self.report
    }

    pub fn constants(&self) -> &AvoidanceConstants {
        &self.consts
    }

    /// Close the stages that the final ball of the game has left.
    pub fn finish(&mut self, last: &Ball) {
        if self.report.r1.is_some() {
            let j = self.consts.stage_of(last.radius);
            self.close_stages_before(j, last);
        }
    }

    fn close_stages_before(&mut self, j: u32, ball: &Ball) {
        let bn = self.consts.beta.powi(self.consts.n as i32);
        if let Some(st) = self.report.stages.last_mut() {
            if st.stage < j && st.survivors.is_none() {
                let width = bn * st.radius;
                let n = st.slabs.iter().filter(|r| with_width(&r.slab, width).meets(ball, 0.0)).count();
                st.survivors = Some(n);
            }
        }
    }

    fn open_stage(&mut self, j: u32, ball: &Ball, round: usize) {
        let window = self.consts.window(j);
        let r = ball.radius;
        let offered = self.consts.beta.powi(self.consts.n as i32) * r;
        let slabs = window
            .iter()
            .filter_map(|&k| self.slab_for(k, ball, offered))
            .collect();
        self.report.stages.push(StageRecord {
            stage: j,
            first_round: round,
            radius: r,
            window,
            slabs,
            offered_per_round: vec![],
            survivors: None,
        });
    }

    /// The slab that covers the points of `ball` whose `k`-th image comes
    /// within `ε` of `Z`, or `None` when no point does.
    fn slab_for(&self, k: u32, ball: &Ball, offered: f64) -> Option<SlabRecord> {
        let cs = &self.consts;
        let grow = (2.0 * k as f64 * cs.tau).exp();
        let x = orbit_point(&self.y, &ball.center, k, cs.tau);
        let reach = IMAGE_SLACK * grow * ball.radius + 2.0 * cs.epsilon;
        let near = self.z.nearest_within(&x, reach)?;
        // chart at x: the image of center + u is exp(M u)·x to first order
        let ad = Matrix3::from_diagonal(&Vector3::new(grow, 1.0 / grow, 1.0));
        let m = ad * dexp_matrix(&point_vector(&ball.center));
        let mut proj = Matrix3::identity();
        let mut basis: Vec<Vector3<f64>> = Vec::new();
        for t in &near.tangents {
            let mut v = t.to_vector3();
            for b in &basis {
                v -= b * b.dot(&v);
            }
            if v.norm() > 1e-12 * t.norm().max(1e-300) {
                let u = v / v.norm();
                proj -= u * u.transpose();
                basis.push(u);
            }
        }
        let sym = proj * m * m.transpose() * proj;
        let eig = sym.symmetric_eigen();
        let (imax, _) = eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let nu = proj * eig.eigenvectors.column(imax).into_owned();
        let nu = nu / nu.norm();
        let pulled = m.transpose() * nu;
        let s = pulled.norm();
        let normal = pulled / s;
        let shift = nu.dot(&near.zeta.to_vector3()) / s;
        let needed = 4.0 * cs.epsilon / s;
        let anchor = ball.center.offset(&[normal[0] * shift, normal[1] * shift, normal[2] * shift]);
        let slab = Slab::new(anchor, vec![normal[0], normal[1], normal[2]], offered).ok()?;
        Some(SlabRecord {
            k,
            distance: near.distance,
            needed,
            offered,
            line_length: 2.0 * needed / normal[0].abs(),
            slab,
        })
    }
}

fn with_width(s: &Slab, eps: f64) -> Slab {
    Slab { epsilon: eps, ..s.clone() }
}

impl AlicePolicy for AvoidAlice {
    fn name(&self) -> String {
        "avoid".into()
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        let ball = view.ball;
        let r = ball.radius;
        if self.report.r1.is_none() {
            if r > self.consts.delta {
                self.report.dummy_rounds += 1;
                return dummy_move(view.config.variant, ball);
            }
            self.report.r1 = Some(r);
            self.consts = self.consts.with_r1(r);
        }
        let j = self.consts.stage_of(r);
        let current = self.report.stages.last().map_or(0, |s| s.stage);
        if j > current {
            self.close_stages_before(j, ball);
            self.open_stage(j, ball, view.round);
        }
        let beta = self.consts.beta;
        let st = self.report.stages.last_mut().expect("a stage is open");
        let stage_eps = beta.powi(self.consts.n as i32) * st.radius;
        let eps = stage_eps.min(beta * r);
        let slabs: Vec<Slab> = st
            .slabs
            .iter()
            .filter(|rec| with_width(&rec.slab, stage_eps).meets(ball, 0.0))
            .map(|rec| with_width(&rec.slab, eps))
            .collect();
        st.offered_per_round.push(slabs.len());
        AliceMove::Slabs(slabs)
    }
}

/// Outcome check by direct orbit simulation.
#[derive(Clone, Debug, Serialize)]
pub struct AvoidanceCheck {
    pub completed_stages: u32,
    pub checked: Vec<u32>,
    /// `k` whose image of the outcome point lies within `ε` of `Z`.
    pub failures: Vec<u32>,
    /// Smallest `dist(g_τ^k·x∞, Z)/ε` over the checked times.
    pub min_ratio: f64,
}

impl AvoidanceCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `dist(g_τ^k·exp(x)·y, Z) > ε` for every `k` in windows `1..=completed`.
pub fn verify_avoidance(
    z: &dyn Submanifold,
    y: &Lattice,
    consts: &AvoidanceConstants,
    x: &Point,
    completed: u32,
) -> AvoidanceCheck {
    let yd = y.to_dd();
    let checked: Vec<u32> = (1..=completed).flat_map(|j| consts.window(j)).collect();
    let mut failures = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for &k in &checked {
        let image = orbit_point(&yd, x, k, consts.tau);
        let d = z.nearest_within(&image, 0.5).map_or(f64::INFINITY, |n| n.distance);
        min_ratio = min_ratio.min(d / consts.epsilon);
        if !(d > consts.epsilon) {
            failures.push(k);
        }
    }
    AvoidanceCheck { completed_stages: completed, checked, failures, min_ratio }
}
