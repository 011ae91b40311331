use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_bob, norm, AliceMove, Ball, GameConfig, Point, Slab, Variant};

/// What a policy sees at round `round` (1-based): the current ball `B_i` and
/// the balls played so far.
pub struct GameView<'a> {
    pub config: &'a GameConfig,
    pub round: usize,
    pub ball: &'a Ball,
    pub history: &'a [Ball],
}

pub trait AlicePolicy {
    fn name(&self) -> String;
    fn play(&mut self, view: &GameView) -> AliceMove;
}

pub trait BobPolicy {
    fn name(&self) -> String;
    /// `None` when no legal move was found.
    fn play(&mut self, view: &GameView, alice: &AliceMove, rng: &mut ChaCha8Rng) -> Option<Ball>;
}

pub(crate) fn random_unit<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn axes(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .flat_map(|k| {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            let m: Vec<f64> = e.iter().map(|x| -x).collect();
            [e, m]
        })
        .collect()
}

/// Candidate next balls: the center, the ± coordinate axes, the ± slab normals
/// and `extra` directions, at the largest admissible offset and half of it,
/// for a few radii; plus `random` uniformly drawn balls. Not yet filtered for
/// legality.
pub fn candidate_balls(
    cfg: &GameConfig,
    current: &Ball,
    alice: &AliceMove,
    extra: &[Vec<f64>],
    random: Option<(&mut ChaCha8Rng, usize)>,
) -> Vec<Ball> {
    let d = cfg.dimension;
    let beta = cfg.variant.beta();
    let mut dirs = axes(d);
    let slabs: Vec<&Slab> = match alice {
        AliceMove::Slab(s) => vec![s],
        AliceMove::Slabs(v) => v.iter().collect(),
        AliceMove::Ball(_) => vec![],
    };
    for s in &slabs {
        dirs.push(s.normal.clone());
        dirs.push(s.normal.iter().map(|x| -x).collect());
    }
    for e in extra {
        let n = norm(e);
        if n > 0.0 {
            dirs.push(e.iter().map(|x| x / n).collect());
        }
    }
    // (parent center, parent radius, admissible radii)
    let (parent, radii): (&Ball, Vec<f64>) = match (cfg.variant, alice) {
        (Variant::Classic { .. }, AliceMove::Ball(a)) => (a, vec![beta * a.radius]),
        _ => {
            let r = current.radius;
            let (lo, hi) = (beta * r, 0.5 * r);
            let radii = (0..8).map(|k| lo * (hi / lo).powf(k as f64 / 7.0)).collect();
            (current, radii)
        }
    };
    let mut out = Vec::new();
    for &rho in &radii {
        let max_off = parent.radius - rho;
        out.push(Ball { center: parent.center.clone(), radius: rho });
        for dir in &dirs {
            for off in [max_off, 0.5 * max_off] {
                let delta: Vec<f64> = dir.iter().map(|x| x * off).collect();
                out.push(Ball { center: parent.center.offset(&delta), radius: rho });
            }
        }
    }
    if let Some((rng, count)) = random {
        for _ in 0..count {
            let rho = match radii.len() {
                1 => radii[0],
                n => rng.random_range(radii[0]..=radii[n - 1]),
            };
            let u = random_unit(d, rng);
            let off = rng.random_range(0.0..=1.0) * (parent.radius - rho);
            let delta: Vec<f64> = u.iter().map(|x| x * off).collect();
            out.push(Ball { center: parent.center.offset(&delta), radius: rho });
        }
    }
    out
}

fn legal(cfg: &GameConfig, current: &Ball, alice: &AliceMove, cands: Vec<Ball>) -> Vec<Ball> {
    cands
        .into_iter()
        .filter(|b| matches!(check_bob(cfg, current, alice, b), Ok(v) if v.is_legal()))
        .collect()
}

/// Picks uniformly among legal candidates.
pub struct RandomBob {
    pub samples: usize,
}

impl Default for RandomBob {
    fn default() -> Self {
        Self { samples: 8 }
    }
}

impl BobPolicy for RandomBob {
    fn name(&self) -> String {
        "random".into()
    }

    fn play(&mut self, view: &GameView, alice: &AliceMove, rng: &mut ChaCha8Rng) -> Option<Ball> {
        let cands = candidate_balls(view.config, view.ball, alice, &[], Some((rng, self.samples)));
        let mut ok = legal(view.config, view.ball, alice, cands);
        if ok.is_empty() {
            return None;
        }
        let i = rng.random_range(0..ok.len());
        Some(ok.swap_remove(i))
    }
}

/// Deterministic: the legal candidate closest to `target`, ties broken
/// toward the smaller radius.
pub struct TargetSeekingBob {
    pub target: Point,
}

impl BobPolicy for TargetSeekingBob {
    fn name(&self) -> String {
        "target_seeking".into()
    }

    fn play(&mut self, view: &GameView, alice: &AliceMove, _rng: &mut ChaCha8Rng) -> Option<Ball> {
        let to_target = self.target.diff(&view.ball.center);
        let mut cands = candidate_balls(view.config, view.ball, alice, std::slice::from_ref(&to_target), None);
        // also the exact step onto the target when it fits
        let dist = norm(&to_target);
        if dist > 0.0 {
            let parent = match alice {
                AliceMove::Ball(a) => a,
                _ => view.ball,
            };
            let base = cands.iter().map(|b| b.radius).collect::<Vec<_>>();
            let mut radii = base;
            radii.sort_by(f64::total_cmp);
            radii.dedup();
            for rho in radii {
                let off = dist.min(parent.radius - rho).max(0.0);
                let delta: Vec<f64> = self.target.diff(&parent.center).iter().map(|x| x / dist * off).collect();
                cands.push(Ball { center: parent.center.offset(&delta), radius: rho });
            }
        }
        let ok = legal(view.config, view.ball, alice, cands);
        ok.into_iter().min_by(|a, b| {
            a.center
                .distance(&self.target)
                .total_cmp(&b.center.distance(&self.target))
                .then(a.radius.total_cmp(&b.radius))
        })
    }
}

/// Uniformly random legal Alice moves, for stress-testing Bob and the referee.
pub struct RandomAlice {
    rng: ChaCha8Rng,
    pub max_slabs: usize,
}

impl RandomAlice {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed ^ 0xA11CE), max_slabs: 6 }
    }

    fn slab(&mut self, ball: &Ball, beta: f64) -> Slab {
        let d = ball.dim();
        let normal = random_unit(d, &mut self.rng);
        let dir = random_unit(d, &mut self.rng);
        let off = self.rng.random_range(0.0..=1.0) * ball.radius;
        let delta: Vec<f64> = dir.iter().map(|x| x * off).collect();
        let eps = self.rng.random_range(0.5..=1.0) * beta * ball.radius;
        Slab::new(ball.center.offset(&delta), normal, eps).expect("valid slab")
    }
}

impl AlicePolicy for RandomAlice {
    fn name(&self) -> String {
        "random".into()
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        let ball = view.ball;
        match view.config.variant {
            Variant::Classic { alpha, .. } => {
                let dir = random_unit(ball.dim(), &mut self.rng);
                let off = self.rng.random_range(0.0..=1.0) * (1.0 - alpha) * ball.radius;
                let delta: Vec<f64> = dir.iter().map(|x| x * off).collect();
                AliceMove::Ball(Ball { center: ball.center.offset(&delta), radius: alpha * ball.radius })
            }
            Variant::Haw { beta } => AliceMove::Slab(self.slab(ball, beta)),
            Variant::Hpw { beta } => {
                let n = self.rng.random_range(0..=self.max_slabs);
                AliceMove::Slabs((0..n).map(|_| self.slab(ball, beta)).collect())
            }
        }
    }
}
