use serde::Serialize;

use super::{AliceMove, Ball, GameConfig, Slab, Variant, SLACK};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Legal,
    Illegal(String),
}

impl Verdict {
    pub fn is_legal(&self) -> bool {
        matches!(self, Verdict::Legal)
    }
}

fn illegal(msg: impl Into<String>) -> Verdict {
    Verdict::Illegal(msg.into())
}

fn check_slab(cfg: &GameConfig, current: &Ball, s: &Slab, beta: f64) -> Option<Verdict> {
    let tol = SLACK * current.radius;
    if s.anchor.dim() != cfg.dimension || s.normal.len() != cfg.dimension {
        return Some(illegal("slab dimension mismatch"));
    }
    if (super::norm(&s.normal) - 1.0).abs() > 1e-12 {
        return Some(illegal("slab normal is not a unit vector"));
    }
    if !(s.epsilon > 0.0) {
        return Some(illegal("slab width must be positive"));
    }
    if s.epsilon > beta * current.radius + tol {
        return Some(illegal(format!(
            "slab half-width {} exceeds beta*r = {}",
            s.epsilon,
            beta * current.radius
        )));
    }
    None
}

/// Legality of Alice's move against the current ball `B_i`.
pub fn check_alice(cfg: &GameConfig, current: &Ball, mv: &AliceMove) -> Result<Verdict> {
    let r = current.radius;
    let tol = SLACK * r;
    Ok(match (cfg.variant, mv) {
        (Variant::Classic { alpha, .. }, AliceMove::Ball(a)) => {
            if a.dim() != cfg.dimension {
                illegal("ball dimension mismatch")
            } else if (a.radius - alpha * r).abs() > tol {
                illegal(format!("radius {} is not alpha*r = {}", a.radius, alpha * r))
            } else if a.center.distance(&current.center) > (1.0 - alpha) * r + tol {
                illegal("ball is not inside the current ball")
            } else {
                Verdict::Legal
            }
        }
        (Variant::Haw { beta }, AliceMove::Slab(s)) => check_slab(cfg, current, s, beta).unwrap_or(Verdict::Legal),
        (Variant::Hpw { beta }, AliceMove::Slabs(list)) => list
            .iter()
            .find_map(|s| check_slab(cfg, current, s, beta))
            .unwrap_or(Verdict::Legal),
        (v, m) => {
            return Err(Error::WrongVariant(format!("{} game cannot take {:?}", v.name(), kind(m))));
        }
    })
}

fn kind(m: &AliceMove) -> &'static str {
    match m {
        AliceMove::Ball(_) => "a ball",
        AliceMove::Slab(_) => "a single slab",
        AliceMove::Slabs(_) => "a slab list",
    }
}

/// Legality of Bob's next ball `B_{i+1}` given `B_i` and Alice's move.
pub fn check_bob(cfg: &GameConfig, current: &Ball, alice: &AliceMove, next: &Ball) -> Result<Verdict> {
    if next.dim() != cfg.dimension {
        return Ok(illegal("ball dimension mismatch"));
    }
    let r = current.radius;
    let tol = SLACK * r;
    Ok(match (cfg.variant, alice) {
        (Variant::Classic { beta, .. }, AliceMove::Ball(a)) => {
            let t = SLACK * a.radius;
            if (next.radius - beta * a.radius).abs() > t {
                illegal(format!("radius {} is not beta*r' = {}", next.radius, beta * a.radius))
            } else if next.center.distance(&a.center) > (1.0 - beta) * a.radius + t {
                illegal("ball is not inside Alice's ball")
            } else {
                Verdict::Legal
            }
        }
        (Variant::Haw { beta }, AliceMove::Slab(s)) => {
            if let Some(v) = absolute_ball_check(current, next, beta, tol) {
                v
            } else if s.meets(next, tol) {
                illegal("ball meets Alice's slab")
            } else {
                Verdict::Legal
            }
        }
        (Variant::Hpw { beta }, AliceMove::Slabs(list)) => {
            if let Some(v) = absolute_ball_check(current, next, beta, tol) {
                v
            } else {
                let avoided = list.iter().filter(|s| !s.meets(next, tol)).count();
                let needed = list.len().div_ceil(2);
                if avoided < needed {
                    illegal(format!("avoids {avoided} of {} slabs, needs {needed}", list.len()))
                } else {
                    Verdict::Legal
                }
            }
        }
        (v, m) => {
            return Err(Error::WrongVariant(format!("{} game cannot take {:?}", v.name(), kind(m))));
        }
    })
}

fn absolute_ball_check(current: &Ball, next: &Ball, beta: f64, tol: f64) -> Option<Verdict> {
    if next.radius < beta * current.radius - tol {
        Some(illegal(format!("radius {} below beta*r = {}", next.radius, beta * current.radius)))
    } else if !next.inside(current, tol) {
        Some(illegal("ball is not inside the current ball"))
    } else {
        None
    }
}

fn check_pair(cfg: &GameConfig, expect: &str, state: &Ball, alice: &AliceMove, bob: Option<&Ball>) -> Result<(Verdict, Option<Verdict>)> {
    if cfg.variant.name() != expect {
        return Err(Error::WrongVariant(format!("{expect} referee on a {} game", cfg.variant.name())));
    }
    let a = check_alice(cfg, state, alice)?;
    let b = match bob {
        Some(next) => Some(check_bob(cfg, state, alice, next)?),
        None => None,
    };
    Ok((a, b))
}

pub fn referee_classic(cfg: &GameConfig, state: &Ball, alice: &AliceMove, bob: Option<&Ball>) -> Result<(Verdict, Option<Verdict>)> {
    check_pair(cfg, "classic", state, alice, bob)
}

pub fn referee_haw(cfg: &GameConfig, state: &Ball, alice: &AliceMove, bob: Option<&Ball>) -> Result<(Verdict, Option<Verdict>)> {
    check_pair(cfg, "haw", state, alice, bob)
}

pub fn referee_hpw(cfg: &GameConfig, state: &Ball, alice: &AliceMove, bob: Option<&Ball>) -> Result<(Verdict, Option<Verdict>)> {
    check_pair(cfg, "hpw", state, alice, bob)
}
