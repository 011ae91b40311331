//! Schmidt games in R^d: the classic (α, β) game, the hyperplane absolute game
//! and the hyperplane potential game.

mod engine;
mod policies;
mod referee;

pub use engine::{play, Mover, MoveRecord, Outcome, RoundRecord, Transcript};
pub use policies::{
    candidate_balls, AlicePolicy, BobPolicy, GameView, RandomAlice, RandomBob, TargetSeekingBob,
};
pub use referee::{check_alice, check_bob, referee_classic, referee_haw, referee_hpw, Verdict};

use num_rational::BigRational;
use num_bigint::BigInt;
use num_traits::float::FloatCore;
use num_traits::{One, Zero};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::dd::{self, Dd};
use crate::error::{invalid, Error, Result};

pub const MAX_DIMENSION: usize = 3;
/// Relative slack used by every referee comparison.
pub const SLACK: f64 = 1e-12;

/// A point of R^d kept as an unevaluated sum of f64 offsets.
///
/// Points built from one another share a prefix of terms, so differences are
/// exact up to rounding at the scale of the diverging tail. This keeps the
/// referee meaningful long after plain floats would run out of digits.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    dim: usize,
    terms: Vec<[f64; MAX_DIMENSION]>,
}

impl Point {
    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIMENSION {
            return Err(invalid("dimension", "must be 1, 2 or 3"));
        }
        if !coords.iter().all(|x| x.is_finite()) {
            return Err(invalid("coords", "non-finite"));
        }
        let mut t = [0.0; MAX_DIMENSION];
        t[..coords.len()].copy_from_slice(coords);
        Ok(Self { dim: coords.len(), terms: vec![t] })
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::from_f64(&vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `self + delta`, sharing all of `self`'s terms.
    pub fn offset(&self, delta: &[f64]) -> Point {
        debug_assert_eq!(delta.len(), self.dim);
        let mut t = [0.0; MAX_DIMENSION];
        t[..self.dim].copy_from_slice(delta);
        let mut terms = self.terms.clone();
        terms.push(t);
        Point { dim: self.dim, terms }
    }

    /// `self − other` in f64.
    pub fn diff(&self, other: &Point) -> Vec<f64> {
        let k = self
            .terms
            .iter()
            .zip(&other.terms)
            .take_while(|(a, b)| a == b)
            .count();
        (0..self.dim)
            .map(|j| {
                let a = dd::sum(self.terms[k..].iter().map(|t| t[j]));
                let b = dd::sum(other.terms[k..].iter().map(|t| t[j]));
                dd::to_f64(a - b)
            })
            .collect()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        norm(&self.diff(other))
    }

    pub fn eval_dd(&self) -> Vec<Dd> {
        (0..self.dim).map(|j| dd::sum(self.terms.iter().map(|t| t[j]))).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.eval_dd().into_iter().map(dd::to_f64).collect()
    }

    /// Coordinate `j` as an exact rational.
    pub fn coord_exact(&self, j: usize) -> BigRational {
        // every term is m·2^e; sum the mantissas over the smallest exponent
        let parts: Vec<(i64, i16)> = self
            .terms
            .iter()
            .filter(|t| t[j] != 0.0)
            .map(|t| {
                let (m, e, sign) = t[j].integer_decode();
                (sign as i64 * m as i64, e)
            })
            .collect();
        let Some(e0) = parts.iter().map(|p| p.1).min() else {
            return BigRational::zero();
        };
        let num: BigInt = parts.iter().map(|&(m, e)| BigInt::from(m) << (e - e0) as usize).sum();
        if e0 >= 0 {
            BigRational::from_integer(num << e0 as usize)
        } else {
            BigRational::new(num, BigInt::one() << (-e0) as usize)
        }
    }

    /// Coordinate projection, keeping the term structure.
    pub fn project(&self, coords: &[usize]) -> Point {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut s = [0.0; MAX_DIMENSION];
                for (i, &c) in coords.iter().enumerate() {
                    s[i] = t[c];
                }
                s
            })
            .collect();
        Point { dim: coords.len(), terms }
    }

    pub fn depth(&self) -> usize {
        self.terms.len()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.dim))?;
        for x in self.eval_dd() {
            seq.serialize_element(&[x.hi(), x.lo()])?;
        }
        seq.end()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// `self ⊂ outer` up to `slack`.
    pub fn inside(&self, outer: &Ball, slack: f64) -> bool {
        self.center.distance(&outer.center) + self.radius <= outer.radius + slack
    }
}

/// Closed neighborhood `{x : |⟨x − anchor, normal⟩| ≤ epsilon}` of a hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Slab {
    pub anchor: Point,
    pub normal: Vec<f64>,
    pub epsilon: f64,
}

impl Slab {
    pub fn new(anchor: Point, normal: Vec<f64>, epsilon: f64) -> Result<Self> {
        let n = norm(&normal);
        if normal.len() != anchor.dim() || !n.is_finite() || n == 0.0 {
            return Err(invalid("normal", "must be a nonzero vector of the game dimension"));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid("epsilon", "must be positive"));
        }
        let normal = normal.iter().map(|x| x / n).collect();
        Ok(Self { anchor, normal, epsilon })
    }

    pub fn signed_distance(&self, p: &Point) -> f64 {
        dot(&p.diff(&self.anchor), &self.normal)
    }

    /// Closed sets: touching counts as meeting, and so does a gap below `slack`.
    pub fn meets(&self, ball: &Ball, slack: f64) -> bool {
        self.signed_distance(&ball.center).abs() <= self.epsilon + ball.radius + slack
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Classic { alpha: f64, beta: f64 },
    Haw { beta: f64 },
    Hpw { beta: f64 },
}

impl Variant {
    pub fn beta(&self) -> f64 {
        match *self {
            Variant::Classic { beta, .. } | Variant::Haw { beta } | Variant::Hpw { beta } => beta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Classic { .. } => "classic",
            Variant::Haw { .. } => "haw",
            Variant::Hpw { .. } => "hpw",
        }
    }
}

/// Upper bound on β in the potential game: `1/(4d+1)` for `d > 1`, `1/5` for `d = 1`.
pub fn hpw_beta_bound(d: usize) -> f64 {
    if d == 1 {
        0.2
    } else {
        1.0 / (4 * d + 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameConfig {
    pub variant: Variant,
    pub dimension: usize,
    pub domain: Ball,
    pub max_rounds: usize,
    pub radius_floor: f64,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(variant: Variant, domain: Ball, max_rounds: usize, radius_floor: f64, seed: u64) -> Result<Self> {
        let cfg = Self { variant, dimension: domain.dim(), domain, max_rounds, radius_floor, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if !(1..=MAX_DIMENSION).contains(&d) || self.domain.dim() != d {
            return Err(Error::Configuration(format!("dimension {d} unsupported")));
        }
        let open = |x: f64| x > 0.0 && x < 1.0;
        match self.variant {
            Variant::Classic { alpha, beta } => {
                if !(open(alpha) && open(beta)) {
                    return Err(Error::Configuration("alpha and beta must lie in (0, 1)".into()));
                }
            }
            Variant::Haw { beta } => {
                if !(beta > 0.0 && beta < 1.0 / 3.0) {
                    return Err(Error::Configuration("haw needs beta in (0, 1/3)".into()));
                }
            }
            Variant::Hpw { beta } => {
                let b0 = hpw_beta_bound(d);
                if !(beta > 0.0 && beta < b0) {
                    return Err(Error::Configuration(format!("hpw in dimension {d} needs beta in (0, {b0})")));
                }
            }
        }
        if !(self.radius_floor >= 0.0 && self.radius_floor.is_finite()) {
            return Err(Error::Configuration("radius_floor must be finite and nonnegative".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Configuration("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceMove {
    Ball(Ball),
    Slab(Slab),
    Slabs(Vec<Slab>),
}
