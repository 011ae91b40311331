//! One-dimensional absolute-game policies on the line `s ↦ h_s·y`.
//!
//! [`BoundedAlice`] keeps `g_t h_s y` bounded by a shortest-vector heuristic:
//! at a ball of radius `r` it looks at the lattice `g_t h_c y` with
//! `e^{2t} = 1/r`, takes its shortest vector `w`, and forbids the parameters
//! `s` near the one where `h_s` makes `w` vertical, which is where the flow
//! would shrink `w` without bound. All arithmetic is exact, because centers
//! deep into a game carry hundreds of significant bits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::dummy::dummy_move;
use crate::game::{AliceMove, AlicePolicy, Ball, GameView, Slab};
use crate::lattice::Lattice;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Offset from `ball.center` to the exact position `s`, as a slab anchor.
fn anchor_at(ball: &Ball, s: &BigRational) -> crate::game::Point {
    let delta = (s - ball.center.coord_exact(0)).to_f64().unwrap_or(0.0);
    ball.center.offset(&[delta])
}

type Vec2 = [BigInt; 2];

/// A Lagrange-reduced basis `v1, v2` with its Gram entries `a ≤ c`, `|2b| ≤ a`.
struct Reduced {
    v1: Vec2,
    v2: Vec2,
    a: BigRational,
    b: BigRational,
    c: BigRational,
}

/// Exact Lagrange reduction of the form with Gram matrix `g` in the basis
/// `v1, v2`, which are given as integer coordinates.
fn lagrange(g: [[BigRational; 2]; 2], v1: Vec2, v2: Vec2) -> Reduced {
    let [[mut a, mut b], [_, mut c]] = g;
    let (mut v1, mut v2) = (v1, v2);
    loop {
        if a > c {
            std::mem::swap(&mut a, &mut c);
            std::mem::swap(&mut v1, &mut v2);
        }
        if (&b + &b).abs() <= a {
            break;
        }
        let mu = (&b / &a).round().to_integer();
        // v2 ← v2 − μ v1
        let muq = BigRational::from_integer(mu.clone());
        c = &c - &muq * (&b + &b) + &muq * &muq * &a;
        b = &b - &muq * &a;
        v2 = [&v2[0] - &mu * &v1[0], &v2[1] - &mu * &v1[1]];
    }
    Reduced { v1, v2, a, b, c }
}

/// The shortest vector of a reduced basis and whether it is the only one up
/// to sign. Ties go to the smallest `(|p|, |q|)` in lexicographic order.
fn shortest_of(r: &Reduced) -> (Vec2, bool) {
    // |2b| ≤ a ≤ c: every vector but ±v1 has length² ≥ c
    if r.a < r.c {
        return (r.v1.clone(), true);
    }
    let (v1, v2) = (&r.v1, &r.v2);
    let cands = [v1.clone(), v2.clone(), [&v1[0] + &v2[0], &v1[1] + &v2[1]], [&v1[0] - &v2[0], &v1[1] - &v2[1]]];
    // length in the reduced coordinates of each candidate
    let lens = [
        r.a.clone(),
        r.c.clone(),
        &r.a + &r.b + &r.b + &r.c,
        &r.a - &r.b - &r.b + &r.c,
    ];
    let best = lens.iter().min().expect("nonempty");
    let w = cands
        .into_iter()
        .zip(&lens)
        .filter(|(_, l)| *l == best)
        .map(|(v, _)| v)
        .min_by(|x, y| (x[0].abs(), x[1].abs()).cmp(&(y[0].abs(), y[1].abs())))
        .expect("nonempty");
    (w, false)
}

fn unit() -> (Vec2, Vec2) {
    ([BigInt::from(1), BigInt::from(0)], [BigInt::from(0), BigInt::from(1)])
}

/// Shortest vector of the binary form with Gram matrix `g`, by exact
/// Lagrange reduction. Returns the integer coordinates of the shortest vector
/// and whether it is the only one up to sign.
pub fn shortest_exact(g: [[BigRational; 2]; 2]) -> ([BigInt; 2], bool) {
    let (v1, v2) = unit();
    shortest_of(&lagrange(g, v1, v2))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundedStats {
    pub moves: usize,
    pub unique: usize,
    /// Rounds where the shortest vector was horizontal and nothing was forbidden.
    pub throwaway: usize,
}

/// The shortest-vector policy for `s ↦ h_s·y`.
pub struct BoundedAlice {
    basis: [[BigRational; 2]; 2],
    pub kappa: f64,
    stats: BoundedStats,
    /// Last reduced basis. Balls shrink by a bounded factor per round, so it
    /// is nearly reduced for the next form and the reduction restarts there.
    warm: (Vec2, Vec2),
}

pub fn alice_bounded_1d(y: &Lattice) -> BoundedAlice {
    let (b1, b2) = y.basis();
    BoundedAlice {
        basis: [[exact(b1[0]), exact(b1[1])], [exact(b2[0]), exact(b2[1])]],
        kappa: 1.0,
        stats: BoundedStats::default(),
        warm: unit(),
    }
}

impl BoundedAlice {
    pub fn stats(&self) -> &BoundedStats {
        &self.stats
    }

    /// The dangerous parameter `s*` and the slab half-width for the ball
    /// `B(c, r)`, or `None` when the shortest vector is horizontal.
    pub fn forbidden(&mut self, c: &BigRational, r: f64, beta: f64) -> Option<(BigRational, f64)> {
        let rr = exact(r);
        // columns of h_c·y, then the form ‖g_t v‖² = v₀²/r + r·v₁²
        let cols: Vec<[BigRational; 2]> =
            self.basis.iter().map(|b| [&b[0] + c * &b[1], b[1].clone()]).collect();
        let form = |i: usize, j: usize| &cols[i][0] * &cols[j][0] / &rr + &rr * &cols[i][1] * &cols[j][1];
        let g = [[form(0, 0), form(0, 1)], [form(1, 0), form(1, 1)]];
        let (w1, w2) = self.warm.clone();
        let along = |v: &Vec2, w: &Vec2| -> BigRational {
            let (p, q) = (BigRational::from_integer(v[0].clone()), BigRational::from_integer(v[1].clone()));
            let (x, y) = (BigRational::from_integer(w[0].clone()), BigRational::from_integer(w[1].clone()));
            &p * &x * &g[0][0] + (&p * &y + &q * &x) * &g[0][1] + &q * &y * &g[1][1]
        };
        let gw = [[along(&w1, &w1), along(&w1, &w2)], [along(&w1, &w2), along(&w2, &w2)]];
        let red = lagrange(gw, unit().0, unit().1);
        // back to coordinates in `basis`
        let back = |v: &Vec2| -> Vec2 { [&v[0] * &w1[0] + &v[1] * &w2[0], &v[0] * &w1[1] + &v[1] * &w2[1]] };
        let red = Reduced { v1: back(&red.v1), v2: back(&red.v2), ..red };
        let ([p, q], unique) = shortest_of(&red);
        self.warm = (red.v1.clone(), red.v2.clone());
        self.stats.moves += 1;
        self.stats.unique += unique as usize;
        let (p, q) = (BigRational::from_integer(p), BigRational::from_integer(q));
        let u0 = &p * &self.basis[0][0] + &q * &self.basis[1][0];
        let u1 = &p * &self.basis[0][1] + &q * &self.basis[1][1];
        if u1.is_zero() {
            self.stats.throwaway += 1;
            return None;
        }
        let s = -u0 / &u1;
        let u1f = u1.to_f64().unwrap_or(f64::INFINITY);
        let width = (beta * r).min(self.kappa / (u1f * u1f));
        Some((s, width))
    }
}

impl AlicePolicy for BoundedAlice {
    fn name(&self) -> String {
        "bounded".into()
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        let ball = view.ball;
        let beta = view.config.variant.beta();
        let c = ball.center.coord_exact(0);
        match self.forbidden(&c, ball.radius, beta) {
            Some((s, width)) if width > 0.0 => {
                AliceMove::Slab(Slab::new(anchor_at(ball, &s), vec![1.0], width).expect("positive width"))
            }
            _ => dummy_move(view.config.variant, ball),
        }
    }
}

/// Forbids a neighborhood of the fixed parameter `s*` every round.
pub struct AvoidPointAlice {
    pub s_star: f64,
}

impl AlicePolicy for AvoidPointAlice {
    fn name(&self) -> String {
        "avoid_point".into()
    }

    fn play(&mut self, view: &GameView) -> AliceMove {
        let ball = view.ball;
        let eps = view.config.variant.beta() * ball.radius;
        AliceMove::Slab(Slab::new(anchor_at(ball, &exact(self.s_star)), vec![1.0], eps).expect("positive width"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn shortest_of_skewed_form() {
        // basis (1, 0), (7, 1) of Z²: Gram [[1, 7], [7, 50]]
        let (w, unique) = shortest_exact([[q(1), q(7)], [q(7), q(50)]]);
        assert!(!unique, "Z² has four shortest vectors");
        assert_eq!((w[0].abs(), w[1].abs()), (BigInt::from(1), BigInt::from(0)));
        let (w, unique) = shortest_exact([[q(5), q(6)], [q(6), q(8)]]);
        // 5p² + 12pq + 8q² at (−1, 1) is 1
        assert!(unique);
        assert_eq!(&w[0] * &w[0] * 5 + &w[0] * &w[1] * 12 + &w[1] * &w[1] * 8, BigInt::from(1));
    }

    #[test]
    fn forbidden_parameter_is_a_rational_with_small_denominator() {
        let mut a = alice_bounded_1d(&Lattice::standard());
        // near 1/3 at scale r = 1e-3 the vector (1, −3) is shortest
        let c = BigRational::new(BigInt::from(3334), BigInt::from(10000));
        let (s, w) = a.forbidden(&c, 1e-3, 0.2).unwrap();
        assert_eq!(s, BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert!(w <= 0.2e-3);
    }
}
