//! Unimodular lattices in R², stored as a basis with determinant +1, and the
//! right-invariant distance on the space of lattices.

use std::sync::LazyLock;

use crate::algebra::{self, AlgebraVector, DdMatrix, GroupElement, OneParam, LOG_RADIUS};
use crate::dd::{self, Dd};
use crate::error::{Error, Result};

pub const LATTICE_DET_TOL: f64 = 1e-9;
/// Returned by [`dist_x`] when the two lattices are not within the local regime.
pub const FAR: f64 = f64::INFINITY;

const MAX_REDUCTION_STEPS: usize = 10_000;
const MAX_ENUMERATION: f64 = 5e7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    b1: [f64; 2],
    b2: [f64; 2],
}

/// A reduced basis together with the integer matrix `U` such that
/// `reduced = original · U`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reduction {
    pub lattice: Lattice,
    pub transform: [[i64; 2]; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticePoint {
    /// Integer coordinates in the basis the lattice was given in.
    pub coords: (i64, i64),
    pub vector: [f64; 2],
}

fn det2(b1: [f64; 2], b2: [f64; 2]) -> f64 {
    b1[0] * b2[1] - b1[1] * b2[0]
}

fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

fn norm(u: [f64; 2]) -> f64 {
    u[0].hypot(u[1])
}

impl Lattice {
    /// Basis columns `b1`, `b2`. A basis with determinant −1 is accepted and
    /// re-oriented by negating `b2`.
    pub fn new(b1: [f64; 2], b2: [f64; 2]) -> Result<Self> {
        if !(b1.iter().chain(b2.iter()).all(|x| x.is_finite())) {
            return Err(Error::InvalidLattice("non-finite basis".into()));
        }
        let det = det2(b1, b2);
        let scale = 1.0 + dot(b1, b1) + dot(b2, b2);
        if (det.abs() - 1.0).abs() > LATTICE_DET_TOL * scale {
            return Err(Error::InvalidLattice(format!("|det| = {} is not 1", det.abs())));
        }
        Ok(if det > 0.0 {
            Self { b1, b2 }
        } else {
            Self { b1, b2: [-b2[0], -b2[1]] }
        })
    }

    pub(crate) fn raw(b1: [f64; 2], b2: [f64; 2]) -> Self {
        Self { b1, b2 }
    }

    pub fn standard() -> Self {
        Self::raw([1.0, 0.0], [0.0, 1.0])
    }

    /// The lattice `g·Z²`.
    pub fn from_group(g: &GroupElement) -> Self {
        Self::raw([g.a, g.c], [g.b, g.d])
    }

    pub fn basis(&self) -> ([f64; 2], [f64; 2]) {
        (self.b1, self.b2)
    }

    /// Basis matrix with `b1`, `b2` as columns.
    pub fn matrix(&self) -> GroupElement {
        GroupElement::raw(self.b1[0], self.b2[0], self.b1[1], self.b2[1])
    }

    pub fn act(&self, g: &GroupElement) -> Lattice {
        Lattice::raw(g.apply(self.b1), g.apply(self.b2))
    }

    pub fn flow(&self, t: f64) -> Lattice {
        self.act(&algebra::one_param(OneParam::Diagonal, t).expect("finite t"))
    }

    pub fn point(&self, p: i64, q: i64) -> [f64; 2] {
        let (p, q) = (p as f64, q as f64);
        [p * self.b1[0] + q * self.b2[0], p * self.b1[1] + q * self.b2[1]]
    }

    pub fn is_reduced(&self) -> bool {
        let n1 = dot(self.b1, self.b1);
        n1 <= dot(self.b2, self.b2) * (1.0 + 1e-12)
            && 2.0 * dot(self.b1, self.b2).abs() <= n1 * (1.0 + 1e-12)
    }

    /// Lagrange–Gauss reduction.
    pub fn reduce(&self) -> Reduction {
        let (mut b1, mut b2) = (self.b1, self.b2);
        let mut u = [[1i64, 0], [0, 1]];
        for _ in 0..MAX_REDUCTION_STEPS {
            if dot(b1, b1) > dot(b2, b2) {
                std::mem::swap(&mut b1, &mut b2);
                // columns swap; negate one to keep det +1
                b2 = [-b2[0], -b2[1]];
                u = [[u[0][1], -u[0][0]], [u[1][1], -u[1][0]]];
            }
            let (d12, n1) = (dot(b1, b2), dot(b1, b1));
            // |μ| = 1/2 exactly would otherwise bounce between ±b1
            if 2.0 * d12.abs() <= n1 {
                break;
            }
            let mu = (d12 / n1).round();
            b2 = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]];
            let m = mu as i64;
            u = [[u[0][0], u[0][1] - m * u[0][0]], [u[1][0], u[1][1] - m * u[1][0]]];
        }
        Reduction { lattice: Lattice::raw(b1, b2), transform: u }
    }

    pub fn reduced(&self) -> Lattice {
        self.reduce().lattice
    }

    /// Length of the shortest nonzero vector.
    pub fn systole(&self) -> f64 {
        norm(self.reduced().b1)
    }

    /// Both successive minima.
    pub fn minima(&self) -> (f64, f64) {
        let r = self.reduced();
        (norm(r.b1), norm(r.b2))
    }

    /// All nonzero lattice vectors of norm at most `radius`, sorted by norm.
    pub fn enumerate_ball(&self, radius: f64) -> Result<Vec<LatticePoint>> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(crate::error::invalid("radius", "must be finite and nonnegative"));
        }
        if radius > 1e4 {
            return Err(Error::ResourceLimit(format!("radius {radius} above 1e4")));
        }
        let red = self.reduce();
        let (r1, r2) = (red.lattice.b1, red.lattice.b2);
        let n1 = norm(r1);
        let m2_max = (radius * n1).floor();
        let expected = std::f64::consts::PI * radius * radius + 4.0 * (m2_max + 1.0);
        if expected > MAX_ENUMERATION {
            return Err(Error::ResourceLimit(format!("about {expected:.0} points")));
        }
        let along = dot(r2, r1) / n1;
        let cutoff = radius * radius * (1.0 + 1e-12);
        let u = red.transform;
        let mut out = Vec::new();
        let m2_max = m2_max as i64;
        for m2 in -m2_max..=m2_max {
            let shift = m2 as f64 * along;
            let lo = ((-radius - shift) / n1).ceil() as i64;
            let hi = ((radius - shift) / n1).floor() as i64;
            for m1 in lo..=hi {
                if m1 == 0 && m2 == 0 {
                    continue;
                }
                let v = [
                    m1 as f64 * r1[0] + m2 as f64 * r2[0],
                    m1 as f64 * r1[1] + m2 as f64 * r2[1],
                ];
                if dot(v, v) <= cutoff {
                    let coords = (u[0][0] * m1 + u[0][1] * m2, u[1][0] * m1 + u[1][1] * m2);
                    out.push(LatticePoint { coords, vector: v });
                }
            }
        }
        out.sort_by(|a, b| {
            dot(a.vector, a.vector)
                .total_cmp(&dot(b.vector, b.vector))
                .then(a.coords.cmp(&b.coords))
        });
        Ok(out)
    }

    /// Whether `v` is a primitive vector of the lattice, up to `tol`.
    pub fn contains_primitive(&self, v: [f64; 2], tol: f64) -> bool {
        let red = self.reduce();
        let m = red.lattice.matrix().inverse();
        let c = m.apply(v);
        let (p0, q0) = (c[0].round() as i64, c[1].round() as i64);
        for dp in -1..=1 {
            for dq in -1..=1 {
                let (p, q) = (p0 + dp, q0 + dq);
                let w = red.lattice.point(p, q);
                if norm([w[0] - v[0], w[1] - v[1]]) <= tol {
                    return num_integer::gcd(p, q) == 1;
                }
            }
        }
        false
    }

    pub fn to_dd(&self) -> DdBasis {
        DdBasis {
            m: [[dd::dd(self.b1[0]), dd::dd(self.b2[0])], [dd::dd(self.b1[1]), dd::dd(self.b2[1])]],
        }
    }
}

/// A lattice basis in double-double, used where flows by large times would
/// destroy f64 precision. Columns are basis vectors.
#[derive(Clone, Copy, Debug)]
pub struct DdBasis {
    pub m: DdMatrix,
}

/// Result of a double-double reduction; `transform` is exact.
#[derive(Clone, Copy, Debug)]
pub struct DdReduction {
    pub basis: DdBasis,
    pub transform: [[i128; 2]; 2],
}

fn dd_to_i128(x: Dd) -> i128 {
    x.hi() as i128 + x.lo() as i128
}

impl DdBasis {
    pub fn col(&self, j: usize) -> [Dd; 2] {
        [self.m[0][j], self.m[1][j]]
    }

    fn norm2(v: [Dd; 2]) -> Dd {
        v[0] * v[0] + v[1] * v[1]
    }

    pub fn left_mul(&self, g: &DdMatrix) -> DdBasis {
        DdBasis { m: algebra::dd_mul(g, &self.m) }
    }

    /// `g_t` applied with `e^{±t}` computed in double-double.
    pub fn flow(&self, t: Dd) -> DdBasis {
        let (et, emt) = (dd::exp(t), dd::exp(-t));
        self.scale_rows(et, emt)
    }

    pub fn scale_rows(&self, top: Dd, bottom: Dd) -> DdBasis {
        let m = self.m;
        DdBasis { m: [[m[0][0] * top, m[0][1] * top], [m[1][0] * bottom, m[1][1] * bottom]] }
    }

    pub fn reduce(&self) -> DdReduction {
        let mut b1 = self.col(0);
        let mut b2 = self.col(1);
        let mut u = [[1i128, 0], [0, 1]];
        for _ in 0..MAX_REDUCTION_STEPS {
            if Self::norm2(b1) > Self::norm2(b2) {
                std::mem::swap(&mut b1, &mut b2);
                b2 = [-b2[0], -b2[1]];
                u = [[u[0][1], -u[0][0]], [u[1][1], -u[1][0]]];
            }
            let (d12, n1) = (b1[0] * b2[0] + b1[1] * b2[1], Self::norm2(b1));
            if (d12 * 2.0).abs() <= n1 {
                break;
            }
            let mu = (d12 / n1).round();
            b2 = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]];
            let m = dd_to_i128(mu);
            u = [[u[0][0], u[0][1] - m * u[0][0]], [u[1][0], u[1][1] - m * u[1][0]]];
        }
        DdReduction {
            basis: DdBasis { m: [[b1[0], b2[0]], [b1[1], b2[1]]] },
            transform: u,
        }
    }

    pub fn systole(&self) -> f64 {
        let r = self.reduce().basis;
        dd::to_f64(Self::norm2(r.col(0))).sqrt()
    }

    /// Nearest f64 lattice (reduced first so the rounding is benign).
    pub fn to_lattice(&self) -> Lattice {
        let r = self.reduce().basis;
        let f = |x: Dd| dd::to_f64(x);
        Lattice::raw([f(r.m[0][0]), f(r.m[1][0])], [f(r.m[0][1]), f(r.m[1][1])])
    }
}

/// Minimum systole along `g_t x` on the grid `t = 0, step, 2·step, …, ≤ t_max`,
/// with the time where it is attained.
pub fn orbit_min_systole(x: &Lattice, t_max: f64, step: f64) -> Result<(f64, f64)> {
    orbit_min_systole_dd(&x.to_dd(), t_max, step)
}

pub fn orbit_min_systole_dd(x: &DdBasis, t_max: f64, step: f64) -> Result<(f64, f64)> {
    let mut best = (f64::INFINITY, 0.0);
    orbit_walk(x, t_max, step, |t, s| {
        if s < best.0 {
            best = (s, t);
        }
    })?;
    Ok(best)
}

/// `(t, systole(g_t x))` on the same grid as [`orbit_min_systole`].
pub fn orbit_systole_trace(x: &Lattice, t_max: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    orbit_walk(&x.to_dd(), t_max, step, |t, s| out.push((t, s)))?;
    Ok(out)
}

fn orbit_walk(x: &DdBasis, t_max: f64, step: f64, mut visit: impl FnMut(f64, f64)) -> Result<()> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(crate::error::invalid("t_max", "must be finite and nonnegative"));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(crate::error::invalid("step", "must be positive"));
    }
    let n = (t_max / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(Error::ResourceLimit(format!("{n} grid points")));
    }
    let up = dd::exp(dd::dd(step));
    let down = dd::exp(dd::dd(-step));
    let mut b = x.reduce().basis;
    visit(0.0, b.systole());
    for i in 1..=n {
        b = b.scale_rows(up, down).reduce().basis;
        visit(i as f64 * step, b.systole());
    }
    Ok(())
}

/// SL(2,Z) matrices with entries in [−3, 3], identity first.
pub static SMALL_GAMMAS: LazyLock<Vec<[i64; 4]>> = LazyLock::new(|| {
    let mut v = vec![[1, 0, 0, 1]];
    for a in -3..=3i64 {
        for b in -3..=3i64 {
            for c in -3..=3i64 {
                for d in -3..=3i64 {
                    if a * d - b * c == 1 && [a, b, c, d] != [1, 0, 0, 1] {
                        v.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    v
});

/// Minimal-norm `X` with `x = exp(X)·y`, searched over small changes of
/// reduced bases. `None` when no candidate is within the local regime or
/// within `max_norm`.
pub fn local_log(x: &Lattice, y: &Lattice, max_norm: f64) -> Option<AlgebraVector> {
    let (xr, yr) = (x.reduced(), y.reduced());
    local_log_reduced(&xr, &yr, max_norm)
}

pub(crate) fn minima_of_reduced(l: &Lattice) -> (f64, f64) {
    (norm(l.b1), norm(l.b2))
}

/// Same as [`local_log`] for already reduced bases.
pub fn local_log_reduced(xr: &Lattice, yr: &Lattice, max_norm: f64) -> Option<AlgebraVector> {
    local_log_matrix(xr, yr, max_norm).map(|(z, _)| z)
}

/// Like [`local_log_reduced`], also returning `M = exp(X)` as computed from
/// the bases, which is more accurate than re-exponentiating `X`.
pub fn local_log_matrix(
    xr: &Lattice,
    yr: &Lattice,
    max_norm: f64,
) -> Option<(AlgebraVector, GroupElement)> {
    // successive minima move by at most a factor e^{‖X‖}
    let (x1, x2) = minima_of_reduced(xr);
    let (y1, y2) = minima_of_reduced(yr);
    let bound = max_norm.min(LOG_RADIUS);
    if (x1 / y1).ln().abs() > bound || (x2 / y2).ln().abs() > bound {
        return None;
    }
    let bx = xr.matrix();
    let p = yr.matrix().inverse();
    let mut best = None;
    let mut best_norm = bound;
    for g in SMALL_GAMMAS.iter() {
        let (ga, gb, gc, gd) = (g[0] as f64, g[1] as f64, g[2] as f64, g[3] as f64);
        let l = GroupElement::raw(
            bx.a * ga + bx.b * gc,
            bx.a * gb + bx.b * gd,
            bx.c * ga + bx.d * gc,
            bx.c * gb + bx.d * gd,
        );
        let m = l * p;
        let dist = m.distance_to_identity();
        if dist > LOG_RADIUS || dist > 1.5 * best_norm {
            continue;
        }
        let z = algebra::log_unchecked(&m);
        let n = z.norm();
        if n <= best_norm {
            best_norm = n;
            best = Some((z, m));
        }
    }
    best
}

/// Right-invariant distance, or [`FAR`] beyond the local regime.
pub fn dist_x(x: &Lattice, y: &Lattice) -> f64 {
    local_log(x, y, LOG_RADIUS).map_or(FAR, |z| z.norm())
}
