//! Charts on the space of lattices and the submanifolds the avoidance
//! strategy steers around: closed horocycles `Z_v`, their thickenings along
//! the diagonal flow, and points.
//!
//! A submanifold is kept as a list of samples. Around each sample `p` with
//! right-trivialized tangent generators `X_1, …, X_k` the local patch is
//! `exp(c_k X_k)⋯exp(c_1 X_1)·p` for `c` in a small box; this is exact for
//! the orbits used here, so distances are computed on the true submanifold
//! rather than on an interpolation.

use nalgebra::{DMatrix, DVector, Vector3};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, RngExt};

use crate::algebra::{
    self, adjoint, adjoint_flow, dexp_matrix, exp_alg, log_unchecked, AlgebraVector,
    GroupElement, LOG_RADIUS,
};
use crate::error::{invalid, Error, Result};
use crate::lattice::{dist_x, local_log_matrix, minima_of_reduced, Lattice, FAR};

/// Threshold used by the rank tests on normalized generators.
pub const RANK_TOL: f64 = 1e-6;
/// Default spacing (in metric length) between samples along a curve.
pub const DEFAULT_SPACING: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horospherical {
    /// Spanned by `E`.
    Upper,
    /// Spanned by `F`.
    Lower,
}

impl Horospherical {
    pub fn generator(self) -> AlgebraVector {
        match self {
            Horospherical::Upper => AlgebraVector::E,
            Horospherical::Lower => AlgebraVector::F,
        }
    }
}

/// Exponential chart `X ↦ exp(X)·base` on the ball of the given radius.
#[derive(Clone, Debug)]
pub struct Chart {
    base: Lattice,
    radius: f64,
}

impl Chart {
    pub fn new(base: &Lattice, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= LOG_RADIUS / 2.0) {
            return Err(invalid("radius", format!("must be in (0, {}]", LOG_RADIUS / 2.0)));
        }
        Ok(Self { base: base.reduced(), radius })
    }

    pub fn base(&self) -> &Lattice {
        &self.base
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn apply(&self, x: &AlgebraVector) -> Result<Lattice> {
        if !(x.norm() <= self.radius) {
            return Err(Error::OutOfDomain(format!("|X| = {} > {}", x.norm(), self.radius)));
        }
        Ok(self.base.act(&exp_alg(x)))
    }

    pub fn invert(&self, x: &Lattice) -> Result<AlgebraVector> {
        match crate::lattice::local_log(x, &self.base, self.radius) {
            Some(z) if z.norm() <= self.radius => Ok(z),
            _ => Err(Error::OutOfDomain("lattice outside the chart".into())),
        }
    }

    /// Largest radius in `upper·2^{-k}` on which `dist(exp X·b, exp Y·b)/|X − Y|`
    /// stays in `[1/2, 2]` for `trials` random pairs.
    pub fn bilipschitz_radius<R: Rng>(&self, upper: f64, trials: usize, rng: &mut R) -> f64 {
        bilipschitz_radius_at(&self.base, upper, trials, rng)
    }
}

fn random_in_ball<R: Rng>(r: f64, rng: &mut R) -> AlgebraVector {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 <= 1.0 && n2 > 0.0 {
            return AlgebraVector::from_orthonormal([r * v[0], r * v[1], r * v[2]]);
        }
    }
}

pub fn bilipschitz_radius_at<R: Rng>(base: &Lattice, upper: f64, trials: usize, rng: &mut R) -> f64 {
    let mut r = upper.min(LOG_RADIUS / 2.0);
    for _ in 0..60 {
        let ok = (0..trials).all(|_| {
            let (x, y) = (random_in_ball(r, rng), random_in_ball(r, rng));
            let d = dist_x(&base.act(&exp_alg(&x)), &base.act(&exp_alg(&y)));
            let e = (x - y).norm();
            e == 0.0 || (d.is_finite() && d <= 2.0 * e && d >= 0.5 * e)
        });
        if ok {
            return r;
        }
        r /= 2.0;
    }
    r
}

/// A sample point with its local patch generators and parameter box.
#[derive(Clone, Debug)]
pub struct Sample {
    pub u: f64,
    pub t: f64,
    pub point: Lattice,
    minima: (f64, f64),
    pub generators: Vec<AlgebraVector>,
    pub bounds: Vec<(f64, f64)>,
}

impl Sample {
    pub fn new(u: f64, t: f64, point: &Lattice, generators: Vec<AlgebraVector>, bounds: Vec<(f64, f64)>) -> Self {
        let point = point.reduced();
        Self { u, t, minima: minima_of_reduced(&point), point, generators, bounds }
    }

    fn reach(&self) -> f64 {
        self.generators
            .iter()
            .zip(&self.bounds)
            .map(|(g, b)| g.norm() * b.0.abs().max(b.1.abs()))
            .sum()
    }
}

/// Closest point of a submanifold to a lattice `x`, in the chart at `x`.
#[derive(Clone, Debug)]
pub struct Nearest {
    pub distance: f64,
    /// Chart coordinates of the closest point: it equals `exp(zeta)·x`.
    pub zeta: AlgebraVector,
    /// Tangent vectors of the submanifold at that point, in the chart at `x`.
    pub tangents: Vec<AlgebraVector>,
    pub sample: usize,
    pub params: Vec<f64>,
}

fn patch_eval(gens: &[AlgebraVector], c: &[f64], m: &GroupElement) -> GroupElement {
    gens.iter().zip(c).fold(*m, |g, (x, ci)| exp_alg(&(*ci * *x)) * g)
}

// Tangent columns of c ↦ log(patch(c)) at ζ.
fn patch_tangents(gens: &[AlgebraVector], c: &[f64], zeta: &AlgebraVector) -> Option<Vec<AlgebraVector>> {
    let jinv = dexp_matrix(zeta).try_inverse()?;
    let k = gens.len();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = gens[j];
        for l in j + 1..k {
            v = adjoint(&exp_alg(&(c[l] * gens[l])), &v);
        }
        out.push(AlgebraVector::from_vector3(&(jinv * v.to_vector3())));
    }
    Some(out)
}

/// Minimize `|log(patch(c))|` over the parameter box by projected Gauss–Newton.
pub(crate) fn minimize_patch(
    gens: &[AlgebraVector],
    bounds: &[(f64, f64)],
    m: &GroupElement,
) -> Option<(Vec<f64>, AlgebraVector, Vec<AlgebraVector>)> {
    let k = gens.len();
    let mut c = vec![0.0; k];
    let mut zeta = log_unchecked(m);
    let mut tangents = patch_tangents(gens, &c, &zeta)?;
    if k == 0 {
        return Some((c, zeta, tangents));
    }
    for _ in 0..12 {
        let a = DMatrix::from_fn(3, k, |i, j| tangents[j].to_orthonormal()[i]);
        let z = DVector::from_column_slice(&zeta.to_orthonormal());
        let ata = a.transpose() * &a;
        let rhs = -(a.transpose() * z);
        let step = ata.lu().solve(&rhs)?;
        let mut moved = 0.0f64;
        let mut next = c.clone();
        for j in 0..k {
            next[j] = (c[j] + step[j]).clamp(bounds[j].0, bounds[j].1);
            moved = moved.max((next[j] - c[j]).abs() * gens[j].norm());
        }
        let g = patch_eval(gens, &next, m);
        if g.distance_to_identity() > LOG_RADIUS {
            break;
        }
        let nz = log_unchecked(&g);
        if nz.norm() > zeta.norm() && moved > 1e-15 {
            // a clamped step can overshoot; keep the better point
            break;
        }
        c = next;
        zeta = nz;
        tangents = patch_tangents(gens, &c, &zeta)?;
        if moved <= 1e-17 + 1e-15 * zeta.norm() {
            break;
        }
    }
    Some((c, zeta, tangents))
}

/// Behaviour shared by sampled submanifolds of the space of lattices.
pub trait Submanifold: Send + Sync {
    fn samples(&self) -> &[Sample];

    /// Dimension of the tangent space.
    fn dimension(&self) -> usize {
        self.samples().first().map_or(0, |s| s.generators.iter().filter(|g| g.norm() > 0.0).count())
    }

    /// Closest point within distance `dmax`, if any.
    fn nearest_within(&self, x: &Lattice, dmax: f64) -> Option<Nearest> {
        let xr = x.reduced();
        let (m1, m2) = minima_of_reduced(&xr);
        let mut best: Option<Nearest> = None;
        let mut best_d = dmax.min(LOG_RADIUS);
        for (i, s) in self.samples().iter().enumerate() {
            let reach = s.reach();
            let lb = (m1 / s.minima.0).ln().abs().max((m2 / s.minima.1).ln().abs());
            if lb - reach > best_d {
                continue;
            }
            // sample point s.point = exp(ζ_s)·x
            let Some((_, m)) = local_log_matrix(&s.point, &xr, best_d + reach) else {
                continue;
            };
            let Some((params, zeta, tangents)) = minimize_patch(&s.generators, &s.bounds, &m) else {
                continue;
            };
            let d = zeta.norm();
            if d <= best_d {
                best_d = d;
                best = Some(Nearest { distance: d, zeta, tangents, sample: i, params });
            }
        }
        best
    }

    /// Distance from `x`, or [`FAR`] outside the local regime.
    fn distance_to(&self, x: &Lattice) -> f64 {
        self.nearest_within(x, LOG_RADIUS).map_or(FAR, |n| n.distance)
    }
}

fn unit_columns(vs: &[AlgebraVector]) -> Vec<Vector3<f64>> {
    vs.iter()
        .filter(|v| v.norm() > 0.0)
        .map(|v| v.to_vector3() / v.norm())
        .collect()
}

fn smallest_singular_value(cols: &[Vector3<f64>]) -> f64 {
    if cols.is_empty() {
        return 0.0;
    }
    let m = DMatrix::from_fn(3, cols.len(), |i, j| cols[j][i]);
    if cols.len() > 3 {
        return 0.0;
    }
    m.svd(false, false).singular_values.min()
}

/// Numerical rank with the smallest-singular-value test.
pub fn numerical_rank(vs: &[AlgebraVector]) -> usize {
    let cols = unit_columns(vs);
    for k in (1..=cols.len().min(3)).rev() {
        // greedy: the full set first, then drop trailing vectors
        if smallest_singular_value(&cols[..k]) > RANK_TOL {
            return k;
        }
    }
    0
}

/// Distance from the unit vector along `v` to the span of `span`.
pub fn angle_to_span(v: &AlgebraVector, span: &[AlgebraVector]) -> f64 {
    let mut basis: Vec<Vector3<f64>> = Vec::new();
    for w in unit_columns(span) {
        let mut r = w;
        for b in &basis {
            r -= b * b.dot(&r);
        }
        if r.norm() > 1e-12 {
            basis.push(r / r.norm());
        }
    }
    let mut u = v.to_vector3() / v.norm();
    for b in &basis {
        u -= b * b.dot(&u);
    }
    u.norm()
}

/// `θ(Z, x, H)` at sample `i`: distance from the unit vector of `H` to the
/// tangent space.
pub fn theta<S: Submanifold + ?Sized>(z: &S, i: usize, h: Horospherical) -> f64 {
    angle_to_span(&h.generator(), &z.samples()[i].generators)
}

pub fn transversality_constant<S: Submanifold + ?Sized>(z: &S, h: Horospherical) -> f64 {
    (0..z.samples().len()).map(|i| theta(z, i, h)).fold(f64::INFINITY, f64::min)
}

/// `H` direction is not tangent to the thickened curve: `{ż, Ĥ}` has rank 2.
pub fn cond_f<S: Submanifold + ?Sized>(z: &S, i: usize) -> bool {
    let mut v = z.samples()[i].generators.clone();
    let k = numerical_rank(&v);
    v.push(AlgebraVector::H);
    numerical_rank(&v) == k + 1
}

/// `{tangents, Ĥ, H}` spans the whole algebra.
pub fn cond_hf<S: Submanifold + ?Sized>(z: &S, i: usize, h: Horospherical) -> bool {
    let mut v = z.samples()[i].generators.clone();
    if !v.iter().any(|g| angle_to_span(&AlgebraVector::H, &[*g]) < RANK_TOL) {
        v.push(AlgebraVector::H);
    }
    v.push(h.generator());
    numerical_rank(&v) == 3
}

/// Exact rank of algebra vectors over Q, reading the f64 entries exactly.
pub fn lie_span_rank(gens: &[AlgebraVector]) -> usize {
    let mut rows: Vec<Vec<BigRational>> = gens
        .iter()
        .map(|g| {
            [g.e, g.f, g.h]
                .iter()
                .map(|&x| BigRational::from_float(x).unwrap_or_else(BigRational::zero))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..3 {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let p = rows[rank][col].clone();
        #[allow(clippy::needless_range_loop)]
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &p;
                for c in col..3 {
                    let sub = &f * &rows[rank][c];
                    rows[r][c] = &rows[r][c] - sub;
                }
            }
        }
        rank += 1;
    }
    debug_assert!(rows.iter().skip(rank).all(|r| r.iter().all(|x| !x.abs().is_positive())));
    rank
}

/// A sampled curve `u ↦ z(u)` with right-trivialized tangents.
#[derive(Clone, Debug)]
pub struct CurveZ {
    samples: Vec<Sample>,
    /// Period in `u` if the curve closes up.
    pub period: Option<f64>,
    pub generator: AlgebraVector,
    pub spacing: f64,
}

impl Submanifold for CurveZ {
    fn samples(&self) -> &[Sample] {
        &self.samples
    }
}

impl CurveZ {
    /// The single point `x`, viewed as a degenerate curve.
    pub fn point(x: &Lattice) -> Self {
        CurveZ {
            samples: vec![Sample::new(0.0, 0.0, x, vec![], vec![])],
            period: None,
            generator: AlgebraVector::zero(),
            spacing: 0.0,
        }
    }

    /// Orbit `u ↦ exp(uX)·x0` for `u ∈ [0, length)` (closed) or `[0, length]`.
    pub fn orbit(x0: &Lattice, x: AlgebraVector, length: f64, closed: bool, spacing: f64) -> Result<Self> {
        if !(length > 0.0 && spacing > 0.0 && x.norm() > 0.0) {
            return Err(invalid("orbit", "length, spacing and generator must be positive"));
        }
        let count = ((length * x.norm() / spacing).ceil() as usize).max(4);
        if count > 1_000_000 {
            return Err(Error::ResourceLimit(format!("{count} samples")));
        }
        let du = length / count as f64;
        let n = if closed { count } else { count + 1 };
        let half = 0.6 * du;
        let samples = (0..n)
            .map(|i| {
                let u = i as f64 * du;
                let lo = if !closed && i == 0 { 0.0 } else { -half };
                let hi = if !closed && i == n - 1 { 0.0 } else { half };
                Sample::new(u, 0.0, &x0.act(&exp_alg(&(u * x))), vec![x], vec![(lo, hi)])
            })
            .collect();
        Ok(CurveZ {
            samples,
            period: if closed { Some(length) } else { None },
            generator: x,
            spacing: du * x.norm(),
        })
    }

    pub fn sample_point(&self, i: usize) -> Lattice {
        self.samples[i].point
    }

    /// `z(u)` evaluated exactly along the orbit of the nearest sample.
    pub fn at(&self, u: f64) -> Lattice {
        let s = &self.samples[0];
        if self.generator.norm() == 0.0 {
            return s.point;
        }
        s.point.act(&exp_alg(&(u * self.generator)))
    }
}

/// First return time of `s ↦ exp(sX)·x0` to `x0`, found by a coarse scan and
/// golden-section refinement; `None` if nothing returns within `s_max`.
pub fn detect_period(x0: &Lattice, x: &AlgebraVector, s_max: f64, step: f64) -> Option<f64> {
    let d = |s: f64| dist_x(&x0.act(&exp_alg(&(s * *x))), x0);
    let mut left = false;
    let mut s = step;
    while s <= s_max {
        let v = d(s);
        if !left {
            left = v > 0.1;
        } else if v < 0.05 {
            // d grows like |s − P|·|X| near the return time P
            let (mut a, mut b) = (s - step, s + 2.0 * v / x.norm() + step);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let (c1, c2) = (b - g * (b - a), a + g * (b - a));
                if d(c1) < d(c2) {
                    b = c2;
                } else {
                    a = c1;
                }
            }
            let p = 0.5 * (a + b);
            return (d(p) <= 1e-6).then_some(p);
        }
        s += step;
    }
    None
}

/// Closed horocycles `Z_{v/n}`, `n = 1..=n_max`: lattices containing `v(a)/n`
/// as a primitive vector, traced by the stabilizer of `v(a)`.
pub fn make_zv(a: f64, n_max: u32) -> Result<Vec<CurveZ>> {
    make_zv_with_spacing(a, n_max, DEFAULT_SPACING)
}

pub fn make_zv_with_spacing(a: f64, n_max: u32, spacing: f64) -> Result<Vec<CurveZ>> {
    let v = algebra::v_of_a(a)?;
    let x = algebra::stabilizer_generator(a)?;
    if n_max == 0 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    (1..=n_max)
        .map(|n| {
            let vn = [v[0] / n as f64, v[1] / n as f64];
            // w with det[vn w] = 1
            let w = [0.0, 1.0 / vn[0]];
            let x0 = Lattice::new(vn, w)?;
            let expected = a.abs() / (n * n) as f64;
            let period = detect_period(&x0, &x, 4.0 * expected + 4.0, (expected / 200.0).min(0.01))
                .ok_or_else(|| Error::OutOfDomain(format!("Z_v/{n} did not close up")))?;
            CurveZ::orbit(&x0, x, period, true, spacing)
        })
        .collect()
}

/// `g_{[−τ, τ]}·Z` for a curve `Z`.
#[derive(Clone, Debug)]
pub struct ThickenedZ {
    samples: Vec<Sample>,
    pub tau: f64,
}

impl Submanifold for ThickenedZ {
    fn samples(&self) -> &[Sample] {
        &self.samples
    }
}

/// Thicken a curve along the diagonal flow. Fails when the thickening is not
/// embedded at the sampled resolution.
pub fn thicken(z: &CurveZ, tau: f64) -> Result<ThickenedZ> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid("tau", "must be finite and nonnegative"));
    }
    if tau == 0.0 {
        return Ok(ThickenedZ { samples: z.samples.clone(), tau });
    }
    if !thickening_embedded(z, tau) {
        return Err(Error::ParameterTooLarge(format!("thickening by tau = {tau} is not embedded")));
    }
    Ok(thicken_immersed(z, tau))
}

/// The thickened surface without the embedding check. Pointwise quantities
/// such as tangent spaces and `θ` are meaningful for any `tau`.
pub fn thicken_immersed(z: &CurveZ, tau: f64) -> ThickenedZ {
    if tau <= 0.0 {
        return ThickenedZ { samples: z.samples.clone(), tau: 0.0 };
    }
    let nt = (tau / DEFAULT_SPACING).ceil().max(1.0) as i64;
    let dt = tau / nt as f64;
    let mut samples = Vec::new();
    for s in &z.samples {
        for j in -nt..=nt {
            let t = j as f64 * dt;
            let gens: Vec<AlgebraVector> = s
                .generators
                .iter()
                .map(|g| adjoint_flow(t, g))
                .chain(std::iter::once(AlgebraVector::H))
                .collect();
            let mut bounds = s.bounds.clone();
            let lo = if j == -nt { 0.0 } else { -0.6 * dt };
            let hi = if j == nt { 0.0 } else { 0.6 * dt };
            bounds.push((lo, hi));
            samples.push(Sample::new(s.u, t, &s.point.flow(t), gens, bounds));
        }
    }
    ThickenedZ { samples, tau }
}

/// Self-distance check: for `0 < |s| ≤ 2τ`, `g_s Z` stays at distance at least
/// half of what the flow direction alone accounts for. Another sheet of `Z`
/// coming closer than that is treated as a failure of embedding.
pub fn thickening_embedded(z: &CurveZ, tau: f64) -> bool {
    let n = z.samples.len();
    let stride = (n / 100).max(1);
    let theta_h = if z.generator.norm() > 0.0 {
        angle_to_span(&AlgebraVector::H, &[z.generator]) * AlgebraVector::H.norm()
    } else {
        AlgebraVector::H.norm()
    };
    (1..=16).all(|k| {
        let s = 2.0 * tau * k as f64 / 16.0;
        [s, -s].iter().all(|&s| {
            (0..n).step_by(stride).all(|i| {
                let d = z.distance_to(&z.samples[i].point.flow(s));
                d >= 0.5 * s.abs() * theta_h
            })
        })
    })
}

/// Largest `upper·2^{-k}` passing [`thickening_embedded`].
pub fn embedding_radius(z: &CurveZ, upper: f64) -> f64 {
    let mut tau = upper;
    for _ in 0..40 {
        if thickening_embedded(z, tau) {
            return tau;
        }
        tau /= 2.0;
    }
    0.0
}

impl ThickenedZ {
    pub fn point_at(&self, i: usize) -> Lattice {
        self.samples[i].point
    }
}

/// Chart points of `Z` within `σ` of `y = exp(p)·z_i`, for the local patch at `i`.
fn local_points(s: &Sample, p: &AlgebraVector, sigma: f64, per_axis: usize) -> Vec<AlgebraVector> {
    let m = exp_alg(&(-*p));
    let k = s.generators.len();
    if k == 0 {
        let z = log_unchecked(&m);
        return if z.norm() <= sigma { vec![z] } else { vec![] };
    }
    let ranges: Vec<f64> = s.generators.iter().map(|g| 2.0 * sigma / g.norm()).collect();
    let steps = per_axis as i64;
    let mut out = Vec::new();
    let mut idx = vec![-steps; k];
    loop {
        let c: Vec<f64> = (0..k).map(|j| ranges[j] * idx[j] as f64 / steps as f64).collect();
        let g = patch_eval(&s.generators, &c, &m);
        if g.distance_to_identity() <= LOG_RADIUS {
            let z = log_unchecked(&g);
            if z.norm() <= sigma {
                out.push(z);
            }
        }
        let mut j = 0;
        loop {
            if j == k {
                return out;
            }
            idx[j] += 1;
            if idx[j] <= steps {
                break;
            }
            idx[j] = -steps;
            j += 1;
        }
    }
}

fn distance_to_affine(v: &AlgebraVector, origin: &AlgebraVector, dirs: &[AlgebraVector]) -> f64 {
    let w = *v - *origin;
    let mut basis: Vec<Vector3<f64>> = Vec::new();
    for d in unit_columns(dirs) {
        let mut r = d;
        for b in &basis {
            r -= b * b.dot(&r);
        }
        if r.norm() > 1e-12 {
            basis.push(r / r.norm());
        }
    }
    let mut r = w.to_vector3();
    for b in &basis {
        r -= b * b.dot(&r);
    }
    r.norm()
}

/// Flatness at scale `σ`: around probes `exp(p)·z_i` with `|p| ≤ σ/2`, every
/// point of the patch within `σ` lies within `bσ` of the tangent plane at the
/// closest point.
pub fn flat_at_scale<S: Submanifold + ?Sized>(z: &S, b: f64, sigma: f64, stride: usize, per_axis: usize) -> bool {
    let probes: Vec<AlgebraVector> = std::iter::once(AlgebraVector::zero())
        .chain((0..3).flat_map(|k| {
            let mut e = [0.0; 3];
            e[k] = 0.5 * sigma;
            let v = AlgebraVector::from_orthonormal(e);
            [v, -v]
        }))
        .collect();
    z.samples().iter().step_by(stride.max(1)).all(|s| {
        probes.iter().all(|p| {
            let m = exp_alg(&(-*p));
            let Some((_, near, tangents)) = minimize_patch(&s.generators, &widen(&s.bounds, s, sigma), &m) else {
                return false;
            };
            local_points(s, p, sigma, per_axis)
                .iter()
                .all(|q| distance_to_affine(q, &near, &tangents) <= b * sigma)
        })
    })
}

fn widen(bounds: &[(f64, f64)], s: &Sample, sigma: f64) -> Vec<(f64, f64)> {
    bounds
        .iter()
        .zip(&s.generators)
        .map(|(_, g)| {
            let r = 2.0 * sigma / g.norm();
            (-r, r)
        })
        .collect()
}

/// Largest `σ ≤ upper` of the form `upper·2^{-k}` at which the submanifold is
/// `b`-flat at the sampled probes.
pub fn sigma2_estimate<S: Submanifold + ?Sized>(z: &S, b: f64, upper: f64) -> Result<f64> {
    sigma2_estimate_with(z, b, upper, 8, 10)
}

pub fn sigma2_estimate_with<S: Submanifold + ?Sized>(
    z: &S,
    b: f64,
    upper: f64,
    stride: usize,
    per_axis: usize,
) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("b", "must be positive"));
    }
    if !(upper > 0.0 && upper <= LOG_RADIUS) {
        return Err(invalid("upper", "must be in (0, 0.5]"));
    }
    let mut sigma = upper;
    for _ in 0..80 {
        if flat_at_scale(z, b, sigma, stride, per_axis) {
            return Ok(sigma);
        }
        sigma /= 2.0;
    }
    Err(Error::OutOfDomain("no flat scale found".into()))
}

/// `dist(exp(X)·x, x)` never exceeds `|X|`; handy for tests and sanity checks.
pub fn chart_distance_bound(x: &Lattice, v: &AlgebraVector) -> f64 {
    dist_x(&x.act(&exp_alg(v)), x).min(v.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z4() -> CurveZ {
        make_zv(4.0, 1).unwrap().remove(0)
    }

    #[test]
    fn zv_period_and_membership() {
        let z = z4();
        assert!((z.period.unwrap() - 4.0).abs() < 1e-6);
        let v = algebra::v_of_a(4.0).unwrap();
        for s in z.samples().iter().step_by(37) {
            assert!(s.point.contains_primitive(v, 1e-8));
        }
    }

    #[test]
    fn zv_smaller_vectors_have_shorter_period() {
        let zs = make_zv(4.0, 2).unwrap();
        assert!((zs[1].period.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nearest_recovers_offset_point() {
        let z = z4();
        let x0 = z.at(1.234);
        let off = AlgebraVector::new(0.0, 0.0, 0.01);
        let x = x0.act(&exp_alg(&off));
        let n = z.nearest_within(&x, 0.2).unwrap();
        // the offset is not orthogonal to the curve, so the distance is at most |off|
        assert!(n.distance <= off.norm() + 1e-12);
        assert!(n.distance > 0.0);
        assert!(z.distance_to(&x0) < 1e-12);
    }

    #[test]
    fn point_submanifold_distance_is_dist_x() {
        let x = Lattice::standard();
        let p = CurveZ::point(&x);
        let y = x.flow(0.03);
        assert!((p.distance_to(&y) - dist_x(&x, &y)).abs() < 1e-14);
        assert_eq!(p.dimension(), 0);
    }

    #[test]
    fn theta_values() {
        let z = z4();
        assert!((theta(&z, 0, Horospherical::Upper) - 3f64.sqrt() / 2.0).abs() < 1e-12);
        let th = thicken_immersed(&z, 0.1);
        let i = th.samples().iter().position(|s| s.t == 0.0).unwrap();
        assert!((theta(&th, i, Horospherical::Upper) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(cond_f(&z, 0));
        assert!(cond_hf(&z, 0, Horospherical::Upper));
        assert!(cond_hf(&z, 0, Horospherical::Lower));
    }

    #[test]
    fn thickening_beyond_self_intersection_fails() {
        // g_s Z meets Z once 8 sinh s = 1
        let z = z4();
        assert!(matches!(thicken(&z, 0.1), Err(Error::ParameterTooLarge(_))));
        let tau = embedding_radius(&z, 0.1);
        assert!(tau > 0.0 && 2.0 * tau < (1.0f64 / 8.0).asinh());
        assert!(thicken(&z, tau).is_ok());
    }

    #[test]
    fn thicken_zero_is_identity() {
        let z = z4();
        let th = thicken(&z, 0.0).unwrap();
        assert_eq!(th.samples().len(), z.samples().len());
        assert_eq!(th.dimension(), 1);
    }

    #[test]
    fn lie_rank_exact() {
        let v = algebra::stabilizer_generator(4.0).unwrap();
        assert_eq!(lie_span_rank(&[AlgebraVector::F, AlgebraVector::H, v]), 3);
        assert_eq!(lie_span_rank(&[AlgebraVector::E, AlgebraVector::E, 2.0 * AlgebraVector::E]), 1);
        assert_eq!(lie_span_rank(&[]), 0);
    }

    #[test]
    fn chart_roundtrip() {
        let c = Chart::new(&Lattice::standard(), 0.2).unwrap();
        let x = AlgebraVector::new(0.05, -0.02, 0.03);
        let back = c.invert(&c.apply(&x).unwrap()).unwrap();
        assert!((back - x).norm() < 1e-13);
        assert!(c.apply(&AlgebraVector::new(1.0, 0.0, 0.0)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(c.bilipschitz_radius(0.25, 50, &mut rng) >= 0.0625);
    }

    #[test]
    fn point_is_flat_at_any_scale() {
        let p = CurveZ::point(&Lattice::standard());
        assert_eq!(sigma2_estimate(&p, 1e-9, 0.25).unwrap(), 0.25);
    }
}
