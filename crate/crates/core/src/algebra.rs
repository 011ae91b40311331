//! SL(2,R), its Lie algebra and the one-parameter subgroups used everywhere else.
//!
//! Algebra elements are written `e·E + f·F + h·H` with `E = [0 1; 0 0]`,
//! `F = [0 0; 1 0]`, `H = [1 0; 0 -1]`. The inner product is `tr(XᵀY)`, so
//! `|H| = √2` and `(E, F, H/√2)` is orthonormal. The orthonormal coordinates
//! `(e, f, √2·h)` are what game code and 3×3 matrices use.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::dd::{self, Dd};
use crate::error::{invalid, Error, Result};

pub const DET_TOL: f64 = 1e-9;
/// log is only taken for `‖g − I‖_op` at most this.
pub const LOG_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl GroupElement {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let g = Self { a, b, c, d };
        if ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(invalid("entries", "non-finite"));
        }
        let det = g.det();
        if (det - 1.0).abs() > DET_TOL * (1.0 + g.frobenius().powi(2)) {
            return Err(invalid("entries", format!("determinant {det} is not 1")));
        }
        Ok(g)
    }

    pub(crate) fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::raw(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn frobenius(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// Operator norm of `g − I`.
    pub fn distance_to_identity(&self) -> f64 {
        op_norm(self.a - 1.0, self.b, self.c, self.d - 1.0)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, o: GroupElement) -> GroupElement {
        GroupElement::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

pub(crate) fn op_norm(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let fro2 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    ((fro2 + disc) / 2.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AlgebraVector {
    pub e: f64,
    pub f: f64,
    pub h: f64,
}

impl AlgebraVector {
    pub const E: AlgebraVector = AlgebraVector { e: 1.0, f: 0.0, h: 0.0 };
    pub const F: AlgebraVector = AlgebraVector { e: 0.0, f: 1.0, h: 0.0 };
    pub const H: AlgebraVector = AlgebraVector { e: 0.0, f: 0.0, h: 1.0 };

    pub const fn new(e: f64, f: f64, h: f64) -> Self {
        Self { e, f, h }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Traceless part of a 2×2 matrix `[[m00, m01], [m10, m11]]`.
    pub fn from_matrix(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(m01, m10, 0.5 * (m00 - m11))
    }

    pub fn from_orthonormal(x: [f64; 3]) -> Self {
        Self::new(x[0], x[1], x[2] / std::f64::consts::SQRT_2)
    }

    pub fn to_orthonormal(&self) -> [f64; 3] {
        [self.e, self.f, self.h * std::f64::consts::SQRT_2]
    }

    pub fn to_vector3(&self) -> Vector3<f64> {
        Vector3::from(self.to_orthonormal())
    }

    pub fn from_vector3(v: &Vector3<f64>) -> Self {
        Self::from_orthonormal([v[0], v[1], v[2]])
    }

    pub fn dot(&self, o: &AlgebraVector) -> f64 {
        self.e * o.e + self.f * o.f + 2.0 * self.h * o.h
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `−det X`, the square of the hyperbolic angle.
    pub fn theta_sq(&self) -> f64 {
        self.h * self.h + self.e * self.f
    }

    pub fn bracket(&self, o: &AlgebraVector) -> AlgebraVector {
        // [X,Y] for X = [h e; f −h]
        AlgebraVector::new(
            2.0 * (self.h * o.e - o.h * self.e),
            2.0 * (o.h * self.f - self.h * o.f),
            self.e * o.f - self.f * o.e,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.f.is_finite() && self.h.is_finite()
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, o: AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.e + o.e, self.f + o.f, self.h + o.h)
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, o: AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.e - o.e, self.f - o.f, self.h - o.h)
    }
}

impl Neg for AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        AlgebraVector::new(-self.e, -self.f, -self.h)
    }
}

impl Mul<AlgebraVector> for f64 {
    type Output = AlgebraVector;
    fn mul(self, v: AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self * v.e, self * v.f, self * v.h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OneParam {
    /// `g_t = diag(e^t, e^{-t})`
    Diagonal,
    /// `[1 s; 0 1]`
    Upper,
    /// `[1 0; s 1]`
    Lower,
    /// Stabilizer of `v_of_a(a)`.
    Stabilizer(f64),
}

pub fn one_param(kind: OneParam, s: f64) -> Result<GroupElement> {
    if !s.is_finite() {
        return Err(invalid("s", "non-finite"));
    }
    Ok(match kind {
        OneParam::Diagonal => GroupElement::raw(s.exp(), 0.0, 0.0, (-s).exp()),
        OneParam::Upper => GroupElement::raw(1.0, s, 0.0, 1.0),
        OneParam::Lower => GroupElement::raw(1.0, 0.0, s, 1.0),
        OneParam::Stabilizer(a) => {
            let x = stabilizer_generator(a)?;
            GroupElement::raw(1.0 + s * x.h, s * x.e, s * x.f, 1.0 - s * x.h)
        }
    })
}

pub fn generator(kind: OneParam) -> Result<AlgebraVector> {
    Ok(match kind {
        OneParam::Diagonal => AlgebraVector::H,
        OneParam::Upper => AlgebraVector::E,
        OneParam::Lower => AlgebraVector::F,
        OneParam::Stabilizer(a) => stabilizer_generator(a)?,
    })
}

/// Nilpotent generator `N` of the stabilizer, `N·v_of_a(a) = 0`.
///
/// `a > 0`: `N = [1 −1; 1 −1]`; `a < 0`: `N = [−1 −1; 1 1]`.
pub fn stabilizer_generator(a: f64) -> Result<AlgebraVector> {
    if !a.is_finite() || a == 0.0 {
        return Err(invalid("a", "must be finite and nonzero"));
    }
    Ok(if a > 0.0 {
        AlgebraVector::new(-1.0, 1.0, 1.0)
    } else {
        AlgebraVector::new(-1.0, 1.0, -1.0)
    })
}

/// `(√a, √a)` for `a > 0`, `(−√|a|, √|a|)` for `a < 0`; `q0(v) = a` in both cases.
pub fn v_of_a(a: f64) -> Result<[f64; 2]> {
    if !a.is_finite() || a == 0.0 {
        return Err(invalid("a", "must be finite and nonzero"));
    }
    let r = a.abs().sqrt();
    Ok(if a > 0.0 { [r, r] } else { [-r, r] })
}

// Power series C(q) = Σ q^k/(2k)!, S(q) = Σ q^k/(2k+1)!, with exp(X) = C I + S X
// for traceless X and q = θ².
fn cosh_sinhc_series(q: f64) -> (f64, f64) {
    let (mut c, mut s) = (1.0, 1.0);
    let (mut tc, mut ts) = (1.0, 1.0);
    for k in 1..=6 {
        let k = k as f64;
        tc *= q / ((2.0 * k - 1.0) * (2.0 * k));
        ts *= q / ((2.0 * k) * (2.0 * k + 1.0));
        c += tc;
        s += ts;
    }
    (c, s)
}

pub fn exp_alg(x: &AlgebraVector) -> GroupElement {
    let q = x.theta_sq();
    let (c, s) = if q.abs() < 1e-8 {
        cosh_sinhc_series(q)
    } else if q > 0.0 {
        let t = q.sqrt();
        (t.cosh(), t.sinh() / t)
    } else {
        let w = (-q).sqrt();
        (w.cos(), w.sin() / w)
    };
    GroupElement::raw(c + s * x.h, s * x.e, s * x.f, c - s * x.h)
}

// θ/sinh θ as a function of sinh²θ (negative values give ω/sin ω).
fn log_ratio(q: f64) -> f64 {
    if q.abs() < 1e-4 {
        1.0 - q / 6.0 + 3.0 * q * q / 40.0 - 5.0 * q * q * q / 112.0 + 35.0 * q.powi(4) / 1152.0
    } else if q > 0.0 {
        let s = q.sqrt();
        s.asinh() / s
    } else {
        let s = (-q).sqrt();
        s.asin() / s
    }
}

/// Principal logarithm near the identity.
pub fn log_alg(g: &GroupElement) -> Result<AlgebraVector> {
    let dist = g.distance_to_identity();
    if !(dist <= LOG_RADIUS) {
        return Err(Error::OutOfDomain(format!(
            "‖g − I‖ = {dist} exceeds {LOG_RADIUS}"
        )));
    }
    Ok(log_unchecked(g))
}

pub(crate) fn log_unchecked(g: &GroupElement) -> AlgebraVector {
    // Y = g − (tr g / 2) I = (sinh θ/θ) X and −det Y = sinh² θ
    let y = AlgebraVector::from_matrix(g.a, g.b, g.c, g.d);
    let q = y.theta_sq();
    log_ratio(q) * y
}

pub fn adjoint(g: &GroupElement, x: &AlgebraVector) -> AlgebraVector {
    // g X g⁻¹ with X = [h e; f −h]
    let gi = g.inverse();
    let m00 = g.a * x.h + g.b * x.f;
    let m01 = g.a * x.e - g.b * x.h;
    let m10 = g.c * x.h + g.d * x.f;
    let m11 = g.c * x.e - g.d * x.h;
    let p00 = m00 * gi.a + m01 * gi.c;
    let p01 = m00 * gi.b + m01 * gi.d;
    let p10 = m10 * gi.a + m11 * gi.c;
    let p11 = m10 * gi.b + m11 * gi.d;
    AlgebraVector::from_matrix(p00, p01, p10, p11)
}

/// `Ad_{g_t}` is diagonal: `E ↦ e^{2t}E`, `F ↦ e^{−2t}F`, `H ↦ H`.
pub fn adjoint_flow(t: f64, x: &AlgebraVector) -> AlgebraVector {
    AlgebraVector::new((2.0 * t).exp() * x.e, (-2.0 * t).exp() * x.f, x.h)
}

/// Matrix of `ad_X` in orthonormal coordinates.
pub fn ad_matrix(x: &AlgebraVector) -> Matrix3<f64> {
    let cols: Vec<Vector3<f64>> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .iter()
        .map(|u| x.bracket(&AlgebraVector::from_orthonormal(*u)).to_vector3())
        .collect();
    Matrix3::from_columns(&cols)
}

/// `Σ ad_c^n / (n+1)!`: `exp(c + u) exp(−c) = exp(J u + O(u²))`.
pub fn dexp_matrix(c: &AlgebraVector) -> Matrix3<f64> {
    let ad = ad_matrix(c);
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for n in 1..=24 {
        term = term * ad / ((n + 1) as f64);
        sum += term;
        if term.abs().max() < 1e-18 {
            break;
        }
    }
    sum
}

/// Double-double 2×2 matrix, row-major.
pub type DdMatrix = [[Dd; 2]; 2];

pub fn dd_mul(x: &DdMatrix, y: &DdMatrix) -> DdMatrix {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// exp of a traceless matrix given in double-double, for `|θ²| ≤ 4`.
pub fn exp_dd(e: Dd, f: Dd, h: Dd) -> DdMatrix {
    let q = h * h + e * f;
    let mut c = dd::dd(1.0);
    let mut s = dd::dd(1.0);
    let mut tc = dd::dd(1.0);
    let mut ts = dd::dd(1.0);
    for k in 1..=40 {
        let k = k as f64;
        tc = tc * q / ((2.0 * k - 1.0) * (2.0 * k));
        ts = ts * q / ((2.0 * k) * (2.0 * k + 1.0));
        c += tc;
        s += ts;
        if tc.abs().hi() < 1e-34 && ts.abs().hi() < 1e-34 {
            break;
        }
    }
    [[c + s * h, s * e], [s * f, c - s * h]]
}
