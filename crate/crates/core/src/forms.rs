//! The form `q0(x, y) = x·y`, its values on unimodular lattices, and continued
//! fractions of the slopes that govern those values.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dd::Dd;
use crate::error::{invalid, Error, Result};
use crate::lattice::Lattice;

/// Largest `|Q|` considered by [`accumulation_points`].
pub const ACCUMULATION_WINDOW: f64 = 5.0;
const MAX_SPECTRUM_POINTS: u64 = 50_000_000;

pub fn q0(v: [f64; 2]) -> f64 {
    v[0] * v[1]
}

/// `p² − λ²q²`, factored to limit cancellation.
pub fn q_lambda(p: i64, q: i64, lambda: f64) -> f64 {
    let (p, q) = (p as f64, q as f64);
    let lq = lambda * q;
    (p - lq) * (p + lq)
}

/// Basis `(1/√(2λ))·[1 −λ; 1 λ]`, so that `q0` at coordinates `(p, q)` is
/// `(p² − λ²q²)/(2λ)`.
pub fn lattice_of_lambda(lambda: f64) -> Result<Lattice> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", "must be finite and positive"));
    }
    let s = 1.0 / (2.0 * lambda).sqrt();
    Lattice::new([s, s], [-lambda * s, lambda * s])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub value: f64,
    pub p: i64,
    pub q: i64,
}

fn check_box(n: i64) -> Result<()> {
    if n < 1 {
        return Err(invalid("N", "must be at least 1"));
    }
    let count = (2 * n as u64 + 1).pow(2);
    if count > MAX_SPECTRUM_POINTS {
        return Err(Error::ResourceLimit(format!("{count} lattice points")));
    }
    Ok(())
}

/// `q0` over nonzero coordinates in `[−N, N]²`, sorted by value.
pub fn value_spectrum(x: &Lattice, n: i64) -> Result<Vec<SpectrumEntry>> {
    check_box(n)?;
    let mut out = Vec::with_capacity(((2 * n + 1) * (2 * n + 1)) as usize);
    for p in -n..=n {
        for q in -n..=n {
            if p != 0 || q != 0 {
                out.push(SpectrumEntry { value: q0(x.point(p, q)), p, q });
            }
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value).then((a.p, a.q).cmp(&(b.p, b.q))));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub gap: f64,
    pub p: i64,
    pub q: i64,
}

/// Smaller sup norm first, then the one with nonnegative entries.
fn witness_key(p: i64, q: i64) -> (i64, i64, bool, bool) {
    (p.abs().max(q.abs()), p.abs() + q.abs(), p < 0, q < 0)
}

/// `min |q0(v) − a|` over nonzero lattice points with coordinates in `[−N, N]²`.
pub fn gap_at(x: &Lattice, a: f64, n: i64) -> Result<Gap> {
    check_box(n)?;
    if !a.is_finite() {
        return Err(invalid("a", "must be finite"));
    }
    let mut best = Gap { gap: f64::INFINITY, p: 0, q: 0 };
    for p in -n..=n {
        for q in -n..=n {
            if p == 0 && q == 0 {
                continue;
            }
            let g = (q0(x.point(p, q)) - a).abs();
            // values equal up to rounding go to the smaller witness
            let tol = 1e-12 * (1.0 + best.gap.min(g));
            let better = g < best.gap - tol || (g <= best.gap + tol && witness_key(p, q) < witness_key(best.p, best.q));
            if better {
                best = Gap { gap: g, p, q };
            }
        }
    }
    Ok(best)
}

/// Cluster centers of `p² − λ²q²` over `√N ≤ |q| ≤ N`, `|p| ≤ N`, restricted to
/// `|Q| ≤ ACCUMULATION_WINDOW`. Values closer than `cluster_tol` share a cluster.
pub fn accumulation_points(lambda: f64, n: i64, cluster_tol: f64) -> Result<Vec<f64>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", "must be finite and positive"));
    }
    if !(1..=100_000_000).contains(&n) {
        return Err(invalid("N", "must be in 1..=1e8"));
    }
    if !(cluster_tol.is_finite() && cluster_tol > 0.0) {
        return Err(invalid("cluster_tol", "must be positive"));
    }
    let w = ACCUMULATION_WINDOW;
    let q_min = (n as f64).sqrt().ceil() as i64;
    let mut values = Vec::new();
    // (p, q), (−p, −q), (p, −q) share values, so p ≥ 0 and q > 0 suffice
    for q in q_min..=n {
        let lq = lambda * q as f64;
        let lo = (lq * lq - w).max(0.0).sqrt().floor() as i64;
        let hi = ((lq * lq + w).sqrt().ceil() as i64).min(n);
        for p in lo.max(0)..=hi {
            let v = q_lambda(p, q, lambda);
            if v.abs() <= w {
                values.push(v);
            }
        }
    }
    values.sort_by(f64::total_cmp);
    let mut centers = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] - values[j - 1] <= cluster_tol {
            j += 1;
        }
        centers.push(values[i..j].iter().sum::<f64>() / (j - i) as f64);
        i = j;
    }
    Ok(centers)
}

/// Continued fraction `[a0; a1, a2, …]`. `exhausted` means the input precision
/// ran out (or the value was rational) before `depth` quotients were found.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction {
    pub a0: i128,
    pub quotients: Vec<i128>,
    pub exhausted: bool,
}

impl ContinuedFraction {
    /// Convergents `p_k/q_k` for `k = 0..=quotients.len()`.
    pub fn convergents(&self) -> Vec<(BigInt, BigInt)> {
        let mut out = Vec::new();
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::from(self.a0), BigInt::one());
        out.push((p1.clone(), q1.clone()));
        for &a in &self.quotients {
            let a = BigInt::from(a);
            let p2 = &a * &p1 + &p0;
            let q2 = &a * &q1 + &q0;
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            out.push((p1.clone(), q1.clone()));
        }
        out
    }
}

fn ratio_of_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn floor_big(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Expand every value in `[lo, hi]`, keeping quotients on which all agree.
pub fn cf_expand_interval(lo: BigRational, hi: BigRational, depth: usize) -> Result<ContinuedFraction> {
    if lo > hi {
        return Err(invalid("interval", "lo > hi"));
    }
    let mut lo = lo;
    let mut hi = Some(hi);
    let mut terms: Vec<i128> = Vec::new();
    let mut exhausted = false;
    while terms.len() <= depth {
        let Some(h) = hi.clone() else {
            exhausted = true;
            break;
        };
        let (a, b) = (floor_big(&lo), floor_big(&h));
        if a != b {
            // a single integer strictly inside is consistent with a rational
            // ending here; either way nothing further is determined
            if &a + BigInt::one() == b && !terms.is_empty() {
                if let Some(n) = b.to_i128() {
                    terms.push(n);
                }
            }
            exhausted = true;
            break;
        }
        let Some(n) = a.to_i128() else {
            exhausted = true;
            break;
        };
        terms.push(n);
        let a = BigRational::from_integer(a);
        let (flo, fhi) = (&lo - &a, h - &a);
        if fhi.is_zero() {
            exhausted = true;
            break;
        }
        lo = fhi.recip();
        hi = if flo.is_zero() { None } else { Some(flo.recip()) };
    }
    let a0 = terms.first().copied().unwrap_or(0);
    let quotients = terms.into_iter().skip(1).take(depth).collect();
    Ok(ContinuedFraction { a0, quotients, exhausted })
}

/// Quotients of `x` that are determined by a double with one-ulp uncertainty.
pub fn cf_expand(x: f64, depth: usize) -> Result<ContinuedFraction> {
    if !x.is_finite() {
        return Err(invalid("x", "must be finite"));
    }
    let ulp = ulp(x);
    cf_expand_interval(ratio_of_f64(x - ulp), ratio_of_f64(x + ulp), depth)
}

/// Same for a double-double value, uncertainty `1e-31·|x|`.
pub fn cf_expand_dd(x: Dd, depth: usize) -> Result<ContinuedFraction> {
    if !(x.hi().is_finite() && x.lo().is_finite()) {
        return Err(invalid("x", "must be finite"));
    }
    let mid = ratio_of_f64(x.hi()) + ratio_of_f64(x.lo());
    let unc = ratio_of_f64((x.hi().abs() * 1e-31).max(f64::MIN_POSITIVE));
    cf_expand_interval(&mid - &unc, &mid + &unc, depth)
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(a.to_bits() + 1) - a
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CfDiagnostics {
    pub max_quotient: Option<i128>,
    pub period_guess: Option<usize>,
}

/// Largest partial quotient and the smallest eventual period `p` that repeats
/// for at least two full cycles after a preperiod of at most a third of the
/// expansion.
pub fn cf_diagnostics(cf: &ContinuedFraction) -> CfDiagnostics {
    let mut a: &[i128] = &cf.quotients;
    // the last term of an exhausted expansion may be a boundary artefact
    if cf.exhausted && a.len() > 3 {
        a = &a[..a.len() - 1];
    }
    let l = a.len();
    let mut period = None;
    'outer: for p in 1..=l / 3 {
        for s in 0..=l / 3 {
            if l - s < 2 * p {
                break;
            }
            if (s..l - p).all(|i| a[i] == a[i + p]) {
                period = Some(p);
                break 'outer;
            }
        }
    }
    CfDiagnostics { max_quotient: cf.quotients.iter().copied().max(), period_guess: period }
}

/// `|x − p/q|` for a convergent, as f64.
pub fn convergent_error(x: f64, p: &BigInt, q: &BigInt) -> f64 {
    let r = ratio_of_f64(x) - BigRational::new(p.clone(), q.clone());
    r.abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_of_lambda_is_unimodular_and_scaled() {
        let l = lattice_of_lambda(2f64.sqrt()).unwrap();
        let v = l.point(3, 2);
        let expect = (9.0 - 2.0 * 4.0) / (2.0 * 2f64.sqrt());
        assert!((q0(v) - expect).abs() < 1e-14);
        assert!(lattice_of_lambda(-1.0).is_err());
    }

    #[test]
    fn spectrum_is_sorted_and_complete() {
        let l = lattice_of_lambda(1.7).unwrap();
        let s = value_spectrum(&l, 3).unwrap();
        assert_eq!(s.len(), 48);
        assert!(s.windows(2).all(|w| w[0].value <= w[1].value));
        assert!(value_spectrum(&l, 10_000).is_err());
    }

    #[test]
    fn pell_gap() {
        let l = lattice_of_lambda(2f64.sqrt()).unwrap();
        let g = gap_at(&l, 0.0, 50).unwrap();
        assert!((g.gap - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn rational_expansion_terminates() {
        let cf = cf_expand(7.0 / 3.0, 10).unwrap();
        assert_eq!(cf.a0, 2);
        assert_eq!(cf.quotients, vec![3]);
        assert!(cf.exhausted);
    }

    #[test]
    fn sqrt2_is_periodic() {
        let cf = cf_expand(2f64.sqrt(), 18).unwrap();
        assert_eq!(cf.a0, 1);
        assert!(cf.quotients.iter().take(15).all(|&a| a == 2));
        assert_eq!(cf_diagnostics(&cf).period_guess, Some(1));
    }

    #[test]
    fn negative_numbers_floor_down() {
        let cf = cf_expand(-0.5, 5).unwrap();
        assert_eq!(cf.a0, -1);
        assert_eq!(cf.quotients, vec![2]);
    }

    #[test]
    fn interval_splitting_stops() {
        let lo = BigRational::new(1.into(), 2.into());
        let hi = BigRational::new(3.into(), 2.into());
        let cf = cf_expand_interval(lo, hi, 5).unwrap();
        assert!(cf.exhausted);
        assert!(cf.quotients.is_empty());
    }
}
