//! Double-double helpers on top of `twofloat`.
//!
//! `TwoFloat::exp` is only accurate to about 1e-18, which is not enough for
//! flowing lattices by e^{20}, so the exponential is done here.

pub use twofloat::TwoFloat as Dd;

const LN2: (f64, f64) = (std::f64::consts::LN_2, 2.3190468138462996e-17);

pub fn dd(x: f64) -> Dd {
    Dd::from(x)
}

pub fn ln2() -> Dd {
    Dd::new_add(LN2.0, LN2.1)
}

/// exp to roughly 1e-31 relative accuracy for |x| < 700.
pub fn exp(x: Dd) -> Dd {
    if x.hi() == 0.0 && x.lo() == 0.0 {
        return dd(1.0);
    }
    let m = (x.hi() / LN2.0).round();
    let r = x - ln2() * m;
    // r/16 keeps the series short; square back up afterwards
    let s = r / 16.0;
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for k in 1..=16 {
        term = term * s / (k as f64);
        sum += term;
    }
    for _ in 0..4 {
        sum = sum * sum;
    }
    let scale = 2f64.powi(m as i32);
    Dd::new_add(sum.hi() * scale, sum.lo() * scale)
}

pub fn to_f64(x: Dd) -> f64 {
    x.hi() + x.lo()
}

pub fn round(x: Dd) -> Dd {
    x.round()
}

/// Sum of f64 terms accumulated in double-double.
pub fn sum<I: IntoIterator<Item = f64>>(it: I) -> Dd {
    it.into_iter().fold(dd(0.0), |acc, t| acc + t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_matches_known_digits() {
        // e = 2.718281828459045235360287471352662497757...
        let e = exp(dd(1.0));
        let reference = Dd::new_add(std::f64::consts::E, 1.4456468917292502e-16);
        assert!((e - reference).abs().hi() < 1e-30);
    }

    #[test]
    fn exp_is_multiplicative() {
        for &x in &[0.3, 1.0, 7.5, 20.0, 42.0] {
            let p = exp(dd(x)) * exp(dd(-x)) - 1.0;
            assert!(p.abs().hi() < 1e-30, "x={x} err={:e}", p.hi());
        }
    }

    #[test]
    fn exp_of_zero_and_tiny() {
        assert_eq!(to_f64(exp(dd(0.0))), 1.0);
        let t = exp(dd(1e-20)) - 1.0;
        assert!((t.hi() - 1e-20).abs() < 1e-36);
    }
}
