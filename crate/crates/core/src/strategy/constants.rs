use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{sigma2_estimate, transversality_constant, Chart, Horospherical, Submanifold, RANK_TOL};

/// Every constant of the avoidance strategy, derived once before play.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvoidanceConstants {
    pub tau: f64,
    pub beta: f64,
    pub m: u32,
    pub n: u32,
    /// Transversality constant of `Z` with respect to `H⁺`.
    pub c: f64,
    /// Radius on which the chart is 2-bi-Lipschitz.
    pub sigma1: f64,
    /// Scale at which `Z` is `b`-flat.
    pub sigma2_b: f64,
    pub sigma: f64,
    pub delta: f64,
    pub b: f64,
    pub epsilon: f64,
    /// Radius of the first ball.
    pub r0: f64,
    /// Radius of the first ball with radius at most `delta`. Equal to `delta`
    /// until play has reached it.
    pub r1: f64,
}

/// `n = ⌊log₂ m⌋ + 1`.
pub fn n_of_m(m: u32) -> u32 {
    32 - m.leading_zeros()
}

/// Smallest `m` with `β^{−n} < e^{2mτ}`, by direct scan.
pub fn smallest_m(beta: f64, tau: f64) -> Result<u32> {
    let l = (1.0 / beta).ln();
    (1..=1_000_000u32)
        .find(|&m| n_of_m(m) as f64 * l < 2.0 * m as f64 * tau)
        .ok_or_else(|| Error::ResourceLimit("no m below 10^6".into()))
}

fn check_beta_tau(beta: f64, tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", "must be positive"));
    }
    if !(beta > 0.0 && beta < (-2.0 * tau).exp()) {
        return Err(invalid("beta", format!("must lie in (0, e^(-2 tau)) = (0, {})", (-2.0 * tau).exp())));
    }
    Ok(())
}

impl AvoidanceConstants {
    /// Fill in the constants from `c`, `σ₁` and `σ₂(b)` supplied directly.
    /// `sigma2` receives `b` and returns the flatness scale.
    pub fn from_parts(
        beta: f64,
        tau: f64,
        r0: f64,
        c: f64,
        sigma1: f64,
        sigma2: impl FnOnce(f64) -> Result<f64>,
    ) -> Result<Self> {
        check_beta_tau(beta, tau)?;
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(invalid("r0", "must be positive"));
        }
        if !(c > RANK_TOL) {
            return Err(Error::NotTransversal(format!("transversality constant {c}")));
        }
        let m = smallest_m(beta, tau)?;
        let n = n_of_m(m);
        let grow = (2.0 * m as f64 * tau).exp();
        let b = c * beta.powi(n as i32 + 2) / grow / 16.0;
        let sigma2_b = sigma2(b)?;
        let sigma = (0.25 * sigma2_b).min(grow * r0);
        let delta = sigma / grow;
        Ok(Self {
            tau,
            beta,
            m,
            n,
            c,
            sigma1,
            sigma2_b,
            sigma,
            delta,
            b,
            epsilon: b * sigma,
            r0,
            r1: delta,
        })
    }

    pub fn with_r1(&self, r1: f64) -> Self {
        Self { r1, ..self.clone() }
    }

    fn log_step(&self) -> f64 {
        self.n as f64 * (1.0 / self.beta).ln()
    }

    /// Each invariant by name, with whether it holds.
    pub fn invariants(&self) -> Vec<(&'static str, bool)> {
        let grow = (2.0 * self.m as f64 * self.tau).exp();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        let positive = [self.c, self.sigma1, self.sigma2_b, self.sigma, self.delta, self.b, self.epsilon, self.r0, self.r1]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0);
        vec![
            ("positive", positive),
            ("beta below e^(-2 tau)", self.beta < (-2.0 * self.tau).exp()),
            ("n = floor(log2 m) + 1", self.n == n_of_m(self.m)),
            ("beta^(-n) < e^(2 m tau)", self.n as f64 * (1.0 / self.beta).ln() < 2.0 * self.m as f64 * self.tau),
            ("m minimal", self.m == 1 || {
                let m = self.m - 1;
                n_of_m(m) as f64 * (1.0 / self.beta).ln() >= 2.0 * m as f64 * self.tau
            }),
            ("b formula", rel(self.b, self.c * self.beta.powi(self.n as i32 + 2) / grow / 16.0)),
            ("sigma formula", rel(self.sigma, (0.25 * self.sigma2_b).min(grow * self.r0))),
            ("delta formula", rel(self.delta, self.sigma / grow)),
            ("epsilon = b sigma", rel(self.epsilon, self.b * self.sigma)),
            (
                "epsilon = c beta^(n+2) delta / 16",
                rel(self.epsilon, self.c * self.beta.powi(self.n as i32 + 2) * self.delta / 16.0),
            ),
            ("delta <= r0", self.delta <= self.r0 * (1.0 + 1e-12)),
            ("r1 <= delta", self.r1 <= self.delta * (1.0 + 1e-12)),
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.invariants().iter().all(|(_, ok)| *ok)
    }

    /// The window containing `k`: `β^{−n(j−1)} ≤ e^{2kτ} < β^{−jn}`.
    pub fn window_of(&self, k: u32) -> u32 {
        let x = 2.0 * k as f64 * self.tau / self.log_step();
        let mut j = x.floor() as u32 + 1;
        // settle rounding at the window edges
        while j > 1 && 2.0 * k as f64 * self.tau < (j - 1) as f64 * self.log_step() {
            j -= 1;
        }
        while 2.0 * k as f64 * self.tau >= j as f64 * self.log_step() {
            j += 1;
        }
        j
    }

    /// All `k` in window `j`, in increasing order.
    pub fn window(&self, j: u32) -> Vec<u32> {
        if j == 0 {
            return vec![];
        }
        let lo = ((j - 1) as f64 * self.log_step() / (2.0 * self.tau)).floor().max(0.0) as u32;
        (lo.saturating_sub(1)..)
            .take_while(|&k| self.window_of(k) <= j)
            .filter(|&k| self.window_of(k) == j)
            .collect()
    }

    /// The stage of a ball of radius `r`: `β^{nj}·r₁ < r ≤ β^{n(j−1)}·r₁`.
    /// Radii above `r₁` belong to the dummy phase, stage 0.
    pub fn stage_of(&self, r: f64) -> u32 {
        if r > self.r1 {
            return 0;
        }
        let x = (self.r1 / r).ln() / self.log_step();
        let mut j = x.floor() as u32 + 1;
        let low = |j: u32| self.beta.powi((self.n * j) as i32) * self.r1;
        while j > 1 && r <= low(j - 1) {
            j -= 1;
        }
        while r <= low(j) {
            j += 1;
        }
        j
    }

    /// Links of the diameter chain for `k` in window `j`, left to right:
    /// `2e^{2kτ}β^{n(j−1)}r₁, 2β^{−n}r₁, 2e^{2mτ}r₁, 2σ, σ₂/2`.
    pub fn diameter_chain(&self, j: u32, k: u32) -> [f64; 5] {
        let bn = self.beta.powi(self.n as i32);
        // the first factors over- and underflow separately for late windows
        let first = (2.0 * k as f64 * self.tau + (j as f64 - 1.0) * self.n as f64 * self.beta.ln()).exp();
        [
            2.0 * first * self.r1,
            2.0 * self.r1 / bn,
            2.0 * (2.0 * self.m as f64 * self.tau).exp() * self.r1,
            2.0 * self.sigma,
            0.5 * self.sigma2_b,
        ]
    }

    /// Whether the chain is nondecreasing, up to rounding.
    pub fn diameter_chain_holds(&self, j: u32, k: u32) -> bool {
        self.diameter_chain(j, k).windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12))
    }
}

/// Derive the constants for avoiding `z` in `chart`.
///
/// `σ₁` comes from a seeded bi-Lipschitz search, `σ₂(b)` from the flatness
/// search started at `σ₁`.
pub fn derive_constants<S: Submanifold + ?Sized>(
    z: &S,
    chart: &Chart,
    beta: f64,
    tau: f64,
    r0: f64,
) -> Result<AvoidanceConstants> {
    check_beta_tau(beta, tau)?;
    let c = transversality_constant(z, Horospherical::Upper);
    if !(c > RANK_TOL) {
        return Err(Error::NotTransversal(format!("transversality constant {c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5161);
    let sigma1 = chart.bilipschitz_radius(chart.radius(), 64, &mut rng);
    AvoidanceConstants::from_parts(beta, tau, r0, c, sigma1, |b| sigma2_estimate(z, b, sigma1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurveZ;
    use crate::lattice::Lattice;

    fn point_consts(beta: f64, tau: f64) -> AvoidanceConstants {
        let chart = Chart::new(&Lattice::standard(), 0.25).unwrap();
        derive_constants(&CurveZ::point(&Lattice::standard()), &chart, beta, tau, 1e-3).unwrap()
    }

    #[test]
    fn n_is_bit_length() {
        assert_eq!(n_of_m(1), 1);
        assert_eq!(n_of_m(2), 2);
        assert_eq!(n_of_m(3), 2);
        assert_eq!(n_of_m(4), 3);
        assert_eq!(n_of_m(1023), 10);
    }

    #[test]
    fn rejects_beta_above_flow_bound() {
        let chart = Chart::new(&Lattice::standard(), 0.25).unwrap();
        let z = CurveZ::point(&Lattice::standard());
        assert!(matches!(derive_constants(&z, &chart, 0.1, 1.2, 1e-3), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn m_for_beta_005_tau_1() {
        let k = point_consts(0.05, 1.0);
        // m = 1: 20 < e^2 fails; m = 2: 400 < e^4 fails; m = 3: 400 < e^6 holds
        assert_eq!((k.m, k.n), (3, 2));
        assert!(k.is_valid(), "{:?}", k.invariants());
    }

    #[test]
    fn first_window_and_stage() {
        let k = point_consts(0.07, 1.0);
        assert_eq!(k.window(1), vec![0, 1, 2]);
        assert_eq!(k.window(2), vec![3, 4, 5]);
        assert_eq!(k.window(3), vec![6, 7]);
        assert_eq!(k.stage_of(k.r1), 1);
        assert_eq!(k.stage_of(k.r1 * 2.0), 0);
        let bn = 0.07f64.powi(2);
        assert_eq!(k.stage_of(k.r1 * bn * 1.0000001), 1);
        assert_eq!(k.stage_of(k.r1 * bn), 2);
    }

    #[test]
    fn point_is_not_flat_limited() {
        let k = point_consts(0.07, 1.0);
        assert_eq!(k.sigma2_b, k.sigma1);
    }
}
