//! Diameter law of the Brownian continuum random tree: tail function,
//! moments, and the zeta values they need.

use std::f64::consts::PI;

use libm::tgamma;

use crate::error::{Error, Result};

/// Below this point the tail series cancels badly; the tail is clamped to 1
/// there. The true tail differs from 1 by far less than 1e-12 on `[0, 0.2)`.
pub const CLAMP_BELOW: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrtReference {
    /// Hard cap on the number of tail-series terms.
    pub k_max: usize,
    /// Relative size of a term at which the tail series stops.
    pub rel_tol: f64,
    /// Absolute tolerance of the Euler-Maclaurin zeta evaluation.
    pub zeta_tol: f64,
}

impl Default for CrtReference {
    fn default() -> Self {
        CrtReference { k_max: 10_000, rel_tol: 1e-15, zeta_tol: 1e-14 }
    }
}

impl CrtReference {
    /// `P(D > x) = Σ_{k≥1} (k²-1)((2/3)k⁴x⁴ - 4k²x² + 2) exp(-k²x²/2)`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("tail needs x >= 0, got {x}")));
        }
        if x < CLAMP_BELOW {
            return Ok(1.0);
        }
        let x2 = x * x;
        let mut sum = 0.0f64;
        // Terms grow until k ≈ √6/x before decaying, so only stop past the peak.
        let peak = (6f64.sqrt() / x).ceil() as usize + 1;
        for k in 2..=self.k_max {
            let k2 = (k * k) as f64;
            let term = (k2 - 1.0) * ((2.0 / 3.0) * k2 * k2 * x2 * x2 - 4.0 * k2 * x2 + 2.0) * (-k2 * x2 / 2.0).exp();
            sum += term;
            if k > peak && term.abs() <= self.rel_tol * sum.abs().max(1e-300) {
                break;
            }
            if term == 0.0 && k > peak {
                break;
            }
        }
        Ok(sum.clamp(0.0, 1.0))
    }

    /// `ζ(s)` for real `s > 1`: direct sum to `N` plus the Euler-Maclaurin tail.
    pub fn zeta(&self, s: f64) -> Result<f64> {
        if !(s > 1.0) {
            return Err(Error::Domain(format!("zeta needs s > 1, got {s}")));
        }
        let n = 20usize;
        let nf = n as f64;
        let mut sum: f64 = (1..n).map(|k| (k as f64).powf(-s)).sum();
        sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
        // Bernoulli corrections B_{2j}/(2j)! · s(s+1)...(s+2j-2) · N^{-s-2j+1}.
        const B2J: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
        let mut rising = s;
        let mut fact = 2.0;
        for (j, b) in B2J.iter().enumerate() {
            let two_j = 2 * (j + 1);
            let term = b / fact * rising * nf.powf(-s - two_j as f64 + 1.0);
            sum += term;
            if term.abs() < self.zeta_tol * 1e-3 {
                break;
            }
            rising *= (s + two_j as f64 - 1.0) * (s + two_j as f64);
            fact *= ((two_j + 1) * (two_j + 2)) as f64;
        }
        Ok(sum)
    }

    /// `E[D^r]`: closed forms for `r <= 3`, and
    /// `(2^{r/2}/3) r(r-1)(r-3) Γ(r/2) (ζ(r-2) - ζ(r))` from `r = 4` on.
    pub fn moment(&self, r: u32) -> Result<f64> {
        match r {
            0 => Err(Error::Domain("moments start at r = 1".into())),
            1 => Ok(4.0 / 3.0 * (PI / 2.0).sqrt()),
            2 => Ok(2.0 / 3.0 * (1.0 + PI * PI / 3.0)),
            3 => Ok(2.0 * (2.0 * PI).sqrt()),
            _ => {
                let rf = r as f64;
                let front = 2f64.powf(rf / 2.0) / 3.0 * rf * (rf - 1.0) * (rf - 3.0) * tgamma(rf / 2.0);
                Ok(front * (self.zeta(rf - 2.0)? - self.zeta(rf)?))
            }
        }
    }

    /// `E[D^r] = ∫ r x^{r-1} P(D > x) dx` by composite Simpson on the tail,
    /// as an independent check of [`CrtReference::moment`].
    pub fn moment_by_integration(&self, r: u32, steps: usize) -> Result<f64> {
        if r == 0 {
            return Err(Error::Domain("moments start at r = 1".into()));
        }
        let rf = r as f64;
        let (a, b) = (CLAMP_BELOW, 12.0);
        let steps = steps.max(2) & !1;
        let h = (b - a) / steps as f64;
        let f = |x: f64| self.tail(x).map(|t| rf * x.powi(r as i32 - 1) * t);
        let mut sum = f(a)? + f(b)?;
        for i in 1..steps {
            let x = a + i as f64 * h;
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x)?;
        }
        // The clamped piece contributes exactly a^r.
        Ok(a.powi(r as i32) + sum * h / 3.0)
    }
}

pub fn crt_tail(x: f64) -> Result<f64> {
    CrtReference::default().tail(x)
}

pub fn crt_moment(r: u32) -> Result<f64> {
    CrtReference::default().moment(r)
}

pub fn zeta(s: f64) -> Result<f64> {
    CrtReference::default().zeta(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-13);
        assert!((zeta(6.0).unwrap() - PI.powi(6) / 945.0).abs() < 1e-13);
        assert!((zeta(3.0).unwrap() - 1.2020569031595942).abs() < 1e-13);
        assert!((zeta(1.5).unwrap() - 2.612375348685488).abs() < 1e-12);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn moment_closed_forms() {
        assert!((crt_moment(1).unwrap() - 1.6710855).abs() < 1e-7);
        assert!((crt_moment(2).unwrap() - 2.8599121).abs() < 1e-7);
        assert!((crt_moment(3).unwrap() - 5.0132565).abs() < 1e-7);
        let m4 = 16.0 * (PI * PI / 6.0 - PI.powi(4) / 90.0);
        assert!((crt_moment(4).unwrap() - m4).abs() < 1e-12);
        assert!(crt_moment(0).is_err());
    }

    #[test]
    fn tail_shape() {
        assert_eq!(crt_tail(0.0).unwrap(), 1.0);
        assert!(crt_tail(-0.1).is_err());
        assert!(crt_tail(10.0).unwrap() < 1e-12);
        let grid: Vec<f64> = (2..=50).map(|i| crt_tail(i as f64 / 10.0).unwrap()).collect();
        // Cancellation leaves about 1e-13 of noise where the tail is near 1.
        assert!(grid.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(grid.iter().all(|&t| (0.0..=1.0).contains(&t)));
        assert!(crt_tail(0.2).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn tail_integrates_to_moments() {
        let c = CrtReference::default();
        for r in 1..=4 {
            let num = c.moment_by_integration(r, 4000).unwrap();
            let exact = c.moment(r).unwrap();
            assert!((num - exact).abs() < 1e-6, "r={r}: {num} vs {exact}");
        }
    }
}
