//! Two-pinhole NOON-state model in closed form.
//!
//! Pinholes sit at `±d`; with a real PSF the `G^(n)` image carries a
//! constructive cross term, `G^(n−1)` has none, and conditioning on the last
//! photon's transverse momentum `k` introduces the relative phase `e^{±ikd}`.

use crate::error::{Error, Result};
use crate::optics::OpticalSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoonScenario {
    n: u32,
    half_separation: f64,
    system: OpticalSystem,
}

impl NoonScenario {
    pub fn new(n: u32, half_separation: f64, system: OpticalSystem) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "photon number must be >= 2, got {n}"
            )));
        }
        if !(half_separation.is_finite() && half_separation > 0.0) {
            return Err(Error::domain(format!(
                "pinhole half-separation must be positive, got {half_separation}"
            )));
        }
        Ok(Self {
            n,
            half_separation,
            system,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn half_separation(&self) -> f64 {
        self.half_separation
    }

    pub fn system(&self) -> &OpticalSystem {
        &self.system
    }

    /// `(h(d, r), h(−d, r))`.
    fn psf_pair(&self, r: f64) -> (f64, f64) {
        let d = self.half_separation;
        (
            self.system.psf_unchecked(d + r),
            self.system.psf_unchecked(-d + r),
        )
    }
}

/// `h^{2n}(d,r) + h^{2n}(−d,r) + 2hⁿ(d,r)hⁿ(−d,r)`.
pub fn noon_gn(sc: &NoonScenario, r: f64) -> f64 {
    let (hp, hm) = sc.psf_pair(r);
    let n = sc.n as i32;
    hp.powi(2 * n) + hm.powi(2 * n) + 2.0 * hp.powi(n) * hm.powi(n)
}

/// `h^{2(n−1)}(d,r) + h^{2(n−1)}(−d,r)`.
pub fn noon_gn_minus_1(sc: &NoonScenario, r: f64) -> f64 {
    let (hp, hm) = sc.psf_pair(r);
    let m = 2 * (sc.n as i32 - 1);
    hp.powi(m) + hm.powi(m)
}

/// `|e^{ikd} h^{n−1}(d,r) + e^{−ikd} h^{n−1}(−d,r)|²`, `k` being the momentum
/// component along the pinhole axis.
pub fn noon_conditioned(sc: &NoonScenario, r: f64, k: f64) -> f64 {
    let (hp, hm) = sc.psf_pair(r);
    let m = sc.n as i32 - 1;
    let (a, b) = (hp.powi(m), hm.powi(m));
    a * a + b * b + 2.0 * (2.0 * k * sc.half_separation).cos() * a * b
}

/// How [`visibility`] finds the two peaks of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakLocator {
    /// Highest sample on either side of the middle sample (which belongs to neither).
    SplitAtCentre,
    /// Peaks at the given sample indices.
    At(usize, usize),
}

/// Gap visibility `(S_peak − S_mid)/(S_peak + S_mid)` of a two-peaked profile,
/// with `S_peak` the mean of the two peaks and `S_mid` the minimum between them.
pub fn visibility(profile: &[f64], locator: PeakLocator) -> Result<f64> {
    let n = profile.len();
    if n < 3 {
        return Err(Error::Shape("profile too short for a visibility".into()));
    }
    let argmax = |range: std::ops::Range<usize>| {
        range.clone().fold(range.start, |best, i| {
            if profile[i] > profile[best] {
                i
            } else {
                best
            }
        })
    };
    let (left, right) = match locator {
        PeakLocator::SplitAtCentre => {
            let c = n / 2;
            let right_start = if n % 2 == 1 { c + 1 } else { c };
            (argmax(0..c), argmax(right_start..n))
        }
        PeakLocator::At(l, r) => (l, r),
    };
    if left >= right || right >= n {
        return Err(Error::Shape(format!(
            "invalid peak positions {left}, {right}"
        )));
    }
    let (lp, rp) = (profile[left], profile[right]);
    let inner = &profile[left..=right];
    let top = inner.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mid = inner.iter().cloned().fold(f64::INFINITY, f64::min);
    if top > lp.max(rp) {
        return Err(Error::Shape("profile peaks between the given peaks".into()));
    }
    if mid == lp && mid == rp {
        return Ok(0.0);
    }
    if mid >= lp.min(rp) {
        return Err(Error::Shape("no dip between the two peaks".into()));
    }
    let peak = 0.5 * (lp + rp);
    Ok((peak - mid) / (peak + mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn scenario(n: u32, d_over_dr: f64) -> NoonScenario {
        let sys = OpticalSystem::new(1.0).unwrap();
        NoonScenario::new(n, d_over_dr * sys.rayleigh_length(), sys).unwrap()
    }

    fn profile<F: Fn(f64) -> f64>(sc: &NoonScenario, f: F) -> Vec<f64> {
        let dr = sc.system().rayleigh_length();
        (0..=400)
            .map(|i| f((-2.0 + 0.01 * i as f64) * dr))
            .collect()
    }

    #[test]
    fn constructive_doubling_at_centre() {
        let sc = scenario(3, 0.4);
        let h = sc.system().psf(sc.half_separation()).unwrap();
        let want = 4.0 * h.powi(6);
        assert!((noon_gn(&sc, 0.0) - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn gn_is_a_perfect_square() {
        let sc = scenario(4, 0.3);
        for i in 0..100 {
            let r = -3.0 + 0.061 * i as f64;
            let (hp, hm) = sc.psf_pair(r);
            let square = (hp.powi(4) + hm.powi(4)).powi(2);
            assert!((noon_gn(&sc, r) - square).abs() <= 1e-12 * square.max(1e-300));
            let cross = noon_gn(&sc, r) - (hp.powi(8) + hm.powi(8));
            assert!((cross - 2.0 * hp.powi(4) * hm.powi(4)).abs() <= 1e-12 * square.max(1e-300));
        }
    }

    #[test]
    fn gn_minus_1_has_no_cross_term() {
        let sc = scenario(3, 0.4);
        for i in 0..50 {
            let r = -2.0 + 0.08 * i as f64;
            let (hp, hm) = sc.psf_pair(r);
            assert_eq!(noon_gn_minus_1(&sc, r) - (hp.powi(4) + hm.powi(4)), 0.0);
        }
    }

    #[test]
    fn well_separated_humps() {
        let sc = scenario(2, 6.0);
        let peak = noon_gn_minus_1(&sc, sc.half_separation());
        assert!(noon_gn_minus_1(&sc, 0.0) < 1e-3 * peak);
    }

    #[test]
    fn destructive_null_and_constructive_limit() {
        let sc = scenario(3, 0.4);
        let k = FRAC_PI_2 / sc.half_separation();
        assert!(noon_conditioned(&sc, 0.0, k).abs() < 1e-12 * noon_gn_minus_1(&sc, 0.0));
        for r in [-0.7, 0.0, 0.9] {
            let (hp, hm) = sc.psf_pair(r);
            let want = (hp.powi(2) + hm.powi(2)).powi(2);
            assert!((noon_conditioned(&sc, r, 0.0) - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn phase_average_removes_cross_term() {
        let sc = scenario(4, 0.35);
        for r in [-1.0, 0.0, 0.4, 2.2] {
            let mean: f64 = (0..360)
                .map(|j| {
                    let phase = 2.0 * PI * j as f64 / 360.0;
                    noon_conditioned(&sc, r, phase / sc.half_separation())
                })
                .sum::<f64>()
                / 360.0;
            let want = noon_gn_minus_1(&sc, r);
            assert!((mean - want).abs() <= 1e-10 * want, "{mean} vs {want}");
        }
    }

    #[test]
    fn profiles_are_even() {
        let sc = scenario(3, 0.4);
        let k = 1.3;
        for i in 0..40 {
            let r = 0.05 * i as f64;
            assert!((noon_gn(&sc, r) - noon_gn(&sc, -r)).abs() <= 1e-12 * noon_gn(&sc, r));
            assert_eq!(noon_gn_minus_1(&sc, r), noon_gn_minus_1(&sc, -r));
            let (a, b) = (noon_conditioned(&sc, r, k), noon_conditioned(&sc, -r, k));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn visibilities_order() {
        let sc = scenario(3, 0.4);
        let k = FRAC_PI_2 / sc.half_separation();
        let vis = |p: Vec<f64>| visibility(&p, PeakLocator::SplitAtCentre).unwrap();
        let destructive = vis(profile(&sc, |r| noon_conditioned(&sc, r, k)));
        let incoherent = vis(profile(&sc, |r| noon_gn_minus_1(&sc, r)));
        let constructive = vis(profile(&sc, |r| noon_gn(&sc, r)));
        assert!((destructive - 1.0).abs() < 1e-10);
        assert!(constructive < incoherent && incoherent < destructive);
    }

    #[test]
    fn central_values_order() {
        for d in [0.1, 0.3, 0.6, 0.9] {
            let sc = scenario(3, d);
            let k = FRAC_PI_2 / sc.half_separation();
            let (hp, _) = sc.psf_pair(0.0);
            // Compare at matching PSF power 2(n − 1): constructive, mixture, destructive.
            let constructive = noon_conditioned(&sc, 0.0, 0.0);
            let incoherent = noon_gn_minus_1(&sc, 0.0);
            let destructive = noon_conditioned(&sc, 0.0, k);
            assert!(
                constructive > incoherent && incoherent > destructive,
                "d = {d}, h = {hp}"
            );
        }
    }

    #[test]
    fn visibility_edge_cases() {
        let centre = PeakLocator::SplitAtCentre;
        let dip = [0.0, 1.0, 0.5, 1.0, 0.0];
        assert!((visibility(&dip, centre).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(visibility(&[0.0, 1.0, 1.0, 1.0, 0.0], centre).unwrap(), 0.0);
        assert!(visibility(&[0.0, 0.5, 1.0, 0.5, 0.0], centre).is_err());
        assert!(visibility(&[0.0, 1.0, 2.0, 3.0, 4.0], centre).is_err());
        assert!((visibility(&dip, PeakLocator::At(1, 3)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(visibility(&dip, PeakLocator::At(3, 1)).is_err());
        assert!(visibility(&[1.0, 0.0], centre).is_err());
    }

    #[test]
    fn rejects_bad_scenarios() {
        let sys = OpticalSystem::new(1.0).unwrap();
        assert!(NoonScenario::new(1, 1.0, sys).is_err());
        assert!(NoonScenario::new(2, 0.0, sys).is_err());
    }
}
