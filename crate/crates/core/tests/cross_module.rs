use std::f64::consts::PI;

use qsuperres_core::quadrature::GaussLegendre;
use qsuperres_core::{
    noon_conditioned, noon_gn, noon_gn_minus_1, sampling_grid, signal_gn, signal_gn_minus_1,
    signal_hybrid, DetectionRegion, MeasurementPlan, NoonScenario, OpticalSystem, PinholePair,
    SignalKernels, SlitObject, Strategy,
};
use rand::{rngs::StdRng, Rng, SeedableRng};

fn system() -> OpticalSystem {
    OpticalSystem::new(1.0).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `∫_{k_lo}^{k_hi} k dk ∫_0^{2π} dφ f(k cos φ)` by Gauss-Legendre in `k` and
/// the trapezoid rule in `φ`.
fn polar<F: Fn(f64) -> f64>(k_lo: f64, k_hi: f64, f: F) -> f64 {
    let gl = GaussLegendre::new(16).unwrap();
    let (ks, ws) = gl.composite(k_lo, k_hi, 8);
    let m = 128;
    ks.iter()
        .zip(&ws)
        .map(|(&k, &w)| {
            let ring: f64 = (0..m)
                .map(|j| f(k * (2.0 * PI * j as f64 / m as f64).cos()))
                .sum();
            w * k * ring * 2.0 * PI / m as f64
        })
        .sum()
}

/// Two unit pinholes at `±d` represented by slits of width `w`.
fn pinholes(d: f64, gap_pixels: usize) -> (SlitObject, f64) {
    let w = 2.0 * d / (gap_pixels as f64 + 1.0);
    (PinholePair::new(d).unwrap().as_slits(w).unwrap(), w)
}

fn image_grid(sys: &OpticalSystem) -> Vec<f64> {
    let dr = sys.rayleigh_length();
    (0..=60).map(|i| (-1.5 + 0.05 * i as f64) * dr).collect()
}

#[test]
fn narrow_pixels_reproduce_noon_closed_forms() {
    let sys = system();
    let dr = sys.rayleigh_length();
    let grid = image_grid(&sys);
    for n in [2, 3, 4] {
        let d = 0.4 * dr;
        let (obj, w) = pinholes(d, 399);
        let sc = NoonScenario::new(n, d, sys).unwrap();

        let gn = signal_gn(&obj, &sys, n, &grid).unwrap();
        let want: Vec<f64> = grid.iter().map(|&r| w * w * noon_gn(&sc, r)).collect();
        let err: Vec<f64> = gn.values().iter().zip(&want).map(|(a, b)| a - b).collect();
        assert!(max_abs(&err) < 1e-4 * max_abs(&want), "Gn n = {n}");

        let g1 = signal_gn_minus_1(&obj, &sys, n, &grid).unwrap();
        let want: Vec<f64> = grid.iter().map(|&r| w * noon_gn_minus_1(&sc, r)).collect();
        let err: Vec<f64> = g1.values().iter().zip(&want).map(|(a, b)| a - b).collect();
        assert!(max_abs(&err) < 1e-4 * max_abs(&want), "Gn-1 n = {n}");
    }
}

#[test]
fn narrow_pixel_hybrid_is_momentum_integrated_conditioned_noon() {
    let sys = system();
    let dr = sys.rayleigh_length();
    let region = DetectionRegion::in_units_of(&sys, 1.0, 2.0).unwrap();
    let grid: Vec<f64> = image_grid(&sys).into_iter().step_by(4).collect();
    for (n, d) in [(3, 0.4 * dr), (4, 0.25 * dr)] {
        let (obj, w) = pinholes(d, 199);
        let sc = NoonScenario::new(n, d, sys).unwrap();
        let hyb = signal_hybrid(&obj, &sys, n, &region, &grid).unwrap();
        let want: Vec<f64> = grid
            .iter()
            .map(|&r| {
                w * w
                    * polar(region.k_lo(), region.k_hi(), |kx| {
                        noon_conditioned(&sc, r, kx)
                    })
            })
            .collect();
        let err: Vec<f64> = hyb.values().iter().zip(&want).map(|(a, b)| a - b).collect();
        assert!(max_abs(&err) < 1e-4 * max_abs(&want), "n = {n}");
    }
}

#[test]
fn full_disk_hybrid_matches_brute_force_double_integral() {
    let sys = system();
    let dr = sys.rayleigh_length();
    let disk = DetectionRegion::new(0.0, sys.k_max()).unwrap();
    let n = 3;
    let obj = SlitObject::centered(0.3 * dr, vec![0.9, 0.5, 1.0]).unwrap();
    let grid = vec![-0.8 * dr, -0.3 * dr, 0.0, 0.25 * dr, 0.7 * dr];
    let got = signal_hybrid(&obj, &sys, n, &disk, &grid).unwrap();

    // Midpoint samples of A^n on the support; h and g by polar quadrature.
    let (lo, hi) = obj.support();
    let count = 300;
    let step = (hi - lo) / count as f64;
    let s: Vec<f64> = (0..count).map(|i| lo + (i as f64 + 0.5) * step).collect();
    let an: Vec<f64> = s
        .iter()
        .map(|&x| obj.amplitude_at(x).unwrap().powi(n as i32))
        .collect();
    let kernel = |u: f64| polar(0.0, sys.k_max(), |kx| (kx * u).cos());
    let g: Vec<f64> = (0..count).map(|j| kernel(j as f64 * step)).collect();
    let want: Vec<f64> = grid
        .iter()
        .map(|&r| {
            let a: Vec<f64> = s
                .iter()
                .zip(&an)
                .map(|(&x, &t)| t * kernel(x + r).powi(n as i32 - 1))
                .collect();
            let mut total = 0.0;
            for i in 0..count {
                for j in 0..count {
                    total += a[i] * a[j] * g[i.abs_diff(j)];
                }
            }
            total * step * step
        })
        .collect();
    for (a, b) in got.values().iter().zip(&want) {
        assert!((a - b).abs() < 1e-3 * max_abs(&want), "{a} vs {b}");
    }
}

#[test]
fn jacobians_match_central_differences() {
    let sys = system();
    let dr = sys.rayleigh_length();
    let region = DetectionRegion::in_units_of(&sys, 1.0, 2.0).unwrap();
    let mut rng = StdRng::seed_from_u64(2024);
    for trial in 0..20 {
        let count = rng.gen_range(2..=6);
        let amps: Vec<f64> = (0..count).map(|_| rng.gen_range(0.2..0.95)).collect();
        let width = rng.gen_range(0.1..0.6) * dr;
        let n = [2, 3, 4][trial % 3];
        let obj = SlitObject::centered(width, amps.clone()).unwrap();
        let grid = sampling_grid(&obj, 0.5 * dr).unwrap();
        for strategy in Strategy::ALL {
            let plan = MeasurementPlan::new(strategy, n, grid.clone(), Some(region)).unwrap();
            let kernels = SignalKernels::build(&obj, &sys, &plan).unwrap();
            let jac = kernels.jacobian(&amps).unwrap();
            let h = 1e-5;
            let mut diff = 0.0f64;
            for mu in 0..count {
                let mut up = amps.clone();
                let mut down = amps.clone();
                up[mu] += h;
                down[mu] -= h;
                let su = kernels.signal(&up).unwrap();
                let sd = kernels.signal(&down).unwrap();
                for i in 0..grid.len() {
                    let fd = (su.values()[i] - sd.values()[i]) / (2.0 * h);
                    diff = diff.max((fd - jac.entries()[(i, mu)]).abs());
                }
            }
            let scale = jac.entries().amax();
            assert!(
                diff < 1e-4 * scale,
                "trial {trial} {strategy}: {diff} vs {scale}"
            );
        }
    }
}
