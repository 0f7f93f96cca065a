use proptest::prelude::*;
use qsuperres_core::special::somb;
use qsuperres_core::{
    crb_trace, fisher_matrix, noon_conditioned, sampling_grid, DetectionRegion, MeasurementPlan,
    NoonScenario, OpticalSystem, SignalKernels, SlitObject, Strategy as Measurement,
};

fn system() -> OpticalSystem {
    OpticalSystem::new(1.0).unwrap()
}

fn kernels(obj: &SlitObject, strategy: Measurement, n: u32, margin: f64) -> SignalKernels {
    let sys = system();
    let region = DetectionRegion::in_units_of(&sys, 1.0, 2.0).unwrap();
    let grid = sampling_grid(obj, margin * sys.rayleigh_length()).unwrap();
    let plan = MeasurementPlan::new(strategy, n, grid, Some(region)).unwrap();
    SignalKernels::build(obj, &sys, &plan).unwrap()
}

fn strategy() -> impl Strategy<Value = Measurement> {
    prop::sample::select(Measurement::ALL.to_vec())
}

fn object() -> impl Strategy<Value = SlitObject> {
    (prop::collection::vec(0.1f64..=1.0, 1..6), 0.08f64..0.8)
        .prop_map(|(amps, w)| SlitObject::centered(w * system().rayleigh_length(), amps).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn signals_are_non_negative(obj in object(), s in strategy(), n in 2u32..=4) {
        let sig = kernels(&obj, s, n, 0.5).signal(obj.amplitudes()).unwrap();
        prop_assert!(sig.values().iter().all(|&v| v >= 0.0));
        prop_assert!(sig.values().iter().any(|&v| v > 0.0));
    }

    #[test]
    fn mirrored_object_gives_mirrored_signal(obj in object(), s in strategy(), n in 2u32..=4) {
        let mut rev = obj.amplitudes().to_vec();
        rev.reverse();
        let mirror = obj.with_amplitudes(rev).unwrap();
        let a = kernels(&obj, s, n, 0.5).signal(obj.amplitudes()).unwrap();
        let b = kernels(&mirror, s, n, 0.5).signal(mirror.amplitudes()).unwrap();
        let max = a.values().iter().cloned().fold(0.0, f64::max);
        for (x, y) in a.values().iter().zip(b.values().iter().rev()) {
            prop_assert!((x - y).abs() <= 1e-10 * max);
        }
    }

    #[test]
    fn incoherent_signal_is_additive_over_pixels(obj in object(), n in 2u32..=4) {
        let k = kernels(&obj, Measurement::GnMinus1, n, 0.5);
        let total = k.signal(obj.amplitudes()).unwrap();
        let mut sum = vec![0.0; total.values().len()];
        for mu in 0..obj.pixel_count() {
            let mut theta = vec![0.0; obj.pixel_count()];
            theta[mu] = obj.amplitudes()[mu];
            for (acc, v) in sum.iter_mut().zip(k.signal(&theta).unwrap().values()) {
                *acc += v;
            }
        }
        let max = total.values().iter().cloned().fold(0.0, f64::max);
        for (a, b) in total.values().iter().zip(&sum) {
            prop_assert!((a - b).abs() <= 1e-12 * max);
        }
    }

    #[test]
    fn fisher_matrix_is_symmetric_psd_and_scale_free(
        obj in object(),
        s in strategy(),
        n in 2u32..=4,
        c in 1e-6f64..1e6,
    ) {
        let k = kernels(&obj, s, n, 0.0);
        let sig = k.signal(obj.amplitudes()).unwrap();
        let jac = k.jacobian(obj.amplitudes()).unwrap();
        let f = fisher_matrix(&sig, &jac).unwrap();
        let m = &f.matrix;
        prop_assert_eq!(m.clone(), m.transpose());
        let eig = m.clone().symmetric_eigen().eigenvalues;
        prop_assert!(eig.min() >= -1e-12 * eig.max());
        let scaled = fisher_matrix(&sig.scaled(c), &jac.scaled(c)).unwrap();
        prop_assert!((&scaled.matrix - m).amax() <= 1e-12 * m.amax());
    }

    #[test]
    fn crb_trace_is_sum_of_inverse_eigenvalues(
        entries in prop::collection::vec(-1.0f64..1.0, 16),
        shift in 0.05f64..2.0,
    ) {
        let b = nalgebra::DMatrix::from_vec(4, 4, entries);
        let spd = &b * b.transpose() + nalgebra::DMatrix::identity(4, 4) * shift;
        let eig = spd.clone().symmetric_eigen().eigenvalues;
        let want: f64 = eig.iter().map(|l| 1.0 / l).sum();
        let got = crb_trace(&spd).unwrap();
        prop_assert!(!got.singular);
        prop_assert!((got.value - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn conditioned_noon_lies_between_interference_extremes(
        n in 2u32..=5,
        d in 0.05f64..2.0,
        r in -3.0f64..3.0,
        k in -5.0f64..5.0,
    ) {
        let sys = system();
        let sc = NoonScenario::new(n, d * sys.rayleigh_length(), sys).unwrap();
        let a = sys.psf(sc.half_separation() + r).unwrap().powi(n as i32 - 1);
        let b = sys.psf(-sc.half_separation() + r).unwrap().powi(n as i32 - 1);
        let v = noon_conditioned(&sc, r, k);
        let tol = 1e-12 * (a * a + b * b);
        let (a, b) = (a.abs(), b.abs());
        prop_assert!(v >= (a - b).powi(2) - tol && v <= (a + b).powi(2) + tol);
    }

    #[test]
    fn somb_is_even_and_bounded(x in -200.0f64..200.0) {
        let v = somb(x).unwrap();
        prop_assert_eq!(v, somb(-x).unwrap());
        prop_assert!(v.abs() <= 1.0);
    }
}
