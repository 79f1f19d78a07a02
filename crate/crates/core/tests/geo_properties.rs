use proptest::prelude::*;
use resilmap::geo::{idw, loocv, spline_tps, CvMethod, OrdinaryKriging};
use resilmap::{GeoSample, GeoSampleSet, VariogramFamily, VariogramModel};

fn family() -> impl Strategy<Value = VariogramFamily> {
    prop_oneof![
        Just(VariogramFamily::Spherical),
        Just(VariogramFamily::Exponential),
        Just(VariogramFamily::Gaussian)
    ]
}

fn model() -> impl Strategy<Value = VariogramModel> {
    (family(), 0.0f64..0.5, 0.5f64..3.0, 5.0f64..60.0)
        .prop_map(|(f, nugget_frac, sill, range)| VariogramModel::new(f, nugget_frac * sill, sill, range).unwrap())
}

fn samples(min: usize) -> impl Strategy<Value = GeoSampleSet> {
    prop::collection::vec((0.0f64..100.0, 0.0f64..100.0, -5.0f64..5.0), min..25).prop_map(|pts| {
        GeoSampleSet::new(pts.into_iter().map(|(x, y, v)| GeoSample::new(x, y, v)).collect()).unwrap()
    })
}

fn shifted(s: &GeoSampleSet, dx: f64, dy: f64) -> GeoSampleSet {
    GeoSampleSet::new(
        s.samples()
            .iter()
            .map(|p| GeoSample::new(p.x + dx, p.y + dy, p.value))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kriging_weights_sum_to_one(s in samples(1), m in model(), tx in -20.0f64..120.0, ty in -20.0f64..120.0) {
        let Ok(k) = OrdinaryKriging::new(&s, m) else { return Ok(()) };
        let p = k.predict(tx, ty);
        let w: f64 = p.weights.unwrap().iter().sum();
        prop_assert!((w - 1.0).abs() <= 1e-10, "sum {w}");
        prop_assert!(p.variance >= -1e-10);
    }

    #[test]
    fn kriging_exact_at_samples_without_nugget(s in samples(2), m in model()) {
        let m = VariogramModel::new(m.family, 0.0, m.sill, m.range).unwrap();
        let k = OrdinaryKriging::new(&s, m).unwrap();
        for p in s.samples() {
            let pred = k.predict(p.x, p.y);
            prop_assert!((pred.value - p.value).abs() <= 1e-6);
            prop_assert_eq!(pred.variance, 0.0);
        }
    }

    #[test]
    fn kriging_translation_invariant(s in samples(2), m in model(), dx in -500.0f64..500.0, dy in -500.0f64..500.0) {
        let Ok(a) = OrdinaryKriging::new(&s, m) else { return Ok(()) };
        let b = OrdinaryKriging::new(&shifted(&s, dx, dy), m).unwrap();
        for (tx, ty) in [(13.0, 77.0), (50.5, 50.5), (99.0, 1.0)] {
            let (pa, pb) = (a.predict(tx, ty), b.predict(tx + dx, ty + dy));
            prop_assert!((pa.value - pb.value).abs() <= 1e-9, "{} vs {}", pa.value, pb.value);
        }
    }

    #[test]
    fn idw_is_convex(s in samples(1), power in 0.5f64..4.0, tx in -20.0f64..120.0, ty in -20.0f64..120.0) {
        let v = idw(&s, power, (tx, ty)).unwrap();
        let vals = s.values();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn tps_reproduces_affine(s in samples(3), a in -3.0f64..3.0, b in -3.0f64..3.0, c in -10.0f64..10.0) {
        let plane = s.with_values(&s.samples().iter().map(|p| a * p.x + b * p.y + c).collect::<Vec<_>>());
        let Ok(v) = spline_tps(&plane, 0.0, (42.0, 17.0)) else { return Ok(()) };
        prop_assert!((v - (a * 42.0 + b * 17.0 + c)).abs() <= 1e-8, "{v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn loocv_rmse_dominates_mae(s in samples(6)) {
        let methods = [
            CvMethod::Kriging { family: VariogramFamily::Exponential, n_bins: 5, max_dist: None, fixed: None },
            CvMethod::Idw { power: 2.0 },
            CvMethod::Spline { smoothing: 0.1 },
        ];
        for m in &methods {
            if let Ok(r) = loocv(&s, m) {
                prop_assert!(r.mae >= 0.0);
                prop_assert!(r.rmse >= r.mae - 1e-12);
            }
        }
    }
}
