mod common;

use cone_schauder::geometry::{
    ball_volume, classify_scales, develop, dilate, distance, unit_ball_volume, ConePoint, ConeSpec, ScaleParams,
};
use cone_schauder::quadrature::QmcConfig;
use rand::Rng;

#[test]
fn distance_is_flat_near_regular_points() {
    let spec = ConeSpec::new(vec![0.35, 0.8], 1).unwrap();
    let mut rng = common::rng(11);
    for x in common::regular_points(&spec, 50, 0.3, 1) {
        let d = [
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
        ];
        // Displace in the unrolled plane of each factor.
        let polar: Vec<(f64, f64)> = (0..2)
            .map(|a| {
                let (r, t) = x.polar[a];
                let (px, py) = (r + d[2 * a], d[2 * a + 1]);
                (px.hypot(py), t + py.atan2(px) / spec.betas[a])
            })
            .collect();
        let y = ConePoint::new(polar, vec![x.s[0] + d[4]]);
        let flat = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((distance(&spec, &x, &y).unwrap() - flat).abs() < 1e-12);
    }
}

#[test]
fn distance_scales_under_dilation_and_through_the_apex() {
    let spec = ConeSpec::new(vec![0.3], 2).unwrap();
    let pts = common::ball_points(&spec, 40, 2);
    for w in pts.windows(2) {
        let d = distance(&spec, &w[0], &w[1]).unwrap();
        let d3 = distance(&spec, &dilate(&w[0], 3.0).unwrap(), &dilate(&w[1], 3.0).unwrap()).unwrap();
        assert!((d3 - 3.0 * d).abs() < 1e-12 * d3.max(1.0));
        assert!(d <= w[0].rho() + w[1].rho() + 1e-12);
    }
    // Antipodal points on the cone sit at unrolled angle πβ.
    let x = ConePoint::new(vec![(0.4, 0.0)], vec![0.0, 0.0]);
    let y = ConePoint::new(vec![(0.5, std::f64::consts::PI)], vec![0.0, 0.0]);
    let want = (0.41f64 - 0.4 * (0.3 * std::f64::consts::PI).cos()).sqrt();
    assert!((distance(&spec, &x, &y).unwrap() - want).abs() < 1e-14);
}

#[test]
fn development_respects_the_radius_threshold() {
    let spec = ConeSpec::new(vec![0.3], 1).unwrap();
    let x = ConePoint::new(vec![(0.5, 1.0)], vec![0.0]);
    let chart = develop(&spec, &x, 0.3, &[0]).unwrap();
    assert!(develop(&spec, &x, 0.45, &[0]).is_err());
    let mut rng = common::rng(4);
    for _ in 0..50 {
        let y = ConePoint::new(vec![(0.5 + rng.random_range(-0.2..0.2), 1.0 + rng.random_range(-0.5..0.5))], vec![0.1]);
        let z =
            ConePoint::new(vec![(0.5 + rng.random_range(-0.2..0.2), 1.0 + rng.random_range(-0.5..0.5))], vec![-0.1]);
        let (ey, ez) = (chart.to_euclidean(&y).unwrap(), chart.to_euclidean(&z).unwrap());
        let flat = ey.iter().zip(&ez).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if distance(&spec, &x, &y).unwrap() < 0.3 && distance(&spec, &x, &z).unwrap() < 0.3 {
            assert!((distance(&spec, &y, &z).unwrap() - flat).abs() < 1e-12);
        }
    }
}

#[test]
fn ball_volumes() {
    let spec = ConeSpec::new(vec![0.6], 1).unwrap();
    let qmc = QmcConfig::default();
    let apex = ball_volume(&spec, &ConePoint::apex(&spec), 2.0, &qmc).unwrap();
    assert!((apex.value - 0.6 * unit_ball_volume(3) * 8.0).abs() < 1e-12);
    // Away from the axis a small ball is Euclidean.
    let x = ConePoint::new(vec![(0.8, 2.0)], vec![0.3]);
    let v = ball_volume(&spec, &x, 0.2, &qmc).unwrap();
    let want = unit_ball_volume(3) * 0.008;
    assert!((v.value - want).abs() < 5.0 * v.stderr.max(1e-6 * want), "{v:?} vs {want}");
    // B(y, 0.5) with |y| = 0.1 is squeezed between apex balls of radii 0.4 and 0.6.
    let y = ConePoint::new(vec![(0.0, 0.0)], vec![0.1]);
    let v = ball_volume(&spec, &y, 0.5, &qmc).unwrap().value;
    let lo = ball_volume(&spec, &ConePoint::apex(&spec), 0.4, &qmc).unwrap().value;
    let hi = ball_volume(&spec, &ConePoint::apex(&spec), 0.6, &qmc).unwrap().value;
    assert!(lo < v && v < hi);
}

#[test]
fn axis_points_have_no_bad_scales_and_regular_points_end_flat() {
    let spec = ConeSpec::new(vec![0.6, 0.8], 1).unwrap();
    let params = ScaleParams::new(&spec, 0.5, 0.05).unwrap();
    let on_axes = ConePoint::new(vec![(0.0, 0.0), (0.0, 0.0)], vec![0.2]);
    assert_eq!(classify_scales(&spec, &on_axes, &params, -5..=30).unwrap().bad_count(), 0);
    let x = ConePoint::new(vec![(0.01, 1.0), (0.3, 2.0)], vec![0.0]);
    let c = classify_scales(&spec, &x, &params, -5..=30).unwrap();
    assert!(c.bad_count() > 0);
    assert!(c.status(30).unwrap().is_good());
    assert!(c.status(-5).unwrap().is_good());
}
