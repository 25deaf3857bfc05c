mod common;

use cone_schauder::geometry::ConePoint;
use cone_schauder::geometry::ConeSpec;
use cone_schauder::quadrature::{BallRule, QmcConfig};
use cone_schauder::spectrum::{
    d_star, enumerate_roots, eval_derivative, harmonic_modes, modes_of_degree, mu, project_subquadratic,
    subquadratic_basis, DerivativeOp,
};
use proptest::prelude::*;

fn first_ten(spec: &ConeSpec) -> Vec<f64> {
    let mut d = 6.0;
    loop {
        let mut ev = enumerate_roots(spec, d).unwrap().eigenvalues();
        if ev.len() >= 12 {
            ev.truncate(10);
            return ev;
        }
        d += 2.0;
    }
}

fn assert_matches_oracle(spec: &ConeSpec) {
    let want = common::link_eigenvalues(spec, 10, 4000);
    let got = first_ten(spec);
    for (i, (g, w)) in got.iter().zip(&want).enumerate() {
        let rel = (g - w).abs() / w.abs().max(1.0);
        assert!(rel < 1e-2, "{:?} q={} eigenvalue {i}: roots give {g}, oracle {w}", spec.betas, spec.q());
    }
}

#[test]
fn link_spectrum_of_cone_times_line() {
    assert_matches_oracle(&ConeSpec::new(vec![0.6], 1).unwrap());
}

#[test]
fn link_spectrum_of_cone_times_plane() {
    assert_matches_oracle(&ConeSpec::new(vec![0.4], 2).unwrap());
}

#[test]
fn link_spectrum_of_two_cones() {
    assert_matches_oracle(&ConeSpec::new(vec![0.75, 0.55], 0).unwrap());
}

#[test]
fn modes_are_harmonic_in_a_flat_chart() {
    let spec = ConeSpec::new(vec![0.6, 0.8], 1).unwrap();
    let pts = common::regular_points(&spec, 20, 0.2, 3);
    for m in harmonic_modes(&spec, 4.0).unwrap() {
        let u = |x: &ConePoint| m.eval(x);
        for x in &pts {
            let (lap, scale) = common::fd_laplacian(&spec, &u, x, 1e-3);
            assert!(lap.abs() <= 1e-6 * scale.max(1e-3), "{} at {x:?}: {lap} vs {scale}", m.label);
        }
    }
}

#[test]
fn quadratic_derivatives_are_constant() {
    let spec = ConeSpec::new(vec![0.45], 2).unwrap();
    let pts = common::ball_points(&spec, 30, 5);
    for op in DerivativeOp::family(&spec) {
        for p in subquadratic_basis(&spec) {
            let v: Vec<f64> = pts.iter().map(|x| eval_derivative(&spec, &op, &p, x).unwrap()).collect();
            let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1e-10, "{} of {}: spread {spread}", op.name(), p.label);
        }
    }
}

#[test]
fn d_star_mode_is_orthogonal_to_subquadratic_space() {
    let spec = ConeSpec::new(vec![0.7], 1).unwrap();
    let rule = BallRule::new(&spec, &ConePoint::apex(&spec), 1.0, &QmcConfig::default()).unwrap();
    for m in modes_of_degree(&spec, d_star(&spec).unwrap()).unwrap() {
        let p = project_subquadratic(&spec, &|x: &ConePoint| m.eval(x), &rule).unwrap();
        for (c, e) in p.coefficients.iter().zip(&p.coefficient_stderr) {
            assert!(c.abs() <= 10.0 * e, "{}: {c} vs stderr {e}", m.label);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn no_root_between_two_and_two_plus_mu(b1 in 0.1f64..0.95, b2 in 0.1f64..0.95, two in any::<bool>(), q in 0usize..3) {
        let betas = if two { vec![b1, b2] } else { vec![b1] };
        let q = if two { q } else { q.max(1) };
        let spec = ConeSpec::new(betas, q).unwrap();
        let gap = mu(&spec);
        let table = enumerate_roots(&spec, 2.0 + gap + 0.5).unwrap();
        for d in table.degrees() {
            prop_assert!(!(d > 2.0 + 1e-9 && d < 2.0 + gap - 1e-6), "root {d} inside the gap {gap}");
        }
        prop_assert!(d_star(&spec).unwrap() >= 2.0 + gap - 1e-9);
    }
}
