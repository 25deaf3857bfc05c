//! Campanato constants, and a case where the Hölder exponent cannot exceed `μ`.
//!
//! For `β = 3/4` the harmonic function `u = r^{4/3} s cos θ` has
//! `∂²u/∂r∂s = (4/3) r^{1/3} cos θ`, which is exactly `1/3 = μ` Hölder at the axis.

use cone_schauder::analysis::{campanato_estimate, dyadic_radii};
use cone_schauder::expr::{Angular, Expr, Wave};
use cone_schauder::geometry::{ConePoint, ConeSpec};
use cone_schauder::quadrature::QmcConfig;
use cone_schauder::solver::{default_source, hoelder_report};
use cone_schauder::spectrum::{ConePart, DerivativeOp};

fn main() -> cone_schauder::Result<()> {
    let spec = ConeSpec::new(vec![0.75], 1)?;
    let qmc = QmcConfig::default();

    let f = default_source(&spec);
    let fv = |y: &ConePoint| f.eval(y);
    let centers = [ConePoint::new(vec![(0.0, 0.0)], vec![0.0]), ConePoint::new(vec![(0.2, 1.0)], vec![0.1])];
    let radii = dyadic_radii(8);
    let rep = campanato_estimate(&spec, &fv, &centers, 0.25, &radii, &qmc)?;
    println!("Campanato constant of the default source at alpha = 0.25: {:.4}", rep.k);
    for c in 0..centers.len() {
        let fit = rep.decay_fit(c)?;
        println!("  center {c}: oscillation decays like rho^{:.3}", fit.slope);
    }

    let u = Expr::cone_wave(1, 1, 0, 1.0, 4.0 / 3.0, Angular::new(1.0, Wave::Cos, 0.0)).mul(&Expr::s_pow(1, 1, 0, 1));
    let op = DerivativeOp::MixedConeEuclidean { a: 0, i: 0, part: ConePart::Radial };
    let x = ConePoint::new(vec![(0.0, 0.0)], vec![0.0]);
    let radii = dyadic_radii(10);
    for alpha in [0.3, 0.34] {
        let h = hoelder_report(&spec, &u, &op, &x, (0.0, 0.0), alpha, &radii, &qmc)?;
        let slope = h.slope.map(|s| s.slope).unwrap_or(f64::NAN);
        println!("\n{} at the axis, alpha = {alpha}: K = {:.4}, regressed exponent {slope:.4}", h.op, h.k);
        for s in &h.scales {
            println!("  rho = {:<10.6} |Du - tau| / rho^alpha = {:.5}", s.radius, s.ratio);
        }
    }
    Ok(())
}
