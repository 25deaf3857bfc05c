//! Monotonicity of scaled norms for harmonic functions orthogonal to `ℋ≤2`,
//! and the off-center decay step.

use cone_schauder::analysis::{check_monotonicity, check_off_center_decay};
use cone_schauder::geometry::{ConePoint, ConeSpec};
use cone_schauder::quadrature::QmcConfig;
use cone_schauder::spectrum::{d_star, harmonic_modes};

fn main() -> cone_schauder::Result<()> {
    let spec = ConeSpec::new(vec![0.6], 1)?;
    let qmc = QmcConfig::default();
    let ds = d_star(&spec)?;
    let modes: Vec<_> = harmonic_modes(&spec, 4.5)?.into_iter().filter(|m| m.degree > 2.0 + 1e-9).collect();
    let radii: Vec<f64> = (1..=8).map(|i| i as f64 / 8.0).collect();

    let single = vec![(1.0, modes[0].clone())];
    let mix: Vec<_> = modes.iter().enumerate().map(|(i, m)| (if i % 2 == 0 { 1.0 } else { -0.7 }, m.clone())).collect();
    for (name, u) in [("single d* mode", &single), ("mixture", &mix)] {
        let rep = check_monotonicity(&spec, u, 2.0, &radii, &qmc)?;
        println!("{name}: exponent {:.4} (d* = {ds:.4}), equality {}, pass {}", rep.exponent, rep.equality, rep.pass);
        for r in &rep.rows {
            println!(
                "  rho {:.3}: ratio {:.6} <= {:.6}  ({:.0} sigma)",
                r.radius, r.ratio.value, r.bound, r.margin_sigma
            );
        }
    }

    let model = ConeSpec::new(vec![0.6], 1)?;
    let u = vec![(1.0, modes[0].clone())];
    for r in [0.0, 0.004, 0.02] {
        let x = ConePoint::new(vec![(r, 0.5)], vec![0.0]);
        let rep = check_off_center_decay(&spec, &model, &x, &u, 0.5, 0.3, &qmc)?;
        println!(
            "off-center |x| = {r}: applicable {}, {:.4e} <= {:.4e} ({:.1} sigma)",
            rep.applicable, rep.lhs.value, rep.rhs.value, rep.margin_sigma
        );
    }
    Ok(())
}
