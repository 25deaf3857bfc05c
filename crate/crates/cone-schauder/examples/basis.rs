//! Least-squares projection onto the subquadratic harmonic functions `ℋ≤2`.
//!
//! A quadratic harmonic input is recovered exactly; a degree-`d*` mode is orthogonal
//! to the space, so its coefficients are at the quadrature noise level.

use cone_schauder::geometry::{ConePoint, ConeSpec};
use cone_schauder::quadrature::{BallRule, QmcConfig};
use cone_schauder::spectrum::{d_star, modes_of_degree, project_subquadratic, subquadratic_basis};

fn main() -> cone_schauder::Result<()> {
    let spec = ConeSpec::new(vec![0.75], 1)?;
    let basis = subquadratic_basis(&spec);
    println!("spanning set ({}):", basis.len());
    for m in &basis {
        println!("  {:<22} degree {:.4}", m.label, m.degree);
    }
    let rule = BallRule::new(&spec, &ConePoint::apex(&spec), 1.0, &QmcConfig::default())?;

    let target = |x: &ConePoint| 2.0 - x.s[0] + 0.5 * (x.r(0).powi(2) - 2.0 * x.s[0].powi(2));
    let p = project_subquadratic(&spec, &target, &rule)?;
    println!("\n2 - s + (r² - 2s²)/2: rank {}, residual {:.2e}", p.rank(), p.residual_norm.value);
    for (l, (c, e)) in p.labels.iter().zip(p.coefficients.iter().zip(&p.coefficient_stderr)) {
        println!("  {l:<22} {c:>10.6} ± {e:.1e}");
    }

    let ds = d_star(&spec)?;
    let mode = modes_of_degree(&spec, ds)?.remove(0);
    let p = project_subquadratic(&spec, &|x: &ConePoint| mode.eval(x), &rule)?;
    println!("\nmode {} of degree {ds:.4}:", mode.label);
    for (l, (c, e)) in p.labels.iter().zip(p.coefficients.iter().zip(&p.coefficient_stderr)) {
        println!("  {l:<22} {c:>10.2e}  ({:.1} stderr)", (c / e).abs());
    }
    Ok(())
}
