//! Indicial roots and the first non-quadratic degree `d*` for a few cone products.

use cone_schauder::geometry::ConeSpec;
use cone_schauder::spectrum::{d_star, d_star_closed_form, enumerate_roots, mu};

fn main() -> cone_schauder::Result<()> {
    let specs = [
        ConeSpec::new(vec![2.0 / 3.0], 1)?,
        ConeSpec::new(vec![0.75], 1)?,
        ConeSpec::new(vec![0.4, 0.9], 0)?,
        ConeSpec::new(vec![0.3], 2)?,
    ];
    for spec in &specs {
        let table = enumerate_roots(spec, 3.5)?;
        println!(
            "betas {:?}, q = {}: mu = {:.4}, d* = {:.4} (closed form {:.4})",
            spec.betas,
            spec.q(),
            mu(spec),
            d_star(spec)?,
            d_star_closed_form(spec)
        );
        for e in &table.entries {
            println!("  d = {:<8.4} x{:<3} {}", e.degree, e.multiplicity, e.recipes.join(" | "));
        }
    }
    Ok(())
}
