//! Desk-scale check of the Hölder estimate for `β = 0.75`, `q = 1`, `α = 0.25`.

use cone_schauder::geometry::ConeSpec;
use cone_schauder::solver::{default_source, sample_points, verify_schauder, VerifyConfig};

fn main() -> cone_schauder::Result<()> {
    let spec = ConeSpec::new(vec![0.75], 1)?;
    let f = default_source(&spec);
    let points = sample_points(&spec, 20, 5, 7);
    let t = std::time::Instant::now();
    let v = verify_schauder(&spec, &f, &points, 0.25, &VerifyConfig::default())?;
    println!("{:>28} {:>9} {:>9} {:>9} {:>7}", "x (r, θ, s)", "|τ|+K", "data", "ratio", "slope");
    for p in &v.points {
        let (r, th) = p.x.polar[0];
        let slope = p.trace.decay.map(|d| d.slope).unwrap_or(f64::NAN);
        println!(
            "{:>28} {:>9.4} {:>9.4} {:>9.4} {:>7.3}",
            format!("({r:.4}, {th:.2}, {:.2})", p.x.s[0]),
            p.numerator,
            p.denominator,
            p.ratio,
            slope
        );
    }
    println!("ratio spread {:.3}, finite {}, {:.1} s", v.spread, v.all_finite, t.elapsed().as_secs_f64());
    Ok(())
}
