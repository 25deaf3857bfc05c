//! Good and bad scales around points approaching the singular strata.

use cone_schauder::geometry::{bad_scale_bound, classify_scales, ConePoint, ConeSpec, ScaleParams, ScaleStatus};

fn main() -> cone_schauder::Result<()> {
    let spec = ConeSpec::new(vec![0.6, 0.8], 1)?;
    let params = ScaleParams::new(&spec, 0.5, 0.05)?;
    println!("bound on bad scales per point: {:.3}", bad_scale_bound(&spec, &params));
    let points = [
        ConePoint::new(vec![(0.0, 0.0), (0.0, 0.0)], vec![0.1]),
        ConePoint::new(vec![(0.01, 1.0), (0.0, 0.0)], vec![0.0]),
        ConePoint::new(vec![(0.02, 2.0), (0.3, 0.5)], vec![0.2]),
    ];
    for x in &points {
        let c = classify_scales(&spec, x, &params, 0..=12)?;
        let line: String = c
            .entries
            .iter()
            .map(|e| match &e.status {
                ScaleStatus::Bad => '.',
                ScaleStatus::Good { kept, .. } => char::from(b'0' + kept.len() as u8),
            })
            .collect();
        println!("r = ({:.3}, {:.3}): {line}  ({} bad)", x.r(0), x.r(1), c.bad_count());
    }
    println!("digits: number of cone factors kept in the model; '.': bad scale");
    Ok(())
}
