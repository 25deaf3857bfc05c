//! Spectral Dirichlet solver on the unit apex ball, checked against the polar
//! finite-difference solver as the grid is refined.

use cone_schauder::geometry::{ConePoint, ConeSpec};
use cone_schauder::solver::{default_source, solve_dirichlet_apex, solve_fd_polar, PolarGrid};

fn main() -> cone_schauder::Result<()> {
    let spec = ConeSpec::new(vec![0.75], 1)?;
    let f = default_source(&spec);
    let sol = solve_dirichlet_apex(&spec, &f, None, 1.0, 12.0)?;
    println!("{} source terms, residual {:.1e}, tail {:.1e}", sol.source_terms.len(), sol.residual, sol.tail);

    let probes = [
        ConePoint::new(vec![(0.3, 0.4)], vec![0.1]),
        ConePoint::new(vec![(0.05, 2.0)], vec![-0.3]),
        ConePoint::new(vec![(0.5, 5.0)], vec![0.5]),
    ];
    let fv = |y: &ConePoint| f.eval(y);
    let gv = |y: &ConePoint| sol.eval(y);
    let mut grid = PolarGrid { radius: 1.0, s_range: (-1.0, 1.0), nr: 12, ntheta: 16, ns: 11 };
    for _ in 0..3 {
        let fd = solve_fd_polar(&spec, &fv, &gv, &grid)?;
        let err = probes.iter().map(|p| (fd.interpolate(p).unwrap() - sol.eval(p)).abs()).fold(0.0, f64::max);
        println!("nr = {:>3}: max probe difference {err:.2e}", grid.nr);
        grid = grid.refined();
    }
    Ok(())
}
