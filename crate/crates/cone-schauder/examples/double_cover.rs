//! `β = 1/2` cone solved on its Cartesian double cover.
//!
//! Pure conical second derivatives stay bounded under refinement, while
//! `∂²_r (r² cos θ)` has different limits from the two sides of the axis.

use cone_schauder::expr::{Angular, Expr, Wave};
use cone_schauder::geometry::{ConePoint, ConeSpec};
use cone_schauder::solver::{default_source, solve_double_cover, CartesianGrid};

fn main() -> cone_schauder::Result<()> {
    let spec = ConeSpec::new(vec![0.5], 1)?;
    let f = default_source(&spec);
    let fv = |y: &ConePoint| f.eval(y);
    let gv = |_: &ConePoint| 0.0;

    let mut grid = CartesianGrid { half_width: 1.0, s_range: (-1.0, 1.0), n: 15, ns: 15 };
    for _ in 0..3 {
        let sol = solve_double_cover(&spec, &fv, &gv, &grid)?;
        let mut max = [0.0f64; 3];
        // The box corners carry their own singularity; stay in the middle half.
        let (lo, hi) = (grid.n / 4, 3 * grid.n / 4);
        for i in lo..=hi {
            for j in lo..=hi {
                if let Some(v) = sol.pure_conical(i, j, grid.ns / 2) {
                    for (m, x) in max.iter_mut().zip(v) {
                        *m = m.max(x.abs());
                    }
                }
            }
        }
        println!("n = {:>3}: max |pure conical| = {:.4?}", grid.n, max);
        grid = grid.refined();
    }

    let q = Expr::cone_wave(1, 1, 0, 1.0, 2.0, Angular::new(1.0, Wave::Cos, 0.0));
    let d2 = q.d_r(0).d_r(0);
    for t in [0.0, std::f64::consts::PI] {
        let x = ConePoint::new(vec![(1e-3, t)], vec![0.0]);
        println!("d²/dr² (r² cos θ) at θ = {t:.3}: {:.4}", d2.eval(&x));
    }
    Ok(())
}
