//! Finite-difference oracles for `Δu = f` with Dirichlet data.
//!
//! [`solve_fd_polar`] works on a cylinder `{r < R} × [s₀, s₁]` around the singular
//! axis of a single cone factor. The angular direction is diagonalized by the FFT,
//! so each Fourier mode `k` sees `−k²/(βr)²` exactly; the `s` direction uses
//! second differences diagonalized by the sine transform, and the remaining
//! radial problems are tridiagonal. Radial nodes sit at cell centers
//! `r_i = (i + ½)h`, so the flux through `r = 0` vanishes by construction.
//!
//! [`solve_double_cover`] handles `β = ½` by pulling the problem back along
//! `(r, φ) ↦ (r, 2φ)` to a Euclidean box, where the Laplacian is the standard
//! seven-point stencil.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::geometry::{canonical_angle, ConePoint, ConeSpec};

type Func<'a> = &'a (dyn Fn(&ConePoint) -> f64 + Sync);

/// Sine transform `X_k = Σ_n x_n sin(π(n+1)(k+1)/(N+1))` through an FFT of length `2(N+1)`.
struct Dst {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Dst {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Dst {
        Dst { n, fft: planner.plan_fft_forward(2 * (n + 1)) }
    }

    fn apply(&self, x: &mut [Complex64]) {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * (n + 1)];
        for i in 0..n {
            buf[i + 1] = x[i];
            buf[2 * (n + 1) - 1 - i] = -x[i];
        }
        self.fft.process(&mut buf);
        for k in 0..n {
            x[k] = buf[k + 1] * Complex64::new(0.0, 0.5);
        }
    }

    /// Eigenvalue of the Dirichlet second difference for sine mode `p`.
    fn eigenvalue(&self, p: usize, h: f64) -> f64 {
        -(2.0 - 2.0 * (PI * (p + 1) as f64 / (self.n + 1) as f64).cos()) / (h * h)
    }
}

/// Apply a line transform along one axis of a row-major array.
fn along_axis(data: &mut [Complex64], shape: &[usize], axis: usize, mut op: impl FnMut(&mut [Complex64])) {
    let len = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * len * stride + inner;
            for (t, v) in line.iter_mut().enumerate() {
                *v = data[base + t * stride];
            }
            op(&mut line);
            for (t, v) in line.iter().enumerate() {
                data[base + t * stride] = *v;
            }
        }
    }
}

/// Grid of the polar oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radius: f64,
    pub s_range: (f64, f64),
    pub nr: usize,
    pub ntheta: usize,
    pub ns: usize,
}

impl PolarGrid {
    pub fn hr(&self) -> f64 {
        self.radius / (self.nr as f64 + 0.5)
    }

    pub fn hs(&self) -> f64 {
        (self.s_range.1 - self.s_range.0) / (self.ns + 1) as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hr()
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.ntheta as f64
    }

    pub fn s(&self, l: usize) -> f64 {
        self.s_range.0 + (l + 1) as f64 * self.hs()
    }

    pub fn node(&self, i: usize, j: usize, l: usize) -> ConePoint {
        ConePoint { polar: vec![(self.r(i), self.theta(j))], s: vec![self.s(l)] }
    }

    fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.ntheta + j) * self.ns + l
    }

    /// The same region with every spacing halved.
    pub fn refined(&self) -> PolarGrid {
        PolarGrid { nr: 2 * self.nr, ntheta: 2 * self.ntheta, ns: 2 * self.ns + 1, ..self.clone() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolarFdSolution {
    pub grid: PolarGrid,
    pub beta: f64,
    /// Values at interior nodes, indexed `(i, j, l)` row-major.
    pub values: Vec<f64>,
    /// Boundary values at `r = R`, indexed `(j, l)`.
    pub outer: Vec<f64>,
    /// Boundary values at `s = s₀` and `s = s₁`, indexed `(i, j)`.
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
    /// Largest residual of the tridiagonal solves relative to the right-hand side.
    pub residual: f64,
}

impl PolarFdSolution {
    pub fn value(&self, i: usize, j: usize, l: usize) -> f64 {
        self.values[self.grid.index(i, j, l)]
    }

    /// Value at a ring, angle and height index, where `i = nr` and `l ∈ {−1, ns}` hit the boundary.
    fn extended(&self, i: usize, j: usize, l: isize) -> f64 {
        let g = &self.grid;
        let j = j % g.ntheta;
        if l < 0 {
            return self.bottom[i.min(g.nr - 1) * g.ntheta + j];
        }
        if l as usize >= g.ns {
            return self.top[i.min(g.nr - 1) * g.ntheta + j];
        }
        if i >= g.nr {
            return self.outer[j * g.ns + l as usize];
        }
        self.value(i, j, l as usize)
    }

    /// Trilinear interpolation in `(r, θ, s)`; below the first ring the ring value is used.
    pub fn interpolate(&self, x: &ConePoint) -> Result<f64> {
        let g = &self.grid;
        let (r, t) = x.polar[0];
        let s = x.s[0];
        if r > g.radius + 1e-12 || s < g.s_range.0 - 1e-12 || s > g.s_range.1 + 1e-12 {
            return Err(Error::Domain(format!("{x:?} is outside the grid")));
        }
        let fr = ((r.max(g.r(0)) / g.hr()) - 0.5).min(g.nr as f64 - 1e-12);
        let i0 = fr.floor() as usize;
        let wr = fr - i0 as f64;
        let ft = canonical_angle(t) / (2.0 * PI) * g.ntheta as f64;
        let j0 = ft.floor() as usize;
        let wt = ft - j0 as f64;
        let fs = ((s - g.s_range.0) / g.hs() - 1.0).clamp(-1.0, g.ns as f64 - 1e-12);
        let l0 = fs.floor() as isize;
        let ws = fs - l0 as f64;
        let mut v = 0.0;
        for (di, a) in [(0, 1.0 - wr), (1, wr)] {
            for (dj, b) in [(0, 1.0 - wt), (1, wt)] {
                for (dl, c) in [(0, 1.0 - ws), (1, ws)] {
                    let w = a * b * c;
                    if w != 0.0 {
                        v += w * self.extended(i0 + di, j0 + dj, l0 + dl);
                    }
                }
            }
        }
        Ok(v)
    }
}

/// Solve `Δu = f` on `{r < R} × [s₀, s₁]` for one cone factor and `q = 1`, with `u = g` on the boundary.
pub fn solve_fd_polar(spec: &ConeSpec, f: Func, g: Func, grid: &PolarGrid) -> Result<PolarFdSolution> {
    if spec.n() != 1 || spec.q() != 1 {
        return Err(Error::Unsupported("the polar oracle handles one cone factor with q = 1".into()));
    }
    if grid.nr < 2 || grid.ns < 1 || grid.ntheta < 4 || !grid.ntheta.is_multiple_of(2) {
        return arg("polar grid needs nr ≥ 2, ns ≥ 1 and an even ntheta ≥ 4");
    }
    if !(grid.radius > 0.0 && grid.s_range.1 > grid.s_range.0) {
        return arg("polar grid region is empty");
    }
    let beta = spec.betas[0];
    let (nr, nt, ns) = (grid.nr, grid.ntheta, grid.ns);
    let (hr, hs) = (grid.hr(), grid.hs());
    let at = |r: f64, t: f64, s: f64| ConePoint { polar: vec![(r, t)], s: vec![s] };
    let outer: Vec<f64> = (0..nt)
        .flat_map(|j| (0..ns).map(move |l| (j, l)))
        .map(|(j, l)| g(&at(grid.radius, grid.theta(j), grid.s(l))))
        .collect();
    let bottom: Vec<f64> = (0..nr)
        .flat_map(|i| (0..nt).map(move |j| (i, j)))
        .map(|(i, j)| g(&at(grid.r(i), grid.theta(j), grid.s_range.0)))
        .collect();
    let top: Vec<f64> = (0..nr)
        .flat_map(|i| (0..nt).map(move |j| (i, j)))
        .map(|(i, j)| g(&at(grid.r(i), grid.theta(j), grid.s_range.1)))
        .collect();

    let mut rhs = vec![Complex64::new(0.0, 0.0); nr * nt * ns];
    for i in 0..nr {
        for j in 0..nt {
            for l in 0..ns {
                let mut v = f(&grid.node(i, j, l));
                if i == nr - 1 {
                    v -= (i + 1) as f64 / (i as f64 + 0.5) / (hr * hr) * outer[j * ns + l];
                }
                if l == 0 {
                    v -= bottom[i * nt + j] / (hs * hs);
                }
                if l == ns - 1 {
                    v -= top[i * nt + j] / (hs * hs);
                }
                if !v.is_finite() {
                    return Err(Error::Numerical(format!("source is not finite at {:?}", grid.node(i, j, l))));
                }
                rhs[grid.index(i, j, l)] = Complex64::new(v, 0.0);
            }
        }
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nt);
    let inv = planner.plan_fft_inverse(nt);
    let dst = Dst::new(&mut planner, ns);
    let shape = [nr, nt, ns];
    along_axis(&mut rhs, &shape, 1, |line| fwd.process(line));
    along_axis(&mut rhs, &shape, 2, |line| dst.apply(line));

    let mut residual: f64 = 0.0;
    let mut col = vec![Complex64::new(0.0, 0.0); nr];
    for k in 0..nt {
        let freq = k.min(nt - k) as f64;
        for p in 0..ns {
            let mu = dst.eigenvalue(p, hs);
            let lower = |i: usize| i as f64 / (i as f64 + 0.5) / (hr * hr);
            let upper = |i: usize| if i + 1 < nr { (i + 1) as f64 / (i as f64 + 0.5) / (hr * hr) } else { 0.0 };
            let diag = |i: usize| {
                let ri = grid.r(i);
                -(i as f64 / (i as f64 + 0.5) + (i + 1) as f64 / (i as f64 + 0.5)) / (hr * hr)
                    - freq * freq / (beta * beta * ri * ri)
                    + mu
            };
            for (i, c) in col.iter_mut().enumerate() {
                *c = rhs[grid.index(i, k, p)];
            }
            let sol = thomas(&col, lower, diag, upper);
            let scale = col.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
            for i in 0..nr {
                let mut r = sol[i] * diag(i) - col[i];
                if i > 0 {
                    r += sol[i - 1] * lower(i);
                }
                if i + 1 < nr {
                    r += sol[i + 1] * upper(i);
                }
                residual = residual.max(r.norm() / scale);
                rhs[grid.index(i, k, p)] = sol[i];
            }
        }
    }
    along_axis(&mut rhs, &shape, 2, |line| dst.apply(line));
    along_axis(&mut rhs, &shape, 1, |line| inv.process(line));
    let norm = 2.0 / ((ns + 1) as f64 * nt as f64);
    let values = rhs.iter().map(|c| c.re * norm).collect();
    if residual > 1e-8 {
        return Err(Error::Numerical(format!("radial solves left relative residual {residual:.3e}")));
    }
    Ok(PolarFdSolution { grid: grid.clone(), beta, values, outer, bottom, top, residual })
}

/// Tridiagonal solve with coefficient closures `lower(i) u_{i−1} + diag(i) u_i + upper(i) u_{i+1}`.
fn thomas(
    rhs: &[Complex64],
    lower: impl Fn(usize) -> f64,
    diag: impl Fn(usize) -> f64,
    upper: impl Fn(usize) -> f64,
) -> Vec<Complex64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag(0);
    c[0] = upper(0) / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag(i) - lower(i) * c[i - 1];
        c[i] = upper(i) / denom;
        d[i] = (rhs[i] - d[i - 1] * lower(i)) / denom;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - x[i + 1] * c[i];
    }
    x
}

/// The pullback of a function on the angle-`π` cone to the plane: `f̃(x, y, s) = f(|(x,y)|, 2 arg(x,y), s)`.
pub fn double_cover_pullback<'a>(f: Func<'a>) -> impl Fn(f64, f64, &[f64]) -> f64 + 'a {
    move |x, y, s| {
        let r = x.hypot(y);
        let t = if r == 0.0 { 0.0 } else { canonical_angle(2.0 * y.atan2(x)) };
        f(&ConePoint { polar: vec![(r, t)], s: s.to_vec() })
    }
}

/// Cartesian box `[−L, L]² × [s₀, s₁]` with `n` interior nodes per planar axis (odd, so the origin is a node).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianGrid {
    pub half_width: f64,
    pub s_range: (f64, f64),
    pub n: usize,
    pub ns: usize,
}

impl CartesianGrid {
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n + 1) as f64
    }

    pub fn hs(&self) -> f64 {
        (self.s_range.1 - self.s_range.0) / (self.ns + 1) as f64
    }

    /// Planar coordinate of node `i`; `i = −1` and `i = n` are on the boundary.
    pub fn coord(&self, i: isize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.h()
    }

    pub fn s(&self, l: isize) -> f64 {
        self.s_range.0 + (l + 1) as f64 * self.hs()
    }

    pub fn center_index(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn refined(&self) -> CartesianGrid {
        CartesianGrid { n: 2 * self.n + 1, ns: 2 * self.ns + 1, ..self.clone() }
    }

    fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.ns + l
    }
}

/// Solution on the double cover of the angle-`π` cone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubleCoverSolution {
    pub grid: CartesianGrid,
    /// Interior values, indexed `(ix, iy, is)` row-major.
    pub values: Vec<f64>,
}

impl DoubleCoverSolution {
    pub fn value(&self, i: usize, j: usize, l: usize) -> f64 {
        self.values[self.grid.index(i, j, l)]
    }

    /// The cone point covered by node `(i, j, l)`.
    pub fn node_point(&self, i: usize, j: usize, l: usize) -> ConePoint {
        let g = &self.grid;
        let (x, y) = (g.coord(i as isize), g.coord(j as isize));
        let r = x.hypot(y);
        let t = if r == 0.0 { 0.0 } else { canonical_angle(2.0 * y.atan2(x)) };
        ConePoint { polar: vec![(r, t)], s: vec![g.s(l as isize)] }
    }

    /// `[∂²_r u, r^{-2} ∂²_θ u, r^{-1} ∂_r ∂_θ u]` at an interior node away from the axis.
    ///
    /// With `e` the radial unit vector of the plane, `e⊥` its rotation and `θ = 2φ`,
    /// these are `eᵀHe`, `¼(e⊥ᵀHe⊥ − e·∇ũ/r)` and `½(e⊥ᵀHe + e⊥·∇ũ/r)`,
    /// with `H` and `∇ũ` from central differences.
    pub fn pure_conical(&self, i: usize, j: usize, l: usize) -> Option<[f64; 3]> {
        let g = &self.grid;
        if i == 0 || j == 0 || i + 1 >= g.n || j + 1 >= g.n {
            return None;
        }
        let (x, y) = (g.coord(i as isize), g.coord(j as isize));
        let r = x.hypot(y);
        if r == 0.0 {
            return None;
        }
        let h = g.h();
        let u = |a: usize, b: usize| self.value(a, b, l);
        let ux = (u(i + 1, j) - u(i - 1, j)) / (2.0 * h);
        let uy = (u(i, j + 1) - u(i, j - 1)) / (2.0 * h);
        let uxx = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / (h * h);
        let uyy = (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / (h * h);
        let uxy = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) / (4.0 * h * h);
        let (c, s) = (x / r, y / r);
        let (pc, ps) = (-s, c);
        let hee = c * c * uxx + 2.0 * c * s * uxy + s * s * uyy;
        let hpp = pc * pc * uxx + 2.0 * pc * ps * uxy + ps * ps * uyy;
        let hpe = pc * c * uxx + (pc * s + ps * c) * uxy + ps * s * uyy;
        let ge = c * ux + s * uy;
        let gp = pc * ux + ps * uy;
        Some([hee, 0.25 * (hpp - ge / r), 0.5 * (hpe + gp / r)])
    }
}

/// Solve `Δu = f` on the angle-`π` cone through its double cover, with `u = g` on the box boundary.
pub fn solve_double_cover(spec: &ConeSpec, f: Func, g: Func, grid: &CartesianGrid) -> Result<DoubleCoverSolution> {
    if spec.n() != 1 || spec.q() != 1 || (spec.betas[0] - 0.5).abs() > 1e-12 {
        return Err(Error::Unsupported("the double cover applies to one factor with β = 1/2 and q = 1".into()));
    }
    if grid.n < 3 || grid.n.is_multiple_of(2) || grid.ns < 1 {
        return arg("double-cover grid needs an odd n ≥ 3 and ns ≥ 1");
    }
    let ft = double_cover_pullback(f);
    let gt = double_cover_pullback(g);
    let (n, ns) = (grid.n, grid.ns);
    let (h, hs) = (grid.h(), grid.hs());
    let mut rhs = vec![Complex64::new(0.0, 0.0); n * n * ns];
    for i in 0..n {
        for j in 0..n {
            for l in 0..ns {
                let (x, y, s) = (grid.coord(i as isize), grid.coord(j as isize), grid.s(l as isize));
                let mut v = ft(x, y, &[s]);
                let xs = [(i == 0, -1isize), (i == n - 1, n as isize)];
                for (edge, bi) in xs {
                    if edge {
                        v -= gt(grid.coord(bi), y, &[s]) / (h * h);
                    }
                }
                for (edge, bj) in [(j == 0, -1isize), (j == n - 1, n as isize)] {
                    if edge {
                        v -= gt(x, grid.coord(bj), &[s]) / (h * h);
                    }
                }
                for (edge, bl) in [(l == 0, -1isize), (l == ns - 1, ns as isize)] {
                    if edge {
                        v -= gt(x, y, &[grid.s(bl)]) / (hs * hs);
                    }
                }
                if !v.is_finite() {
                    return Err(Error::Numerical(format!("source is not finite at ({x}, {y}, {s})")));
                }
                rhs[grid.index(i, j, l)] = Complex64::new(v, 0.0);
            }
        }
    }
    let mut planner = FftPlanner::new();
    let dxy = Dst::new(&mut planner, n);
    let dsz = Dst::new(&mut planner, ns);
    let shape = [n, n, ns];
    along_axis(&mut rhs, &shape, 0, |line| dxy.apply(line));
    along_axis(&mut rhs, &shape, 1, |line| dxy.apply(line));
    along_axis(&mut rhs, &shape, 2, |line| dsz.apply(line));
    for i in 0..n {
        for j in 0..n {
            for l in 0..ns {
                let lam = dxy.eigenvalue(i, h) + dxy.eigenvalue(j, h) + dsz.eigenvalue(l, hs);
                rhs[grid.index(i, j, l)] /= lam;
            }
        }
    }
    along_axis(&mut rhs, &shape, 0, |line| dxy.apply(line));
    along_axis(&mut rhs, &shape, 1, |line| dxy.apply(line));
    along_axis(&mut rhs, &shape, 2, |line| dsz.apply(line));
    let norm = 8.0 / ((n + 1) as f64 * (n + 1) as f64 * (ns + 1) as f64);
    let values = rhs.iter().map(|c| c.re * norm).collect();
    Ok(DoubleCoverSolution { grid: grid.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_transform_inverts() {
        let mut planner = FftPlanner::new();
        let d = Dst::new(&mut planner, 5);
        let x: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64 * 0.3 - 1.0, 0.0)).collect();
        let mut y = x.clone();
        d.apply(&mut y);
        d.apply(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b * (2.0 / 6.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn polar_recovers_quadratic() {
        // u = r² − 2s² is harmonic, and the radial stencil is exact on r²; residual error is roundoff.
        let spec = ConeSpec::new(vec![0.4], 1).unwrap();
        let u = |y: &ConePoint| y.r(0).powi(2) - 2.0 * y.s[0] * y.s[0];
        let grid = PolarGrid { radius: 1.0, s_range: (-0.5, 0.5), nr: 12, ntheta: 8, ns: 11 };
        let sol = solve_fd_polar(&spec, &|_| 0.0, &u, &grid).unwrap();
        for (i, j, l) in [(0, 0, 0), (5, 3, 6), (11, 7, 10)] {
            assert!((sol.value(i, j, l) - u(&grid.node(i, j, l))).abs() < 1e-10);
        }
    }

    #[test]
    fn polar_is_second_order_on_smooth_data() {
        use crate::expr::{Angular, Expr, Wave};
        let beta = 0.75;
        let spec = ConeSpec::new(vec![beta], 1).unwrap();
        let u = Expr::cone_wave(1, 1, 0, 1.0, 2.0 / beta, Angular::new(2.0, Wave::Cos, 0.0))
            .mul(&Expr::constant(1, 1, 1.0).add(&Expr::s_pow(1, 1, 0, 1)))
            .add(&Expr::r_pow(1, 1, 0, 4.0).mul(&Expr::s_pow(1, 1, 0, 1)));
        let f = u.laplacian(&spec.betas);
        let coarse = PolarGrid { radius: 1.0, s_range: (0.0, 1.0), nr: 8, ntheta: 8, ns: 7 };
        let err = |g: &PolarGrid| {
            let sol = solve_fd_polar(&spec, &|y| f.eval(y), &|y| u.eval(y), g).unwrap();
            let mut e: f64 = 0.0;
            for i in 0..g.nr {
                for j in 0..g.ntheta {
                    for l in 0..g.ns {
                        e = e.max((sol.value(i, j, l) - u.eval(&g.node(i, j, l))).abs());
                    }
                }
            }
            e
        };
        let fine = coarse.refined();
        let (e1, e2, e3) = (err(&coarse), err(&fine), err(&fine.refined()));
        assert!(e1 / e2 > 3.0 && e2 / e3 > 3.5, "{e1} {e2} {e3}");
    }

    #[test]
    fn double_cover_recovers_quadratic_mode() {
        let spec = ConeSpec::new(vec![0.5], 1).unwrap();
        let u = |y: &ConePoint| y.r(0).powi(2) * y.theta(0).cos() + y.s[0];
        let grid = CartesianGrid { half_width: 1.0, s_range: (-1.0, 1.0), n: 9, ns: 5 };
        let sol = solve_double_cover(&spec, &|_| 0.0, &u, &grid).unwrap();
        for (i, j, l) in [(4, 4, 2), (1, 7, 0), (6, 2, 4)] {
            assert!((sol.value(i, j, l) - u(&sol.node_point(i, j, l))).abs() < 1e-12);
        }
        let pc = sol.pure_conical(6, 4, 2).unwrap();
        assert!((pc[0] - 2.0).abs() < 1e-9);
    }
}
