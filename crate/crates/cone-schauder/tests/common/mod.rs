//! Oracles shared by the integration tests. None of them call into the crate's
//! spectral code: link eigenvalues come from a finite-difference Sturm–Liouville
//! solve, Laplacians from finite differences in a locally flat chart.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use cone_schauder::geometry::{ConePoint, ConeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Boundary condition at `ψ = π/2` when the second block is `ℝ¹`, whose link is two points.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EndCondition {
    /// The weight vanishes there; no condition is imposed.
    Natural,
    /// Even extension in `s`.
    Neumann,
    /// Odd extension in `s`.
    Dirichlet,
}

/// `−(w Φ')'/w + (μ₁/sin²ψ + μ₂/cos²ψ) Φ = λ Φ` on `(0, π/2)` with
/// `w = sin^{n1} ψ cos^{n2} ψ`, discretized on `cells` cell centers. Returns the
/// symmetric tridiagonal matrix as diagonal and off-diagonal.
fn link_operator(n1: f64, n2: f64, mu1: f64, mu2: f64, end: EndCondition, cells: usize) -> (Vec<f64>, Vec<f64>) {
    let h = FRAC_PI_2 / cells as f64;
    let w = |p: f64| p.sin().powf(n1) * p.cos().powf(n2);
    let center = |i: usize| (i as f64 + 0.5) * h;
    let mut diag = vec![0.0; cells];
    let mut off = vec![0.0; cells - 1];
    for i in 0..cells {
        let p = center(i);
        let wi = w(p);
        let left = if i == 0 { 0.0 } else { w(i as f64 * h) };
        let right = if i + 1 == cells {
            match end {
                EndCondition::Dirichlet => 2.0 * w(FRAC_PI_2),
                _ => 0.0,
            }
        } else {
            w((i + 1) as f64 * h)
        };
        diag[i] = (left + right) / (h * h * wi) + mu1 / p.sin().powi(2) + mu2 / p.cos().powi(2);
        if i + 1 < cells {
            off[i] = -w((i + 1) as f64 * h) / (h * h * (wi * w(center(i + 1))).sqrt());
        }
    }
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix below `x` (Sturm sequence).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = 1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The lowest `count` eigenvalues by bisection.
fn lowest_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let hi0 = diag.iter().zip(0..).map(|(d, i)| {
        let l = if i == 0 { 0.0 } else { off[i - 1].abs() };
        let r = if i < off.len() { off[i].abs() } else { 0.0 };
        d + l + r
    });
    let upper = hi0.fold(f64::MIN, f64::max);
    (0..count)
        .map(|k| {
            let (mut lo, mut hi) = (-1.0f64, upper);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if count_below(diag, off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-12 * hi.abs().max(1.0) {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Eigenvalues of the circle of length `2πβ` with multiplicity: `(k/β)²`.
fn circle_channels(beta: f64, kmax: usize) -> Vec<(f64, usize)> {
    (0..=kmax).map(|k| ((k as f64 / beta).powi(2), if k == 0 { 1 } else { 2 })).collect()
}

/// Eigenvalues of `S^{q−1}` with multiplicity, `q ≥ 2`: `l(l+q−2)`.
fn sphere_channels(q: usize, lmax: usize) -> Vec<(f64, usize)> {
    (0..=lmax)
        .map(|l| {
            let lf = l as f64;
            let mult = if q == 2 {
                if l == 0 {
                    1
                } else {
                    2
                }
            } else {
                binom(l + q - 1, q - 1) - if l >= 2 { binom(l + q - 3, q - 1) } else { 0 }
            };
            (lf * (lf + q as f64 - 2.0), mult)
        })
        .collect()
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// The first `count` Laplace eigenvalues (with multiplicity) of the link of
/// `C_{β₁} × ℝ^q` or `C_{β₁} × C_{β₂}`.
pub fn link_eigenvalues(spec: &ConeSpec, count: usize, cells: usize) -> Vec<f64> {
    assert!(spec.n() >= 1 && spec.n() <= 2 && spec.n() + spec.q() <= 3, "oracle handles the join of two blocks");
    let first = circle_channels(spec.betas[0], 12);
    let (second, n2): (Vec<(f64, usize, EndCondition)>, f64) = if spec.n() == 2 {
        (circle_channels(spec.betas[1], 12).into_iter().map(|(m, k)| (m, k, EndCondition::Natural)).collect(), 1.0)
    } else if spec.q() == 1 {
        (vec![(0.0, 1, EndCondition::Neumann), (0.0, 1, EndCondition::Dirichlet)], 0.0)
    } else {
        let q = spec.q();
        (sphere_channels(q, 12).into_iter().map(|(m, k)| (m, k, EndCondition::Natural)).collect(), (q - 1) as f64)
    };
    let mut all = Vec::new();
    for &(mu1, k1) in &first {
        for &(mu2, k2, end) in &second {
            let (d, o) = link_operator(1.0, n2, mu1, mu2, end, cells);
            for lam in lowest_eigenvalues(&d, &o, count) {
                all.extend(std::iter::repeat_n(lam, k1 * k2));
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

/// Flat chart around a regular point: each cone factor with `r > 0` is unrolled
/// as `(r cos βθ, r sin βθ)` relative to the base angle.
struct FlatChart {
    betas: Vec<f64>,
    base: ConePoint,
}

impl FlatChart {
    fn coords(&self) -> Vec<f64> {
        let mut c = Vec::new();
        for &(r, _) in &self.base.polar {
            c.push(r);
            c.push(0.0);
        }
        c.extend(&self.base.s);
        c
    }

    fn point(&self, c: &[f64]) -> ConePoint {
        let n = self.betas.len();
        let polar = (0..n)
            .map(|a| {
                let (x, y) = (c[2 * a], c[2 * a + 1]);
                (x.hypot(y), self.base.polar[a].1 + y.atan2(x) / self.betas[a])
            })
            .collect();
        ConePoint::new(polar, c[2 * n..].to_vec())
    }
}

/// Fourth-order central second difference of `u` along every chart axis at a
/// regular point. Returns the Laplacian and a scale for relative residuals: the
/// sum of the absolute second differences or `|u|/ρ²`, whichever is larger.
pub fn fd_laplacian(spec: &ConeSpec, u: &dyn Fn(&ConePoint) -> f64, x: &ConePoint, h: f64) -> (f64, f64) {
    let chart = FlatChart { betas: spec.betas.clone(), base: x.clone() };
    let c0 = chart.coords();
    let f0 = u(&chart.point(&c0));
    let mut lap = 0.0;
    let mut scale = 0.0;
    for d in 0..c0.len() {
        let at = |t: f64| {
            let mut c = c0.clone();
            c[d] += t;
            u(&chart.point(&c))
        };
        let d2 = (-at(2.0 * h) + 16.0 * at(h) - 30.0 * f0 + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h);
        lap += d2;
        scale += d2.abs();
    }
    (lap, scale.max(f0.abs() / x.rho2()))
}

/// Uniformly spread regular points with `r_a ∈ [r_lo, 1]`, angles anywhere, `s ∈ [−1, 1]`.
pub fn regular_points(spec: &ConeSpec, count: usize, r_lo: f64, seed: u64) -> Vec<ConePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let polar = (0..spec.n())
                .map(|_| (rng.random_range(r_lo..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            let s = (0..spec.q()).map(|_| rng.random_range(-1.0..1.0)).collect();
            ConePoint::new(polar, s)
        })
        .collect()
}

/// Random points inside the unit apex ball, with some of them on cone axes.
pub fn ball_points(spec: &ConeSpec, count: usize, seed: u64) -> Vec<ConePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let polar: Vec<(f64, f64)> = (0..spec.n())
            .map(|_| {
                let r = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) };
                (r, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let s: Vec<f64> = (0..spec.q()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = ConePoint::new(polar, s);
        if p.rho() < 1.0 {
            out.push(p);
        }
    }
    out
}

/// A random spec with `1 ≤ n ≤ 2`, `0 ≤ q ≤ 2`, `β ∈ (0.1, 0.95)`.
pub fn random_spec(rng: &mut ChaCha8Rng) -> ConeSpec {
    let n = rng.random_range(1..=2);
    let q = rng.random_range(if n == 1 { 1 } else { 0 }..=2);
    let betas = (0..n).map(|_| rng.random_range(0.1..0.95)).collect();
    ConeSpec::new(betas, q).expect("valid random spec")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
