//! Poisson problem on apex-centered balls by harmonic expansion.
//!
//! A right-hand side in the supported class is a finite sum `Σ c ρ^{2l} h_d` with
//! `h_d` homogeneous harmonic of degree `d`. Since
//! `Δ(ρ^{2k} h_d) = 2k(2k + 2d + m − 2) ρ^{2k−2} h_d`, the term `c ρ^{2l} h_d`
//! is matched by `c (ρ^{2l+2} − R^{2l+2}) h_d / (2(l+1)(2d + 2l + m))`, which also
//! vanishes on `∂B_R`. Boundary data `ρ^{2l} h_d` extend harmonically as `R^{2l} h_d`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::expr::Expr;
use crate::geometry::{ConePoint, ConeSpec};
use crate::spectrum::{harmonic_modes, HarmonicMode};

/// One term `c ρ^{2l} h_d` of a decomposition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FischerComponent {
    pub label: String,
    /// Degree `d` of the harmonic factor.
    pub degree: f64,
    pub power: u32,
    pub coefficient: f64,
    pub mode: Expr,
}

impl FischerComponent {
    /// Total homogeneity `d + 2l`.
    pub fn total_degree(&self) -> f64 {
        self.degree + 2.0 * self.power as f64
    }

    pub fn expr(&self) -> Expr {
        let (n, q) = (self.mode.n, self.mode.q);
        Expr::rho2(n, q).powi(self.power).mul(&self.mode).scale(self.coefficient)
    }
}

/// Write `f` as `Σ c ρ^{2l} h_d`.
///
/// Each homogeneous part is matched against all products `ρ^{2l} h_{D−2l}` by
/// least squares on monomial coefficients; a relative residual above `1e-9`
/// means `f` is outside the supported class.
pub fn fischer_decompose(spec: &ConeSpec, f: &Expr) -> Result<Vec<FischerComponent>> {
    if (f.n, f.q) != (spec.n(), spec.q()) {
        return arg("function and spec have different dimensions");
    }
    let parts = f.clone().simplify().homogeneous_parts();
    let top = parts.iter().map(|p| p.0).fold(0.0, f64::max);
    if parts.iter().any(|p| p.0 < -1e-12) {
        return Err(Error::Unsupported("negative homogeneity is outside the supported class".into()));
    }
    let modes = harmonic_modes(spec, top + 1e-6)?;
    let (n, q) = (spec.n(), spec.q());
    let rho2 = Expr::rho2(n, q);
    let mut out = Vec::new();
    for (deg, h) in parts {
        let mut cands: Vec<(u32, &HarmonicMode, Expr)> = Vec::new();
        let mut l = 0u32;
        while deg - 2.0 * l as f64 >= -1e-9 {
            let d = deg - 2.0 * l as f64;
            let pow = rho2.powi(l);
            for m in modes.iter().filter(|m| (m.degree - d).abs() < 1e-9) {
                cands.push((l, m, pow.mul(&m.expr)));
            }
            l += 1;
        }
        let target = h.coefficients();
        let cand_coefs: Vec<_> = cands.iter().map(|c| c.2.coefficients()).collect();
        let mut index = BTreeMap::new();
        for k in target.keys().chain(cand_coefs.iter().flat_map(|c| c.keys())) {
            let next = index.len();
            index.entry(k.clone()).or_insert(next);
        }
        let unsupported = || {
            Error::Unsupported(format!("the degree-{deg} part of f is not a finite sum of ρ^(2l) times harmonic modes"))
        };
        if cands.is_empty() {
            return Err(unsupported());
        }
        let mut a = DMatrix::<f64>::zeros(index.len(), cands.len());
        let mut b = DVector::<f64>::zeros(index.len());
        for (j, c) in cand_coefs.iter().enumerate() {
            for (k, v) in c {
                a[(index[k], j)] = *v;
            }
        }
        for (k, v) in &target {
            b[index[k]] = *v;
        }
        let svd = a.clone().svd(true, true);
        let x = svd.solve(&b, 1e-12).map_err(|e| Error::Numerical(e.to_string()))?;
        let resid = (&a * &x - &b).amax();
        if resid > 1e-9 * b.amax().max(1e-300) {
            return Err(unsupported());
        }
        let floor = 1e-13 * x.amax();
        for (j, (l, m, _)) in cands.iter().enumerate() {
            if x[j].abs() > floor {
                out.push(FischerComponent {
                    label: m.label.clone(),
                    degree: m.degree,
                    power: *l,
                    coefficient: x[j],
                    mode: m.expr.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Particular-solution term generated by one component of `f`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralTerm {
    pub component: FischerComponent,
    /// `2(l+1)(2d + 2l + m)`, the factor produced by the Laplacian.
    pub denominator: f64,
}

/// Solution of `Δu = f` in `B(apex, R)`, `u = g` on the boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralSolution {
    pub spec: ConeSpec,
    pub radius: f64,
    pub d_max: f64,
    pub source_terms: Vec<SpectralTerm>,
    pub boundary_terms: Vec<FischerComponent>,
    pub u: Expr,
    /// Largest coefficient of `Δu − f` for the retained part of `f`, relative to `f`.
    pub residual: f64,
    /// Size bound of the components dropped above `d_max`.
    pub tail: f64,
    pub warnings: Vec<String>,
}

impl SpectralSolution {
    pub fn eval(&self, x: &ConePoint) -> f64 {
        self.u.eval(x)
    }
}

const TAIL_TOL: f64 = 1e-8;

pub fn solve_dirichlet_apex(
    spec: &ConeSpec,
    f: &Expr,
    g: Option<&Expr>,
    radius: f64,
    d_max: f64,
) -> Result<SpectralSolution> {
    if !(radius > 0.0) {
        return arg(format!("radius {radius} must be positive"));
    }
    let (n, q, m) = (spec.n(), spec.q(), spec.m() as f64);
    let mut tail = 0.0;
    let mut u = Expr::zero(n, q);
    let mut kept_f = Expr::zero(n, q);
    let rho2 = Expr::rho2(n, q);
    let mut source_terms = Vec::new();
    for c in fischer_decompose(spec, f)? {
        let total = c.total_degree();
        if total > d_max + 1e-9 {
            tail += c.coefficient.abs() * radius.powf(total + 2.0);
            continue;
        }
        let l = c.power;
        let den = 2.0 * (l + 1) as f64 * (2.0 * c.degree + 2.0 * l as f64 + m);
        assert!(den > 0.0, "the Laplacian factor 2(l+1)(2d+2l+m) is positive for d ≥ 0");
        let radial = rho2.powi(l + 1).sub(&Expr::constant(n, q, radius.powi(2 * (l as i32 + 1))));
        u = u.add(&radial.mul(&c.mode).scale(c.coefficient / den));
        kept_f = kept_f.add(&c.expr());
        source_terms.push(SpectralTerm { component: c, denominator: den });
    }
    let mut boundary_terms = Vec::new();
    if let Some(g) = g {
        for c in fischer_decompose(spec, g)? {
            if c.total_degree() > d_max + 1e-9 {
                tail += c.coefficient.abs() * radius.powf(c.total_degree());
                continue;
            }
            u = u.add(&c.mode.scale(c.coefficient * radius.powi(2 * c.power as i32)));
            boundary_terms.push(c);
        }
    }
    let lap = u.laplacian(&spec.betas).sub(&kept_f);
    let residual = lap.max_abs_coef() / f.max_abs_coef().max(1.0);
    let mut warnings = Vec::new();
    if tail > TAIL_TOL {
        warnings.push(format!("components above degree {d_max} were dropped; tail bound {tail:.3e}"));
    }
    Ok(SpectralSolution {
        spec: spec.clone(),
        radius,
        d_max,
        source_terms,
        boundary_terms,
        u,
        residual,
        tail,
        warnings,
    })
}
