//! Scaled `L²` norms, Campanato oscillation, log–log decay fits and the
//! monotonicity checks for harmonic functions on cones.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{arg, Error, Result};
use crate::geometry::{distance, ConePoint, ConeSpec};
use crate::quadrature::{BallRule, Estimate, QmcConfig};
use crate::spectrum::{enumerate_roots, mu, HarmonicMode};

/// `‖u‖_{B(x,ρ)} = (ρ^{-m} ∫_{B(x,ρ)} u²)^{1/2}` with its quadrature error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaledNorm {
    pub value: f64,
    pub stderr: f64,
    pub center: ConePoint,
    pub radius: f64,
    /// False when the relative standard error exceeds the requested tolerance.
    pub converged: bool,
}

/// Per-replicate scaled norms on an existing rule.
pub fn replicate_scaled_norms(spec: &ConeSpec, u: &(dyn Fn(&ConePoint) -> f64 + Sync), rule: &BallRule) -> Vec<f64> {
    let scale = rule.radius.powi(-(spec.m() as i32));
    rule.replicate_integrals(|y| {
        let v = u(y);
        v * v
    })
    .into_iter()
    .map(|i| (i.max(0.0) * scale).sqrt())
    .collect()
}

pub fn scaled_norm_on(spec: &ConeSpec, u: &(dyn Fn(&ConePoint) -> f64 + Sync), rule: &BallRule) -> Result<Estimate> {
    let reps = replicate_scaled_norms(spec, u, rule);
    if reps.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("integrand is not finite on B({:?}, {})", rule.center, rule.radius)));
    }
    Ok(Estimate::from_replicates(&reps))
}

pub fn scaled_norm(
    spec: &ConeSpec,
    u: &(dyn Fn(&ConePoint) -> f64 + Sync),
    center: &ConePoint,
    radius: f64,
    qmc: &QmcConfig,
    tol: f64,
) -> Result<ScaledNorm> {
    let rule = BallRule::new(spec, center, radius, qmc)?;
    let e = scaled_norm_on(spec, u, &rule)?;
    Ok(ScaledNorm {
        value: e.value,
        stderr: e.stderr,
        center: center.clone(),
        radius,
        converged: e.stderr <= tol * e.value || e.value == 0.0,
    })
}

/// Mean oscillation `‖f − f_B‖_{B}` on the ball of `rule`, replicate by replicate.
pub fn oscillation_on(spec: &ConeSpec, f: &(dyn Fn(&ConePoint) -> f64 + Sync), rule: &BallRule) -> Result<Estimate> {
    let scale = rule.radius.powi(-(spec.m() as i32));
    let mut reps = Vec::with_capacity(rule.replicates.len());
    for rep in &rule.replicates {
        let vals: Vec<f64> = rep.points.iter().map(f).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("f is not finite on B({:?}, {})", rule.center, rule.radius)));
        }
        let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
        reps.push((ss * rep.weight * scale).sqrt());
    }
    Ok(Estimate::from_replicates(&reps))
}

/// One `(center, radius)` entry of a Campanato scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampanatoScale {
    pub center: usize,
    pub radius: f64,
    pub oscillation: Estimate,
    /// `‖f − f_B‖_B / ρ^α`
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampanatoReport {
    pub alpha: f64,
    /// `K = max ratio` over all centers and radii.
    pub k: f64,
    pub scales: Vec<CampanatoScale>,
}

impl CampanatoReport {
    /// Ratios at one center ordered from the coarsest to the finest radius.
    pub fn ratios_at(&self, center: usize) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> =
            self.scales.iter().filter(|s| s.center == center).map(|s| (s.radius, s.ratio)).collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        v
    }

    /// Log–log fit of the oscillation against the radius at one center.
    pub fn decay_fit(&self, center: usize) -> Result<LogLogFit> {
        let rows: Vec<&CampanatoScale> = self.scales.iter().filter(|s| s.center == center).collect();
        let x: Vec<f64> = rows.iter().map(|s| s.radius).collect();
        let y: Vec<Estimate> = rows.iter().map(|s| s.oscillation).collect();
        fit_decay(&x, &y)
    }
}

/// Dyadic radii `2^{-1}, …, 2^{-levels}`.
pub fn dyadic_radii(levels: u32) -> Vec<f64> {
    (1..=levels).map(|j| 0.5f64.powi(j as i32)).collect()
}

/// Campanato constant of `f` over the given centers and radii.
pub fn campanato_estimate(
    spec: &ConeSpec,
    f: &(dyn Fn(&ConePoint) -> f64 + Sync),
    centers: &[ConePoint],
    alpha: f64,
    radii: &[f64],
    qmc: &QmcConfig,
) -> Result<CampanatoReport> {
    if !(alpha > 0.0) {
        return arg(format!("alpha = {alpha} must be positive"));
    }
    if centers.is_empty() || radii.is_empty() {
        return arg("campanato_estimate needs at least one center and one radius");
    }
    let mut scales = Vec::new();
    for (i, c) in centers.iter().enumerate() {
        for &rad in radii {
            let rule = BallRule::new(spec, c, rad, qmc)?;
            let oscillation = oscillation_on(spec, f, &rule)?;
            scales.push(CampanatoScale {
                center: i,
                radius: rad,
                oscillation,
                ratio: oscillation.value / rad.powf(alpha),
            });
        }
    }
    let k = scales.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(CampanatoReport { alpha, k, scales })
}

/// Result of a weighted least-squares fit of `log y` against `log x`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval for the slope.
    pub slope_ci: (f64, f64),
    pub points: usize,
}

/// Weighted least squares of `log y` on `log x`.
pub fn fit_loglog(x: &[f64], y: &[f64], w: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() || x.len() != w.len() {
        return arg("fit_loglog inputs differ in length");
    }
    let pts: Vec<(f64, f64, f64)> = x
        .iter()
        .zip(y)
        .zip(w)
        .filter(|((a, b), c)| **a > 0.0 && **b > 0.0 && **c > 0.0)
        .map(|((a, b), c)| (a.ln(), b.ln(), *c))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Numerical("log–log fit needs two positive points".into()));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Numerical("log–log fit needs two distinct radii".into()));
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = pts.len() as f64 - 2.0;
    let half = if dof > 0.0 {
        let rss: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
        let se = (rss / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Numerical(e.to_string()))?;
        t.inverse_cdf(0.975) * se
    } else {
        0.0
    };
    Ok(LogLogFit { slope, intercept, slope_ci: (slope - half, slope + half), points: pts.len() })
}

/// Decay exponent of estimates against radii, down-weighting the two finest radii by their error.
pub fn fit_decay(radii: &[f64], values: &[Estimate]) -> Result<LogLogFit> {
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let mut w = vec![1.0; radii.len()];
    for &i in order.iter().take(2) {
        let rel = values[i].stderr / values[i].value;
        if rel.is_finite() && rel > 0.0 {
            w[i] = 1.0 / (1.0 + (rel / 1e-3).powi(2));
        }
    }
    let y: Vec<f64> = values.iter().map(|e| e.value).collect();
    fit_loglog(radii, &y, &w)
}

/// Pointwise Hölder quotient `sup_y |f(y) − f(x)| / d(x, y)^α` over the nodes of `B(x, radius)`.
pub fn pointwise_holder(
    spec: &ConeSpec,
    f: &(dyn Fn(&ConePoint) -> f64 + Sync),
    x: &ConePoint,
    alpha: f64,
    radius: f64,
    qmc: &QmcConfig,
) -> Result<f64> {
    let rule = BallRule::new(spec, x, radius, qmc)?;
    let fx = f(x);
    let mut best: f64 = 0.0;
    for rep in &rule.replicates {
        for y in &rep.points {
            let d = distance(spec, x, y)?;
            if d > 1e-12 {
                best = best.max((f(y) - fx).abs() / d.powf(alpha));
            }
        }
    }
    Ok(best)
}

/// A finite sum `Σ c_i u_i` of harmonic modes.
pub fn combination(terms: &[(f64, HarmonicMode)]) -> impl Fn(&ConePoint) -> f64 + Sync + '_ {
    move |y| terms.iter().map(|(c, m)| c * m.expr.eval(y)).sum()
}

/// One radius of a monotonicity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityRow {
    pub radius: f64,
    /// `‖u‖_{B_ρ} / ‖u‖_{B_1}`
    pub ratio: Estimate,
    /// `ρ^{d⁺}`
    pub bound: f64,
    /// `bound − ratio` in units of its standard error.
    pub margin_sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// The smallest indicial root above the threshold degree.
    pub exponent: f64,
    pub norm_unit: Estimate,
    pub rows: Vec<MonotonicityRow>,
    /// True when `ratio = ρ^{d⁺}` to relative `1e-3` at every radius.
    pub equality: bool,
    pub pass: bool,
}

/// Check `‖u‖_{B_ρ} ≤ ρ^{d⁺} ‖u‖_{B_1}` on apex balls, where `d⁺` is the first root above `d`.
///
/// `u` must be a combination of modes of degree above `d`. Ratios are formed
/// replicate by replicate, so their errors are correlated between radii.
pub fn check_monotonicity(
    spec: &ConeSpec,
    u: &[(f64, HarmonicMode)],
    d: f64,
    radii: &[f64],
    qmc: &QmcConfig,
) -> Result<MonotonicityReport> {
    if u.is_empty() {
        return arg("u must contain at least one mode");
    }
    if let Some(m) = u.iter().find(|(_, m)| m.degree <= d + 1e-9) {
        return arg(format!("mode {} has degree {} ≤ {d}", m.1.label, m.1.degree));
    }
    let exponent = next_root(spec, d)?;
    let apex = ConePoint::apex(spec);
    let f = combination(u);
    let unit = BallRule::new(spec, &apex, 1.0, qmc)?;
    let n1 = replicate_scaled_norms(spec, &f, &unit);
    let mut rows = Vec::new();
    for &rad in radii {
        if !(rad > 0.0 && rad <= 1.0) {
            return arg(format!("radius {rad} must lie in (0, 1]"));
        }
        let rule = BallRule::new(spec, &apex, rad, qmc)?;
        let nr = replicate_scaled_norms(spec, &f, &rule);
        let ratios: Vec<f64> = nr.iter().zip(&n1).map(|(a, b)| a / b).collect();
        let ratio = Estimate::from_replicates(&ratios);
        let bound = rad.powf(exponent);
        let margin = bound - ratio.value;
        let margin_sigma = if ratio.stderr > 0.0 { margin / ratio.stderr } else { f64::INFINITY * margin.signum() };
        let pass = ratio.value <= bound * (1.0 + 1e-3);
        rows.push(MonotonicityRow { radius: rad, ratio, bound, margin_sigma, pass });
    }
    let equality = rows.iter().all(|r| (r.ratio.value / r.bound - 1.0).abs() <= 1e-3);
    let pass = rows.iter().all(|r| r.pass);
    Ok(MonotonicityReport { exponent, norm_unit: Estimate::from_replicates(&n1), rows, equality, pass })
}

fn next_root(spec: &ConeSpec, d: f64) -> Result<f64> {
    let table = enumerate_roots(spec, d + 4.0)?;
    table
        .degrees()
        .into_iter()
        .find(|&e| e > d + 1e-9)
        .ok_or_else(|| Error::Numerical(format!("no indicial root above {d}")))
}

/// The function `F(ε) = λ^{d*−2−α} (1 + ε/λ)^{m+d*} (1 − ε)^{−m−d*}`; `F(|x|) < 1` suffices for decay off the apex.
pub fn off_center_factor(m: usize, d_star: f64, lambda: f64, alpha: f64, eps: f64) -> f64 {
    let p = m as f64 + d_star;
    lambda.powf(d_star - 2.0 - alpha) * (1.0 + eps / lambda).powf(p) * (1.0 - eps).powf(-p)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OffCenterReport {
    pub eps: f64,
    pub factor: f64,
    /// False when `F(|x|) ≥ 1`; the check is then skipped.
    pub applicable: bool,
    /// `‖u‖_{B(x,λ)}`
    pub lhs: Estimate,
    /// `λ^{2+α} ‖u‖_{B(x,1)}`
    pub rhs: Estimate,
    /// `(rhs − lhs)` divided by its replicate standard error.
    pub margin_sigma: f64,
    pub pass: bool,
}

/// Check `‖u‖_{B(x,λ)} < λ^{2+α} ‖u‖_{B(x,1)}` for `u ⊥ ℋ_{≤2}` on a model cone.
///
/// `model` must be a factor of `spec`: its angles are a sub-multiset of the
/// spec's, and `u` and `x` live on the model.
pub fn check_off_center_decay(
    spec: &ConeSpec,
    model: &ConeSpec,
    x: &ConePoint,
    u: &[(f64, HarmonicMode)],
    lambda: f64,
    alpha: f64,
    qmc: &QmcConfig,
) -> Result<OffCenterReport> {
    let mu_spec = mu(spec);
    if !(alpha > 0.0 && alpha < mu_spec) {
        return Err(Error::Scope { alpha, mu: mu_spec });
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return arg(format!("lambda = {lambda} must lie in (0, 1)"));
    }
    let mut pool = spec.betas.clone();
    for b in &model.betas {
        match pool.iter().position(|p| (p - b).abs() < 1e-12) {
            Some(i) => {
                pool.remove(i);
            }
            None => return arg(format!("model angle {b} is not an angle of the cone product")),
        }
    }
    if model.m() != spec.m() {
        return arg("model and spec differ in dimension");
    }
    if let Some(m) = u.iter().find(|(_, m)| m.degree <= 2.0 + 1e-9) {
        return arg(format!("mode {} is not super-quadratic", m.1.label));
    }
    x.check(model)?;
    let d_star = next_root(model, 2.0)?;
    let eps = x.rho();
    let factor = off_center_factor(model.m(), d_star, lambda, alpha, eps);
    let f = combination(u);
    let near = replicate_scaled_norms(model, &f, &BallRule::new(model, x, lambda, qmc)?);
    let far = replicate_scaled_norms(model, &f, &BallRule::new(model, x, 1.0, qmc)?);
    let c = lambda.powf(2.0 + alpha);
    let diffs: Vec<f64> = far.iter().zip(&near).map(|(b, a)| c * b - a).collect();
    let diff = Estimate::from_replicates(&diffs);
    let margin_sigma = if diff.stderr > 0.0 { diff.value / diff.stderr } else { f64::INFINITY * diff.value.signum() };
    let lhs = Estimate::from_replicates(&near);
    let rhs = Estimate::from_replicates(&far.iter().map(|v| c * v).collect::<Vec<_>>());
    Ok(OffCenterReport { eps, factor, applicable: factor < 1.0, lhs, rhs, margin_sigma, pass: diff.value > 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dilate, unit_ball_volume};
    use crate::spectrum::modes_of_degree;

    #[test]
    fn constant_norm_on_apex_ball() {
        let spec = ConeSpec::new(vec![0.6], 1).unwrap();
        let apex = ConePoint::apex(&spec);
        for r in [0.3, 1.0, 2.5] {
            let n = scaled_norm(&spec, &|_| 1.0, &apex, r, &QmcConfig::default(), 1e-2).unwrap();
            let exact = (0.6 * unit_ball_volume(3)).sqrt();
            assert!((n.value - exact).abs() < 5e-3 * exact, "{} vs {exact}", n.value);
        }
    }

    #[test]
    fn scaled_norm_is_dilation_invariant() {
        let spec = ConeSpec::new(vec![0.45], 1).unwrap();
        let u = |y: &ConePoint| y.r(0).powf(1.5) * (y.theta(0)).cos() + y.s[0];
        let x = ConePoint::new(vec![(0.2, 1.0)], vec![0.1]);
        let lam = 3.0;
        let scaled_u = move |y: &ConePoint| u(&dilate(y, lam).unwrap());
        let cfg = QmcConfig::default();
        let a = scaled_norm(&spec, &scaled_u, &x, 0.25, &cfg, 1.0).unwrap();
        let b = scaled_norm(&spec, &u, &dilate(&x, lam).unwrap(), 0.75, &cfg, 1.0).unwrap();
        assert!((a.value - b.value).abs() < 1e-9 * b.value);
    }

    #[test]
    fn constant_has_zero_oscillation() {
        let spec = ConeSpec::new(vec![0.75], 1).unwrap();
        let c = [ConePoint::apex(&spec), ConePoint::new(vec![(0.3, 2.0)], vec![0.0])];
        let rep = campanato_estimate(&spec, &|_| 2.5, &c, 0.3, &dyadic_radii(4), &QmcConfig::default()).unwrap();
        assert!(rep.k < 1e-8);
    }

    #[test]
    fn loglog_recovers_exponent() {
        let x: Vec<f64> = dyadic_radii(6);
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r.powf(0.7)).collect();
        let fit = fit_loglog(&x, &y, &[1.0; 6]).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-12);
        assert!(fit.slope_ci.0 <= fit.slope && fit.slope <= fit.slope_ci.1);
    }

    #[test]
    fn single_mode_is_equality_case() {
        let spec = ConeSpec::new(vec![0.75], 1).unwrap();
        let m = modes_of_degree(&spec, 7.0 / 3.0).unwrap().remove(0);
        let radii: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        let rep = check_monotonicity(&spec, &[(1.0, m)], 2.0, &radii, &QmcConfig::default()).unwrap();
        assert!(rep.equality && rep.pass);
        assert!((rep.exponent - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn off_center_factor_at_apex() {
        let f = off_center_factor(3, 7.0 / 3.0, 0.25, 0.2, 0.0);
        assert!((f - 0.25f64.powf(7.0 / 3.0 - 2.2)).abs() < 1e-15);
        assert!(f < 1.0);
    }

    #[test]
    fn scope_is_enforced() {
        let spec = ConeSpec::new(vec![0.75], 1).unwrap();
        let m = modes_of_degree(&spec, 7.0 / 3.0).unwrap().remove(0);
        let x = ConePoint::apex(&spec);
        let e = check_off_center_decay(&spec, &spec, &x, &[(1.0, m)], 0.25, 0.4, &QmcConfig::default());
        assert!(matches!(e, Err(Error::Scope { .. })));
    }
}
