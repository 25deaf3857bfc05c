//! The product cone `R^m_(β) = C(S¹_{2πβ_1}) × … × C(S¹_{2πβ_n}) × R^q` as a metric space.
//!
//! Points carry polar coordinates `(r_a, θ_a)` per cone factor and Cartesian
//! coordinates `s_i` on the Euclidean factor. The metric is
//! `Σ_a (dr_a² + β_a² r_a² dθ_a²) + |ds|²`, so the Riemannian volume is
//! `(∏ β_a)` times Lebesgue measure in the chart `(r_a cos θ_a, r_a sin θ_a, s)`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::quadrature::{BallRule, Estimate, QmcConfig};

/// Angles and Euclidean dimension of a product cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub betas: Vec<f64>,
    pub euclidean_dim: usize,
}

impl ConeSpec {
    /// Validated constructor: `0 < β_a < 1`, `n ≥ 1` and `m ≥ 3`.
    pub fn new(betas: Vec<f64>, euclidean_dim: usize) -> Result<Self> {
        let spec = ConeSpec { betas, euclidean_dim };
        spec.validate()?;
        Ok(spec)
    }

    /// Constructor for model cones, which may have no cone factor at all.
    pub fn model(betas: Vec<f64>, euclidean_dim: usize) -> Self {
        ConeSpec { betas, euclidean_dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return arg("at least one cone factor is required");
        }
        for (a, &b) in self.betas.iter().enumerate() {
            if !(b > 0.0 && b < 1.0) {
                return arg(format!("betas[{a}] = {b} must lie in (0, 1)"));
            }
        }
        if self.m() < 3 {
            return arg(format!("total dimension m = {} must be at least 3", self.m()));
        }
        Ok(())
    }

    /// Number of cone factors.
    pub fn n(&self) -> usize {
        self.betas.len()
    }

    /// Euclidean dimension.
    pub fn q(&self) -> usize {
        self.euclidean_dim
    }

    /// Real dimension `2n + q`.
    pub fn m(&self) -> usize {
        2 * self.n() + self.euclidean_dim
    }

    pub fn beta_product(&self) -> f64 {
        self.betas.iter().product()
    }

    pub fn min_beta(&self) -> f64 {
        self.betas.iter().copied().fold(1.0, f64::min)
    }
}

/// Developability constant: a ball of radius `R` around a point at distance `r`
/// from the vertex of `C(S¹_{2πβ})` is a flat disc iff `R < c_β r`.
pub fn c_beta(beta: f64) -> f64 {
    if beta <= 0.5 {
        (PI * beta).sin()
    } else {
        1.0
    }
}

/// Volume of the Euclidean unit ball in `R^m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / m as f64 * unit_ball_volume(m - 2),
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Reduce an angle difference to `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = canonical_angle(theta);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// A point in per-factor polar coordinates plus Euclidean coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub polar: Vec<(f64, f64)>,
    pub s: Vec<f64>,
}

impl ConePoint {
    /// Canonicalizing constructor: angles go to `[0, 2π)`, and to 0 on the axis.
    pub fn new(polar: Vec<(f64, f64)>, s: Vec<f64>) -> Self {
        let polar =
            polar.into_iter().map(|(r, t)| if r == 0.0 { (0.0, 0.0) } else { (r, canonical_angle(t)) }).collect();
        ConePoint { polar, s }
    }

    pub fn from_parts(r: &[f64], theta: &[f64], s: &[f64]) -> Self {
        Self::new(r.iter().copied().zip(theta.iter().copied()).collect(), s.to_vec())
    }

    pub fn apex(spec: &ConeSpec) -> Self {
        ConePoint { polar: vec![(0.0, 0.0); spec.n()], s: vec![0.0; spec.q()] }
    }

    pub fn r(&self, a: usize) -> f64 {
        self.polar[a].0
    }

    pub fn theta(&self, a: usize) -> f64 {
        self.polar[a].1
    }

    /// Distance to the apex.
    pub fn rho(&self) -> f64 {
        self.rho2().sqrt()
    }

    pub fn rho2(&self) -> f64 {
        self.polar.iter().map(|p| p.0 * p.0).sum::<f64>() + self.s.iter().map(|x| x * x).sum::<f64>()
    }

    /// Check shape and ranges against a spec.
    pub fn check(&self, spec: &ConeSpec) -> Result<()> {
        if self.polar.len() != spec.n() || self.s.len() != spec.q() {
            return arg(format!(
                "point has {} cone and {} Euclidean coordinates, spec expects {} and {}",
                self.polar.len(),
                self.s.len(),
                spec.n(),
                spec.q()
            ));
        }
        for (a, &(r, t)) in self.polar.iter().enumerate() {
            if !(r >= 0.0) || !r.is_finite() || !t.is_finite() {
                return arg(format!("polar[{a}] = ({r}, {t}) is not a valid polar pair"));
            }
        }
        if self.s.iter().any(|x| !x.is_finite()) {
            return arg("Euclidean coordinates must be finite");
        }
        Ok(())
    }

    /// Coordinates in the Euclidean chart `(r cos θ, r sin θ, s)`.
    pub fn chart(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.polar.len() + self.s.len());
        for &(r, t) in &self.polar {
            out.push(r * t.cos());
            out.push(r * t.sin());
        }
        out.extend_from_slice(&self.s);
        out
    }
}

/// Squared geodesic distance without shape checks.
pub(crate) fn distance2_unchecked(betas: &[f64], x: &ConePoint, y: &ConePoint) -> f64 {
    let mut d2 = 0.0;
    for (a, &b) in betas.iter().enumerate() {
        let (rx, tx) = x.polar[a];
        let (ry, ty) = y.polar[a];
        let dt = (tx - ty).abs();
        let dt = dt.min(2.0 * PI - dt);
        d2 += (rx * rx + ry * ry - 2.0 * rx * ry * (b * dt).cos()).max(0.0);
    }
    for (sx, sy) in x.s.iter().zip(&y.s) {
        d2 += (sx - sy) * (sx - sy);
    }
    d2
}

/// Geodesic distance in the product cone.
pub fn distance(spec: &ConeSpec, x: &ConePoint, y: &ConePoint) -> Result<f64> {
    x.check(spec)?;
    y.check(spec)?;
    Ok(distance2_unchecked(&spec.betas, x, y).sqrt())
}

/// Distance in the Euclidean chart, for comparison with the cone metric.
pub fn chart_distance(x: &ConePoint, y: &ConePoint) -> f64 {
    x.chart().iter().zip(y.chart()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// The dilation `(r, θ, s) ↦ (λ r, θ, λ s)`.
pub fn dilate(x: &ConePoint, lam: f64) -> Result<ConePoint> {
    if !(lam > 0.0) || !lam.is_finite() {
        return arg(format!("dilation factor {lam} must be positive"));
    }
    Ok(ConePoint {
        polar: x.polar.iter().map(|&(r, t)| (lam * r, t)).collect(),
        s: x.s.iter().map(|v| lam * v).collect(),
    })
}

/// A cut-and-unroll chart of a ball, flattening selected cone factors.
#[derive(Clone, Debug)]
pub struct Chart {
    pub factors: Vec<usize>,
    pub origins: Vec<f64>,
    pub betas: Vec<f64>,
    pub center: ConePoint,
    pub radius: f64,
}

impl Chart {
    /// Planar coordinates of `y` in each developed factor.
    pub fn unfold(&self, y: &ConePoint) -> Vec<[f64; 2]> {
        self.factors
            .iter()
            .zip(self.origins.iter().zip(&self.betas))
            .map(|(&a, (&o, &b))| {
                let (r, t) = y.polar[a];
                let phi = b * wrap_angle(t - o);
                [r * phi.cos(), r * phi.sin()]
            })
            .collect()
    }

    /// Inverse of [`Chart::unfold`]: replace the developed factors of `base`.
    pub fn fold(&self, planes: &[[f64; 2]], base: &ConePoint) -> ConePoint {
        let mut out = base.clone();
        for ((&a, (&o, &b)), p) in self.factors.iter().zip(self.origins.iter().zip(&self.betas)).zip(planes) {
            let r = p[0].hypot(p[1]);
            let t = if r == 0.0 { 0.0 } else { canonical_angle(o + p[1].atan2(p[0]) / b) };
            out.polar[a] = (r, t);
        }
        out
    }

    /// Full Euclidean coordinates (developed planes then `s`), available when every
    /// cone factor is developed.
    pub fn to_euclidean(&self, y: &ConePoint) -> Option<Vec<f64>> {
        if self.factors.len() != y.polar.len() {
            return None;
        }
        let mut out: Vec<f64> = self.unfold(y).into_iter().flatten().collect();
        out.extend_from_slice(&y.s);
        Some(out)
    }
}

/// Develop the ball `B(center, radius)` in the listed cone factors.
///
/// Each listed factor must satisfy `radius < c_β r_a(center)`; the ball then lies
/// inside a wedge of the unrolled cone whose bisector passes through the center.
pub fn develop(spec: &ConeSpec, center: &ConePoint, radius: f64, factors: &[usize]) -> Result<Chart> {
    center.check(spec)?;
    if !(radius > 0.0) {
        return arg(format!("radius {radius} must be positive"));
    }
    for &a in factors {
        if a >= spec.n() {
            return arg(format!("factor index {a} out of range"));
        }
        let limit = c_beta(spec.betas[a]) * center.r(a);
        if !(radius < limit) {
            return Err(Error::Domain(format!(
                "ball of radius {radius} meets the singular ray of factor {a} (needs radius < c_β r = {limit})"
            )));
        }
    }
    Ok(Chart {
        factors: factors.to_vec(),
        origins: factors.iter().map(|&a| center.theta(a)).collect(),
        betas: factors.iter().map(|&a| spec.betas[a]).collect(),
        center: center.clone(),
        radius,
    })
}

/// Parameters of the good/bad scale classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub lambda: f64,
    pub eps0: f64,
    pub c_betas: Vec<f64>,
}

impl ScaleParams {
    pub fn new(spec: &ConeSpec, lambda: f64, eps0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return arg(format!("lambda = {lambda} must lie in (0, 1)"));
        }
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return arg(format!("eps0 = {eps0} must lie in (0, 1)"));
        }
        Ok(ScaleParams { lambda, eps0, c_betas: spec.betas.iter().map(|&b| c_beta(b)).collect() })
    }

    /// Distance from the vertex beyond which a unit ball develops in factor `a`.
    pub fn unit_threshold(&self, a: usize) -> f64 {
        1.0 / self.c_betas[a]
    }

    /// The constant `c` of the bad-scale count, taken as the largest unit threshold.
    pub fn c(&self) -> f64 {
        (0..self.c_betas.len()).map(|a| self.unit_threshold(a)).fold(1.0, f64::max)
    }
}

/// Status of a single scale `λ^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScaleStatus {
    Good {
        model: ConeSpec,
        /// Cone factors of the original spec that survive in the model.
        kept: Vec<usize>,
        /// Distance of the rescaled center to the model's singular stratum.
        center_distance: f64,
    },
    Bad,
}

impl ScaleStatus {
    pub fn is_good(&self) -> bool {
        matches!(self, ScaleStatus::Good { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEntry {
    pub k: i32,
    pub status: ScaleStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleClassification {
    pub entries: Vec<ScaleEntry>,
}

impl ScaleClassification {
    pub fn bad_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.status.is_good()).count()
    }

    pub fn status(&self, k: i32) -> Option<&ScaleStatus> {
        self.entries.iter().find(|e| e.k == k).map(|e| &e.status)
    }

    /// CSV with columns `k,status,model_betas,center_distance`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "status", "model_betas", "center_distance"])?;
        for e in &self.entries {
            match &e.status {
                ScaleStatus::Good { model, center_distance, .. } => {
                    let betas: Vec<String> = model.betas.iter().map(|b| b.to_string()).collect();
                    w.write_record([e.k.to_string(), "good".into(), betas.join(";"), center_distance.to_string()])?;
                }
                ScaleStatus::Bad => {
                    w.write_record([e.k.to_string(), "bad".into(), String::new(), String::new()])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Classify the scales `λ^k`, `k ∈ ks`, around `x`.
///
/// At scale `k` the rescaled radii are `y_a = λ^{-k} r_a(x)`. Factors with
/// `y_a < ε₀` stay conical in the model, factors with `y_a > 1/c_β` are flattened;
/// the scale is good exactly when every factor falls in one of the two groups.
pub fn classify_scales(
    spec: &ConeSpec,
    x: &ConePoint,
    params: &ScaleParams,
    ks: RangeInclusive<i32>,
) -> Result<ScaleClassification> {
    x.check(spec)?;
    if params.c_betas.len() != spec.n() {
        return arg("scale parameters do not match the cone product");
    }
    let entries = ks
        .map(|k| {
            let scale = params.lambda.powi(-k);
            let mut kept = Vec::new();
            let mut good = true;
            let mut dist2 = 0.0;
            for a in 0..spec.n() {
                let y = scale * x.r(a);
                if y < params.eps0 {
                    kept.push(a);
                    dist2 += y * y;
                } else if y <= params.unit_threshold(a) {
                    good = false;
                }
            }
            let status = if good {
                let betas = kept.iter().map(|&a| spec.betas[a]).collect();
                let flat = spec.n() - kept.len();
                ScaleStatus::Good {
                    model: ConeSpec::model(betas, spec.q() + 2 * flat),
                    kept,
                    center_distance: dist2.sqrt(),
                }
            } else {
                ScaleStatus::Bad
            };
            ScaleEntry { k, status }
        })
        .collect();
    Ok(ScaleClassification { entries })
}

/// The bound `N = n (log λ^{-1})^{-1} (log ε₀^{-1} + log c + ½ log n)` on the number of bad scales.
pub fn bad_scale_bound(spec: &ConeSpec, params: &ScaleParams) -> f64 {
    let n = spec.n() as f64;
    n / (1.0 / params.lambda).ln() * ((1.0 / params.eps0).ln() + params.c().ln() + 0.5 * n.ln())
}

/// A range of `k` containing every bad scale of `x` (empty when `x` is on all axes).
#[allow(clippy::reversed_empty_ranges)]
pub fn bad_scale_window(spec: &ConeSpec, x: &ConePoint, params: &ScaleParams) -> RangeInclusive<i32> {
    let l = (1.0 / params.lambda).ln();
    let mut lo = i32::MAX;
    let mut hi = i32::MIN;
    for a in 0..spec.n() {
        let r = x.r(a);
        if r > 0.0 {
            lo = lo.min(((params.eps0 / r).ln() / l).floor() as i32 - 1);
            hi = hi.max(((params.unit_threshold(a) / r).ln() / l).ceil() as i32 + 1);
        }
    }
    if lo > hi {
        1..=0
    } else {
        lo..=hi
    }
}

/// Volume estimate with its standard error; `exact` marks closed-form values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub exact: bool,
}

/// Riemannian volume of `B(center, radius)`.
///
/// Apex-centered balls use `(∏β_a) ω_m R^m`; other balls are integrated by
/// randomized quasi-Monte Carlo with a membership test.
pub fn ball_volume(spec: &ConeSpec, center: &ConePoint, radius: f64, qmc: &QmcConfig) -> Result<VolumeEstimate> {
    center.check(spec)?;
    if !(radius > 0.0) {
        return arg(format!("radius {radius} must be positive"));
    }
    if center.rho() == 0.0 {
        let value = spec.beta_product() * unit_ball_volume(spec.m()) * radius.powi(spec.m() as i32);
        return Ok(VolumeEstimate { value, stderr: 0.0, exact: true });
    }
    let rule = BallRule::new(spec, center, radius, qmc)?;
    let Estimate { value, stderr } = rule.integrate(|_| 1.0);
    Ok(VolumeEstimate { value, stderr, exact: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(polar: &[(f64, f64)], s: &[f64]) -> ConePoint {
        ConePoint::new(polar.to_vec(), s.to_vec())
    }

    #[test]
    fn spec_validation() {
        assert!(ConeSpec::new(vec![0.75], 1).is_ok());
        assert!(ConeSpec::new(vec![0.75], 0).is_err());
        assert!(ConeSpec::new(vec![1.0], 1).is_err());
        assert!(ConeSpec::new(vec![], 3).is_err());
        assert!(ConeSpec::new(vec![0.3, 0.9], 0).is_ok());
    }

    #[test]
    fn half_angle_law_of_cosines() {
        let spec = ConeSpec::new(vec![0.5], 1).unwrap();
        let x = pt(&[(1.0, 0.0)], &[0.0]);
        let y = pt(&[(1.0, PI)], &[0.0]);
        let d = distance(&spec, &x, &y).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn distance_to_apex_is_rho() {
        let spec = ConeSpec::new(vec![0.3, 0.8], 2).unwrap();
        let y = pt(&[(0.4, 1.0), (1.3, 5.0)], &[0.2, -0.7]);
        let d = distance(&spec, &ConePoint::apex(&spec), &y).unwrap();
        assert!((d - y.rho()).abs() < 1e-14);
    }

    #[test]
    fn mismatched_point_is_rejected() {
        let spec = ConeSpec::new(vec![0.3], 2).unwrap();
        let y = pt(&[(0.4, 1.0)], &[0.2]);
        assert!(matches!(distance(&spec, &y, &y), Err(Error::Argument(_))));
    }

    #[test]
    fn angle_is_irrelevant_on_axis() {
        let spec = ConeSpec::new(vec![0.6], 1).unwrap();
        let a = ConePoint { polar: vec![(0.0, 2.0)], s: vec![0.1] };
        let b = ConePoint { polar: vec![(0.0, 0.0)], s: vec![0.1] };
        let y = pt(&[(0.7, 3.0)], &[0.5]);
        assert_eq!(distance(&spec, &a, &y).unwrap(), distance(&spec, &b, &y).unwrap());
        assert_eq!(ConePoint::new(vec![(0.0, 2.0)], vec![0.1]), b);
    }

    #[test]
    fn dilation_identity_and_apex() {
        let spec = ConeSpec::new(vec![0.6], 1).unwrap();
        let x = pt(&[(0.7, 3.0)], &[0.5]);
        assert_eq!(dilate(&x, 1.0).unwrap(), x);
        let o = ConePoint::apex(&spec);
        assert_eq!(dilate(&o, 3.5).unwrap(), o);
        assert!(dilate(&x, 0.0).is_err());
    }

    #[test]
    fn develop_disc_criterion() {
        let spec = ConeSpec::new(vec![0.3], 1).unwrap();
        let c = pt(&[(0.5, 1.0)], &[0.0]);
        assert!(develop(&spec, &c, 0.3, &[0]).is_ok());
        assert!(matches!(develop(&spec, &c, 0.41, &[0]), Err(Error::Domain(_))));
        let axis = pt(&[(0.0, 0.0)], &[0.0]);
        assert!(matches!(develop(&spec, &axis, 0.1, &[0]), Err(Error::Domain(_))));
    }

    #[test]
    fn fold_inverts_unfold() {
        let spec = ConeSpec::new(vec![0.7, 0.4], 1).unwrap();
        let c = pt(&[(1.0, 6.0), (2.0, 0.1)], &[0.0]);
        let chart = develop(&spec, &c, 0.4, &[0, 1]).unwrap();
        let y = pt(&[(1.1, 0.2), (1.8, 6.2)], &[0.3]);
        let back = chart.fold(&chart.unfold(&y), &y);
        for a in 0..2 {
            assert!((back.r(a) - y.r(a)).abs() < 1e-14);
            assert!(wrap_angle(back.theta(a) - y.theta(a)).abs() < 1e-13);
        }
    }

    #[test]
    fn apex_scales_are_all_good() {
        let spec = ConeSpec::new(vec![0.7], 2).unwrap();
        let p = ScaleParams::new(&spec, 0.5, 0.05).unwrap();
        let c = classify_scales(&spec, &ConePoint::apex(&spec), &p, -5..=20).unwrap();
        for e in &c.entries {
            match &e.status {
                ScaleStatus::Good { model, center_distance, .. } => {
                    assert_eq!(model, &spec);
                    assert_eq!(*center_distance, 0.0);
                }
                ScaleStatus::Bad => panic!("apex has no bad scale"),
            }
        }
    }

    #[test]
    fn explicit_partition_near_axis() {
        // r = 0.01: 2^k r < 0.05 for k ≤ 2, and 2^k r > 1 for k ≥ 7.
        let spec = ConeSpec::new(vec![0.7], 2).unwrap();
        let p = ScaleParams::new(&spec, 0.5, 0.05).unwrap();
        let x = pt(&[(0.01, 1.0)], &[0.3, 0.1]);
        let c = classify_scales(&spec, &x, &p, 0..=9).unwrap();
        let good: Vec<bool> = c.entries.iter().map(|e| e.status.is_good()).collect();
        assert_eq!(good, vec![true, true, true, false, false, false, false, true, true, true]);
        match c.status(7).unwrap() {
            ScaleStatus::Good { model, kept, .. } => {
                assert!(model.betas.is_empty());
                assert_eq!(model.euclidean_dim, 4);
                assert!(kept.is_empty());
            }
            _ => unreachable!(),
        }
        match c.status(2).unwrap() {
            ScaleStatus::Good { center_distance, .. } => assert!((center_distance - 0.04).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!(c.to_csv().unwrap().starts_with("k,status,model_betas,center_distance\n0,good,0.7,"));
    }

    #[test]
    fn apex_volume_is_exact() {
        let spec = ConeSpec::new(vec![0.5, 0.25], 1).unwrap();
        let v = ball_volume(&spec, &ConePoint::apex(&spec), 2.0, &QmcConfig::default()).unwrap();
        assert!(v.exact);
        assert!((v.value - 0.125 * unit_ball_volume(5) * 32.0).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }
}
