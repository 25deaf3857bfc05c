//! Scale-by-scale subtraction of subquadratic harmonic functions.
//!
//! At a good scale `λ^k` the ball `B(x, λ^k)` is close to a ball in a model cone:
//! factors with small rescaled radius stay conical and the others are flattened
//! through their developing maps. The model's `ℋ_{≤2}` is pulled back to the
//! original coordinates, `u_k` is projected onto it in `L²(B(x, λ^k))`, and the
//! projection is subtracted. At bad scales nothing is subtracted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{fit_decay, pointwise_holder, scaled_norm_on, LogLogFit};
use crate::error::{arg, Error, Result};
use crate::expr::{Angular, Expr, Wave};
use crate::geometry::{classify_scales, ConePoint, ConeSpec, ScaleParams, ScaleStatus};
use crate::quadrature::{BallRule, Estimate, QmcConfig};
use crate::solver::spectral::solve_dirichlet_apex;
use crate::spectrum::{mu, project_onto, subquadratic_basis, DerivativeOp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchauderConfig {
    pub lambda: f64,
    pub eps0: f64,
    /// Scales `k = 0, …, k_max` are visited.
    pub k_max: i32,
    pub qmc: QmcConfig,
}

impl Default for SchauderConfig {
    fn default() -> Self {
        SchauderConfig {
            lambda: 0.5,
            eps0: 0.05,
            k_max: 14,
            qmc: QmcConfig { points: 4096, replicates: 8, seed: 0x5EED },
        }
    }
}

/// `ℋ_{≤2}` of the model cone at `x`, written in the coordinates of `spec`.
///
/// Factors in `kept` stay conical. Each other factor `a` contributes the
/// developed coordinates `X = r cos(β(θ − θ_x)) − r_x`, `Y = r sin(β(θ − θ_x))`;
/// Euclidean coordinates are centered at `x`.
pub fn model_basis(spec: &ConeSpec, x: &ConePoint, kept: &[usize]) -> Vec<(String, Expr)> {
    let (n, q) = (spec.n(), spec.q());
    let flat: Vec<usize> = (0..n).filter(|a| !kept.contains(a)).collect();
    let model = ConeSpec::model(kept.iter().map(|&a| spec.betas[a]).collect(), q + 2 * flat.len());
    let mut subs = Vec::with_capacity(model.q());
    for i in 0..q {
        subs.push(Expr::s_pow(n, q, i, 1).sub(&Expr::constant(n, q, x.s[i])));
    }
    for &a in &flat {
        let (b, t) = (spec.betas[a], x.theta(a));
        subs.push(Expr::cone_wave(n, q, a, 1.0, 1.0, Angular::new(b, Wave::Cos, t)).sub(&Expr::constant(n, q, x.r(a))));
        subs.push(Expr::cone_wave(n, q, a, 1.0, 1.0, Angular::new(b, Wave::Sin, t)));
    }
    subquadratic_basis(&model).into_iter().map(|m| (m.label, m.expr.compose(n, q, kept, &subs))).collect()
}

/// Record of one scale of the iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceScale {
    pub k: i32,
    pub radius: f64,
    pub good: bool,
    pub model_betas: Vec<f64>,
    pub center_distance: Option<f64>,
    /// `‖u_k‖_{B(x, λ^k)}` before the subtraction at this scale.
    pub norm: Estimate,
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub coefficient_stderr: Vec<f64>,
    /// `τ_k = D P_k(x)` per operator.
    pub tau: Vec<f64>,
    /// Replicate standard error of `τ_k`.
    pub tau_stderr: Vec<f64>,
    pub gram_condition: Option<f64>,
    pub regularization: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationTrace {
    pub x: ConePoint,
    pub alpha: f64,
    pub ops: Vec<String>,
    pub scales: Vec<TraceScale>,
    /// `τ = Σ_k τ_k` per operator.
    pub tau: Vec<f64>,
    /// Quadrature noise floor of `τ`: root sum of squares of the per-scale errors.
    pub tau_stderr: Vec<f64>,
    /// First scale after the last bad one.
    pub tail_start: i32,
    /// Log–log fit of `‖u_k‖_{B(x,λ^k)}` against `λ^k` for `k > tail_start`.
    pub decay: Option<LogLogFit>,
    /// `C = max_k ‖u_k‖_{B(x,λ^k)} / λ^{(2+α)k}`.
    pub decay_constant: f64,
    /// True when fewer than three scales follow the last bad one, so no decay fit is made.
    pub truncated: bool,
    /// The polynomial `Σ_k P_k`.
    pub subtracted: Expr,
}

/// Run the iteration at `x` for the operators `ops`.
pub fn schauder_iterate(
    spec: &ConeSpec,
    u: &(dyn Fn(&ConePoint) -> f64 + Sync),
    x: &ConePoint,
    alpha: f64,
    ops: &[DerivativeOp],
    cfg: &SchauderConfig,
) -> Result<IterationTrace> {
    x.check(spec)?;
    for op in ops {
        op.validate(spec)?;
    }
    if cfg.k_max < 0 {
        return arg("k_max must be nonnegative");
    }
    let params = ScaleParams::new(spec, cfg.lambda, cfg.eps0)?;
    let classes = classify_scales(spec, x, &params, 0..=cfg.k_max)?;
    let (n, q) = (spec.n(), spec.q());
    let mut subtracted = Expr::zero(n, q);
    let mut scales = Vec::new();
    let mut tau = vec![0.0; ops.len()];
    let mut var = vec![0.0; ops.len()];
    for entry in &classes.entries {
        let k = entry.k;
        let radius = cfg.lambda.powi(k);
        let rule = BallRule::new(spec, x, radius, &cfg.qmc)?;
        let p_now = subtracted.clone();
        let uk = |y: &ConePoint| u(y) - p_now.eval(y);
        let norm = scaled_norm_on(spec, &uk, &rule)?;
        let mut rec = TraceScale {
            k,
            radius,
            good: false,
            model_betas: Vec::new(),
            center_distance: None,
            norm,
            labels: Vec::new(),
            coefficients: Vec::new(),
            coefficient_stderr: Vec::new(),
            tau: vec![0.0; ops.len()],
            tau_stderr: vec![0.0; ops.len()],
            gram_condition: None,
            regularization: None,
        };
        if let ScaleStatus::Good { model, kept, center_distance } = &entry.status {
            let basis = model_basis(spec, x, kept);
            let proj = project_onto(&basis, &uk, &rule)?;
            for (o, op) in ops.iter().enumerate() {
                let dvals: Vec<f64> =
                    proj.basis.iter().map(|b| op.apply(spec, b).eval_limit(x)).collect::<Result<_>>()?;
                let dot = |c: &[f64]| c.iter().zip(&dvals).map(|(a, b)| a * b).sum::<f64>();
                rec.tau[o] = dot(&proj.coefficients);
                let reps: Vec<f64> = proj.replicate_coefficients.iter().map(|c| dot(c)).collect();
                rec.tau_stderr[o] = Estimate::from_replicates(&reps).stderr;
                tau[o] += rec.tau[o];
                var[o] += rec.tau_stderr[o].powi(2);
            }
            subtracted = subtracted.add(&proj.polynomial());
            rec.good = true;
            rec.model_betas = model.betas.clone();
            rec.center_distance = Some(*center_distance);
            rec.labels = proj.labels.clone();
            rec.coefficients = proj.coefficients.clone();
            rec.coefficient_stderr = proj.coefficient_stderr.clone();
            rec.gram_condition = Some(proj.gram_condition);
            rec.regularization = proj.regularization;
        }
        scales.push(rec);
    }
    let tail_start = scales.iter().rev().find(|s| !s.good).map(|s| s.k + 1).unwrap_or(0);
    let tail: Vec<&TraceScale> = scales.iter().filter(|s| s.k > tail_start).collect();
    let decay = if tail.len() >= 3 {
        let r: Vec<f64> = tail.iter().map(|s| s.radius).collect();
        let v: Vec<Estimate> = tail.iter().map(|s| s.norm).collect();
        fit_decay(&r, &v).ok()
    } else {
        None
    };
    let decay_constant = scales.iter().map(|s| s.norm.value / s.radius.powf(2.0 + alpha)).fold(0.0, f64::max);
    Ok(IterationTrace {
        x: x.clone(),
        alpha,
        ops: ops.iter().map(|o| o.name()).collect(),
        scales,
        tau,
        tau_stderr: var.iter().map(|v| v.sqrt()).collect(),
        tail_start,
        decay,
        decay_constant,
        truncated: decay.is_none(),
        subtracted,
    })
}

/// Campanato data of `Du − τ` at one point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoelderScale {
    pub radius: f64,
    /// `‖Du − τ‖_{B(x,ρ)}`
    pub norm: Estimate,
    /// `norm / ρ^α`
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoelderReport {
    pub op: String,
    pub alpha: f64,
    pub tau: f64,
    pub tau_stderr: f64,
    /// `Du(x)` from the closed form when the limit exists.
    pub tau_exact: Option<f64>,
    /// `K = max_ρ ‖Du − τ‖_{B(x,ρ)} / ρ^α`.
    pub k: f64,
    pub slope: Option<LogLogFit>,
    pub scales: Vec<HoelderScale>,
}

/// Campanato constant of `Du − τ` over the radii.
#[allow(clippy::too_many_arguments)]
pub fn hoelder_report(
    spec: &ConeSpec,
    u: &Expr,
    op: &DerivativeOp,
    x: &ConePoint,
    tau: (f64, f64),
    alpha: f64,
    radii: &[f64],
    qmc: &QmcConfig,
) -> Result<HoelderReport> {
    let du = op.apply(spec, u);
    let f = |y: &ConePoint| du.eval(y) - tau.0;
    let mut scales = Vec::with_capacity(radii.len());
    for &rad in radii {
        let rule = BallRule::new(spec, x, rad, qmc)?;
        let norm = scaled_norm_on(spec, &f, &rule)?;
        scales.push(HoelderScale { radius: rad, norm, ratio: norm.value / rad.powf(alpha) });
    }
    let k = scales.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let r: Vec<f64> = scales.iter().map(|s| s.radius).collect();
    let v: Vec<Estimate> = scales.iter().map(|s| s.norm).collect();
    Ok(HoelderReport {
        op: op.name(),
        alpha,
        tau: tau.0,
        tau_stderr: tau.1,
        tau_exact: du.eval_limit(x).ok(),
        k,
        slope: fit_decay(&r, &v).ok(),
        scales,
    })
}

/// The source `(1 − ρ²/4)² (1 + ½ s₁ + 0.3 r₁^{1/β₁} cos θ₁)`, smooth in the cone sense and zero on `∂B₂`.
///
/// The `s₁` term is omitted when `q = 0`.
pub fn default_source(spec: &ConeSpec) -> Expr {
    let (n, q) = (spec.n(), spec.q());
    let w = Expr::constant(n, q, 1.0).sub(&Expr::rho2(n, q).scale(0.25));
    let mut tilt = Expr::constant(n, q, 1.0).add(&Expr::cone_wave(
        n,
        q,
        0,
        0.3,
        1.0 / spec.betas[0],
        Angular::new(1.0, Wave::Cos, 0.0),
    ));
    if q > 0 {
        tilt = tilt.add(&Expr::s_pow(n, q, 0, 1).scale(0.5));
    }
    w.mul(&w).mul(&tilt)
}

/// Deterministic points in `B(apex, 0.9)`: the first `on_axis` have `r₁ = 0`, the
/// rest have `r₁` log-uniform in `[5·10⁻³, 0.7]`.
pub fn sample_points(spec: &ConeSpec, total: usize, on_axis: usize, seed: u64) -> Vec<ConePoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let axis = out.len() < on_axis;
        let polar: Vec<(f64, f64)> = (0..spec.n())
            .map(|a| {
                if axis && a == 0 {
                    (0.0, 0.0)
                } else {
                    let r = (rng.random_range(5e-3f64.ln()..0.7f64.ln())).exp();
                    (r, rng.random_range(0.0..std::f64::consts::TAU))
                }
            })
            .collect();
        let s: Vec<f64> = (0..spec.q()).map(|_| rng.random_range(-0.6..0.6)).collect();
        let x = ConePoint::new(polar, s);
        if x.rho() < 0.9 {
            out.push(x);
        }
    }
    out
}

/// Settings of a full verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub iteration: SchauderConfig,
    /// Highest degree kept by the spectral solve.
    pub d_max: f64,
    /// Radius of the apex ball on which `Δu = f` is solved.
    pub domain_radius: f64,
    /// Quadrature used for the Hölder quotient of `f` and the norm on the domain.
    pub data_qmc: QmcConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            iteration: SchauderConfig::default(),
            d_max: 16.0,
            domain_radius: 2.0,
            data_qmc: QmcConfig { points: 4096, replicates: 4, seed: 0x5EED },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointReport {
    pub x: ConePoint,
    pub f_value: f64,
    pub f_holder: f64,
    pub u_norm: f64,
    /// `max_D (|τ_D| + K_D)`
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub reports: Vec<HoelderReport>,
    pub trace: IterationTrace,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchauderVerification {
    pub spec: ConeSpec,
    pub alpha: f64,
    pub points: Vec<PointReport>,
    /// `max ratio / min ratio` over the points.
    pub spread: f64,
    pub all_finite: bool,
}

/// Solve `Δu = f` on the apex ball, run the iteration at every point and compare
/// `|τ| + K` with `|f(x)| + |f|_{C^α(x)} + ‖u‖_{L²}`.
///
/// Before iterating, `u` is replaced by `u − f(x) r₁²/4`, which has Laplacian
/// `f − f(x)`; the constant `D(r₁²/4)` is added back to `τ`.
pub fn verify_schauder(
    spec: &ConeSpec,
    f: &Expr,
    points: &[ConePoint],
    alpha: f64,
    cfg: &VerifyConfig,
) -> Result<SchauderVerification> {
    let mu_spec = mu(spec);
    if !(alpha > 0.0 && alpha < mu_spec) {
        return Err(Error::Scope { alpha, mu: mu_spec });
    }
    if points.is_empty() {
        return arg("verify_schauder needs at least one point");
    }
    for x in points {
        x.check(spec)?;
        if x.rho() >= 1.0 {
            return arg(format!("point {x:?} is not in the unit ball"));
        }
    }
    let sol = solve_dirichlet_apex(spec, f, None, cfg.domain_radius, cfg.d_max)?;
    let apex = ConePoint::apex(spec);
    let domain = BallRule::new(spec, &apex, cfg.domain_radius, &cfg.data_qmc)?;
    let u_norm = domain.integrate(|y| sol.u.eval(y).powi(2)).value.max(0.0).sqrt();
    let ops = DerivativeOp::family(spec);
    let (n, q) = (spec.n(), spec.q());
    let quarter_r2 = Expr::r_pow(n, q, 0, 2.0).scale(0.25);
    let radii: Vec<f64> = (0..=cfg.iteration.k_max).map(|k| cfg.iteration.lambda.powi(k)).collect();
    let reports: Vec<Result<PointReport>> = points
        .par_iter()
        .map(|x| {
            let fx = f.eval_limit(x)?;
            let f_holder = pointwise_holder(spec, &|y| f.eval(y), x, alpha, 1.0, &cfg.data_qmc)?;
            let shifted = sol.u.sub(&quarter_r2.scale(fx));
            let trace = schauder_iterate(spec, &|y| shifted.eval(y), x, alpha, &ops, &cfg.iteration)?;
            let mut hr = Vec::with_capacity(ops.len());
            for (o, op) in ops.iter().enumerate() {
                let mut rep = hoelder_report(
                    spec,
                    &shifted,
                    op,
                    x,
                    (trace.tau[o], trace.tau_stderr[o]),
                    alpha,
                    &radii,
                    &cfg.iteration.qmc,
                )?;
                let shift = fx * op.apply(spec, &quarter_r2).eval_limit(x)?;
                rep.tau += shift;
                rep.tau_exact = op.apply(spec, &sol.u).eval_limit(x).ok();
                hr.push(rep);
            }
            let numerator = hr.iter().map(|r| r.tau.abs() + r.k).fold(0.0, f64::max);
            let denominator = fx.abs() + f_holder + u_norm;
            Ok(PointReport {
                x: x.clone(),
                f_value: fx,
                f_holder,
                u_norm,
                numerator,
                denominator,
                ratio: numerator / denominator,
                reports: hr,
                trace,
            })
        })
        .collect();
    let points: Vec<PointReport> = reports.into_iter().collect::<Result<_>>()?;
    let all_finite = points.iter().all(|p| p.ratio.is_finite() && p.ratio > 0.0);
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| (a.min(p.ratio), b.max(p.ratio)));
    Ok(SchauderVerification { spec: spec.clone(), alpha, points, spread: hi / lo, all_finite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{modes_of_degree, ConePart};

    #[test]
    fn subquadratic_input_terminates_in_one_step() {
        let spec = ConeSpec::new(vec![0.75], 1).unwrap();
        let basis = subquadratic_basis(&spec);
        let u = basis[2].expr.add(&basis[4].expr.scale(0.5)).add(&Expr::constant(1, 1, 1.0));
        let x = ConePoint::apex(&spec);
        let ops = DerivativeOp::family(&spec);
        let cfg = SchauderConfig { k_max: 4, ..Default::default() };
        let t = schauder_iterate(&spec, &|y| u.eval(y), &x, 0.25, &ops, &cfg).unwrap();
        assert!(t.scales[1].norm.value < 1e-10, "{:?}", t.scales[1].norm);
        for (o, op) in ops.iter().enumerate() {
            let exact = op.apply(&spec, &u).eval_limit(&x).unwrap();
            assert!((t.tau[o] - exact).abs() < 1e-9, "{}: {} vs {exact}", op.name(), t.tau[o]);
        }
    }

    #[test]
    fn homogeneous_mode_decays_at_its_degree() {
        let spec = ConeSpec::new(vec![0.75], 1).unwrap();
        let m = modes_of_degree(&spec, 7.0 / 3.0)
            .unwrap()
            .into_iter()
            .find(|m| m.label.contains("cos1") && m.label.contains("s1:s"))
            .unwrap();
        let d = DerivativeOp::MixedConeEuclidean { a: 0, i: 0, part: ConePart::Radial };
        let cfg = SchauderConfig { k_max: 6, ..Default::default() };
        let t = schauder_iterate(&spec, &|y| m.expr.eval(y), &ConePoint::apex(&spec), 0.25, &[d], &cfg).unwrap();
        let fit = t.decay.unwrap();
        assert!((fit.slope - 7.0 / 3.0).abs() < 0.05, "{fit:?}");
        assert!(t.tau[0].abs() <= 10.0 * t.tau_stderr[0] + 1e-12);
    }

    #[test]
    fn flattened_basis_is_harmonic() {
        let spec = ConeSpec::new(vec![0.3, 0.8], 1).unwrap();
        let x = ConePoint::new(vec![(0.0, 0.0), (0.6, 2.0)], vec![0.1]);
        for (label, e) in model_basis(&spec, &x, &[0]) {
            assert!(e.laplacian(&spec.betas).max_abs_coef() < 1e-12, "{label}");
        }
        assert_eq!(model_basis(&spec, &x, &[0]).len(), 1 + 3 + 5 + 3);
    }

    #[test]
    fn scope_is_checked() {
        let spec = ConeSpec::new(vec![0.75], 1).unwrap();
        let f = Expr::constant(1, 1, 1.0);
        let e = verify_schauder(&spec, &f, &[ConePoint::apex(&spec)], 0.4, &VerifyConfig::default());
        assert!(matches!(e, Err(Error::Scope { .. })));
    }
}
