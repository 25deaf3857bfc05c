//! Indicial roots, homogeneous harmonic functions and the operator family `𝒟₂`.
//!
//! Harmonic modes are built by joining factors one at a time. If `u_L` and `u_F`
//! are homogeneous harmonic of degrees `γ_L`, `γ_F` on spaces of dimension
//! `m_L`, `m_F` with squared radii `t_L`, `t_F`, then
//! `u_L u_F Q_j(t_L, t_F)` is harmonic of degree `γ_L + γ_F + 2j` when
//! `Q_j = Σ_i c_i t_L^i t_F^{j−i}` with `c_0 = 1` and
//! `c_{i+1} A(i+1) + c_i B(j−i) = 0`, where `A(i) = 2i(2i − 2 + m_L + 2γ_L)` and
//! `B(k) = 2k(2k − 2 + m_F + 2γ_F)`. In the angle variable `x = sin²ψ` this is the
//! polynomial family of the hypergeometric link operator.
//! Cone factors start from `1` and `r^{k/β} cos kθ`, `r^{k/β} sin kθ`; each
//! Euclidean line starts from `1` and `s`.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::expr::{Angular, Expr, Wave};
use crate::geometry::{ConePoint, ConeSpec};
use crate::quadrature::{BallRule, Estimate};

const DEGREE_TOL: f64 = 1e-9;

/// The Hölder exponent cap `μ = min{1, 1/β − 1 (β ≥ ½), 1/β − 2 (β < ½)}`.
pub fn mu(spec: &ConeSpec) -> f64 {
    spec.betas.iter().map(|&b| if b >= 0.5 { 1.0 / b - 1.0 } else { 1.0 / b - 2.0 }).fold(1.0, f64::min)
}

/// Starting function of one factor in the join.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BasePiece {
    /// `r_a^{k/β_a}` times `cos kθ_a` or `sin kθ_a`; `k = 0` is the constant.
    Cone { a: usize, k: u32, wave: Wave },
    /// `1` or `s_i`.
    Line { i: usize, odd: bool },
}

/// How a mode was generated: one base piece per factor and one index per join.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub pieces: Vec<BasePiece>,
    pub joins: Vec<u32>,
}

impl Recipe {
    pub fn label(&self) -> String {
        let pieces: Vec<String> = self
            .pieces
            .iter()
            .map(|p| match *p {
                BasePiece::Cone { a, k: 0, .. } => format!("c{}:1", a + 1),
                BasePiece::Cone { a, k, wave } => {
                    let w = if wave == Wave::Cos { "cos" } else { "sin" };
                    format!("c{}:{w}{k}", a + 1)
                }
                BasePiece::Line { i, odd } => format!("s{}:{}", i + 1, if odd { "s" } else { "1" }),
            })
            .collect();
        let joins: Vec<String> = self.joins.iter().map(|j| j.to_string()).collect();
        format!("{} j=[{}]", pieces.join(" "), joins.join(","))
    }
}

/// A homogeneous harmonic function `ρ^d φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMode {
    pub degree: f64,
    pub label: String,
    pub recipe: Option<Recipe>,
    pub expr: Expr,
}

impl HarmonicMode {
    /// Link eigenvalue `d(d + m − 2)`.
    pub fn eigenvalue(&self, spec: &ConeSpec) -> f64 {
        self.degree * (self.degree + spec.m() as f64 - 2.0)
    }

    pub fn eval(&self, x: &ConePoint) -> f64 {
        self.expr.eval(x)
    }
}

/// Value of a mode at a point.
pub fn eval_mode(mode: &HarmonicMode, x: &ConePoint) -> f64 {
    mode.expr.eval(x)
}

struct Factor {
    dim: usize,
    /// Squared radius of the factor as a function on the full cone.
    t: Expr,
    pieces: Vec<(f64, BasePiece, Expr)>,
}

fn factors(spec: &ConeSpec, d_max: f64) -> Vec<Factor> {
    let (n, q) = (spec.n(), spec.q());
    let mut out = Vec::new();
    for (a, &b) in spec.betas.iter().enumerate() {
        let mut pieces = vec![(0.0, BasePiece::Cone { a, k: 0, wave: Wave::Cos }, Expr::constant(n, q, 1.0))];
        let mut k = 1u32;
        while k as f64 / b <= d_max + DEGREE_TOL {
            let g = k as f64 / b;
            for wave in [Wave::Cos, Wave::Sin] {
                let e = Expr::cone_wave(n, q, a, 1.0, g, Angular::new(k as f64, wave, 0.0));
                pieces.push((g, BasePiece::Cone { a, k, wave }, e));
            }
            k += 1;
        }
        out.push(Factor { dim: 2, t: Expr::r_pow(n, q, a, 2.0), pieces });
    }
    for i in 0..q {
        let mut pieces = vec![(0.0, BasePiece::Line { i, odd: false }, Expr::constant(n, q, 1.0))];
        if d_max + DEGREE_TOL >= 1.0 {
            pieces.push((1.0, BasePiece::Line { i, odd: true }, Expr::s_pow(n, q, i, 1)));
        }
        out.push(Factor { dim: 1, t: Expr::s_pow(n, q, i, 2), pieces });
    }
    out
}

/// The join polynomial `Q_j(t_L, t_F)`.
fn join_polynomial(t_l: &Expr, t_f: &Expr, m_l: usize, g_l: f64, m_f: usize, g_f: f64, j: u32) -> Expr {
    let a = |i: f64| 2.0 * i * (2.0 * i - 2.0 + m_l as f64 + 2.0 * g_l);
    let b = |k: f64| 2.0 * k * (2.0 * k - 2.0 + m_f as f64 + 2.0 * g_f);
    let mut c = 1.0;
    let mut out = Expr::zero(t_l.n, t_l.q);
    for i in 0..=j {
        out = out.add(&t_l.powi(i).mul(&t_f.powi(j - i)).scale(c));
        c *= -b((j - i) as f64) / a((i + 1) as f64);
    }
    out
}

struct Partial {
    degree: f64,
    dim: usize,
    t: Expr,
    expr: Expr,
    pieces: Vec<BasePiece>,
    joins: Vec<u32>,
}

/// All harmonic modes of degree at most `d_max` generated by the join recursion.
pub fn harmonic_modes(spec: &ConeSpec, d_max: f64) -> Result<Vec<HarmonicMode>> {
    if !(d_max >= 0.0) {
        return arg(format!("d_max = {d_max} must be nonnegative"));
    }
    let fs = factors(spec, d_max);
    let mut partials: Vec<Partial> = fs[0]
        .pieces
        .iter()
        .map(|(g, p, e)| Partial {
            degree: *g,
            dim: fs[0].dim,
            t: fs[0].t.clone(),
            expr: e.clone(),
            pieces: vec![*p],
            joins: Vec::new(),
        })
        .collect();
    for f in &fs[1..] {
        let mut next = Vec::new();
        for pl in &partials {
            for (g, piece, e) in &f.pieces {
                let mut j = 0u32;
                while pl.degree + g + 2.0 * j as f64 <= d_max + DEGREE_TOL {
                    let qj = join_polynomial(&pl.t, &f.t, pl.dim, pl.degree, f.dim, *g, j);
                    let mut pieces = pl.pieces.clone();
                    pieces.push(*piece);
                    let mut joins = pl.joins.clone();
                    joins.push(j);
                    next.push(Partial {
                        degree: pl.degree + g + 2.0 * j as f64,
                        dim: pl.dim + f.dim,
                        t: pl.t.add(&f.t),
                        expr: pl.expr.mul(e).mul(&qj),
                        pieces,
                        joins,
                    });
                    j += 1;
                }
            }
        }
        partials = next;
    }
    let mut modes: Vec<HarmonicMode> = partials
        .into_iter()
        .map(|p| {
            let scale = p.expr.max_abs_coef();
            let recipe = Recipe { pieces: p.pieces, joins: p.joins };
            HarmonicMode {
                degree: p.degree,
                label: recipe.label(),
                recipe: Some(recipe),
                expr: p.expr.scale(1.0 / scale),
            }
        })
        .collect();
    modes.sort_by(|a, b| a.degree.total_cmp(&b.degree));
    Ok(modes)
}

/// Modes whose degree equals `d` within the merge tolerance.
pub fn modes_of_degree(spec: &ConeSpec, d: f64) -> Result<Vec<HarmonicMode>> {
    Ok(harmonic_modes(spec, d + 1e-6)?.into_iter().filter(|m| (m.degree - d).abs() < DEGREE_TOL).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    pub degree: f64,
    pub multiplicity: usize,
    pub recipes: Vec<String>,
}

/// Nonnegative indicial roots up to `d_max` with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootTable {
    pub spec: ConeSpec,
    pub d_max: f64,
    pub entries: Vec<RootEntry>,
}

impl RootTable {
    pub fn degrees(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.degree).collect()
    }

    /// Link eigenvalues `d(d + m − 2)` repeated by multiplicity, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.spec.m() as f64;
        self.entries.iter().flat_map(|e| std::iter::repeat_n(e.degree * (e.degree + m - 2.0), e.multiplicity)).collect()
    }

    /// CSV with columns `degree,multiplicity,recipe`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["degree", "multiplicity", "recipe"])?;
        for e in &self.entries {
            w.write_record([e.degree.to_string(), e.multiplicity.to_string(), e.recipes.join(" | ")])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn enumerate_roots(spec: &ConeSpec, d_max: f64) -> Result<RootTable> {
    let modes = harmonic_modes(spec, d_max)?;
    let mut entries: Vec<RootEntry> = Vec::new();
    for m in modes {
        match entries.last_mut() {
            Some(e) if (e.degree - m.degree).abs() < DEGREE_TOL => {
                e.multiplicity += 1;
                e.recipes.push(m.label);
            }
            _ => entries.push(RootEntry { degree: m.degree, multiplicity: 1, recipes: vec![m.label] }),
        }
    }
    Ok(RootTable { spec: spec.clone(), d_max, entries })
}

/// The first root above 2 from the explicit list of candidate degrees.
pub fn d_star_closed_form(spec: &ConeSpec) -> f64 {
    let inv: Vec<f64> = spec.betas.iter().map(|b| 1.0 / b).collect();
    let mut best: f64 = 4.0;
    if spec.q() >= 1 {
        best = best.min(3.0);
    }
    for (a, &ia) in inv.iter().enumerate() {
        let k = (2.0 / ia).floor() + 1.0;
        best = best.min(k * ia).min(ia + 2.0);
        if spec.q() >= 1 {
            best = best.min(ia + 1.0);
        }
        for &ib in &inv[a + 1..] {
            best = best.min(ia + ib);
        }
    }
    best
}

/// Smallest indicial root strictly above 2, checked against [`d_star_closed_form`].
pub fn d_star(spec: &ConeSpec) -> Result<f64> {
    let closed = d_star_closed_form(spec);
    let table = enumerate_roots(spec, closed + 0.5)?;
    let found = table
        .degrees()
        .into_iter()
        .find(|&d| d > 2.0 + DEGREE_TOL)
        .ok_or_else(|| Error::Numerical("no indicial root above 2 below the closed-form bound".into()))?;
    if (found - closed).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "first root above 2 from the recursion ({found}) disagrees with the closed form ({closed})"
        )));
    }
    Ok(found)
}

fn mode(degree: f64, label: impl Into<String>, expr: Expr) -> HarmonicMode {
    HarmonicMode { degree, label: label.into(), recipe: None, expr }
}

/// The spanning set of `ℋ_{≤2}`: homogeneous harmonic functions of degree at most 2.
///
/// The list may be linearly dependent (for instance `r² − 2s_1²` and `r² − 2s_2²`
/// together with `s_1² − s_2²`); [`project_subquadratic`] reduces it.
pub fn subquadratic_basis(spec: &ConeSpec) -> Vec<HarmonicMode> {
    let (n, q) = (spec.n(), spec.q());
    let mut out = vec![mode(0.0, "1", Expr::constant(n, q, 1.0))];
    for i in 0..q {
        out.push(mode(1.0, format!("s{}", i + 1), Expr::s_pow(n, q, i, 1)));
    }
    for (a, &b) in spec.betas.iter().enumerate() {
        if b >= 0.5 {
            for (wave, name) in [(Wave::Cos, "cos"), (Wave::Sin, "sin")] {
                let e = Expr::cone_wave(n, q, a, 1.0, 1.0 / b, Angular::new(1.0, wave, 0.0));
                out.push(mode(1.0 / b, format!("r{0}^(1/β{0})·{name}θ{0}", a + 1), e));
            }
        }
    }
    for i in 0..q {
        for j in i + 1..q {
            let e = Expr::s_pow(n, q, i, 1).mul(&Expr::s_pow(n, q, j, 1));
            out.push(mode(2.0, format!("s{}·s{}", i + 1, j + 1), e));
        }
    }
    for i in 1..q {
        let mut e = Expr::s_pow(n, q, i, 2).scale(-(i as f64));
        for l in 0..i {
            e = e.add(&Expr::s_pow(n, q, l, 2));
        }
        out.push(mode(2.0, format!("Σ_{{l≤{i}}} s_l² − {i}·s{}²", i + 1), e));
    }
    for a in 0..n {
        for b in a + 1..n {
            let e = Expr::r_pow(n, q, a, 2.0).sub(&Expr::r_pow(n, q, b, 2.0));
            out.push(mode(2.0, format!("r{}² − r{}²", a + 1, b + 1), e));
        }
    }
    for a in 0..n {
        for i in 0..q {
            let e = Expr::r_pow(n, q, a, 2.0).sub(&Expr::s_pow(n, q, i, 2).scale(2.0));
            out.push(mode(2.0, format!("r{}² − 2s{}²", a + 1, i + 1), e));
        }
    }
    out
}

/// Radial or angular first derivative in a cone factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConePart {
    /// `∂_{r}`
    Radial,
    /// `r^{-1} ∂_θ`
    Angular,
}

/// Component pair of a second derivative that involves cone derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConePair {
    RadialRadial,
    AngularAngular,
    /// `∂_{r_a}` with the angular derivative of the second factor.
    RadialAngular,
}

/// An element of the operator family `𝒟₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeOp {
    /// `∂²/∂s_i∂s_j`
    PureEuclidean { i: usize, j: usize },
    /// `∂²/∂r_a∂s_i` or `r_a^{-1} ∂²/∂θ_a∂s_i`
    MixedConeEuclidean { a: usize, i: usize, part: ConePart },
    /// `∂²/∂r_a∂r_b`, `(r_a r_b)^{-1} ∂²/∂θ_a∂θ_b` or `r_b^{-1} ∂²/∂r_a∂θ_b`, with `a ≠ b`
    MixedConeCone { a: usize, b: usize, pair: ConePair },
    /// `Δ_{β_a}`
    ConeLaplacian { a: usize },
    /// `∂²/∂r_a²`, `r_a^{-2} ∂²/∂θ_a²` or `r_a^{-1} ∂²/∂r_a∂θ_a`; only for `β_a < ½`
    PureConical { a: usize, pair: ConePair },
}

impl DerivativeOp {
    /// Every operator of `𝒟₂` for the given cone product.
    pub fn family(spec: &ConeSpec) -> Vec<DerivativeOp> {
        use DerivativeOp::*;
        let (n, q) = (spec.n(), spec.q());
        let mut out = Vec::new();
        for i in 0..q {
            for j in i..q {
                out.push(PureEuclidean { i, j });
            }
        }
        for a in 0..n {
            for i in 0..q {
                out.push(MixedConeEuclidean { a, i, part: ConePart::Radial });
                out.push(MixedConeEuclidean { a, i, part: ConePart::Angular });
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a < b {
                    out.push(MixedConeCone { a, b, pair: ConePair::RadialRadial });
                    out.push(MixedConeCone { a, b, pair: ConePair::AngularAngular });
                }
                if a != b {
                    out.push(MixedConeCone { a, b, pair: ConePair::RadialAngular });
                }
            }
        }
        for a in 0..n {
            out.push(ConeLaplacian { a });
        }
        for (a, &b) in spec.betas.iter().enumerate() {
            if b < 0.5 {
                for pair in [ConePair::RadialRadial, ConePair::AngularAngular, ConePair::RadialAngular] {
                    out.push(PureConical { a, pair });
                }
            }
        }
        out
    }

    pub fn validate(&self, spec: &ConeSpec) -> Result<()> {
        use DerivativeOp::*;
        let (n, q) = (spec.n(), spec.q());
        let ok = match *self {
            PureEuclidean { i, j } => i < q && j < q,
            MixedConeEuclidean { a, i, .. } => a < n && i < q,
            MixedConeCone { a, b, .. } => a < n && b < n && a != b,
            ConeLaplacian { a } => a < n,
            PureConical { a, .. } => a < n && spec.betas[a] < 0.5,
        };
        if ok {
            Ok(())
        } else {
            arg(format!("{} is not an operator of the family for this spec", self.name()))
        }
    }

    /// Whether the operator differentiates once in `r_a` and once in a different variable.
    pub fn is_mixed_radial(&self) -> bool {
        matches!(
            self,
            DerivativeOp::MixedConeEuclidean { part: ConePart::Radial, .. }
                | DerivativeOp::MixedConeCone { pair: ConePair::RadialRadial | ConePair::RadialAngular, .. }
        )
    }

    pub fn name(&self) -> String {
        use DerivativeOp::*;
        match *self {
            PureEuclidean { i, j } => format!("d2/ds{}ds{}", i + 1, j + 1),
            MixedConeEuclidean { a, i, part: ConePart::Radial } => format!("d2/dr{}ds{}", a + 1, i + 1),
            MixedConeEuclidean { a, i, part: ConePart::Angular } => format!("r{0}^-1 d2/dth{0}ds{1}", a + 1, i + 1),
            MixedConeCone { a, b, pair: ConePair::RadialRadial } => format!("d2/dr{}dr{}", a + 1, b + 1),
            MixedConeCone { a, b, pair: ConePair::AngularAngular } => {
                format!("(r{0}r{1})^-1 d2/dth{0}dth{1}", a + 1, b + 1)
            }
            MixedConeCone { a, b, pair: ConePair::RadialAngular } => format!("r{1}^-1 d2/dr{0}dth{1}", a + 1, b + 1),
            ConeLaplacian { a } => format!("lap_beta{}", a + 1),
            PureConical { a, pair: ConePair::RadialRadial } => format!("d2/dr{0}dr{0}", a + 1),
            PureConical { a, pair: ConePair::AngularAngular } => format!("r{0}^-2 d2/dth{0}dth{0}", a + 1),
            PureConical { a, pair: ConePair::RadialAngular } => format!("r{0}^-1 d2/dr{0}dth{0}", a + 1),
        }
    }

    /// Apply the operator to a closed-form function.
    pub fn apply(&self, spec: &ConeSpec, e: &Expr) -> Expr {
        use DerivativeOp::*;
        match *self {
            PureEuclidean { i, j } => e.d_s(i).d_s(j),
            MixedConeEuclidean { a, i, part: ConePart::Radial } => e.d_r(a).d_s(i),
            MixedConeEuclidean { a, i, part: ConePart::Angular } => e.d_theta(a).d_s(i).mul_r(a, -1.0),
            MixedConeCone { a, b, pair: ConePair::RadialRadial } => e.d_r(a).d_r(b),
            MixedConeCone { a, b, pair: ConePair::AngularAngular } => {
                e.d_theta(a).d_theta(b).mul_r(a, -1.0).mul_r(b, -1.0)
            }
            MixedConeCone { a, b, pair: ConePair::RadialAngular } => e.d_r(a).d_theta(b).mul_r(b, -1.0),
            ConeLaplacian { a } => e.cone_laplacian(a, spec.betas[a]),
            PureConical { a, pair: ConePair::RadialRadial } => e.d_r(a).d_r(a),
            PureConical { a, pair: ConePair::AngularAngular } => e.d_theta(a).d_theta(a).mul_r(a, -2.0),
            PureConical { a, pair: ConePair::RadialAngular } => e.d_r(a).d_theta(a).mul_r(a, -1.0),
        }
        .simplify()
    }
}

/// Exact value of `D(mode)` at `x`, taking the limit on the axes when it exists.
pub fn eval_derivative(spec: &ConeSpec, op: &DerivativeOp, mode: &HarmonicMode, x: &ConePoint) -> Result<f64> {
    op.validate(spec)?;
    x.check(spec)?;
    op.apply(spec, &mode.expr).eval_limit(x)
}

/// `L²(B)` projection of a function onto a span of closed-form functions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Projection {
    pub labels: Vec<String>,
    pub basis: Vec<Expr>,
    /// Labels of spanning functions removed as linearly dependent.
    pub dropped: Vec<String>,
    pub coefficients: Vec<f64>,
    pub coefficient_stderr: Vec<f64>,
    /// Coefficients recomputed from each quadrature replicate alone.
    pub replicate_coefficients: Vec<Vec<f64>>,
    /// Condition number of the unit-diagonal Gram matrix of the retained functions.
    pub gram_condition: f64,
    /// Ridge added to the Gram matrix when it was too ill-conditioned.
    pub regularization: Option<f64>,
    /// `‖u‖_{L²(B)}` and `‖u − P‖_{L²(B)}`.
    pub input_norm: Estimate,
    pub residual_norm: Estimate,
}

impl Projection {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// The projected function `P = Σ c_j B_j`.
    pub fn polynomial(&self) -> Expr {
        self.combination(&self.coefficients)
    }

    pub fn combination(&self, coefs: &[f64]) -> Expr {
        let (n, q) = (self.basis[0].n, self.basis[0].q);
        let mut out = Expr::zero(n, q);
        for (b, &c) in self.basis.iter().zip(coefs) {
            out = out.add(&b.scale(c));
        }
        out
    }
}

const MAX_CONDITION: f64 = 1e12;

/// Project `u` onto the span of `basis` in `L²` of the ball carried by `rule`.
///
/// Dependent spanning functions are removed by Gram–Schmidt on the pooled Gram
/// matrix (relative tolerance `1e-9`). If the retained Gram matrix still has
/// condition number above `1e12`, a ridge of `1e-12` times its largest
/// eigenvalue is added and reported in [`Projection::regularization`].
pub fn project_onto(
    basis: &[(String, Expr)],
    u: &(dyn Fn(&ConePoint) -> f64 + Sync),
    rule: &BallRule,
) -> Result<Projection> {
    use nalgebra::{DMatrix, DVector};
    if basis.is_empty() {
        return arg("empty basis");
    }
    let reps = rule.replicates.len();
    let k = basis.len();
    let mut grams = Vec::with_capacity(reps);
    let mut rhs = Vec::with_capacity(reps);
    let mut uu = Vec::with_capacity(reps);
    for rep in &rule.replicates {
        let mut g = DMatrix::<f64>::zeros(k, k);
        let mut b = DVector::<f64>::zeros(k);
        let mut s = 0.0;
        let mut vals = vec![0.0; k];
        for y in &rep.points {
            for (v, (_, e)) in vals.iter_mut().zip(basis) {
                *v = e.eval(y);
            }
            let uy = u(y);
            if !uy.is_finite() {
                return Err(Error::Numerical(format!("integrand is not finite at {y:?}")));
            }
            for i in 0..k {
                b[i] += vals[i] * uy;
                for j in 0..=i {
                    g[(i, j)] += vals[i] * vals[j];
                }
            }
            s += uy * uy;
        }
        for i in 0..k {
            for j in 0..i {
                g[(j, i)] = g[(i, j)];
            }
        }
        grams.push(g * rep.weight);
        rhs.push(b * rep.weight);
        uu.push(s * rep.weight);
    }
    let pooled_g = grams.iter().fold(DMatrix::zeros(k, k), |acc, g| acc + g) / reps as f64;
    let pooled_b = rhs.iter().fold(DVector::zeros(k), |acc, b| acc + b) / reps as f64;

    // Gram–Schmidt in the Gram inner product, keeping the given order.
    let mut keep: Vec<usize> = Vec::new();
    for j in 0..k {
        let mut trial = keep.clone();
        trial.push(j);
        let sub = pooled_g.select_rows(&trial).select_columns(&trial);
        let diag = pooled_g[(j, j)];
        let ok = diag > 0.0
            && match sub.clone().cholesky() {
                Some(ch) => {
                    let l = ch.l();
                    let last = l[(trial.len() - 1, trial.len() - 1)];
                    last * last > 1e-9 * diag
                }
                None => false,
            };
        if ok {
            keep.push(j);
        }
    }
    let dropped = (0..k).filter(|j| !keep.contains(j)).map(|j| basis[j].0.clone()).collect();
    let sel = |m: &DMatrix<f64>| m.select_rows(&keep).select_columns(&keep);
    let selv = |v: &DVector<f64>| v.select_rows(&keep);
    let g = sel(&pooled_g);
    let d = DVector::from_iterator(keep.len(), (0..keep.len()).map(|i| 1.0 / g[(i, i)].sqrt()));
    let dm = DMatrix::from_diagonal(&d);
    let normalized = &dm * &g * &dm;
    let eig = normalized.clone().symmetric_eigen();
    let (lmin, lmax) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    let gram_condition = lmax / lmin.max(f64::MIN_POSITIVE);
    let regularization = if gram_condition > MAX_CONDITION { Some(1e-12 * lmax) } else { None };
    let solve = |gm: &DMatrix<f64>, bv: &DVector<f64>| -> Result<Vec<f64>> {
        let mut a = &dm * gm * &dm;
        if let Some(ridge) = regularization {
            for i in 0..a.nrows() {
                a[(i, i)] += ridge;
            }
        }
        let rhs = &dm * bv;
        let ch = a.cholesky().ok_or_else(|| {
            Error::Numerical(format!("Gram matrix is not positive definite (condition {gram_condition:.3e})"))
        })?;
        let y = ch.solve(&rhs);
        Ok((&dm * y).iter().copied().collect())
    };
    let coefficients = solve(&g, &selv(&pooled_b))?;
    let mut replicate_coefficients = Vec::with_capacity(reps);
    for (gr, br) in grams.iter().zip(&rhs) {
        replicate_coefficients.push(solve(&sel(gr), &selv(br))?);
    }
    let coefficient_stderr = (0..keep.len())
        .map(|i| {
            let vals: Vec<f64> = replicate_coefficients.iter().map(|c| c[i]).collect();
            Estimate::from_replicates(&vals).stderr
        })
        .collect();
    let kept_basis: Vec<Expr> = keep.iter().map(|&j| basis[j].1.clone()).collect();
    let labels = keep.iter().map(|&j| basis[j].0.clone()).collect();
    let mut p = Expr::zero(kept_basis[0].n, kept_basis[0].q);
    for (b, &c) in kept_basis.iter().zip(&coefficients) {
        p = p.add(&b.scale(c));
    }
    let input = rule.integrate(|y| u(y) * u(y));
    let resid = rule.integrate(|y| {
        let v = u(y) - p.eval(y);
        v * v
    });
    let sqrt_est = |e: Estimate| {
        let v = e.value.max(0.0).sqrt();
        Estimate { value: v, stderr: if v > 0.0 { e.stderr / (2.0 * v) } else { e.stderr.sqrt() } }
    };
    Ok(Projection {
        labels,
        basis: kept_basis,
        dropped,
        coefficients,
        coefficient_stderr,
        replicate_coefficients,
        gram_condition,
        regularization,
        input_norm: sqrt_est(input),
        residual_norm: sqrt_est(resid),
    })
}

/// Project `u` onto `ℋ_{≤2}` on the ball of `rule`.
pub fn project_subquadratic(
    spec: &ConeSpec,
    u: &(dyn Fn(&ConePoint) -> f64 + Sync),
    rule: &BallRule,
) -> Result<Projection> {
    let basis: Vec<(String, Expr)> = subquadratic_basis(spec).into_iter().map(|m| (m.label, m.expr)).collect();
    project_onto(&basis, u, rule)
}
