//! Closed-form functions on the product cone.
//!
//! An [`Expr`] is a finite sum of terms
//! `c · ∏_a r_a^{p_a} w_a(ω_a (θ_a − o_a)) · ∏_i s_i^{k_i}` with real powers `p_a`,
//! waves `w_a ∈ {cos, sin}`, real frequencies `ω_a` and angle origins `o_a`.
//! Angles are measured through `θ − o` reduced to `(−π, π]`, which makes
//! non-integer frequencies meaningful inside a developed chart.
//! The class is closed under sums, products and the derivatives `∂_{r_a}`,
//! `∂_{θ_a}`, `∂_{s_i}` and multiplication by powers of `r_a`, so every derivative
//! of a harmonic mode is again an `Expr` and is evaluated exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, ConePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wave {
    Cos,
    Sin,
}

/// The angular part `w(ω (θ − o))` of one cone factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angular {
    pub freq: f64,
    pub wave: Wave,
    #[serde(default)]
    pub origin: f64,
}

impl Angular {
    pub const ONE: Angular = Angular { freq: 0.0, wave: Wave::Cos, origin: 0.0 };

    pub fn new(freq: f64, wave: Wave, origin: f64) -> Angular {
        Angular { freq, wave, origin }
    }

    pub fn is_constant(&self) -> bool {
        self.freq == 0.0
    }

    pub fn eval(&self, theta: f64) -> f64 {
        if self.freq == 0.0 {
            return match self.wave {
                Wave::Cos => 1.0,
                Wave::Sin => 0.0,
            };
        }
        let phi = self.freq * wrap_angle(theta - self.origin);
        match self.wave {
            Wave::Cos => phi.cos(),
            Wave::Sin => phi.sin(),
        }
    }

    /// `d/dθ` as a coefficient times a wave.
    fn derivative(&self) -> (f64, Angular) {
        match self.wave {
            Wave::Cos => (-self.freq, Angular { wave: Wave::Sin, ..*self }),
            Wave::Sin => (self.freq, Angular { wave: Wave::Cos, ..*self }),
        }
    }

    /// A wave with possibly negative frequency, folded to `freq ≥ 0`.
    fn normalized(coef: f64, freq: f64, wave: Wave, origin: f64) -> Option<(f64, Angular)> {
        let (coef, freq) = match (freq < 0.0, wave) {
            (true, Wave::Sin) => (-coef, -freq),
            (true, Wave::Cos) => (coef, -freq),
            _ => (coef, freq),
        };
        if freq.abs() < 1e-13 {
            return match wave {
                Wave::Cos => Some((coef, Angular::ONE)),
                Wave::Sin => None,
            };
        }
        Some((coef, Angular { freq, wave, origin }))
    }

    /// Product-to-sum expansion of `self · other`.
    fn product(&self, other: &Angular) -> Vec<(f64, Angular)> {
        if self.is_constant() {
            return vec![(1.0, *other)];
        }
        if other.is_constant() {
            return vec![(1.0, *self)];
        }
        assert!((self.origin - other.origin).abs() < 1e-12, "product of waves measured from different origins");
        let o = self.origin;
        let (d, s) = (self.freq - other.freq, self.freq + other.freq);
        let parts: [(f64, f64, Wave); 2] = match (self.wave, other.wave) {
            (Wave::Cos, Wave::Cos) => [(0.5, d, Wave::Cos), (0.5, s, Wave::Cos)],
            (Wave::Sin, Wave::Sin) => [(0.5, d, Wave::Cos), (-0.5, s, Wave::Cos)],
            (Wave::Sin, Wave::Cos) => [(0.5, s, Wave::Sin), (0.5, d, Wave::Sin)],
            (Wave::Cos, Wave::Sin) => [(0.5, s, Wave::Sin), (-0.5, d, Wave::Sin)],
        };
        parts.iter().filter_map(|&(c, f, w)| Angular::normalized(c, f, w, o)).collect()
    }
}

pub(crate) type TermKey = (Vec<i64>, Vec<(i64, u8, i64)>, Vec<u32>);

/// One product term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub r_pow: Vec<f64>,
    pub ang: Vec<Angular>,
    pub s_pow: Vec<u32>,
}

impl Term {
    /// Total homogeneity degree.
    pub fn degree(&self) -> f64 {
        self.r_pow.iter().sum::<f64>() + self.s_pow.iter().map(|&k| k as f64).sum::<f64>()
    }

    fn eval_factors(&self, x: &ConePoint, skip: Option<usize>) -> f64 {
        let mut v = self.coef;
        for (a, (&p, w)) in self.r_pow.iter().zip(&self.ang).enumerate() {
            if Some(a) == skip {
                continue;
            }
            let (r, t) = x.polar[a];
            if p != 0.0 {
                v *= r.powf(p);
            }
            if !w.is_constant() || w.wave == Wave::Sin {
                v *= w.eval(t);
            }
        }
        for (&k, &s) in self.s_pow.iter().zip(&x.s) {
            if k != 0 {
                v *= s.powi(k as i32);
            }
        }
        v
    }

    pub(crate) fn key(&self) -> TermKey {
        let qz = |x: f64| (x * 1e9).round() as i64;
        (
            self.r_pow.iter().map(|&p| qz(p)).collect(),
            self.ang
                .iter()
                .map(|w| {
                    let wave = if w.wave == Wave::Cos { 0 } else { 1 };
                    let origin = if w.is_constant() { 0 } else { qz(w.origin) };
                    (qz(w.freq), wave, origin)
                })
                .collect(),
            self.s_pow.clone(),
        )
    }
}

/// A closed-form function in the class described in the module docs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub n: usize,
    pub q: usize,
    pub terms: Vec<Term>,
}

impl Expr {
    pub fn zero(n: usize, q: usize) -> Expr {
        Expr { n, q, terms: Vec::new() }
    }

    pub fn constant(n: usize, q: usize, c: f64) -> Expr {
        let mut e = Expr::zero(n, q);
        if c != 0.0 {
            e.terms.push(Term { coef: c, r_pow: vec![0.0; n], ang: vec![Angular::ONE; n], s_pow: vec![0; q] });
        }
        e
    }

    /// `c · r_a^p · w(ω(θ_a − o))`.
    pub fn cone_wave(n: usize, q: usize, a: usize, c: f64, p: f64, ang: Angular) -> Expr {
        let mut e = Expr::constant(n, q, 1.0);
        let t = &mut e.terms[0];
        t.r_pow[a] = p;
        match Angular::normalized(c, ang.freq, ang.wave, ang.origin) {
            Some((c, w)) => {
                t.coef = c;
                t.ang[a] = w;
                e
            }
            None => Expr::zero(n, q),
        }
    }

    /// `r_a^p`.
    pub fn r_pow(n: usize, q: usize, a: usize, p: f64) -> Expr {
        Expr::cone_wave(n, q, a, 1.0, p, Angular::ONE)
    }

    /// `s_i^k`.
    pub fn s_pow(n: usize, q: usize, i: usize, k: u32) -> Expr {
        let mut e = Expr::constant(n, q, 1.0);
        e.terms[0].s_pow[i] = k;
        e
    }

    /// `ρ² = Σ r_a² + Σ s_i²`.
    pub fn rho2(n: usize, q: usize) -> Expr {
        let mut e = Expr::zero(n, q);
        for a in 0..n {
            e = e.add(&Expr::r_pow(n, q, a, 2.0));
        }
        for i in 0..q {
            e = e.add(&Expr::s_pow(n, q, i, 2));
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        assert_eq!((self.n, self.q), (other.n, other.q), "adding functions on different cones");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expr { n: self.n, q: self.q, terms }.simplify()
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Expr {
        if c == 0.0 {
            return Expr::zero(self.n, self.q);
        }
        let mut e = self.clone();
        for t in &mut e.terms {
            t.coef *= c;
        }
        e
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        assert_eq!((self.n, self.q), (other.n, other.q), "multiplying functions on different cones");
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut partial: Vec<(f64, Vec<Angular>)> = vec![(a.coef * b.coef, Vec::with_capacity(self.n))];
                for f in 0..self.n {
                    let prod = a.ang[f].product(&b.ang[f]);
                    let mut next = Vec::with_capacity(partial.len() * prod.len());
                    for (c, ws) in &partial {
                        for (c2, w) in &prod {
                            let mut ws2 = ws.clone();
                            ws2.push(*w);
                            next.push((c * c2, ws2));
                        }
                    }
                    partial = next;
                }
                let r_pow: Vec<f64> = a.r_pow.iter().zip(&b.r_pow).map(|(x, y)| x + y).collect();
                let s_pow: Vec<u32> = a.s_pow.iter().zip(&b.s_pow).map(|(x, y)| x + y).collect();
                for (c, ang) in partial {
                    terms.push(Term { coef: c, r_pow: r_pow.clone(), ang, s_pow: s_pow.clone() });
                }
            }
        }
        Expr { n: self.n, q: self.q, terms }.simplify()
    }

    pub fn powi(&self, k: u32) -> Expr {
        let mut out = Expr::constant(self.n, self.q, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Merge like terms and drop exact zeros.
    pub fn simplify(self) -> Expr {
        let mut map: BTreeMap<_, Term> = BTreeMap::new();
        for t in self.terms {
            if t.coef == 0.0 {
                continue;
            }
            map.entry(t.key()).and_modify(|e| e.coef += t.coef).or_insert(t);
        }
        let terms = map.into_values().filter(|t| t.coef != 0.0).collect();
        Expr { n: self.n, q: self.q, terms }
    }

    pub fn d_r(&self, a: usize) -> Expr {
        let mut e = self.clone();
        e.terms.retain(|t| t.r_pow[a] != 0.0);
        for t in &mut e.terms {
            t.coef *= t.r_pow[a];
            t.r_pow[a] -= 1.0;
        }
        e
    }

    pub fn d_theta(&self, a: usize) -> Expr {
        let mut e = Expr::zero(self.n, self.q);
        for t in &self.terms {
            if t.ang[a].is_constant() {
                continue;
            }
            let (c, w) = t.ang[a].derivative();
            let mut t2 = t.clone();
            t2.coef *= c;
            t2.ang[a] = w;
            e.terms.push(t2);
        }
        e
    }

    pub fn d_s(&self, i: usize) -> Expr {
        let mut e = self.clone();
        e.terms.retain(|t| t.s_pow[i] != 0);
        for t in &mut e.terms {
            t.coef *= t.s_pow[i] as f64;
            t.s_pow[i] -= 1;
        }
        e
    }

    /// Multiply by `r_a^p`.
    pub fn mul_r(&self, a: usize, p: f64) -> Expr {
        let mut e = self.clone();
        for t in &mut e.terms {
            t.r_pow[a] += p;
        }
        e
    }

    /// The conical Laplacian `∂²_r + r^{-1}∂_r + (β r)^{-2}∂²_θ` of factor `a`.
    ///
    /// Each term `r^p w(kθ)` maps to `(p² − (k/β)²) r^{p−2} w(kθ)`; a factor that
    /// cancels to rounding is taken as zero, so harmonic terms leave no residue
    /// that would look singular on the axis.
    pub fn cone_laplacian(&self, a: usize, beta: f64) -> Expr {
        let mut e = Expr::zero(self.n, self.q);
        for t in &self.terms {
            let p2 = t.r_pow[a] * t.r_pow[a];
            let k2 = (t.ang[a].freq / beta).powi(2);
            let factor = p2 - k2;
            if factor.abs() <= 1e-12 * (p2 + k2) {
                continue;
            }
            let mut t2 = t.clone();
            t2.coef *= factor;
            t2.r_pow[a] -= 2.0;
            e.terms.push(t2);
        }
        e
    }

    /// The cone Laplacian `Σ_a Δ_{β_a} + Σ_i ∂²_{s_i}`.
    pub fn laplacian(&self, betas: &[f64]) -> Expr {
        assert_eq!(betas.len(), self.n);
        let mut out = Expr::zero(self.n, self.q);
        for (a, &b) in betas.iter().enumerate() {
            out = out.add(&self.cone_laplacian(a, b));
        }
        for i in 0..self.q {
            out = out.add(&self.d_s(i).d_s(i));
        }
        out
    }

    /// Pointwise value; singular terms evaluate to `±∞` or `NaN` on the axes.
    pub fn eval(&self, x: &ConePoint) -> f64 {
        self.terms.iter().map(|t| t.eval_factors(x, None)).sum()
    }

    /// Coefficients keyed by monomial, after merging like terms.
    pub(crate) fn coefficients(&self) -> BTreeMap<TermKey, f64> {
        self.clone().simplify().terms.into_iter().map(|t| (t.key(), t.coef)).collect()
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).fold(0.0, f64::max)
    }

    /// Value at `x`, taking limits on the axes `r_a = 0`.
    ///
    /// A term vanishes on an axis when its power of `r_a` is positive. A
    /// zero power keeps the term if its wave in `θ_a` is constant; otherwise the
    /// limit depends on the direction of approach. Negative powers are unbounded.
    /// Terms whose coefficient is below `1e-11` of the largest coefficient are
    /// treated as cancellation residue.
    pub fn eval_limit(&self, x: &ConePoint) -> Result<f64> {
        let e = self.clone().simplify();
        let floor = 1e-11 * e.max_abs_coef();
        let mut total = 0.0;
        'terms: for t in &e.terms {
            let mut discontinuous = None;
            for a in 0..e.n {
                if x.polar[a].0 != 0.0 {
                    continue;
                }
                let p = t.r_pow[a];
                if p < -1e-12 {
                    if t.coef.abs() <= floor {
                        continue 'terms;
                    }
                    return Err(Error::Domain(format!(
                        "term with r_{}^{p} is unbounded on the axis r_{} = 0",
                        a + 1,
                        a + 1
                    )));
                }
                if p > 1e-12 {
                    continue 'terms;
                }
                if !t.ang[a].is_constant() {
                    discontinuous = Some(a);
                }
            }
            if let Some(a) = discontinuous {
                let rest = t.eval_factors(x, Some(a));
                if rest.abs() <= floor {
                    continue;
                }
                return Err(Error::Domain(format!(
                    "value on the axis r_{} = 0 depends on the direction of approach",
                    a + 1
                )));
            }
            total += t.eval_factors(x, None);
        }
        Ok(total)
    }

    /// Rewrite a function of a model cone as a function on this cone.
    ///
    /// Model cone factor `j` becomes cone factor `cone_map[j]` of the target;
    /// model Euclidean coordinate `i` is replaced by `subs[i]`.
    pub fn compose(&self, n: usize, q: usize, cone_map: &[usize], subs: &[Expr]) -> Expr {
        assert_eq!(cone_map.len(), self.n);
        assert_eq!(subs.len(), self.q);
        let mut out = Expr::zero(n, q);
        let mut powers: Vec<Vec<Expr>> = subs.iter().map(|e| vec![Expr::constant(n, q, 1.0), e.clone()]).collect();
        for t in self.terms.iter().filter(|t| t.coef != 0.0) {
            let mut base = Expr::constant(n, q, t.coef);
            for (j, &a) in cone_map.iter().enumerate() {
                base.terms[0].r_pow[a] = t.r_pow[j];
                base.terms[0].ang[a] = t.ang[j];
            }
            let mut acc = base;
            for (i, &k) in t.s_pow.iter().enumerate() {
                let k = k as usize;
                while powers[i].len() <= k {
                    let next = powers[i].last().unwrap().mul(&subs[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    acc = acc.mul(&powers[i][k]);
                }
            }
            out.terms.extend(acc.terms);
        }
        out.simplify()
    }

    /// Split into homogeneous components, keyed by degree (merged within 1e-9).
    pub fn homogeneous_parts(&self) -> Vec<(f64, Expr)> {
        let mut parts: Vec<(f64, Expr)> = Vec::new();
        for t in &self.terms {
            let d = t.degree();
            match parts.iter_mut().find(|(e, _)| (e - d).abs() < 1e-9) {
                Some((_, e)) => e.terms.push(t.clone()),
                None => parts.push((d, Expr { n: self.n, q: self.q, terms: vec![t.clone()] })),
            }
        }
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        parts
    }
}

fn fmt_num(x: f64) -> String {
    let r = x.round();
    if (x - r).abs() < 1e-12 {
        format!("{}", r as i64)
    } else {
        format!("{:.6}", x).trim_end_matches('0').to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, t) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            for a in 0..self.n {
                let p = t.r_pow[a];
                if p != 0.0 {
                    factors.push(if p == 1.0 { format!("r{}", a + 1) } else { format!("r{}^{}", a + 1, fmt_num(p)) });
                }
                let w = t.ang[a];
                if !w.is_constant() {
                    let wave = if w.wave == Wave::Cos { "cos" } else { "sin" };
                    let arg = if w.origin == 0.0 {
                        format!("θ{}", a + 1)
                    } else {
                        format!("(θ{}−{})", a + 1, fmt_num(w.origin))
                    };
                    let freq = if w.freq == 1.0 { String::new() } else { fmt_num(w.freq) };
                    factors.push(format!("{wave}({freq}{arg})"));
                }
            }
            for (i, &k) in t.s_pow.iter().enumerate() {
                if k == 1 {
                    factors.push(format!("s{}", i + 1));
                } else if k > 1 {
                    factors.push(format!("s{}^{}", i + 1, k));
                }
            }
            let c = t.coef;
            let sign = if c < 0.0 {
                "-"
            } else if idx > 0 {
                "+"
            } else {
                ""
            };
            if idx > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            let mag = c.abs();
            if factors.is_empty() {
                write!(f, "{}", fmt_num(mag))?;
            } else if (mag - 1.0).abs() < 1e-15 {
                write!(f, "{}", factors.join("·"))?;
            } else {
                write!(f, "{}·{}", fmt_num(mag), factors.join("·"))?;
            }
        }
        Ok(())
    }
}
