//! Randomized quasi-Monte Carlo over geodesic balls.
//!
//! Each replicate is a Halton point set under an independent Cranley–Patterson
//! shift. Points are drawn per factor: in a cone factor the polar box
//! `r ∈ [r_0, r_1]`, `|θ − θ_c| ≤ Θ` is sampled uniformly for the area element
//! `β r dr dθ`, and the Euclidean factor uses a cube. Points outside the geodesic
//! ball are discarded, so every estimate is an integral for the Riemannian volume.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::geometry::{canonical_angle, distance2_unchecked, ConePoint, ConeSpec};

const PRIMES: [u64; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

/// Size and seed of a randomized QMC rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmcConfig {
    /// Halton points generated per replicate, before rejection.
    pub points: usize,
    /// Independent random shifts; the spread between them gives the standard error.
    pub replicates: usize,
    pub seed: u64,
}

impl Default for QmcConfig {
    fn default() -> Self {
        QmcConfig { points: 8192, replicates: 8, seed: 0x5EED }
    }
}

impl QmcConfig {
    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A Monte Carlo estimate and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Mean and standard error of independent replicate values.
    pub fn from_replicates(values: &[f64]) -> Estimate {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        if values.len() < 2 {
            return Estimate { value: mean, stderr: f64::NAN };
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        Estimate { value: mean, stderr: (var / k).sqrt() }
    }
}

/// Accepted nodes of one replicate; each carries the same weight.
#[derive(Clone, Debug)]
pub struct Replicate {
    pub points: Vec<ConePoint>,
    pub weight: f64,
}

/// A randomized QMC rule on `B(center, radius)`.
#[derive(Clone, Debug)]
pub struct BallRule {
    pub center: ConePoint,
    pub radius: f64,
    pub replicates: Vec<Replicate>,
}

struct FactorBox {
    r0: f64,
    r1: f64,
    theta_c: f64,
    half_width: f64,
    beta: f64,
}

impl FactorBox {
    fn new(beta: f64, rc: f64, tc: f64, radius: f64) -> FactorBox {
        if rc <= radius {
            return FactorBox { r0: 0.0, r1: rc + radius, theta_c: tc, half_width: PI, beta };
        }
        let half_width = ((radius / rc).asin() / beta).min(PI);
        FactorBox { r0: rc - radius, r1: rc + radius, theta_c: tc, half_width, beta }
    }

    fn measure(&self) -> f64 {
        self.beta * self.half_width * (self.r1 * self.r1 - self.r0 * self.r0)
    }

    fn map(&self, u: f64, v: f64) -> (f64, f64) {
        let r = (self.r0 * self.r0 + u * (self.r1 * self.r1 - self.r0 * self.r0)).sqrt();
        let t = canonical_angle(self.theta_c + (2.0 * v - 1.0) * self.half_width);
        (r, t)
    }
}

fn halton_columns(dims: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    if dims > PRIMES.len() {
        return arg(format!("quadrature supports at most {} dimensions", PRIMES.len()));
    }
    Ok(PRIMES[..dims].iter().map(|&b| halton::Sequence::new(b as u8).take(count).collect()).collect())
}

impl BallRule {
    pub fn new(spec: &ConeSpec, center: &ConePoint, radius: f64, cfg: &QmcConfig) -> Result<BallRule> {
        center.check(spec)?;
        if !(radius > 0.0) {
            return arg(format!("radius {radius} must be positive"));
        }
        if cfg.points == 0 || cfg.replicates == 0 {
            return arg("quadrature needs at least one point and one replicate");
        }
        let n = spec.n();
        let q = spec.q();
        let boxes: Vec<FactorBox> =
            (0..n).map(|a| FactorBox::new(spec.betas[a], center.r(a), center.theta(a), radius)).collect();
        let measure = boxes.iter().map(FactorBox::measure).product::<f64>() * (2.0 * radius).powi(q as i32);
        let weight = measure / cfg.points as f64;
        let cols = halton_columns(2 * n + q, cfg.points)?;
        let r2 = radius * radius;
        let mut replicates = Vec::with_capacity(cfg.replicates);
        for rep in 0..cfg.replicates {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(rep as u64);
            let shift: Vec<f64> = (0..2 * n + q).map(|_| rng.random::<f64>()).collect();
            let unit = |d: usize, i: usize| {
                let v = cols[d][i] + shift[d];
                if v >= 1.0 {
                    v - 1.0
                } else {
                    v
                }
            };
            let mut points = Vec::new();
            for i in 0..cfg.points {
                let polar: Vec<(f64, f64)> =
                    boxes.iter().enumerate().map(|(a, b)| b.map(unit(2 * a, i), unit(2 * a + 1, i))).collect();
                let s: Vec<f64> = (0..q).map(|j| center.s[j] + (2.0 * unit(2 * n + j, i) - 1.0) * radius).collect();
                let y = ConePoint { polar, s };
                if distance2_unchecked(&spec.betas, center, &y) <= r2 {
                    points.push(y);
                }
            }
            replicates.push(Replicate { points, weight });
        }
        Ok(BallRule { center: center.clone(), radius, replicates })
    }

    /// Per-replicate integrals of `f`.
    pub fn replicate_integrals(&self, f: impl Fn(&ConePoint) -> f64) -> Vec<f64> {
        self.replicates.iter().map(|rep| rep.points.iter().map(&f).sum::<f64>() * rep.weight).collect()
    }

    pub fn integrate(&self, f: impl Fn(&ConePoint) -> f64) -> Estimate {
        Estimate::from_replicates(&self.replicate_integrals(f))
    }

    pub fn volume(&self) -> Estimate {
        self.integrate(|_| 1.0)
    }

    /// Values of `f` at every node, grouped by replicate.
    pub fn sample(&self, f: impl Fn(&ConePoint) -> f64) -> Vec<Vec<f64>> {
        self.replicates.iter().map(|rep| rep.points.iter().map(&f).collect()).collect()
    }

    pub fn node_count(&self) -> usize {
        self.replicates.iter().map(|r| r.points.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::unit_ball_volume;

    #[test]
    fn apex_volume_matches_closed_form() {
        let spec = ConeSpec::new(vec![0.6], 1).unwrap();
        let rule = BallRule::new(&spec, &ConePoint::apex(&spec), 1.0, &QmcConfig::default()).unwrap();
        let v = rule.volume();
        let exact = 0.6 * unit_ball_volume(3);
        assert!((v.value - exact).abs() < 5.0 * v.stderr + 1e-3 * exact, "{v:?} vs {exact}");
    }

    #[test]
    fn regular_ball_is_euclidean() {
        let spec = ConeSpec::new(vec![0.3], 1).unwrap();
        let c = ConePoint::new(vec![(2.0, 1.0)], vec![0.0]);
        let rule = BallRule::new(&spec, &c, 0.5, &QmcConfig::default().with_points(65536)).unwrap();
        let v = rule.volume();
        let exact = unit_ball_volume(3) * 0.125;
        assert!((v.value - exact).abs() < 2e-3 * exact, "{v:?} vs {exact}");
    }

    #[test]
    fn replicates_are_deterministic() {
        let spec = ConeSpec::new(vec![0.45], 2).unwrap();
        let c = ConePoint::new(vec![(0.2, 4.0)], vec![0.1, 0.0]);
        let a = BallRule::new(&spec, &c, 0.7, &QmcConfig::default()).unwrap();
        let b = BallRule::new(&spec, &c, 0.7, &QmcConfig::default()).unwrap();
        assert_eq!(a.replicate_integrals(|y| y.rho()), b.replicate_integrals(|y| y.rho()));
    }
}
