//! Command-line front end.
//!
//! Every command reads a [`RunConfig`] (from `--config`, overridden by `--spec`
//! and `--seed`), writes its tables and reports to the output directory and a
//! `manifest.json` with the config hash, version, timings and output hashes.
//! Without an output directory, the main table goes to standard output.
//!
//! Exit codes: 0 success, 2 usage or I/O error, 3 `α` outside `(0, μ)`,
//! 4 numerical failure or a failed check.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{campanato_estimate, check_monotonicity, dyadic_radii};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{bad_scale_bound, bad_scale_window, classify_scales, ConePoint, ConeSpec, ScaleParams};
use crate::quadrature::QmcConfig;
use crate::solver::{
    default_source, sample_points, solve_dirichlet_apex, solve_fd_polar, verify_schauder, PolarGrid, SchauderConfig,
    VerifyConfig,
};
use crate::spectrum::{d_star, enumerate_roots, harmonic_modes, mu, subquadratic_basis};

pub const OUT_ENV: &str = "CONE_SCHAUDER_OUT";

/// Experiment configuration; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub spec: ConeSpec,
    pub seed: u64,
    pub qmc: QmcConfig,
    pub lambda: f64,
    pub eps0: f64,
    pub alpha: Option<f64>,
    pub d_max: f64,
    /// Explicit evaluation points; when empty, `sample_points` supplies them.
    pub points: Vec<ConePoint>,
    pub point_count: usize,
    pub axis_points: usize,
    /// Source term; defaults to `default_source`.
    pub f: Option<Expr>,
    pub k_max: i32,
    pub grid: PolarGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: ConeSpec { betas: vec![0.75], euclidean_dim: 1 },
            seed: 0x5EED,
            qmc: QmcConfig { points: 4096, replicates: 8, seed: 0x5EED },
            lambda: 0.5,
            eps0: 0.05,
            alpha: None,
            d_max: 4.0,
            points: Vec::new(),
            point_count: 20,
            axis_points: 5,
            f: None,
            k_max: 14,
            grid: PolarGrid { radius: 1.0, s_range: (-1.0, 1.0), nr: 32, ntheta: 32, ns: 31 },
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate().map_err(|e| Error::Argument(format!("spec: {e}")))?;
        if self.qmc.points == 0 || self.qmc.replicates < 2 {
            return Err(Error::Argument("qmc: need points ≥ 1 and replicates ≥ 2".into()));
        }
        ScaleParams::new(&self.spec, self.lambda, self.eps0)
            .map_err(|e| Error::Argument(format!("lambda/eps0: {e}")))?;
        if let Some(f) = &self.f {
            if (f.n, f.q) != (self.spec.n(), self.spec.q()) {
                return Err(Error::Argument("f: dimensions do not match spec".into()));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            p.check(&self.spec).map_err(|e| Error::Argument(format!("points[{i}]: {e}")))?;
        }
        Ok(())
    }

    fn qmc(&self) -> QmcConfig {
        QmcConfig { seed: self.seed, ..self.qmc.clone() }
    }

    fn alpha(&self) -> Result<f64> {
        let m = mu(&self.spec);
        let a = self.alpha.unwrap_or(0.75 * m);
        if !(a > 0.0 && a < m) {
            return Err(Error::Scope { alpha: a, mu: m });
        }
        Ok(a)
    }

    fn source(&self) -> Expr {
        self.f.clone().unwrap_or_else(|| default_source(&self.spec))
    }

    fn points(&self) -> Vec<ConePoint> {
        if self.points.is_empty() {
            sample_points(&self.spec, self.point_count, self.axis_points, self.seed)
        } else {
            self.points.clone()
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cone-schauder", version, about = "Spectral and Hölder-decay experiments on products of 2D cones")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// ConeSpec JSON file, e.g. {"betas": [0.75], "euclidean_dim": 1}
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// RunConfig JSON file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Spectral,
    Fd,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Indicial roots up to d_max. CSV columns: degree, multiplicity, recipe.
    Roots {
        #[arg(long)]
        dmax: Option<f64>,
    },
    /// The spanning set of subquadratic harmonic functions. CSV columns: label, degree, expr; JSON holds the terms.
    Basis,
    /// Good/bad scale classification of each point. CSV columns: point, k, status, model_betas, center_distance.
    Scales {
        /// Points JSON file (list of ConePoint)
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Solve Δu = f on the apex ball of radius 1 with u = 0 on the boundary, or check the spectral
    /// solution against the polar finite-difference oracle. CSV columns: r, theta, s, u, u_fd.
    Solve {
        /// Source term JSON file (an Expr)
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "spectral")]
        method: Method,
    },
    /// Campanato constants of f at the points. CSV columns: scale, norm, bound, pass (plus center).
    Campanato {
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Monotonicity of scaled norms for a single d*-mode and a mixture. CSV columns: case, scale, norm, bound, pass.
    VerifyMonotonicity {
        #[arg(long)]
        dmax: Option<f64>,
    },
    /// Full Hölder-estimate run. CSV columns: point, k, good, radius, norm, norm_stderr; JSON per point.
    VerifySchauder {
        #[arg(long)]
        alpha: Option<f64>,
        /// Points JSON file (list of ConePoint)
        #[arg(long)]
        points: Option<PathBuf>,
    },
}

/// CSV schema of each command's tables: file name and `(column, meaning)` pairs.
pub fn csv_schema(command: &Command) -> (&'static str, &'static [(&'static str, &'static str)]) {
    match command {
        Command::Roots { .. } => (
            "roots.csv",
            &[
                ("degree", "homogeneity d of the harmonic modes"),
                ("multiplicity", "number of independent modes of degree d"),
                ("recipe", "generating factors and join indices, one per mode, separated by ' | '"),
            ],
        ),
        Command::Basis => {
            ("basis.csv", &[("label", "basis function name"), ("degree", "homogeneity"), ("expr", "closed form")])
        }
        Command::Scales { .. } => (
            "scales.csv",
            &[
                ("point", "index into the point list"),
                ("k", "scale index, ball radius lambda^k"),
                ("status", "good or bad"),
                ("model_betas", "cone angles kept in the model at good scales"),
                ("center_distance", "rescaled distance of the point to the model's singular set"),
            ],
        ),
        Command::Solve { .. } => (
            "solution.csv",
            &[
                ("r", "radius in the cone factor"),
                ("theta", "angle in the cone factor"),
                ("s", "Euclidean coordinate"),
                ("u", "spectral solution"),
                ("u_fd", "finite-difference solution, empty unless --method fd"),
            ],
        ),
        Command::Campanato { .. } => (
            "campanato.csv",
            &[
                ("center", "index into the point list"),
                ("scale", "ball radius"),
                ("norm", "scaled L2 oscillation of f on the ball"),
                ("bound", "K radius^alpha"),
                ("pass", "norm <= bound"),
            ],
        ),
        Command::VerifyMonotonicity { .. } => (
            "monotonicity.csv",
            &[
                ("case", "single d*-mode or mixture"),
                ("scale", "ball radius"),
                ("norm", "scaled norm relative to the unit ball"),
                ("bound", "radius^d*"),
                ("pass", "norm <= bound within the quadrature error"),
            ],
        ),
        Command::VerifySchauder { .. } => (
            "trace.csv",
            &[
                ("point", "index into the point list"),
                ("k", "scale index, ball radius lambda^k"),
                ("good", "whether the scale is good"),
                ("radius", "ball radius"),
                ("norm", "scaled norm of the iterate before subtraction"),
                ("norm_stderr", "replicate standard error of norm"),
            ],
        ),
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Roots { .. } => "roots",
            Command::Basis => "basis",
            Command::Scales { .. } => "scales",
            Command::Solve { .. } => "solve",
            Command::Campanato { .. } => "campanato",
            Command::VerifyMonotonicity { .. } => "verify-monotonicity",
            Command::VerifySchauder { .. } => "verify-schauder",
        }
    }
}

/// Artifacts of one command before they are written.
pub struct Outcome {
    pub files: Vec<(String, String)>,
    /// Name of the file echoed to stdout when there is no output directory.
    pub primary: String,
    pub summary: serde_json::Value,
    pub passed: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    config: &'a RunConfig,
    elapsed_seconds: f64,
    passed: bool,
    outputs: Vec<(String, String)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Argument(format!("{what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Argument(format!("{what} {}: {e}", path.display())))
}

/// Merge the config file and command-line overrides.
pub fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &common.config {
        Some(p) => read_json(p, "config")?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.spec {
        cfg.spec = read_json(p, "spec")?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_string<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn params(cfg: &RunConfig) -> Result<ScaleParams> {
    ScaleParams::new(&cfg.spec, cfg.lambda, cfg.eps0)
}

/// Run a command against a config and return its artifacts.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let spec = &cfg.spec;
    match command {
        Command::Roots { dmax } => {
            let table = enumerate_roots(spec, dmax.unwrap_or(cfg.d_max))?;
            let summary = serde_json::json!({
                "mu": mu(spec), "d_star": d_star(spec)?, "roots": table.entries.len(),
            });
            Ok(Outcome {
                files: vec![("roots.csv".into(), table.to_csv()?)],
                primary: "roots.csv".into(),
                summary,
                passed: true,
            })
        }
        Command::Basis => {
            let basis = subquadratic_basis(spec);
            let rows = basis.iter().map(|m| vec![m.label.clone(), m.degree.to_string(), m.expr.to_string()]);
            let csv = csv_string(&["label", "degree", "expr"], rows)?;
            let summary = serde_json::json!({ "spanning": basis.len() });
            Ok(Outcome {
                files: vec![("basis.csv".into(), csv), ("basis.json".into(), json_string(&basis)?)],
                primary: "basis.csv".into(),
                summary,
                passed: true,
            })
        }
        Command::Scales { .. } => {
            let p = params(cfg)?;
            let bound = bad_scale_bound(spec, &p);
            let mut rows = Vec::new();
            let mut worst = 0usize;
            for (i, x) in cfg.points().iter().enumerate() {
                let w = bad_scale_window(spec, x, &p);
                let ks = (*w.start()).min(-2)..=(*w.end()).max(cfg.k_max);
                let c = classify_scales(spec, x, &p, ks)?;
                worst = worst.max(c.bad_count());
                let table = c.to_csv()?;
                for line in table.lines().skip(1) {
                    rows.push(format!("{i},{line}"));
                }
            }
            let csv = format!("point,k,status,model_betas,center_distance\n{}\n", rows.join("\n"));
            let summary =
                serde_json::json!({ "bound": bound, "max_bad": worst, "within_bound": (worst as f64) <= bound });
            Ok(Outcome { files: vec![("scales.csv".into(), csv)], primary: "scales.csv".into(), summary, passed: true })
        }
        Command::Solve { method, .. } => {
            let f = cfg.source();
            let sol = solve_dirichlet_apex(spec, &f, None, 1.0, cfg.d_max.max(12.0))?;
            let pts: Vec<ConePoint> =
                sample_points(spec, 50, 5, cfg.seed).into_iter().filter(|p| p.rho() < 0.9).collect();
            let mut rows = Vec::new();
            let mut max_diff: f64 = 0.0;
            let fd = if *method == Method::Fd {
                let fv = |y: &ConePoint| f.eval(y);
                let gv = |y: &ConePoint| sol.eval(y);
                Some(solve_fd_polar(spec, &fv, &gv, &cfg.grid)?)
            } else {
                None
            };
            for p in &pts {
                let u = sol.eval(p);
                let ufd = match &fd {
                    Some(s) => match s.interpolate(p) {
                        Ok(v) => {
                            max_diff = max_diff.max((v - u).abs());
                            v.to_string()
                        }
                        Err(_) => String::new(),
                    },
                    None => String::new(),
                };
                rows.push(vec![
                    p.r(0).to_string(),
                    p.theta(0).to_string(),
                    p.s.first().copied().unwrap_or(0.0).to_string(),
                    u.to_string(),
                    ufd,
                ]);
            }
            let csv = csv_string(&["r", "theta", "s", "u", "u_fd"], rows)?;
            let passed = sol.residual < 1e-10 && sol.warnings.is_empty();
            let summary = serde_json::json!({
                "residual": sol.residual, "tail": sol.tail, "warnings": sol.warnings,
                "source_terms": sol.source_terms.len(), "max_fd_difference": fd.as_ref().map(|_| max_diff),
                "fd_residual": fd.as_ref().map(|s| s.residual),
            });
            Ok(Outcome {
                files: vec![("solution.csv".into(), csv), ("solution.json".into(), json_string(&sol)?)],
                primary: "solution.csv".into(),
                summary,
                passed,
            })
        }
        Command::Campanato { .. } => {
            let alpha = cfg.alpha()?;
            let f = cfg.source();
            let fv = |y: &ConePoint| f.eval(y);
            let points = cfg.points();
            let radii = dyadic_radii(8);
            let rep = campanato_estimate(spec, &fv, &points, alpha, &radii, &cfg.qmc())?;
            let rows = rep.scales.iter().map(|s| {
                vec![
                    s.center.to_string(),
                    s.radius.to_string(),
                    s.oscillation.value.to_string(),
                    (rep.k * s.radius.powf(alpha)).to_string(),
                    (s.oscillation.value <= rep.k * s.radius.powf(alpha)).to_string(),
                ]
            });
            let csv = csv_string(&["center", "scale", "norm", "bound", "pass"], rows)?;
            let summary = serde_json::json!({ "alpha": alpha, "K": rep.k });
            Ok(Outcome {
                files: vec![("campanato.csv".into(), csv)],
                primary: "campanato.csv".into(),
                summary,
                passed: rep.k.is_finite(),
            })
        }
        Command::VerifyMonotonicity { dmax } => {
            let ds = d_star(spec)?;
            let top = dmax.unwrap_or(cfg.d_max).max(ds);
            let modes: Vec<_> = harmonic_modes(spec, top)?.into_iter().filter(|m| m.degree > 2.0 + 1e-9).collect();
            let single = vec![(1.0, modes[0].clone())];
            let mixture: Vec<_> =
                modes.iter().take(5).enumerate().map(|(i, m)| (1.0 / (1.0 + i as f64), m.clone())).collect();
            let radii: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
            let mut rows = Vec::new();
            let mut passed = true;
            let mut equality = Vec::new();
            for (name, u) in [("single", &single), ("mixture", &mixture)] {
                let rep = check_monotonicity(spec, u, 2.0, &radii, &cfg.qmc())?;
                passed &= rep.pass;
                equality.push((name, rep.equality));
                for r in &rep.rows {
                    rows.push(vec![
                        name.to_string(),
                        r.radius.to_string(),
                        r.ratio.value.to_string(),
                        r.bound.to_string(),
                        r.pass.to_string(),
                    ]);
                }
            }
            passed &= equality[0].1;
            let csv = csv_string(&["case", "scale", "norm", "bound", "pass"], rows)?;
            let summary = serde_json::json!({ "d_star": ds, "single_equality": equality[0].1, "mixture_equality": equality[1].1 });
            Ok(Outcome {
                files: vec![("monotonicity.csv".into(), csv)],
                primary: "monotonicity.csv".into(),
                summary,
                passed,
            })
        }
        Command::VerifySchauder { .. } => {
            let alpha = cfg.alpha()?;
            let vcfg = VerifyConfig {
                iteration: SchauderConfig { lambda: cfg.lambda, eps0: cfg.eps0, k_max: cfg.k_max, qmc: cfg.qmc() },
                data_qmc: QmcConfig { seed: cfg.seed, ..VerifyConfig::default().data_qmc },
                ..VerifyConfig::default()
            };
            let v = verify_schauder(spec, &cfg.source(), &cfg.points(), alpha, &vcfg)?;
            let mut rows = Vec::new();
            for (i, p) in v.points.iter().enumerate() {
                for s in &p.trace.scales {
                    rows.push(vec![
                        i.to_string(),
                        s.k.to_string(),
                        s.good.to_string(),
                        s.radius.to_string(),
                        s.norm.value.to_string(),
                        s.norm.stderr.to_string(),
                    ]);
                }
            }
            let csv = csv_string(&["point", "k", "good", "radius", "norm", "norm_stderr"], rows)?;
            let min_slope =
                v.points.iter().filter_map(|p| p.trace.decay.map(|d| d.slope)).fold(f64::INFINITY, f64::min);
            let passed = v.all_finite && v.spread < 10.0 && min_slope >= 2.0 + alpha - 0.05;
            let summary = serde_json::json!({
                "alpha": alpha, "mu": mu(spec), "spread": v.spread, "all_finite": v.all_finite, "min_slope": min_slope,
                "ratios": v.points.iter().map(|p| p.ratio).collect::<Vec<_>>(),
            });
            Ok(Outcome {
                files: vec![("trace.csv".into(), csv), ("reports.json".into(), json_string(&v.points)?)],
                primary: "trace.csv".into(),
                summary,
                passed,
            })
        }
    }
}

fn apply_file_overrides(command: &Command, cfg: &mut RunConfig) -> Result<()> {
    match command {
        Command::Scales { points: Some(p) } | Command::VerifySchauder { points: Some(p), .. } => {
            cfg.points = read_json(p, "points")?;
        }
        Command::Solve { f: Some(p), .. } => cfg.f = Some(read_json(p, "f")?),
        _ => {}
    }
    match command {
        Command::VerifySchauder { alpha: Some(a), .. } | Command::Campanato { alpha: Some(a) } => cfg.alpha = Some(*a),
        _ => {}
    }
    cfg.validate()
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 2,
        Error::Scope { .. } => 3,
        Error::Domain(_) | Error::Numerical(_) | Error::Unsupported(_) => 4,
    }
}

/// Parse arguments, run and write artifacts; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match run_inner(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("error: a check failed; see the summary");
            4
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_inner(cli: &Cli) -> Result<bool> {
    if let Some(t) = cli.common.threads {
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut cfg = load_config(&cli.common)?;
    apply_file_overrides(&cli.command, &mut cfg)?;
    let start = Instant::now();
    let outcome = execute(&cli.command, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let summary = json_string(&outcome.summary)?;
    match &cli.common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let mut hashes = Vec::new();
            let mut files = outcome.files;
            files.push(("summary.json".into(), summary));
            let (table, cols) = csv_schema(&cli.command);
            let cols: Vec<_> = cols.iter().map(|(c, d)| serde_json::json!({ "column": c, "meaning": d })).collect();
            files.push(("schema.json".into(), json_string(&serde_json::json!({ table: cols }))?));
            for (name, body) in &files {
                fs::write(dir.join(name), body)?;
                hashes.push((name.clone(), sha256_hex(body.as_bytes())));
            }
            let manifest = Manifest {
                command: cli.command.name(),
                version: env!("CARGO_PKG_VERSION"),
                config_sha256: sha256_hex(serde_json::to_string(&cfg)?.as_bytes()),
                config: &cfg,
                elapsed_seconds: elapsed,
                passed: outcome.passed,
                outputs: hashes,
            };
            fs::write(dir.join("manifest.json"), json_string(&manifest)?)?;
            eprintln!("wrote {} files to {}", files.len() + 1, dir.display());
        }
        None => {
            let body = outcome.files.iter().find(|(n, _)| *n == outcome.primary).map(|(_, b)| b.as_str()).unwrap_or("");
            print!("{body}");
            eprint!("{summary}");
        }
    }
    Ok(outcome.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_csv_matches_table() {
        let cfg = RunConfig { spec: ConeSpec::new(vec![2.0 / 3.0], 1).unwrap(), ..Default::default() };
        let out = execute(&Command::Roots { dmax: Some(3.0) }, &cfg).unwrap();
        let csv = &out.files[0].1;
        let degrees: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(degrees, ["0", "1", "1.5", "2", "2.5", "3"]);
    }

    #[test]
    fn alpha_above_mu_is_a_scope_error() {
        let cfg = RunConfig { alpha: Some(0.5), ..Default::default() };
        let e = execute(&Command::VerifySchauder { alpha: None, points: None }, &cfg).err().unwrap();
        assert_eq!(exit_code(&e), 3);
        assert!(e.to_string().contains("mu = 0.333"));
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"betas": [0.5]}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"spec": {"betas": [0.6], "euclidean_dim": 2}}"#).unwrap();
        assert_eq!(c.spec.m(), 4);
    }
}
