//! End-to-end runs: mesh → space → smoothness → assembly → solve → evaluate.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::assembly::{assemble_general, CollocationSystem};
use crate::bernstein::SplineSpace;
use crate::evaluation::{append_csv, error_grid, fit_rate, ErrorReport, ResultRow};
use crate::mesh::{generate_rect_mesh, generate_square_mesh, load_mesh, Triangulation};
use crate::pde::{check_cordes, check_ellipticity, operator_by_name, CordesReport, Problem};
use crate::smoothness::{assemble_smoothness, SmoothnessSystem};
use crate::solver::{solve_al, SolverParams, SolverReport};
use crate::testlib::{manufacture_rhs, solution_by_name};
use crate::{io, Error, Result};

/// Settings of one run. Field names double as config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `square:n`, `box:n:xmin:xmax:ymin:ymax`, or a mesh file path.
    pub mesh: String,
    pub operator: String,
    pub solution: String,
    #[serde(rename = "D")]
    pub degree: usize,
    pub r: usize,
    /// Collocation degree, `D + 3` when absent.
    #[serde(rename = "Dprime")]
    pub dprime: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eps: Option<f64>,
    pub max_iter: usize,
    pub tol_step: f64,
    pub grid_n: usize,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Coefficient output; `.bin` selects raw little-endian.
    pub coefficients: Option<PathBuf>,
    /// Directory for `K`, `B`, `f`, `G` exports.
    pub export: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = SolverParams::default();
        Self {
            mesh: "square:4".into(),
            operator: "poisson".into(),
            solution: "us1".into(),
            degree: 8,
            r: 2,
            dprime: None,
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            eps: p.eps,
            max_iter: p.max_iter,
            tol_step: p.tol_step,
            grid_n: 1001,
            csv: None,
            json: None,
            coefficients: None,
            export: None,
            seed: 42,
            threads: None,
        }
    }
}

/// Reads a config value written as JSON when it parses, as a string otherwise.
fn loose_value(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()))
}

impl RunConfig {
    /// Parses a flat `key = value` file (`#` comments) or a JSON object.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()));
        }
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = Self::default();
        cfg.apply(&pairs)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Overrides fields from `key = value` pairs.
    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut map: Map<String, Value> = match serde_json::to_value(&*self).expect("config serializes") {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
        for (k, v) in pairs {
            if !map.contains_key(k) {
                return Err(Error::Config(format!("unknown key {k:?}")));
            }
            let val = match k.as_str() {
                "mesh" | "operator" | "solution" | "csv" | "json" | "coefficients" | "export" => {
                    Value::String(v.clone())
                }
                _ => loose_value(v),
            };
            map.insert(k.clone(), val);
        }
        *self = serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn dprime(&self) -> usize {
        self.dprime.unwrap_or(self.degree + 3)
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            eps: self.eps,
            max_iter: self.max_iter,
            tol_step: self.tol_step,
            lambda0: None,
        }
    }

    /// Hard errors for unusable settings, warnings for questionable ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.degree == 0 {
            return Err(Error::Config("D must be positive".into()));
        }
        if self.dprime() <= self.degree {
            return Err(Error::CollocationDegree { degree: self.degree, colloc_degree: self.dprime() });
        }
        if self.grid_n < 2 {
            return Err(Error::Config("grid_n must be at least 2".into()));
        }
        self.solver_params().validate().map_err(|e| Error::Config(e.to_string()))?;
        operator_by_name(&self.operator)?;
        solution_by_name(&self.solution)?;
        let mut warnings = Vec::new();
        if self.degree < 3 * self.r + 2 {
            warnings.push(format!(
                "D = {} is below 3r + 2 = {}; approximation power is not guaranteed",
                self.degree,
                3 * self.r + 2
            ));
        }
        Ok(warnings)
    }
}

/// A mesh description: generated grid or file.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Rect { n: usize, x: [f64; 2], y: [f64; 2] },
    File(PathBuf),
}

impl MeshSource {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad mesh source {s:?}"));
        if let Some(rest) = s.strip_prefix("square:") {
            let n = rest.parse().map_err(|_| bad())?;
            return Ok(Self::Rect { n, x: [0.0, 1.0], y: [0.0, 1.0] });
        }
        if let Some(rest) = s.strip_prefix("box:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 5 {
                return Err(bad());
            }
            let n = parts[0].parse().map_err(|_| bad())?;
            let v: Vec<f64> = parts[1..].iter().map(|p| p.parse().map_err(|_| bad())).collect::<Result<_>>()?;
            return Ok(Self::Rect { n, x: [v[0], v[1]], y: [v[2], v[3]] });
        }
        Ok(Self::File(PathBuf::from(s)))
    }

    /// The mesh after `level` halvings of `h`.
    pub fn build(&self, level: usize) -> Result<Triangulation> {
        match self {
            Self::Rect { n, x, y } if *x == [0.0, 1.0] && *y == [0.0, 1.0] => generate_square_mesh(n << level),
            Self::Rect { n, x, y } => generate_rect_mesh(n << level, *x, *y),
            Self::File(p) => {
                let mut m = load_mesh(p)?;
                for _ in 0..level {
                    m = m.uniform_refine()?;
                }
                Ok(m)
            }
        }
    }

    /// Label used in the CSV `domain` column.
    pub fn label(&self, level: usize) -> String {
        match self {
            Self::Rect { n, x, y } if *x == [0.0, 1.0] && *y == [0.0, 1.0] => format!("square:{}", n << level),
            Self::Rect { n, x, y } => format!("box:{}:{}:{}:{}:{}", n << level, x[0], x[1], y[0], y[1]),
            Self::File(p) if level == 0 => p.display().to_string(),
            Self::File(p) => format!("{}@{level}", p.display()),
        }
    }
}

/// An error tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Everything produced by one discretize-and-solve pass.
#[derive(Debug, Clone)]
pub struct Solved {
    pub space: SplineSpace,
    pub smooth: SmoothnessSystem,
    pub system: CollocationSystem,
    pub report: SolverReport,
}

/// Builds `S^{-1}_D`, the smoothness and collocation systems, and solves.
pub fn discretize_and_solve(
    mesh: Arc<Triangulation>,
    problem: &Problem,
    degree: usize,
    r: usize,
    dprime: usize,
    params: &SolverParams,
) -> std::result::Result<Solved, StageError> {
    let space = SplineSpace::new(mesh, degree, r).stage("space")?;
    let smooth = assemble_smoothness(&space, r).stage("smoothness")?;
    let system = assemble_general(&space, dprime, problem).stage("assembly")?;
    let report = solve_al(&system, &smooth, params).stage("solve")?;
    Ok(Solved { space, smooth, system, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub config: RunConfig,
    pub row: ResultRow,
    pub errors: ErrorReport,
    pub solver: SolverReport,
    pub cordes: Option<CordesReport>,
    pub warnings: Vec<String>,
}

impl SolveOutcome {
    /// `Cordés ε_max = 0.600`, or `None` for non-symmetric operators.
    pub fn cordes_line(&self) -> Option<String> {
        self.cordes.as_ref().map(|c| format!("Cordés ε_max = {:.3}", c.epsilon_max))
    }
}

fn solve_level(cfg: &RunConfig, source: &MeshSource, level: usize) -> std::result::Result<SolveOutcome, StageError> {
    let start = Instant::now();
    let mut warnings = cfg.validate().stage("config")?;
    let op = operator_by_name(&cfg.operator).stage("config")?;
    let sol = solution_by_name(&cfg.solution).stage("config")?;
    let mesh = Arc::new(source.build(level).stage("mesh")?);

    let samples: Vec<_> = {
        let space = SplineSpace::new(mesh.clone(), cfg.degree, cfg.r).stage("space")?;
        let pts = crate::assembly::collocation_points(&space, cfg.dprime()).stage("assembly")?;
        pts.interior.iter().map(|p| crate::assembly::data_point(&space, p)).collect()
    };
    let cordes = if op.is_symmetric() {
        let c = check_cordes(&op, &samples).stage("cordes")?;
        if !c.holds {
            warnings.push(format!("Cordés condition fails at {:?}", c.worst_point));
        }
        Some(c)
    } else {
        None
    };
    let ell = check_ellipticity(&op, &samples, 1e-10);
    if !ell.holds {
        warnings.push(format!(
            "operator is not uniformly elliptic: λ_min = {:.3e} at {:?}",
            ell.lambda_min, ell.worst_point
        ));
    }

    let problem = manufacture_rhs(sol, &op);
    let solved = discretize_and_solve(mesh, &problem, cfg.degree, cfg.r, cfg.dprime(), &cfg.solver_params())?;
    if let Some(dir) = &cfg.export {
        solved.system.export(dir).stage("export")?;
    }
    let errors = error_grid(&solved.space, &solved.report.c, |p| sol.u(p), |p| sol.gradient(p), cfg.grid_n)
        .stage("evaluation")?;
    let rep = &solved.report;
    let row = ResultRow {
        domain: source.label(level),
        operator: cfg.operator.clone(),
        solution: cfg.solution.clone(),
        degree: cfg.degree,
        r: cfg.r,
        dprime: cfg.dprime(),
        errors,
        res_pde: rep.residual_pde,
        res_h0: rep.residual_h0,
        res_hr: rep.residual_hr,
        iters: rep.iterations,
        seconds: start.elapsed().as_secs_f64(),
    };
    if let Some(path) = &cfg.coefficients {
        let w = if path.extension().is_some_and(|e| e == "bin") {
            io::write_coefficients_binary(path, &rep.c)
        } else {
            io::write_coefficients_ascii(path, &rep.c)
        };
        w.stage("output")?;
    }
    Ok(SolveOutcome { config: cfg.clone(), row, errors, solver: solved.report, cordes, warnings })
}

/// One solve; appends the CSV row and writes the JSON report when configured.
pub fn run_solve(cfg: &RunConfig) -> std::result::Result<SolveOutcome, StageError> {
    let source = MeshSource::parse(&cfg.mesh).stage("config")?;
    let out = solve_level(cfg, &source, 0)?;
    if let Some(csv) = &cfg.csv {
        append_csv(csv, &out.row).stage("output")?;
    }
    if let Some(json) = &cfg.json {
        let text = serde_json::to_string_pretty(&out).expect("outcome serializes");
        std::fs::write(json, text).map_err(Error::from).stage("output")?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyOutcome {
    pub levels: Vec<ResultRow>,
    /// Slope of `log l2` against `log h`.
    pub slope_h: f64,
    /// Slope of `log l2` against `log dof`.
    pub slope_dof: f64,
    pub slope_h1: f64,
    /// Set when the errors do not change across levels; slopes are then 0.
    pub degenerate: bool,
}

impl StudyOutcome {
    pub fn rate_table(&self) -> String {
        let mut s = String::from("level,h,dof,l2,h1\n");
        for (i, r) in self.levels.iter().enumerate() {
            s.push_str(&format!("{},{:.6e},{},{:.6e},{:.6e}\n", i, r.errors.h, r.errors.dof, r.errors.l2, r.errors.h1));
        }
        s.push_str(&format!("# slope_vs_h = {:.3}\n# slope_vs_dof = {:.3}\n", self.slope_h, self.slope_dof));
        if self.degenerate {
            s.push_str("# degenerate: errors identical across levels\n");
        }
        s
    }
}

/// Slopes for a refinement sequence, flagging sequences whose errors do not change.
pub fn study_slopes(rows: &[ResultRow]) -> Result<(f64, f64, f64, bool)> {
    let l2: Vec<f64> = rows.iter().map(|r| r.errors.l2).collect();
    let (lo, hi) = l2.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if hi == 0.0 || (hi - lo) <= 1e-12 * hi {
        return Ok((0.0, 0.0, 0.0, true));
    }
    let slope_h = fit_rate(&rows.iter().map(|r| (r.errors.h, r.errors.l2)).collect::<Vec<_>>())?;
    let slope_dof = fit_rate(&rows.iter().map(|r| (r.errors.dof as f64, r.errors.l2)).collect::<Vec<_>>())?;
    let slope_h1 = fit_rate(&rows.iter().map(|r| (r.errors.h, r.errors.h1)).collect::<Vec<_>>())?;
    Ok((slope_h, slope_dof, slope_h1, false))
}

/// Solves on `levels` successively halved meshes, sequentially.
pub fn run_study(cfg: &RunConfig, levels: usize) -> std::result::Result<StudyOutcome, StageError> {
    if levels < 3 {
        return Err(StageError {
            stage: "config",
            error: Error::Config(format!("a study needs at least 3 levels, got {levels}")),
        });
    }
    let source = MeshSource::parse(&cfg.mesh).stage("config")?;
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let out = solve_level(cfg, &source, level)?;
        if let Some(csv) = &cfg.csv {
            append_csv(csv, &out.row).stage("output")?;
        }
        rows.push(out.row);
    }
    let (slope_h, slope_dof, slope_h1, degenerate) = study_slopes(&rows).stage("rate fit")?;
    let out = StudyOutcome { levels: rows, slope_h, slope_dof, slope_h1, degenerate };
    if let Some(json) = &cfg.json {
        let text = serde_json::to_string_pretty(&out).expect("outcome serializes");
        std::fs::write(json, text).map_err(Error::from).stage("output")?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshReport {
    pub vertices: usize,
    pub triangles: usize,
    pub interior_edges: usize,
    pub boundary_edges: usize,
    pub area: f64,
    pub h: f64,
    pub shape_constant: f64,
}

impl fmt::Display for MeshReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "conforming triangulation")?;
        writeln!(f, "vertices        {}", self.vertices)?;
        writeln!(f, "triangles       {}", self.triangles)?;
        writeln!(f, "interior edges  {}", self.interior_edges)?;
        writeln!(f, "boundary edges  {}", self.boundary_edges)?;
        writeln!(f, "area            {:.6}", self.area)?;
        writeln!(f, "h               {:.6}", self.h)?;
        write!(f, "shape_constant  {:.6}", self.shape_constant)
    }
}

/// Validates a mesh source and reports its size and quasi-uniformity.
pub fn check_mesh(source: &str) -> Result<MeshReport> {
    let m = MeshSource::parse(source)?.build(0)?;
    Ok(MeshReport {
        vertices: m.num_vertices(),
        triangles: m.num_triangles(),
        interior_edges: m.interior_edges().len(),
        boundary_edges: m.boundary_edges().len(),
        area: m.area(),
        h: m.h(),
        shape_constant: m.shape_constant(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_and_json_configs_agree() {
        let kv = RunConfig::parse("# demo\nmesh = square:2\nD = 5\nr = 1\nalpha = 10\neps = 1e-4\n").unwrap();
        let js = RunConfig::parse(r#"{"mesh": "square:2", "D": 5, "r": 1, "alpha": 10.0, "eps": 1e-4}"#).unwrap();
        assert_eq!(kv, js);
        assert_eq!(kv.dprime(), 8);
        assert!(RunConfig::parse("colour = blue\n").is_err());
        assert!(RunConfig::parse("D = many\n").is_err());
    }

    #[test]
    fn overrides_and_validation() {
        let mut cfg = RunConfig::default();
        cfg.apply(&[("Dprime".into(), "8".into())]).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::CollocationDegree { .. })));
        cfg.apply(&[("Dprime".into(), "9".into()), ("r".into(), "3".into())]).unwrap();
        assert_eq!(cfg.validate().unwrap().len(), 1);
    }

    #[test]
    fn mesh_sources() {
        assert_eq!(MeshSource::parse("square:3").unwrap(), MeshSource::Rect { n: 3, x: [0.0, 1.0], y: [0.0, 1.0] });
        let b = MeshSource::parse("box:2:-1:1:-1:1").unwrap();
        assert_eq!(b.build(1).unwrap().num_triangles(), 32);
        assert_eq!(b.label(1), "box:4:-1:1:-1:1");
        assert!(MeshSource::parse("square:x").is_err());
        let r = check_mesh("square:4").unwrap();
        assert_eq!(r.triangles, 32);
        assert!((r.shape_constant - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn degenerate_study_is_flagged() {
        let row = |h: f64| ResultRow {
            domain: String::new(),
            operator: String::new(),
            solution: String::new(),
            degree: 1,
            r: 0,
            dprime: 2,
            errors: ErrorReport { l2: 0.5, h1: 0.5, linf: 0.5, grad_rms: 0.0, n_points: 1, h, dof: 1 },
            res_pde: 0.0,
            res_h0: 0.0,
            res_hr: 0.0,
            iters: 1,
            seconds: 0.0,
        };
        let (s, _, _, flag) = study_slopes(&[row(0.5), row(0.25), row(0.125)]).unwrap();
        assert_eq!(s, 0.0);
        assert!(flag);
    }
}
