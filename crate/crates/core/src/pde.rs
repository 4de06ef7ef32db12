//! Second-order operators in non-divergence form,
//! `L u = sum a^{ij} u_{x_i x_j} + sum b^i u_{x_i} + c u`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::{Error, Point, Result};

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;

/// Names of the built-in operators.
pub const OPERATOR_NAMES: [&str; 4] = ["poisson", "ex0-smooth", "ex1-cordes", "ex2-cordes"];

/// Coefficients of an operator at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: f64,
}

#[derive(Clone)]
pub struct PdeOperator {
    name: String,
    a: MatrixFn,
    b: Option<VectorFn>,
    c: Option<ScalarFn>,
    symmetric: bool,
}

impl fmt::Debug for PdeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeOperator")
            .field("name", &self.name)
            .field("has_drift", &self.b.is_some())
            .field("has_reaction", &self.c.is_some())
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

/// `sign(x)` with `sign(0) = 1`.
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl PdeOperator {
    /// Operator with principal part `a` only. `symmetric` asserts `a12 = a21`.
    pub fn new(
        name: impl Into<String>,
        a: impl Fn(Point) -> [[f64; 2]; 2] + Send + Sync + 'static,
        symmetric: bool,
    ) -> Self {
        Self { name: name.into(), a: Arc::new(a), b: None, c: None, symmetric }
    }

    pub fn with_drift(mut self, b: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.b = Some(Arc::new(b));
        self
    }

    pub fn with_reaction(mut self, c: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.c = Some(Arc::new(c));
        self
    }

    pub fn laplacian() -> Self {
        Self::new("poisson", |_| [[1.0, 0.0], [0.0, 1.0]], true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn coefficients(&self, p: Point) -> Coefficients {
        Coefficients {
            a: (self.a)(p),
            b: self.b.as_ref().map_or([0.0; 2], |b| b(p)),
            c: self.c.as_ref().map_or(0.0, |c| c(p)),
        }
    }

    /// `L u` at `p` from `second = [u_xx, u_xy, u_yy]`, `gradient` and `value`.
    pub fn apply(&self, p: Point, second: [f64; 3], gradient: [f64; 2], value: f64) -> f64 {
        self.coefficients(p).apply(second, gradient, value)
    }

    /// Verifies `a12 = a21` (within 1e-12) at every sample when the operator
    /// claims symmetry.
    pub fn check_symmetry(&self, samples: &[Point]) -> Result<()> {
        if !self.symmetric {
            return Ok(());
        }
        for &p in samples {
            let a = (self.a)(p);
            if (a[0][1] - a[1][0]).abs() > 1e-12 {
                return Err(Error::NotSymmetric(p));
            }
        }
        Ok(())
    }
}

impl Coefficients {
    pub fn apply(&self, second: [f64; 3], gradient: [f64; 2], value: f64) -> f64 {
        let [uxx, uxy, uyy] = second;
        self.a[0][0] * uxx
            + (self.a[0][1] + self.a[1][0]) * uxy
            + self.a[1][1] * uyy
            + self.b[0] * gradient[0]
            + self.b[1] * gradient[1]
            + self.c * value
    }
}

/// `L u` at `p`, free-function form of [`PdeOperator::apply`].
pub fn apply_operator(op: &PdeOperator, second: [f64; 3], gradient: [f64; 2], value: f64, p: Point) -> f64 {
    op.apply(p, second, gradient, value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CordesReport {
    pub holds: bool,
    /// Largest `eps` with `R(x) <= 1 / (1 + eps)` at every sample.
    pub epsilon_max: f64,
    /// Largest sampled ratio `sum a_ij^2 / (sum a_ii)^2`.
    pub ratio_max: f64,
    pub worst_point: Point,
}

/// Samples the Cordes condition (d = 2).
pub fn check_cordes(op: &PdeOperator, samples: &[Point]) -> Result<CordesReport> {
    if !op.symmetric {
        return Err(Error::NotSymmetric(samples.first().copied().unwrap_or([0.0, 0.0])));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("Cordes check needs at least one sample point".into()));
    }
    op.check_symmetry(samples)?;
    let mut report = CordesReport { holds: false, epsilon_max: f64::INFINITY, ratio_max: 0.0, worst_point: samples[0] };
    for &p in samples {
        let a = (op.a)(p);
        let trace = a[0][0] + a[1][1];
        if trace == 0.0 || !trace.is_finite() {
            return Err(Error::ZeroTrace(p));
        }
        let frob2 = a.iter().flatten().map(|v| v * v).sum::<f64>();
        let ratio = frob2 / (trace * trace);
        let eps = 1.0 / ratio - 1.0;
        if eps < report.epsilon_max {
            report.epsilon_max = eps;
            report.ratio_max = ratio;
            report.worst_point = p;
        }
    }
    report.epsilon_max = report.epsilon_max.min(1.0);
    report.holds = report.epsilon_max > 0.0;
    Ok(report)
}

/// `trace(a) / |a|_F^2` at `p`.
pub fn theta(op: &PdeOperator, p: Point) -> Result<f64> {
    let a = (op.a)(p);
    let frob2 = a.iter().flatten().map(|v| v * v).sum::<f64>();
    if frob2 == 0.0 {
        return Err(Error::ZeroCoefficients(p));
    }
    Ok((a[0][0] + a[1][1]) / frob2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub holds: bool,
    /// Smallest eigenvalue of the symmetrized `a` over the samples.
    pub lambda_min: f64,
    pub worst_point: Point,
}

/// Smallest eigenvalue of `(a + a^T) / 2` over the samples against `threshold`.
pub fn check_ellipticity(op: &PdeOperator, samples: &[Point], threshold: f64) -> EllipticityReport {
    let mut report = EllipticityReport { holds: true, lambda_min: f64::INFINITY, worst_point: [f64::NAN; 2] };
    for &p in samples {
        let a = (op.a)(p);
        let (s11, s22, s12) = (a[0][0], a[1][1], 0.5 * (a[0][1] + a[1][0]));
        let mean = 0.5 * (s11 + s22);
        let rad = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
        let lmin = mean - rad;
        if lmin < report.lambda_min {
            report.lambda_min = lmin;
            report.worst_point = p;
        }
    }
    report.holds = report.lambda_min >= threshold;
    report
}

/// A boundary value problem `-L u = f` in the domain, `u = g` on its boundary.
#[derive(Clone)]
pub struct Problem {
    pub operator: PdeOperator,
    pub f: ScalarFn,
    pub g: ScalarFn,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem").field("operator", &self.operator).finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        operator: PdeOperator,
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { operator, f: Arc::new(f), g: Arc::new(g) }
    }
}

/// Built-in operators by name.
///
/// * `poisson`: the Laplacian.
/// * `ex0-smooth`: smooth, non-symmetric coefficients with drift.
/// * `ex1-cordes`: `a_ij = (1 + d_ij) sign(x_i) sign(x_j)`.
/// * `ex2-cordes`: `a_ij = d_ij + x_i x_j / |x|^2`, direction `(1, 0)` at the origin.
pub fn operator_by_name(name: &str) -> Result<PdeOperator> {
    Ok(match name {
        "poisson" => PdeOperator::laplacian(),
        "ex0-smooth" => PdeOperator::new(
            "ex0-smooth",
            |[x, y]| [[x * x + y * y, (x * y).cos()], [(x * y).exp(), x.powi(3) + y * y - (x * x + y * y).sin()]],
            false,
        )
        .with_drift(|[x, y]| [3.0 * x.cos() * y * y, (-x * x - y * y).exp()]),
        "ex1-cordes" => PdeOperator::new(
            "ex1-cordes",
            |[x, y]| {
                let (sx, sy) = (sign(x), sign(y));
                [[2.0, sx * sy], [sx * sy, 2.0]]
            },
            true,
        ),
        "ex2-cordes" => PdeOperator::new(
            "ex2-cordes",
            |[x, y]| {
                let r2 = x * x + y * y;
                let (nx, ny) = if r2 > 0.0 { (x / r2.sqrt(), y / r2.sqrt()) } else { (1.0, 0.0) };
                [[1.0 + nx * nx, nx * ny], [nx * ny, 1.0 + ny * ny]]
            },
            true,
        ),
        _ => return Err(Error::Unknown { kind: "operator", name: name.to_string() }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<Point> {
        let mut v = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                v.push([lo + (hi - lo) * i as f64 / n as f64, lo + (hi - lo) * j as f64 / n as f64]);
            }
        }
        v
    }

    #[test]
    fn laplacian_of_x_squared() {
        let op = PdeOperator::laplacian();
        assert_eq!(op.apply([0.3, -2.0], [2.0, 0.0, 0.0], [0.6, 0.0], 0.09), 2.0);
    }

    #[test]
    fn ex0_vanishes_at_origin_on_pure_uxx() {
        let op = operator_by_name("ex0-smooth").unwrap();
        assert_eq!(op.apply([0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0], 0.0), 0.0);
        assert!(matches!(check_cordes(&op, &[[0.5, 0.5]]), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn cordes_constants() {
        let samples = grid(-1.0, 1.0, 10);
        let lap = check_cordes(&PdeOperator::laplacian(), &samples).unwrap();
        assert!(lap.holds && (lap.epsilon_max - 1.0).abs() < 1e-15);
        let ex1 = check_cordes(&operator_by_name("ex1-cordes").unwrap(), &samples).unwrap();
        assert!((ex1.ratio_max - 10.0 / 16.0).abs() < 1e-12);
        assert!((ex1.epsilon_max - 0.6).abs() < 1e-12);
        let ex2 = check_cordes(&operator_by_name("ex2-cordes").unwrap(), &samples).unwrap();
        assert!((ex2.epsilon_max - 0.8).abs() < 1e-12);
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(&PdeOperator::laplacian(), [0.1, 0.2]).unwrap(), 1.0);
        let ex1 = operator_by_name("ex1-cordes").unwrap();
        assert!((theta(&ex1, [-0.3, 0.7]).unwrap() - 0.4).abs() < 1e-15);
        let scaled = PdeOperator::new("scaled", |_| [[3.0, 0.0], [0.0, 3.0]], true);
        assert!((theta(&scaled, [0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let zero = PdeOperator::new("zero", |_| [[0.0; 2]; 2], true);
        assert!(matches!(theta(&zero, [0.0, 0.0]), Err(Error::ZeroCoefficients(_))));
        assert!(matches!(check_cordes(&zero, &[[0.0, 0.0]]), Err(Error::ZeroTrace(_))));
    }

    #[test]
    fn ellipticity() {
        let samples = grid(-1.0, 1.0, 8);
        let r = check_ellipticity(&operator_by_name("ex1-cordes").unwrap(), &samples, 1e-10);
        assert!(r.holds && (r.lambda_min - 1.0).abs() < 1e-15);
        let r = check_ellipticity(&operator_by_name("ex0-smooth").unwrap(), &samples, 1e-10);
        assert!(!r.holds);
    }

    #[test]
    fn unknown_operator() {
        assert!(matches!(operator_by_name("heat"), Err(Error::Unknown { .. })));
    }
}
