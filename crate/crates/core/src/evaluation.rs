//! Grid error norms, smoothness residuals and convergence-rate fits.

use rayon::prelude::*;
use serde::Serialize;

use crate::bernstein::SplineSpace;
use crate::smoothness::SmoothnessSystem;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    /// RMS of `u - u_s` over in-domain grid points.
    pub l2: f64,
    /// RMS of `(e, e_x, e_y)` taken together.
    pub h1: f64,
    pub linf: f64,
    /// RMS of `|grad u - grad u_s|`.
    pub grad_rms: f64,
    pub n_points: usize,
    pub h: f64,
    pub dof: usize,
}

/// Errors of the spline `c` against `u` on a `grid_n x grid_n` grid laid
/// over the mesh bounding box. Points outside the mesh are skipped, points
/// on its boundary count.
pub fn error_grid(
    space: &SplineSpace,
    c: &[f64],
    u: impl Fn(Point) -> f64 + Sync,
    grad: impl Fn(Point) -> [f64; 2] + Sync,
    grid_n: usize,
) -> Result<ErrorReport> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument(format!("grid_n must be at least 2, got {grid_n}")));
    }
    if c.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: c.len() });
    }
    let mesh = space.mesh();
    let [x0, x1, y0, y1] = mesh.bounding_box();
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (grid_n - 1) as f64;

    // Per-row partial sums, combined in row order below.
    let rows: Vec<[f64; 4]> = (0..grid_n)
        .into_par_iter()
        .map(|j| {
            let y = step(y0, y1, j);
            let mut acc = [0.0; 4];
            for i in 0..grid_n {
                let p = [step(x0, x1, i), y];
                let Some((t, _)) = mesh.locate_point(p) else { continue };
                let s = space.eval_piece(c, t, p, true);
                let g = s.gradient.unwrap();
                let e = u(p) - s.value;
                let ge = grad(p);
                let (ex, ey) = (ge[0] - g[0], ge[1] - g[1]);
                acc[0] += e * e;
                acc[1] += ex * ex + ey * ey;
                acc[2] = acc[2].max(e.abs());
                acc[3] += 1.0;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 4];
    for r in &rows {
        tot[0] += r[0];
        tot[1] += r[1];
        tot[2] = tot[2].max(r[2]);
        tot[3] += r[3];
    }
    let n = tot[3];
    if n == 0.0 {
        return Err(Error::InvalidArgument("no grid point falls inside the mesh".into()));
    }
    Ok(ErrorReport {
        l2: (tot[0] / n).sqrt(),
        h1: ((tot[0] + tot[1]) / n).sqrt(),
        linf: tot[2],
        grad_rms: (tot[1] / n).sqrt(),
        n_points: n as usize,
        h: mesh.h(),
        dof: space.dim(),
    })
}

/// `(|H0 c|_inf, |Hr c|_inf)`.
pub fn smoothness_residual(smooth: &SmoothnessSystem, c: &[f64]) -> Result<(f64, f64)> {
    if smooth.h0.ncols() != c.len() {
        return Err(Error::DimensionMismatch { expected: smooth.h0.ncols(), got: c.len() });
    }
    Ok(smooth.residual(c))
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("rate fit needs at least 3 levels, got {}", points.len())));
    }
    if let Some(&(h, e)) = points.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0)) {
        return Err(Error::InvalidArgument(format!("rate fit needs positive values, got h = {h}, error = {e}")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs distinct h values".into()));
    }
    Ok(sxy / sxx)
}

/// Version tag written as the first CSV line.
pub const CSV_VERSION: &str = "# spline-colloc results v1";
pub const CSV_HEADER: &str = "domain,operator,solution,D,r,Dprime,h,dof,l2,h1,linf,res_pde,res_H0,res_Hr,iters,seconds";

/// One row of the results CSV.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub domain: String,
    pub operator: String,
    pub solution: String,
    pub degree: usize,
    pub r: usize,
    pub dprime: usize,
    pub errors: ErrorReport,
    pub res_pde: f64,
    pub res_h0: f64,
    pub res_hr: f64,
    pub iters: usize,
    pub seconds: f64,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let e = &self.errors;
        format!(
            "{},{},{},{},{},{},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{},{:.3}",
            self.domain,
            self.operator,
            self.solution,
            self.degree,
            self.r,
            self.dprime,
            e.h,
            e.dof,
            e.l2,
            e.h1,
            e.linf,
            self.res_pde,
            self.res_h0,
            self.res_hr,
            self.iters,
            self.seconds
        )
    }
}

/// Appends `row` to a CSV file, writing the version line and header first
/// when the file is new or empty.
pub fn append_csv(path: &std::path::Path, row: &ResultRow) -> Result<()> {
    use std::io::Write;
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{CSV_VERSION}")?;
        writeln!(f, "{CSV_HEADER}")?;
    }
    writeln!(f, "{}", row.to_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::generate_square_mesh;

    fn space() -> SplineSpace {
        SplineSpace::new(Arc::new(generate_square_mesh(2).unwrap()), 3, 1).unwrap()
    }

    #[test]
    fn self_comparison_is_exact() {
        let s = space();
        let c = s.interpolate(|p| p[0] * p[0] * p[1] - p[1]);
        let r =
            error_grid(&s, &c, |p| p[0] * p[0] * p[1] - p[1], |p| [2.0 * p[0] * p[1], p[0] * p[0] - 1.0], 51).unwrap();
        assert!(r.l2 < 1e-13 && r.linf < 1e-13 && r.h1 < 1e-12);
        assert_eq!(r.n_points, 51 * 51);
        assert_eq!(r.dof, 8 * 10);
    }

    #[test]
    fn zero_spline_against_one() {
        let s = space();
        let r = error_grid(&s, &vec![0.0; s.dim()], |_| 1.0, |_| [0.0, 0.0], 11).unwrap();
        assert_eq!((r.l2, r.linf, r.h1, r.grad_rms), (1.0, 1.0, 1.0, 0.0));
        assert!(error_grid(&s, &vec![0.0; s.dim()], |_| 1.0, |_| [0.0, 0.0], 1).is_err());
    }

    #[test]
    fn rate_fits() {
        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&h| (h, h * h)).collect();
        assert!((fit_rate(&pts).unwrap() - 2.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&h| (h, 3.0)).collect();
        assert_eq!(fit_rate(&flat).unwrap(), 0.0);
        assert!(fit_rate(&[(0.5, 1.0), (0.25, 0.0), (0.1, 1.0)]).is_err());
        assert!(fit_rate(&pts[..2]).is_err());
    }

    #[test]
    fn csv_row_shape() {
        let row = ResultRow {
            domain: "square:2".into(),
            operator: "poisson".into(),
            solution: "us1".into(),
            degree: 8,
            r: 2,
            dprime: 11,
            errors: ErrorReport { l2: 1.0, h1: 2.0, linf: 3.0, grad_rms: 1.0, n_points: 4, h: 0.5, dof: 360 },
            res_pde: 0.0,
            res_h0: 0.0,
            res_hr: 0.0,
            iters: 3,
            seconds: 0.25,
        };
        assert_eq!(row.to_csv().split(',').count(), CSV_HEADER.split(',').count());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        append_csv(&path, &row).unwrap();
        append_csv(&path, &row).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().nth(1), Some(CSV_HEADER));
    }
}
