//! Collocation systems at degree-`D'` domain points.
//!
//! Interior points give PDE rows `K c + f`, boundary points give Dirichlet
//! rows `B c - G`. A point shared by several triangles is used once and is
//! owned by the smallest triangle index.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::bernstein::{dim_poly, multi_indices, MultiIndex, SplineSpace};
use crate::pde::{PdeOperator, Problem, ScalarFn};
use crate::sparse::BlockRowMatrix;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationPoint {
    pub point: Point,
    /// Owning triangle.
    pub triangle: usize,
    /// Degree-`D'` multi-index of the point in its owning triangle.
    pub index: MultiIndex,
}

#[derive(Debug, Clone, Default)]
pub struct CollocationPoints {
    pub interior: Vec<CollocationPoint>,
    pub boundary: Vec<CollocationPoint>,
}

#[derive(Debug, Clone)]
pub struct CollocationSystem {
    /// One row per interior point, operator applied to the owning triangle's basis.
    pub k: BlockRowMatrix,
    /// One row per boundary point, basis values.
    pub bmat: BlockRowMatrix,
    pub fvec: Vec<f64>,
    pub gvec: Vec<f64>,
    pub interior: Vec<CollocationPoint>,
    pub boundary: Vec<CollocationPoint>,
}

#[derive(Hash, PartialEq, Eq)]
enum PointKey {
    Vertex(usize),
    /// Sorted endpoints and the exponent of the smaller one.
    Edge(usize, usize, usize),
    Inside(usize, MultiIndex),
}

/// Degree-`D'` domain points of every triangle, deduplicated and split into
/// interior and boundary lists. Both lists follow triangle order, then the
/// canonical multi-index order.
pub fn collocation_points(space: &SplineSpace, dprime: usize) -> Result<CollocationPoints> {
    let d = space.degree();
    if dprime <= d {
        return Err(Error::CollocationDegree { degree: d, colloc_degree: dprime });
    }
    let mesh = space.mesh();
    let mut boundary_vertex = vec![false; mesh.num_vertices()];
    let mut boundary_edge = std::collections::HashSet::new();
    for e in mesh.boundary_edges() {
        boundary_vertex[e.vertices[0]] = true;
        boundary_vertex[e.vertices[1]] = true;
        boundary_edge.insert(e.vertices);
    }

    let indices = multi_indices(dprime);
    let mut seen = HashMap::new();
    let mut out = CollocationPoints::default();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pts = mesh.triangle_points(t);
        for &m in &indices {
            let e = m.as_array();
            let zeros: Vec<usize> = (0..3).filter(|&l| e[l] == 0).collect();
            let (key, on_boundary) = match zeros.len() {
                2 => {
                    let l = (0..3).find(|&l| e[l] == dprime).unwrap();
                    (PointKey::Vertex(tri[l]), boundary_vertex[tri[l]])
                }
                1 => {
                    let l = zeros[0];
                    let (a, b) = ((l + 1) % 3, (l + 2) % 3);
                    let (lo, hi) = if tri[a] < tri[b] { (a, b) } else { (b, a) };
                    let verts = [tri[lo], tri[hi]];
                    (PointKey::Edge(verts[0], verts[1], e[lo]), boundary_edge.contains(&verts))
                }
                _ => (PointKey::Inside(t, m), false),
            };
            if seen.insert(key, ()).is_some() {
                continue;
            }
            let s = dprime as f64;
            let point = [
                (e[0] as f64 * pts[0][0] + e[1] as f64 * pts[1][0] + e[2] as f64 * pts[2][0]) / s,
                (e[0] as f64 * pts[0][1] + e[1] as f64 * pts[1][1] + e[2] as f64 * pts[2][1]) / s,
            ];
            let cp = CollocationPoint { point, triangle: t, index: m };
            if on_boundary {
                out.boundary.push(cp);
            } else {
                out.interior.push(cp);
            }
        }
    }
    Ok(out)
}

/// Where data (`f` and operator coefficients) is sampled for a collocation
/// point: points on a triangle edge are pulled a relative `1e-9` toward the
/// owning triangle's centroid, so piecewise-defined data is read from the
/// same side as the polynomial piece it constrains.
pub fn data_point(space: &SplineSpace, cp: &CollocationPoint) -> Point {
    if cp.index.as_array().iter().all(|&e| e > 0) {
        return cp.point;
    }
    let tri = space.mesh().triangle_points(cp.triangle);
    let c = [(tri[0][0] + tri[1][0] + tri[2][0]) / 3.0, (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0];
    const PULL: f64 = 1e-9;
    [cp.point[0] + PULL * (c[0] - cp.point[0]), cp.point[1] + PULL * (c[1] - cp.point[1])]
}

fn check_finite(v: f64, what: &'static str, at: Point) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what, at })
    }
}

/// Rows of `K` for `op`, one per point, each confined to the owner's block.
pub fn operator_rows(space: &SplineSpace, points: &[CollocationPoint], op: &PdeOperator) -> Result<BlockRowMatrix> {
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|cp| {
            let q = data_point(space, cp);
            let co = op.coefficients(q);
            let flat = [co.a[0][0], co.a[0][1], co.a[1][0], co.a[1][1], co.b[0], co.b[1], co.c];
            for v in flat {
                check_finite(v, "operator coefficient", cp.point)?;
            }
            let bd = space.basis(cp.triangle).eval_all(cp.point);
            Ok((0..bd.value.len())
                .map(|i| co.apply([bd.dxx[i], bd.dxy[i], bd.dyy[i]], [bd.dx[i], bd.dy[i]], bd.value[i]))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut k = BlockRowMatrix::new(space.dim(), space.per_triangle());
    for (cp, row) in points.iter().zip(&rows) {
        k.push_row(cp.triangle, row);
    }
    Ok(k)
}

/// Dirichlet rows: the spline evaluated at each boundary point, and `g` there.
pub fn boundary_system(
    space: &SplineSpace,
    points: &[CollocationPoint],
    g: &ScalarFn,
) -> Result<(BlockRowMatrix, Vec<f64>)> {
    let mut bmat = BlockRowMatrix::new(space.dim(), space.per_triangle());
    for cp in points {
        bmat.push_row(cp.triangle, &space.basis(cp.triangle).values(cp.point));
    }
    let gvec = points.par_iter().map(|cp| check_finite(g(cp.point), "g", cp.point)).collect::<Result<_>>()?;
    Ok((bmat, gvec))
}

/// Full system for `-L u = f`, `u = g` with collocation degree `dprime`.
pub fn assemble_general(space: &SplineSpace, dprime: usize, problem: &Problem) -> Result<CollocationSystem> {
    let pts = collocation_points(space, dprime)?;
    let rows = pts.interior.len() + pts.boundary.len();
    if space.mesh().num_triangles() >= 2 && rows <= space.dim() {
        return Err(Error::InvalidArgument(format!(
            "{rows} collocation conditions do not over-determine {} coefficients",
            space.dim()
        )));
    }
    let k = operator_rows(space, &pts.interior, &problem.operator)?;
    let fvec = pts
        .interior
        .par_iter()
        .map(|cp| check_finite((problem.f)(data_point(space, cp)), "f", cp.point))
        .collect::<Result<_>>()?;
    let (bmat, gvec) = boundary_system(space, &pts.boundary, &problem.g)?;
    Ok(CollocationSystem { k, bmat, fvec, gvec, interior: pts.interior, boundary: pts.boundary })
}

/// [`assemble_general`] with the Laplacian, i.e. `-Δu = f`.
pub fn assemble_poisson(
    space: &SplineSpace,
    dprime: usize,
    f: impl Fn(Point) -> f64 + Send + Sync + 'static,
    g: impl Fn(Point) -> f64 + Send + Sync + 'static,
) -> Result<CollocationSystem> {
    assemble_general(space, dprime, &Problem::new(PdeOperator::laplacian(), f, g))
}

impl CollocationSystem {
    /// `K c + f`.
    pub fn pde_residual(&self, c: &[f64]) -> Vec<f64> {
        self.k.mul_vec(c).iter().zip(&self.fvec).map(|(a, b)| a + b).collect()
    }

    /// `B c - G`.
    pub fn boundary_residual(&self, c: &[f64]) -> Vec<f64> {
        self.bmat.mul_vec(c).iter().zip(&self.gvec).map(|(a, b)| a - b).collect()
    }

    /// Writes `K` and `B` as coordinate triplets and `f`, `G` as one value per line.
    pub fn export(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<std::io::BufWriter<std::fs::File>> {
            Ok(std::io::BufWriter::new(std::fs::File::create(dir.join(name))?))
        };
        self.k.to_csr().write_triplets(open("K.txt")?)?;
        self.bmat.to_csr().write_triplets(open("B.txt")?)?;
        for (name, v) in [("f.txt", &self.fvec), ("G.txt", &self.gvec)] {
            let mut w = open(name)?;
            for x in v.iter() {
                writeln!(w, "{x:.17e}")?;
            }
        }
        Ok(())
    }
}

/// Number of distinct degree-`d` domain points on a mesh: one per vertex,
/// `d - 1` per edge and `dim(d - 3)` inside each triangle.
pub fn distinct_domain_points(num_vertices: usize, num_edges: usize, num_triangles: usize, d: usize) -> usize {
    let inside = if d >= 3 { dim_poly(d - 3) } else { 0 };
    num_vertices + num_edges * (d - 1) + num_triangles * inside
}
