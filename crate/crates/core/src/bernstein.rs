//! Bernstein-Bezier polynomials on triangles and splines in B-form.
//!
//! The B-coefficients of triangle `t` occupy the contiguous column block
//! `t * per_triangle .. (t + 1) * per_triangle`. Inside a block, multi-indices
//! `(i, j, k)` are ordered with `i` descending, then `j` descending.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::mesh::Triangulation;
use crate::{Error, Point, Result};

/// Exponent triple `(i, j, k)` of a Bernstein polynomial, `i + j + k = D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl MultiIndex {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        Self { i, j, k }
    }

    pub fn degree(&self) -> usize {
        self.i + self.j + self.k
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }

    pub fn from_array(a: [usize; 3]) -> Self {
        Self { i: a[0], j: a[1], k: a[2] }
    }

    /// Position of this index within its degree's canonical ordering.
    pub fn local_index(&self) -> usize {
        let a = self.j + self.k;
        a * (a + 1) / 2 + self.k
    }
}

/// Number of Bernstein polynomials of degree `d`.
pub fn dim_poly(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// All multi-indices of degree `d` in canonical order.
pub fn multi_indices(d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(dim_poly(d));
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push(MultiIndex::new(i, j, d - i - j));
        }
    }
    out
}

/// `D! / (i! j! k!)`, accumulated as a product of ratios.
pub fn multinomial(i: usize, j: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for t in 1..=i {
        r *= (j + k + t) as f64 / t as f64;
    }
    for t in 1..=j {
        r *= (k + t) as f64 / t as f64;
    }
    r
}

/// Barycentric coordinates of `p` with respect to triangle `tri`.
pub fn barycentric(tri: &[Point; 3], p: Point) -> Result<[f64; 3]> {
    let [v1, v2, v3] = *tri;
    let det = (v2[0] - v1[0]) * (v3[1] - v1[1]) - (v3[0] - v1[0]) * (v2[1] - v1[1]);
    let scale = (v2[0] - v1[0]).abs().max((v2[1] - v1[1]).abs()).max((v3[0] - v1[0]).abs()).max((v3[1] - v1[1]).abs());
    if det.is_nan() || det.abs() <= 1e-14 * scale * scale {
        return Err(Error::DegenerateTriangle);
    }
    let (dx, dy) = (p[0] - v1[0], p[1] - v1[1]);
    let b2 = (dx * (v3[1] - v1[1]) - dy * (v3[0] - v1[0])) / det;
    let b3 = ((v2[0] - v1[0]) * dy - (v2[1] - v1[1]) * dx) / det;
    Ok([1.0 - b2 - b3, b2, b3])
}

/// Constant Cartesian gradients of the three barycentric coordinates.
pub fn barycentric_gradients(tri: &[Point; 3]) -> Result<[[f64; 2]; 3]> {
    let [v1, v2, v3] = *tri;
    let det = (v2[0] - v1[0]) * (v3[1] - v1[1]) - (v3[0] - v1[0]) * (v2[1] - v1[1]);
    let scale = (v2[0] - v1[0]).abs().max((v2[1] - v1[1]).abs()).max((v3[0] - v1[0]).abs()).max((v3[1] - v1[1]).abs());
    if det.is_nan() || det.abs() <= 1e-14 * scale * scale {
        return Err(Error::DegenerateTriangle);
    }
    Ok([
        [(v2[1] - v3[1]) / det, (v3[0] - v2[0]) / det],
        [(v3[1] - v1[1]) / det, (v1[0] - v3[0]) / det],
        [(v1[1] - v2[1]) / det, (v2[0] - v1[0]) / det],
    ])
}

/// `D!/(i!j!k!) b1^i b2^j b3^k`.
pub fn bernstein_value(m: MultiIndex, b: [f64; 3]) -> f64 {
    multinomial(m.i, m.j, m.k) * b[0].powi(m.i as i32) * b[1].powi(m.j as i32) * b[2].powi(m.k as i32)
}

/// Value and Cartesian partials of one Bernstein polynomial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Derivs {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

/// Value, first and second Cartesian partials of `B^T_m` at `p`.
///
/// `p` may lie outside `T`; the polynomial is simply extended.
pub fn bernstein_derivs(m: MultiIndex, tri: &[Point; 3], p: Point) -> Result<Derivs> {
    let basis = TriangleBasis::new(tri, m.degree())?;
    let all = basis.eval_all(p);
    Ok(all.get(m.local_index()))
}

/// Degree-`d` domain points `(i v1 + j v2 + k v3) / d` in canonical order.
pub fn domain_points(tri: &[Point; 3], d: usize) -> Vec<Point> {
    multi_indices(d)
        .into_iter()
        .map(|m| {
            let (a, b, c) = (m.i as f64 / d as f64, m.j as f64 / d as f64, m.k as f64 / d as f64);
            [a * tri[0][0] + b * tri[1][0] + c * tri[2][0], a * tri[0][1] + b * tri[1][1] + c * tri[2][1]]
        })
        .collect()
}

/// All Bernstein polynomials of degree `d` on one triangle, with precomputed
/// barycentric gradients.
#[derive(Debug, Clone)]
pub struct TriangleBasis {
    pub tri: [Point; 3],
    pub degree: usize,
    grads: [[f64; 2]; 3],
    indices: Vec<MultiIndex>,
}

/// Values and partials of every basis polynomial of a triangle at one point,
/// each vector in canonical multi-index order.
#[derive(Debug, Clone, Default)]
pub struct BasisDerivs {
    pub value: Vec<f64>,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dxx: Vec<f64>,
    pub dxy: Vec<f64>,
    pub dyy: Vec<f64>,
}

impl BasisDerivs {
    pub fn get(&self, idx: usize) -> Derivs {
        Derivs {
            value: self.value[idx],
            dx: self.dx[idx],
            dy: self.dy[idx],
            dxx: self.dxx[idx],
            dxy: self.dxy[idx],
            dyy: self.dyy[idx],
        }
    }
}

/// Bernstein values of degree `d` for all indices, looked up by `(i, j, k)`.
fn bernstein_table(d: usize, b: [f64; 3]) -> Vec<f64> {
    let pw = |x: f64| {
        let mut v = vec![1.0; d + 1];
        for e in 1..=d {
            v[e] = v[e - 1] * x;
        }
        v
    };
    let (p1, p2, p3) = (pw(b[0]), pw(b[1]), pw(b[2]));
    multi_indices(d).iter().map(|m| multinomial(m.i, m.j, m.k) * p1[m.i] * p2[m.j] * p3[m.k]).collect()
}

impl TriangleBasis {
    pub fn new(tri: &[Point; 3], degree: usize) -> Result<Self> {
        Ok(Self { tri: *tri, degree, grads: barycentric_gradients(tri)?, indices: multi_indices(degree) })
    }

    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let [v1, ..] = self.tri;
        let (dx, dy) = (p[0] - v1[0], p[1] - v1[1]);
        let b2 = self.grads[1][0] * dx + self.grads[1][1] * dy;
        let b3 = self.grads[2][0] * dx + self.grads[2][1] * dy;
        [1.0 - b2 - b3, b2, b3]
    }

    pub fn gradients(&self) -> &[[f64; 2]; 3] {
        &self.grads
    }

    /// Values of all basis polynomials at `p`.
    pub fn values(&self, p: Point) -> Vec<f64> {
        bernstein_table(self.degree, self.barycentric(p))
    }

    /// Values and first partials of all basis polynomials at `p`.
    pub fn values_and_gradients(&self, p: Point) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let d = self.degree;
        let b = self.barycentric(p);
        let value = bernstein_table(d, b);
        let n = value.len();
        let (mut dx, mut dy) = (vec![0.0; n], vec![0.0; n]);
        if d >= 1 {
            let lower = bernstein_table(d - 1, b);
            for (idx, m) in self.indices.iter().enumerate() {
                let e = m.as_array();
                for l in 0..3 {
                    if e[l] == 0 {
                        continue;
                    }
                    let mut r = e;
                    r[l] -= 1;
                    let w = d as f64 * lower[MultiIndex::from_array(r).local_index()];
                    dx[idx] += w * self.grads[l][0];
                    dy[idx] += w * self.grads[l][1];
                }
            }
        }
        (value, dx, dy)
    }

    /// Values, first and second partials of all basis polynomials at `p`.
    ///
    /// Uses `dB^D_m/db_l = D B^{D-1}_{m-e_l}` and the constant barycentric
    /// gradients for the chain rule.
    pub fn eval_all(&self, p: Point) -> BasisDerivs {
        let d = self.degree;
        let b = self.barycentric(p);
        let (value, dx, dy) = self.values_and_gradients(p);
        let n = value.len();
        let (mut dxx, mut dxy, mut dyy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        if d >= 2 {
            let lower2 = bernstein_table(d - 2, b);
            let scale = (d * (d - 1)) as f64;
            let g = &self.grads;
            for (idx, m) in self.indices.iter().enumerate() {
                let e = m.as_array();
                for l in 0..3 {
                    for q in 0..3 {
                        let mut r = e;
                        if r[l] == 0 {
                            continue;
                        }
                        r[l] -= 1;
                        if r[q] == 0 {
                            continue;
                        }
                        r[q] -= 1;
                        let w = scale * lower2[MultiIndex::from_array(r).local_index()];
                        dxx[idx] += w * g[l][0] * g[q][0];
                        dxy[idx] += w * g[l][0] * g[q][1];
                        dyy[idx] += w * g[l][1] * g[q][1];
                    }
                }
            }
        }
        BasisDerivs { value, dx, dy, dxx, dxy, dyy }
    }
}

/// The discontinuous spline space `S^{-1}_D` on a triangulation, together
/// with the smoothness target `r` that the constraints will impose.
#[derive(Debug, Clone)]
pub struct SplineSpace {
    mesh: Arc<Triangulation>,
    degree: usize,
    smoothness: usize,
    bases: Vec<TriangleBasis>,
}

/// Spline value at a point, optionally with its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineValue {
    pub triangle: usize,
    pub value: f64,
    pub gradient: Option<[f64; 2]>,
}

impl SplineSpace {
    pub fn new(mesh: Arc<Triangulation>, degree: usize, smoothness: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("spline degree must be positive".into()));
        }
        if smoothness > degree {
            return Err(Error::InvalidArgument(format!("smoothness r = {smoothness} exceeds degree D = {degree}")));
        }
        let bases = (0..mesh.num_triangles())
            .map(|t| TriangleBasis::new(&mesh.triangle_points(t), degree))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, degree, smoothness, bases })
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Triangulation> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn smoothness(&self) -> usize {
        self.smoothness
    }

    pub fn per_triangle(&self) -> usize {
        dim_poly(self.degree)
    }

    /// Total number of B-coefficients, `nt * (D+1)(D+2)/2`.
    pub fn dim(&self) -> usize {
        self.mesh.num_triangles() * self.per_triangle()
    }

    pub fn index(&self, triangle: usize, m: MultiIndex) -> usize {
        debug_assert_eq!(m.degree(), self.degree);
        triangle * self.per_triangle() + m.local_index()
    }

    pub fn basis(&self, triangle: usize) -> &TriangleBasis {
        &self.bases[triangle]
    }

    /// Evaluates the polynomial piece of triangle `t` (no membership test).
    pub fn eval_piece(&self, c: &[f64], t: usize, p: Point, with_gradient: bool) -> SplineValue {
        let n = self.per_triangle();
        let block = &c[t * n..(t + 1) * n];
        let basis = &self.bases[t];
        if with_gradient {
            let (v, dx, dy) = basis.values_and_gradients(p);
            SplineValue { triangle: t, value: dot(block, &v), gradient: Some([dot(block, &dx), dot(block, &dy)]) }
        } else {
            SplineValue { triangle: t, value: dot(block, &basis.values(p)), gradient: None }
        }
    }

    /// Evaluates the spline on the triangle returned by
    /// [`Triangulation::locate_point`].
    pub fn eval_spline(&self, c: &[f64], p: Point, with_gradient: bool) -> Result<SplineValue> {
        if c.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: c.len() });
        }
        let (t, _) = self.mesh.locate_point(p).ok_or(Error::Outside(p))?;
        Ok(self.eval_piece(c, t, p, with_gradient))
    }

    /// B-coefficients reproducing `f(t, p)` at the degree-D domain points of
    /// every triangle `t`. Exact for piecewise polynomials of degree `<= D`.
    pub fn interpolate_pieces(&self, f: impl Fn(usize, Point) -> f64) -> Vec<f64> {
        let d = self.degree;
        let idx = multi_indices(d);
        let n = idx.len();
        // The collocation matrix depends only on the barycentric lattice, so
        // it is the same for every triangle.
        let vander = DMatrix::from_fn(n, n, |a, b| {
            let m = idx[a];
            bernstein_value(idx[b], [m.i as f64 / d as f64, m.j as f64 / d as f64, m.k as f64 / d as f64])
        });
        let lu = vander.lu();
        let mut out = Vec::with_capacity(self.dim());
        for t in 0..self.mesh.num_triangles() {
            let pts = domain_points(&self.mesh.triangle_points(t), d);
            let rhs = DVector::from_iterator(n, pts.iter().map(|&p| f(t, p)));
            let sol = lu.solve(&rhs).expect("Bernstein interpolation matrix is nonsingular");
            out.extend(sol.iter());
        }
        out
    }

    /// B-coefficients of a globally defined function, see [`Self::interpolate_pieces`].
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.interpolate_pieces(|_, p| f(p))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_square_mesh;

    const REF: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn canonical_order_matches_local_index() {
        for d in 0..10 {
            for (pos, m) in multi_indices(d).iter().enumerate() {
                assert_eq!(m.local_index(), pos);
            }
            assert_eq!(multi_indices(d).len(), dim_poly(d));
        }
    }

    #[test]
    fn barycentric_examples() {
        assert_eq!(barycentric(&REF, [0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0]);
        let b = barycentric(&REF, [0.2, 0.3]).unwrap();
        for (x, y) in b.iter().zip([0.5, 0.2, 0.3]) {
            assert!((x - y).abs() < 1e-15);
        }
        let tri = [[1.0, 2.0], [4.0, 3.0], [2.0, 6.0]];
        let c = [7.0 / 3.0, 11.0 / 3.0];
        for x in barycentric(&tri, c).unwrap() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(matches!(barycentric(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], c), Err(Error::DegenerateTriangle)));
    }

    #[test]
    fn bernstein_value_examples() {
        assert_eq!(bernstein_value(MultiIndex::new(1, 0, 0), [1.0, 0.0, 0.0]), 1.0);
        let v = bernstein_value(MultiIndex::new(1, 1, 0), [1.0 / 3.0; 3]);
        assert!((v - 2.0 / 9.0).abs() < 1e-16);
        assert_eq!(multinomial(15, 0, 0), 1.0);
        assert_eq!(multinomial(5, 5, 5), 756756.0);
    }

    #[test]
    fn quadratic_corner_polynomial() {
        // b1 = 1 - x - y on the reference triangle, B_{200} = (1 - x - y)^2.
        let p = [0.3, 0.1];
        let d = bernstein_derivs(MultiIndex::new(2, 0, 0), &REF, p).unwrap();
        assert!((d.value - 0.36).abs() < 1e-15);
        assert!((d.dx + 1.2).abs() < 1e-14 && (d.dy + 1.2).abs() < 1e-14);
        assert!((d.dxx - 2.0).abs() < 1e-14 && (d.dxy - 2.0).abs() < 1e-14 && (d.dyy - 2.0).abs() < 1e-14);
        for m in multi_indices(1) {
            let d = bernstein_derivs(m, &REF, p).unwrap();
            assert_eq!((d.dxx, d.dxy, d.dyy), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn domain_point_counts() {
        assert_eq!(domain_points(&REF, 1), REF.to_vec());
        let d2 = domain_points(&REF, 2);
        assert_eq!(d2.len(), 6);
        assert!(d2.contains(&[0.5, 0.5]) && d2.contains(&[0.5, 0.0]) && d2.contains(&[0.0, 0.5]));
        assert_eq!(domain_points(&REF, 11).len(), 78);
    }

    #[test]
    fn spline_reproduces_linear_function() {
        let mesh = Arc::new(generate_square_mesh(2).unwrap());
        let space = SplineSpace::new(mesh, 5, 1).unwrap();
        let ones = vec![1.0; space.dim()];
        let c = space.interpolate(|p| p[0]);
        for p in [[0.1, 0.7], [0.5, 0.5], [0.99, 0.01], [0.3, 0.3]] {
            assert!((space.eval_spline(&ones, p, false).unwrap().value - 1.0).abs() < 1e-13);
            let v = space.eval_spline(&c, p, true).unwrap();
            assert!((v.value - p[0]).abs() < 1e-12);
            let g = v.gradient.unwrap();
            assert!((g[0] - 1.0).abs() < 1e-10 && g[1].abs() < 1e-10);
        }
        assert!(matches!(space.eval_spline(&c, [2.0, 0.0], false), Err(Error::Outside(_))));
    }
}
