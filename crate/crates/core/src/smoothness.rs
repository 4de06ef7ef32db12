//! Linear smoothness conditions across interior edges.
//!
//! For an interior edge shared by `T = <v1, v2, v3>` and `T~ = <v4, v3, v2>`,
//! the two polynomial pieces join with `C^n` smoothness exactly when, for
//! every `j + k = D - n`,
//!
//! ```text
//! c~_{n,j,k} = sum_{a+b+c=n} c_{a, k+b, j+c} B^n_{abc}(v4)
//! ```
//!
//! where `B^n_{abc}(v4)` is evaluated in the barycentric coordinates of `v4`
//! with respect to `T`.

use rayon::prelude::*;

use crate::bernstein::{barycentric, bernstein_value, multi_indices, MultiIndex, SplineSpace};
use crate::mesh::InteriorEdge;
use crate::sparse::{norm_inf, CsrMatrix};
use crate::{Error, Result};

/// Where a smoothness row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowOrigin {
    pub edge: usize,
    pub order: usize,
    pub j: usize,
}

#[derive(Debug, Clone)]
pub struct SmoothnessSystem {
    /// `C^0` conditions.
    pub h0: CsrMatrix,
    /// Conditions of orders `1..=r`.
    pub hr: CsrMatrix,
    pub h0_origin: Vec<RowOrigin>,
    pub hr_origin: Vec<RowOrigin>,
}

type SparseRow = Vec<(usize, f64)>;

/// Maps role positions `(v1, v2, v3)` to stored positions in the triangle.
fn rotation(local_edge: usize) -> [usize; 3] {
    [local_edge, (local_edge + 1) % 3, (local_edge + 2) % 3]
}

fn stored_index(perm: [usize; 3], roles: [usize; 3]) -> MultiIndex {
    let mut e = [0; 3];
    for r in 0..3 {
        e[perm[r]] = roles[r];
    }
    MultiIndex::from_array(e)
}

/// Order-`n` conditions across one interior edge, `j` descending.
///
/// The smaller-index triangle plays `T`; the coefficient on `c~` is `+1` and
/// the coefficients on `T` are `-B^n(v4)`.
pub fn smoothness_rows(space: &SplineSpace, edge: &InteriorEdge, n: usize) -> Result<Vec<SparseRow>> {
    let d = space.degree();
    if n > d {
        return Err(Error::InvalidArgument(format!("smoothness order {n} exceeds degree {d}")));
    }
    let mesh = space.mesh();
    let perm_t = rotation(edge.left_local);
    let perm_tt = rotation(edge.right_local);
    let tri_t = mesh.triangle_points(edge.left);
    let roles_t = perm_t.map(|p| tri_t[p]);
    let v4 = mesh.triangle_points(edge.right)[perm_tt[0]];
    let b4 = barycentric(&roles_t, v4)?;
    let weights: Vec<(MultiIndex, f64)> = multi_indices(n).into_iter().map(|m| (m, bernstein_value(m, b4))).collect();

    let mut rows = Vec::with_capacity(d - n + 1);
    for j in (0..=d - n).rev() {
        let k = d - n - j;
        let mut row = Vec::with_capacity(weights.len() + 1);
        row.push((space.index(edge.right, stored_index(perm_tt, [n, j, k])), 1.0));
        for &(m, w) in &weights {
            let col = space.index(edge.left, stored_index(perm_t, [m.i, k + m.j, j + m.k]));
            row.push((col, -w));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Rows of order `n` for the edge joining vertices `a` and `b`.
pub fn edge_rows_by_vertices(space: &SplineSpace, a: usize, b: usize, n: usize) -> Result<Vec<SparseRow>> {
    let key = [a.min(b), a.max(b)];
    let mesh = space.mesh();
    if let Some(e) = mesh.interior_edges().iter().find(|e| e.vertices == key) {
        return smoothness_rows(space, e, n);
    }
    match mesh.boundary_edges().iter().position(|e| e.vertices == key) {
        Some(idx) => Err(Error::BoundaryEdge(idx)),
        None => Err(Error::InvalidArgument(format!("({a}, {b}) is not an edge of the mesh"))),
    }
}

/// Stacks order-0 rows into `H0` and orders `1..=r` into `Hr`; rows are
/// ordered by edge, then order, then `j` descending.
pub fn assemble_smoothness(space: &SplineSpace, r: usize) -> Result<SmoothnessSystem> {
    let d = space.degree();
    if r > d {
        return Err(Error::InvalidArgument(format!("smoothness r = {r} exceeds degree D = {d}")));
    }
    let per_edge: Vec<(Vec<SparseRow>, Vec<SparseRow>)> = space
        .mesh()
        .interior_edges()
        .par_iter()
        .map(|e| {
            let h0 = smoothness_rows(space, e, 0)?;
            let mut hr = Vec::new();
            for n in 1..=r {
                hr.extend(smoothness_rows(space, e, n)?);
            }
            Ok((h0, hr))
        })
        .collect::<Result<_>>()?;

    let (mut h0_rows, mut hr_rows) = (Vec::new(), Vec::new());
    let (mut h0_origin, mut hr_origin) = (Vec::new(), Vec::new());
    for (edge, (h0, hr)) in per_edge.into_iter().enumerate() {
        h0_origin.extend((0..=d).rev().map(|j| RowOrigin { edge, order: 0, j }));
        h0_rows.extend(h0);
        for n in 1..=r {
            hr_origin.extend((0..=d - n).rev().map(|j| RowOrigin { edge, order: n, j }));
        }
        hr_rows.extend(hr);
    }
    Ok(SmoothnessSystem {
        h0: CsrMatrix::from_rows(space.dim(), &h0_rows),
        hr: CsrMatrix::from_rows(space.dim(), &hr_rows),
        h0_origin,
        hr_origin,
    })
}

impl SmoothnessSystem {
    /// `(|H0 c|_inf, |Hr c|_inf)`.
    pub fn residual(&self, c: &[f64]) -> (f64, f64) {
        (norm_inf(&self.h0.mul_vec(c)), norm_inf(&self.hr.mul_vec(c)))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::{generate_square_mesh, Triangulation};

    #[test]
    fn linear_c0_rows_equate_shared_vertices() {
        let mesh = Arc::new(generate_square_mesh(1).unwrap());
        let space = SplineSpace::new(mesh, 1, 0).unwrap();
        let rows = smoothness_rows(&space, &space.mesh().interior_edges()[0], 0).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            let mut vals: Vec<f64> = row.iter().map(|e| e.1).collect();
            vals.sort_by(f64::total_cmp);
            assert_eq!(vals, vec![-1.0, 1.0]);
        }
    }

    #[test]
    fn first_order_weights_form_partition_of_unity() {
        let mesh = Arc::new(generate_square_mesh(1).unwrap());
        let space = SplineSpace::new(mesh, 2, 1).unwrap();
        let rows = smoothness_rows(&space, &space.mesh().interior_edges()[0], 1).unwrap();
        assert_eq!(rows.len(), 2);
        for row in rows {
            let t_side: f64 = row[1..].iter().map(|e| -e.1).sum();
            assert!((t_side - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_polynomial_satisfies_all_orders() {
        let mesh = Triangulation::parse("4 2 0\n0 0\n1.2 0.1\n0.9 1.1\n-0.2 0.8\n0 1 2\n0 2 3\n").unwrap();
        let space = SplineSpace::new(Arc::new(mesh), 3, 3).unwrap();
        let c = space.interpolate(|p| p[0] * p[0] * p[1]);
        let e = &space.mesh().interior_edges()[0];
        for n in 0..=3 {
            for row in smoothness_rows(&space, e, n).unwrap() {
                let r: f64 = row.iter().map(|&(col, w)| w * c[col]).sum();
                assert!(r.abs() < 1e-10, "order {n}: {r}");
            }
        }
    }

    #[test]
    fn row_counts_and_boundary_error() {
        let mesh = Arc::new(generate_square_mesh(1).unwrap());
        let space = SplineSpace::new(mesh, 8, 2).unwrap();
        let sys = assemble_smoothness(&space, 2).unwrap();
        assert_eq!(sys.h0.nrows(), 9);
        assert_eq!(sys.hr.nrows(), 15);
        assert_eq!(sys.hr_origin[0], RowOrigin { edge: 0, order: 1, j: 7 });
        assert!(matches!(edge_rows_by_vertices(&space, 0, 1, 0), Err(Error::BoundaryEdge(_))));

        let single = Triangulation::parse("3 1 0\n0 0\n1 0\n0 1\n0 1 2\n").unwrap();
        let space = SplineSpace::new(Arc::new(single), 5, 2).unwrap();
        let sys = assemble_smoothness(&space, 2).unwrap();
        assert_eq!((sys.h0.nrows(), sys.hr.nrows()), (0, 0));
    }
}
