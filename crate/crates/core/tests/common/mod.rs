//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use spline_colloc::assembly::CollocationSystem;
use spline_colloc::mesh::{generate_square_mesh, Triangulation};
use spline_colloc::smoothness::SmoothnessSystem;
use spline_colloc::sparse::{BlockRowMatrix, CsrMatrix};
use spline_colloc::Point;

/// Dense rows stored as a single column block.
pub fn block_rows(a: &DMatrix<f64>) -> BlockRowMatrix {
    let mut out = BlockRowMatrix::new(a.ncols(), a.ncols());
    for r in 0..a.nrows() {
        let row: Vec<f64> = a.row(r).iter().copied().collect();
        out.push_row(0, &row);
    }
    out
}

pub fn csr(a: &DMatrix<f64>) -> CsrMatrix {
    let rows: Vec<Vec<(usize, f64)>> = (0..a.nrows())
        .map(|r| (0..a.ncols()).filter(|&c| a[(r, c)] != 0.0).map(|c| (c, a[(r, c)])).collect())
        .collect();
    CsrMatrix::from_rows(a.ncols(), &rows)
}

/// A random instance of the constrained least-squares problem.
pub struct Instance {
    pub sys: CollocationSystem,
    pub smooth: SmoothnessSystem,
    pub k: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub h0: DMatrix<f64>,
    pub hr: DMatrix<f64>,
}

fn sparse_rows(rng: &mut impl Rng, rows: usize, m: usize, per_row: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(rows, m);
    for r in 0..rows {
        for _ in 0..per_row {
            a[(r, rng.random_range(0..m))] = rng.random_range(-1.0..1.0);
        }
    }
    a
}

/// `K` has full row rank and `f = -K z0`, so the constraint is consistent.
pub fn random_instance(rng: &mut impl Rng, m: usize) -> Instance {
    let mk = (m / 3).max(1);
    let k = DMatrix::from_fn(mk, m, |_, _| rng.random_range(-1.0..1.0));
    let z0: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f: Vec<f64> = (&k * nalgebra::DVector::from_vec(z0)).iter().map(|v| -v).collect();
    let b = DMatrix::from_fn(m / 2 + 1, m, |_, _| rng.random_range(-1.0..1.0));
    let g: Vec<f64> = (0..b.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let h0 = sparse_rows(rng, m / 4 + 1, m, 4);
    let hr = sparse_rows(rng, m / 4 + 1, m, 6);
    let sys = CollocationSystem {
        k: block_rows(&k),
        bmat: block_rows(&b),
        fvec: f,
        gvec: g,
        interior: vec![],
        boundary: vec![],
    };
    let smooth = SmoothnessSystem { h0: csr(&h0), hr: csr(&hr), h0_origin: vec![], hr_origin: vec![] };
    Instance { sys, smooth, k, b, h0, hr }
}

/// `square:n` with interior vertices moved by up to `jitter * h` in each coordinate.
pub fn jittered_square(rng: &mut impl Rng, n: usize, jitter: f64) -> Triangulation {
    let base = generate_square_mesh(n).unwrap();
    let step = 1.0 / n as f64;
    let verts: Vec<Point> = base
        .vertices()
        .iter()
        .map(|&[x, y]| {
            let inside = x > 1e-12 && x < 1.0 - 1e-12 && y > 1e-12 && y < 1.0 - 1e-12;
            if inside {
                [x + jitter * step * rng.random_range(-1.0..1.0), y + jitter * step * rng.random_range(-1.0..1.0)]
            } else {
                [x, y]
            }
        })
        .collect();
    Triangulation::new(verts, base.triangles().to_vec()).unwrap()
}

/// Random polynomial of total degree `d` as monomial coefficients `(a, b, coef)`.
pub fn random_polynomial(rng: &mut impl Rng, d: usize) -> Vec<(i32, i32, f64)> {
    let mut out = Vec::new();
    for a in 0..=d as i32 {
        for b in 0..=(d as i32 - a) {
            out.push((a, b, rng.random_range(-1.0..1.0)));
        }
    }
    out
}

pub fn eval_polynomial(p: &[(i32, i32, f64)], x: Point) -> f64 {
    p.iter().map(|&(a, b, c)| c * x[0].powi(a) * x[1].powi(b)).sum()
}

/// `[u, u_x, u_y, u_xx, u_xy, u_yy]` of a monomial-coefficient polynomial.
pub fn polynomial_jet(p: &[(i32, i32, f64)], x: Point) -> [f64; 6] {
    let pw = |v: f64, e: i32| if e < 0 { 0.0 } else { v.powi(e) };
    let mut out = [0.0; 6];
    for &(a, b, c) in p {
        let (fa, fb) = (a as f64, b as f64);
        out[0] += c * pw(x[0], a) * pw(x[1], b);
        out[1] += c * fa * pw(x[0], a - 1) * pw(x[1], b);
        out[2] += c * fb * pw(x[0], a) * pw(x[1], b - 1);
        out[3] += c * fa * (fa - 1.0) * pw(x[0], a - 2) * pw(x[1], b);
        out[4] += c * fa * fb * pw(x[0], a - 1) * pw(x[1], b - 1);
        out[5] += c * fb * (fb - 1.0) * pw(x[0], a) * pw(x[1], b - 2);
    }
    out
}

/// Seeded so property runs are reproducible; no regression files are written.
pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(42),
        failure_persistence: None,
        ..Default::default()
    }
}
