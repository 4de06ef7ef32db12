//! Evaluates the degree-D Bernstein basis on one triangle and the B-form of
//! a cubic, comparing spline values and gradients against the polynomial.

use std::sync::Arc;

use spline_colloc::bernstein::{multi_indices, SplineSpace, TriangleBasis};
use spline_colloc::mesh::Triangulation;

fn main() -> spline_colloc::Result<()> {
    let tri = [[0.0, 0.0], [2.0, 0.5], [0.5, 1.5]];
    let d = 4;
    let basis = TriangleBasis::new(&tri, d)?;
    let p = [0.8, 0.6];
    let all = basis.eval_all(p);
    println!("degree {d}, {} basis functions at {p:?}", all.value.len());
    for (idx, m) in multi_indices(d).into_iter().enumerate().take(5) {
        println!(
            "  B{:?}: value {:.6}, dx {:+.6}, dyy {:+.6}",
            m.as_array(),
            all.value[idx],
            all.dx[idx],
            all.dyy[idx]
        );
    }
    println!("  sum of values: {:.15}", all.value.iter().sum::<f64>());

    let u = |q: [f64; 2]| q[0].powi(3) - 2.0 * q[0] * q[1] + q[1] * q[1];
    let grad = |q: [f64; 2]| [3.0 * q[0] * q[0] - 2.0 * q[1], -2.0 * q[0] + 2.0 * q[1]];
    let mesh = Arc::new(Triangulation::new(tri.to_vec(), vec![[0, 1, 2]])?);
    let space = SplineSpace::new(mesh, d, 0)?;
    let c = space.interpolate(u);
    let s = space.eval_spline(&c, p, true)?;
    let g = s.gradient.unwrap();
    println!("cubic at {p:?}: spline {:.12}, exact {:.12}", s.value, u(p));
    println!("gradient: spline {:.12?}, exact {:.12?}", g, grad(p));
    Ok(())
}
