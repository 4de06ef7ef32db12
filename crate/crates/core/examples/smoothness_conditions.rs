//! Assembles the C^0 and C^1..C^r smoothness conditions on a square mesh and
//! shows that global polynomials satisfy them while arbitrary pieces do not.

use std::sync::Arc;

use spline_colloc::bernstein::SplineSpace;
use spline_colloc::mesh::generate_square_mesh;
use spline_colloc::smoothness::assemble_smoothness;

fn main() -> spline_colloc::Result<()> {
    let mesh = Arc::new(generate_square_mesh(2)?);
    for (d, r) in [(5, 1), (8, 2)] {
        let space = SplineSpace::new(mesh.clone(), d, r)?;
        let sys = assemble_smoothness(&space, r)?;
        println!(
            "D = {d}, r = {r}: {} coefficients, {} interior edges, H0 {} rows, Hr {} rows",
            space.dim(),
            mesh.interior_edges().len(),
            sys.h0.nrows(),
            sys.hr.nrows()
        );

        let smooth = space.interpolate(|[x, y]| (x - 0.3).powi(d as i32) + x * y);
        let (h0, hr) = sys.residual(&smooth);
        println!("  global polynomial:  |H0 c| = {h0:.2e}, |Hr c| = {hr:.2e}");

        // Independent pieces: the same polynomial shifted on each triangle.
        let pieces = space.interpolate_pieces(|t, [x, y]| x * y + 0.01 * t as f64);
        let (h0, hr) = sys.residual(&pieces);
        println!("  piecewise shifted:  |H0 c| = {h0:.2e}, |Hr c| = {hr:.2e}");
    }
    Ok(())
}
