//! Non-divergence operators: the discontinuous-coefficient benchmark on
//! (-1, 1)^2 and a user-defined operator with drift and reaction terms.

use std::sync::Arc;

use spline_colloc::evaluation::error_grid;
use spline_colloc::mesh::generate_rect_mesh;
use spline_colloc::pde::{operator_by_name, PdeOperator, Problem};
use spline_colloc::pipeline::discretize_and_solve;
use spline_colloc::solver::SolverParams;
use spline_colloc::testlib::{manufacture_rhs, solution_by_name};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = Arc::new(generate_rect_mesh(8, [-1.0, 1.0], [-1.0, 1.0])?);

    let sol = solution_by_name("uns2")?;
    let problem = manufacture_rhs(sol, &operator_by_name("ex1-cordes")?);
    let solved = discretize_and_solve(mesh.clone(), &problem, 8, 2, 11, &SolverParams::default())?;
    let e = error_grid(&solved.space, &solved.report.c, |p| sol.u(p), |p| sol.gradient(p), 201)?;
    println!("ex1-cordes / uns2: l2 = {:.3e}, iterations = {}", e.l2, solved.report.iterations);

    // L u = (2 + x) u_xx + u_xy + u_yy + y u_x - u, exact solution exp(x) cos(y).
    let op = PdeOperator::new("custom", |[x, _]| [[2.0 + x, 0.5], [0.5, 1.0]], true)
        .with_drift(|[_, y]| [y, 0.0])
        .with_reaction(|_| -1.0);
    let exact = |[x, y]: [f64; 2]| x.exp() * y.cos();
    let lop = op.clone();
    let problem = Problem::new(
        op,
        move |p| {
            let (e, c, s) = (p[0].exp(), p[1].cos(), p[1].sin());
            -lop.apply(p, [e * c, -e * s, -e * c], [e * c, -e * s], e * c)
        },
        exact,
    );
    let solved = discretize_and_solve(mesh, &problem, 8, 2, 11, &SolverParams::default())?;
    let grad = |[x, y]: [f64; 2]| [x.exp() * y.cos(), -x.exp() * y.sin()];
    let e = error_grid(&solved.space, &solved.report.c, exact, grad, 201)?;
    println!("custom operator: l2 = {:.3e}, h1 = {:.3e}", e.l2, e.h1);
    Ok(())
}
