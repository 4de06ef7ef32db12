//! Solves the Poisson problem for a manufactured solution on a uniform mesh
//! and reports grid errors and the solver log.

use std::sync::Arc;

use spline_colloc::evaluation::error_grid;
use spline_colloc::mesh::generate_square_mesh;
use spline_colloc::pde::PdeOperator;
use spline_colloc::pipeline::discretize_and_solve;
use spline_colloc::solver::SolverParams;
use spline_colloc::testlib::{manufacture_rhs, solution_by_name};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sol = solution_by_name("us1")?;
    let problem = manufacture_rhs(sol, &PdeOperator::laplacian());
    let mesh = Arc::new(generate_square_mesh(4)?);
    let solved = discretize_and_solve(mesh, &problem, 8, 2, 11, &SolverParams::default())?;

    let rep = &solved.report;
    print!("{}", rep.table());
    println!(
        "eps = {:.3e}, |Kc + f| = {:.3e}, |Bc - G|_inf = {:.3e}",
        rep.eps, rep.residual_pde, rep.residual_boundary
    );
    println!("|H0 c| = {:.3e}, |Hr c| = {:.3e}", rep.residual_h0, rep.residual_hr);

    let e = error_grid(&solved.space, &rep.c, |p| sol.u(p), |p| sol.gradient(p), 201)?;
    println!("l2 = {:.3e}, h1 = {:.3e}, linf = {:.3e} over {} points", e.l2, e.h1, e.linf, e.n_points);
    Ok(())
}
