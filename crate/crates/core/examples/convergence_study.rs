//! Refines a square mesh three times and fits the convergence rate of the
//! grid l2 error against h and against the number of coefficients.

use spline_colloc::pipeline::{run_study, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig {
        mesh: "square:2".into(),
        operator: "ex0-smooth".into(),
        solution: "us2".into(),
        degree: 8,
        r: 2,
        grid_n: 201,
        ..RunConfig::default()
    };
    let study = run_study(&cfg, 3)?;
    print!("{}", study.rate_table());
    println!("h1 slope vs h = {:.3}", study.slope_h1);
    Ok(())
}
