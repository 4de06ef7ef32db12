//! Samples the Cordes condition and the ellipticity of the built-in
//! non-divergence operators.

use spline_colloc::pde::{check_cordes, check_ellipticity, operator_by_name, theta};

fn main() -> spline_colloc::Result<()> {
    let n = 41;
    let samples: Vec<[f64; 2]> = (0..n * n)
        .map(|k| [-1.0 + 2.0 * (k % n) as f64 / (n - 1) as f64, -1.0 + 2.0 * (k / n) as f64 / (n - 1) as f64])
        .collect();

    for name in ["poisson", "ex1-cordes", "ex2-cordes"] {
        let op = operator_by_name(name)?;
        let cordes = check_cordes(&op, &samples)?;
        let ell = check_ellipticity(&op, &samples, 1e-12);
        println!(
            "{name:>10}: eps_max = {:.6}, worst ratio = {:.6} at {:?}, min eigenvalue = {:.3e}",
            cordes.epsilon_max, cordes.ratio_max, cordes.worst_point, ell.lambda_min
        );
        println!("{:>10}  theta at (0.5, -0.25) = {:.6}", "", theta(&op, [0.5, -0.25])?);
    }

    let skew = operator_by_name("ex0-smooth")?;
    match check_cordes(&skew, &samples) {
        Ok(_) => println!("ex0-smooth passed the symmetric check"),
        Err(e) => println!("ex0-smooth: {e}"),
    }
    Ok(())
}
