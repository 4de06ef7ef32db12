//! Builds a square mesh, writes it in the ASCII format, reads it back and
//! refines it, printing size and shape statistics at each level.

use spline_colloc::mesh::{generate_square_mesh, load_mesh};

fn main() -> spline_colloc::Result<()> {
    let path = std::env::temp_dir().join("spline-colloc-square2.mesh");
    std::fs::write(&path, generate_square_mesh(2)?.to_mesh_string())?;
    let mut mesh = load_mesh(&path)?;
    println!("read {}", path.display());

    println!("{:>5} {:>9} {:>9} {:>10} {:>14}", "level", "vertices", "triangles", "h", "shape_constant");
    for level in 0..4 {
        println!(
            "{level:>5} {:>9} {:>9} {:>10.5} {:>14.6}",
            mesh.num_vertices(),
            mesh.num_triangles(),
            mesh.h(),
            mesh.shape_constant()
        );
        if level < 3 {
            mesh = mesh.uniform_refine()?;
        }
    }

    let p = [0.3, 0.7];
    if let Some((t, b)) = mesh.locate_point(p) {
        println!("{p:?} lies in triangle {t}, barycentric {b:.4?}");
    }
    Ok(())
}
