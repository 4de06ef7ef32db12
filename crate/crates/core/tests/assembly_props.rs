mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spline_colloc::assembly::{assemble_general, collocation_points, distinct_domain_points};
use spline_colloc::bernstein::SplineSpace;
use spline_colloc::mesh::Triangulation;
use spline_colloc::pde::{operator_by_name, Problem};
use spline_colloc::pipeline::discretize_and_solve;
use spline_colloc::solver::SolverParams;
use spline_colloc::sparse::norm_inf;

fn mesh(seed: u64, n: usize) -> Triangulation {
    common::jittered_square(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.3)
}

proptest! {
    #![proptest_config(common::proptest_config(24))]

    #[test]
    fn point_counts_and_overdetermination(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=8, extra in 1usize..=4) {
        let m = mesh(seed, n);
        let edges = m.interior_edges().len() + m.boundary_edges().len();
        let expected = distinct_domain_points(m.num_vertices(), edges, m.num_triangles(), d + extra);
        let nt = m.num_triangles();
        let space = SplineSpace::new(Arc::new(m), d, 0).unwrap();
        let pts = collocation_points(&space, d + extra).unwrap();
        prop_assert_eq!(pts.interior.len() + pts.boundary.len(), expected);
        if extra == 3 && nt >= 2 {
            prop_assert!(pts.interior.len() + pts.boundary.len() > space.dim());
        }
        prop_assert!(collocation_points(&space, d).is_err());
    }

    #[test]
    fn polynomials_satisfy_the_collocation_rows(
        seed in any::<u64>(),
        n in 1usize..=3,
        d in 2usize..=8,
        name in prop::sample::select(vec!["poisson", "ex0-smooth", "ex1-cordes"]),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let deg = rng.random_range(0..=d);
        let poly = Arc::new(common::random_polynomial(&mut rng, deg));
        let op = operator_by_name(name).unwrap();
        let (pf, pg, lop) = (poly.clone(), poly.clone(), op.clone());
        let problem = Problem::new(
            op,
            move |p| {
                let j = common::polynomial_jet(&pf, p);
                -lop.apply(p, [j[3], j[4], j[5]], [j[1], j[2]], j[0])
            },
            move |p| common::eval_polynomial(&pg, p),
        );
        // Shift the unit square so the sign-based operator sees no axis inside.
        let m = mesh(seed, n);
        let shifted: Vec<_> = m.vertices().iter().map(|&[x, y]| [x + 0.5, y + 0.25]).collect();
        let m = Triangulation::new(shifted, m.triangles().to_vec()).unwrap();
        let space = SplineSpace::new(Arc::new(m), d, 0).unwrap();
        let sys = assemble_general(&space, d + 3, &problem).unwrap();
        let c = space.interpolate(|p| common::eval_polynomial(&poly, p));
        let scale = 1.0 + norm_inf(&sys.fvec);
        prop_assert!(norm_inf(&sys.pde_residual(&c)) <= 1e-8 * scale, "{}", norm_inf(&sys.pde_residual(&c)));
        prop_assert!(norm_inf(&sys.boundary_residual(&c)) <= 1e-8 * (1.0 + norm_inf(&sys.gvec)));
        for r in 0..sys.k.nrows() {
            prop_assert_eq!(sys.k.row_block(r), sys.interior[r].triangle);
        }
    }
}

/// Edge points are owned by the smaller triangle index, so with data outside
/// the spline space the discrete problem itself depends on triangle order.
/// Polynomial data is reproduced whoever owns the rows.
#[test]
fn triangle_order_does_not_change_the_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..3 {
        let poly = Arc::new(common::random_polynomial(&mut rng, 5));
        let (pf, pg) = (poly.clone(), poly.clone());
        let problem = Problem::new(
            operator_by_name("poisson").unwrap(),
            move |p| {
                let j = common::polynomial_jet(&pf, p);
                -(j[3] + j[5])
            },
            move |p| common::eval_polynomial(&pg, p),
        );
        let m = mesh(case, 2);
        let mut perm: Vec<usize> = (0..m.num_triangles()).collect();
        perm.shuffle(&mut rng);
        let pm = Arc::new(m.permute_triangles(&perm).unwrap());
        let params = SolverParams::default();
        let a = discretize_and_solve(Arc::new(m), &problem, 5, 1, 8, &params).unwrap();
        let b = discretize_and_solve(pm, &problem, 5, 1, 8, &params).unwrap();
        for _ in 0..30 {
            let p = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let va = a.space.eval_spline(&a.report.c, p, false).unwrap().value;
            let vb = b.space.eval_spline(&b.report.c, p, false).unwrap().value;
            assert!((va - vb).abs() <= 1e-9, "case {case} at {p:?}: {va} vs {vb}");
        }
    }
}
