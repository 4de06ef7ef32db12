mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spline_colloc::solver::{default_eps, solve_al, solve_kkt_direct, SolverParams};

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (DVector::from_column_slice(a), DVector::from_column_slice(b));
    (&a - &b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(common::proptest_config(16))]

    #[test]
    fn limit_matches_kkt(seed in any::<u64>(), m in 12usize..=120, boost in prop::sample::select(vec![1.0, 10.0, 100.0])) {
        let inst = common::random_instance(&mut ChaCha8Rng::seed_from_u64(seed), m);
        let base = SolverParams { max_iter: 2000, ..SolverParams::default() };
        let params = SolverParams { eps: Some(boost * default_eps(&inst.sys, &inst.smooth, &base)), ..base };
        let al = solve_al(&inst.sys, &inst.smooth, &params).unwrap();
        let kkt = solve_kkt_direct(&inst.sys, &inst.smooth, &params).unwrap();
        prop_assert!(rel(&al.c, &kkt.c) <= 1e-8, "gap {}", rel(&al.c, &kkt.c));
        prop_assert_eq!(al.factorizations, 1);
    }

    #[test]
    fn row_scaling_of_k_is_absorbed_by_eps(seed in any::<u64>(), m in 12usize..=120, t in 0.01f64..100.0) {
        let inst = common::random_instance(&mut ChaCha8Rng::seed_from_u64(seed), m);
        // Rescaling rounds A~ differently, which moves the iterates by about
        // 1e-17 cond(A~); 100x the default eps keeps cond(A~) near 1e5.
        let default = default_eps(&inst.sys, &inst.smooth, &SolverParams::default());
        let eps = 100.0 * default;
        // A fixed, small iteration count compares the maps, not just the limits.
        let params = SolverParams { eps: Some(eps), max_iter: 5, tol_step: 1e-300, ..SolverParams::default() };
        let mut scaled = inst.sys.clone();
        scaled.k.scale(t);
        scaled.fvec.iter_mut().for_each(|v| *v *= t);
        let a = solve_al(&inst.sys, &inst.smooth, &params).unwrap();
        let b = solve_al(&scaled, &inst.smooth, &SolverParams { eps: Some(t * t * eps), ..params.clone() }).unwrap();
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert!(rel(&b.c, &a.c) <= 1e-10, "difference {}", rel(&b.c, &a.c));
        // The default rule scales the same way.
        let scaled_eps = default_eps(&scaled, &inst.smooth, &SolverParams::default());
        prop_assert!((scaled_eps / (t * t * default) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn steps_shrink_after_the_second_iterate(seed in any::<u64>(), m in 12usize..=150, boost in prop::sample::select(vec![1.0, 10.0, 100.0, 1000.0])) {
        let inst = common::random_instance(&mut ChaCha8Rng::seed_from_u64(seed), m);
        let base = SolverParams { max_iter: 60, ..SolverParams::default() };
        let params = SolverParams { eps: Some(boost * default_eps(&inst.sys, &inst.smooth, &base)), ..base };
        let rep = solve_al(&inst.sys, &inst.smooth, &params).unwrap();
        let size = DVector::from_column_slice(&rep.c).norm();
        // step_history[k] is |z^{k+2} - z^{k+1}|; compare from k = 2 on, above rounding level.
        for w in rep.step_history.windows(2).skip(1) {
            if w[0] > 1e-10 * size {
                prop_assert!(w[1] <= 1.05 * w[0], "steps {:?}", rep.step_history);
            }
        }
    }

    #[test]
    fn kkt_solution_is_stationary(seed in any::<u64>(), m in 12usize..=90) {
        let inst = common::random_instance(&mut ChaCha8Rng::seed_from_u64(seed), m);
        let rep = solve_kkt_direct(&inst.sys, &inst.smooth, &SolverParams::default()).unwrap();
        let lambda = DVector::from_vec(rep.lambda.unwrap());
        prop_assert_eq!(lambda.len(), inst.k.nrows());
        // Stationarity: M z - alpha B^T G + K^T lambda = 0.
        let p = SolverParams::default();
        let z = DVector::from_vec(rep.c.clone());
        let g = DVector::from_vec(inst.sys.gvec.clone());
        let grad = (inst.b.transpose() * (&inst.b * &z) * p.alpha
            + inst.hr.transpose() * (&inst.hr * &z) * p.beta
            + inst.h0.transpose() * (&inst.h0 * &z) * p.gamma)
            - inst.b.transpose() * g * p.alpha
            + inst.k.transpose() * &lambda;
        prop_assert!(grad.norm() <= 1e-8 * (1.0 + z.norm()) * inst.b.norm().powi(2), "{}", grad.norm());
    }
}
