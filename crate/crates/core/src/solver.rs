//! Constrained least squares for the collocation system.
//!
//! Minimizes `alpha |Bc - G|^2 + beta |Hr c|^2 + gamma |H0 c|^2` subject to
//! `Kc + f = 0` (in the least-squares sense when the rows of `K` are
//! inconsistent) with an augmented Lagrangian iteration. The matrix
//!
//! ```text
//! A~ = M + K^T K / eps,   M = alpha B^T B + beta Hr^T Hr + gamma H0^T H0
//! ```
//!
//! is factorized once; each iteration solves `A~ z' = M z - K^T f / eps`,
//! evaluated as the correction `z' = z - A~^{-1} K^T (K z + f) / eps`.
//! [`solve_kkt_direct`] solves the same problem through a dense saddle-point
//! system and exists to check the iteration.

use std::fmt::Write as _;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::assembly::CollocationSystem;
use crate::smoothness::SmoothnessSystem;
use crate::sparse::{norm2, norm_inf};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Boundary weight.
    pub alpha: f64,
    /// Weight of the order `1..=r` smoothness conditions.
    pub beta: f64,
    /// Weight of the `C^0` conditions.
    pub gamma: f64,
    /// Augmentation parameter; `None` selects `1e-3 |K^T K|_2 / |M|_2`.
    pub eps: Option<f64>,
    pub max_iter: usize,
    /// Stop once `|z' - z| <= tol_step |z'|`.
    pub tol_step: f64,
    /// Initial multiplier, zero when absent.
    pub lambda0: Option<Vec<f64>>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { alpha: 100.0, beta: 1.0, gamma: 1.0, eps: None, max_iter: 200, tol_step: 1e-12, lambda0: None }
    }
}

impl SolverParams {
    /// Weights that favour exact smoothness over boundary fit.
    pub fn smooth_priority() -> Self {
        Self { alpha: 1.0, beta: 1e5, gamma: 1e5, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("tol_step", self.tol_step)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::InvalidArgument(format!("eps must be positive, got {e}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    #[serde(skip)]
    pub c: Vec<f64>,
    /// Multiplier, only reported by the direct solver.
    #[serde(skip)]
    pub lambda: Option<Vec<f64>>,
    pub iterations: usize,
    /// `|Kc + f|_2`.
    pub residual_pde: f64,
    /// `|Kc + f|_2 / sqrt(M)`.
    pub residual_pde_rms: f64,
    /// `|Bc - G|_inf`.
    pub residual_boundary: f64,
    pub residual_h0: f64,
    pub residual_hr: f64,
    /// `|z^{k+1} - z^k|_2` for each iteration after the first.
    pub step_history: Vec<f64>,
    /// `|K z^k + f|_2` for every iterate.
    pub residual_history: Vec<f64>,
    pub eps: f64,
    pub factorizations: usize,
}

impl SolverReport {
    fn new(c: Vec<f64>, sys: &CollocationSystem, smooth: &SmoothnessSystem, eps: f64) -> Self {
        let pde = sys.pde_residual(&c);
        let (h0, hr) = smooth.residual(&c);
        Self {
            residual_pde: norm2(&pde),
            residual_pde_rms: if pde.is_empty() { 0.0 } else { norm2(&pde) / (pde.len() as f64).sqrt() },
            residual_boundary: norm_inf(&sys.boundary_residual(&c)),
            residual_h0: h0,
            residual_hr: hr,
            c,
            lambda: None,
            iterations: 0,
            step_history: Vec::new(),
            residual_history: Vec::new(),
            eps,
            factorizations: 0,
        }
    }

    /// Iteration log as a fixed-width table.
    pub fn table(&self) -> String {
        let mut s = format!("{:>5} {:>14} {:>14}\n", "iter", "step", "residual_pde");
        for (k, r) in self.residual_history.iter().enumerate() {
            let step = if k == 0 { "-".to_string() } else { format!("{:.6e}", self.step_history[k - 1]) };
            let _ = writeln!(s, "{:>5} {:>14} {:>14.6e}", k + 1, step, r);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The quadratic form `M` and `K^T K` applied through their factors.
struct Normal<'a> {
    sys: &'a CollocationSystem,
    smooth: &'a SmoothnessSystem,
    p: &'a SolverParams,
}

impl Normal<'_> {
    fn m_mul(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.sys.bmat.tr_mul_vec(&self.sys.bmat.mul_vec(z));
        out.iter_mut().for_each(|v| *v *= self.p.alpha);
        for (h, w) in [(&self.smooth.hr, self.p.beta), (&self.smooth.h0, self.p.gamma)] {
            if h.nrows() > 0 {
                for (o, v) in out.iter_mut().zip(h.tr_mul_vec(&h.mul_vec(z))) {
                    *o += w * v;
                }
            }
        }
        out
    }

    fn ktk_mul(&self, z: &[f64]) -> Vec<f64> {
        self.sys.k.tr_mul_vec(&self.sys.k.mul_vec(z))
    }

    fn triplets(&self, eps: f64) -> Vec<Triplet<usize, usize, f64>> {
        let mut out = Vec::new();
        let w = self.sys.k.width();
        for (blocks, s) in [(self.sys.k.gram_blocks(), 1.0 / eps), (self.sys.bmat.gram_blocks(), self.p.alpha)] {
            for (b, g) in blocks.iter().enumerate() {
                let off = b * w;
                for i in 0..w {
                    for j in 0..w {
                        let v = g[i * w + j];
                        if v != 0.0 {
                            out.push(Triplet::new(off + i, off + j, s * v));
                        }
                    }
                }
            }
        }
        let mut h = Vec::new();
        self.smooth.hr.gram_triplets(self.p.beta, &mut h);
        self.smooth.h0.gram_triplets(self.p.gamma, &mut h);
        out.extend(h.into_iter().map(|(r, c, v)| Triplet::new(r, c, v)));
        out
    }

    fn dense(&self, eps: f64) -> DMatrix<f64> {
        let n = self.sys.k.ncols();
        let mut a = DMatrix::zeros(n, n);
        for t in self.triplets(eps) {
            a[(t.row, t.col)] += t.val;
        }
        a
    }
}

fn check_dims(sys: &CollocationSystem, smooth: &SmoothnessSystem) -> Result<usize> {
    let m = sys.k.ncols();
    for (got, what) in [
        (sys.bmat.ncols(), m),
        (smooth.h0.ncols(), m),
        (smooth.hr.ncols(), m),
        (sys.fvec.len(), sys.k.nrows()),
        (sys.gvec.len(), sys.bmat.nrows()),
    ] {
        if got != what {
            return Err(Error::DimensionMismatch { expected: what, got });
        }
    }
    Ok(m)
}

/// Deterministic start vector for power iteration.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).fract()).collect()
}

/// Spectral norm of a symmetric positive semidefinite operator, 20 power steps.
fn power_norm(n: usize, op: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let mut v = start_vector(n);
    let mut lambda = 0.0;
    for _ in 0..20 {
        let nv = norm2(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let w = op(&v);
        lambda = norm2(&w);
        v = w;
    }
    lambda
}

/// The default augmentation parameter `1e-3 |K^T K|_2 / |M|_2`, which makes
/// `K^T K / eps` a thousand times `M` in norm. It scales like `t^2` when the
/// rows of `K` are scaled by `t`, so the iteration is unchanged by such scaling.
pub fn default_eps(sys: &CollocationSystem, smooth: &SmoothnessSystem, params: &SolverParams) -> f64 {
    let nm = Normal { sys, smooth, p: params };
    let n = sys.k.ncols();
    let m_norm = power_norm(n, |z| nm.m_mul(z));
    let k_norm = power_norm(n, |z| nm.ktk_mul(z));
    if k_norm == 0.0 || m_norm == 0.0 {
        1.0
    } else {
        1e-3 * k_norm / m_norm
    }
}

struct Factor<'a> {
    llt: Llt<usize, f64>,
    normal: &'a Normal<'a>,
    eps: f64,
}

impl Factor<'_> {
    fn apply(&self, z: &[f64]) -> Vec<f64> {
        let m = self.normal.m_mul(z);
        let k = self.normal.ktk_mul(z);
        m.iter().zip(&k).map(|(a, b)| a + b / self.eps).collect()
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.llt.solve_in_place(x.as_mut());
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solve with one step of iterative refinement.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.raw_solve(b);
        let r: Vec<f64> = b.iter().zip(self.apply(&x)).map(|(b, ax)| b - ax).collect();
        for (xi, d) in x.iter_mut().zip(self.raw_solve(&r)) {
            *xi += d;
        }
        x
    }
}

/// Rank deficiency of a small symmetric matrix, from its eigenvalues.
fn rank_deficiency(a: DMatrix<f64>) -> usize {
    let ev = a.symmetric_eigenvalues();
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = max * 1e-12 * ev.len() as f64;
    ev.iter().filter(|v| **v <= tol).count()
}

/// Augmented Lagrangian iteration with a single sparse factorization.
pub fn solve_al(sys: &CollocationSystem, smooth: &SmoothnessSystem, params: &SolverParams) -> Result<SolverReport> {
    solve_al_observed(sys, smooth, params, |_, _| {})
}

/// [`solve_al`], calling `observe(k, z^k)` for every iterate, `k` from 1.
pub fn solve_al_observed(
    sys: &CollocationSystem,
    smooth: &SmoothnessSystem,
    params: &SolverParams,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<SolverReport> {
    params.validate()?;
    let n = check_dims(sys, smooth)?;
    let eps = params.eps.unwrap_or_else(|| default_eps(sys, smooth, params));
    let normal = Normal { sys, smooth, p: params };

    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &normal.triplets(eps))
        .map_err(|e| Error::InvalidArgument(format!("normal matrix assembly: {e:?}")))?;
    let llt = match a.sp_cholesky(Side::Lower) {
        Ok(llt) => llt,
        Err(_) => {
            let deficiency = (n <= 3000).then(|| rank_deficiency(normal.dense(eps)));
            return Err(Error::ConsistencyViolated { rank_deficiency: deficiency });
        }
    };
    let factor = Factor { llt, normal: &normal, eps };

    let kt_f = sys.k.tr_mul_vec(&sys.fvec);
    let mut rhs = sys.bmat.tr_mul_vec(&sys.gvec);
    rhs.iter_mut().zip(&kt_f).for_each(|(r, kf)| *r = params.alpha * *r - kf / eps);
    if let Some(l0) = &params.lambda0 {
        if l0.len() != sys.k.nrows() {
            return Err(Error::DimensionMismatch { expected: sys.k.nrows(), got: l0.len() });
        }
        rhs.iter_mut().zip(sys.k.tr_mul_vec(l0)).for_each(|(r, v)| *r -= v);
    }

    let mut z = factor.solve(&rhs);
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged(1));
    }
    observe(1, &z);
    let mut history = vec![norm2(&sys.pde_residual(&z))];
    let mut steps = Vec::new();
    for k in 2..=params.max_iter {
        // Same update as A z' = M z - K^T f / eps, but formed from the residual
        // K z + f so the O(1/eps) terms never cancel in floating point.
        let mut rhs = sys.k.tr_mul_vec(&sys.pde_residual(&z));
        rhs.iter_mut().for_each(|v| *v /= -eps);
        let delta = factor.solve(&rhs);
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged(k));
        }
        let step = norm2(&delta);
        z.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
        let size = norm2(&z);
        observe(k, &z);
        steps.push(step);
        history.push(norm2(&sys.pde_residual(&z)));
        if step <= params.tol_step * size || size == 0.0 {
            break;
        }
    }

    let mut report = SolverReport::new(z, sys, smooth, eps);
    report.iterations = history.len();
    report.step_history = steps;
    report.residual_history = history;
    report.factorizations = 1;
    Ok(report)
}

/// Dense saddle-point solve of the same problem, for systems with
/// `m + M <= 3000`.
///
/// The constraint is projected onto the range of `K`: with `K = U S V^T`
/// truncated to its numerical rank, the system solved is
///
/// ```text
/// [ M    V_r ] [z]   [ alpha B^T G          ]
/// [ V_r^T  0 ] [mu] = [ -S_r^{-1} U_r^T f    ]
/// ```
///
/// and the multiplier is `lambda = U_r S_r^{-1} mu`, so `K^T lambda = V_r mu`.
pub fn solve_kkt_direct(
    sys: &CollocationSystem,
    smooth: &SmoothnessSystem,
    params: &SolverParams,
) -> Result<SolverReport> {
    params.validate()?;
    let m = check_dims(sys, smooth)?;
    let rows = sys.k.nrows();
    if m + rows > 3000 {
        return Err(Error::InvalidArgument(format!("dense saddle solve limited to m + M <= 3000, got {}", m + rows)));
    }
    let p = params;
    let b = sys.bmat.to_dense();
    let hr = smooth.hr.to_dense();
    let h0 = smooth.h0.to_dense();
    let mhat = b.transpose() * &b * p.alpha + hr.transpose() * &hr * p.beta + h0.transpose() * &h0 * p.gamma;

    let k = sys.k.to_dense();
    let svd = k.svd(true, true);
    let (u, vt, s) = (svd.u.unwrap(), svd.v_t.unwrap(), svd.singular_values);
    let smax = s.iter().fold(0.0f64, |a, b| a.max(*b));
    let tol = smax * f64::EPSILON * rows.max(m) as f64;
    let rank = s.iter().filter(|v| **v > tol).count();

    let dim = m + rank;
    let mut saddle = DMatrix::zeros(dim, dim);
    saddle.view_mut((0, 0), (m, m)).copy_from(&mhat);
    for j in 0..rank {
        for i in 0..m {
            saddle[(i, m + j)] = vt[(j, i)];
            saddle[(m + j, i)] = vt[(j, i)];
        }
    }
    let f = DVector::from_column_slice(&sys.fvec);
    let g = DVector::from_column_slice(&sys.gvec);
    let mut rhs = DVector::zeros(dim);
    rhs.rows_mut(0, m).copy_from(&(b.transpose() * g * p.alpha));
    for j in 0..rank {
        rhs[m + j] = -u.column(j).dot(&f) / s[j];
    }

    let ssvd = saddle.svd(true, true);
    let smax = ssvd.singular_values.max();
    let stol = smax * f64::EPSILON * dim as f64;
    let srank = ssvd.singular_values.iter().filter(|v| **v > stol).count();
    if srank < dim {
        return Err(Error::SingularSaddle { rank: srank, dim });
    }
    let sol = ssvd.solve(&rhs, stol).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let z: Vec<f64> = sol.rows(0, m).iter().copied().collect();
    let mut lambda = DVector::zeros(rows);
    for j in 0..rank {
        lambda += u.column(j) * (sol[m + j] / s[j]);
    }
    let mut report = SolverReport::new(z, sys, smooth, p.eps.unwrap_or(0.0));
    report.lambda = Some(lambda.iter().copied().collect());
    report.iterations = 1;
    report.residual_history = vec![report.residual_pde];
    report.factorizations = 1;
    Ok(report)
}
