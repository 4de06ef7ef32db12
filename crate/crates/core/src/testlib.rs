//! Manufactured solutions with hand-coded derivatives.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::pde::{sign, PdeOperator, Problem};
use crate::{Error, Point, Result};

/// Value and derivatives up to second order at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSolution {
    pub name: &'static str,
    /// `false` for functions with kinks or derivative singularities.
    pub smooth: bool,
    /// Steep layers that uniform meshes resolve poorly.
    pub hard: bool,
    jet: fn(f64, f64) -> Jet,
}

impl ManufacturedSolution {
    pub const fn new(name: &'static str, smooth: bool, hard: bool, jet: fn(f64, f64) -> Jet) -> Self {
        Self { name, smooth, hard, jet }
    }

    pub fn jet(&self, p: Point) -> Jet {
        (self.jet)(p[0], p[1])
    }

    pub fn u(&self, p: Point) -> f64 {
        self.jet(p).u
    }

    pub fn u_x(&self, p: Point) -> f64 {
        self.jet(p).ux
    }

    pub fn u_y(&self, p: Point) -> f64 {
        self.jet(p).uy
    }

    pub fn u_xx(&self, p: Point) -> f64 {
        self.jet(p).uxx
    }

    pub fn u_xy(&self, p: Point) -> f64 {
        self.jet(p).uxy
    }

    pub fn u_yy(&self, p: Point) -> f64 {
        self.jet(p).uyy
    }

    pub fn gradient(&self, p: Point) -> [f64; 2] {
        let j = self.jet(p);
        [j.ux, j.uy]
    }
}

fn us1(x: f64, y: f64) -> Jet {
    let u = ((x * x + y * y) / 2.0).exp();
    Jet { u, ux: x * u, uy: y * u, uxx: (1.0 + x * x) * u, uxy: x * y * u, uyy: (1.0 + y * y) * u }
}

fn us2(x: f64, y: f64) -> Jet {
    let s = PI * (x * x + y * y);
    let (sxy, cxy) = (x * y).sin_cos();
    let (ss, cs) = s.sin_cos();
    Jet {
        u: cxy + cs,
        ux: -y * sxy - 2.0 * PI * x * ss,
        uy: -x * sxy - 2.0 * PI * y * ss,
        uxx: -y * y * cxy - 2.0 * PI * ss - 4.0 * PI * PI * x * x * cs,
        uxy: -sxy - x * y * cxy - 4.0 * PI * PI * x * y * cs,
        uyy: -x * x * cxy - 2.0 * PI * ss - 4.0 * PI * PI * y * y * cs,
    }
}

fn us3(x: f64, y: f64) -> Jet {
    let w = 1.0 + x * x + y * y;
    let (w2, w3) = (w * w, w * w * w);
    Jet {
        u: 1.0 / w,
        ux: -2.0 * x / w2,
        uy: -2.0 * y / w2,
        uxx: -2.0 / w2 + 8.0 * x * x / w3,
        uxy: 8.0 * x * y / w3,
        uyy: -2.0 / w2 + 8.0 * y * y / w3,
    }
}

fn us4(x: f64, y: f64) -> Jet {
    let (ss, cs) = (PI * (x * x + y * y)).sin_cos();
    Jet {
        u: ss + 1.0,
        ux: 2.0 * PI * x * cs,
        uy: 2.0 * PI * y * cs,
        uxx: 2.0 * PI * cs - 4.0 * PI * PI * x * x * ss,
        uxy: -4.0 * PI * PI * x * y * ss,
        uyy: 2.0 * PI * cs - 4.0 * PI * PI * y * y * ss,
    }
}

fn us5(x: f64, y: f64) -> Jet {
    let k = 3.0 * PI;
    let (sx, cx) = (k * x).sin_cos();
    let (sy, cy) = (k * y).sin_cos();
    Jet {
        u: sx * sy,
        ux: k * cx * sy,
        uy: k * sx * cy,
        uxx: -k * k * sx * sy,
        uxy: k * k * cx * cy,
        uyy: -k * k * sx * sy,
    }
}

fn us6(x: f64, y: f64) -> Jet {
    let q = x * x - y * y;
    let g = 1.0 / (1.0 + q * q);
    let dg = -2.0 * q * g * g;
    Jet {
        u: q.atan(),
        ux: 2.0 * x * g,
        uy: -2.0 * y * g,
        uxx: 2.0 * g + 4.0 * x * x * dg,
        uxy: -4.0 * x * y * dg,
        uyy: -2.0 * g + 4.0 * y * y * dg,
    }
}

/// `cos(t) exp(-(t - pi)^2)` and its first two derivatives.
fn damped_cos(t: f64) -> [f64; 3] {
    let s = t - PI;
    let e = (-s * s).exp();
    let (e1, e2) = (-2.0 * s * e, (4.0 * s * s - 2.0) * e);
    let (sn, cs) = t.sin_cos();
    [cs * e, -sn * e + cs * e1, -cs * e - 2.0 * sn * e1 + cs * e2]
}

fn us7(x: f64, y: f64) -> Jet {
    let [p, p1, p2] = damped_cos(x);
    let [q, q1, q2] = damped_cos(y);
    Jet { u: -p * q, ux: -p1 * q, uy: -p * q1, uxx: -p2 * q, uxy: -p1 * q1, uyy: -p * q2 }
}

fn us8(x: f64, y: f64) -> Jet {
    let t1 = (20.0 * y - 20.0 * x * x).tanh();
    let t2 = (20.0 * x - 20.0 * y * y).tanh();
    let (s1, s2) = (1.0 - t1 * t1, 1.0 - t2 * t2);
    Jet {
        u: t1 - t2,
        ux: -40.0 * x * s1 - 20.0 * s2,
        uy: 20.0 * s1 + 40.0 * y * s2,
        uxx: -40.0 * s1 - 3200.0 * x * x * t1 * s1 + 800.0 * t2 * s2,
        uxy: 1600.0 * x * t1 * s1 - 1600.0 * y * t2 * s2,
        uyy: -800.0 * t1 * s1 + 40.0 * s2 + 3200.0 * y * y * t2 * s2,
    }
}

/// `(x^2 + y^2)^0.8`; the second derivatives are singular (NaN) at the origin.
fn uns1(x: f64, y: f64) -> Jet {
    let rho = x * x + y * y;
    if rho == 0.0 {
        return Jet { u: 0.0, ux: 0.0, uy: 0.0, uxx: f64::NAN, uxy: f64::NAN, uyy: f64::NAN };
    }
    let a = rho.powf(-0.2);
    let b = rho.powf(-1.2);
    Jet {
        u: rho.powf(0.8),
        ux: 1.6 * x * a,
        uy: 1.6 * y * a,
        uxx: 1.6 * a - 0.64 * x * x * b,
        uxy: -0.64 * x * y * b,
        uyy: 1.6 * a - 0.64 * y * y * b,
    }
}

/// `t e^{1-|t|} - t` and its one-sided derivatives (`sign(0) = 1`).
fn kink(t: f64) -> [f64; 3] {
    let e = (1.0 - t.abs()).exp();
    [t * e - t, e * (1.0 - t.abs()) - 1.0, -sign(t) * e * (2.0 - t.abs())]
}

fn uns2(x: f64, y: f64) -> Jet {
    let [p, p1, p2] = kink(x);
    let [q, q1, q2] = kink(y);
    Jet { u: p * q, ux: p1 * q, uy: p * q1, uxx: p2 * q, uxy: p1 * q1, uyy: p * q2 }
}

const SOLUTIONS: [ManufacturedSolution; 10] = [
    ManufacturedSolution::new("us1", true, false, us1),
    ManufacturedSolution::new("us2", true, false, us2),
    ManufacturedSolution::new("us3", true, false, us3),
    ManufacturedSolution::new("us4", true, false, us4),
    ManufacturedSolution::new("us5", true, false, us5),
    ManufacturedSolution::new("us6", true, false, us6),
    ManufacturedSolution::new("us7", true, false, us7),
    ManufacturedSolution::new("us8", true, true, us8),
    ManufacturedSolution::new("uns1", false, false, uns1),
    ManufacturedSolution::new("uns2", false, false, uns2),
];

/// The ten test functions `us1..us8, uns1, uns2`.
pub fn solution_registry() -> &'static [ManufacturedSolution] {
    &SOLUTIONS
}

pub fn solution_by_name(name: &str) -> Result<ManufacturedSolution> {
    SOLUTIONS
        .iter()
        .find(|s| s.name == name)
        .copied()
        .ok_or_else(|| Error::Unknown { kind: "solution", name: name.to_string() })
}

/// `f = -L u` and `g = u`, so that `sol` solves the problem exactly.
pub fn manufacture_rhs(sol: ManufacturedSolution, op: &PdeOperator) -> Problem {
    let lop = op.clone();
    let f = move |p: Point| {
        let j = sol.jet(p);
        -lop.apply(p, [j.uxx, j.uxy, j.uyy], [j.ux, j.uy], j.u)
    };
    let g = move |p: Point| sol.u(p);
    Problem { operator: op.clone(), f: Arc::new(f), g: Arc::new(g) }
}
