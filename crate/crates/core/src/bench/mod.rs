//! Benchmark problems: manufactured solutions with pressure scaling
//! (`ex1`) and viscosity variation (`ex2`), and the lid-driven cavity with a
//! kinked interface and gradient forcing (`ex3`).

use alloc::boxed::Box;
use alloc::string::String;
use core::f64::consts::PI;

use libm::{cos, exp, sin, sqrt};

use crate::forms::ModelParams;
use crate::mesh::{generate_cavity, generate_structured, Marker, Mesh, Rect, RectPair, Subdomain};
use crate::{Point, Result};

/// Data of a coupled problem.
pub trait Problem: Sync + Send {
    fn params(&self) -> ModelParams;
    /// Body force in the given subdomain.
    fn f(&self, p: Point, dom: Subdomain) -> [f64; 2];
    /// Divergence data.
    fn g(&self, p: Point, dom: Subdomain) -> f64;
    /// Velocity prescribed on the external Stokes boundary.
    fn stokes_boundary(&self, p: Point, marker: Marker) -> [f64; 2];
    /// Field whose normal component is prescribed on the external Darcy boundary.
    fn darcy_boundary(&self, p: Point) -> [f64; 2];
    fn exact(&self) -> Option<&dyn ExactSolution> {
        None
    }
}

/// Analytic solution with derivatives, used by the error norms.
pub trait ExactSolution: Sync + Send {
    fn u_stokes(&self, p: Point) -> [f64; 2];
    /// `g[i][j] = d u_i / d x_j`.
    fn grad_u_stokes(&self, p: Point) -> [[f64; 2]; 2];
    fn u_darcy(&self, p: Point) -> [f64; 2];
    fn div_u_darcy(&self, p: Point) -> f64;
    fn pressure(&self, p: Point, dom: Subdomain) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkId {
    Ex1,
    Ex2,
    Ex3,
}

impl BenchmarkId {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::Ex1 => "ex1",
            BenchmarkId::Ex2 => "ex2",
            BenchmarkId::Ex3 => "ex3",
        }
    }

    pub fn parse(s: &str) -> Option<BenchmarkId> {
        match s {
            "ex1" => Some(BenchmarkId::Ex1),
            "ex2" => Some(BenchmarkId::Ex2),
            "ex3" => Some(BenchmarkId::Ex3),
            _ => None,
        }
    }

    /// Coarsest structured geometry of the manufactured examples.
    pub fn geometry(self) -> Option<RectPair> {
        match self {
            BenchmarkId::Ex1 => Some(RectPair::unit_square(4, 2)),
            BenchmarkId::Ex2 => Some(RectPair {
                stokes: Rect::new(0.0, PI, 0.0, PI),
                darcy: Rect::new(0.0, PI, -PI, 0.0),
                cells_x: 2,
                cells_y_stokes: 2,
                cells_y_darcy: 2,
                lid: false,
            }),
            BenchmarkId::Ex3 => None,
        }
    }

    /// Mesh at refinement `level`; the cavity uses `12 * 2^level` columns.
    pub fn mesh(self, level: u32) -> Result<Mesh> {
        match self.geometry() {
            Some(g) => generate_structured(&g, level),
            None => cavity_mesh(12 << level),
        }
    }
}

/// Pressure scaling test on the unit square, interface at `y = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1 {
    pub gamma: f64,
    pub mu: f64,
    pub k: f64,
}

pub fn example1(gamma: f64, mu: f64, k: f64) -> Example1 {
    Example1 { gamma, mu, k }
}

impl Example1 {
    fn grad_p_darcy(&self, p: Point) -> [f64; 2] {
        let (e, s, c) = (exp(p[1] / 2.0), sin(PI * p[0]), cos(PI * p[0]));
        let g1 = self.gamma + 1.0;
        [g1 * e * s, -g1 * e * c / (2.0 * PI)]
    }
}

impl ExactSolution for Example1 {
    fn u_stokes(&self, p: Point) -> [f64; 2] {
        let e = exp(p[1] / 2.0);
        [-e * sin(PI * p[0]) / (2.0 * PI * PI), e * cos(PI * p[0]) / PI]
    }

    fn grad_u_stokes(&self, p: Point) -> [[f64; 2]; 2] {
        let (e, s, c) = (exp(p[1] / 2.0), sin(PI * p[0]), cos(PI * p[0]));
        [[-e * c / (2.0 * PI), -e * s / (4.0 * PI * PI)], [-e * s, e * c / (2.0 * PI)]]
    }

    fn u_darcy(&self, p: Point) -> [f64; 2] {
        let e = exp(p[1] / 2.0);
        [-2.0 * e * sin(PI * p[0]), e * cos(PI * p[0]) / PI]
    }

    fn div_u_darcy(&self, p: Point) -> f64 {
        (1.0 - 4.0 * PI * PI) * exp(p[1] / 2.0) * cos(PI * p[0]) / (2.0 * PI)
    }

    fn pressure(&self, p: Point, dom: Subdomain) -> f64 {
        let base = -exp(p[1] / 2.0) * cos(PI * p[0]) / PI;
        match dom {
            Subdomain::Stokes => self.gamma * base,
            Subdomain::Darcy => (self.gamma + 1.0) * base,
        }
    }
}

impl Problem for Example1 {
    fn params(&self) -> ModelParams {
        ModelParams::new(self.mu, self.k, (1.0 + 4.0 * PI * PI) / 2.0).expect("valid parameters")
    }

    fn f(&self, p: Point, dom: Subdomain) -> [f64; 2] {
        let (e, s, c) = (exp(p[1] / 2.0), sin(PI * p[0]), cos(PI * p[0]));
        let (g, mu) = (self.gamma, self.mu);
        match dom {
            Subdomain::Stokes => [
                (8.0 * PI * PI * g - mu * (4.0 * PI * PI - 1.0)) / (8.0 * PI * PI) * e * s,
                (-2.0 * g - mu + 4.0 * PI * PI * mu) * e * c / (4.0 * PI),
            ],
            Subdomain::Darcy => {
                let u = self.u_darcy(p);
                let gp = self.grad_p_darcy(p);
                [mu / self.k * u[0] + gp[0], mu / self.k * u[1] + gp[1]]
            }
        }
    }

    fn g(&self, p: Point, dom: Subdomain) -> f64 {
        match dom {
            Subdomain::Stokes => 0.0,
            Subdomain::Darcy => self.div_u_darcy(p),
        }
    }

    fn stokes_boundary(&self, p: Point, _: Marker) -> [f64; 2] {
        self.u_stokes(p)
    }

    fn darcy_boundary(&self, p: Point) -> [f64; 2] {
        self.u_darcy(p)
    }

    fn exact(&self) -> Option<&dyn ExactSolution> {
        Some(self)
    }
}

/// Mean of the unshifted Example 2 pressure over the whole domain; the
/// shift makes the exact pressure mean-free.
pub const EX2_PRESSURE_SHIFT: f64 = 1.943_736_118_635_678_6;

/// Viscosity test on `(0, pi) x (-pi, pi)`, interface at `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2 {
    pub mu: f64,
    pub k: f64,
    pub alpha1_over_sqrt_kappa: f64,
}

pub fn example2(mu: f64, k: f64) -> Example2 {
    Example2 { mu, k, alpha1_over_sqrt_kappa: 1.0 }
}

impl Example2 {
    fn grad_p_darcy(&self, p: Point) -> [f64; 2] {
        let (ep, em) = (exp(p[1]), exp(-p[1]));
        [(ep - em) * cos(p[0]), (ep + em) * sin(p[0])]
    }
}

impl ExactSolution for Example2 {
    fn u_stokes(&self, p: Point) -> [f64; 2] {
        let (x, y) = (p[0], p[1]);
        [2.0 * sin(y) * cos(y) * cos(x), (sin(y) * sin(y) - 2.0) * sin(x)]
    }

    fn grad_u_stokes(&self, p: Point) -> [[f64; 2]; 2] {
        let (x, y) = (p[0], p[1]);
        let s2 = sin(2.0 * y);
        [[-s2 * sin(x), 2.0 * cos(2.0 * y) * cos(x)], [(sin(y) * sin(y) - 2.0) * cos(x), s2 * sin(x)]]
    }

    fn u_darcy(&self, p: Point) -> [f64; 2] {
        let g = self.grad_p_darcy(p);
        [-g[0], -g[1]]
    }

    fn div_u_darcy(&self, _: Point) -> f64 {
        0.0
    }

    fn pressure(&self, p: Point, dom: Subdomain) -> f64 {
        let (x, y) = (p[0], p[1]);
        EX2_PRESSURE_SHIFT
            + match dom {
                Subdomain::Stokes => sin(x) * sin(y),
                Subdomain::Darcy => (exp(y) - exp(-y)) * sin(x),
            }
    }
}

impl Problem for Example2 {
    fn params(&self) -> ModelParams {
        ModelParams::new(self.mu, self.k, self.alpha1_over_sqrt_kappa).expect("valid parameters")
    }

    fn f(&self, p: Point, dom: Subdomain) -> [f64; 2] {
        let (x, y, mu) = (p[0], p[1], self.mu);
        match dom {
            Subdomain::Stokes => [
                (10.0 * mu * cos(y) + 1.0) * sin(y) * cos(x),
                (-5.0 * mu * cos(y) * cos(y) + mu + cos(y)) * sin(x),
            ],
            Subdomain::Darcy => {
                let g = self.grad_p_darcy(p);
                let s = 1.0 - mu / self.k;
                [s * g[0], s * g[1]]
            }
        }
    }

    fn g(&self, _: Point, _: Subdomain) -> f64 {
        0.0
    }

    fn stokes_boundary(&self, p: Point, _: Marker) -> [f64; 2] {
        self.u_stokes(p)
    }

    fn darcy_boundary(&self, p: Point) -> [f64; 2] {
        self.u_darcy(p)
    }

    fn exact(&self) -> Option<&dyn ExactSolution> {
        Some(self)
    }
}

/// Kinks of the cavity interface, left to right.
pub const CAVITY_INTERFACE: [Point; 4] = [[0.0, 0.5], [1.0 / 3.0, 0.42], [2.0 / 3.0, 0.58], [1.0, 0.5]];

/// Interface-fitted cavity mesh with `cells_x` columns (a multiple of 3)
/// and `cells_x / 2` rows in each subdomain.
pub fn cavity_mesh(cells_x: usize) -> Result<Mesh> {
    if cells_x % 3 != 0 {
        return Err(crate::Error::InvalidParameter(alloc::format!("cells_x = {cells_x} is not a multiple of 3")));
    }
    generate_cavity(&CAVITY_INTERFACE, cells_x, cells_x / 2, cells_x / 2)
}

/// Lid-driven cavity with gradient forcing `grad(lambda sin(pi x) sin(pi y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example3 {
    pub mu: f64,
    pub lambda: f64,
    pub k: f64,
    pub alpha1: f64,
}

pub fn example3(mu: f64, lambda: f64, k: f64, alpha1: f64) -> Example3 {
    Example3 { mu, lambda, k, alpha1 }
}

impl Problem for Example3 {
    fn params(&self) -> ModelParams {
        ModelParams::new(self.mu, self.k, self.alpha1 / sqrt(self.k)).expect("valid parameters")
    }

    fn f(&self, p: Point, _: Subdomain) -> [f64; 2] {
        let (x, y) = (PI * p[0], PI * p[1]);
        [self.lambda * PI * cos(x) * sin(y), self.lambda * PI * sin(x) * cos(y)]
    }

    fn g(&self, _: Point, _: Subdomain) -> f64 {
        0.0
    }

    fn stokes_boundary(&self, _: Point, marker: Marker) -> [f64; 2] {
        match marker {
            Marker::Lid => [1.0, 0.0],
            Marker::Wall => [0.0, 0.0],
        }
    }

    fn darcy_boundary(&self, _: Point) -> [f64; 2] {
        [0.0, 0.0]
    }
}

type VecFn = Box<dyn Fn(Point, Subdomain) -> [f64; 2] + Send + Sync>;
type ScalarFn = Box<dyn Fn(Point, Subdomain) -> f64 + Send + Sync>;

/// Problem assembled from closures; boundary data default to zero.
pub struct CustomProblem {
    pub name: String,
    pub params: ModelParams,
    pub f: VecFn,
    pub g: ScalarFn,
    pub stokes_boundary: Box<dyn Fn(Point, Marker) -> [f64; 2] + Send + Sync>,
    pub darcy_boundary: Box<dyn Fn(Point) -> [f64; 2] + Send + Sync>,
}

impl CustomProblem {
    pub fn homogeneous(name: &str, params: ModelParams) -> Self {
        CustomProblem {
            name: name.into(),
            params,
            f: Box::new(|_, _| [0.0, 0.0]),
            g: Box::new(|_, _| 0.0),
            stokes_boundary: Box::new(|_, _| [0.0, 0.0]),
            darcy_boundary: Box::new(|_| [0.0, 0.0]),
        }
    }

    pub fn with_force(mut self, f: impl Fn(Point, Subdomain) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.f = Box::new(f);
        self
    }

    pub fn with_divergence(mut self, g: impl Fn(Point, Subdomain) -> f64 + Send + Sync + 'static) -> Self {
        self.g = Box::new(g);
        self
    }
}

impl Problem for CustomProblem {
    fn params(&self) -> ModelParams {
        self.params
    }
    fn f(&self, p: Point, dom: Subdomain) -> [f64; 2] {
        (self.f)(p, dom)
    }
    fn g(&self, p: Point, dom: Subdomain) -> f64 {
        (self.g)(p, dom)
    }
    fn stokes_boundary(&self, p: Point, marker: Marker) -> [f64; 2] {
        (self.stokes_boundary)(p, marker)
    }
    fn darcy_boundary(&self, p: Point) -> [f64; 2] {
        (self.darcy_boundary)(p)
    }
}
