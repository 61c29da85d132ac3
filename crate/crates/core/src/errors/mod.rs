//! Error norms against exact solutions and empirical convergence orders.
//!
//! The velocity norm is `(|v^s|_1^2 + ||v^d||^2 + ||div v^d||^2)^{1/2}`; the
//! pressure error is the plain L2 norm over both subdomains.

use alloc::vec::Vec;

use crate::bench::ExactSolution;
use crate::field::DiscreteFields;
use crate::fespace::Discretization;
use crate::geometry::TriangleGeometry;
use crate::mesh::Subdomain;
use crate::quadrature::triangle_rule;
use crate::system::Solution;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    /// `E_h`, the full velocity error.
    pub velocity: f64,
    /// `E_h^s`, Stokes H1 seminorm part.
    pub velocity_stokes: f64,
    /// `E_{h,1}^d`, Darcy L2 part.
    pub velocity_darcy: f64,
    /// `E_{h,2}^d`, Darcy divergence part.
    pub velocity_darcy_div: f64,
    /// `e_h`.
    pub pressure: f64,
    pub pressure_stokes: f64,
    pub pressure_darcy: f64,
    pub dof: usize,
    pub h: f64,
    /// Seconds; filled in by the caller that times the solve.
    pub wall_time: f64,
}

impl ErrorReport {
    /// Column names matching [`ErrorReport::components`].
    pub const COMPONENT_NAMES: [&'static str; 7] = ["E_h", "E_h^s", "E_h1_d", "E_h2_d", "e_h", "e_h^s", "e_h^d"];

    pub fn components(&self) -> [f64; 7] {
        [
            self.velocity,
            self.velocity_stokes,
            self.velocity_darcy,
            self.velocity_darcy_div,
            self.pressure,
            self.pressure_stokes,
            self.pressure_darcy,
        ]
    }
}

/// All seven error components with a triangle rule exact to `quad_degree`.
pub fn compute_errors(d: &Discretization, sol: &Solution, exact: &dyn ExactSolution, quad_degree: usize) -> Result<ErrorReport> {
    let rule = triangle_rule(quad_degree)?;
    let fields = DiscreteFields::new(d, sol);
    let (mut h1s, mut l2d, mut divd, mut ps, mut pd) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for tri in 0..d.mesh.n_triangles() {
        let geo = TriangleGeometry::new(&d.mesh, tri);
        let dom = d.mesh.triangles[tri].subdomain;
        for (lam, w) in rule.iter() {
            let x = geo.point(lam);
            let jw = 2.0 * geo.area * w;
            let v = fields.at(tri, lam);
            let dp = exact.pressure(x, dom) - v.pressure;
            match dom {
                Subdomain::Stokes => {
                    let g = exact.grad_u_stokes(x);
                    let s: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| sq(g[a][b] - v.gradient[a][b])).sum();
                    h1s += jw * s;
                    ps += jw * dp * dp;
                }
                Subdomain::Darcy => {
                    let u = exact.u_darcy(x);
                    l2d += jw * (sq(u[0] - v.velocity[0]) + sq(u[1] - v.velocity[1]));
                    divd += jw * sq(exact.div_u_darcy(x) - v.divergence);
                    pd += jw * dp * dp;
                }
            }
        }
    }
    Ok(ErrorReport {
        velocity: libm::sqrt(h1s + l2d + divd),
        velocity_stokes: libm::sqrt(h1s),
        velocity_darcy: libm::sqrt(l2d),
        velocity_darcy_div: libm::sqrt(divd),
        pressure: libm::sqrt(ps + pd),
        pressure_stokes: libm::sqrt(ps),
        pressure_darcy: libm::sqrt(pd),
        dof: d.n_total(),
        h: d.mesh.h(),
        wall_time: 0.0,
    })
}

/// An observed order; `defined` is false when an error is zero or not
/// finite, in which case `value` is NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub defined: bool,
}

impl Rate {
    fn from_logs(log_err_ratio: f64, log_size_ratio: f64) -> Rate {
        let value = log_err_ratio / log_size_ratio;
        if value.is_finite() {
            Rate { value, defined: true }
        } else {
            Rate { value: f64::NAN, defined: false }
        }
    }
}

/// How mesh resolution enters an order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderConvention {
    /// `log(e0/e1) / log(h0/h1)`.
    MeshSize,
    /// `log(e0/e1) / log(sqrt(dof1/dof0))`, equal to the h-order on
    /// uniformly refined 2D meshes.
    SqrtDof,
    /// `log(e0/e1) / log(dof1/dof0)`, the default for reported tables
    /// (half the h-order in 2D).
    Dof,
}

impl OrderConvention {
    fn size(self, r: &ErrorReport) -> f64 {
        match self {
            OrderConvention::MeshSize => libm::log(r.h),
            OrderConvention::SqrtDof => -0.5 * libm::log(r.dof as f64),
            OrderConvention::Dof => -libm::log(r.dof as f64),
        }
    }
}

/// Orders between consecutive reports for the error selected by `err`.
pub fn convergence_rates(reports: &[ErrorReport], err: impl Fn(&ErrorReport) -> f64, conv: OrderConvention) -> Vec<Rate> {
    reports
        .windows(2)
        .map(|w| {
            let (e0, e1) = (err(&w[0]), err(&w[1]));
            if !(e0 > 0.0 && e1 > 0.0) {
                return Rate { value: f64::NAN, defined: false };
            }
            Rate::from_logs(libm::log(e0 / e1), conv.size(&w[0]) - conv.size(&w[1]))
        })
        .collect()
}

/// Least-squares slope of `log e` against the resolution measure over the
/// last `last` reports.
pub fn asymptotic_order(reports: &[ErrorReport], err: impl Fn(&ErrorReport) -> f64, conv: OrderConvention, last: usize) -> Rate {
    let tail = &reports[reports.len().saturating_sub(last)..];
    if tail.len() < 2 || tail.iter().any(|r| !(err(r) > 0.0)) {
        return Rate { value: f64::NAN, defined: false };
    }
    let xs: Vec<f64> = tail.iter().map(|r| conv.size(r)).collect();
    let ys: Vec<f64> = tail.iter().map(|r| libm::log(err(r))).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Rate::from_logs(sxy, sxx)
}


fn sq(x: f64) -> f64 {
    x * x
}
