//! Planar fields `(ρ, θ, ς)` with `u = v(−sin θ, cos θ, 0)` and spin along
//! `x₃`, and the rotating stationary state `(g(r), φ, v/r)`.

use alloc::vec::Vec;

use core::f64::consts::PI;
use libm::{atan2, cos, pow, sin, sqrt};

use super::FieldParams;
use crate::error::{Error, Result};

/// Square periodic grid of `cells × cells` nodes on `[−L/2, L/2)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub cells: usize,
    pub length: f64,
}

impl PolarGrid {
    pub fn spacing(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        (-0.5 * self.length + i as f64 * h, -0.5 * self.length + j as f64 * h)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.cells + j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarField2D {
    pub grid: PolarGrid,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub spin: Vec<f64>,
    pub params: FieldParams,
}

/// Nodes with `ρ` below this fraction of the peak density are left out of
/// the residual. Close to the edge of the support the `ρ^{−1−q}` factor
/// divides truncation errors by an arbitrarily small density, so the norm is
/// taken over a fixed core of the support instead.
pub const CORE_DENSITY_REL: f64 = 1e-3;

/// Max-norms of the discrete time derivatives over the support core.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarResidual {
    pub rho: f64,
    pub theta: f64,
    pub spin: f64,
}

impl PolarResidual {
    pub fn max_norm(&self) -> f64 {
        self.rho.max(self.theta).max(self.spin)
    }
}

fn wrap(a: f64) -> f64 {
    let mut d = a % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Discrete time derivatives of
/// `ρ̇ = −v div(ρU)`, `θ̇ = −vU·∇θ + ς`, `ς̇ = −vU·∇ς + (j/ρ^{1+q}) div(ρ²∇θ)`
/// with `U(θ) = (−sin θ, cos θ)`. Angle differences are wrapped to
/// `(−π, π]`; `div(ρ²∇θ)` uses face averages of `ρ²`. Empty nodes get zero.
pub fn polar_rhs(field: &PolarField2D) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let g = field.grid;
    let n = g.cells;
    let h = g.spacing();
    let p = field.params;
    let v = p.v_speed;
    let len = n * n;
    let mut d_rho = alloc::vec![0.0; len];
    let mut d_theta = alloc::vec![0.0; len];
    let mut d_spin = alloc::vec![0.0; len];
    let (rho, theta, spin) = (&field.rho, &field.theta, &field.spin);
    let flux = |k: usize| (-sin(theta[k]) * rho[k], cos(theta[k]) * rho[k]);
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        for j in 0..n {
            let k = g.idx(i, j);
            if rho[k] <= 0.0 {
                continue;
            }
            let jp = (j + 1) % n;
            let jm = (j + n - 1) % n;
            let (e, w, nn, s) = (g.idx(ip, j), g.idx(im, j), g.idx(i, jp), g.idx(i, jm));
            let ux = -sin(theta[k]);
            let uy = cos(theta[k]);

            let div_flux = (flux(e).0 - flux(w).0 + flux(nn).1 - flux(s).1) / (2.0 * h);
            d_rho[k] = -v * div_flux;

            let gx = wrap(theta[e] - theta[w]) / (2.0 * h);
            let gy = wrap(theta[nn] - theta[s]) / (2.0 * h);
            d_theta[k] = -v * (ux * gx + uy * gy) + spin[k];

            let sx = (spin[e] - spin[w]) / (2.0 * h);
            let sy = (spin[nn] - spin[s]) / (2.0 * h);
            let r2 = rho[k] * rho[k];
            let face = |o: usize| 0.5 * (r2 + rho[o] * rho[o]);
            let div = (face(e) * wrap(theta[e] - theta[k]) - face(w) * wrap(theta[k] - theta[w])
                + face(nn) * wrap(theta[nn] - theta[k])
                - face(s) * wrap(theta[k] - theta[s]))
                / (h * h);
            d_spin[k] = -v * (ux * sx + uy * sy) + p.j * div / pow(rho[k], 1.0 + p.q);
        }
    }
    (d_rho, d_theta, d_spin)
}

/// Residual over the nodes with `ρ ≥ core_rel · max ρ`.
pub fn polar_residual(field: &PolarField2D, core_rel: f64) -> PolarResidual {
    let (a, b, c) = polar_rhs(field);
    let peak = field.rho.iter().fold(0.0_f64, |m, &r| m.max(r));
    let cut = core_rel * peak;
    let rho = &field.rho;
    let norm = |x: &[f64]| {
        x.iter()
            .zip(rho)
            .filter(|(_, &r)| r > 0.0 && r >= cut)
            .fold(0.0_f64, |m, (v, _)| m.max(v.abs()))
    };
    PolarResidual {
        rho: norm(&a),
        theta: norm(&b),
        spin: norm(&c),
    }
}

/// Samples `ρ = g(r)`, `θ = φ`, `ς = v/r` and evaluates the residual of the
/// planar system over the support core (see [`CORE_DENSITY_REL`]). Fails with [`Error::GridTouchesOrigin`] when `g` is
/// positive at a node within two grid spacings of the origin, where the
/// stencils would reach the singular point.
pub fn polar_rotating_state(
    g: &dyn Fn(f64) -> f64,
    grid: PolarGrid,
    params: FieldParams,
) -> Result<(PolarField2D, PolarResidual)> {
    params.validate()?;
    if grid.cells < 4 || !(grid.length > 0.0) {
        return Err(Error::invalid("polar grid needs at least 4 cells and positive length"));
    }
    let n = grid.cells;
    let h = grid.spacing();
    let mut rho = Vec::with_capacity(n * n);
    let mut theta = Vec::with_capacity(n * n);
    let mut spin = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.node(i, j);
            let r = sqrt(x * x + y * y);
            let value = g(r);
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::invalid("density profile must be finite and non-negative"));
            }
            if value > 0.0 && r <= 2.0 * h {
                return Err(Error::GridTouchesOrigin);
            }
            rho.push(value);
            theta.push(atan2(y, x));
            spin.push(if r > 0.0 { params.v_speed / r } else { 0.0 });
        }
    }
    let field = PolarField2D {
        grid,
        rho,
        theta,
        spin,
        params,
    };
    let residual = polar_residual(&field, CORE_DENSITY_REL);
    Ok((field, residual))
}

/// Smooth annular profile `(1 − ((r − r₀)/w)²)⁶` on `|r − r₀| < w`.
pub fn annulus_profile(r0: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| {
        let t = (r - r0) / width;
        if t.abs() < 1.0 {
            let b = 1.0 - t * t;
            let b2 = b * b;
            b2 * b2 * b2
        } else {
            0.0
        }
    }
}
