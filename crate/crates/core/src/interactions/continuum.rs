//! Interaction fields of a spatial density `ρ` with velocity field `u` on a
//! periodic 3D grid, the continuum counterparts of the particle rules.

use alloc::vec::Vec;

use libm::{cos, floor, pow, round, sin};

use super::RadialProfile;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::quadrature::GaussRule;

/// Periodic box `[0, L₁) × [0, L₂) × [0, L₃)` sampled at cell corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid3 {
    pub cells: [usize; 3],
    pub length: [f64; 3],
}

impl PeriodicGrid3 {
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|d| self.length[d] / self.cells[d] as f64)
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.cells[1] + j) * self.cells[2] + k
    }

    pub fn unflat(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.cells[2];
        let j = (idx / self.cells[2]) % self.cells[1];
        let i = idx / (self.cells[1] * self.cells[2]);
        [i, j, k]
    }

    pub fn node(&self, idx: usize) -> Vec3 {
        let h = self.spacing();
        let [i, j, k] = self.unflat(idx);
        Vec3::new(i as f64 * h[0], j as f64 * h[1], k as f64 * h[2])
    }

    /// Minimum-image separation `b − a`.
    pub fn min_image(&self, a: Vec3, b: Vec3) -> Vec3 {
        let mut d = b - a;
        for c in 0..3 {
            let l = self.length[c];
            d[c] -= l * round(d[c] / l);
        }
        d
    }

    /// Periodic trilinear interpolation of nodal values.
    pub fn interpolate<T>(&self, values: &[T], p: Vec3) -> T
    where
        T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
    {
        let h = self.spacing();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for c in 0..3 {
            let t = p[c] / h[c];
            let f = floor(t);
            frac[c] = t - f;
            let n = self.cells[c] as i64;
            base[c] = (f as i64).rem_euclid(n) as usize;
        }
        let idx = |c: usize, o: usize| (base[c] + o) % self.cells[c];
        let mut acc: Option<T> = None;
        for (o0, w0) in [(0, 1.0 - frac[0]), (1, frac[0])] {
            for (o1, w1) in [(0, 1.0 - frac[1]), (1, frac[1])] {
                for (o2, w2) in [(0, 1.0 - frac[2]), (1, frac[2])] {
                    let term = values[self.flat(idx(0, o0), idx(1, o1), idx(2, o2))] * (w0 * w1 * w2);
                    acc = Some(match acc {
                        Some(a) => a + term,
                        None => term,
                    });
                }
            }
        }
        acc.expect("eight interpolation corners")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuumKernel {
    /// `∫K(|x−y|) ρ(y)u(y) dy / (∫K(|x−y|) ρ(y) dy)^q`.
    Distance { profile: RadialProfile, q: f64 },
    /// `∫T(M_{x,|x−y|}) ρ(y)u(y) dy`, with `M_{x,R}` the mass within distance
    /// `R` of `x`.
    Rank(RadialProfile),
}

/// Quadrature resolution of the local spherical rule used by distance
/// kernels: Gauss points per radial segment and in `cos θ`, uniform points in
/// the azimuth.
const RADIAL_POINTS: usize = 16;
const POLAR_POINTS: usize = 16;
const AZIMUTH_POINTS: usize = 32;

/// Evaluates the continuum interaction field at every grid node.
///
/// Distance kernels integrate over the ball of the kernel support with a
/// product Gauss rule in spherical coordinates, reading `ρ` and `ρu` by
/// trilinear interpolation. Rank kernels sum nodal masses ordered by
/// minimum-image distance, assigning each node the mass strictly closer
/// plus half of its own equidistant shell.
pub fn continuum_w(grid: &PeriodicGrid3, rho: &[f64], u: &[Vec3], kernel: &ContinuumKernel) -> Result<Vec<Vec3>> {
    if rho.len() != grid.len() || u.len() != grid.len() {
        return Err(Error::invalid("field arrays must match the grid size"));
    }
    if rho.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::invalid("density must be nonnegative"));
    }
    match kernel {
        ContinuumKernel::Distance { profile, q } => distance_field(grid, rho, u, profile, *q),
        ContinuumKernel::Rank(profile) => Ok(rank_field(grid, rho, u, profile)),
    }
}

fn distance_field(grid: &PeriodicGrid3, rho: &[f64], u: &[Vec3], profile: &RadialProfile, q: f64) -> Result<Vec<Vec3>> {
    profile.validate()?;
    let momentum: Vec<Vec3> = rho.iter().zip(u).map(|(&r, &ui)| ui * r).collect();
    let radial = GaussRule::new(RADIAL_POINTS);
    let polar = GaussRule::new(POLAR_POINTS);
    let support = profile.support();
    let mut edges = alloc::vec![0.0];
    edges.extend(profile.breakpoints().into_iter().filter(|&b| b < support));
    edges.push(support);

    let mut shell = Vec::new();
    for seg in edges.windows(2) {
        for (r, wr) in radial.on(seg[0], seg[1]) {
            let k = profile.value(r);
            if k == 0.0 {
                continue;
            }
            for (c, wc) in polar.on(-1.0, 1.0) {
                let s = libm::sqrt((1.0 - c * c).max(0.0));
                for a in 0..AZIMUTH_POINTS {
                    let phi = 2.0 * core::f64::consts::PI * a as f64 / AZIMUTH_POINTS as f64;
                    let dir = Vec3::new(s * cos(phi), s * sin(phi), c);
                    let weight = k * r * r * wr * wc * (2.0 * core::f64::consts::PI / AZIMUTH_POINTS as f64);
                    shell.push((dir * r, weight));
                }
            }
        }
    }

    let mut out = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let x = grid.node(idx);
        let mut num = Vec3::ZERO;
        let mut mass = 0.0;
        for &(offset, weight) in &shell {
            let p = x + offset;
            num += grid.interpolate(&momentum, p) * weight;
            mass += grid.interpolate(rho, p) * weight;
        }
        if q == 0.0 {
            out.push(num);
        } else if mass > 0.0 {
            out.push(num / pow(mass, q));
        } else {
            return Err(Error::Domain(alloc::format!(
                "zero normalization integral at grid node {idx}"
            )));
        }
    }
    Ok(out)
}

fn rank_field(grid: &PeriodicGrid3, rho: &[f64], u: &[Vec3], profile: &RadialProfile) -> Vec<Vec3> {
    let dv = grid.cell_volume();
    let nodes: Vec<Vec3> = (0..grid.len()).map(|i| grid.node(i)).collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(grid.len());
    for &x in &nodes {
        order.clear();
        order.extend(nodes.iter().enumerate().map(|(j, &y)| (grid.min_image(x, y).norm_sq(), j)));
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut acc = Vec3::ZERO;
        let mut closer = 0.0;
        let mut start = 0;
        while start < order.len() {
            let d = order[start].0;
            let end = start + order[start..].iter().take_while(|e| e.0 == d).count();
            let shell_mass: f64 = order[start..end].iter().map(|e| rho[e.1] * dv).sum();
            let t = profile.value(closer + 0.5 * shell_mass);
            for &(_, j) in &order[start..end] {
                acc += u[j] * (t * rho[j] * dv);
            }
            closer += shell_mass;
            start = end;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_state_gives_kernel_mass() {
        let grid = PeriodicGrid3 {
            cells: [6, 6, 6],
            length: [3.0, 3.0, 3.0],
        };
        let rho = vec![2.0; grid.len()];
        let u = vec![Vec3::Y; grid.len()];
        let k = RadialProfile::Indicator { radius: 0.7 };
        let w = continuum_w(&grid, &rho, &u, &ContinuumKernel::Distance { profile: k, q: 0.0 }).unwrap();
        let ball = 4.0 / 3.0 * core::f64::consts::PI * (0.7 * 0.7 * 0.7);
        for wi in w {
            assert!((wi - Vec3::Y * (2.0 * ball)).norm() < 1e-12);
        }
    }
}
