//! Mono-kinetic fields `(ρ, u, ς)` on a periodic 1D grid along `x₁`, with
//! centered second-order differences and RK4 in time.

use alloc::vec::Vec;

use libm::{pow, sqrt};

use crate::error::{Error, Result};
use crate::geometry::{with_norm, Vec3};

pub const DEFAULT_CFL: f64 = 0.8;

/// Relative density floor in the `ρ^{-q}` interaction factor.
pub const RHO_FLOOR_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    /// Reduced coupling `j`.
    pub j: f64,
    pub q: f64,
    pub v_speed: f64,
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.j >= 0.0 && self.j.is_finite()) {
            return Err(Error::invalid("j must be finite and non-negative"));
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return Err(Error::invalid("q must be finite and non-negative"));
        }
        if !(self.v_speed > 0.0 && self.v_speed.is_finite()) {
            return Err(Error::invalid("v must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonokineticField1D {
    pub rho: Vec<f64>,
    pub u: Vec<Vec3>,
    pub spin: Vec<Vec3>,
    pub length: f64,
    pub params: FieldParams,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDerivative {
    pub rho: Vec<f64>,
    pub u: Vec<Vec3>,
    pub spin: Vec<Vec3>,
}

impl MonokineticField1D {
    pub fn new(rho: Vec<f64>, u: Vec<Vec3>, spin: Vec<Vec3>, length: f64, params: FieldParams) -> Result<Self> {
        params.validate()?;
        let m = rho.len();
        if m < 3 || u.len() != m || spin.len() != m {
            return Err(Error::invalid("fields need matching lengths of at least 3 cells"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("domain length must be positive"));
        }
        if let Some(i) = rho.iter().position(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid(alloc::format!("density at cell {i} is negative or not finite")));
        }
        let v = params.v_speed;
        if let Some(i) = u.iter().position(|w| !((w.norm() - v).abs() <= 1e-10 * v)) {
            return Err(Error::invalid(alloc::format!("|u| differs from v at cell {i}")));
        }
        Ok(MonokineticField1D {
            rho,
            u,
            spin,
            length,
            params,
            time: 0.0,
        })
    }

    pub fn uniform(cells: usize, length: f64, rho: f64, u: Vec3, params: FieldParams) -> Result<Self> {
        Self::new(
            alloc::vec![rho; cells],
            alloc::vec![u; cells],
            alloc::vec![Vec3::ZERO; cells],
            length,
            params,
        )
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.length / self.len() as f64
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dx()
    }

    /// `∫ρς dx`.
    pub fn spin_momentum(&self) -> Vec3 {
        self.rho
            .iter()
            .zip(&self.spin)
            .map(|(&r, &s)| s * r)
            .sum::<Vec3>()
            * self.dx()
    }

    pub fn rho_floor(&self) -> f64 {
        RHO_FLOOR_REL * self.rho.iter().sum::<f64>() / self.len() as f64
    }

    /// Largest admissible step: `cfl·Δx / (v + max √(j ρ̃^{1−q}))` with the
    /// floored density `ρ̃`.
    pub fn admissible_dt(&self, cfl: f64) -> f64 {
        let floor = self.rho_floor();
        let p = self.params;
        let wave = self
            .rho
            .iter()
            .map(|&r| sqrt(p.j * pow(r.max(floor), 1.0 - p.q)))
            .fold(0.0, f64::max);
        cfl * self.dx() / (p.v_speed + wave)
    }

    fn renormalize(&mut self) {
        let v = self.params.v_speed;
        for w in &mut self.u {
            if let Some(n) = with_norm(*w, v) {
                *w = n;
            }
        }
    }

    fn axpy(&self, h: f64, d: &FieldDerivative) -> Self {
        let mut out = self.clone();
        for i in 0..self.len() {
            out.rho[i] += h * d.rho[i];
            out.u[i] += d.u[i] * h;
            out.spin[i] += d.spin[i] * h;
        }
        out
    }
}

/// Right-hand side of the mono-kinetic system with derivatives only along
/// `x₁`:
/// `ρ̇ = −∂(ρu₁)`, `u̇ = −u₁∂u + ς∧u`,
/// `ς̇ = −u₁∂ς + (j/(v² ρ̃^q)) u∧∂²(ρu)`.
pub fn pde_rhs_1d(field: &MonokineticField1D) -> FieldDerivative {
    let m = field.len();
    let dx = field.dx();
    let inv2 = 0.5 / dx;
    let inv_sq = 1.0 / (dx * dx);
    let p = field.params;
    let floor = field.rho_floor();
    let scale = p.j / (p.v_speed * p.v_speed);
    let flux: Vec<Vec3> = field.rho.iter().zip(&field.u).map(|(&r, &w)| w * r).collect();

    let mut out = FieldDerivative {
        rho: alloc::vec![0.0; m],
        u: alloc::vec![Vec3::ZERO; m],
        spin: alloc::vec![Vec3::ZERO; m],
    };
    for i in 0..m {
        let l = (i + m - 1) % m;
        let r = (i + 1) % m;
        let u = field.u[i];
        out.rho[i] = -(flux[r].x - flux[l].x) * inv2;
        out.u[i] = -(field.u[r] - field.u[l]) * (u.x * inv2) + field.spin[i].cross(u);
        let lap = (flux[r] - flux[i] * 2.0 + flux[l]) * inv_sq;
        let factor = if p.q == 0.0 {
            scale
        } else {
            scale / pow(field.rho[i].max(floor), p.q)
        };
        out.spin[i] = -(field.spin[r] - field.spin[l]) * (u.x * inv2) + u.cross(lap) * factor;
    }
    out
}

/// One RK4 step with `|u|` renormalized to `v` after every stage, guarded
/// by [`DEFAULT_CFL`].
pub fn pde_step_1d(field: &mut MonokineticField1D, dt: f64) -> Result<()> {
    pde_step_1d_with_cfl(field, dt, DEFAULT_CFL)
}

pub fn pde_step_1d_with_cfl(field: &mut MonokineticField1D, dt: f64, cfl: f64) -> Result<()> {
    let admissible = field.admissible_dt(cfl);
    if !(dt > 0.0) || dt > admissible {
        return Err(Error::Cfl { dt, admissible });
    }
    let k1 = pde_rhs_1d(field);
    let mut y = field.axpy(0.5 * dt, &k1);
    y.renormalize();
    let k2 = pde_rhs_1d(&y);
    let mut y = field.axpy(0.5 * dt, &k2);
    y.renormalize();
    let k3 = pde_rhs_1d(&y);
    let mut y = field.axpy(dt, &k3);
    y.renormalize();
    let k4 = pde_rhs_1d(&y);
    let w = dt / 6.0;
    for i in 0..field.len() {
        field.rho[i] += w * (k1.rho[i] + 2.0 * (k2.rho[i] + k3.rho[i]) + k4.rho[i]);
        field.u[i] += (k1.u[i] + (k2.u[i] + k3.u[i]) * 2.0 + k4.u[i]) * w;
        field.spin[i] += (k1.spin[i] + (k2.spin[i] + k3.spin[i]) * 2.0 + k4.spin[i]) * w;
    }
    field.renormalize();
    field.time += dt;
    if let Some(i) = (0..field.len()).find(|&i| !(field.rho[i].is_finite() && field.u[i].is_finite() && field.spin[i].is_finite())) {
        return Err(Error::BlowUp {
            time: field.time,
            agent: i,
        });
    }
    Ok(())
}

/// Advances to `t_end` with steps of at most `dt`, the last one shortened
/// to land exactly.
pub fn pde_run_1d(field: &mut MonokineticField1D, t_end: f64, dt: f64) -> Result<()> {
    let start = field.time;
    let steps = libm::ceil((t_end - start) / dt - 1e-9).max(0.0) as usize;
    if steps == 0 {
        return Ok(());
    }
    let h = (t_end - start) / steps as f64;
    for _ in 0..steps {
        pde_step_1d(field, h)?;
    }
    field.time = t_end;
    Ok(())
}

/// Uniform state `(ρ̄, ū, 0)` plus a transverse right-moving wave of the
/// linearized system: `u = ū + A sin(kx)·e`, `ς = −A k c cos(kx)·(ū∧e)/v²`
/// with `c = √(j ρ̄^{1−q})` and `e = ū∧x̂₁/v`.
pub fn transverse_wave(
    cells: usize,
    length: f64,
    rho: f64,
    u_bar: Vec3,
    mode: usize,
    amplitude: f64,
    params: FieldParams,
) -> Result<MonokineticField1D> {
    params.validate()?;
    let v = params.v_speed;
    let dir = u_bar
        .normalized()
        .ok_or(Error::DegenerateVelocity)?;
    if dir.x.abs() > 1e-12 {
        return Err(Error::invalid("the mean velocity must be transverse to the grid axis"));
    }
    let e = dir.cross(Vec3::X);
    let c = sqrt(params.j * pow(rho, 1.0 - params.q));
    let k = 2.0 * core::f64::consts::PI * mode as f64 / length;
    let dx = length / cells as f64;
    let mut u = Vec::with_capacity(cells);
    let mut spin = Vec::with_capacity(cells);
    for i in 0..cells {
        let x = (i as f64 + 0.5) * dx;
        let raw = dir * v + e * (amplitude * libm::sin(k * x));
        u.push(with_norm(raw, v).ok_or(Error::DegenerateVelocity)?);
        spin.push(dir.cross(e) * (-amplitude * k * c * libm::cos(k * x) / v));
    }
    MonokineticField1D::new(alloc::vec![rho; cells], u, spin, length, params)
}

/// Complex Fourier coefficient of mode `k` of a sampled periodic signal.
pub fn fourier_mode(values: &[f64], mode: usize) -> (f64, f64) {
    let m = values.len() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, &f) in values.iter().enumerate() {
        let a = 2.0 * core::f64::consts::PI * mode as f64 * (i as f64 + 0.5) / m;
        re += f * libm::cos(a);
        im -= f * libm::sin(a);
    }
    (re / m, im / m)
}

/// Phase speed of the transverse wave between two snapshots of the same
/// mode: the Fourier phase shift divided by `k·Δt`. The shift must stay
/// below half a wavelength.
pub fn measured_phase_speed(before: &[f64], after: &[f64], mode: usize, length: f64, elapsed: f64) -> f64 {
    let (a_re, a_im) = fourier_mode(before, mode);
    let (b_re, b_im) = fourier_mode(after, mode);
    // arg(b / a) = arg(b · conj(a)); a right-moving wave lowers the phase.
    let re = b_re * a_re + b_im * a_im;
    let im = b_im * a_re - b_re * a_im;
    let shift = -libm::atan2(im, re);
    let k = 2.0 * core::f64::consts::PI * mode as f64 / length;
    shift / (k * elapsed)
}
