//! Lagrangian chains sampling a line of agents `z ↦ (x, v, s)` in the
//! zero-range limit, and traveling curves that solve it exactly.

use alloc::vec::Vec;

use core::f64::consts::PI;
use libm::{cos, pow, sin, sqrt};

use crate::error::{Error, Result};
use crate::geometry::{rotate_about, rotation_arc, Vec3};
use crate::integrators::XUpdate;

/// Smallest admissible `|x'|` before a chain counts as degenerate.
pub const DEGENERATE_STRETCH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParams {
    pub j: f64,
    pub q: f64,
    /// Mass per unit parameter `λ`.
    pub lambda: f64,
    pub v_speed: f64,
}

impl LineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.j >= 0.0 && self.j.is_finite() && self.q >= 0.0 && self.q.is_finite()) {
            return Err(Error::invalid("j and q must be finite and non-negative"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda must be positive"));
        }
        if !(self.v_speed > 0.0 && self.v_speed.is_finite()) {
            return Err(Error::invalid("v must be positive"));
        }
        Ok(())
    }

    /// `j λ^{1−q}/v²`, the torque prefactor without the stretch factor.
    fn torque_scale(&self) -> f64 {
        self.j * pow(self.lambda, 1.0 - self.q) / (self.v_speed * self.v_speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainBoundary {
    /// Sample `i + M` is sample `i` translated by `shift` (zero for closed
    /// curves).
    Periodic { shift: Vec3 },
    /// Free ends with one-sided stencils.
    Open,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChain {
    pub x: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub s: Vec<Vec3>,
    /// Parameter spacing `Δz`.
    pub dz: f64,
    pub boundary: ChainBoundary,
    pub params: LineParams,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDerivative {
    pub x: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub s: Vec<Vec3>,
}

impl LineChain {
    pub fn new(x: Vec<Vec3>, v: Vec<Vec3>, s: Vec<Vec3>, dz: f64, boundary: ChainBoundary, params: LineParams) -> Result<Self> {
        params.validate()?;
        let m = x.len();
        if m < 3 || v.len() != m || s.len() != m {
            return Err(Error::invalid("chains need matching lengths of at least 3 samples"));
        }
        if !(dz > 0.0 && dz.is_finite()) {
            return Err(Error::invalid("dz must be positive"));
        }
        let speed = params.v_speed;
        if let Some(i) = v.iter().position(|w| !((w.norm() - speed).abs() <= 1e-10 * speed)) {
            return Err(Error::invalid(alloc::format!("|v| differs from v at sample {i}")));
        }
        if let Some(i) = v.iter().zip(&s).position(|(a, b)| !(a.dot(*b).abs() <= 1e-8 * speed * speed)) {
            return Err(Error::invalid(alloc::format!("v·s is not zero at sample {i}")));
        }
        Ok(LineChain {
            x,
            v,
            s,
            dz,
            boundary,
            params,
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Position of sample `i` extended periodically, `i ∈ [−1, M]`.
    fn x_at(&self, i: isize, shift: Vec3) -> Vec3 {
        let m = self.len() as isize;
        let k = i.rem_euclid(m);
        let wraps = (i - k) / m;
        self.x[k as usize] + shift * wraps as f64
    }

    fn v_at(&self, i: isize) -> Vec3 {
        self.v[i.rem_euclid(self.len() as isize) as usize]
    }

    /// `|x'|` at every sample: centered, one-sided at open ends.
    pub fn stretch(&self) -> Result<Vec<f64>> {
        let m = self.len();
        let dz = self.dz;
        let out: Vec<f64> = match self.boundary {
            ChainBoundary::Periodic { shift } => (0..m as isize)
                .map(|i| (self.x_at(i + 1, shift) - self.x_at(i - 1, shift)).norm() / (2.0 * dz))
                .collect(),
            ChainBoundary::Open => (0..m)
                .map(|i| {
                    let d = if i == 0 {
                        self.x[0] * -3.0 + self.x[1] * 4.0 - self.x[2]
                    } else if i == m - 1 {
                        self.x[m - 1] * 3.0 - self.x[m - 2] * 4.0 + self.x[m - 3]
                    } else {
                        self.x[i + 1] - self.x[i - 1]
                    };
                    d.norm() / (2.0 * dz)
                })
                .collect(),
        };
        if let Some(index) = out.iter().position(|&n| !(n >= DEGENERATE_STRETCH)) {
            return Err(Error::DegenerateCurve { index, norm: out[index] });
        }
        Ok(out)
    }

    /// `d/dz (v'/|x'|³)` by the compact stencil
    /// `[a₊(v_{i+1} − v_i) − a₋(v_i − v_{i−1})]/Δz²` with
    /// `a± = |Δx±/Δz|^{−3}` on the adjacent links.
    fn curvature_flux(&self) -> Result<Vec<Vec3>> {
        let m = self.len();
        let dz = self.dz;
        let inv_cube = |d: Vec3, index: usize| -> Result<f64> {
            let n = d.norm() / dz;
            if !(n >= DEGENERATE_STRETCH) {
                return Err(Error::DegenerateCurve { index, norm: n });
            }
            Ok(1.0 / (n * n * n))
        };
        let mut out = alloc::vec![Vec3::ZERO; m];
        match self.boundary {
            ChainBoundary::Periodic { shift } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let k = i as isize;
                    let xi = self.x[i];
                    let ap = inv_cube(self.x_at(k + 1, shift) - xi, i)?;
                    let am = inv_cube(xi - self.x_at(k - 1, shift), i)?;
                    let vi = self.v[i];
                    *o = ((self.v_at(k + 1) - vi) * ap - (vi - self.v_at(k - 1)) * am) / (dz * dz);
                }
            }
            ChainBoundary::Open => {
                if m < 4 {
                    return Err(Error::invalid("open chains need at least 4 samples"));
                }
                for (i, o) in out.iter_mut().enumerate().take(m - 1).skip(1) {
                    let ap = inv_cube(self.x[i + 1] - self.x[i], i)?;
                    let am = inv_cube(self.x[i] - self.x[i - 1], i)?;
                    *o = ((self.v[i + 1] - self.v[i]) * ap - (self.v[i] - self.v[i - 1]) * am) / (dz * dz);
                }
                out[0] = out[1] * 2.0 - out[2];
                out[m - 1] = out[m - 2] * 2.0 - out[m - 3];
            }
        }
        Ok(out)
    }

    /// `ṡ = (jλ^{1−q}|x'|^q/v²) v ∧ d/dz(v'/|x'|³)` at every sample.
    pub fn torque(&self) -> Result<Vec<Vec3>> {
        let flux = self.curvature_flux()?;
        let scale = self.params.torque_scale();
        let q = self.params.q;
        let stretch = if q == 0.0 { None } else { Some(self.stretch()?) };
        Ok(flux
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let f = stretch.as_ref().map_or(scale, |st| scale * pow(st[i], q));
                self.v[i].cross(*d) * f
            })
            .collect())
    }
}

/// Time derivative `(ẋ, v̇, ṡ) = (v, s∧v, torque)` of a chain.
pub fn line_rhs(chain: &LineChain) -> Result<ChainDerivative> {
    Ok(ChainDerivative {
        x: chain.v.clone(),
        v: chain.s.iter().zip(&chain.v).map(|(s, v)| s.cross(*v)).collect(),
        s: chain.torque()?,
    })
}

/// One splitting step: half kick of the spins, rotation of the velocities
/// with the matching position update, half kick.
pub fn step_chain(chain: &mut LineChain, dt: f64, x_update: XUpdate) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt must be positive"));
    }
    let half = 0.5 * dt;
    let torque = chain.torque()?;
    for (s, t) in chain.s.iter_mut().zip(torque) {
        *s += t * half;
    }
    for i in 0..chain.len() {
        let (v, s) = (chain.v[i], chain.s[i]);
        let v_new = rotate_about(v, s, dt);
        chain.x[i] += match x_update {
            XUpdate::Chord => (v + v_new) * half,
            XUpdate::Arc => rotation_arc(v, s, dt),
        };
        chain.v[i] = v_new;
    }
    let torque = chain.torque()?;
    for (s, t) in chain.s.iter_mut().zip(torque) {
        *s += t * half;
    }
    chain.time += dt;
    if let Some(i) = (0..chain.len()).find(|&i| !(chain.x[i].is_finite() && chain.v[i].is_finite() && chain.s[i].is_finite())) {
        return Err(Error::BlowUp {
            time: chain.time,
            agent: i,
        });
    }
    Ok(())
}

/// Curves parametrized by arc length `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcCurve {
    /// The `x₁` axis.
    Line,
    /// Circle of the given radius in the `x₁x₂` plane.
    Circle { radius: f64 },
    /// `(R cos(α/c), R sin(α/c), Pα/c)` with `c = √(R² + P²)`, where `P`
    /// is the rise per radian.
    Helix { radius: f64, pitch: f64 },
}

impl ArcCurve {
    /// Helix with curvature `κ` and torsion `τ`.
    pub fn helix_from_curvature(kappa: f64, tau: f64) -> ArcCurve {
        let d = kappa * kappa + tau * tau;
        ArcCurve::Helix {
            radius: kappa / d,
            pitch: tau / d,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ArcCurve::Line => true,
            ArcCurve::Circle { radius } => radius > 0.0 && radius.is_finite(),
            ArcCurve::Helix { radius, pitch } => radius > 0.0 && radius.is_finite() && pitch.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("curve parameters out of range"))
        }
    }

    /// `(Γ, Γ', Γ'', Γ''')` at arc length `alpha`.
    pub fn frame(&self, alpha: f64) -> [Vec3; 4] {
        match *self {
            ArcCurve::Line => [Vec3::new(alpha, 0.0, 0.0), Vec3::X, Vec3::ZERO, Vec3::ZERO],
            ArcCurve::Circle { radius } => helix_frame(radius, 0.0, alpha),
            ArcCurve::Helix { radius, pitch } => helix_frame(radius, pitch, alpha),
        }
    }

    pub fn position(&self, alpha: f64) -> Vec3 {
        self.frame(alpha)[0]
    }

    /// Arc length of one repeat and the translation it produces. The line
    /// repeats with unit length.
    pub fn repeat(&self) -> (f64, Vec3) {
        match *self {
            ArcCurve::Line => (1.0, Vec3::X),
            ArcCurve::Circle { radius } => (2.0 * PI * radius, Vec3::ZERO),
            ArcCurve::Helix { radius, pitch } => {
                let c = sqrt(radius * radius + pitch * pitch);
                (2.0 * PI * c, Vec3::new(0.0, 0.0, 2.0 * PI * pitch))
            }
        }
    }
}

fn helix_frame(radius: f64, pitch: f64, alpha: f64) -> [Vec3; 4] {
    let c = sqrt(radius * radius + pitch * pitch);
    let t = alpha / c;
    let (st, ct) = (sin(t), cos(t));
    let k1 = radius / c;
    let k2 = radius / (c * c);
    let k3 = radius / (c * c * c);
    [
        Vec3::new(radius * ct, radius * st, pitch * t),
        Vec3::new(-k1 * st, k1 * ct, pitch / c),
        Vec3::new(-k2 * ct, -k2 * st, 0.0),
        Vec3::new(k3 * st, -k3 * ct, 0.0),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TravelingCurve {
    pub chain: LineChain,
    pub curve: ArcCurve,
    pub gamma: f64,
    /// `v²/j − (λ/γ)^{1−q}`; the state is an exact solution only when this
    /// vanishes.
    pub condition_mismatch: f64,
}

impl TravelingCurve {
    /// `max_i |x_i − Γ(γz_i + vt)|` at the chain's current time.
    pub fn deviation(&self) -> f64 {
        let v = self.chain.params.v_speed;
        let t = self.chain.time;
        self.chain
            .x
            .iter()
            .enumerate()
            .map(|(i, x)| (*x - self.curve.position(self.gamma * i as f64 * self.chain.dz + v * t)).norm())
            .fold(0.0, f64::max)
    }

    pub fn satisfies_condition(&self, tol: f64) -> bool {
        self.condition_mismatch.abs() <= tol
    }
}

/// Samples `x = Γ(γz + vt)`, `v = vΓ'`, `s = vΓ'∧Γ''` over one repeat of the
/// curve with `samples` points, as a periodic chain.
pub fn traveling_curve(curve: ArcCurve, gamma: f64, t: f64, samples: usize, params: LineParams) -> Result<TravelingCurve> {
    curve.validate()?;
    params.validate()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma must be positive"));
    }
    let (period, shift) = curve.repeat();
    let dz = period / (gamma * samples as f64);
    let v = params.v_speed;
    let mut x = Vec::with_capacity(samples);
    let mut vel = Vec::with_capacity(samples);
    let mut spin = Vec::with_capacity(samples);
    for i in 0..samples {
        let [p, d1, d2, _] = curve.frame(gamma * i as f64 * dz + v * t);
        x.push(p);
        vel.push(d1 * v);
        spin.push(d1.cross(d2) * v);
    }
    let mut chain = LineChain::new(x, vel, spin, dz, ChainBoundary::Periodic { shift }, params)?;
    chain.time = t;
    let condition_mismatch = if params.j == 0.0 {
        f64::INFINITY
    } else {
        v * v / params.j - pow(params.lambda / gamma, 1.0 - params.q)
    };
    Ok(TravelingCurve {
        chain,
        curve,
        gamma,
        condition_mismatch,
    })
}
