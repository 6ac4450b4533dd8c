use alloc::vec::Vec;

use libm::exp;

use crate::error::{Error, Result};

/// Nonnegative, nonincreasing, compactly supported radial profile. Used both
/// as a distance kernel `K(r)` and as a rank kernel `T(M)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `1` for `r < radius`, `0` otherwise.
    Indicator { radius: f64 },
    /// `exp(1 − 1/(1 − (r/radius)²))` inside the support, `0` outside; smooth
    /// with value `1` at the origin.
    SmoothBump { radius: f64 },
    /// Piecewise linear through `(r_k, value_k)`, constant before the first
    /// knot and zero from the last knot on.
    Table { knots: Vec<(f64, f64)> },
}

impl RadialProfile {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Indicator { radius } => {
                if r < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            RadialProfile::SmoothBump { radius } => {
                let t = r / radius;
                if t < 1.0 {
                    exp(1.0 - 1.0 / (1.0 - t * t))
                } else {
                    0.0
                }
            }
            RadialProfile::Table { knots } => table_value(knots, r),
        }
    }

    /// Radius beyond which the profile vanishes.
    pub fn support(&self) -> f64 {
        match self {
            RadialProfile::Indicator { radius } | RadialProfile::SmoothBump { radius } => *radius,
            RadialProfile::Table { knots } => knots.last().map_or(0.0, |k| k.0),
        }
    }

    /// Points inside the support where the profile or its derivative jumps;
    /// quadrature rules split their intervals there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RadialProfile::Table { knots } => knots.iter().map(|k| k.0).filter(|&r| r > 0.0).collect(),
            _ => Vec::new(),
        }
    }

    /// The same profile stretched by `factor`: `r ↦ K(r / factor)`.
    pub fn scaled(&self, factor: f64) -> RadialProfile {
        match self {
            RadialProfile::Indicator { radius } => RadialProfile::Indicator { radius: radius * factor },
            RadialProfile::SmoothBump { radius } => RadialProfile::SmoothBump { radius: radius * factor },
            RadialProfile::Table { knots } => RadialProfile::Table {
                knots: knots.iter().map(|&(r, y)| (r * factor, y)).collect(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialProfile::Indicator { radius } | RadialProfile::SmoothBump { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::invalid("profile radius must be positive and finite"));
                }
            }
            RadialProfile::Table { knots } => {
                if knots.is_empty() {
                    return Err(Error::invalid("table profile needs at least one knot"));
                }
                if !(knots[0].0 >= 0.0) {
                    return Err(Error::invalid("table knots must start at r >= 0"));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::invalid("table knot radii must be strictly increasing"));
                    }
                    if w[1].1 > w[0].1 {
                        return Err(Error::invalid("table profile must be nonincreasing"));
                    }
                }
                if knots.iter().any(|k| !(k.1 >= 0.0) || !k.0.is_finite() || !k.1.is_finite()) {
                    return Err(Error::invalid("table values must be finite and nonnegative"));
                }
                if knots.last().map_or(0.0, |k| k.0) <= 0.0 {
                    return Err(Error::invalid("table support must be positive"));
                }
            }
        }
        Ok(())
    }
}

fn table_value(knots: &[(f64, f64)], r: f64) -> f64 {
    let Some(&(r_last, _)) = knots.last() else {
        return 0.0;
    };
    if !(r < r_last) {
        return 0.0;
    }
    if r <= knots[0].0 {
        return knots[0].1;
    }
    let k = knots.partition_point(|kn| kn.0 <= r);
    let (r0, y0) = knots[k - 1];
    let (r1, y1) = knots[k];
    y0 + (y1 - y0) * (r - r0) / (r1 - r0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_is_strict() {
        let k = RadialProfile::Indicator { radius: 1.0 };
        assert_eq!(k.value(0.999), 1.0);
        assert_eq!(k.value(1.0), 0.0);
    }

    #[test]
    fn bump_is_one_at_origin_and_vanishes_at_edge() {
        let k = RadialProfile::SmoothBump { radius: 2.0 };
        assert_eq!(k.value(0.0), 1.0);
        assert_eq!(k.value(2.0), 0.0);
        assert!(k.value(1.999) < 1e-100);
    }

    #[test]
    fn table_interpolates() {
        let k = RadialProfile::Table {
            knots: alloc::vec![(0.5, 2.0), (1.0, 1.0), (2.0, 0.0)],
        };
        k.validate().unwrap();
        assert_eq!(k.value(0.1), 2.0);
        assert_eq!(k.value(0.75), 1.5);
        assert_eq!(k.value(1.5), 0.5);
        assert_eq!(k.value(2.0), 0.0);
        assert_eq!(k.support(), 2.0);
    }

    #[test]
    fn increasing_table_rejected() {
        let k = RadialProfile::Table {
            knots: alloc::vec![(0.0, 1.0), (1.0, 2.0)],
        };
        assert!(k.validate().is_err());
    }
}
