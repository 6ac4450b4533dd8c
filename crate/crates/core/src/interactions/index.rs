use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use libm::floor;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

type CellKey = (i64, i64, i64);

/// Uniform cell list over 3D positions. With a cell size no smaller than the
/// query radius, every neighbor of a point lies in the 27 cells around it.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell: f64,
    cells: BTreeMap<CellKey, Vec<usize>>,
}

impl SpatialIndex {
    pub fn build(positions: &[Vec3], cell: f64) -> Result<Self> {
        if !(cell > 0.0 && cell.is_finite()) {
            return Err(Error::invalid("cell size must be positive and finite"));
        }
        let mut cells: BTreeMap<CellKey, Vec<usize>> = BTreeMap::new();
        for (i, &x) in positions.iter().enumerate() {
            cells.entry(key(x, cell)).or_default().push(i);
        }
        Ok(SpatialIndex { cell, cells })
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    /// Ids of the points strictly closer than `radius` to `center`, in
    /// ascending order. `radius` must not exceed the cell size.
    pub fn query(&self, positions: &[Vec3], center: Vec3, radius: f64) -> Vec<usize> {
        debug_assert!(radius <= self.cell);
        let (cx, cy, cz) = key(center, self.cell);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let k = (cx.saturating_add(dx), cy.saturating_add(dy), cz.saturating_add(dz));
                    if let Some(ids) = self.cells.get(&k) {
                        out.extend(ids.iter().copied().filter(|&j| (positions[j] - center).norm() < radius));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn key(x: Vec3, cell: f64) -> CellKey {
    (
        floor(x.x / cell) as i64,
        floor(x.y / cell) as i64,
        floor(x.z / cell) as i64,
    )
}
