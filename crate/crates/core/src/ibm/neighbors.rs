//! Periodic box geometry and cell-list neighbour search.

use serde::{Deserialize, Serialize};

use crate::linalg::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBox {
    pub lengths: [f64; 3],
}

impl PeriodicBox {
    pub fn new(lengths: [f64; 3]) -> Self {
        PeriodicBox { lengths }
    }

    /// Maps a position into `[0, L)` along each axis.
    pub fn wrap(&self, x: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|k| {
            let l = self.lengths[k];
            let y = x[k].rem_euclid(l);
            if y >= l {
                0.0
            } else {
                y
            }
        }))
    }

    /// Minimum-image representative of a displacement.
    pub fn min_image(&self, dx: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|k| {
            let l = self.lengths[k];
            dx[k] - l * (dx[k] / l).round()
        }))
    }

    pub fn distance(&self, a: Vec3, b: Vec3) -> f64 {
        self.min_image(b - a).norm()
    }

    /// Largest possible minimum-image distance.
    pub fn max_distance(&self) -> f64 {
        0.5 * Vec3(self.lengths).norm()
    }

    pub fn min_length(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// For each particle, the sorted list of `(j, |x_j - x_i|)` with distance at
/// most `radius` (the particle itself included), by brute force.
pub fn all_pairs(positions: &[Vec3], pbox: &PeriodicBox, radius: f64) -> Vec<Vec<(usize, f64)>> {
    positions
        .iter()
        .map(|&xi| {
            positions
                .iter()
                .enumerate()
                .filter_map(|(j, &xj)| {
                    let r = pbox.distance(xi, xj);
                    (r <= radius).then_some((j, r))
                })
                .collect()
        })
        .collect()
}

/// Same result as [`all_pairs`] using a cell list with cells no smaller than
/// `radius`, at most about `2 N` cells in total.
pub fn cell_list_pairs(positions: &[Vec3], pbox: &PeriodicBox, radius: f64) -> Vec<Vec<(usize, f64)>> {
    let cap = ((2 * positions.len().max(1)) as f64).cbrt().ceil() as usize;
    let nc: [usize; 3] = std::array::from_fn(|k| ((pbox.lengths[k] / radius).floor().min(cap as f64) as usize).max(1));
    let cell_of = |x: Vec3| -> [usize; 3] {
        let y = pbox.wrap(x);
        std::array::from_fn(|k| ((y[k] / pbox.lengths[k] * nc[k] as f64) as usize).min(nc[k] - 1))
    };
    let flat = |c: [usize; 3]| (c[0] * nc[1] + c[1]) * nc[2] + c[2];
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); nc[0] * nc[1] * nc[2]];
    let home: Vec<[usize; 3]> = positions.iter().map(|&x| cell_of(x)).collect();
    for (i, c) in home.iter().enumerate() {
        cells[flat(*c)].push(i);
    }
    positions
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let c = home[i];
            let mut adjacent = Vec::with_capacity(27);
            for dx in -1i64..=1 {
                for dy in -1i64..=1 {
                    for dz in -1i64..=1 {
                        let off = [dx, dy, dz];
                        let cc: [usize; 3] = std::array::from_fn(|k| (c[k] as i64 + off[k]).rem_euclid(nc[k] as i64) as usize);
                        adjacent.push(flat(cc));
                    }
                }
            }
            adjacent.sort_unstable();
            adjacent.dedup();
            let mut out: Vec<(usize, f64)> = adjacent
                .iter()
                .flat_map(|&cell| cells[cell].iter())
                .filter_map(|&j| {
                    let r = pbox.distance(xi, positions[j]);
                    (r <= radius).then_some((j, r))
                })
                .collect();
            out.sort_unstable_by_key(|p| p.0);
            out
        })
        .collect()
}
