use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::function::{decode, encode};

/// Axis-parallel cube on the periodic grid of resolution `2^{-resolution}`:
/// `side` cells per axis starting at `origin` (cell units), wrapping mod 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    pub origin: Vec<usize>,
    pub side: usize,
    pub resolution: u32,
}

impl Cube {
    pub fn new(origin: Vec<usize>, side: usize, resolution: u32) -> Result<Self> {
        let cells = 1usize
            .checked_shl(resolution)
            .ok_or_else(|| param("resolution too large"))?;
        if origin.is_empty() {
            return Err(param("cube needs at least one coordinate"));
        }
        if side == 0 || side > cells {
            return Err(param(format!("cube side {side} outside 1..={cells}")));
        }
        if origin.iter().any(|&o| o >= cells) {
            return Err(param("cube origin outside the torus"));
        }
        Ok(Self {
            origin,
            side,
            resolution,
        })
    }

    /// Interval `[a, b)` in cell units at the given resolution (n = 1).
    pub fn interval(a: usize, b: usize, resolution: u32) -> Result<Self> {
        if b <= a {
            return Err(param("empty interval"));
        }
        Self::new(vec![a], b - a, resolution)
    }

    pub fn dimension(&self) -> usize {
        self.origin.len()
    }

    pub fn side_length(&self) -> f64 {
        self.side as f64 * (-(self.resolution as f64)).exp2()
    }

    pub fn volume(&self) -> f64 {
        self.side_length().powi(self.dimension() as i32)
    }

    /// The same cube expressed in cells of another resolution.
    pub fn at_level(&self, level: u32) -> Result<Self> {
        if level >= self.resolution {
            let s = 1usize << (level - self.resolution);
            return Ok(Self {
                origin: self.origin.iter().map(|o| o * s).collect(),
                side: self.side * s,
                resolution: level,
            });
        }
        let s = 1usize << (self.resolution - level);
        if self.side % s != 0 || self.origin.iter().any(|o| o % s != 0) {
            return Err(Error::Alignment(format!(
                "cube {self:?} is not a union of level-{level} cells"
            )));
        }
        Ok(Self {
            origin: self.origin.iter().map(|o| o / s).collect(),
            side: self.side / s,
            resolution: level,
        })
    }

    /// Visits the lexicographic cell index of every cell of the cube.
    pub fn for_each_cell(&self, mut f: impl FnMut(usize)) {
        let n = self.dimension();
        let cells = 1usize << self.resolution;
        let count = self.side.pow(n as u32);
        let mut offs = vec![0usize; n];
        let mut coords = vec![0usize; n];
        for t in 0..count {
            decode(t, self.side, &mut offs);
            for a in 0..n {
                coords[a] = (self.origin[a] + offs[a]) % cells;
            }
            f(encode(&coords, cells));
        }
    }

    pub fn contains_cell(&self, coords: &[usize]) -> bool {
        let cells = 1usize << self.resolution;
        coords
            .iter()
            .zip(&self.origin)
            .all(|(&c, &o)| (c + cells - o) % cells < self.side)
    }

    /// Splits the cube into its `2^n` halves-per-axis children, lexicographic.
    /// The result lives one level finer so odd sides split exactly.
    pub fn children(&self) -> Vec<Cube> {
        let fine = self.at_level(self.resolution + 1).expect("refinement never fails");
        let h = fine.side / 2;
        let n = self.dimension();
        (0..1usize << n)
            .map(|bits| Cube {
                origin: (0..n)
                    .map(|a| {
                        let b = (bits >> (n - 1 - a)) & 1;
                        fine.origin[a] + b * h
                    })
                    .collect(),
                side: h,
                resolution: fine.resolution,
            })
            .collect()
    }
}

/// Cube of the dyadic hierarchy, `2^{-level}([0,1)^n + index) + shift` mod 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: Vec<u64>,
    pub shift: Vec<Ratio<i64>>,
}

impl DyadicCube {
    pub fn new(level: u32, index: Vec<u64>) -> Result<Self> {
        let n = index.len();
        Self::with_shift(level, index, vec![Ratio::from_integer(0); n])
    }

    pub fn with_shift(level: u32, index: Vec<u64>, shift: Vec<Ratio<i64>>) -> Result<Self> {
        if index.is_empty() || shift.len() != index.len() {
            return Err(param("dyadic cube index and shift must have equal nonzero length"));
        }
        if level >= 62 {
            return Err(param("dyadic level too large"));
        }
        let bound = 1u64 << level;
        if index.iter().any(|&j| j >= bound) {
            return Err(param(format!("dyadic index outside [0, 2^{level})")));
        }
        Ok(Self {
            level,
            index,
            shift,
        })
    }

    pub fn dimension(&self) -> usize {
        self.index.len()
    }

    pub fn side_length(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn volume(&self) -> f64 {
        (-(self.level as f64 * self.dimension() as f64)).exp2()
    }

    /// The `2^n` children in lexicographic order.
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dimension();
        (0..1u64 << n)
            .map(|bits| DyadicCube {
                level: self.level + 1,
                index: (0..n)
                    .map(|a| 2 * self.index[a] + ((bits >> (n - 1 - a)) & 1))
                    .collect(),
                shift: self.shift.clone(),
            })
            .collect()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube {
            level: self.level - 1,
            index: self.index.iter().map(|j| j / 2).collect(),
            shift: self.shift.clone(),
        })
    }

    /// Unshifted dyadic cubes are nested or disjoint.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level >= self.level
            && self.shift == other.shift
            && other
                .index
                .iter()
                .zip(&self.index)
                .all(|(&o, &s)| o >> (other.level - self.level) == s)
    }

    pub fn to_cube(&self, resolution: u32) -> Result<Cube> {
        if self.level > resolution {
            return Err(Error::Alignment(format!(
                "level-{} dyadic cube is finer than the level-{resolution} grid",
                self.level
            )));
        }
        let cells = 1i64 << resolution;
        let scale = 1usize << (resolution - self.level);
        let mut origin = Vec::with_capacity(self.dimension());
        for (&j, s) in self.index.iter().zip(&self.shift) {
            let cells_shift = *s * Ratio::from_integer(cells);
            if !cells_shift.is_integer() {
                return Err(Error::Alignment(format!(
                    "shift {s} is not a multiple of 2^-{resolution}"
                )));
            }
            let o = (j as i64 * scale as i64 + cells_shift.to_integer()).rem_euclid(cells);
            origin.push(o as usize);
        }
        Cube::new(origin, scale, resolution)
    }
}

/// Anything that can be expressed as a cube of a given grid.
pub trait Region {
    fn cube_at(&self, level: u32) -> Result<Cube>;
}

impl Region for Cube {
    fn cube_at(&self, level: u32) -> Result<Cube> {
        self.at_level(level)
    }
}

impl Region for DyadicCube {
    fn cube_at(&self, level: u32) -> Result<Cube> {
        self.to_cube(level)
    }
}
