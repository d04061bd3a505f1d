use serde::{Deserialize, Serialize};

use crate::error::{param, shape, Error, Result};
use crate::grid::cube::Cube;
use crate::grid::sum;

/// Largest supported ambient dimension. Cube calculus is limited to n <= 2,
/// but strong operators act on products of k such factors.
pub const MAX_DIMENSION: usize = 4;

/// Upper bound on the number of cells of a single grid function.
pub const MAX_CELLS: usize = 1 << 24;

/// Piecewise-constant function on the unit torus `[0,1)^d`, one value per
/// level-`L` cell in lexicographic order (first coordinate most significant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFunction", into = "RawGridFunction")]
pub struct GridFunction {
    dimension: usize,
    level: u32,
    values: Vec<f64>,
    nonneg: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGridFunction {
    dimension: usize,
    level: u32,
    values: Vec<f64>,
    #[serde(default)]
    nonneg: Option<bool>,
}

impl TryFrom<RawGridFunction> for GridFunction {
    type Error = Error;

    fn try_from(raw: RawGridFunction) -> Result<Self> {
        let f = GridFunction::new(raw.dimension, raw.level, raw.values)?;
        if raw.nonneg == Some(true) && !f.nonneg {
            return Err(param("grid function flagged nonneg has negative values"));
        }
        Ok(f)
    }
}

impl From<GridFunction> for RawGridFunction {
    fn from(f: GridFunction) -> Self {
        RawGridFunction {
            dimension: f.dimension,
            level: f.level,
            values: f.values,
            nonneg: Some(f.nonneg),
        }
    }
}

pub(crate) fn cell_count(dimension: usize, level: u32) -> Result<usize> {
    if dimension == 0 || dimension > MAX_DIMENSION {
        return Err(param(format!(
            "dimension {dimension} outside 1..={MAX_DIMENSION}"
        )));
    }
    let bits = dimension as u64 * level as u64;
    if bits > MAX_CELLS.trailing_zeros() as u64 {
        return Err(param(format!(
            "2^({dimension}*{level}) cells exceeds the supported maximum of {MAX_CELLS}"
        )));
    }
    Ok(1usize << bits)
}

impl GridFunction {
    /// Builds a grid function; `nonneg` is set when every value is >= 0.
    pub fn new(dimension: usize, level: u32, values: Vec<f64>) -> Result<Self> {
        let cells = cell_count(dimension, level)?;
        if values.len() != cells {
            return Err(shape(format!(
                "expected {cells} values for dimension {dimension} level {level}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(param(format!("non-finite value at cell {i}")));
        }
        let nonneg = values.iter().all(|&v| v >= 0.0);
        Ok(Self {
            dimension,
            level,
            values,
            nonneg,
        })
    }

    pub fn constant(dimension: usize, level: u32, c: f64) -> Result<Self> {
        let cells = cell_count(dimension, level)?;
        Self::new(dimension, level, vec![c; cells])
    }

    /// Samples `g` at the cell with the given integer coordinates.
    pub fn from_cells(
        dimension: usize,
        level: u32,
        mut g: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let cells = cell_count(dimension, level)?;
        let side = 1usize << level;
        let mut coords = vec![0usize; dimension];
        let mut values = Vec::with_capacity(cells);
        for idx in 0..cells {
            decode(idx, side, &mut coords);
            values.push(g(&coords));
        }
        Self::new(dimension, level, values)
    }

    /// Indicator of a cube, which must be aligned to this resolution.
    pub fn indicator(dimension: usize, level: u32, cube: &Cube) -> Result<Self> {
        let cube = cube.at_level(level)?;
        if cube.dimension() != dimension {
            return Err(shape("cube dimension differs from function dimension"));
        }
        let mut values = vec![0.0; cell_count(dimension, level)?];
        cube.for_each_cell(|c| values[c] = 1.0);
        Self::new(dimension, level, values)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of cells per axis, `2^L`.
    pub fn side_cells(&self) -> usize {
        1usize << self.level
    }

    /// Volume of a single cell, `2^{-dL}`.
    pub fn cell_volume(&self) -> f64 {
        (-((self.dimension as f64) * self.level as f64)).exp2()
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Integer coordinates of a cell index.
    pub fn coords(&self, idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dimension];
        decode(idx, self.side_cells(), &mut c);
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        encode(coords, self.side_cells())
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.dimension == other.dimension && self.level == other.level
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.dimension,
            self.level,
            self.values.iter().map(|&v| g(v)).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn powf(&self, e: f64) -> Result<Self> {
        self.map(|v| v.powf(e))
    }

    pub fn zip_with(&self, other: &GridFunction, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(shape("grid functions live on different grids"));
        }
        Self::new(
            self.dimension,
            self.level,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| g(a, b))
                .collect(),
        )
    }

    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Product of several functions on a common grid.
    pub fn product(fs: &[GridFunction]) -> Result<Self> {
        let (first, rest) = fs
            .split_first()
            .ok_or_else(|| param("product of an empty list"))?;
        rest.iter().try_fold(first.clone(), |acc, f| acc.mul(f))
    }

    /// Same function represented one level finer.
    pub fn refine(&self) -> Result<Self> {
        let fine = self.level + 1;
        let d = self.dimension;
        Self::from_cells(d, fine, |c| {
            let coarse: Vec<usize> = c.iter().map(|x| x / 2).collect();
            self.values[encode(&coarse, self.side_cells())]
        })
    }

    /// Tensor product `(self ⊗ other)(x, y) = self(x) other(y)` on the product torus.
    pub fn tensor(&self, other: &GridFunction) -> Result<Self> {
        if self.level != other.level {
            return Err(shape("tensor factors must share the grid level"));
        }
        let mut values = Vec::with_capacity(self.len() * other.len());
        for &a in &self.values {
            values.extend(other.values.iter().map(|&b| a * b));
        }
        Self::new(self.dimension + other.dimension, self.level, values)
    }

    /// Exact integral over the whole torus.
    pub fn total(&self) -> f64 {
        sum::pairwise(&self.values) * self.cell_volume()
    }
}

pub(crate) fn decode(mut idx: usize, side: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % side;
        idx /= side;
    }
}

pub(crate) fn encode(coords: &[usize], side: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * side + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        assert!(GridFunction::new(1, 2, vec![1.0; 3]).is_err());
        assert!(GridFunction::new(1, 1, vec![1.0, f64::NAN]).is_err());
        assert!(GridFunction::new(5, 1, vec![1.0; 32]).is_err());
    }

    #[test]
    fn nonneg_flag_tracks_values() {
        assert!(GridFunction::new(1, 1, vec![0.0, 2.0]).unwrap().nonneg());
        assert!(!GridFunction::new(1, 1, vec![-1.0, 2.0]).unwrap().nonneg());
    }

    #[test]
    fn refine_preserves_total() {
        let f = GridFunction::new(2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = f.refine().unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(f.total(), g.total());
        assert_eq!(g.values()[g.index(&[3, 0])], 3.0);
    }

    #[test]
    fn tensor_layout_is_factor_major() {
        let a = GridFunction::new(1, 1, vec![1.0, 2.0]).unwrap();
        let b = GridFunction::new(1, 1, vec![10.0, 20.0]).unwrap();
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.values(), &[10.0, 20.0, 20.0, 40.0]);
    }

    #[test]
    fn json_rejects_inconsistent_nonneg_flag() {
        let s = r#"{"dimension":1,"level":1,"values":[-1.0,1.0],"nonneg":true}"#;
        assert!(serde_json::from_str::<GridFunction>(s).is_err());
        let s = r#"{"dimension":1,"level":1,"values":[1.0,1.0],"extra":1}"#;
        assert!(serde_json::from_str::<GridFunction>(s).is_err());
    }
}
