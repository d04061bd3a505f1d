use crate::error::{param, shape, Result};
use crate::grid::cube::Cube;
use crate::grid::family::{CubeFamily, Reduction};
use crate::grid::function::GridFunction;

/// Products `Q_1 x ... x Q_k` of cubes drawn from per-factor families, acting
/// on functions over the `k n`-dimensional torus. Flat indices run in
/// row-major order over the factor families (factor 0 most significant).
/// A single factor is the ordinary cube family.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFamily {
    factors: Vec<CubeFamily>,
}

impl ProductFamily {
    pub fn new(factors: Vec<CubeFamily>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| param("product family needs at least one factor"))?;
        if factors
            .iter()
            .any(|f| f.dimension() != first.dimension() || f.level() != first.level())
        {
            return Err(param("product factors must share dimension and level"));
        }
        Ok(Self { factors })
    }

    pub fn single(family: CubeFamily) -> Self {
        Self {
            factors: vec![family],
        }
    }

    /// `k` copies of the same factor family.
    pub fn power(family: &CubeFamily, k: usize) -> Result<Self> {
        Self::new(vec![family.clone(); k])
    }

    pub fn factors(&self) -> &[CubeFamily] {
        &self.factors
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    /// Dimension of one factor.
    pub fn n(&self) -> usize {
        self.factors[0].dimension()
    }

    pub fn level(&self) -> u32 {
        self.factors[0].level()
    }

    /// Ambient dimension `k n`.
    pub fn ambient_dimension(&self) -> usize {
        self.k() * self.n()
    }

    pub fn len(&self) -> usize {
        self.factors.iter().map(|f| f.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn describe(&self) -> String {
        if self.k() == 1 {
            self.factors[0].describe()
        } else {
            self.factors
                .iter()
                .map(|f| f.describe())
                .collect::<Vec<_>>()
                .join(" x ")
        }
    }

    pub fn check(&self, f: &GridFunction) -> Result<()> {
        if f.dimension() != self.ambient_dimension() || f.level() != self.level() {
            return Err(shape(format!(
                "function on dimension {} level {} does not match {} (ambient dimension {})",
                f.dimension(),
                f.level(),
                self.describe(),
                self.ambient_dimension()
            )));
        }
        Ok(())
    }

    /// Per-factor volumes `|Q_s|` for each factor family, in enumeration order.
    pub fn factor_volumes(&self) -> Vec<Vec<f64>> {
        self.factors
            .iter()
            .map(|f| f.cubes().iter().map(Cube::volume).collect())
            .collect()
    }

    /// Splits a flat index into per-factor member indices.
    pub fn split_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.k()];
        for (s, f) in self.factors.iter().enumerate().rev() {
            let l = f.len();
            out[s] = flat % l;
            flat /= l;
        }
        out
    }

    /// The factor cubes of a flat index.
    pub fn cubes_at(&self, flat: usize) -> Vec<Cube> {
        self.split_index(flat)
            .into_iter()
            .zip(&self.factors)
            .map(|(i, f)| f.cubes().swap_remove(i))
            .collect()
    }

    /// Applies `value(flat_index)` to every product cube, in order.
    pub fn map_indexed(&self, value: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
        use rayon::prelude::*;
        (0..self.len()).into_par_iter().map(value).collect()
    }

    /// Raw reduction of `f`'s cell values over each product cube.
    pub fn reduce(&self, f: &GridFunction, op: Reduction) -> Result<Vec<f64>> {
        self.check(f)?;
        let cells = self.factors[0].cell_count();
        let mut data = f.values().to_vec();
        let mut outer = 1;
        for (s, fam) in self.factors.iter().enumerate() {
            let width = cells.pow((self.k() - 1 - s) as u32);
            data = fam.reduce(&data, outer, width, op)?;
            outer *= fam.len();
        }
        Ok(data)
    }

    /// `∫_{Q_1 x ... x Q_k} f` for every product cube.
    pub fn integrals(&self, f: &GridFunction) -> Result<Vec<f64>> {
        let vol = f.cell_volume();
        let mut s = self.reduce(f, Reduction::Sum)?;
        s.iter_mut().for_each(|x| *x *= vol);
        Ok(s)
    }

    /// Cell minimum of `f` over every product cube.
    pub fn minima(&self, f: &GridFunction) -> Result<Vec<f64>> {
        self.reduce(f, Reduction::Min)
    }

    /// Pointwise supremum over product cubes containing each point.
    pub fn paint_max(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.len() {
            return Err(shape("one value per product cube expected"));
        }
        let cells = self.factors[0].cell_count();
        let k = self.k();
        let mut data = values.to_vec();
        for s in (0..k).rev() {
            let outer: usize = self.factors[..s].iter().map(|f| f.len()).product();
            let width = cells.pow((k - 1 - s) as u32);
            data = self.factors[s].paint_max(&data, outer, width)?;
        }
        Ok(data)
    }
}
