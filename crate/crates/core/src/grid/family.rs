use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, shape, Error, Result};
use crate::grid::cube::Cube;
use crate::grid::function::{cell_count, decode, encode};

/// Which cubes a supremum ranges over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Standard dyadic cubes of levels `0..=L`.
    Dyadic,
    /// Every interval `[a, b)` with grid endpoints, `0 <= a < b <= 2^L` (n = 1 only).
    GridAligned,
    /// Dyadic grids translated by each listed shift (in level-`L` cell units).
    ShiftedDyadic { shifts: Vec<Vec<usize>> },
}

/// How values are combined over the cells of a cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    Sum,
    Min,
}

impl Reduction {
    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Reduction::Sum => a + b,
            Reduction::Min => a.min(b),
        }
    }
}

/// Finite, deterministically ordered family of cubes on the level-`L` grid of
/// the n-torus. Every member is a union of level-`L` cells after wrap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeFamily {
    kind: FamilyKind,
    dimension: usize,
    level: u32,
    /// Largest admitted side, in level-`L` cells.
    max_side: usize,
}

#[derive(Clone, Debug)]
struct Block {
    shift: Vec<usize>,
    level: u32,
    offset: usize,
}

impl CubeFamily {
    fn build(kind: FamilyKind, dimension: usize, level: u32) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(Error::UnsupportedFamily(format!(
                "cube families exist for n in {{1, 2}}, got n = {dimension}"
            )));
        }
        cell_count(dimension, level)?;
        Ok(Self {
            kind,
            dimension,
            level,
            max_side: 1usize << level,
        })
    }

    pub fn dyadic(dimension: usize, level: u32) -> Result<Self> {
        Self::build(FamilyKind::Dyadic, dimension, level)
    }

    pub fn grid_aligned(dimension: usize, level: u32) -> Result<Self> {
        if dimension != 1 {
            return Err(Error::UnsupportedFamily(
                "grid-aligned family is only enumerable for n = 1".into(),
            ));
        }
        Self::build(FamilyKind::GridAligned, dimension, level)
    }

    pub fn shifted_dyadic(dimension: usize, level: u32, shifts: Vec<Vec<usize>>) -> Result<Self> {
        let cells = 1usize << level;
        if shifts.is_empty() {
            return Err(param("shifted dyadic family needs at least one shift"));
        }
        for s in &shifts {
            if s.len() != dimension || s.iter().any(|&x| x >= cells) {
                return Err(param(format!(
                    "shift {s:?} must have {dimension} components in [0, {cells})"
                )));
            }
        }
        Self::build(FamilyKind::ShiftedDyadic { shifts }, dimension, level)
    }

    /// Dyadic grids shifted by 0, 1/3 and 2/3 (rounded to the grid) on the diagonal.
    pub fn one_third_shifts(dimension: usize, level: u32) -> Result<Self> {
        let cells = 1usize << level;
        let third = |k: usize| ((k * cells) as f64 / 3.0).round() as usize % cells;
        let shifts = (0..3).map(|k| vec![third(k); dimension]).collect();
        Self::shifted_dyadic(dimension, level, shifts)
    }

    /// All grid-aligned intervals in n = 1; dyadic plus one-third shifts in n = 2.
    pub fn default_for(dimension: usize, level: u32) -> Result<Self> {
        match dimension {
            1 => Self::grid_aligned(1, level),
            _ => Self::one_third_shifts(dimension, level),
        }
    }

    pub fn from_kind(kind: &FamilyKind, dimension: usize, level: u32) -> Result<Self> {
        match kind {
            FamilyKind::Dyadic => Self::dyadic(dimension, level),
            FamilyKind::GridAligned => Self::grid_aligned(dimension, level),
            FamilyKind::ShiftedDyadic { shifts } => Self::shifted_dyadic(dimension, level, shifts.clone()),
        }
    }

    /// Restricts to cubes of side at most `2^{k_max}` (`k_max <= 0` on the torus).
    pub fn truncated(&self, k_max: i32) -> Result<Self> {
        if k_max < -(self.level as i32) {
            return Err(Error::EmptyFamily(format!(
                "side bound 2^{k_max} is below the cell size 2^-{}",
                self.level
            )));
        }
        let cells = 1usize << self.level;
        let bound = if k_max >= 0 {
            cells
        } else {
            1usize << (self.level as i32 + k_max)
        };
        let mut f = self.clone();
        f.max_side = bound.min(self.max_side);
        Ok(f)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn max_side(&self) -> usize {
        self.max_side
    }

    /// Cells per axis.
    pub fn side_cells(&self) -> usize {
        1usize << self.level
    }

    pub fn cell_count(&self) -> usize {
        self.side_cells().pow(self.dimension as u32)
    }

    /// Human-readable tag used in reports.
    pub fn describe(&self) -> String {
        let base = match &self.kind {
            FamilyKind::Dyadic => format!("dyadic(n={}, L={})", self.dimension, self.level),
            FamilyKind::GridAligned => format!("grid-aligned(n=1, L={})", self.level),
            FamilyKind::ShiftedDyadic { shifts } => format!(
                "shifted-dyadic(n={}, L={}, shifts={:?})",
                self.dimension, self.level, shifts
            ),
        };
        if self.max_side < self.side_cells() {
            format!("{base}[side<={} cells]", self.max_side)
        } else {
            base
        }
    }

    fn min_dyadic_level(&self) -> u32 {
        // smallest level whose side 2^{L-l} fits under max_side
        let mut l = 0;
        while (self.side_cells() >> l) > self.max_side {
            l += 1;
        }
        l
    }

    fn blocks(&self) -> Vec<Block> {
        let shifts = match &self.kind {
            FamilyKind::Dyadic => vec![vec![0; self.dimension]],
            FamilyKind::ShiftedDyadic { shifts } => shifts.clone(),
            FamilyKind::GridAligned => return Vec::new(),
        };
        let cells = self.side_cells();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut offset = 0;
        for shift in shifts {
            for l in self.min_dyadic_level()..=self.level {
                let side = cells >> l;
                let residue: Vec<usize> = if l == 0 {
                    vec![0; self.dimension]
                } else {
                    shift.iter().map(|s| s % side).collect()
                };
                if !seen.insert((l, residue)) {
                    continue;
                }
                out.push(Block {
                    shift: shift.clone(),
                    level: l,
                    offset,
                });
                offset += 1usize << (l as usize * self.dimension);
            }
        }
        out
    }

    fn aligned_starts(&self) -> Vec<usize> {
        let cells = self.side_cells();
        let mut starts = Vec::with_capacity(cells + 1);
        let mut acc = 0;
        for a in 0..cells {
            starts.push(acc);
            acc += (cells - a).min(self.max_side);
        }
        starts.push(acc);
        starts
    }

    /// Number of member cubes.
    pub fn len(&self) -> usize {
        match self.kind {
            FamilyKind::GridAligned => *self.aligned_starts().last().unwrap(),
            _ => self
                .blocks()
                .iter()
                .map(|b| 1usize << (b.level as usize * self.dimension))
                .sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members in enumeration order: per shift (declared order), levels
    /// ascending, lexicographic index; grid-aligned intervals by start then end.
    pub fn cubes(&self) -> Vec<Cube> {
        let cells = self.side_cells();
        let mut out = Vec::with_capacity(self.len());
        match self.kind {
            FamilyKind::GridAligned => {
                for a in 0..cells {
                    for b in a + 1..=(a + self.max_side).min(cells) {
                        out.push(Cube {
                            origin: vec![a],
                            side: b - a,
                            resolution: self.level,
                        });
                    }
                }
            }
            _ => {
                let mut j = vec![0; self.dimension];
                for b in self.blocks() {
                    let per_axis = 1usize << b.level;
                    let side = cells >> b.level;
                    for idx in 0..per_axis.pow(self.dimension as u32) {
                        decode(idx, per_axis, &mut j);
                        out.push(Cube {
                            origin: j
                                .iter()
                                .zip(&b.shift)
                                .map(|(&ja, &s)| (ja * side + s) % cells)
                                .collect(),
                            side,
                            resolution: self.level,
                        });
                    }
                }
            }
        }
        out
    }

    /// Reduces `data`, laid out as `[outer][cell][width]`, over every member
    /// cube. Output layout is `[outer][cube][width]` in enumeration order.
    /// Sums are raw cell sums (not multiplied by the cell volume).
    pub fn reduce(&self, data: &[f64], outer: usize, width: usize, op: Reduction) -> Result<Vec<f64>> {
        let cells = self.cell_count();
        if data.len() != outer * cells * width {
            return Err(shape(format!(
                "reduce expects {} values, got {}",
                outer * cells * width,
                data.len()
            )));
        }
        let len = self.len();
        let mut out = vec![0.0; outer * len * width];
        if len == 0 || width == 0 {
            return Ok(out);
        }
        let blocks = self.blocks();
        let starts = self.aligned_starts();
        out.par_chunks_mut(len * width)
            .zip(data.par_chunks(cells * width))
            .for_each(|(o, d)| match self.kind {
                FamilyKind::GridAligned => self.reduce_aligned(d, width, op, &starts, o),
                _ => self.reduce_dyadic(d, width, op, &blocks, o),
            });
        Ok(out)
    }

    fn reduce_aligned(&self, d: &[f64], width: usize, op: Reduction, starts: &[usize], o: &mut [f64]) {
        let cells = self.side_cells();
        let mut acc = vec![0.0; width];
        for a in 0..cells {
            acc.copy_from_slice(&d[a * width..(a + 1) * width]);
            let base = starts[a];
            let end = (a + self.max_side).min(cells);
            for b in a + 1..=end {
                if b > a + 1 {
                    let row = &d[(b - 1) * width..b * width];
                    for (x, &y) in acc.iter_mut().zip(row) {
                        *x = op.apply(*x, y);
                    }
                }
                let slot = base + (b - a - 1);
                o[slot * width..(slot + 1) * width].copy_from_slice(&acc);
            }
        }
    }

    fn reduce_dyadic(&self, d: &[f64], width: usize, op: Reduction, blocks: &[Block], o: &mut [f64]) {
        let n = self.dimension;
        let cells = self.side_cells();
        let lmin = self.min_dyadic_level();
        let mut i = 0;
        while i < blocks.len() {
            let shift = &blocks[i].shift;
            let rolled = roll(d, n, cells, width, shift);
            let pyramid = build_pyramid(rolled, n, self.level, lmin, width, op);
            while i < blocks.len() && &blocks[i].shift == shift {
                let b = &blocks[i];
                let lvl = &pyramid[(b.level - lmin) as usize];
                o[b.offset * width..b.offset * width + lvl.len()].copy_from_slice(lvl);
                i += 1;
            }
        }
    }

    /// For every cell, the maximum of `values` (layout `[outer][cube][width]`)
    /// over member cubes containing that cell. Output `[outer][cell][width]`;
    /// cells covered by no cube get `-inf`.
    pub fn paint_max(&self, values: &[f64], outer: usize, width: usize) -> Result<Vec<f64>> {
        let len = self.len();
        if values.len() != outer * len * width {
            return Err(shape(format!(
                "paint expects {} values, got {}",
                outer * len * width,
                values.len()
            )));
        }
        let cells = self.cell_count();
        let mut out = vec![f64::NEG_INFINITY; outer * cells * width];
        if width == 0 {
            return Ok(out);
        }
        let blocks = self.blocks();
        out.par_chunks_mut(cells * width)
            .zip(values.par_chunks(len.max(1) * width))
            .for_each(|(o, v)| match self.kind {
                FamilyKind::GridAligned => self.paint_aligned(v, width, o),
                _ => self.paint_dyadic(v, width, &blocks, o),
            });
        Ok(out)
    }

    fn paint_aligned(&self, v: &[f64], width: usize, o: &mut [f64]) {
        let cells = self.side_cells();
        let starts = self.aligned_starts();
        let mut running = vec![f64::NEG_INFINITY; width];
        for a in 0..cells {
            running.fill(f64::NEG_INFINITY);
            let end = (a + self.max_side).min(cells);
            for b in (a + 1..=end).rev() {
                let slot = starts[a] + (b - a - 1);
                let row = &v[slot * width..(slot + 1) * width];
                let x = b - 1;
                let cell = &mut o[x * width..(x + 1) * width];
                for w in 0..width {
                    running[w] = running[w].max(row[w]);
                    cell[w] = cell[w].max(running[w]);
                }
            }
        }
    }

    fn paint_dyadic(&self, v: &[f64], width: usize, blocks: &[Block], o: &mut [f64]) {
        let n = self.dimension;
        let cells = self.side_cells();
        let total = self.cell_count();
        let mut c = vec![0usize; n];
        let mut j = vec![0usize; n];
        for b in blocks {
            let side = cells >> b.level;
            let per_axis = 1usize << b.level;
            for idx in 0..total {
                decode(idx, cells, &mut c);
                for a in 0..n {
                    j[a] = ((c[a] + cells - b.shift[a]) % cells) / side;
                }
                let slot = b.offset + encode(&j, per_axis);
                let row = &v[slot * width..(slot + 1) * width];
                let cell = &mut o[idx * width..(idx + 1) * width];
                for w in 0..width {
                    cell[w] = cell[w].max(row[w]);
                }
            }
        }
    }
}

/// `rolled[c] = d[c + shift]` per axis, mod the grid.
fn roll(d: &[f64], n: usize, cells: usize, width: usize, shift: &[usize]) -> Vec<f64> {
    if shift.iter().all(|&s| s == 0) {
        return d.to_vec();
    }
    let total = cells.pow(n as u32);
    let mut out = vec![0.0; d.len()];
    let mut c = vec![0usize; n];
    for idx in 0..total {
        decode(idx, cells, &mut c);
        for a in 0..n {
            c[a] = (c[a] + shift[a]) % cells;
        }
        let src = encode(&c, cells);
        out[idx * width..(idx + 1) * width].copy_from_slice(&d[src * width..(src + 1) * width]);
    }
    out
}

/// Level arrays `lmin..=level`, index 0 holding level `lmin`. Parents combine
/// children as `(c00 + c01) + (c10 + c11)` in two dimensions, matching the
/// split order of [`crate::grid::sum::box_sum`].
fn build_pyramid(
    finest: Vec<f64>,
    n: usize,
    level: u32,
    lmin: u32,
    width: usize,
    op: Reduction,
) -> Vec<Vec<f64>> {
    let mut levels = vec![finest];
    for l in (lmin..level).rev() {
        let child = levels.last().unwrap();
        let per_axis = 1usize << l;
        let cper = per_axis * 2;
        let mut parent = vec![0.0; per_axis.pow(n as u32) * width];
        match n {
            1 => {
                for j in 0..per_axis {
                    for w in 0..width {
                        parent[j * width + w] =
                            op.apply(child[2 * j * width + w], child[(2 * j + 1) * width + w]);
                    }
                }
            }
            _ => {
                for j0 in 0..per_axis {
                    for j1 in 0..per_axis {
                        let at = |a: usize, b: usize, w: usize| child[((2 * j0 + a) * cper + 2 * j1 + b) * width + w];
                        let p = (j0 * per_axis + j1) * width;
                        for w in 0..width {
                            parent[p + w] = op.apply(
                                op.apply(at(0, 0, w), at(0, 1, w)),
                                op.apply(at(1, 0, w), at(1, 1, w)),
                            );
                        }
                    }
                }
            }
        }
        levels.push(parent);
    }
    levels.reverse();
    levels
}
