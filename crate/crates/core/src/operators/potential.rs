use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, shape, Error, Result};
use crate::grid::sum::pairwise_by;
use crate::grid::{ExponentConfig, GridFunction};

pub const DEFAULT_DEPTH: u32 = 4;
pub const DEFAULT_COST_CAP: f64 = 1e9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Periodic distance on the torus.
    #[default]
    Torus,
    /// Plain distance on `[0,1)^n`, no wrap.
    Euclidean,
}

/// Quadrature controls for the potentials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    /// Micro-grid resolution `2^depth` per axis inside the evaluation cell.
    #[serde(default = "default_depth")]
    pub depth: u32,
    #[serde(default)]
    pub distance: DistanceMode,
    /// Largest admissible number of kernel terms.
    #[serde(default = "default_cap")]
    pub cost_cap: f64,
}

fn default_depth() -> u32 {
    DEFAULT_DEPTH
}

fn default_cap() -> f64 {
    DEFAULT_COST_CAP
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            depth: DEFAULT_DEPTH,
            distance: DistanceMode::Torus,
            cost_cap: DEFAULT_COST_CAP,
        }
    }
}

impl Quadrature {
    pub fn euclidean() -> Self {
        Self {
            distance: DistanceMode::Euclidean,
            ..Self::default()
        }
    }
}

/// `∫_{C^m} (Σ_i |c - y_i|)^{-(mn-α)} dy` for the unit cube `C` with center `c`.
///
/// The integrand is homogeneous of degree `α - mn`, so the integral over
/// `C^m` is the integral over the shell `C^m \ (C/2)^m` divided by
/// `1 - 2^{-α}`. The shell is integrated with the center rule on a
/// `2^depth`-per-axis micro-grid.
pub fn self_cell_integral(n: usize, m: usize, alpha: f64, depth: u32) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(param("self-cell integral needs alpha > 0"));
    }
    if depth < 2 {
        return Err(param("quadrature depth must be at least 2"));
    }
    let s = 1usize << depth;
    let inner = (s / 4)..(3 * s / 4);
    // (radius, inside the half cube, multiplicity)
    let mut classes: Vec<(f64, bool, f64)> = Vec::new();
    let mut coords = vec![0usize; n];
    for idx in 0..s.pow(n as u32) {
        crate::grid::decode_index(idx, s, &mut coords);
        let r2: f64 = coords
            .iter()
            .map(|&j| {
                let u = (j as f64 + 0.5) / s as f64 - 0.5;
                u * u
            })
            .sum();
        let r = r2.sqrt();
        let is_inner = coords.iter().all(|j| inner.contains(j));
        match classes.iter_mut().find(|c| c.0 == r && c.1 == is_inner) {
            Some(c) => c.2 += 1.0,
            None => classes.push((r, is_inner, 1.0)),
        }
    }
    let beta = (m * n) as f64 - alpha;
    let micro = (s as f64).powi(-((m * n) as i32));
    let shell = class_tuples(&classes, m, 0.0, true, 1.0, beta) * micro;
    Ok(shell / (1.0 - 2f64.powf(-alpha)))
}

fn class_tuples(classes: &[(f64, bool, f64)], left: usize, r: f64, all_inner: bool, mult: f64, beta: f64) -> f64 {
    if left == 0 {
        return if all_inner { 0.0 } else { mult * r.powf(-beta) };
    }
    classes
        .iter()
        .map(|&(ri, inner, c)| class_tuples(classes, left - 1, r + ri, all_inner && inner, mult * c, beta))
        .sum()
}

/// One factor of a (product) kernel: a space of dimension `n` at level `L`.
struct FactorKernel {
    n: usize,
    side: usize,
    cells: usize,
    m: usize,
    tuples: usize,
    beta: f64,
    weight: f64,
    diagonal: f64,
    mode: DistanceMode,
}

impl FactorKernel {
    fn new(n: usize, level: u32, m: usize, alpha: f64, quad: &Quadrature) -> Result<Self> {
        let side = 1usize << level;
        let cells = side.pow(n as u32);
        let h = 1.0 / side as f64;
        let j1 = self_cell_integral(n, m, alpha, quad.depth)?;
        Ok(Self {
            n,
            side,
            cells,
            m,
            tuples: cells.pow(m as u32),
            beta: (m * n) as f64 - alpha,
            weight: h.powi((m * n) as i32),
            diagonal: j1 * h.powf(alpha),
            mode: quad.distance,
        })
    }

    fn distances(&self, x: usize) -> Vec<f64> {
        let h = 1.0 / self.side as f64;
        let mut cx = vec![0usize; self.n];
        let mut cy = vec![0usize; self.n];
        crate::grid::decode_index(x, self.side, &mut cx);
        (0..self.cells)
            .map(|y| {
                crate::grid::decode_index(y, self.side, &mut cy);
                let d2: f64 = cx
                    .iter()
                    .zip(&cy)
                    .map(|(&a, &b)| {
                        let mut d = a.abs_diff(b);
                        if self.mode == DistanceMode::Torus {
                            d = d.min(self.side - d);
                        }
                        (d * d) as f64
                    })
                    .sum();
                h * d2.sqrt()
            })
            .collect()
    }

    /// Quadrature weights `W[x][t]` for all tuples `t = (y_1..y_m)`, first slot most significant.
    fn row(&self, x: usize) -> Vec<f64> {
        let dist = self.distances(x);
        let mut out = vec![0.0; self.tuples];
        let mut digits = vec![0usize; self.m];
        for (t, slot) in out.iter_mut().enumerate() {
            crate::grid::decode_index(t, self.cells, &mut digits);
            if digits.iter().all(|&y| y == x) {
                *slot = self.diagonal;
            } else {
                let r: f64 = digits.iter().map(|&y| dist[y]).sum();
                *slot = self.weight * r.powf(-self.beta);
            }
        }
        out
    }
}

/// Product-kernel potential
/// `∫ Π_i f_i(y_i) Π_s (Σ_i |x^{(s)} - y_i^{(s)}|)^{-(mn-α_s)} dy`
/// with one factor for `k = 1` (the multilinear fractional integral).
///
/// Off-diagonal tuples use the midpoint rule; a tuple with every `y_i^{(s)}`
/// in the evaluation cell of factor `s` uses the exact self-cell integral.
pub fn product_potential(fs: &[GridFunction], cfg: &ExponentConfig, quad: &Quadrature) -> Result<GridFunction> {
    cfg.validate()?;
    cfg.require_alpha_positive()?;
    if fs.len() != cfg.m {
        return Err(shape(format!("expected {} input functions, got {}", cfg.m, fs.len())));
    }
    let dim = cfg.k * cfg.n;
    let level = fs[0].level();
    for f in fs {
        if f.dimension() != dim || f.level() != level {
            return Err(shape("potential inputs must share one grid of dimension k n"));
        }
    }
    let side = 1usize << level;
    let cells = side.pow(cfg.n as u32);
    let tuples = cells.pow(cfg.m as u32);
    let terms = (cells as f64 * tuples as f64).powi(cfg.k as i32);
    if terms > quad.cost_cap {
        return Err(Error::CostCap {
            terms,
            cap: quad.cost_cap,
        });
    }
    let factors: Vec<FactorKernel> = (0..cfg.k)
        .map(|s| FactorKernel::new(cfg.n, level, cfg.m, cfg.alpha(s), quad))
        .collect::<Result<_>>()?;

    let mut acc = input_tensor(fs, cfg.k, cells, tuples);
    // Contract the last tuple axis against its factor kernel, k times.
    // Layout before step s: [t_0..t_s][x_{s+1}..x_{k-1}].
    for s in (0..cfg.k).rev() {
        let outer = tuples.pow(s as u32);
        let rest = cells.pow((cfg.k - 1 - s) as u32);
        let fk = &factors[s];
        let blocks: Vec<Vec<f64>> = (0..cells)
            .into_par_iter()
            .map(|x| {
                let row = fk.row(x);
                let mut out = Vec::with_capacity(outer * rest);
                for o in 0..outer {
                    for r in 0..rest {
                        let base = o * tuples * rest + r;
                        out.push(pairwise_by(tuples, &|t| acc[base + t * rest] * row[t]));
                    }
                }
                out
            })
            .collect();
        let mut next = vec![0.0; outer * cells * rest];
        for (x, block) in blocks.iter().enumerate() {
            for o in 0..outer {
                let dst = (o * cells + x) * rest;
                next[dst..dst + rest].copy_from_slice(&block[o * rest..(o + 1) * rest]);
            }
        }
        acc = next;
    }
    GridFunction::new(dim, level, acc)
}

/// `T[t_0..t_{k-1}] = Π_i f_i(y_i^{(0)}, .., y_i^{(k-1)})` where `t_s = (y_1^{(s)}..y_m^{(s)})`.
fn input_tensor(fs: &[GridFunction], k: usize, cells: usize, tuples: usize) -> Vec<f64> {
    let m = fs.len();
    let total = tuples.pow(k as u32);
    (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut ts = vec![0usize; k];
            crate::grid::decode_index(flat, tuples, &mut ts);
            let mut ys = vec![vec![0usize; m]; k];
            for (t, y) in ts.iter().zip(ys.iter_mut()) {
                crate::grid::decode_index(*t, cells, y);
            }
            let mut v = 1.0;
            for (i, f) in fs.iter().enumerate() {
                let idx = ys.iter().fold(0usize, |a, y| a * cells + y[i]);
                v *= f.values()[idx];
            }
            v
        })
        .collect()
}

/// Multilinear fractional integral `∫ Π f_i(y_i) (Σ|x - y_i|)^{-(mn-α)} dy`.
pub fn mfi(fs: &[GridFunction], cfg: &ExponentConfig, quad: &Quadrature) -> Result<GridFunction> {
    if cfg.k != 1 {
        return Err(param("mfi needs k = 1 exponents"));
    }
    product_potential(fs, cfg, quad)
}

/// Potential with product kernel `Π_s (Σ_i |x^{(s)} - y_i^{(s)}|)^{-(mn-α_s)}`.
pub fn strong_mfi(fs: &[GridFunction], cfg: &ExponentConfig, quad: &Quadrature) -> Result<GridFunction> {
    product_potential(fs, cfg, quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_cell_integral_one_dimensional() {
        // ∫_{-1/2}^{1/2} |y|^{-1/2} dy = 2√2
        let j = self_cell_integral(1, 1, 0.5, 6).unwrap();
        assert!((j - 2.0 * 2f64.sqrt()).abs() < 1e-3, "{j}");
        // ∫ |y|^0 dy = 1 when α = mn is excluded; α = 0.999 is close to 1
        let j = self_cell_integral(1, 1, 0.999, 4).unwrap();
        assert!((j - 1.0).abs() < 1e-2, "{j}");
    }

    #[test]
    fn riesz_potential_of_one_euclidean() {
        let cfg = ExponentConfig::new(1, 1, vec![2.0], 4.0, 0.5).unwrap();
        let one = GridFunction::constant(1, 8, 1.0).unwrap();
        let out = mfi(&[one], &cfg, &Quadrature::euclidean()).unwrap();
        for (i, v) in out.values().iter().enumerate() {
            let x = (i as f64 + 0.5) / 256.0;
            let exact = 2.0 * (x.sqrt() + (1.0 - x).sqrt());
            assert!((v - exact).abs() < 0.02 * exact, "cell {i}: {v} vs {exact}");
        }
    }

    #[test]
    fn zero_slot_and_linearity() {
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.5).unwrap();
        let f = GridFunction::from_cells(1, 4, |c| 1.0 + (c[0] % 5) as f64).unwrap();
        let g = GridFunction::from_cells(1, 4, |c| 0.5 + (c[0] % 3) as f64).unwrap();
        let zero = GridFunction::constant(1, 4, 0.0).unwrap();
        let q = Quadrature::default();
        let out = mfi(&[f.clone(), zero], &cfg, &q).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
        let base = mfi(&[f.clone(), g.clone()], &cfg, &q).unwrap();
        let scaled = mfi(&[f.scale(3.0).unwrap(), g], &cfg, &q).unwrap();
        for (a, b) in base.values().iter().zip(scaled.values()) {
            assert!((3.0 * a - b).abs() < 1e-12 * b.abs());
        }
    }

    #[test]
    fn cost_cap_refuses() {
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.5).unwrap();
        let f = GridFunction::constant(1, 6, 1.0).unwrap();
        let q = Quadrature {
            cost_cap: 1e4,
            ..Quadrature::default()
        };
        assert!(matches!(mfi(&[f.clone(), f], &cfg, &q), Err(Error::CostCap { .. })));
    }

    #[test]
    fn separable_product_kernel() {
        let cfg1 = ExponentConfig::new(1, 1, vec![2.0], 4.0, 0.5).unwrap();
        let cfg2 = ExponentConfig::strong(1, 1, 2, vec![2.0], 4.0, vec![0.5, 0.5]).unwrap();
        let g = GridFunction::from_cells(1, 4, |c| if c[0] < 6 { 1.0 } else { 0.0 }).unwrap();
        let q = Quadrature::default();
        let one = mfi(std::slice::from_ref(&g), &cfg1, &q).unwrap();
        let two = strong_mfi(&[g.tensor(&g).unwrap()], &cfg2, &q).unwrap();
        let expect = one.tensor(&one).unwrap();
        for (a, b) in two.values().iter().zip(expect.values()) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300));
        }
    }
}
