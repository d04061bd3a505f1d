//! Exact calculus for piecewise-constant functions on dyadic partitions of
//! the unit torus.
//!
//! Functions are cell-constant, so integrals, averages and norms below are
//! finite sums with no quadrature error. The torus `[0,1)^n` wraps
//! periodically, which makes every grid translation total.

mod cube;
mod exponents;
mod family;
mod function;
pub mod io;
mod product;
pub mod sum;

pub use cube::{Cube, DyadicCube, Region};
pub use exponents::{conjugate, ExponentConfig};
pub use family::{CubeFamily, FamilyKind, Reduction};
pub use function::{GridFunction, MAX_CELLS, MAX_DIMENSION};
pub(crate) use function::decode as decode_index;
pub use product::ProductFamily;

use crate::error::{param, shape, Error, Result};

/// `∫_Q f`, summed pairwise over the cells of `Q`.
pub fn integrate(f: &GridFunction, q: &impl Region) -> Result<f64> {
    let cube = q.cube_at(f.level())?;
    if cube.dimension() != f.dimension() {
        return Err(shape(format!(
            "cube of dimension {} against function of dimension {}",
            cube.dimension(),
            f.dimension()
        )));
    }
    let lens = vec![cube.side; cube.dimension()];
    Ok(sum::box_sum(f.values(), f.side_cells(), &cube.origin, &lens) * f.cell_volume())
}

/// `|Q|^{-1} ∫_Q f`.
pub fn average(f: &GridFunction, q: &impl Region) -> Result<f64> {
    let cube = q.cube_at(f.level())?;
    Ok(integrate(f, &cube)? / cube.volume())
}

/// `(∫ |f|^r ρ)^{1/r}`, with `ρ ≡ 1` when absent.
pub fn lp_norm(f: &GridFunction, r: f64, rho: Option<&GridFunction>) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(param(format!("norm exponent r = {r} must be positive")));
    }
    let vals = f.values();
    let s = match rho {
        None => sum::pairwise_by(vals.len(), &|i| vals[i].abs().powf(r)),
        Some(rho) => {
            if !rho.same_grid(f) {
                return Err(shape("norm weight lives on a different grid"));
            }
            let w = rho.values();
            sum::pairwise_by(vals.len(), &|i| vals[i].abs().powf(r) * w[i])
        }
    };
    Ok((s * f.cell_volume()).powf(1.0 / r))
}

/// Weak `L^{q,∞}` quasi-norm `sup_λ λ |{|g| > λ}|^{1/q}`.
///
/// For a step function the supremum is approached as `λ` rises to an attained
/// value `v`, so it equals `max_v v |{|g| >= v}|^{1/q}`.
pub fn weak_lq_norm(g: &GridFunction, q: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(param(format!("weak norm exponent q = {q} must be positive")));
    }
    let mut vals: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let vol = g.cell_volume();
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < vals.len() && vals[i] > 0.0 {
        let v = vals[i];
        while i < vals.len() && vals[i] == v {
            i += 1;
        }
        best = best.max(v * (i as f64 * vol).powf(1.0 / q));
    }
    Ok(best)
}

/// Cyclic translation `(τ_t f)(x) = f(x - t)`, `t` given in level-`L` cells.
pub fn translate(f: &GridFunction, t: &[i64]) -> Result<GridFunction> {
    if t.len() != f.dimension() {
        return Err(shape("translation vector has the wrong dimension"));
    }
    let side = f.side_cells() as i64;
    let vals = f.values();
    GridFunction::from_cells(f.dimension(), f.level(), |c| {
        let src: Vec<usize> = c
            .iter()
            .zip(t)
            .map(|(&x, &s)| (x as i64 - s).rem_euclid(side) as usize)
            .collect();
        vals[f.index(&src)]
    })
}

/// Translation by a real vector, which must be a multiple of `2^{-L}`.
pub fn translate_by(f: &GridFunction, t: &[f64]) -> Result<GridFunction> {
    let side = f.side_cells() as f64;
    let cells: Result<Vec<i64>> = t
        .iter()
        .map(|&x| {
            let c = x * side;
            if (c - c.round()).abs() > 1e-9 {
                Err(Error::Alignment(format!("translation {x} is not a multiple of 2^-{}", f.level())))
            } else {
                Ok(c.round() as i64)
            }
        })
        .collect();
    translate(f, &cells?)
}

/// Members of the family in their deterministic order.
pub fn enumerate(family: &CubeFamily) -> Vec<Cube> {
    family.cubes()
}
