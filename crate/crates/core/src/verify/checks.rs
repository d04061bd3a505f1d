use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, shape, Result};
use crate::grid::sum::pairwise;
use crate::grid::{conjugate, lp_norm, CubeFamily, ExponentConfig, GridFunction, ProductFamily};
use crate::operators::{
    all_grid_shifts, mfi, mfm, mfm_truncated, shift_conjugated_dyadic, strong_mfi, strong_mfm,
    strong_mfm_truncated, Quadrature,
};
use crate::weights::{ainf_surrogate, rd_constant, AinfReport};

/// Coefficients `c_Q` attached to the dyadic cubes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CarlesonCoefficients {
    /// `c_Q = |Q|^{exponent}`.
    VolumePower { exponent: f64 },
    /// `c_Q = scale |Q|^q (∫_Q ρ^{1-r'})^{-q/r'}`, the largest admissible under `C_1 = scale`.
    Threshold { scale: f64 },
    /// One value per dyadic cube in enumeration order.
    Explicit { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonResult {
    /// `max_Q c_Q |Q|^{-q} (∫_Q ρ^{1-r'})^{q/r'}`.
    pub c1: f64,
    /// `max_g Σ_Q c_Q (avg_Q g)^q / (∫ g^r ρ)^{q/r}` over the trials.
    pub c_hat: f64,
    /// Index of the maximizing trial.
    pub witness: Option<usize>,
    /// Best dyadic reverse-doubling constant of `ρ^{1-r'}`.
    pub rd: f64,
    pub hypotheses_met: bool,
    pub evaluated: usize,
    pub skipped: usize,
}

impl CarlesonResult {
    /// `Ĉ / C_1`, or `None` when `C_1 = 0`.
    pub fn factor(&self) -> Option<f64> {
        (self.c1 > 0.0).then(|| self.c_hat / self.c1)
    }
}

/// Dyadic Carleson embedding: both constants over the dyadic cubes of `ρ`'s grid.
pub fn carleson_check(
    rho: &GridFunction,
    r: f64,
    q: f64,
    coeffs: &CarlesonCoefficients,
    trials: &[GridFunction],
) -> Result<CarlesonResult> {
    if !(1.0 < r && r < q && q.is_finite()) {
        return Err(param(format!("requires 1 < r < q < inf, got r = {r}, q = {q}")));
    }
    let rc = conjugate(r);
    let sigma = rho.powf(1.0 - rc)?;
    let rd = rd_constant(&sigma, true)?.value();
    let fam = ProductFamily::single(CubeFamily::dyadic(rho.dimension(), rho.level())?);
    let vols: Vec<f64> = fam.factor_volumes().remove(0);
    let sig = fam.integrals(&sigma)?;
    let c: Vec<f64> = match coeffs {
        CarlesonCoefficients::VolumePower { exponent } => vols.iter().map(|v| v.powf(*exponent)).collect(),
        CarlesonCoefficients::Threshold { scale } => vols
            .iter()
            .zip(&sig)
            .map(|(v, s)| scale * v.powf(q) * s.powf(-q / rc))
            .collect(),
        CarlesonCoefficients::Explicit { values } => {
            if values.len() != fam.len() {
                return Err(shape(format!("expected {} coefficients, got {}", fam.len(), values.len())));
            }
            values.clone()
        }
    };
    if c.iter().any(|x| !(*x >= 0.0)) {
        return Err(param("Carleson coefficients must be nonnegative"));
    }
    let c1 = c
        .iter()
        .zip(&vols)
        .zip(&sig)
        .map(|((c, v), s)| c / (v.powf(q) * s.powf(-q / rc)))
        .fold(0.0, f64::max);
    let ratios: Vec<Option<f64>> = trials
        .par_iter()
        .map(|g| -> Result<Option<f64>> {
            if !g.same_grid(rho) {
                return Err(shape("Carleson trial on a different grid"));
            }
            let den = lp_norm(g, r, Some(rho))?.powf(q);
            if !(den >= super::norms::DENOMINATOR_FLOOR) {
                return Ok(None);
            }
            let ints = fam.integrals(g)?;
            let terms: Vec<f64> = c
                .iter()
                .zip(&ints)
                .zip(&vols)
                .map(|((c, i), v)| c * (i / v).powf(q))
                .collect();
            Ok(Some(pairwise(&terms) / den))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    let mut skipped = 0;
    for (i, r) in ratios.iter().enumerate() {
        match r {
            None => skipped += 1,
            Some(x) if best.is_none_or(|(_, b)| *x > b) => best = Some((i, *x)),
            Some(_) => {}
        }
    }
    Ok(CarlesonResult {
        c1,
        c_hat: best.map_or(0.0, |b| b.1),
        witness: best.map(|b| b.0),
        rd,
        hypotheses_met: rd > 1.0,
        evaluated: trials.len() - skipped,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationResult {
    /// `max ∫ |I(f)|^q v / ∫ M(f)^q v` over the trials.
    pub ratio: f64,
    pub witness: Option<usize>,
    pub evaluated: usize,
    pub skipped: usize,
    pub v_ainf: AinfReport,
}

/// Integral domination of the potential by the maximal operator in `L^q(v)`.
pub fn ainfty_domination_check(
    trials: &[Vec<GridFunction>],
    v: &GridFunction,
    cfg: &ExponentConfig,
    family: &CubeFamily,
    quad: &Quadrature,
    ainf_threshold: f64,
) -> Result<DominationResult> {
    let v_ainf = ainf_surrogate(v, family, ainf_threshold)?;
    let q = cfg.q;
    let ratios: Vec<Option<f64>> = trials
        .par_iter()
        .map(|fs| -> Result<Option<f64>> {
            let m_out = mfm(fs, cfg, family)?;
            let den = lp_norm(&m_out, q, Some(v))?.powf(q);
            if !(den >= super::norms::DENOMINATOR_FLOOR) {
                return Ok(None);
            }
            let i_out = mfi(fs, cfg, quad)?;
            Ok(Some(lp_norm(&i_out, q, Some(v))?.powf(q) / den))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    let mut skipped = 0;
    for (i, r) in ratios.iter().enumerate() {
        match r {
            None => skipped += 1,
            Some(x) if best.is_none_or(|(_, b)| *x > b) => best = Some((i, *x)),
            Some(_) => {}
        }
    }
    Ok(DominationResult {
        ratio: best.map_or(0.0, |b| b.1),
        witness: best.map(|b| b.0),
        evaluated: trials.len() - skipped,
        skipped,
        v_ainf,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `Σ_k Π_j a_k^{(j)} <= Π_j (Σ_k (a_k^{(j)})^{p_j/p})^{p/p_j}` with `1/p = Σ 1/p_j`.
pub fn holder_sequence_check(seqs: &[Vec<f64>], p: &[f64]) -> Result<HolderCheck> {
    if seqs.len() != p.len() || seqs.is_empty() {
        return Err(shape("one exponent per sequence expected"));
    }
    let len = seqs[0].len();
    if seqs.iter().any(|s| s.len() != len || s.iter().any(|x| !(*x >= 0.0))) {
        return Err(param("sequences must be nonnegative and of equal length"));
    }
    let ptot = 1.0 / p.iter().map(|x| 1.0 / x).sum::<f64>();
    let prods: Vec<f64> = (0..len).map(|k| seqs.iter().map(|s| s[k]).product()).collect();
    let lhs = pairwise(&prods);
    let rhs: f64 = seqs
        .iter()
        .zip(p)
        .map(|(s, pj)| {
            let e = pj / ptot;
            let powered: Vec<f64> = s.iter().map(|x| x.powf(e)).collect();
            pairwise(&powered).powf(1.0 / e)
        })
        .product();
    Ok(HolderCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

fn min_ratio(num: &GridFunction, den: &GridFunction) -> f64 {
    num.values()
        .iter()
        .zip(den.values())
        .filter(|(_, d)| **d > 0.0)
        .map(|(n, d)| n / d)
        .fold(f64::INFINITY, f64::min)
}

/// `min_x I_α(f)(x) / M_α(f)(x)` over cells where the maximal function is positive.
pub fn pointwise_domination(fs: &[GridFunction], cfg: &ExponentConfig, family: &CubeFamily, quad: &Quadrature) -> Result<f64> {
    let m_out = mfm(fs, cfg, family)?;
    let i_out = mfi(fs, cfg, quad)?;
    Ok(min_ratio(&i_out, &m_out))
}

/// Product-kernel version of [`pointwise_domination`].
pub fn strong_pointwise_domination(
    fs: &[GridFunction],
    cfg: &ExponentConfig,
    family: &CubeFamily,
    quad: &Quadrature,
) -> Result<f64> {
    let m_out = strong_mfm(fs, cfg, family)?;
    let i_out = strong_mfi(fs, cfg, quad)?;
    Ok(min_ratio(&i_out, &m_out))
}

/// Smallest `C` with `(M^{k_max}(f)(x))^q <= C mean_t [τ_{-t} M^{(d)} τ_t f (x)]^q`,
/// the mean running over every grid shift. Strong operators are used when `k > 1`.
pub fn shift_average_constant(fs: &[GridFunction], cfg: &ExponentConfig, family: &CubeFamily, k_max: i32) -> Result<f64> {
    let first = fs.first().ok_or_else(|| param("no input functions"))?;
    let q = cfg.q;
    let truncated = if cfg.k == 1 {
        mfm_truncated(fs, cfg, family, k_max)?
    } else {
        strong_mfm_truncated(fs, cfg, family, k_max)?
    };
    let shifts = all_grid_shifts(first.dimension(), first.level());
    let powered: Vec<Vec<f64>> = shifts
        .par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let out = shift_conjugated_dyadic(fs, cfg, t)?;
            Ok(out.values().iter().map(|v| v.powf(q)).collect())
        })
        .collect::<Result<_>>()?;
    let count = shifts.len() as f64;
    let mut c: f64 = 0.0;
    for (x, tv) in truncated.values().iter().enumerate() {
        let column: Vec<f64> = powered.iter().map(|row| row[x]).collect();
        let mean = pairwise(&column) / count;
        let lhs = tv.powf(q);
        if lhs > 0.0 {
            c = c.max(lhs / mean);
        }
    }
    Ok(c)
}
