use crate::error::{param, shape, Result};
use crate::grid::{translate, CubeFamily, ExponentConfig, GridFunction, ProductFamily};

/// Checks that `fs` holds `count` functions on one grid of the family's ambient dimension.
pub(crate) fn check_inputs(fs: &[GridFunction], count: usize, pf: &ProductFamily) -> Result<()> {
    if fs.len() != count {
        return Err(shape(format!("expected {count} input functions, got {}", fs.len())));
    }
    for f in fs {
        pf.check(f)?;
    }
    Ok(())
}

/// Pointwise supremum over product cubes `R = Q_1 x ... x Q_k` containing the
/// point of `Π_s |Q_s|^{a_s} Π_i ∫_R |f_i|`.
///
/// Every maximal operator in this crate is this supremum with a particular
/// choice of the volume exponents `a_s`.
pub fn product_cube_sup(fs: &[GridFunction], pf: &ProductFamily, a: &[f64]) -> Result<GridFunction> {
    if a.len() != pf.k() {
        return Err(param("one volume exponent per factor expected"));
    }
    let first = fs.first().ok_or_else(|| param("no input functions"))?;
    check_inputs(fs, fs.len(), pf)?;
    let values = cube_values(fs, pf, a)?;
    let painted = pf.paint_max(&values)?;
    GridFunction::new(first.dimension(), first.level(), painted)
}

/// The per-cube values `Π_s |Q_s|^{a_s} Π_i ∫_R |f_i|` in flat enumeration order.
pub fn cube_values(fs: &[GridFunction], pf: &ProductFamily, a: &[f64]) -> Result<Vec<f64>> {
    let mut acc = volume_factor(pf, a);
    for f in fs {
        let abs = if f.nonneg() { f.clone() } else { f.map(f64::abs)? };
        let ints = pf.integrals(&abs)?;
        acc.iter_mut().zip(&ints).for_each(|(x, i)| *x *= i);
    }
    Ok(acc)
}

/// `Π_s |Q_s|^{a_s}` over the flat product enumeration.
pub fn volume_factor(pf: &ProductFamily, a: &[f64]) -> Vec<f64> {
    let mut acc = vec![1.0];
    for (vols, &e) in pf.factor_volumes().iter().zip(a) {
        let pows: Vec<f64> = vols.iter().map(|v| v.powf(e)).collect();
        let mut next = Vec::with_capacity(acc.len() * pows.len());
        for &x in &acc {
            next.extend(pows.iter().map(|&p| x * p));
        }
        acc = next;
    }
    acc
}

fn single_exponent(cfg: &ExponentConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.k != 1 {
        return Err(param("single-cube operator needs k = 1 exponents"));
    }
    Ok(cfg.alpha(0) / cfg.n as f64 - cfg.m as f64)
}

fn strong_exponents(cfg: &ExponentConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok((0..cfg.k)
        .map(|s| cfg.alpha(s) / cfg.n as f64 - cfg.m as f64)
        .collect())
}

fn check_family(cfg: &ExponentConfig, family: &CubeFamily) -> Result<()> {
    if family.dimension() != cfg.n {
        return Err(shape(format!(
            "family dimension {} differs from n = {}",
            family.dimension(),
            cfg.n
        )));
    }
    Ok(())
}

/// Multilinear fractional maximal operator
/// `sup_{Q∋x} Π_i |Q|^{α/(nm)-1} ∫_Q |f_i|` over the given family.
pub fn mfm(fs: &[GridFunction], cfg: &ExponentConfig, family: &CubeFamily) -> Result<GridFunction> {
    let a = single_exponent(cfg)?;
    check_family(cfg, family)?;
    let pf = ProductFamily::single(family.clone());
    check_inputs(fs, cfg.m, &pf)?;
    product_cube_sup(fs, &pf, &[a])
}

/// [`mfm`] over the standard dyadic cubes of the inputs' grid.
pub fn mfm_dyadic(fs: &[GridFunction], cfg: &ExponentConfig) -> Result<GridFunction> {
    let level = fs.first().ok_or_else(|| param("no input functions"))?.level();
    mfm(fs, cfg, &CubeFamily::dyadic(cfg.n, level)?)
}

/// [`mfm`] restricted to cubes of side at most `2^{k_max}`.
pub fn mfm_truncated(
    fs: &[GridFunction],
    cfg: &ExponentConfig,
    family: &CubeFamily,
    k_max: i32,
) -> Result<GridFunction> {
    mfm(fs, cfg, &family.truncated(k_max)?)
}

/// Strong fractional maximal operator: supremum over products of `k` cubes
/// `Q^{(1)} x ... x Q^{(k)}` of `Π_s |Q^{(s)}|^{α_s/n - m} Π_i ∫ |f_i|`.
pub fn strong_mfm(fs: &[GridFunction], cfg: &ExponentConfig, family: &CubeFamily) -> Result<GridFunction> {
    let a = strong_exponents(cfg)?;
    check_family(cfg, family)?;
    let pf = ProductFamily::power(family, cfg.k)?;
    check_inputs(fs, cfg.m, &pf)?;
    product_cube_sup(fs, &pf, &a)
}

pub fn strong_mfm_dyadic(fs: &[GridFunction], cfg: &ExponentConfig) -> Result<GridFunction> {
    let level = fs.first().ok_or_else(|| param("no input functions"))?.level();
    strong_mfm(fs, cfg, &CubeFamily::dyadic(cfg.n, level)?)
}

pub fn strong_mfm_truncated(
    fs: &[GridFunction],
    cfg: &ExponentConfig,
    family: &CubeFamily,
    k_max: i32,
) -> Result<GridFunction> {
    strong_mfm(fs, cfg, &family.truncated(k_max)?)
}

/// Fefferman–Stein majorant
/// `sup Π_s |Q_s|^{q(α_s/n - 1/p)} ∫_{Q_1 x ... x Q_k} v`.
pub fn fs_majorant(v: &GridFunction, cfg: &ExponentConfig, family: &CubeFamily) -> Result<GridFunction> {
    cfg.validate()?;
    check_family(cfg, family)?;
    let a: Vec<f64> = (0..cfg.k)
        .map(|s| cfg.q * (cfg.alpha(s) / cfg.n as f64 - cfg.inv_p()))
        .collect();
    let pf = ProductFamily::power(family, cfg.k)?;
    product_cube_sup(std::slice::from_ref(v), &pf, &a)
}

/// `τ_{-t} ∘ M^{(d)} ∘ τ_t`, with the strong dyadic operator when `k > 1`
/// (then `t` concatenates the per-factor shifts). `t` is in cell units.
pub fn shift_conjugated_dyadic(fs: &[GridFunction], cfg: &ExponentConfig, t: &[i64]) -> Result<GridFunction> {
    let moved: Vec<GridFunction> = fs.iter().map(|f| translate(f, t)).collect::<Result<_>>()?;
    let out = if cfg.k == 1 {
        mfm_dyadic(&moved, cfg)?
    } else {
        strong_mfm_dyadic(&moved, cfg)?
    };
    let back: Vec<i64> = t.iter().map(|x| -x).collect();
    translate(&out, &back)
}

/// Grid shifts of the torus in cell units, lexicographic, for dimension `d`.
pub fn all_grid_shifts(dimension: usize, level: u32) -> Vec<Vec<i64>> {
    let side = 1i64 << level;
    let count = (side as usize).pow(dimension as u32);
    (0..count)
        .map(|mut idx| {
            let mut t = vec![0i64; dimension];
            for slot in t.iter_mut().rev() {
                *slot = (idx % side as usize) as i64;
                idx /= side as usize;
            }
            t
        })
        .collect()
}
