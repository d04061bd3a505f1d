use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trials::{dual_functions, Trial, TrialContext};
use crate::error::{param, shape, Result};
use crate::grid::{lp_norm, Cube, GridFunction};
use crate::operators::OperatorSpec;
use crate::weights::CubeValues;

/// Trials whose right-hand side falls below this are skipped.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

/// `‖u Op(f)‖_q / Π ‖w_i f_i‖_{p_i}` (or the weak `L^{q,∞}(u^q)` norm on the left).
#[derive(Clone, Debug)]
pub struct NormProblem {
    pub op: OperatorSpec,
    pub q: f64,
    pub weak: bool,
    /// Left multiplier `u` (`None` means 1).
    pub lhs: Option<GridFunction>,
    /// Right multipliers `w_i`.
    pub rhs: Vec<Option<GridFunction>>,
    pub p: Vec<f64>,
    lhs_density: Option<GridFunction>,
    rhs_density: Vec<Option<GridFunction>>,
}

impl NormProblem {
    pub fn new(
        op: OperatorSpec,
        q: f64,
        weak: bool,
        lhs: Option<GridFunction>,
        rhs: Vec<Option<GridFunction>>,
        p: Vec<f64>,
    ) -> Result<Self> {
        if rhs.len() != op.arity() || p.len() != op.arity() {
            return Err(shape("one right-hand weight and exponent per operator slot expected"));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(param(format!("norm exponent q = {q} must be positive")));
        }
        let lhs_density = lhs.as_ref().map(|u| u.powf(q)).transpose()?;
        let rhs_density = rhs
            .iter()
            .zip(&p)
            .map(|(w, &pi)| w.as_ref().map(|w| w.powf(pi)).transpose())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            op,
            q,
            weak,
            lhs,
            rhs,
            p,
            lhs_density,
            rhs_density,
        })
    }

    pub fn lhs_norm(&self, g: &GridFunction) -> Result<f64> {
        if self.weak {
            weighted_weak_norm(g, self.q, self.lhs_density.as_ref())
        } else {
            lp_norm(g, self.q, self.lhs_density.as_ref())
        }
    }

    pub fn rhs_norm(&self, fs: &[GridFunction]) -> Result<f64> {
        let mut prod = 1.0;
        for ((f, &pi), w) in fs.iter().zip(&self.p).zip(&self.rhs_density) {
            prod *= lp_norm(f, pi, w.as_ref())?;
        }
        Ok(prod)
    }

    /// Trial ratio, `None` when the right-hand side is below the floor.
    pub fn ratio(&self, fs: &[GridFunction]) -> Result<Option<f64>> {
        let den = self.rhs_norm(fs)?;
        if !(den >= DENOMINATOR_FLOOR) {
            return Ok(None);
        }
        let g = self.op.apply(fs)?;
        Ok(Some(self.lhs_norm(&g)? / den))
    }
}

/// `sup_λ λ (∫_{|g| > λ} ρ)^{1/q}`, `ρ ≡ 1` when absent.
pub fn weighted_weak_norm(g: &GridFunction, q: f64, rho: Option<&GridFunction>) -> Result<f64> {
    let Some(rho) = rho else {
        return crate::grid::weak_lq_norm(g, q);
    };
    if !rho.same_grid(g) {
        return Err(shape("weak norm density lives on a different grid"));
    }
    let mut cells: Vec<(f64, f64)> = g.values().iter().zip(rho.values()).map(|(v, r)| (v.abs(), *r)).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let vol = g.cell_volume();
    let mut best: f64 = 0.0;
    let mut mass = 0.0;
    let mut i = 0;
    while i < cells.len() && cells[i].0 > 0.0 {
        let v = cells[i].0;
        while i < cells.len() && cells[i].0 == v {
            mass += cells[i].1 * vol;
            i += 1;
        }
        best = best.max(v * mass.powf(1.0 / q));
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubes: Option<Vec<Cube>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: Option<Witness>,
    pub evaluated: usize,
    pub skipped: usize,
}

impl NormEstimate {
    /// Keeps the larger estimate; ties keep `self`.
    pub fn merge(mut self, other: NormEstimate) -> NormEstimate {
        if other.value > self.value {
            self.value = other.value;
            self.witness = other.witness;
        }
        self.evaluated += other.evaluated;
        self.skipped += other.skipped;
        self
    }
}

/// Largest trial ratio; the first maximal trial in order is the witness.
pub fn estimate(problem: &NormProblem, trials: &[Trial]) -> Result<NormEstimate> {
    let ratios: Vec<Option<f64>> = trials
        .par_iter()
        .map(|t| problem.ratio(&t.functions))
        .collect::<Result<_>>()?;
    let mut est = NormEstimate {
        value: 0.0,
        witness: None,
        evaluated: 0,
        skipped: 0,
    };
    for (t, r) in trials.iter().zip(ratios) {
        match r {
            None => est.skipped += 1,
            Some(r) => {
                est.evaluated += 1;
                if est.witness.is_none() || r > est.value {
                    est.value = r;
                    est.witness = Some(Witness {
                        label: t.label.clone(),
                        ratio: r,
                        cubes: t.cubes.clone(),
                    });
                }
            }
        }
    }
    Ok(est)
}

/// Strong-type estimate `N̂` over the trials.
pub fn op_norm_estimate(problem: &NormProblem, trials: &[Trial]) -> Result<NormEstimate> {
    if problem.weak {
        return Err(param("op_norm_estimate needs a strong-type problem"));
    }
    estimate(problem, trials)
}

/// Weak-type estimate over the trials.
pub fn weak_norm_estimate(problem: &NormProblem, trials: &[Trial]) -> Result<NormEstimate> {
    if !problem.weak {
        return Err(param("weak_norm_estimate needs a weak-type problem"));
    }
    estimate(problem, trials)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityRecord {
    /// Largest dual ratio found.
    pub max_ratio: f64,
    pub condition: f64,
    /// `max_ratio / condition`.
    pub kappa: f64,
    pub witness: Option<Witness>,
    pub cubes_tested: usize,
}

/// Dual ratios with `f_i = w_i^{-p_i'} χ_R` over the condition's cubes, best
/// `limit` cubes first (all when `limit` is `None`).
pub fn necessity_lower_bound(
    problem: &NormProblem,
    condition: &CubeValues,
    ctx: &TrialContext,
    limit: Option<usize>,
) -> Result<NecessityRecord> {
    let count = limit.unwrap_or(condition.values.len()).min(condition.values.len());
    let trials = condition
        .top(count)
        .into_iter()
        .map(|flat| {
            let cubes = condition.family.cubes_at(flat);
            Ok(Trial {
                label: format!("necessity-{flat}"),
                functions: dual_functions(ctx, &cubes)?,
                cubes: Some(cubes),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let est = estimate(problem, &trials)?;
    let sup = condition.report()?.value();
    Ok(NecessityRecord {
        max_ratio: est.value,
        condition: sup,
        kappa: est.value / sup,
        witness: est.witness,
        cubes_tested: trials.len(),
    })
}
