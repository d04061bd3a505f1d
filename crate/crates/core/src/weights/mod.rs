//! Weight-class constants as finite suprema over cube families.

mod conditions;
mod report;

pub use conditions::*;
pub use report::{ConditionReport, Constant};

use serde::{Deserialize, Serialize};

use crate::error::{param, shape, Result};
use crate::grid::GridFunction;

/// Weights of a two-weight problem. All present weights are strictly positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSystem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<GridFunction>,
    #[serde(default)]
    pub w: Vec<GridFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<GridFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<GridFunction>,
    /// `w_factors[i][s]` is the factor `w_i^{(s)}` of a product-type `w_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_factors: Option<Vec<Vec<GridFunction>>>,
}

const TENSOR_TOL: f64 = 1e-12;

impl WeightSystem {
    pub fn new(u: GridFunction, w: Vec<GridFunction>) -> Result<Self> {
        let ws = Self {
            u: Some(u),
            w,
            v: None,
            rho: None,
            w_factors: None,
        };
        ws.validate()?;
        Ok(ws)
    }

    /// Product-type system: each `w_i` is the tensor product of its factors.
    pub fn product(u: GridFunction, factors: Vec<Vec<GridFunction>>) -> Result<Self> {
        let w = factors.iter().map(|fs| tensor_all(fs)).collect::<Result<Vec<_>>>()?;
        let ws = Self {
            u: Some(u),
            w,
            v: None,
            rho: None,
            w_factors: Some(factors),
        };
        ws.validate()?;
        Ok(ws)
    }

    pub fn with_v(mut self, v: GridFunction) -> Result<Self> {
        self.v = Some(v);
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: GridFunction) -> Result<Self> {
        self.rho = Some(rho);
        self.validate()?;
        Ok(self)
    }

    pub fn u(&self) -> Result<&GridFunction> {
        self.u.as_ref().ok_or_else(|| param("weight system has no u"))
    }

    pub fn v(&self) -> Result<&GridFunction> {
        self.v.as_ref().ok_or_else(|| param("weight system has no v"))
    }

    pub fn rho(&self) -> Result<&GridFunction> {
        self.rho.as_ref().ok_or_else(|| param("weight system has no rho"))
    }

    pub fn is_product_type(&self) -> bool {
        self.w_factors.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.u.iter().chain(&self.w).chain(&self.v).chain(&self.rho);
        let mut grid: Option<&GridFunction> = None;
        for f in all {
            if !f.is_positive() {
                return Err(param("weights must be strictly positive"));
            }
            match grid {
                None => grid = Some(f),
                Some(g) if !g.same_grid(f) => return Err(shape("weights live on different grids")),
                _ => {}
            }
        }
        if let Some(factors) = &self.w_factors {
            if factors.len() != self.w.len() {
                return Err(shape("one factor list per w_i expected"));
            }
            for (fs, w) in factors.iter().zip(&self.w) {
                if fs.iter().any(|f| !f.is_positive()) {
                    return Err(param("weight factors must be strictly positive"));
                }
                let t = tensor_all(fs)?;
                if !t.same_grid(w) {
                    return Err(shape("factor tensor does not match w_i's grid"));
                }
                let ok = t
                    .values()
                    .iter()
                    .zip(w.values())
                    .all(|(a, b)| (a - b).abs() <= TENSOR_TOL * b.abs());
                if !ok {
                    return Err(param("w_i differs from the tensor of its factors"));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn tensor_all(fs: &[GridFunction]) -> Result<GridFunction> {
    let (first, rest) = fs.split_first().ok_or_else(|| param("empty factor list"))?;
    rest.iter().try_fold(first.clone(), |acc, f| acc.tensor(f))
}
