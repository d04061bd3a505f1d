use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

const LINE_TOL: f64 = 1e-12;

/// Exponent tuple `(n, m, k, p_1..p_m, q, alpha_1..alpha_k)`.
///
/// `1/p = sum 1/p_i` is derived, never stored. A single `alpha` serves every
/// factor when `k > 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub n: usize,
    pub m: usize,
    #[serde(default = "one")]
    pub k: usize,
    pub p: Vec<f64>,
    pub q: f64,
    pub alpha: Vec<f64>,
}

fn one() -> usize {
    1
}

impl ExponentConfig {
    pub fn new(n: usize, m: usize, p: Vec<f64>, q: f64, alpha: f64) -> Result<Self> {
        let cfg = Self {
            n,
            m,
            k: 1,
            p,
            q,
            alpha: vec![alpha],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn strong(n: usize, m: usize, k: usize, p: Vec<f64>, q: f64, alpha: Vec<f64>) -> Result<Self> {
        let cfg = Self { n, m, k, p, q, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks shared by every operator and condition.
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n) {
            return Err(param(format!("n = {} not in {{1, 2}}", self.n)));
        }
        if self.m == 0 || self.k == 0 {
            return Err(param("m and k must be positive"));
        }
        if self.k * self.n > crate::grid::MAX_DIMENSION {
            return Err(param(format!(
                "k n = {} exceeds the supported ambient dimension",
                self.k * self.n
            )));
        }
        if self.p.len() != self.m {
            return Err(param(format!("expected {} exponents p_i, got {}", self.m, self.p.len())));
        }
        if let Some(p) = self.p.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
            return Err(param(format!("p_i = {p} must satisfy 1 <= p_i < inf")));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(param(format!("q = {} must be positive and finite", self.q)));
        }
        if self.alpha.len() != 1 && self.alpha.len() != self.k {
            return Err(param(format!(
                "expected 1 or {} values of alpha, got {}",
                self.k,
                self.alpha.len()
            )));
        }
        let top = (self.m * self.n) as f64;
        if let Some(a) = self.alpha.iter().find(|a| !(**a >= 0.0 && **a < top)) {
            return Err(param(format!("alpha = {a} must satisfy 0 <= alpha < mn = {top}")));
        }
        Ok(())
    }

    /// Derived `p` with `1/p = sum 1/p_i`.
    pub fn p_total(&self) -> f64 {
        1.0 / self.inv_p()
    }

    pub fn inv_p(&self) -> f64 {
        self.p.iter().map(|p| 1.0 / p).sum()
    }

    /// Conjugate exponent `p_i'` (`inf` when `p_i = 1`).
    pub fn conjugate(&self, i: usize) -> f64 {
        conjugate(self.p[i])
    }

    /// `alpha_s` for factor `s` (the single value when only one is given).
    pub fn alpha(&self, s: usize) -> f64 {
        if self.alpha.len() == 1 {
            self.alpha[0]
        } else {
            self.alpha[s]
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        (0..self.k).map(|s| self.alpha(s)).collect()
    }

    /// `e = alpha/n + 1/q - 1/p` for factor `s`.
    pub fn scaling_exponent(&self, s: usize) -> f64 {
        self.alpha(s) / self.n as f64 + 1.0 / self.q - self.inv_p()
    }

    pub fn with_q(&self, q: f64) -> Self {
        Self { q, ..self.clone() }
    }

    pub fn with_alpha(&self, alpha: Vec<f64>) -> Self {
        Self { alpha, ..self.clone() }
    }

    pub fn require_open_p(&self) -> Result<()> {
        match self.p.iter().find(|&&p| p <= 1.0) {
            Some(p) => Err(param(format!("requires 1 < p_i < inf, got p_i = {p}"))),
            None => Ok(()),
        }
    }

    pub fn require_p_lt_q(&self) -> Result<()> {
        let p = self.p_total();
        if p < self.q {
            Ok(())
        } else {
            Err(param(format!("requires p < q < inf, got p = {p}, q = {}", self.q)))
        }
    }

    pub fn require_p_le_q(&self) -> Result<()> {
        let p = self.p_total();
        if p <= self.q * (1.0 + LINE_TOL) {
            Ok(())
        } else {
            Err(param(format!("requires p <= q, got p = {p}, q = {}", self.q)))
        }
    }

    pub fn require_p_above_inverse_m(&self) -> Result<()> {
        let p = self.p_total();
        if p > 1.0 / self.m as f64 {
            Ok(())
        } else {
            Err(param(format!("requires 1/m < p, got p = {p}")))
        }
    }

    pub fn require_alpha_positive(&self) -> Result<()> {
        if self.alpha.iter().all(|&a| a > 0.0) {
            Ok(())
        } else {
            Err(param("requires 0 < alpha"))
        }
    }

    pub fn require_alpha_zero(&self) -> Result<()> {
        if self.alpha.iter().all(|&a| a == 0.0) {
            Ok(())
        } else {
            Err(param("requires alpha = 0"))
        }
    }

    /// `1/q = 1/p - alpha/n` for every factor.
    pub fn require_sobolev_line(&self) -> Result<()> {
        for s in 0..self.k {
            let gap = 1.0 / self.q - (self.inv_p() - self.alpha(s) / self.n as f64);
            if gap.abs() > LINE_TOL {
                return Err(param(format!(
                    "requires 1/q = 1/p - alpha/n, off by {gap:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn require_alpha_below_n_over_p(&self) -> Result<()> {
        if self.alphas().iter().all(|&a| a < self.n as f64 / self.p_total()) {
            Ok(())
        } else {
            Err(param("requires alpha < n/p"))
        }
    }
}

pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_p_and_conjugates() {
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.5).unwrap();
        assert_eq!(cfg.p_total(), 1.0);
        assert_eq!(cfg.conjugate(0), 2.0);
        assert_eq!(cfg.scaling_exponent(0), 0.0);
        assert_eq!(conjugate(1.0), f64::INFINITY);
    }

    #[test]
    fn validators() {
        assert!(ExponentConfig::new(1, 2, vec![2.0], 2.0, 0.5).is_err());
        assert!(ExponentConfig::new(1, 1, vec![2.0], 2.0, 1.0).is_err());
        assert!(ExponentConfig::new(3, 1, vec![2.0], 2.0, 0.5).is_err());
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 0.9, 0.5).unwrap();
        assert!(cfg.require_p_lt_q().is_err());
        let cfg = ExponentConfig::new(1, 2, vec![4.0, 4.0], 4.0, 0.25).unwrap();
        assert!(cfg.require_sobolev_line().is_ok());
        assert!(cfg.require_p_lt_q().is_ok());
        assert!(ExponentConfig::new(1, 1, vec![1.0], 2.0, 0.0).unwrap().require_open_p().is_err());
    }
}
