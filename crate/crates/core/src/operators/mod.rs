//! Multilinear fractional maximal operators, their strong (product-cube)
//! versions, the Fefferman–Stein majorant and the fractional potentials.

mod maximal;
mod potential;

pub use maximal::{
    all_grid_shifts, cube_values, fs_majorant, mfm, mfm_dyadic, mfm_truncated, product_cube_sup,
    shift_conjugated_dyadic, strong_mfm, strong_mfm_dyadic, strong_mfm_truncated, volume_factor,
};
pub use potential::{
    mfi, product_potential, self_cell_integral, strong_mfi, DistanceMode, Quadrature, DEFAULT_COST_CAP,
    DEFAULT_DEPTH,
};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::{CubeFamily, ExponentConfig, GridFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorKind {
    Mfm,
    MfmDyadic,
    MfmTruncated { k_max: i32 },
    Mfi,
    StrongMfm,
    StrongMfmDyadic,
    StrongMfmTruncated { k_max: i32 },
    StrongMfi,
    FsMajorant,
}

impl OperatorKind {
    pub fn is_strong(self) -> bool {
        matches!(
            self,
            Self::StrongMfm | Self::StrongMfmDyadic | Self::StrongMfmTruncated { .. } | Self::StrongMfi | Self::FsMajorant
        )
    }

    pub fn is_potential(self) -> bool {
        matches!(self, Self::Mfi | Self::StrongMfi)
    }
}

/// An operator with its exponents, per-factor cube family and quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub exponents: ExponentConfig,
    pub family: CubeFamily,
    #[serde(default)]
    pub quadrature: Quadrature,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, exponents: ExponentConfig, family: CubeFamily) -> Result<Self> {
        let spec = Self {
            kind,
            exponents,
            family,
            quadrature: Quadrature::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.exponents;
        e.validate()?;
        if self.kind.is_potential() {
            e.require_alpha_positive()?;
        }
        match self.kind {
            OperatorKind::Mfm | OperatorKind::MfmDyadic | OperatorKind::MfmTruncated { .. } | OperatorKind::Mfi
                if e.k != 1 =>
            {
                Err(param("single-cube operators need k = 1"))
            }
            _ => Ok(()),
        }
    }

    /// Number of input functions the operator takes.
    pub fn arity(&self) -> usize {
        if self.kind == OperatorKind::FsMajorant {
            1
        } else {
            self.exponents.m
        }
    }

    pub fn apply(&self, fs: &[GridFunction]) -> Result<GridFunction> {
        self.validate()?;
        let e = &self.exponents;
        match self.kind {
            OperatorKind::Mfm => mfm(fs, e, &self.family),
            OperatorKind::MfmDyadic => mfm_dyadic(fs, e),
            OperatorKind::MfmTruncated { k_max } => mfm_truncated(fs, e, &self.family, k_max),
            OperatorKind::Mfi => mfi(fs, e, &self.quadrature),
            OperatorKind::StrongMfm => strong_mfm(fs, e, &self.family),
            OperatorKind::StrongMfmDyadic => strong_mfm_dyadic(fs, e),
            OperatorKind::StrongMfmTruncated { k_max } => strong_mfm_truncated(fs, e, &self.family, k_max),
            OperatorKind::StrongMfi => strong_mfi(fs, e, &self.quadrature),
            OperatorKind::FsMajorant => {
                let v = fs.first().ok_or_else(|| param("majorant needs one input"))?;
                if fs.len() != 1 {
                    return Err(param("majorant takes exactly one input"));
                }
                fs_majorant(v, e, &self.family)
            }
        }
    }
}
