//! Experiment configuration files and named weight generators.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::{io, CubeFamily, ExponentConfig, FamilyKind, GridFunction};
use crate::operators::{OperatorKind, OperatorSpec, Quadrature};
use crate::verify::{Generator, Scenario, SuiteId, TestFunctionFamily, VerifyOptions};
use crate::weights::{BumpVariant, WeightSystem};

/// Sub-cell samples per axis when averaging a power weight over a cell.
const POWER_SAMPLES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Factor dimension.
    pub n: usize,
    pub level: u32,
}

/// Exponents without the dimension, which comes from [`GridSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSpec {
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

fn unit() -> f64 {
    1.0
}

/// A weight (or input) on the grid, by name or by file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSource {
    Constant {
        #[serde(default = "unit")]
        value: f64,
    },
    /// Equal pieces along `axis`; the piece count must divide the grid side.
    Step {
        values: Vec<f64>,
        #[serde(default)]
        axis: usize,
    },
    /// `low · range^U` per cell with `U` uniform on `[0, 1)`.
    LogUniform {
        seed: u64,
        range: f64,
        #[serde(default = "unit")]
        low: f64,
    },
    /// Cell averages of `|x - center|^gamma`.
    Power { center: Vec<f64>, gamma: f64 },
    /// Tensor product of equal-dimension factors, first factor outermost.
    Tensor { factors: Vec<WeightSource> },
    /// Grid function file (JSON, or CSV by extension), relative to the config.
    File { path: PathBuf },
}

impl WeightSource {
    pub fn materialize(&self, dimension: usize, level: u32, base: &Path) -> Result<GridFunction> {
        let f = match self {
            WeightSource::Constant { value } => GridFunction::constant(dimension, level, *value)?,
            WeightSource::Step { values, axis } => {
                let side = 1usize << level;
                if values.is_empty() || side % values.len() != 0 || *axis >= dimension {
                    return Err(param(format!(
                        "step needs a piece count dividing {side} and axis < {dimension}"
                    )));
                }
                let width = side / values.len();
                GridFunction::from_cells(dimension, level, |c| values[c[*axis] / width])?
            }
            WeightSource::LogUniform { seed, range, low } => {
                if !(*range >= 1.0 && range.is_finite() && *low > 0.0) {
                    return Err(param("log-uniform needs range >= 1 and low > 0"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let count = (1usize << level).pow(dimension as u32);
                let lr = range.ln();
                let vals = (0..count).map(|_| low * (rng.gen::<f64>() * lr).exp()).collect();
                GridFunction::new(dimension, level, vals)?
            }
            WeightSource::Power { center, gamma } => power_weight(center, *gamma, dimension, level)?,
            WeightSource::Tensor { factors } => {
                if factors.is_empty() || dimension % factors.len() != 0 {
                    return Err(param(format!(
                        "{} tensor factors do not split dimension {dimension}",
                        factors.len()
                    )));
                }
                let d = dimension / factors.len();
                let mut acc = factors[0].materialize(d, level, base)?;
                for f in &factors[1..] {
                    acc = acc.tensor(&f.materialize(d, level, base)?)?;
                }
                acc
            }
            WeightSource::File { path } => {
                let f = io::read(&base.join(path))?;
                if f.dimension() != dimension || f.level() != level {
                    return Err(Error::Config(format!(
                        "{} holds a level-{} grid in dimension {}, expected level {level} in dimension {dimension}",
                        path.display(),
                        f.level(),
                        f.dimension()
                    )));
                }
                f
            }
        };
        Ok(f)
    }
}

fn power_weight(center: &[f64], gamma: f64, dimension: usize, level: u32) -> Result<GridFunction> {
    if center.len() != dimension || !gamma.is_finite() {
        return Err(param("power weight needs a center of the grid dimension and finite gamma"));
    }
    let side = (1usize << level) as f64;
    let s = POWER_SAMPLES;
    let per_cell = s.pow(dimension as u32);
    let f = GridFunction::from_cells(dimension, level, |c| {
        let mut total = 0.0;
        for j in 0..per_cell {
            let mut rest = j;
            let mut r2 = 0.0;
            for (axis, &ci) in c.iter().enumerate() {
                let sub = rest % s;
                rest /= s;
                let x = (ci as f64 + (sub as f64 + 0.5) / s as f64) / side;
                r2 += (x - center[axis]).powi(2);
            }
            total += r2.sqrt().powf(gamma);
        }
        total / per_cell as f64
    })?;
    if f.values().iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(param(format!("gamma = {gamma} gives a nonpositive or infinite cell average")));
    }
    Ok(f)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSources {
    #[serde(default)]
    pub u: Option<WeightSource>,
    #[serde(default)]
    pub w: Vec<WeightSource>,
    #[serde(default)]
    pub v: Option<WeightSource>,
    #[serde(default)]
    pub rho: Option<WeightSource>,
    /// `w_factors[i][s]`, each on the factor grid; replaces `w`.
    #[serde(default)]
    pub w_factors: Option<Vec<Vec<WeightSource>>>,
}

/// Which condition `check-class` evaluates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConditionKind {
    /// Scalar `A_p` of the first `w`.
    Ap { p: f64 },
    ApVector,
    ApqVector,
    /// A∞ surrogate of the first `w`.
    Ainf {
        #[serde(default)]
        threshold: Option<f64>,
    },
    /// Reverse doubling of the first `w`.
    Rd {
        #[serde(default = "yes")]
        dyadic: bool,
    },
    PowerBump { r: f64, variant: BumpVariant },
    TwoWeight,
    StrongTwoWeight,
    Trace,
    StrongOneWeight,
    Inclusion,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialBudget {
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub mixed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Operator output grid for `eval`.
    #[serde(default)]
    pub grid_path: Option<PathBuf>,
}

/// One experiment; every command reads the sections it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub grid: GridSpec,
    #[serde(default)]
    pub exponents: Option<ExponentSpec>,
    #[serde(default)]
    pub operator: Option<OperatorKind>,
    #[serde(default)]
    pub suite: Option<SuiteId>,
    #[serde(default)]
    pub condition: Option<ConditionKind>,
    #[serde(default)]
    pub weights: WeightSources,
    /// Operator inputs for `eval`.
    #[serde(default)]
    pub inputs: Vec<WeightSource>,
    /// Cube family; defaults to grid-aligned for `n = 1`, one-third shifts for `n = 2`.
    #[serde(default)]
    pub family: Option<FamilyKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trials: Option<TrialBudget>,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub output: OutputSpec,
    /// Source written by `gen-weight`.
    #[serde(default)]
    pub generator: Option<WeightSource>,
    #[serde(default)]
    pub verify: VerifyOptions,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Schema checks that need no computation.
    pub fn check(&self) -> Result<()> {
        if !(1..=2).contains(&self.grid.n) {
            return Err(Error::Config(format!("grid.n = {} not in {{1, 2}}", self.grid.n)));
        }
        if self.grid.level > 12 {
            return Err(Error::Config(format!("grid.level = {} is above 12", self.grid.level)));
        }
        if let Some(e) = &self.exponents {
            self.to_exponents(e).map_err(|err| Error::Config(err.to_string()))?;
        }
        Ok(())
    }

    fn to_exponents(&self, e: &ExponentSpec) -> Result<ExponentConfig> {
        ExponentConfig::strong(self.grid.n, e.m, e.k, e.p.clone(), e.q, e.alpha.clone())
    }

    pub fn exponent_config(&self) -> Result<ExponentConfig> {
        let e = self
            .exponents
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'exponents' section".into()))?;
        self.to_exponents(e)
    }

    pub fn k(&self) -> usize {
        self.exponents.as_ref().map_or(1, |e| e.k)
    }

    pub fn ambient_dimension(&self) -> usize {
        self.k() * self.grid.n
    }

    pub fn cube_family(&self) -> Result<CubeFamily> {
        match &self.family {
            Some(kind) => CubeFamily::from_kind(kind, self.grid.n, self.grid.level),
            None => CubeFamily::default_for(self.grid.n, self.grid.level),
        }
    }

    pub fn operator_spec(&self) -> Result<OperatorSpec> {
        let kind = self
            .operator
            .ok_or_else(|| Error::Config("missing 'operator' section".into()))?;
        Ok(OperatorSpec::new(kind, self.exponent_config()?, self.cube_family()?)?.with_quadrature(self.quadrature.clone()))
    }

    pub fn trial_family(&self) -> TestFunctionFamily {
        match &self.trials {
            Some(b) => TestFunctionFamily {
                generators: b.generators.clone(),
                seed: self.seed,
                mixed: b.mixed,
            },
            None => TestFunctionFamily::standard(self.seed),
        }
    }

    fn ambient(&self, src: &WeightSource, base: &Path) -> Result<GridFunction> {
        src.materialize(self.ambient_dimension(), self.grid.level, base)
    }

    pub fn inputs(&self, base: &Path) -> Result<Vec<GridFunction>> {
        self.inputs.iter().map(|s| self.ambient(s, base)).collect()
    }

    /// Weights on the ambient grid; `w_factors` wins over `w` when present.
    pub fn weight_system(&self, base: &Path) -> Result<WeightSystem> {
        let ws = &self.weights;
        let opt = |s: &Option<WeightSource>| s.as_ref().map(|s| self.ambient(s, base)).transpose();
        let (w, w_factors) = match &ws.w_factors {
            Some(factors) => {
                let mats = factors
                    .iter()
                    .map(|fs| {
                        fs.iter()
                            .map(|s| s.materialize(self.grid.n, self.grid.level, base))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let w = mats
                    .iter()
                    .map(|fs| {
                        let mut acc = fs.first().ok_or_else(|| param("empty factor list"))?.clone();
                        for f in &fs[1..] {
                            acc = acc.tensor(f)?;
                        }
                        Ok(acc)
                    })
                    .collect::<Result<Vec<_>>>()?;
                (w, Some(mats))
            }
            None => (ws.w.iter().map(|s| self.ambient(s, base)).collect::<Result<_>>()?, None),
        };
        let system = WeightSystem {
            u: opt(&ws.u)?,
            w,
            v: opt(&ws.v)?,
            rho: opt(&ws.rho)?,
            w_factors,
        };
        system.validate()?;
        Ok(system)
    }

    pub fn scenario(&self, base: &Path) -> Result<Scenario> {
        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "unnamed".into()),
            exponents: self.exponent_config()?,
            family: self.cube_family()?,
            weights: self.weight_system(base)?,
            quadrature: self.quadrature.clone(),
        })
    }

    pub fn suite_id(&self) -> Result<SuiteId> {
        self.suite.ok_or_else(|| Error::Config("missing 'suite'".into()))
    }
}
