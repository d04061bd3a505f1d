use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::{conjugate, Cube, CubeFamily, FamilyKind, GridFunction, ProductFamily};

fn dyadic_kind() -> FamilyKind {
    FamilyKind::Dyadic
}

/// One source of trial functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    /// `f_i = χ_R` for every product cube `R` of the family.
    CubeIndicators {
        #[serde(default = "dyadic_kind")]
        family: FamilyKind,
    },
    /// `f_i = w_i^{-p_i'} χ_R` at the `top` best condition cubes and `random` random ones.
    ExtremalDual { top: usize, random: usize },
    /// Cellwise log-uniform values in `[1, range]`, half of them cut to a random cube.
    RandomLogUniformSteps { count: usize, range: f64 },
}

/// Seeded description of the trial tuples fed to a norm estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionFamily {
    pub generators: Vec<Generator>,
    pub seed: u64,
    /// Tuples whose slots are drawn independently from everything generated.
    #[serde(default)]
    pub mixed: usize,
}

impl TestFunctionFamily {
    /// Dyadic indicators, duals at 16 top and 16 random cubes, 256 random tuples, 64 mixed.
    pub fn standard(seed: u64) -> Self {
        Self {
            generators: vec![
                Generator::CubeIndicators {
                    family: FamilyKind::Dyadic,
                },
                Generator::ExtremalDual { top: 16, random: 16 },
                Generator::RandomLogUniformSteps {
                    count: 256,
                    range: 1e3,
                },
            ],
            seed,
            mixed: 64,
        }
    }

    pub fn generate(&self, ctx: &TrialContext) -> Result<Vec<Trial>> {
        ctx.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut trials = Vec::new();
        for g in &self.generators {
            match g {
                Generator::CubeIndicators { family } => {
                    let pf = ctx.product_family(family)?;
                    for flat in 0..pf.len() {
                        let cubes = pf.cubes_at(flat);
                        let chi = product_indicator(ctx, &cubes)?;
                        trials.push(Trial {
                            label: format!("indicator-{flat}"),
                            functions: vec![chi; ctx.arity],
                            cubes: Some(cubes),
                        });
                    }
                }
                Generator::ExtremalDual { top, random } => {
                    for (j, cubes) in ctx.extremal.iter().take(*top).enumerate() {
                        trials.push(Trial {
                            label: format!("dual-top-{j}"),
                            functions: dual_functions(ctx, cubes)?,
                            cubes: Some(cubes.clone()),
                        });
                    }
                    let pf = ctx.product_family(&FamilyKind::Dyadic)?;
                    for j in 0..*random {
                        let cubes = pf.cubes_at(rng.gen_range(0..pf.len()));
                        trials.push(Trial {
                            label: format!("dual-random-{j}"),
                            functions: dual_functions(ctx, &cubes)?,
                            cubes: Some(cubes),
                        });
                    }
                }
                Generator::RandomLogUniformSteps { count, range } => {
                    if !(*range >= 1.0 && range.is_finite()) {
                        return Err(param(format!("dynamic range {range} must be finite and >= 1")));
                    }
                    let pf = ctx.product_family(&FamilyKind::Dyadic)?;
                    let log_range = range.ln();
                    for j in 0..*count {
                        let functions = (0..ctx.arity)
                            .map(|_| {
                                let mut vals: Vec<f64> = (0..ctx.cells())
                                    .map(|_| (rng.gen::<f64>() * log_range).exp())
                                    .collect();
                                if rng.gen_bool(0.5) {
                                    let cubes = pf.cubes_at(rng.gen_range(0..pf.len()));
                                    let chi = product_indicator(ctx, &cubes)?;
                                    vals.iter_mut().zip(chi.values()).for_each(|(v, c)| *v *= c);
                                }
                                GridFunction::new(ctx.dimension(), ctx.level, vals)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        trials.push(Trial {
                            label: format!("random-{j}"),
                            functions,
                            cubes: None,
                        });
                    }
                }
            }
        }
        if self.mixed > 0 && !trials.is_empty() {
            let pool = trials.len();
            for j in 0..self.mixed {
                let functions = (0..ctx.arity)
                    .map(|i| trials[rng.gen_range(0..pool)].functions[i].clone())
                    .collect();
                trials.push(Trial {
                    label: format!("mixed-{j}"),
                    functions,
                    cubes: None,
                });
            }
        }
        Ok(trials)
    }
}

/// What the generators need to know about the problem.
#[derive(Clone, Debug)]
pub struct TrialContext {
    /// Factor dimension.
    pub n: usize,
    /// Number of factors; the ambient dimension is `k n`.
    pub k: usize,
    pub level: u32,
    pub arity: usize,
    pub p: Vec<f64>,
    /// Right-hand multipliers `w_i` (`None` means 1).
    pub rhs: Vec<Option<GridFunction>>,
    /// Condition cubes ranked best first.
    pub extremal: Vec<Vec<Cube>>,
}

impl TrialContext {
    fn check(&self) -> Result<()> {
        if self.p.len() != self.arity || self.rhs.len() != self.arity {
            return Err(param("trial context needs one p_i and one weight slot per input"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.k * self.n
    }

    fn cells(&self) -> usize {
        (1usize << self.level).pow(self.dimension() as u32)
    }

    fn product_family(&self, kind: &FamilyKind) -> Result<ProductFamily> {
        ProductFamily::power(&CubeFamily::from_kind(kind, self.n, self.level)?, self.k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub label: String,
    pub functions: Vec<GridFunction>,
    /// The product cube behind an indicator or dual trial.
    pub cubes: Option<Vec<Cube>>,
}

/// `χ_{Q_1 x ... x Q_k}` on the ambient grid.
pub fn product_indicator(ctx: &TrialContext, cubes: &[Cube]) -> Result<GridFunction> {
    let n = ctx.n;
    let level = ctx.level;
    let at: Vec<Cube> = cubes.iter().map(|c| c.at_level(level)).collect::<Result<_>>()?;
    GridFunction::from_cells(ctx.dimension(), level, |c| {
        let inside = at
            .iter()
            .enumerate()
            .all(|(s, q)| q.contains_cell(&c[s * n..(s + 1) * n]));
        if inside {
            1.0
        } else {
            0.0
        }
    })
}

/// Extremal duals `f_i = w_i^{-p_i'} χ_R`; for `p_i = 1` the indicator of
/// the first cell of `R` where `w_i` is smallest.
pub fn dual_functions(ctx: &TrialContext, cubes: &[Cube]) -> Result<Vec<GridFunction>> {
    let chi = product_indicator(ctx, cubes)?;
    (0..ctx.arity)
        .map(|i| {
            let Some(w) = &ctx.rhs[i] else {
                return Ok(chi.clone());
            };
            if ctx.p[i] == 1.0 {
                let mut best: Option<usize> = None;
                for (j, (&c, &wv)) in chi.values().iter().zip(w.values()).enumerate() {
                    if c > 0.0 && best.is_none_or(|b| wv < w.values()[b]) {
                        best = Some(j);
                    }
                }
                let b = best.ok_or_else(|| param("empty cube in dual construction"))?;
                let mut vals = vec![0.0; chi.len()];
                vals[b] = 1.0;
                return GridFunction::new(chi.dimension(), chi.level(), vals);
            }
            let pc = conjugate(ctx.p[i]);
            w.powf(-pc)?.mul(&chi)
        })
        .collect()
}
