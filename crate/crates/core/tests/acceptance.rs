//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Measured constants live in `tests/data/baselines.json`. Missing keys are
//! recorded on first run; `MFRAC_RECORD_BASELINES=1` re-records all of them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mfrac_core::config::ExperimentConfig;
use mfrac_core::grid::{average, integrate, lp_norm, Cube, CubeFamily, DyadicCube, ExponentConfig, GridFunction};
use mfrac_core::operators::{mfi, mfm, strong_mfi, strong_mfm, Quadrature};
use mfrac_core::verify::{
    blowup_scan, carleson_check, fefferman_stein_problem, pointwise_domination, run_suite, shift_average_constant,
    strong_pointwise_domination, CarlesonCoefficients, Scenario, TestFunctionFamily, VerifyOptions,
};
use mfrac_core::weights::{
    ainf_surrogate, ap_constant, ap_vector_constant, apq_vector_constant, power_bump_constant, rd_constant,
    strong_one_weight_constant, strong_twc_constant, trace_constant, twc_values, BumpVariant, WeightSystem,
};
use mfrac_core::{canonical_json, Result};

const TOL: f64 = 0.10;

struct Baselines {
    path: PathBuf,
    values: BTreeMap<String, f64>,
    record_all: bool,
    dirty: bool,
}

impl Baselines {
    fn load() -> Self {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/baselines.json");
        let values = std::fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default();
        Self {
            path,
            values,
            record_all: std::env::var("MFRAC_RECORD_BASELINES").is_ok_and(|v| v == "1"),
            dirty: false,
        }
    }

    /// Stored value for `key`, recording `measured` when absent.
    fn get(&mut self, key: &str, measured: f64) -> (f64, bool) {
        if self.record_all || !self.values.contains_key(key) {
            self.values.insert(key.to_owned(), measured);
            self.dirty = true;
            return (measured, true);
        }
        (self.values[key], false)
    }

    fn save(&self) {
        if self.dirty {
            let text = canonical_json(&self.values).expect("baselines serialize");
            std::fs::write(&self.path, text).expect("write baselines");
        }
    }
}

fn within(x: f64, base: f64) -> bool {
    (x / base - 1.0).abs() <= TOL
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_fn(r: &mut ChaCha8Rng, dimension: usize, level: u32, range: f64) -> GridFunction {
    let count = (1usize << level).pow(dimension as u32);
    let vals = (0..count).map(|_| (r.gen::<f64>() * range.ln()).exp()).collect();
    GridFunction::new(dimension, level, vals).unwrap()
}

/// Smooth periodic positive function `exp(sum a cos(2 pi k.x + phi))` with
/// frequencies at most 1 per axis, so that it is resolved on coarse grids.
#[derive(Clone)]
struct Smooth {
    dimension: usize,
    modes: Vec<(f64, [f64; 2], f64)>,
}

impl Smooth {
    fn new(r: &mut ChaCha8Rng, dimension: usize) -> Self {
        let modes = (0..4)
            .map(|_| {
                let k0 = r.gen_range(0..2) as f64;
                let k1 = if dimension == 2 { r.gen_range(0..2) as f64 } else { 0.0 };
                (r.gen_range(-0.4..0.4), [k0, k1], r.gen::<f64>() * std::f64::consts::TAU)
            })
            .collect();
        Self { dimension, modes }
    }

    fn sample(&self, level: u32) -> GridFunction {
        let side = 1usize << level;
        let h = 1.0 / side as f64;
        let vals = (0..side.pow(self.dimension as u32))
            .map(|i| {
                let x = [((i % side) as f64 + 0.5) * h, ((i / side) as f64 + 0.5) * h];
                self.modes
                    .iter()
                    .map(|(a, k, ph)| a * (std::f64::consts::TAU * (k[0] * x[0] + k[1] * x[1]) + ph).cos())
                    .sum::<f64>()
                    .exp()
            })
            .collect();
        GridFunction::new(self.dimension, level, vals).unwrap()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

type Outcome = std::result::Result<String, String>;

fn c1_exact_calculus() -> Outcome {
    let start = Instant::now();
    let level = 6;
    let n = 1usize << level;
    let mut worst: f64 = 0.0;
    let mut exact_children = true;
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let vals: Vec<f64> = (0..n).map(|_| r.gen::<f64>() * 20.0 - 10.0).collect();
        let f = GridFunction::new(1, level, vals.clone()).unwrap();
        let rho = random_fn(&mut r, 1, level, 100.0);
        let h = 1.0 / n as f64;
        let a = r.gen_range(0..n);
        let b = r.gen_range(a + 1..=n);
        let q = Cube::interval(a, b, level).unwrap();
        let brute: f64 = vals[a..b].iter().sum::<f64>() * h;
        worst = worst.max(rel(integrate(&f, &q).unwrap(), brute));
        worst = worst.max(rel(average(&f, &q).unwrap(), brute / ((b - a) as f64 * h)));
        for p in [1.0, 1.5, 2.0, 3.7] {
            let bn: f64 = vals.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h;
            worst = worst.max(rel(lp_norm(&f, p, None).unwrap(), bn.powf(1.0 / p)));
            let bw: f64 = vals.iter().zip(rho.values()).map(|(v, w)| v.abs().powf(p) * w).sum::<f64>() * h;
            worst = worst.max(rel(lp_norm(&f, p, Some(&rho)).unwrap(), bw.powf(1.0 / p)));
        }
        for l in 0..level {
            let j = r.gen_range(0..(1u64 << l));
            let d = DyadicCube::new(l, vec![j]).unwrap();
            let kids: f64 = d.children().iter().map(|c| integrate(&f, c).unwrap()).sum();
            exact_children &= integrate(&f, &d).unwrap() == kids;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("max relative error {worst:.2e}, child sums exact: {exact_children}, {secs:.2} s");
    if worst <= 1e-12 && exact_children && secs < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn riesz_error(level: u32) -> f64 {
    let cfg = ExponentConfig::new(1, 1, vec![2.0], 2.0, 0.5).unwrap();
    let f = GridFunction::constant(1, level, 1.0).unwrap();
    let g = mfi(&[f], &cfg, &Quadrature::euclidean()).unwrap();
    let n = g.len() as f64;
    g.values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = (i as f64 + 0.5) / n;
            rel(*v, 2.0 * (x.sqrt() + (1.0 - x).sqrt()))
        })
        .fold(0.0, f64::max)
}

fn c2_riesz() -> Outcome {
    let (e8, e10) = (riesz_error(8), riesz_error(10));
    let msg = format!("max relative error {:.3}% at L=8, {:.3}% at L=10", e8 * 100.0, e10 * 100.0);
    if e8 <= 0.02 && e10 <= 0.005 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_pointwise() -> Outcome {
    let quad = Quadrature::default();
    let alphas = [0.25, 0.5, 1.0];
    let mut min_c = f64::INFINITY;
    let mut worst_change: f64 = 0.0;
    for seed in 0..50u64 {
        let mut r = rng(1000 + seed);
        let alpha = alphas[seed as usize % 3];
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, alpha).unwrap();
        let inputs = [Smooth::new(&mut r, 1), Smooth::new(&mut r, 1)];
        let at = |level: u32| {
            let fs: Vec<GridFunction> = inputs.iter().map(|f| f.sample(level)).collect();
            let fam = CubeFamily::grid_aligned(1, level).unwrap();
            pointwise_domination(&fs, &cfg, &fam, &quad).unwrap()
        };
        let (c5, c6) = (at(5), at(6));
        min_c = min_c.min(c5).min(c6);
        worst_change = worst_change.max(rel(c6, c5));
    }
    let mut strong_min = f64::INFINITY;
    let mut strong_change: f64 = 0.0;
    for seed in 0..50u64 {
        let mut r = rng(2000 + seed);
        let alpha = alphas[seed as usize % 3];
        let cfg = ExponentConfig::strong(1, 2, 2, vec![2.0, 2.0], 2.0, vec![alpha, alpha]).unwrap();
        let inputs = [Smooth::new(&mut r, 2), Smooth::new(&mut r, 2)];
        let at = |level: u32| {
            let fs: Vec<GridFunction> = inputs.iter().map(|f| f.sample(level)).collect();
            let fam = CubeFamily::grid_aligned(1, level).unwrap();
            strong_pointwise_domination(&fs, &cfg, &fam, &quad).unwrap()
        };
        let (c3, c4) = (at(3), at(4));
        strong_min = strong_min.min(c3).min(c4);
        strong_change = strong_change.max(rel(c4, c3));
    }
    let msg = format!(
        "min I/M {min_c:.4}, largest L5->L6 change {:.2}%; strong min {strong_min:.4}, largest L3->L4 change {:.2}%",
        worst_change * 100.0,
        strong_change * 100.0
    );
    if min_c > 0.0 && strong_min > 0.0 && worst_change <= TOL && strong_change <= TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_trivial_constants() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut note = |v: f64, target: f64| {
        worst = worst.max((v - target).abs());
        count += 1;
    };
    for n in [1usize, 2] {
        let level = if n == 1 { 5 } else { 3 };
        let one = GridFunction::constant(n, level, 1.0).unwrap();
        let two = GridFunction::constant(n, level, 3.5).unwrap();
        let families = [CubeFamily::dyadic(n, level).unwrap(), CubeFamily::default_for(n, level).unwrap()];
        for fam in &families {
            for p in [1.0, 1.5, 2.0, 4.0] {
                note(ap_constant(&two, p, fam).unwrap().value(), 1.0);
            }
            let p = vec![2.0, 3.0];
            note(ap_vector_constant(&[one.clone(), two.clone()], &p, fam).unwrap().value(), 1.0);
            note(apq_vector_constant(&[one.clone(), two.clone()], &p, 4.0, fam).unwrap().value(), 1.0);
            note(ainf_surrogate(&two, fam, 1e3).unwrap().report.value(), 1.0);
            // alpha/n + 1/q - 1/p = 0 with 1/p = 1
            let cfg = ExponentConfig::new(n, 2, vec![2.0, 2.0], 2.0, 0.5 * n as f64).unwrap();
            note(twc_values(&one, &[one.clone(), one.clone()], &cfg, fam).unwrap().report().unwrap().value(), 1.0);
            for variant in [BumpVariant::One, BumpVariant::Two, BumpVariant::TwoInverseQ] {
                for r in [1.01, 2.0] {
                    let b = power_bump_constant(&one, &[one.clone(), one.clone()], &cfg, r, variant, fam).unwrap();
                    note(b.value(), 1.0);
                }
            }
            // q (alpha/n - 1/p) + 1 = 0
            let tc = ExponentConfig::new(n, 1, vec![2.0], 4.0, 0.25 * n as f64).unwrap();
            note(trace_constant(&one, &tc, fam).unwrap().value(), 1.0);
        }
        for dyadic in [true, false] {
            note(rd_constant(&two, dyadic).unwrap().value(), 2f64.powi(n as i32));
        }
    }
    let level = 3;
    let one2 = GridFunction::constant(2, level, 1.0).unwrap();
    let fam = CubeFamily::grid_aligned(1, level).unwrap();
    let ws = WeightSystem::new(one2.clone(), vec![one2.clone(), one2.clone()]).unwrap();
    // alpha_s/n = 1/p - 1/q: strong two-weight and one-weight conditions are scale free
    let cfg = ExponentConfig::strong(1, 2, 2, vec![2.0, 2.0], 2.0, vec![0.5, 0.5]).unwrap();
    note(strong_twc_constant(&ws, &cfg, &fam).unwrap().value(), 1.0);
    note(strong_one_weight_constant(&ws, &cfg, &fam).unwrap().value(), 1.0);
    let tc = ExponentConfig::strong(1, 1, 2, vec![2.0], 4.0, vec![0.25, 0.25]).unwrap();
    note(trace_constant(&one2, &tc, &fam).unwrap().value(), 1.0);
    let msg = format!("{count} constants, max deviation {worst:.2e}");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_blowup() -> Outcome {
    // e = alpha + 1/q - 1/p = 0.25 + 0.5 - 1
    let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.25).unwrap();
    let pts = blowup_scan(&cfg, &[3, 4, 5, 6, 7], &TestFunctionFamily::standard(5), &VerifyOptions::default())
        .map_err(|e| e.to_string())?;
    let formula_ok = pts.iter().all(|p| rel(p.condition, p.formula) <= 1e-12);
    let increasing = pts
        .windows(2)
        .all(|w| w[1].condition > w[0].condition && w[1].estimated_norm > w[0].estimated_norm);
    let kappa = pts[0].estimated_norm / pts[0].condition;
    let sandwich = kappa > 0.0
        && pts
            .iter()
            .all(|p| p.estimated_norm >= (1.0 - TOL) * kappa * p.condition);
    let spread: Vec<String> = pts
        .iter()
        .map(|p| format!("L{}: twc {:.4} N {:.4}", p.level, p.condition, p.estimated_norm))
        .collect();
    let msg = format!("kappa(L=3) = {kappa:.4}; {}", spread.join(", "));
    if formula_ok && increasing && sandwich {
        Ok(msg)
    } else {
        Err(format!("formula {formula_ok}, increasing {increasing}, sandwich {sandwich}; {msg}"))
    }
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

const SANDWICH: [&str; 12] = [
    "two-weight-trivial",
    "two-weight-power-u",
    "two-weight-log-uniform",
    "two-weight-step-w",
    "strong-trace-k1-power",
    "strong-trace-k1-log-uniform",
    "strong-trace-k2-tensor-power",
    "strong-trace-k2-log-uniform",
    "strong-two-weight-trivial",
    "strong-two-weight-log-uniform-factors",
    "strong-two-weight-step-factors",
    "strong-two-weight-power-factors",
];

fn load_scenario(name: &str) -> Result<(ExperimentConfig, Scenario)> {
    let dir = scenario_dir();
    let cfg = ExperimentConfig::load(&dir.join(format!("{name}.json")))?;
    let scen = cfg.scenario(&dir)?;
    Ok((cfg, scen))
}

fn c6_sandwich(base: &mut Baselines) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in SANDWICH {
        let start = Instant::now();
        let (cfg, scen) = load_scenario(name).map_err(|e| e.to_string())?;
        if scen.level() != 4 || scen.exponents.n != 1 {
            return Err(format!("{name} is not an L=4, n=1 scenario"));
        }
        let res = run_suite(cfg.suite_id().unwrap(), &scen, &cfg.trial_family(), &cfg.verify).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let kappa = res.constants.kappa.unwrap_or(0.0);
        let (b, recorded) = base.get(&format!("c6.kappa.{name}"), kappa);
        let good = kappa > 0.0 && within(kappa, b) && secs < 60.0;
        ok &= good;
        lines.push(format!(
            "{name} kappa {kappa:.4} (baseline {b:.4}{}) {secs:.1} s",
            if recorded { ", recorded" } else { "" }
        ));
    }
    let msg = lines.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_carleson(base: &mut Baselines) -> Outcome {
    let level = 10;
    let rho = GridFunction::constant(1, level, 1.0).unwrap();
    let coeffs = CarlesonCoefficients::VolumePower { exponent: 1.5 };
    let res = carleson_check(&rho, 2.0, 3.0, &coeffs, &[rho.clone()]).map_err(|e| e.to_string())?;
    let partial: f64 = (0..=level).map(|l| 2f64.powf(-(l as f64) / 2.0)).sum();
    let geometric_ok = res.c1 == 1.0 && rel(res.c_hat, partial) <= 0.02;
    let mut worst: f64 = 0.0;
    let mut finite = true;
    let threshold = CarlesonCoefficients::Threshold { scale: 1.0 };
    for seed in 0..100u64 {
        let mut r = rng(7000 + seed);
        let rho = random_fn(&mut r, 1, 6, 20.0);
        let g = random_fn(&mut r, 1, 6, 1e3);
        let out = carleson_check(&rho, 2.0, 3.0, &threshold, &[g]).map_err(|e| e.to_string())?;
        finite &= out.c_hat.is_finite() && out.hypotheses_met;
        worst = worst.max(out.c_hat);
    }
    let (b, recorded) = base.get("c7.random_c_hat_max", worst);
    let msg = format!(
        "C1 = {}, C_hat = {:.5} vs partial sum {partial:.5}; random max C_hat {worst:.4} (baseline {b:.4}{})",
        res.c1,
        res.c_hat,
        if recorded { ", recorded" } else { "" }
    );
    if geometric_ok && finite && worst <= b * (1.0 + TOL) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_fefferman_stein(base: &mut Baselines) -> Outcome {
    let cfg = ExponentConfig::strong(1, 2, 2, vec![2.0, 2.0], 2.0, vec![0.5, 0.5]).unwrap();
    let level = 3;
    let family = CubeFamily::grid_aligned(1, level).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = rng(8000 + seed);
        let v = random_fn(&mut r, 2, level, 100.0);
        let fs = [random_fn(&mut r, 2, level, 100.0), random_fn(&mut r, 2, level, 100.0)];
        let scen = Scenario {
            name: format!("fs-{seed}"),
            exponents: cfg.clone(),
            family: family.clone(),
            weights: WeightSystem::new(v.clone(), vec![]).unwrap(),
            quadrature: Quadrature::default(),
        };
        let problem = fefferman_stein_problem(&v, &scen).map_err(|e| e.to_string())?;
        let ratio = problem.ratio(&fs).map_err(|e| e.to_string())?.unwrap_or(0.0);
        worst = worst.max(ratio);
    }
    let (c, recorded) = base.get("c8.fefferman_stein_c", worst);
    let msg = format!(
        "max ratio {worst:.5} against C = {c:.5}{}",
        if recorded { " (recorded)" } else { "" }
    );
    if worst.is_finite() && within(worst, c) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_shift_average() -> Outcome {
    let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.5).unwrap();
    let mut worst_change: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for seed in 0..50u64 {
        let mut r = rng(9000 + seed);
        let inputs = [Smooth::new(&mut r, 1), Smooth::new(&mut r, 1)];
        let at = |level: u32| {
            let fs: Vec<GridFunction> = inputs.iter().map(|f| f.sample(level)).collect();
            let fam = CubeFamily::grid_aligned(1, level).unwrap();
            shift_average_constant(&fs, &cfg, &fam, -2).unwrap()
        };
        let (a, b) = (at(5), at(6));
        largest = largest.max(a).max(b);
        worst_change = worst_change.max(rel(b, a));
    }
    let scfg = ExponentConfig::strong(1, 1, 2, vec![2.0], 4.0, vec![0.5, 0.5]).unwrap();
    let mut strong_change: f64 = 0.0;
    for seed in 0..50u64 {
        let mut r = rng(9500 + seed);
        let inputs = [Smooth::new(&mut r, 2)];
        let at = |level: u32| {
            let fs: Vec<GridFunction> = inputs.iter().map(|f| f.sample(level)).collect();
            let fam = CubeFamily::grid_aligned(1, level).unwrap();
            shift_average_constant(&fs, &scfg, &fam, -2).unwrap()
        };
        let (a, b) = (at(3), at(4));
        largest = largest.max(a).max(b);
        strong_change = strong_change.max(rel(b, a));
    }
    let msg = format!(
        "largest C {largest:.4}; largest L->L+1 change {:.2}% (one factor), {:.2}% (two factors)",
        worst_change * 100.0,
        strong_change * 100.0
    );
    if largest.is_finite() && worst_change <= TOL && strong_change <= TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn c10_determinism() -> Outcome {
    let snapshot = || -> Result<Vec<String>> {
        let mut out = Vec::new();
        for name in ["two-weight-log-uniform", "strong-two-weight-log-uniform-factors", "strong-trace-k2-log-uniform"] {
            let (cfg, scen) = load_scenario(name)?;
            out.push(canonical_json(&run_suite(cfg.suite_id()?, &scen, &cfg.trial_family(), &cfg.verify)?)?);
        }
        let mut r = rng(10);
        let f1 = [random_fn(&mut r, 1, 6, 1e3), random_fn(&mut r, 1, 6, 1e3)];
        let f2 = [random_fn(&mut r, 2, 3, 1e3), random_fn(&mut r, 2, 3, 1e3)];
        let cfg = ExponentConfig::new(1, 2, vec![2.0, 2.0], 2.0, 0.5)?;
        let scfg = ExponentConfig::strong(1, 2, 2, vec![2.0, 2.0], 2.0, vec![0.5, 0.5])?;
        let fam = CubeFamily::grid_aligned(1, 6)?;
        let fam3 = CubeFamily::grid_aligned(1, 3)?;
        for g in [
            mfm(&f1, &cfg, &fam)?,
            mfi(&f1, &cfg, &Quadrature::default())?,
            strong_mfm(&f2, &scfg, &fam3)?,
            strong_mfi(&f2, &scfg, &Quadrature::default())?,
        ] {
            out.push(canonical_json(&g)?);
        }
        Ok(out)
    };
    let a = with_threads(1, snapshot).map_err(|e| e.to_string())?;
    let b = with_threads(4, snapshot).map_err(|e| e.to_string())?;
    let c = with_threads(4, snapshot).map_err(|e| e.to_string())?;
    let msg = format!("{} outputs compared across 1 and 4 threads and a rerun", a.len());
    if a == b && b == c {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    // cargo passes harness flags such as --nocapture; none apply here.
    let mut base = Baselines::load();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Baselines) -> Outcome>)> = vec![
        ("exact calculus", Box::new(|_| c1_exact_calculus())),
        ("closed-form Riesz potential", Box::new(|_| c2_riesz())),
        ("pointwise domination", Box::new(|_| c3_pointwise())),
        ("trivial-constant exactness", Box::new(|_| c4_trivial_constants())),
        ("blowup correspondence", Box::new(|_| c5_blowup())),
        ("necessity sandwich", Box::new(c6_sandwich)),
        ("Carleson embedding", Box::new(c7_carleson)),
        ("Fefferman-Stein", Box::new(c8_fefferman_stein)),
        ("shift averaging", Box::new(|_| c9_shift_average())),
        ("determinism", Box::new(|_| c10_determinism())),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run(&mut base);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS {name} [{secs:.1} s]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.1} s]: {msg}", i + 1);
            }
        }
    }
    base.save();
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
