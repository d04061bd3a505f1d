use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use mfrac_core::config::{ConditionKind, ExperimentConfig};
use mfrac_core::grid::io;
use mfrac_core::operators::{mfm_dyadic, strong_mfm_dyadic, OperatorKind};
use mfrac_core::verify::{run_suite, SuiteResult, Verdict};
use mfrac_core::weights::{
    ainf_surrogate, ap_constant, ap_vector_constant, apq_vector_constant, inclusion_check,
    power_bump_constant, rd_constant, strong_one_weight_constant, strong_twc_constant, trace_constant,
    twc_constant, WeightSystem, AINF_THRESHOLD,
};
use mfrac_core::{canonical_json, lp_norm, Error, GridFunction};

use crate::{Common, EvalArgs, ReportArgs, EXIT_FAIL, EXIT_UNMET};

struct Session {
    cfg: ExperimentConfig,
    base: PathBuf,
    provenance: Value,
    out: Option<PathBuf>,
    threads: Option<usize>,
    started: Instant,
    command: &'static str,
}

#[derive(Serialize)]
struct Provenance {
    command: String,
    config: String,
    /// Flag values that replaced config keys.
    overrides: BTreeMap<String, Value>,
}

impl Session {
    fn open(command: &'static str, a: &Common) -> Result<Self> {
        Self::open_with(command, &a.config, a.seed, a.level, a.threads, a.out.clone())
    }

    fn open_with(
        command: &'static str,
        config: &Path,
        seed: Option<u64>,
        level: Option<u32>,
        threads: Option<usize>,
        out: Option<PathBuf>,
    ) -> Result<Self> {
        let started = Instant::now();
        if let Some(t) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build_global()
                .context("configuring the thread pool")?;
        }
        let mut cfg = ExperimentConfig::load(config)?;
        let mut overrides = BTreeMap::new();
        if let Some(s) = seed {
            cfg.seed = s;
            overrides.insert("seed".to_owned(), json!(s));
        }
        if let Some(l) = level {
            cfg.grid.level = l;
            overrides.insert("grid.level".to_owned(), json!(l));
        }
        cfg.check()?;
        let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
        let out = out.or_else(|| cfg.output.path.as_ref().map(|p| base.join(p)));
        let provenance = serde_json::to_value(Provenance {
            command: command.to_owned(),
            config: config.display().to_string(),
            overrides,
        })?;
        Ok(Self {
            cfg,
            base,
            provenance,
            out,
            threads,
            started,
            command,
        })
    }

    /// Writes the JSON output (stdout without a path) and the sidecar log.
    fn emit(&self, value: &Value) -> Result<()> {
        let text = canonical_json(value)?;
        match &self.out {
            Some(p) => {
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                self.sidecar(p)?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn sidecar(&self, out: &Path) -> Result<()> {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let log = format!(
            "command={} unix_time={now} runtime_ms={} threads={} provenance={}\n",
            self.command,
            self.started.elapsed().as_millis(),
            self.threads.map_or_else(|| "default".to_owned(), |t| t.to_string()),
            serde_json::to_string(&self.provenance)?
        );
        let path = PathBuf::from(format!("{}.log", out.display()));
        std::fs::write(&path, log).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn gen_weight(a: &Common) -> Result<u8> {
    let s = Session::open("gen-weight", a)?;
    let Some(src) = &s.cfg.generator else {
        bail!(Error::Config("missing 'generator' section".into()));
    };
    let f = src.materialize(s.cfg.ambient_dimension(), s.cfg.grid.level, &s.base)?;
    match &s.out {
        Some(p) => {
            io::write(p, &f)?;
            s.sidecar(p)?;
        }
        None => print!("{}", io::to_json(&f)?),
    }
    Ok(0)
}

fn summary(g: &GridFunction) -> Result<Value> {
    Ok(json!({
        "cells": g.len(),
        "min": g.min(),
        "max": g.max(),
        "integral": g.total(),
        "l1": lp_norm(g, 1.0, None)?,
        "l2": lp_norm(g, 2.0, None)?,
    }))
}

pub fn eval(a: &EvalArgs) -> Result<u8> {
    let s = Session::open("eval", &a.common)?;
    let spec = s.cfg.operator_spec()?;
    let inputs = s.cfg.inputs(&s.base)?;
    if inputs.len() != spec.arity() {
        bail!(Error::Config(format!(
            "operator takes {} inputs, config lists {}",
            spec.arity(),
            inputs.len()
        )));
    }
    let out = spec.apply(&inputs)?;
    let dyadic = match spec.kind {
        OperatorKind::Mfm => Some(mfm_dyadic(&inputs, &spec.exponents)?),
        OperatorKind::StrongMfm => Some(strong_mfm_dyadic(&inputs, &spec.exponents)?),
        _ => None,
    };
    let dominated = dyadic.map(|d| {
        d.values()
            .iter()
            .zip(out.values())
            .all(|(x, y)| *x <= y * (1.0 + 1e-12))
    });
    let grid_path = a
        .grid_out
        .clone()
        .or_else(|| s.cfg.output.grid_path.as_ref().map(|p| s.base.join(p)));
    let mut value = json!({
        "provenance": s.provenance,
        "operator": spec.kind,
        "family": spec.family.describe(),
        "summary": summary(&out)?,
        "dyadic_dominated": dominated,
    });
    match &grid_path {
        Some(p) => {
            io::write(p, &out)?;
            value["grid_path"] = json!(p.display().to_string());
        }
        None => value["output"] = serde_json::to_value(&out)?,
    }
    s.emit(&value)?;
    Ok(0)
}

pub fn check_class(a: &Common) -> Result<u8> {
    let s = Session::open("check-class", a)?;
    let cfg = &s.cfg;
    let Some(kind) = &cfg.condition else {
        bail!(Error::Config("missing 'condition' section".into()));
    };
    let ws = cfg.weight_system(&s.base)?;
    let family = cfg.cube_family()?;
    let one = GridFunction::constant(cfg.ambient_dimension(), cfg.grid.level, 1.0)?;
    let u = ws.u.clone().unwrap_or_else(|| one.clone());
    let first = ws.w.first().cloned().unwrap_or_else(|| one.clone());
    let w = |m: usize| {
        if ws.w.is_empty() {
            vec![one.clone(); m]
        } else {
            ws.w.clone()
        }
    };
    let with_u = || WeightSystem {
        u: Some(u.clone()),
        w: w(cfg.exponents.as_ref().map_or(1, |e| e.m)),
        v: None,
        rho: None,
        w_factors: None,
    };
    let result = match kind {
        ConditionKind::Ap { p } => serde_json::to_value(ap_constant(&first, *p, &family)?)?,
        ConditionKind::Ainf { threshold } => {
            serde_json::to_value(ainf_surrogate(&first, &family, threshold.unwrap_or(AINF_THRESHOLD))?)?
        }
        ConditionKind::Rd { dyadic } => serde_json::to_value(rd_constant(&first, *dyadic)?)?,
        other => {
            let e = cfg.exponent_config()?;
            let ww = w(e.m);
            match other {
                ConditionKind::ApVector => serde_json::to_value(ap_vector_constant(&ww, &e.p, &family)?)?,
                ConditionKind::ApqVector => serde_json::to_value(apq_vector_constant(&ww, &e.p, e.q, &family)?)?,
                ConditionKind::PowerBump { r, variant } => {
                    serde_json::to_value(power_bump_constant(&u, &ww, &e, *r, *variant, &family)?)?
                }
                ConditionKind::TwoWeight => serde_json::to_value(twc_constant(&u, &ww, &e, &family)?)?,
                ConditionKind::StrongTwoWeight => serde_json::to_value(strong_twc_constant(&with_u(), &e, &family)?)?,
                ConditionKind::Trace => serde_json::to_value(trace_constant(&u, &e, &family)?)?,
                ConditionKind::StrongOneWeight => {
                    serde_json::to_value(strong_one_weight_constant(&with_u(), &e, &family)?)?
                }
                ConditionKind::Inclusion => serde_json::to_value(inclusion_check(&ww, &e, &family)?)?,
                ConditionKind::Ap { .. } | ConditionKind::Ainf { .. } | ConditionKind::Rd { .. } => unreachable!(),
            }
        }
    };
    s.emit(&json!({ "provenance": s.provenance, "condition": kind, "result": result }))?;
    Ok(0)
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => EXIT_FAIL,
        Verdict::HypothesesUnmet => EXIT_UNMET,
    }
}

fn run_verify(s: &Session) -> Result<SuiteResult> {
    let scen = s.cfg.scenario(&s.base)?;
    Ok(run_suite(s.cfg.suite_id()?, &scen, &s.cfg.trial_family(), &s.cfg.verify)?)
}

pub fn verify(a: &Common) -> Result<u8> {
    let s = Session::open("verify", a)?;
    let res = run_verify(&s)?;
    s.emit(&json!({ "provenance": s.provenance, "result": res }))?;
    Ok(verdict_code(res.verdict))
}

const CSV_COLUMNS: &str = "theorem,scenario,level,seed,verdict,condition,estimated_norm,kappa,\
norm_over_condition,condition_over_norm,evaluated,skipped";

fn num(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:?}"))
}

fn row(r: &SuiteResult) -> Value {
    json!({
        "theorem": r.theorem,
        "scenario": r.scenario,
        "level": r.level,
        "seed": r.seed,
        "verdict": r.verdict,
        "condition": r.constants.condition,
        "estimated_norm": r.constants.estimated_norm,
        "kappa": r.constants.kappa,
        "norm_over_condition": r.ratios.norm_over_condition,
        "condition_over_norm": r.ratios.condition_over_norm,
        "evaluated": r.trials.evaluated,
        "skipped": r.trials.skipped,
    })
}

fn csv_line(r: &SuiteResult) -> String {
    let quoted = format!("\"{}\"", r.scenario.replace('"', "\"\""));
    [
        r.theorem.name(),
        quoted,
        r.level.to_string(),
        r.seed.to_string(),
        serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
        num(r.constants.condition.map(|c| c.0)),
        num(r.constants.estimated_norm),
        num(r.constants.kappa),
        num(r.ratios.norm_over_condition.map(|c| c.0)),
        num(r.ratios.condition_over_norm.map(|c| c.0)),
        r.trials.evaluated.to_string(),
        r.trials.skipped.to_string(),
    ]
    .join(",")
}

pub fn report(a: &ReportArgs) -> Result<u8> {
    let mut results = Vec::new();
    let mut out = a.out.clone();
    let mut provenance = Value::Null;
    if let Some(config) = &a.config {
        let s = Session::open_with("report", config, a.seed, a.level, a.threads, None)?;
        results.push(run_verify(&s)?);
        provenance = s.provenance.clone();
        out = out.or(s.out.clone());
    }
    for path in &a.input {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let r: SuiteResult = serde_json::from_value(v.get("result").cloned().unwrap_or(v))
            .map_err(|e| Error::Config(format!("{} is not a suite result: {e}", path.display())))?;
        results.push(r);
    }
    let text = if a.csv {
        let mut t = String::from(CSV_COLUMNS);
        t.push('\n');
        for r in &results {
            let _ = writeln!(t, "{}", csv_line(r));
        }
        t
    } else {
        let rows: Vec<Value> = results.iter().map(row).collect();
        canonical_json(&json!({ "provenance": provenance, "rows": rows }))?
    };
    match out {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}
