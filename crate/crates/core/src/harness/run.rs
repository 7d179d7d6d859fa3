//! Batch experiments: configuration, per-instance execution, and persisted records.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::generate::{generate, GeneratorSpec};
use crate::conv;
use crate::error::{Error, Result};
use crate::group::{GridGroup, GroupSet};
use crate::inequalities::{check_kneser, BoundReport, check_partial_bound, classify_equality, ruzsa_from_profile, SubmodularityCheck};
use crate::inverse::{recover_bohr_pair, RecoveryConfig};
use crate::rational::{self, ratio, Rational};
use crate::rng::seeded_rng;

pub const INSTANCE_SCHEMA: &str = "sumset.instance/1";
pub const RUN_SCHEMA: &str = "sumset.run/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Kneser,
    /// Every threshold `t = k/N`, `0 <= k <= min(|A|, |B|)`.
    Ruzsa,
    /// Fixed `ε`, or a fresh admissible `ε` per instance when absent.
    Partial {
        #[serde(default, with = "opt_rational", skip_serializing_if = "Option::is_none")]
        eps: Option<Rational>,
    },
    /// `A1, A2` from the generator at the instance seed, `B` from the seed with bit 63 flipped;
    /// every threshold `t = k/N`, `1 <= k <= N`.
    Submod,
    Classify,
    Recover {
        #[serde(with = "rational::serde_str")]
        delta: Rational,
        #[serde(default)]
        config: RecoveryConfig,
    },
}

mod opt_rational {
    use crate::rational::{self, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&rational::format(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        match Option::<String>::deserialize(d)? {
            None => Ok(None),
            Some(text) => rational::parse(&text)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational `{text}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub generator: GeneratorSpec,
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Directory receiving `run.jsonl` and `instances.csv`; nothing is written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_trials() -> usize {
    1
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<GridGroup> {
        let group = GridGroup::new(&self.dims)?;
        self.generator.validate(&group)?;
        if let Task::Recover { delta, .. } = &self.task {
            conv::partial_sumset(&GroupSet::full(&group), &GroupSet::full(&group), delta)?;
        }
        Ok(group)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violation,
    Success,
    Failure,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub schema: String,
    pub index: usize,
    pub seed: u64,
    pub size_a: usize,
    pub size_b: usize,
    pub verdict: Verdict,
    /// Smallest defect seen over the checked thresholds (laws only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub holds: usize,
    pub violations: usize,
    pub successes: usize,
    pub failures: usize,
    pub errors: usize,
    /// Over `max(residual_a, residual_b)` of recovery instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_quantiles: Option<Quantiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub config: ExperimentConfig,
    pub instances: Vec<InstanceRecord>,
    pub aggregate: Aggregate,
    pub wall_clock_ms: u64,
}

impl RunRecord {
    /// True when every instance held or succeeded.
    pub fn all_ok(&self) -> bool {
        let a = &self.aggregate;
        a.violations == 0 && a.failures == 0 && a.errors == 0
    }

    /// Verdict-bearing content, everything except timing.
    pub fn replay_key(&self) -> (&ExperimentConfig, &[InstanceRecord], &Aggregate) {
        (&self.config, &self.instances, &self.aggregate)
    }

    /// One JSON line per instance, then a summary line without the instance list.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for inst in &self.instances {
            serde_json::to_writer(&mut out, inst)?;
            out.write_all(b"\n")?;
        }
        let summary = serde_json::json!({
            "schema": self.schema,
            "config": self.config,
            "aggregate": self.aggregate,
            "wall_clock_ms": self.wall_clock_ms,
        });
        serde_json::to_writer(&mut out, &summary)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    /// Columns `index, seed, size_a, size_b, verdict, defect, residual_a, residual_b, error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "seed", "size_a", "size_b", "verdict", "defect", "residual_a", "residual_b", "error"])?;
        for r in &self.instances {
            let verdict = serde_json::to_value(r.verdict)?;
            w.write_record([
                r.index.to_string(),
                r.seed.to_string(),
                r.size_a.to_string(),
                r.size_b.to_string(),
                verdict.as_str().unwrap_or_default().to_string(),
                r.defect.clone().unwrap_or_default(),
                r.residual_a.clone().unwrap_or_default(),
                r.residual_b.clone().unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `run.jsonl` (appending) and `instances.csv` into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let jsonl = fs::OpenOptions::new().create(true).append(true).open(dir.join("run.jsonl"))?;
        self.write_jsonl(BufWriter::new(jsonl))?;
        self.write_csv(BufWriter::new(File::create(dir.join("instances.csv"))?))?;
        Ok(())
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    let group = config.validate()?;
    let started = Instant::now();
    let instances: Vec<InstanceRecord> = (0..config.trials)
        .into_par_iter()
        .map(|index| {
            let seed = config.seed.wrapping_add(index as u64);
            run_instance(&group, config, index, seed)
        })
        .collect();
    let aggregate = aggregate(&instances);
    let record = RunRecord {
        schema: RUN_SCHEMA.into(),
        config: config.clone(),
        instances,
        aggregate,
        wall_clock_ms: started.elapsed().as_millis() as u64,
    };
    if let Some(dir) = &config.output {
        record.persist(dir)?;
    }
    Ok(record)
}

fn blank(index: usize, seed: u64) -> InstanceRecord {
    InstanceRecord {
        schema: INSTANCE_SCHEMA.into(),
        index,
        seed,
        size_a: 0,
        size_b: 0,
        verdict: Verdict::Error,
        defect: None,
        residual_a: None,
        residual_b: None,
        report: None,
        error: None,
    }
}

fn run_instance(group: &GridGroup, config: &ExperimentConfig, index: usize, seed: u64) -> InstanceRecord {
    let mut rec = blank(index, seed);
    if let Err(e) = fill_instance(group, config, seed, &mut rec) {
        rec.verdict = Verdict::Error;
        rec.error = Some(e.to_string());
    }
    rec
}

fn law_verdict(holds: bool) -> Verdict {
    if holds {
        Verdict::Holds
    } else {
        Verdict::Violation
    }
}

fn fill_instance(group: &GridGroup, config: &ExperimentConfig, seed: u64, rec: &mut InstanceRecord) -> Result<()> {
    let (a, b) = generate(group, &config.generator, seed)?;
    rec.size_a = a.len();
    rec.size_b = b.len();
    let third = match config.task {
        Task::Submod => Some(generate(group, &config.generator, seed ^ (1 << 63))?.0),
        _ => None,
    };
    evaluate_into(&config.task, &a, &b, third.as_ref(), seed, rec)
}

/// Runs `task` on one explicit pair. `Submod` checks `(A, B)` against the third set `C`.
pub fn evaluate(task: &Task, a: &GroupSet, b: &GroupSet, third: Option<&GroupSet>, seed: u64) -> Result<InstanceRecord> {
    let mut rec = blank(0, seed);
    rec.size_a = a.len();
    rec.size_b = b.len();
    evaluate_into(task, a, b, third, seed, &mut rec)?;
    Ok(rec)
}

fn evaluate_into(task: &Task, a: &GroupSet, b: &GroupSet, third: Option<&GroupSet>, seed: u64, rec: &mut InstanceRecord) -> Result<()> {
    a.group().ensure_same(b.group())?;
    let group = a.group();
    match task {
        Task::Kneser => {
            let r = check_kneser(a, b)?;
            rec.verdict = law_verdict(r.holds);
            rec.defect = Some(rational::format(&r.defect));
            rec.report = Some(serde_json::to_value(&r)?);
        }
        Task::Ruzsa => {
            let n = group.size();
            let profile = conv::convolve(a, b)?;
            let mut worst: Option<BoundReport> = None;
            for k in 0..=a.len().min(b.len()) {
                let r = ruzsa_from_profile(&profile, a.len(), b.len(), &ratio(k as i128, n as i128))?;
                if worst.as_ref().is_none_or(|w| r.defect < w.defect) {
                    worst = Some(r);
                }
            }
            let worst = worst.expect("k = 0 is always checked");
            rec.verdict = law_verdict(worst.holds);
            rec.defect = Some(rational::format(&worst.defect));
            rec.report = Some(serde_json::to_value(&worst)?);
        }
        Task::Partial { eps } => {
            let eps = match eps {
                Some(e) => *e,
                None => admissible_eps(a, b, seed),
            };
            let r = check_partial_bound(a, b, &eps)?;
            rec.verdict = law_verdict(r.holds);
            rec.defect = Some(rational::format(&r.defect));
            let mut v = serde_json::to_value(&r)?;
            v["eps"] = Value::String(rational::format(&eps));
            rec.report = Some(v);
        }
        Task::Submod => {
            let c = third.ok_or_else(|| Error::Malformed("submodularity needs a third set".into()))?;
            let check = SubmodularityCheck::new(a, b, c)?;
            let n = group.size();
            let mut worst: Option<Rational> = None;
            for k in 1..=n {
                let r = check.at(&ratio(k as i128, n as i128))?;
                if worst.is_none_or(|w| r.min_pointwise_defect < w) {
                    worst = Some(r.min_pointwise_defect);
                }
            }
            let worst = worst.expect("n >= 2");
            rec.verdict = law_verdict(worst >= Rational::from_integer(0));
            rec.defect = Some(rational::format(&worst));
        }
        Task::Classify => {
            let c = classify_equality(a, b)?;
            rec.verdict = Verdict::Holds;
            rec.defect = Some(rational::format(&c.kneser.defect));
            rec.report = Some(serde_json::to_value(&c)?);
        }
        Task::Recover { delta, config: rc } => {
            let r = recover_bohr_pair(a, b, delta, rc)?;
            rec.verdict = if r.success { Verdict::Success } else { Verdict::Failure };
            rec.residual_a = Some(rational::format(&r.residual_a));
            rec.residual_b = Some(rational::format(&r.residual_b));
            rec.report = Some(serde_json::to_value(&r)?);
        }
    }
    Ok(())
}

/// `ε = r·min(μ(A), μ(B))² / 1000` with `r` uniform in `1..=999`.
pub fn admissible_eps(a: &GroupSet, b: &GroupSet, seed: u64) -> Rational {
    let mut rng = seeded_rng(seed ^ 0x5eed_e951);
    let small = a.measure().min(b.measure());
    let r: i128 = rng.gen_range(1..=999);
    small * small * ratio(r, 1000)
}

fn aggregate(instances: &[InstanceRecord]) -> Aggregate {
    let count = |v: Verdict| instances.iter().filter(|r| r.verdict == v).count();
    let mut residuals: Vec<f64> = instances
        .iter()
        .filter_map(|r| {
            let a = rational::parse(r.residual_a.as_deref()?)?;
            let b = rational::parse(r.residual_b.as_deref()?)?;
            Some(rational::to_f64(&a.max(b)))
        })
        .collect();
    residuals.sort_by(f64::total_cmp);
    let residual_quantiles = (!residuals.is_empty()).then(|| {
        let at = |q: f64| residuals[((residuals.len() - 1) as f64 * q).round() as usize];
        Quantiles { min: residuals[0], median: at(0.5), p90: at(0.9), max: residuals[residuals.len() - 1] }
    });
    Aggregate {
        trials: instances.len(),
        holds: count(Verdict::Holds),
        violations: count(Verdict::Violation),
        successes: count(Verdict::Success),
        failures: count(Verdict::Failure),
        errors: count(Verdict::Error),
        residual_quantiles,
    }
}

/// Parses an experiment config from a JSON file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    ExperimentConfig::parse(&text)
}
