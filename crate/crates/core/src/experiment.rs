//! Ensemble experiments: maximal Brody parameter against clause density,
//! and the classical DPLL cost baseline.

use std::fmt::Write as _;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aqc::build_system;
use crate::error::{Error, Result};
use crate::sat::{distinct_clause_count, dpll_solve, generate_instance};
use crate::seed;
use crate::spectrum::sweep;
use crate::stats::{max_brody, FitParams, UnfoldParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n: u32,
    pub f_grid: Vec<f64>,
    pub instances_per_f: usize,
    pub interpolation_points: usize,
    pub seed: u64,
    pub unfold: UnfoldParams,
    pub fit: FitParams,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
}

/// `{0.25, 0.5, ..., 8.0}`.
pub fn default_f_grid() -> Vec<f64> {
    (1..=32).map(|k| f64::from(k) * 0.25).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 8,
            f_grid: default_f_grid(),
            instances_per_f: 200,
            interpolation_points: 100,
            seed: 1,
            unfold: UnfoldParams::default(),
            fit: FitParams::default(),
            jobs: 0,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl ExperimentConfig {
    /// 20 instances per ratio on a 25-point interpolation grid.
    pub fn quick() -> Self {
        ExperimentConfig {
            instances_per_f: 20,
            interpolation_points: 25,
            ..Self::default()
        }
    }

    /// Clause count for ratio `f`: `round(f * n)`.
    pub fn clauses_for(&self, f: f64) -> usize {
        (f * f64::from(self.n)).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(3..=crate::aqc::DEFAULT_MAX_QUBITS).contains(&self.n) {
            return bad(format!("n = {} outside 3..={}", self.n, crate::aqc::DEFAULT_MAX_QUBITS));
        }
        if self.f_grid.is_empty() {
            return bad("empty f grid".into());
        }
        if self.instances_per_f == 0 {
            return bad("instances_per_f must be >= 1".into());
        }
        if self.interpolation_points < 2 {
            return bad("interpolation_points must be >= 2".into());
        }
        for &f in &self.f_grid {
            let m = self.clauses_for(f);
            if !f.is_finite() || m == 0 {
                return bad(format!("f = {f} gives no clauses at n = {}", self.n));
            }
            if m as u64 > distinct_clause_count(self.n) {
                return bad(format!("f = {f} needs {m} distinct clauses, more than exist"));
            }
        }
        if !(self.unfold.edge_trim_fraction >= 0.0 && self.unfold.edge_trim_fraction < 0.5) {
            return bad("edge trim fraction outside [0, 0.5)".into());
        }
        Ok(())
    }

    /// Stable hash of the canonical JSON form, recorded with each instance.
    /// `jobs` is excluded since it does not affect results.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { jobs: 0, ..self.clone() };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        format!("{:016x}", fnv1a(json.as_bytes()))
    }

    pub fn instance_seed(&self, f_index: usize, instance_index: usize) -> u64 {
        seed::split(self.seed, f_index as u64, instance_index as u64)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Everything measured for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub n: u32,
    pub m: usize,
    pub seed: u64,
    pub config_hash: String,
    pub q_max: f64,
    pub s_at_max: f64,
    pub has_valid_fit: bool,
    /// `(s, q, valid)` per grid point.
    pub q_of_s: Vec<(f64, f64, bool)>,
    pub dpll_decisions: u64,
    pub satisfiable: bool,
}

/// Generate, solve, sweep and fit one instance.
pub fn run_instance(n: u32, m: usize, instance_seed: u64, config: &ExperimentConfig) -> Result<InstanceRecord> {
    let formula = generate_instance(n, m, instance_seed)?;
    let classical = dpll_solve(&formula);
    let system = build_system(&formula)?;
    let spectra = sweep(&system, config.interpolation_points, Some(instance_seed))?;
    let best = max_brody(&spectra, &config.unfold, &config.fit)?;
    Ok(InstanceRecord {
        n,
        m,
        seed: instance_seed,
        config_hash: config.hash(),
        q_max: best.q_max,
        s_at_max: best.s_at_max,
        has_valid_fit: best.has_valid_fit,
        q_of_s: best.fits.iter().map(|f| (f.s.unwrap_or(0.0), f.q, f.valid)).collect(),
        dpll_decisions: classical.dpll_decisions,
        satisfiable: classical.satisfiable,
    })
}

/// One point of the complexity curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    /// Realised ratio `m / n`.
    pub f: f64,
    pub m: usize,
    pub mean_q_max: f64,
    pub stderr_q_max: f64,
    pub median_dpll: f64,
    pub sat_fraction: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexityCurve {
    pub records: Vec<CurveRecord>,
}

pub const CURVE_CSV_HEADER: &str = "f,m,mean_q_max,stderr_q_max,median_dpll,sat_fraction,count";

impl ComplexityCurve {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.f, r.m, r.mean_q_max, r.stderr_q_max, r.median_dpll, r.sat_fraction, r.count
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == CURVE_CSV_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{CURVE_CSV_HEADER}`"),
                })
            }
        }
        let mut records = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |what: &str| Error::Parse {
                line: idx + 1,
                message: format!("bad {what} in `{line}`"),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(err("field count"));
            }
            let float = |i: usize, name: &str| fields[i].trim().parse::<f64>().map_err(|_| err(name));
            let int = |i: usize, name: &str| fields[i].trim().parse::<usize>().map_err(|_| err(name));
            records.push(CurveRecord {
                f: float(0, "f")?,
                m: int(1, "m")?,
                mean_q_max: float(2, "mean_q_max")?,
                stderr_q_max: float(3, "stderr_q_max")?,
                median_dpll: float(4, "median_dpll")?,
                sat_fraction: float(5, "sat_fraction")?,
                count: int(6, "count")?,
            });
        }
        Ok(ComplexityCurve { records })
    }

    /// Index of the largest `mean_q_max` (first on ties).
    pub fn peak_index(&self) -> Option<usize> {
        self.records
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
                Some((_, q)) if q >= r.mean_q_max => best,
                _ => Some((i, r.mean_q_max)),
            })
            .map(|(i, _)| i)
    }
}

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// An instance that failed, with enough to re-run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub f: f64,
    pub m: usize,
    pub seed: u64,
    pub error: String,
    pub numeric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub curve: ComplexityCurve,
    pub records: Vec<InstanceRecord>,
    pub failures: Vec<InstanceFailure>,
}

impl ExperimentOutput {
    /// One JSON object per instance record, in `(f, instance)` order.
    pub fn records_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Run every `(f, instance)` pair and aggregate per ratio.
///
/// Instance seeds are `split(config.seed, f_index, instance_index)`, and
/// aggregation follows grid order, so the output does not depend on
/// `config.jobs`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let tasks: Vec<(usize, usize)> = (0..config.f_grid.len())
        .flat_map(|fi| (0..config.instances_per_f).map(move |i| (fi, i)))
        .collect();
    info!(
        "running {} instances (n = {}, {} ratios, {} grid points)",
        tasks.len(),
        config.n,
        config.f_grid.len(),
        config.interpolation_points
    );
    let results: Vec<Result<InstanceRecord>> = thread_pool(config.jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(fi, i)| {
                let m = config.clauses_for(config.f_grid[fi]);
                run_instance(config.n, m, config.instance_seed(fi, i), config)
            })
            .collect()
    });

    let mut curve = ComplexityCurve::default();
    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut results = results.into_iter();
    for (fi, &f) in config.f_grid.iter().enumerate() {
        let m = config.clauses_for(f);
        let mut ok = Vec::new();
        for i in 0..config.instances_per_f {
            match results.next().expect("one result per task") {
                Ok(r) => ok.push(r),
                Err(e) => {
                    let seed = config.instance_seed(fi, i);
                    warn!("instance f = {f}, m = {m}, seed = {seed} failed: {e}");
                    failures.push(InstanceFailure { f, m, seed, numeric: e.is_numeric(), error: e.to_string() });
                }
            }
        }
        if ok.is_empty() {
            return Err(Error::AllInstancesFailed { f });
        }
        let q: Vec<f64> = ok.iter().map(|r| r.q_max).collect();
        let (mean_q_max, stderr_q_max) = mean_and_stderr(&q);
        let mut cost: Vec<f64> = ok.iter().map(|r| r.dpll_decisions as f64).collect();
        curve.records.push(CurveRecord {
            f: m as f64 / f64::from(config.n),
            m,
            mean_q_max,
            stderr_q_max,
            median_dpll: median(&mut cost),
            sat_fraction: ok.iter().filter(|r| r.satisfiable).count() as f64 / ok.len() as f64,
            count: ok.len(),
        });
        records.extend(ok);
    }
    Ok(ExperimentOutput { curve, records, failures })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub n: u32,
    pub f: f64,
    pub m: usize,
    pub median_dpll_decisions: f64,
    pub mean_dpll_decisions: f64,
    pub sat_fraction: f64,
    pub count: usize,
}

pub const BASELINE_CSV_HEADER: &str = "n,f,m,median_dpll,mean_dpll,sat_fraction,count";

/// DPLL cost and satisfiable fraction over random instances for each
/// `(n, f)`. Instance seeds are `split(split(seed, n, 0), f_index, i)`.
pub fn run_classical_baseline(
    n_list: &[u32],
    f_grid: &[f64],
    instances: usize,
    seed_value: u64,
) -> Result<Vec<BaselineRecord>> {
    if instances == 0 {
        return Err(Error::InvalidParameter("instances must be >= 1".into()));
    }
    let mut out = Vec::new();
    for &n in n_list {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("n = {n} < 3")));
        }
        let root = seed::split(seed_value, u64::from(n), 0);
        for (fi, &f) in f_grid.iter().enumerate() {
            let m = (f * f64::from(n)).round() as usize;
            if m == 0 || m as u64 > distinct_clause_count(n) {
                return Err(Error::InvalidParameter(format!("f = {f} infeasible at n = {n}")));
            }
            let results = (0..instances)
                .into_par_iter()
                .map(|i| generate_instance(n, m, seed::split(root, fi as u64, i as u64)).map(|g| dpll_solve(&g)))
                .collect::<Result<Vec<_>>>()?;
            let mut cost: Vec<f64> = results.iter().map(|r| r.dpll_decisions as f64).collect();
            let mean = cost.iter().sum::<f64>() / cost.len() as f64;
            out.push(BaselineRecord {
                n,
                f: m as f64 / f64::from(n),
                m,
                median_dpll_decisions: median(&mut cost),
                mean_dpll_decisions: mean,
                sat_fraction: results.iter().filter(|r| r.satisfiable).count() as f64 / instances as f64,
                count: instances,
            });
        }
    }
    Ok(out)
}

pub fn baseline_csv(records: &[BaselineRecord]) -> String {
    let mut out = String::from(BASELINE_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n, r.f, r.m, r.median_dpll_decisions, r.mean_dpll_decisions, r.sat_fraction, r.count
        );
    }
    out
}

/// Write `curve.csv`, `instances.jsonl` and `failures.json` into `dir`.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("curve.csv"), output.curve.to_csv())?;
    std::fs::write(dir.join("instances.jsonl"), output.records_jsonl()?)?;
    std::fs::write(dir.join("failures.json"), serde_json::to_string_pretty(&output.failures)?)?;
    Ok(())
}
