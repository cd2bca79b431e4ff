//! Benchmark sweeps over (generator class, ε grid, trials, methods), with
//! substream seeding so trials can run on any number of threads and still
//! produce identical, fully reproducible records.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generate::{generate_instance, GeneratorClass, InstanceSpec};
use crate::methods::{run_method, MethodKind};
use crate::metrics::{normalized_delta, normalized_tau, NormalizedDelta};
use crate::numeric::derive_seed;

/// How many aggregates each method is asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPolicy {
    /// Use the planted block count of each instance.
    TruthM,
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub class: GeneratorClass,
    pub n: usize,
    /// Fixed block count, or None to resample 3..=5 per trial.
    pub m: Option<usize>,
    pub epsilon_grid: Vec<f64>,
    pub delta: Option<f64>,
    pub trials: usize,
    pub methods: Vec<MethodKind>,
    pub master_seed: u64,
    pub k_policy: KPolicy,
    /// Record wall-clock per row. Off by default: timing is inherently
    /// non-reproducible and would break byte-identical CSV output.
    pub record_timing: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_grid.is_empty() {
            return Err(Error::InvalidConfig("epsilon grid is empty".into()));
        }
        if !self.epsilon_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("epsilon grid must be strictly ascending".into()));
        }
        if self
            .epsilon_grid
            .iter()
            .any(|e| !(0.0..=1.0).contains(e))
        {
            return Err(Error::InvalidConfig("epsilon values must lie in [0, 1]".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        if self.class == GeneratorClass::SparseMasked && self.delta.is_none() {
            return Err(Error::InvalidConfig("sparse class requires delta".into()));
        }
        Ok(())
    }

    /// Flat key=value provenance block embedded in the CSV header.
    pub fn provenance(&self) -> String {
        let grid = self
            .epsilon_grid
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let methods = self
            .methods
            .iter()
            .map(|m| m.token())
            .collect::<Vec<_>>()
            .join(",");
        let k = match self.k_policy {
            KPolicy::TruthM => "truth".to_string(),
            KPolicy::Fixed(k) => format!("fixed:{k}"),
        };
        format!(
            "class={} n={} m={} eps={} delta={} trials={} methods={} master_seed={} k_policy={} timing={}",
            self.class.token(),
            self.n,
            self.m.map_or("auto".to_string(), |m| m.to_string()),
            grid,
            self.delta.map_or(String::new(), |d| d.to_string()),
            self.trials,
            methods,
            self.master_seed,
            k,
            if self.record_timing { "on" } else { "off" },
        )
    }
}

/// One metric outcome: a value, a flagged fallback, or a recorded failure.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricOutcome {
    Ok(f64),
    /// Raw Δ reported because the truth partition is exactly lumpable.
    RawDelta(f64),
    /// τ undefined: some aggregate is absorbing.
    Absorbing,
    Failed(&'static str),
}

impl MetricOutcome {
    fn value_str(&self) -> String {
        match self {
            MetricOutcome::Ok(x) | MetricOutcome::RawDelta(x) => x.to_string(),
            MetricOutcome::Absorbing => "inf".to_string(),
            MetricOutcome::Failed(_) => "nan".to_string(),
        }
    }

    fn flag_str(&self) -> String {
        match self {
            MetricOutcome::Ok(_) => "ok".to_string(),
            MetricOutcome::RawDelta(_) => "raw".to_string(),
            MetricOutcome::Absorbing => "absorbing".to_string(),
            MetricOutcome::Failed(tok) => format!("error:{tok}"),
        }
    }

    pub fn ok_value(&self) -> Option<f64> {
        match self {
            MetricOutcome::Ok(x) => Some(*x),
            _ => None,
        }
    }
}

/// One (ε, trial, method) measurement row.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub class: GeneratorClass,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub trial: usize,
    pub method: MethodKind,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub tau_norm: MetricOutcome,
    pub delta_norm: MetricOutcome,
    pub wall_ms: u64,
}

pub const CSV_HEADER: &str =
    "class,epsilon,delta,trial,method,n,m,seed,tau_norm,tau_flag,delta_norm,delta_flag,wall_ms";

impl ExperimentRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.class.token(),
            self.epsilon,
            self.delta.map_or(String::new(), |d| d.to_string()),
            self.trial,
            self.method.token(),
            self.n,
            self.m,
            self.seed,
            self.tau_norm.value_str(),
            self.tau_norm.flag_str(),
            self.delta_norm.value_str(),
            self.delta_norm.flag_str(),
            self.wall_ms,
        )
    }
}

/// Seed for the instance generated at one (ε index, trial) grid point.
pub fn instance_seed(master: u64, eps_index: usize, trial: usize) -> u64 {
    derive_seed(master, ((eps_index as u64) << 32) | trial as u64)
}

/// Seed handed to one method run on that instance.
pub fn method_seed(instance_seed: u64, method: MethodKind) -> u64 {
    derive_seed(instance_seed, 1 + method as u64)
}

fn failed(e: &Error) -> (MetricOutcome, MetricOutcome) {
    (MetricOutcome::Failed(e.token()), MetricOutcome::Failed(e.token()))
}

fn run_one_trial(cfg: &SweepConfig, eps_index: usize, trial: usize) -> Vec<ExperimentRecord> {
    let epsilon = cfg.epsilon_grid[eps_index];
    let seed = instance_seed(cfg.master_seed, eps_index, trial);
    let spec = InstanceSpec {
        class: cfg.class,
        n: cfg.n,
        m: cfg.m,
        epsilon,
        delta: cfg.delta,
        seed,
    };
    let mut records = Vec::with_capacity(cfg.methods.len());
    let instance = match generate_instance(&spec) {
        Ok(i) => i,
        Err(e) => {
            // a failed generation flags every method row for this trial
            for &method in &cfg.methods {
                let (tau_norm, delta_norm) = failed(&e);
                records.push(ExperimentRecord {
                    class: cfg.class,
                    epsilon,
                    delta: cfg.delta,
                    trial,
                    method,
                    n: cfg.n,
                    m: 0,
                    seed,
                    tau_norm,
                    delta_norm,
                    wall_ms: 0,
                });
            }
            return records;
        }
    };
    let k = match cfg.k_policy {
        KPolicy::TruthM => instance.truth.k(),
        KPolicy::Fixed(k) => k,
    };
    for &method in &cfg.methods {
        let started = Instant::now();
        let outcome = run_method(&instance.matrix, method, k, method_seed(seed, method));
        let (tau_norm, delta_norm) = match &outcome {
            Err(e) => failed(e),
            Ok(result) => {
                let tau = match normalized_tau(&instance.matrix, &result.partition, &instance.truth)
                {
                    Ok(x) => MetricOutcome::Ok(x),
                    Err(Error::AbsorbingAggregate(_)) => MetricOutcome::Absorbing,
                    Err(e) => MetricOutcome::Failed(e.token()),
                };
                let delta =
                    match normalized_delta(&instance.matrix, &result.partition, &instance.truth) {
                        Ok(NormalizedDelta::Ratio(x)) => MetricOutcome::Ok(x),
                        Ok(NormalizedDelta::RawExactTruth(x)) => MetricOutcome::RawDelta(x),
                        Err(e) => MetricOutcome::Failed(e.token()),
                    };
                (tau, delta)
            }
        };
        let wall_ms = if cfg.record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        };
        records.push(ExperimentRecord {
            class: cfg.class,
            epsilon,
            delta: cfg.delta,
            trial,
            method,
            n: cfg.n,
            m: instance.truth.k(),
            seed,
            tau_norm,
            delta_norm,
            wall_ms,
        });
    }
    records
}

/// Runs the whole sweep, trials in parallel, records sorted by
/// (ε, trial, method) regardless of execution order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.epsilon_grid.len())
        .flat_map(|e| (0..cfg.trials).map(move |t| (e, t)))
        .collect();
    let mut records: Vec<ExperimentRecord> = jobs
        .par_iter()
        .flat_map_iter(|&(e, t)| run_one_trial(cfg, e, t))
        .collect();
    records.sort_by(|a, b| {
        a.epsilon
            .total_cmp(&b.epsilon)
            .then(a.trial.cmp(&b.trial))
            .then(a.method.cmp(&b.method))
    });
    Ok(records)
}

/// Renders the records as CSV with a provenance comment block.
pub fn records_to_csv(cfg: &SweepConfig, records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(&cfg.provenance());
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Mean and standard error of the `Ok` values for each (ε, method) cell,
/// plus a count of flagged rows.
pub fn summarize(records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8}  {:<13} {:>10} {:>10} {:>10} {:>10} {:>7}",
        "epsilon", "method", "tau_mean", "tau_se", "delta_mean", "delta_se", "flagged"
    );
    let mut cells: Vec<(f64, MethodKind)> = records
        .iter()
        .map(|r| (r.epsilon, r.method))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cells.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    for (eps, method) in cells {
        let rows: Vec<&ExperimentRecord> = records
            .iter()
            .filter(|r| r.epsilon == eps && r.method == method)
            .collect();
        let taus: Vec<f64> = rows.iter().filter_map(|r| r.tau_norm.ok_value()).collect();
        let deltas: Vec<f64> = rows.iter().filter_map(|r| r.delta_norm.ok_value()).collect();
        let flagged = rows
            .iter()
            .filter(|r| {
                r.tau_norm.ok_value().is_none() || r.delta_norm.ok_value().is_none()
            })
            .count();
        let fmt = |vals: &[f64]| -> (String, String) {
            if vals.is_empty() {
                return ("-".into(), "-".into());
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let se = if vals.len() > 1 {
                let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                    / (vals.len() - 1) as f64;
                (var / vals.len() as f64).sqrt()
            } else {
                0.0
            };
            (format!("{mean:.4}"), format!("{se:.4}"))
        };
        let (tm, ts) = fmt(&taus);
        let (dm, ds) = fmt(&deltas);
        let _ = writeln!(
            out,
            "{:>8}  {:<13} {:>10} {:>10} {:>10} {:>10} {:>7}",
            eps,
            method.token(),
            tm,
            ts,
            dm,
            ds,
            flagged
        );
    }
    out
}

/// Per-(ε, method) mean and standard error over `Ok` values of the selected
/// metric. Used by the acceptance suite.
pub fn cell_stats(
    records: &[ExperimentRecord],
    epsilon: f64,
    method: MethodKind,
    take_tau: bool,
) -> Option<(f64, f64, usize)> {
    let vals: Vec<f64> = records
        .iter()
        .filter(|r| r.epsilon == epsilon && r.method == method)
        .filter_map(|r| {
            if take_tau {
                r.tau_norm.ok_value()
            } else {
                r.delta_norm.ok_value()
            }
        })
        .collect();
    if vals.is_empty() {
        return None;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let se = if vals.len() > 1 {
        let var =
            vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        (var / vals.len() as f64).sqrt()
    } else {
        0.0
    };
    Some((mean, se, vals.len()))
}
