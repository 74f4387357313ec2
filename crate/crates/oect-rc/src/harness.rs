//! Seeded trial orchestration, parameter sweeps, statistics, and CSV export.
//!
//! A sweep is a pure function of the configuration and the master seed:
//! every trial derives its own seed from `(master_seed, value_index,
//! trial_index)`, so trials can run in parallel and still reproduce the
//! sequential results bit for bit.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{BaselineConfig, TanhReservoir};
use crate::dynamics::{run_closed_loop, run_open_loop, OectReservoir, Reservoir};
use crate::network::{
    effective_coupling, sample_device_array, sample_input_matrix, sample_topology,
    ParamDistributions,
};
use crate::readout::{ridge_fit, TrainingWindow};
use crate::tasks::{
    forecast_horizon, integrate_rk4, sample_lorenz_ic, ForecastResult, LorenzParams, TaskSeries,
};

/// Which reservoir implementation a trial uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReservoirKind {
    Oect,
    Tanh,
}

impl FromStr for ReservoirKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oect" => Ok(Self::Oect),
            "tanh" => Ok(Self::Tanh),
            other => Err(format!("unknown reservoir kind {other:?}")),
        }
    }
}

/// Full description of one experiment. All durations are in task time
/// units; one task unit maps to one second of device time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub kind: ReservoirKind,
    /// Reservoir size.
    pub n: usize,
    /// Connection probability of the directed Erdős–Rényi topology.
    pub p: f64,
    pub param_distributions: ParamDistributions,
    /// Input-matrix scale in volts per task unit.
    pub sigma_in: f64,
    /// Ridge regularization weight.
    pub alpha: f64,
    /// Integration and sampling step.
    pub dt: f64,
    /// Post-washout fitting duration.
    pub train_duration: f64,
    /// Transient discarded before fitting.
    pub washout_duration: f64,
    /// Closed-loop evaluation window.
    pub predict_duration: f64,
    /// Forecast-horizon tolerance.
    pub delta: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// Drop the gate-leak terms from the coupling matrices.
    pub leak_neglected: bool,
    /// Weighting-resistor range (Ohm).
    pub r_w_low: f64,
    pub r_w_high: f64,
    pub lorenz: LorenzParams,
    pub baseline: BaselineConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ReservoirKind::Oect,
            n: 100,
            p: 0.1,
            param_distributions: ParamDistributions::default(),
            sigma_in: 1e-3,
            alpha: 1e-7,
            dt: 0.01,
            train_duration: 2000.0,
            washout_duration: 10.0,
            predict_duration: 25.0,
            delta: 5.0,
            trials: 20,
            master_seed: 0,
            leak_neglected: true,
            r_w_low: 100.0,
            r_w_high: 500.0,
            lorenz: LorenzParams::default(),
            baseline: BaselineConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn washout_steps(&self) -> usize {
        (self.washout_duration / self.dt).round() as usize
    }
    pub fn fit_steps(&self) -> usize {
        (self.train_duration / self.dt).round() as usize
    }
    pub fn predict_steps(&self) -> usize {
        (self.predict_duration / self.dt).round() as usize
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    N,
    VpMean,
    P,
    Alpha,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::N => "n",
            Self::VpMean => "v_p_mean",
            Self::P => "p",
            Self::Alpha => "alpha",
        }
    }

    /// Returns a copy of `cfg` with this axis set to `value`.
    pub fn apply(&self, cfg: &ExperimentConfig, value: f64) -> ExperimentConfig {
        let mut out = cfg.clone();
        match self {
            Self::N => out.n = value.round() as usize,
            Self::VpMean => out.param_distributions.v_p.mean = value,
            Self::P => out.p = value,
            Self::Alpha => out.alpha = value,
        }
        out
    }
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(Self::N),
            "v_p_mean" => Ok(Self::VpMean),
            "p" => Ok(Self::P),
            "alpha" => Ok(Self::Alpha),
            other => Err(format!("unknown sweep axis {other:?} (expected n, v_p_mean, p, alpha)")),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing results csv: {0}")]
    Parse(String),
}

/// Outcome of one trial; failures carry the error text instead of a
/// forecast horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub value: f64,
    pub result: Result<ForecastResult, String>,
}

/// Per-value forecast-horizon statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean_fh: f64,
    pub std_fh: f64,
    /// Trials that produced a forecast horizon.
    pub trials: usize,
    pub failures: usize,
}

/// Aggregated sweep results, rows in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

/// Stable per-trial seed derivation (splitmix64-style mixing). Must never
/// change: identical `(master_seed, value_index, trial_index)` inputs are
/// the reproducibility contract.
pub fn derive_seed(master_seed: u64, value_index: u64, trial_index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master_seed) ^ value_index) ^ trial_index)
}

/// Everything a trial produces, for callers that want more than the
/// forecast horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDetail {
    /// Closed-loop predictions, first row at one step past training.
    pub predictions: TaskSeries,
    /// Ground-truth continuation on the same grid.
    pub truth: TaskSeries,
    pub forecast: ForecastResult,
}

/// Runs the full pipeline once with an externally supplied generator:
/// sample a reservoir architecture and an initial condition, train the
/// readout open-loop, predict closed-loop, score the forecast horizon.
pub fn run_pipeline(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<ForecastResult, String> {
    run_pipeline_detailed(cfg, rng).map(|d| d.forecast)
}

/// As [`run_pipeline`], but returns the predicted and true trajectories
/// alongside the forecast horizon.
pub fn run_pipeline_detailed(
    cfg: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrialDetail, String> {
    let washout = cfg.washout_steps();
    let fit = cfg.fit_steps();
    let predict = cfg.predict_steps();
    if fit == 0 || predict == 0 {
        return Err("train_duration and predict_duration must cover at least one step".into());
    }

    let mut reservoir: Box<dyn Reservoir> = match cfg.kind {
        ReservoirKind::Oect => {
            let devices = sample_device_array(&cfg.param_distributions, cfg.n, rng)
                .map_err(|e| e.to_string())?;
            let net = sample_topology(cfg.n, cfg.p, rng, cfg.r_w_low, cfg.r_w_high)
                .with_gate_resistances(&devices);
            let coupling = effective_coupling(&net, cfg.leak_neglected);
            let w_in = sample_input_matrix(cfg.n, 3, cfg.sigma_in, rng);
            Box::new(OectReservoir::cold_start(devices, coupling, w_in, cfg.dt))
        }
        ReservoirKind::Tanh => Box::new(TanhReservoir::sample(
            cfg.n,
            3,
            cfg.p,
            &cfg.baseline,
            cfg.dt,
            rng,
        )),
    };

    let ic = sample_lorenz_ic(rng, &cfg.lorenz);
    let total = washout + fit + predict;
    let truth = integrate_rk4(&cfg.lorenz, ic, cfg.dt, total).map_err(|e| e.to_string())?;

    // Drive with u(t); pair the post-step state with the target u(t + dt).
    let open_steps = washout + fit;
    let drive = DMatrix::from_fn(open_steps, 3, |r, c| truth.rows[r][c]);
    let targets = DMatrix::from_fn(open_steps, 3, |r, c| truth.rows[r + 1][c]);

    let history = run_open_loop(reservoir.as_mut(), &drive).map_err(|e| e.to_string())?;
    let window = TrainingWindow {
        washout_steps: washout,
        fit_steps: fit,
    };
    let w_out = ridge_fit(&history, &targets, cfg.alpha, &window).map_err(|e| e.to_string())?;

    let predictions = run_closed_loop(reservoir.as_mut(), &w_out, predict).map_err(|e| e.to_string())?;
    let pred_series = TaskSeries {
        dt: cfg.dt,
        rows: (0..predict)
            .map(|j| [predictions[(j, 0)], predictions[(j, 1)], predictions[(j, 2)]])
            .collect(),
    };
    let truth_series = TaskSeries {
        dt: cfg.dt,
        rows: truth.rows[open_steps + 1..=total].to_vec(),
    };
    let forecast =
        forecast_horizon(&truth_series, &pred_series, cfg.delta).map_err(|e| e.to_string())?;
    Ok(TrialDetail {
        predictions: pred_series,
        truth: truth_series,
        forecast,
    })
}

/// Runs trial `trial_index` of the base configuration (axis value index 0).
pub fn run_trial(cfg: &ExperimentConfig, trial_index: usize) -> TrialRecord {
    run_trial_at(cfg, 0, 0.0, trial_index)
}

fn run_trial_at(
    cfg: &ExperimentConfig,
    value_index: usize,
    value: f64,
    trial_index: usize,
) -> TrialRecord {
    let seed = derive_seed(cfg.master_seed, value_index as u64, trial_index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TrialRecord {
        trial: trial_index,
        value,
        result: run_pipeline(cfg, &mut rng),
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn aggregate(value: f64, records: &[TrialRecord]) -> SweepRow {
    let horizons: Vec<f64> = records
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|f| f.horizon))
        .collect();
    let failures = records.len() - horizons.len();
    if horizons.is_empty() {
        return SweepRow {
            value,
            mean_fh: f64::NAN,
            std_fh: f64::NAN,
            trials: 0,
            failures,
        };
    }
    let n = horizons.len() as f64;
    let mean = kahan_sum(horizons.iter().copied()) / n;
    let var = kahan_sum(horizons.iter().map(|h| (h - mean).powi(2))) / n;
    SweepRow {
        value,
        mean_fh: mean,
        std_fh: var.sqrt(),
        trials: horizons.len(),
        failures,
    }
}

/// Runs `cfg.trials` trials for every axis value and aggregates the
/// forecast-horizon statistics. Trials run in parallel; results are
/// reduced in trial order.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> SweepTable {
    assert!(!values.is_empty());
    let rows = values
        .iter()
        .enumerate()
        .map(|(vi, &value)| {
            let trial_cfg = axis.apply(cfg, value);
            let records: Vec<TrialRecord> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial_at(&trial_cfg, vi, value, t))
                .collect();
            aggregate(value, &records)
        })
        .collect();
    SweepTable {
        axis: axis.name().to_string(),
        rows,
    }
}

/// Like [`sweep`] but also returns every per-trial record.
pub fn sweep_with_records(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> (SweepTable, Vec<TrialRecord>) {
    assert!(!values.is_empty());
    let mut all = Vec::new();
    let mut rows = Vec::new();
    for (vi, &value) in values.iter().enumerate() {
        let trial_cfg = axis.apply(cfg, value);
        let records: Vec<TrialRecord> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial_at(&trial_cfg, vi, value, t))
            .collect();
        rows.push(aggregate(value, &records));
        all.extend(records);
    }
    (
        SweepTable {
            axis: axis.name().to_string(),
            rows,
        },
        all,
    )
}

impl SweepTable {
    /// Byte-stable CSV rendering with header
    /// `axis,value,mean_fh,std_fh,trials,failures`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,value,mean_fh,std_fh,trials,failures\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.axis, row.value, row.mean_fh, row.std_fh, row.trials, row.failures
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| HarnessError::Parse("empty".into()))?;
        if header != "axis,value,mean_fh,std_fh,trials,failures" {
            return Err(HarnessError::Parse(format!("unexpected header {header:?}")));
        }
        let mut axis = String::new();
        let mut rows = Vec::new();
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 6 {
                return Err(HarnessError::Parse(format!("bad row {line:?}")));
            }
            axis = cells[0].to_string();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| HarnessError::Parse(format!("bad number {s:?}")))
            };
            rows.push(SweepRow {
                value: num(cells[1])?,
                mean_fh: num(cells[2])?,
                std_fh: num(cells[3])?,
                trials: cells[4]
                    .parse()
                    .map_err(|_| HarnessError::Parse(format!("bad count {:?}", cells[4])))?,
                failures: cells[5]
                    .parse()
                    .map_err(|_| HarnessError::Parse(format!("bad count {:?}", cells[5])))?,
            });
        }
        Ok(Self { axis, rows })
    }
}

/// Writes the table as CSV to `path`.
pub fn export_results(table: &SweepTable, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, table.to_csv()).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Optional per-trial dump with header `trial,value,fh,exceeded,failed`.
pub fn write_trial_records(records: &[TrialRecord], path: &Path) -> Result<(), HarnessError> {
    let mut out = String::from("trial,value,fh,exceeded,failed\n");
    for r in records {
        match &r.result {
            Ok(f) => out.push_str(&format!(
                "{},{},{},{},false\n",
                r.trial, r.value, f.horizon, f.exceeded
            )),
            Err(_) => out.push_str(&format!("{},{},,,true\n", r.trial, r.value)),
        }
    }
    std::fs::write(path, out).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Baseline pipeline entry point: forces the tanh reservoir kind and runs
/// one trial with the supplied generator.
pub fn run_baseline_pipeline(
    cfg: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ForecastResult, String> {
    let mut cfg = cfg.clone();
    cfg.kind = ReservoirKind::Tanh;
    run_pipeline(&cfg, rng)
}
