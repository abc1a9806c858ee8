//! Closed-loop episode engine and seeded batch harness.
//!
//! An episode runs the move-measure-update-plan loop: sample the ground-truth
//! plume through the sensor at the current position, update the particle
//! filter (with ESS-triggered resampling and rejuvenation), record posterior
//! summaries, pick the next action, move. Episodes are bit-reproducible from
//! the scenario (including its seed); batches fan episodes out over
//! independent per-cell seeds and aggregate metrics deterministically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{concentration, DomainBounds, Position, SourceTerm};
use crate::error::{ConfigError, CoreError};
use crate::estimator::{
    bayes_update, effective_sample_size, mcmc_move, posterior_mean, sample_prior,
    spatial_covariance_trace, systematic_resample, McmcConfig, MeasurementHistory,
    PosteriorSnapshot, PriorSpec,
};
use crate::planner::{select_action, Action, PlannerConfig, ScoredAction, Strategy};
use crate::seeds::{cell_seed, EpisodeSeeds};
use crate::sensor::{sample_measurement, SensorParams};

/// A run acquires the source when its final RMSE is below this bar (m).
pub const ACQUISITION_THRESHOLD_M: f64 = 3.0;

/// Position-error definition used for the RMSE series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmseMode {
    /// sqrt(mean of squared per-axis errors) over (x, y, z).
    #[default]
    PerCoordinate,
    /// Euclidean distance between estimate and truth.
    Euclidean,
}

/// Position error of a posterior mean against the true source position.
pub fn position_rmse(estimate: &Position, truth: &Position, mode: RmseMode) -> f64 {
    let d2 = estimate.dist2(truth);
    match mode {
        RmseMode::PerCoordinate => (d2 / 3.0).sqrt(),
        RmseMode::Euclidean => d2.sqrt(),
    }
}

/// Complete description of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub ground_truth: SourceTerm,
    pub bounds: DomainBounds,
    pub start: Position,
    pub prior: PriorSpec,
    pub sensor: SensorParams,
    pub particle_count: usize,
    /// Resample when ESS < ratio * N.
    pub resample_threshold_ratio: f64,
    pub planner: PlannerConfig,
    pub step_budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rmse_mode: RmseMode,
    #[serde(default)]
    pub mcmc: McmcConfig,
}

impl Scenario {
    /// Checks everything an episode needs. A zero step budget is allowed
    /// here (the record then holds only the initial row); [`Self::validate`]
    /// additionally requires a positive budget for configured runs.
    pub fn validate_for_run(&self) -> Result<(), ConfigError> {
        self.ground_truth.validate()?;
        self.bounds.validate()?;
        if !self.start.is_finite() {
            return Err(ConfigError::new("start", "coordinates must be finite"));
        }
        if !self.bounds.contains(&self.start) {
            return Err(ConfigError::new(
                "start",
                format!(
                    "start [{}, {}, {}] lies outside bounds x{:?} y{:?} z{:?}",
                    self.start.x,
                    self.start.y,
                    self.start.z,
                    self.bounds.x_range,
                    self.bounds.y_range,
                    self.bounds.z_range
                ),
            ));
        }
        self.prior.validate()?;
        self.sensor.validate()?;
        if self.particle_count < 2 {
            return Err(ConfigError::new("particle_count", "must be at least 2"));
        }
        if !(self.resample_threshold_ratio > 0.0 && self.resample_threshold_ratio <= 1.0) {
            return Err(ConfigError::new(
                "resample_threshold_ratio",
                "must lie in (0, 1]",
            ));
        }
        self.planner.validate()?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_for_run()?;
        if self.step_budget < 1 {
            return Err(ConfigError::new("step_budget", "must be at least 1"));
        }
        Ok(())
    }
}

/// One row of an episode trace: everything observed and decided at a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub time_index: usize,
    pub position: Position,
    pub value: f64,
    pub detected: bool,
    pub posterior_mean: SourceTerm,
    pub cov_trace: f64,
    /// Action taken from this row's position; None on the final row.
    pub action: Option<Action>,
    /// Per-candidate scores of the planning step (empty on the final row).
    pub scores: Vec<ScoredAction>,
}

/// Full per-step trace of an episode plus the terminal posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub steps: Vec<StepRow>,
    pub terminal_posterior: PosteriorSnapshot,
    pub warnings: Vec<String>,
}

/// Episode quality measures derived from a [`RunRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse_series: Vec<f64>,
    pub final_rmse: f64,
    pub source_acquired: bool,
    pub plume_acquired: bool,
    pub first_detection_step: Option<usize>,
}

/// Runs one closed-loop episode.
pub fn run_episode(sc: &Scenario) -> Result<RunRecord, CoreError> {
    sc.validate_for_run()?;
    let seeds = EpisodeSeeds::new(sc.seed);
    let mut ps = sample_prior(&sc.prior, sc.particle_count, &mut seeds.prior())?;
    let mut hist = MeasurementHistory::new();
    let mut warnings = Vec::new();
    let mut pos = sc.start;
    let mut steps = Vec::with_capacity(sc.step_budget + 1);
    let ess_threshold = sc.resample_threshold_ratio * sc.particle_count as f64;

    for k in 0..=sc.step_budget {
        let c_true = concentration(&pos, &sc.ground_truth);
        let m = sample_measurement(c_true, pos, k, &sc.sensor, &mut seeds.sensor(k));
        hist.push(m).expect("step indices are strictly increasing");

        match bayes_update(&ps, &m, &sc.sensor) {
            Ok((updated, _log_evidence)) => ps = updated,
            Err(e) => {
                let warning = format!(
                    "step {}: degenerate posterior; weights reset to uniform",
                    e.step
                );
                log::warn!("{warning}");
                warnings.push(warning);
                ps.reset_uniform();
            }
        }

        if effective_sample_size(&ps) < ess_threshold {
            ps = systematic_resample(&ps, &mut seeds.resample(k));
            let (moved, _diag) = mcmc_move(
                &ps,
                &hist,
                &sc.prior,
                &sc.sensor,
                &sc.mcmc,
                &mut seeds.mcmc(k, 0),
            );
            ps = moved;
        }

        let mean = posterior_mean(&ps);
        let cov_trace = spatial_covariance_trace(&ps);
        let (action, scores) = if k < sc.step_budget {
            let sel = select_action(
                &ps,
                &pos,
                &sc.bounds,
                &sc.sensor,
                &sc.planner,
                &mut seeds.planner(k),
            )?;
            (Some(sel.action), sel.scores)
        } else {
            (None, Vec::new())
        };

        steps.push(StepRow {
            time_index: k,
            position: pos,
            value: m.value,
            detected: m.detected,
            posterior_mean: mean,
            cov_trace,
            action,
            scores,
        });
        if let Some(a) = action {
            pos = a.apply(&pos);
        }
    }

    Ok(RunRecord {
        steps,
        terminal_posterior: PosteriorSnapshot::from(&ps),
        warnings,
    })
}

/// Derives metrics from a record; a pure function of (record, scenario).
pub fn compute_metrics(rec: &RunRecord, sc: &Scenario) -> Metrics {
    let truth = sc.ground_truth.source_pos;
    let rmse_series: Vec<f64> = rec
        .steps
        .iter()
        .map(|row| position_rmse(&row.posterior_mean.source_pos, &truth, sc.rmse_mode))
        .collect();
    let final_rmse = rmse_series.last().copied().unwrap_or(f64::NAN);
    let first_detection_step = rec
        .steps
        .iter()
        .find(|row| row.detected)
        .map(|row| row.time_index);
    Metrics {
        source_acquired: final_rmse < ACQUISITION_THRESHOLD_M,
        plume_acquired: first_detection_step.is_some(),
        rmse_series,
        final_rmse,
        first_detection_step,
    }
}

/// One (scenario, strategy, repeat) batch entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchCell {
    pub scenario: String,
    pub scenario_index: usize,
    pub strategy: Strategy,
    pub repeat: usize,
    pub seed: u64,
    pub final_rmse: Option<f64>,
    pub source_acquired: Option<bool>,
    pub plume_acquired: Option<bool>,
    pub first_detection_step: Option<usize>,
    pub error: Option<String>,
}

/// Per-strategy aggregate over a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub cells: usize,
    pub completed: usize,
    pub failures: usize,
    pub source_acquired: usize,
    pub plume_acquired: usize,
    pub source_acquisition_rate: f64,
    pub plume_acquisition_rate: f64,
    /// Mean RMSE per step over completed cells (aligned by step index).
    pub mean_rmse_series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub base_seed: u64,
    pub repeats: usize,
    pub strategies: Vec<Strategy>,
    pub scenarios: Vec<String>,
    pub cells: Vec<BatchCell>,
    pub summaries: Vec<StrategySummary>,
}

impl BatchReport {
    pub fn completed(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_none()).count()
    }

    pub fn summary(&self, strategy: Strategy) -> Option<&StrategySummary> {
        self.summaries.iter().find(|s| s.strategy == strategy)
    }
}

/// Runs every (scenario, strategy, repeat) cell with an independent derived
/// seed. Episodes may run concurrently; aggregation is a deterministic fold
/// in cell order. Individual episode failures are recorded and the batch
/// continues.
pub fn run_batch(
    scenarios: &[Scenario],
    strategies: &[Strategy],
    repeats: usize,
    base_seed: u64,
) -> Result<BatchReport, ConfigError> {
    if repeats < 1 {
        return Err(ConfigError::new("repeats", "must be at least 1"));
    }
    if scenarios.is_empty() || strategies.is_empty() {
        return Err(ConfigError::new(
            "batch",
            "at least one scenario and one strategy are required",
        ));
    }
    for sc in scenarios {
        sc.validate()
            .map_err(|e| ConfigError::new(format!("scenario.{}.{}", sc.name, e.field), e.message))?;
    }

    struct CellJob {
        scenario_index: usize,
        strategy_index: usize,
        repeat: usize,
        scenario: Scenario,
    }

    let mut jobs = Vec::new();
    for (si, sc) in scenarios.iter().enumerate() {
        for (gi, &strategy) in strategies.iter().enumerate() {
            for repeat in 0..repeats {
                let mut scenario = sc.clone();
                scenario.planner.strategy = strategy;
                scenario.seed = cell_seed(base_seed, si, gi, repeat);
                jobs.push(CellJob {
                    scenario_index: si,
                    strategy_index: gi,
                    repeat,
                    scenario,
                });
            }
        }
    }

    let outcomes: Vec<(BatchCell, Option<Vec<f64>>)> = jobs
        .par_iter()
        .map(|job| {
            let sc = &job.scenario;
            let mut cell = BatchCell {
                scenario: sc.name.clone(),
                scenario_index: job.scenario_index,
                strategy: sc.planner.strategy,
                repeat: job.repeat,
                seed: sc.seed,
                final_rmse: None,
                source_acquired: None,
                plume_acquired: None,
                first_detection_step: None,
                error: None,
            };
            match run_episode(sc) {
                Ok(rec) => {
                    let metrics = compute_metrics(&rec, sc);
                    cell.final_rmse = Some(metrics.final_rmse);
                    cell.source_acquired = Some(metrics.source_acquired);
                    cell.plume_acquired = Some(metrics.plume_acquired);
                    cell.first_detection_step = metrics.first_detection_step;
                    (cell, Some(metrics.rmse_series))
                }
                Err(e) => {
                    cell.error = Some(e.to_string());
                    (cell, None)
                }
            }
        })
        .collect();

    let mut summaries = Vec::with_capacity(strategies.len());
    for (gi, &strategy) in strategies.iter().enumerate() {
        let series: Vec<&Vec<f64>> = jobs
            .iter()
            .zip(&outcomes)
            .filter(|(job, (_, s))| job.strategy_index == gi && s.is_some())
            .map(|(_, (_, s))| s.as_ref().unwrap())
            .collect();
        let max_len = series.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut mean_rmse_series = Vec::with_capacity(max_len);
        for step in 0..max_len {
            let vals: Vec<f64> = series
                .iter()
                .filter_map(|s| s.get(step).copied())
                .collect();
            mean_rmse_series.push(vals.iter().sum::<f64>() / vals.len() as f64);
        }
        let cells: Vec<&BatchCell> = jobs
            .iter()
            .zip(&outcomes)
            .filter(|(job, _)| job.strategy_index == gi)
            .map(|(_, (c, _))| c)
            .collect();
        let completed = cells.iter().filter(|c| c.error.is_none()).count();
        let source_acquired = cells
            .iter()
            .filter(|c| c.source_acquired == Some(true))
            .count();
        let plume_acquired = cells
            .iter()
            .filter(|c| c.plume_acquired == Some(true))
            .count();
        summaries.push(StrategySummary {
            strategy,
            cells: cells.len(),
            completed,
            failures: cells.len() - completed,
            source_acquired,
            plume_acquired,
            source_acquisition_rate: if completed > 0 {
                source_acquired as f64 / completed as f64
            } else {
                0.0
            },
            plume_acquisition_rate: if completed > 0 {
                plume_acquired as f64 / completed as f64
            } else {
                0.0
            },
            mean_rmse_series,
        });
    }

    Ok(BatchReport {
        base_seed,
        repeats,
        strategies: strategies.to_vec(),
        scenarios: scenarios.iter().map(|s| s.name.clone()).collect(),
        cells: outcomes.into_iter().map(|(c, _)| c).collect(),
        summaries,
    })
}
