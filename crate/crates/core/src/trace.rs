//! File formats for run traces and batch reports.
//!
//! Every output embeds the effective scenario/batch configuration so a result
//! is reproducible from its own header. CSV floats use Rust's shortest
//! round-trip formatting, so identical runs serialize byte-identically.

use serde::Serialize;

use crate::simulator::{compute_metrics, BatchReport, Metrics, RunRecord, Scenario};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// Column order of the per-step trace CSV.
pub const TRACE_COLUMNS: &str =
    "step,x,y,z,z_value,detected,mean_sx,mean_sy,mean_sz,mean_q,cov_trace,action_heading_deg,rmse";

fn config_header<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    format!("# schema_version: {TRACE_SCHEMA_VERSION}\n# config: {json}\n")
}

/// Per-step trace CSV: one row per step, documented column order, config in
/// `#`-prefixed header lines.
pub fn trace_csv(rec: &RunRecord, sc: &Scenario) -> String {
    let metrics = compute_metrics(rec, sc);
    let mut out = config_header(sc);
    out.push_str(TRACE_COLUMNS);
    out.push('\n');
    for (row, rmse) in rec.steps.iter().zip(&metrics.rmse_series) {
        let heading = row
            .action
            .map(|a| a.heading_deg.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.time_index,
            row.position.x,
            row.position.y,
            row.position.z,
            row.value,
            row.detected as u8,
            row.posterior_mean.source_pos.x,
            row.posterior_mean.source_pos.y,
            row.posterior_mean.source_pos.z,
            row.posterior_mean.release_rate,
            row.cov_trace,
            heading,
            rmse,
        ));
    }
    out
}

#[derive(Serialize)]
struct PosteriorDocument<'a> {
    schema_version: u32,
    config: &'a Scenario,
    warnings: &'a [String],
    posterior: &'a crate::estimator::PosteriorSnapshot,
}

/// Terminal posterior as JSON (parameter arrays plus weights).
pub fn posterior_json(rec: &RunRecord, sc: &Scenario) -> String {
    serde_json::to_string_pretty(&PosteriorDocument {
        schema_version: TRACE_SCHEMA_VERSION,
        config: sc,
        warnings: &rec.warnings,
        posterior: &rec.terminal_posterior,
    })
    .expect("posterior serializes")
}

#[derive(Serialize)]
struct MetricsDocument<'a> {
    schema_version: u32,
    config: &'a Scenario,
    metrics: &'a Metrics,
}

/// Episode metrics as JSON.
pub fn metrics_json(metrics: &Metrics, sc: &Scenario) -> String {
    serde_json::to_string_pretty(&MetricsDocument {
        schema_version: TRACE_SCHEMA_VERSION,
        config: sc,
        metrics,
    })
    .expect("metrics serialize")
}

#[derive(Serialize)]
struct BatchDocument<'a> {
    schema_version: u32,
    report: &'a BatchReport,
}

/// Batch report as JSON.
pub fn batch_report_json(report: &BatchReport) -> String {
    serde_json::to_string_pretty(&BatchDocument {
        schema_version: TRACE_SCHEMA_VERSION,
        report,
    })
    .expect("report serializes")
}

/// Plot-ready CSV of the batch: step plus mean RMSE per strategy.
pub fn batch_rmse_csv(report: &BatchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema_version: {TRACE_SCHEMA_VERSION}\n"));
    out.push_str("step");
    for s in &report.summaries {
        out.push_str(&format!(",rmse_{}", s.strategy.name()));
    }
    out.push('\n');
    let max_len = report
        .summaries
        .iter()
        .map(|s| s.mean_rmse_series.len())
        .max()
        .unwrap_or(0);
    for step in 0..max_len {
        out.push_str(&step.to_string());
        for s in &report.summaries {
            match s.mean_rmse_series.get(step) {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{DomainBounds, Position, SourceTerm};
    use crate::estimator::{McmcConfig, ParamPrior, PriorSpec};
    use crate::planner::PlannerConfig;
    use crate::sensor::{DetectNoise, SensorParams};
    use crate::simulator::{run_batch, run_episode, RmseMode, Scenario};
    use crate::planner::Strategy;

    fn scenario() -> Scenario {
        Scenario {
            name: "trace-test".into(),
            ground_truth: SourceTerm {
                source_pos: Position::new(20.0, 20.0, 1.0),
                release_rate: 5.0,
                wind_speed: 4.0,
                wind_dir: 0.0,
                diffusivity: 1.0,
                particle_lifetime: 8.0,
            },
            bounds: DomainBounds::default(),
            start: Position::new(2.0, 2.0, 4.0),
            prior: PriorSpec {
                source_x: ParamPrior::Uniform { lo: 0.0, hi: 50.0 },
                source_y: ParamPrior::Uniform { lo: 0.0, hi: 50.0 },
                source_z: ParamPrior::Uniform { lo: 0.0, hi: 8.0 },
                release_rate: ParamPrior::Gamma {
                    shape: 2.0,
                    scale: 5.0,
                },
                wind_speed: ParamPrior::Fixed(4.0),
                wind_dir: ParamPrior::Fixed(0.0),
                diffusivity: ParamPrior::Fixed(1.0),
                particle_lifetime: ParamPrior::Fixed(8.0),
            },
            sensor: SensorParams {
                threshold: 5e-4,
                detect_prob: 0.7,
                noise_std_detect: DetectNoise::Proportional {
                    coeff: 0.1,
                    offset: 2e-5,
                },
                noise_std_nondetect: 1e-4,
            },
            particle_count: 50,
            resample_threshold_ratio: 0.5,
            planner: PlannerConfig {
                strategy: Strategy::Mpc,
                ..PlannerConfig::default()
            },
            step_budget: 6,
            seed: 3,
            rmse_mode: RmseMode::default(),
            mcmc: McmcConfig::default(),
        }
    }

    #[test]
    fn trace_has_header_config_and_one_row_per_step() {
        let sc = scenario();
        let rec = run_episode(&sc).unwrap();
        let csv = trace_csv(&rec, &sc);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# schema_version: 1"));
        assert!(lines[1].starts_with("# config: "));
        assert_eq!(lines[2], TRACE_COLUMNS);
        assert_eq!(lines.len(), 3 + sc.step_budget + 1);
        // The embedded config parses back to the scenario.
        let embedded: Scenario =
            serde_json::from_str(lines[1].strip_prefix("# config: ").unwrap()).unwrap();
        assert_eq!(embedded, sc);
        // Final row has an empty action column.
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        assert_eq!(last[11], "");
    }

    #[test]
    fn identical_runs_serialize_byte_identically() {
        let sc = scenario();
        let a = trace_csv(&run_episode(&sc).unwrap(), &sc);
        let b = trace_csv(&run_episode(&sc).unwrap(), &sc);
        assert_eq!(a, b);
    }

    #[test]
    fn batch_outputs_are_deterministic() {
        let sc = scenario();
        let strategies = [Strategy::Mpc, Strategy::Entrotaxis];
        let r1 = run_batch(&[sc.clone()], &strategies, 2, 11).unwrap();
        let r2 = run_batch(&[sc], &strategies, 2, 11).unwrap();
        assert_eq!(batch_report_json(&r1), batch_report_json(&r2));
        assert_eq!(batch_rmse_csv(&r1), batch_rmse_csv(&r2));
        let csv = batch_rmse_csv(&r1);
        assert!(csv.lines().nth(1).unwrap().starts_with("step,rmse_mpc,rmse_entrotaxis"));
    }

    #[test]
    fn posterior_and_metrics_documents_embed_config() {
        let sc = scenario();
        let rec = run_episode(&sc).unwrap();
        let post = posterior_json(&rec, &sc);
        assert!(post.contains("\"schema_version\""));
        assert!(post.contains("\"config\""));
        let metrics = compute_metrics(&rec, &sc);
        let mj = metrics_json(&metrics, &sc);
        assert!(mj.contains("\"final_rmse\""));
    }
}
