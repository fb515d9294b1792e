//! Timing sweeps over build configurations.
//!
//! Each configuration is run `reps` times; the highest and lowest sample are
//! discarded and the rest averaged. Only tree growth is timed — dataset
//! loading stays outside the clock. Every run's tree text must equal the
//! sequential baseline's: a benchmark that produces a different tree is a
//! correctness failure, not a data point.

use std::time::Instant;

use crate::dataset::TrainingSet;
use crate::error::{Error, Result};
use crate::parallel::{build_parallel, BuildParams, CostModel, Strategy};
use crate::runtime::{FarmConfig, SchedulerKind};
use crate::tree::GrowthParams;

/// The sweep: which configurations to time and how often.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub strategies: Vec<Strategy>,
    pub workers: Vec<usize>,
    pub schedulers: Vec<SchedulerKind>,
    pub cost_models: Vec<CostModel>,
    pub reps: usize,
    pub qsize: usize,
    pub growth: GrowthParams,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            strategies: vec![Strategy::Seq, Strategy::Np, Strategy::Nap],
            workers: vec![3],
            schedulers: vec![SchedulerKind::Weighted],
            cost_models: vec![CostModel::NSquared],
            reps: 5,
            qsize: 4096,
            growth: GrowthParams::default(),
        }
    }
}

/// One measured configuration. `workers` is 0 and the scheduler/cost-model
/// labels are "-" for the sequential baseline; the cost-model label is also
/// "-" for node-parallel rows, which never consult a cost model.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub strategy: Strategy,
    pub workers: usize,
    pub scheduler: Option<SchedulerKind>,
    pub cost_model: Option<CostModel>,
    pub mean_seconds: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Trimmed-mean seconds of the sequential baseline.
    pub sequential_seconds: f64,
}

/// Mean after dropping exactly one highest and one lowest sample.
pub fn trimmed_mean(samples: &[f64]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InvalidConfig(
            "trimmed mean needs at least 3 samples".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kept = &sorted[1..sorted.len() - 1];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Runs the sweep. The sequential baseline is always measured (it anchors
/// the speedup column) and appears as a row when `Seq` is in the plan.
pub fn run_bench(ts: &TrainingSet, plan: &BenchPlan) -> Result<BenchReport> {
    if plan.reps < 3 {
        return Err(Error::InvalidConfig("bench needs at least 3 repetitions".into()));
    }
    if plan.strategies.is_empty() {
        return Err(Error::InvalidConfig("bench needs at least one strategy".into()));
    }

    let seq_params = BuildParams {
        strategy: Strategy::Seq,
        growth: plan.growth,
        ..Default::default()
    };
    let (sequential_seconds, reference) = measure(ts, &seq_params, plan.reps, None)?;

    let mut rows = Vec::new();
    for &strategy in &plan.strategies {
        match strategy {
            Strategy::Seq => rows.push(BenchRow {
                strategy,
                workers: 0,
                scheduler: None,
                cost_model: None,
                mean_seconds: sequential_seconds,
                speedup: 1.0,
            }),
            Strategy::Np => {
                for &workers in &plan.workers {
                    for &scheduler in &plan.schedulers {
                        let params = BuildParams {
                            strategy,
                            farm: FarmConfig { workers, qsize: plan.qsize, scheduler },
                            cost_model: CostModel::default(),
                            growth: plan.growth,
                        };
                        let (mean, _) = measure(ts, &params, plan.reps, Some(&reference))?;
                        rows.push(BenchRow {
                            strategy,
                            workers,
                            scheduler: Some(scheduler),
                            cost_model: None,
                            mean_seconds: mean,
                            speedup: sequential_seconds / mean,
                        });
                    }
                }
            }
            Strategy::Nap => {
                for &workers in &plan.workers {
                    for &scheduler in &plan.schedulers {
                        for &cost_model in &plan.cost_models {
                            let params = BuildParams {
                                strategy,
                                farm: FarmConfig { workers, qsize: plan.qsize, scheduler },
                                cost_model,
                                growth: plan.growth,
                            };
                            let (mean, _) = measure(ts, &params, plan.reps, Some(&reference))?;
                            rows.push(BenchRow {
                                strategy,
                                workers,
                                scheduler: Some(scheduler),
                                cost_model: Some(cost_model),
                                mean_seconds: mean,
                                speedup: sequential_seconds / mean,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(BenchReport { rows, sequential_seconds })
}

/// Times `reps` builds and returns (trimmed mean seconds, tree text).
/// When a reference text is given, every run must reproduce it.
fn measure(
    ts: &TrainingSet,
    params: &BuildParams,
    reps: usize,
    reference: Option<&str>,
) -> Result<(f64, String)> {
    let mut samples = Vec::with_capacity(reps);
    let mut text = String::new();
    for rep in 0..reps {
        let start = Instant::now();
        let tree = build_parallel(ts, params)?;
        samples.push(start.elapsed().as_secs_f64());
        let rendered = tree.render(ts);
        if let Some(expected) = reference {
            if rendered != expected {
                return Err(Error::TreeMismatch(format!(
                    "{} with {} workers diverged from the sequential tree on repetition {rep}",
                    params.strategy, params.farm.workers
                )));
            }
        } else if rep > 0 && rendered != text {
            return Err(Error::TreeMismatch(
                "sequential build is unstable across repetitions".into(),
            ));
        }
        text = rendered;
    }
    Ok((trimmed_mean(&samples)?, text))
}

impl BenchReport {
    /// CSV with the columns strategy, workers, scheduler, cost_model,
    /// mean_seconds, speedup.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,workers,scheduler,cost_model,mean_seconds,speedup\n");
        for row in &self.rows {
            let scheduler =
                row.scheduler.map_or_else(|| "-".to_string(), |s| s.to_string());
            let cost_model =
                row.cost_model.map_or_else(|| "-".to_string(), |m| m.to_string());
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.4}\n",
                row.strategy, row.workers, scheduler, cost_model, row.mean_seconds, row.speedup
            ));
        }
        out
    }

    /// Gnuplot-style blocks: one per (strategy, scheduler, cost model),
    /// lines of `workers speedup` ordered by worker count.
    pub fn to_plot_data(&self) -> String {
        use std::collections::BTreeMap;
        let mut groups: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
        for row in &self.rows {
            if row.strategy == Strategy::Seq {
                continue;
            }
            let scheduler =
                row.scheduler.map_or_else(|| "-".to_string(), |s| s.to_string());
            let cost_model =
                row.cost_model.map_or_else(|| "-".to_string(), |m| m.to_string());
            let key = format!("{} {} {}", row.strategy, scheduler, cost_model);
            groups.entry(key).or_default().push((row.workers, row.speedup));
        }
        let mut out = String::new();
        for (key, mut points) in groups {
            points.sort_by_key(|&(w, _)| w);
            out.push_str(&format!("# {key}\n"));
            for (workers, speedup) in points {
                out.push_str(&format!("{workers} {speedup:.4}\n"));
            }
            out.push('\n');
        }
        out
    }
}
