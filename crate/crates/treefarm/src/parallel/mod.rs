//! Parallel tree growth over the farm runtime.
//!
//! Two task granularities stream through the farm. With nodes
//! parallelization (NP) every task is one node's full split. With nodes &
//! attributes parallelization (NAP) the emitter runs the cheap pre/post
//! phases itself and fans the per-attribute gain computations out as
//! separate tasks, falling back to whole-node tasks where a cost model says
//! attribute tasks would not pay; the root is always attribute-parallelized.
//! Every task is weighted with its node's case count so the weighted
//! scheduler can balance load.

use std::sync::Arc;

use crate::dataset::TrainingSet;
use crate::error::{Error, Result};
use crate::runtime::{run_farm, EmitterAction, FarmConfig, Outbox, Task};
use crate::tree::node::{Node, NodeOutcome};
use crate::tree::{build_sequential, make_root, DecisionTree, GrowthParams};

/// How tree growth is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Single-context breadth-first growth.
    Seq,
    /// Nodes parallelization: one task per node.
    Np,
    /// Nodes & attributes parallelization: per-attribute tasks where the
    /// cost model approves, node tasks elsewhere.
    Nap,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Seq => "seq",
            Strategy::Np => "np",
            Strategy::Nap => "nap",
        })
    }
}

/// Per-node predicate choosing attribute-level over node-level tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostModel {
    /// Attribute tasks whenever the node holds more than `alpha` cases.
    Alpha { alpha: u64 },
    /// Attribute tasks while splitting the node costs more than scanning
    /// the whole training set: |T| < c·r·log₂r.
    NLogN,
    /// As above with a quadratic split estimate: |T| < c·r².
    NSquared,
}

impl CostModel {
    pub const DEFAULT_ALPHA: u64 = 1000;
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::NSquared
    }
}

impl std::fmt::Display for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostModel::Alpha { .. } => "alpha",
            CostModel::NLogN => "nlogn",
            CostModel::NSquared => "nsq",
        })
    }
}

/// Decides attribute parallelization for a node with `c` considered
/// attributes and `r` cases, in a training set of `total_cases` cases.
/// Nodes of at most one case never take the attribute path.
pub fn build_att_test(model: CostModel, total_cases: usize, c: usize, r: usize) -> bool {
    if r <= 1 {
        return false;
    }
    match model {
        CostModel::Alpha { alpha } => alpha < r as u64,
        CostModel::NLogN => (total_cases as f64) < c as f64 * r as f64 * (r as f64).log2(),
        CostModel::NSquared => (total_cases as u128) < c as u128 * (r as u128) * (r as u128),
    }
}

/// Everything `build_parallel` needs besides the data.
#[derive(Debug, Clone, Copy)]
pub struct BuildParams {
    pub strategy: Strategy,
    pub farm: FarmConfig,
    pub cost_model: CostModel,
    pub growth: GrowthParams,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            strategy: Strategy::Nap,
            farm: FarmConfig::default(),
            cost_model: CostModel::default(),
            growth: GrowthParams::default(),
        }
    }
}

/// One unit of tree-growth work flowing through the farm.
enum BuildTask {
    /// Full split of one node.
    Node(Arc<Node>),
    /// Gain of one considered attribute of one node.
    Att { node: Arc<Node>, attr: usize },
}

/// Grows the tree with the configured strategy. `Seq` runs the plain
/// sequential builder; the parallel strategies produce the identical tree.
pub fn build_parallel(ts: &TrainingSet, params: &BuildParams) -> Result<DecisionTree> {
    match params.strategy {
        Strategy::Seq => build_sequential(ts, params.growth),
        Strategy::Np => {
            let root = make_root(ts)?;
            run_np(ts, root.clone(), params)?;
            DecisionTree::from_root(root)
        }
        Strategy::Nap => {
            let root = make_root(ts)?;
            run_nap(ts, root.clone(), params)?;
            DecisionTree::from_root(root)
        }
    }
}

fn weighted(payload: BuildTask, cases: usize) -> Task<BuildTask> {
    let mut task = Task::new(payload);
    task.set_weight(cases as f64);
    task
}

fn run_np(ts: &TrainingSet, root: Arc<Node>, params: &BuildParams) -> Result<()> {
    let growth = params.growth;
    let mut in_flight = 0u64;
    run_farm(
        params.farm,
        |input: Option<Task<BuildTask>>, outbox: &mut Outbox<BuildTask>| {
            match input {
                None => {
                    outbox.emit(weighted(BuildTask::Node(root.clone()), root.case_count()));
                    in_flight += 1;
                }
                Some(task) => {
                    in_flight -= 1;
                    let BuildTask::Node(node) = task.into_payload() else {
                        return Err(Error::Protocol("attribute task in node-only stream"));
                    };
                    if let Some(NodeOutcome::Internal { children, .. }) = node.outcome() {
                        for child in children {
                            outbox.emit(weighted(BuildTask::Node(child.clone()), child.case_count()));
                            in_flight += 1;
                        }
                    }
                }
            }
            Ok(if in_flight == 0 { EmitterAction::End } else { EmitterAction::Continue })
        },
        |task| {
            let BuildTask::Node(node) = task.payload() else {
                return Err(Error::Protocol("attribute task in node-only stream"));
            };
            node.full_split(ts, growth.min_cases, growth.gain_options())?;
            Ok(task)
        },
    )?;
    Ok(())
}

fn run_nap(ts: &TrainingSet, root: Arc<Node>, params: &BuildParams) -> Result<()> {
    let growth = params.growth;
    let model = params.cost_model;
    let total_cases = ts.case_count();
    let mut in_flight = 0u64;

    // Fans one open node out as attribute tasks (post runs when the last
    // returns). Nodes with no attributes left resolve on the spot.
    let fan_out =
        |node: &Arc<Node>, outbox: &mut Outbox<BuildTask>, in_flight: &mut u64| -> Result<()> {
            let considered = node.considered();
            if considered.is_empty() {
                return node.split_post(ts);
            }
            node.set_att_tasks(considered.len() as u32);
            for &attr in considered {
                outbox.emit(weighted(
                    BuildTask::Att { node: node.clone(), attr },
                    node.case_count(),
                ));
                *in_flight += 1;
            }
            Ok(())
        };

    // A node's split just finished: push its children onward, each by the
    // granularity the cost model picks.
    let expand = |node: &Arc<Node>, outbox: &mut Outbox<BuildTask>, in_flight: &mut u64| -> Result<()> {
        let Some(NodeOutcome::Internal { children, .. }) = node.outcome() else {
            return Ok(());
        };
        for child in children {
            let c = child.considered().len();
            let r = child.case_count();
            if !build_att_test(model, total_cases, c, r) {
                outbox.emit(weighted(BuildTask::Node(child.clone()), r));
                *in_flight += 1;
            } else if !child.split_pre(ts, growth.min_cases)? {
                fan_out(child, outbox, in_flight)?;
            }
        }
        Ok(())
    };

    run_farm(
        params.farm,
        |input: Option<Task<BuildTask>>, outbox: &mut Outbox<BuildTask>| {
            match input {
                None => {
                    // The root always takes the attribute path.
                    if !root.split_pre(ts, growth.min_cases)? {
                        fan_out(&root, outbox, &mut in_flight)?;
                    }
                }
                Some(task) => {
                    in_flight -= 1;
                    match task.into_payload() {
                        BuildTask::Att { node, .. } => {
                            if node.dec_att_tasks()? == 0 {
                                node.split_post(ts)?;
                                expand(&node, outbox, &mut in_flight)?;
                            }
                        }
                        BuildTask::Node(node) => expand(&node, outbox, &mut in_flight)?,
                    }
                }
            }
            Ok(if in_flight == 0 { EmitterAction::End } else { EmitterAction::Continue })
        },
        |task| {
            match task.payload() {
                BuildTask::Node(node) => {
                    node.full_split(ts, growth.min_cases, growth.gain_options())?
                }
                BuildTask::Att { node, attr } => {
                    node.split_att(*attr, ts, growth.gain_options())?
                }
            }
            Ok(task)
        },
    )?;
    Ok(())
}
