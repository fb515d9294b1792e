//! Acceptance gate: eight checks covering oracle agreement, strategy
//! transparency, desk-scale performance ordering, the cost-model predicates,
//! runtime delivery guarantees and the tree invariants.
//!
//! Every check prints exactly one `criterion N: ...` line to the real stdout
//! (bypassing libtest capture) before asserting, so a full run always shows
//! the scoreboard. Checks take a shared mutex — several of them time builds,
//! and concurrent criteria would distort each other's clocks.

mod common;

use std::io::Write as _;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use treefarm::bench::trimmed_mean;
use treefarm::dataset::TrainingSet;
use treefarm::parallel::{build_att_test, build_parallel, BuildParams, CostModel, Strategy};
use treefarm::runtime::{run_farm, EmitterAction, FarmConfig, Outbox, SchedulerKind, Task};
use treefarm::synth::{generate_training_set, SyntheticSpec};
use treefarm::tree::gain::{gain_continuous, GainOptions};
use treefarm::tree::node::NodeOutcome;
use treefarm::tree::{build_sequential, DecisionTree, GrowthParams};
use treefarm::{CaseSubset, Error};

use common::{compare_tree, oracle_tree, OracleKind, OracleNode};

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints one scoreboard line to the process stdout, which libtest capture
/// does not intercept.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

/// The dataset population shared by criteria 1 and 8: 56 small sets of at
/// most 200 cases and at most 6 attributes, half fully known, half with a
/// 0.1 unknown rate.
fn small_specs() -> Vec<SyntheticSpec> {
    let shapes: [(usize, usize, usize); 7] = [
        (1, 0, 2),
        (2, 1, 2),
        (3, 0, 3),
        (2, 2, 2),
        (4, 1, 3),
        (0, 3, 2),
        (3, 3, 4),
    ];
    (0..56)
        .map(|i| {
            let (continuous_attrs, discrete_attrs, classes) = shapes[i % shapes.len()];
            SyntheticSpec {
                case_count: 20 + i * 180 / 55,
                continuous_attrs,
                discrete_attrs,
                classes,
                unknown_rate: if i % 2 == 0 { 0.0 } else { 0.1 },
                seed: 9000 + i as u64,
            }
        })
        .collect()
}

#[test]
fn criterion_1_sequential_decisions_match_the_brute_force_oracle() {
    let _guard = serial();
    let start = Instant::now();
    let specs = small_specs();
    let count = specs.len();
    let mut failure: Option<String> = None;

    for spec in &specs {
        let ts = generate_training_set(spec).unwrap();
        let tree = build_sequential(&ts, GrowthParams::default()).unwrap();
        let oracle = oracle_tree(&ts, GrowthParams::default().min_cases);
        let mut path = Vec::new();
        if let Err(e) = compare_tree(tree.root(), &oracle, &mut path) {
            failure = Some(format!("seed {}: {e}", spec.seed));
            break;
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let in_budget = elapsed < 60.0;
    match (&failure, in_budget) {
        (None, true) => report(&format!(
            "criterion 1: pass ({count} datasets <=200 cases/<=6 attributes, unknown rates 0 and 0.1, 0 decision mismatches vs the exhaustive-midpoint oracle, {elapsed:.1}s)"
        )),
        (Some(e), _) => report(&format!("criterion 1: FAIL ({e})")),
        (None, false) => report(&format!("criterion 1: FAIL (took {elapsed:.1}s, budget 60s)")),
    }
    assert!(failure.is_none(), "{}", failure.unwrap());
    assert!(in_budget, "oracle suite took {elapsed:.1}s, budget is 60s");
}

/// The 20 datasets of the transparency sweep, up to 100k cases.
fn medium_specs() -> Vec<SyntheticSpec> {
    let rows: [(usize, usize, usize, usize, f64); 20] = [
        (150, 2, 1, 2, 0.1),
        (300, 3, 0, 2, 0.0),
        (500, 1, 2, 3, 0.05),
        (800, 4, 1, 2, 0.0),
        (1_200, 2, 2, 2, 0.1),
        (1_800, 5, 0, 3, 0.0),
        (2_500, 3, 2, 2, 0.02),
        (3_500, 6, 3, 2, 0.0),
        (5_000, 2, 3, 4, 0.1),
        (6_500, 4, 0, 2, 0.0),
        (8_000, 3, 1, 3, 0.05),
        (10_000, 6, 3, 2, 0.0),
        (12_500, 2, 2, 2, 0.1),
        (15_000, 5, 2, 3, 0.0),
        (20_000, 4, 2, 2, 0.02),
        (25_000, 6, 3, 2, 0.0),
        (30_000, 3, 3, 3, 0.05),
        (40_000, 6, 3, 2, 0.0),
        (60_000, 5, 1, 2, 0.1),
        (100_000, 6, 3, 2, 0.0),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(case_count, continuous_attrs, discrete_attrs, classes, unknown_rate))| {
            SyntheticSpec {
                case_count,
                continuous_attrs,
                discrete_attrs,
                classes,
                unknown_rate,
                seed: 400 + i as u64,
            }
        })
        .collect()
}

#[test]
fn criterion_2_every_strategy_configuration_reproduces_the_sequential_tree() {
    let _guard = serial();
    let start = Instant::now();
    let workers = [1usize, 2, 4, 7];
    let schedulers = [SchedulerKind::Drr, SchedulerKind::OnDemand, SchedulerKind::Weighted];
    let models = [CostModel::Alpha { alpha: 1000 }, CostModel::NLogN, CostModel::NSquared];

    let specs = medium_specs();
    let datasets = specs.len();
    let mut builds = 0u64;
    let mut failure: Option<String> = None;

    'outer: for spec in &specs {
        let ts = generate_training_set(spec).unwrap();
        let reference = build_sequential(&ts, GrowthParams::default()).unwrap().render(&ts);
        builds += 1;
        for strategy in [Strategy::Np, Strategy::Nap] {
            for &w in &workers {
                for &scheduler in &schedulers {
                    for &cost_model in &models {
                        let params = BuildParams {
                            strategy,
                            farm: FarmConfig { workers: w, qsize: 4096, scheduler },
                            cost_model,
                            growth: GrowthParams::default(),
                        };
                        let text = build_parallel(&ts, &params).unwrap().render(&ts);
                        builds += 1;
                        if text != reference {
                            failure = Some(format!(
                                "{} cases (seed {}): {strategy} with {w} workers, {scheduler}, {cost_model} diverged from the sequential tree",
                                spec.case_count, spec.seed
                            ));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let in_budget = elapsed < 600.0;
    match (&failure, in_budget) {
        (None, true) => report(&format!(
            "criterion 2: pass ({datasets} datasets up to 100k cases x strategies x workers 1/2/4/7 x 3 schedulers x 3 cost models: {builds} builds byte-identical, {elapsed:.1}s)"
        )),
        (Some(e), _) => report(&format!("criterion 2: FAIL ({e})")),
        (None, false) => report(&format!("criterion 2: FAIL (took {elapsed:.1}s, budget 600s)")),
    }
    assert!(failure.is_none(), "{}", failure.unwrap());
    assert!(in_budget, "transparency sweep took {elapsed:.1}s, budget is 600s");
}

/// Trimmed-mean build times over the shared 1M-case x 9-attribute dataset,
/// measured once and reused by criteria 3, 4 and 5.
///
/// The five configurations are rotated within each repetition instead of
/// timing all repetitions of one configuration back to back, so slow drift of
/// the host lands on every configuration equally. An untimed warm-up build
/// absorbs first-touch page faults, and the trimmed mean averages the middle
/// five of seven samples per configuration.
struct DeskBench {
    seq: f64,
    np: f64,
    nap_alpha: f64,
    nap_nlogn: f64,
    nap_nsq: f64,
    total_seconds: f64,
}

static DESK: OnceLock<std::result::Result<DeskBench, String>> = OnceLock::new();

const DESK_REPS: usize = 7;

fn desk_bench() -> &'static std::result::Result<DeskBench, String> {
    DESK.get_or_init(|| {
        let start = Instant::now();
        let spec = SyntheticSpec { case_count: 1_000_000, seed: 7, ..Default::default() };
        let ts = generate_training_set(&spec).map_err(|e| e.to_string())?;

        let parallel = |strategy, cost_model| BuildParams {
            strategy,
            farm: FarmConfig { workers: 3, qsize: 4096, scheduler: SchedulerKind::Weighted },
            cost_model,
            growth: GrowthParams::default(),
        };
        let configs = [
            BuildParams { strategy: Strategy::Seq, ..Default::default() },
            parallel(Strategy::Np, CostModel::default()),
            parallel(Strategy::Nap, CostModel::Alpha { alpha: 1000 }),
            parallel(Strategy::Nap, CostModel::NLogN),
            parallel(Strategy::Nap, CostModel::NSquared),
        ];

        // Untimed warm-up, which also yields the rendering every timed build
        // must reproduce.
        let reference = build_parallel(&ts, &configs[0]).map_err(|e| e.to_string())?.render(&ts);

        let mut samples = vec![Vec::with_capacity(DESK_REPS); configs.len()];
        for _ in 0..DESK_REPS {
            for (slot, params) in configs.iter().enumerate() {
                let t0 = Instant::now();
                let tree = build_parallel(&ts, params).map_err(|e| e.to_string())?;
                samples[slot].push(t0.elapsed().as_secs_f64());
                if tree.render(&ts) != reference {
                    return Err(format!(
                        "{} diverged from the sequential rendering at 1M cases",
                        params.strategy
                    ));
                }
            }
        }

        let mean = |slot: usize| trimmed_mean(&samples[slot]).map_err(|e| e.to_string());
        Ok(DeskBench {
            seq: mean(0)?,
            np: mean(1)?,
            nap_alpha: mean(2)?,
            nap_nlogn: mean(3)?,
            nap_nsq: mean(4)?,
            total_seconds: start.elapsed().as_secs_f64(),
        })
    })
}

#[test]
fn criterion_3_nap_speedup_at_desk_scale() {
    let _guard = serial();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    if threads < 4 {
        report(&format!(
            "criterion 3: skip (machine exposes {threads} hardware thread(s); the >=1.8x NAP speedup check requires >=4 physical cores)"
        ));
        return;
    }
    let desk = match desk_bench() {
        Ok(desk) => desk,
        Err(e) => {
            report(&format!("criterion 3: FAIL (bench error: {e})"));
            panic!("bench error: {e}");
        }
    };
    let speedup = desk.seq / desk.nap_nsq;
    let in_budget = desk.total_seconds < 900.0;
    if speedup >= 1.8 && in_budget {
        report(&format!(
            "criterion 3: pass (NAP 3 workers on 1M cases x 9 attributes: {speedup:.2}x over sequential, bench {:.0}s)",
            desk.total_seconds
        ));
    } else {
        report(&format!(
            "criterion 3: FAIL (speedup {speedup:.2}x, bench {:.0}s)",
            desk.total_seconds
        ));
    }
    assert!(speedup >= 1.8, "NAP speedup {speedup:.2}x is below 1.8x");
    assert!(in_budget, "bench took {:.0}s, budget is 900s", desk.total_seconds);
}

#[test]
fn criterion_4_nap_is_not_slower_than_np() {
    let _guard = serial();
    let desk = match desk_bench() {
        Ok(desk) => desk,
        Err(e) => {
            report(&format!("criterion 4: FAIL (bench error: {e})"));
            panic!("bench error: {e}");
        }
    };
    let limit = desk.np * 1.05;
    if desk.nap_nsq <= limit {
        report(&format!(
            "criterion 4: pass (1M cases, 3 workers: NAP {:.3}s <= NP {:.3}s x 1.05)",
            desk.nap_nsq, desk.np
        ));
    } else {
        report(&format!(
            "criterion 4: FAIL (NAP {:.3}s > NP {:.3}s x 1.05)",
            desk.nap_nsq, desk.np
        ));
    }
    assert!(
        desk.nap_nsq <= limit,
        "NAP {:.3}s exceeds NP {:.3}s by more than 5%",
        desk.nap_nsq,
        desk.np
    );
}

#[test]
fn criterion_5_nsq_cost_model_is_near_best() {
    let _guard = serial();
    let desk = match desk_bench() {
        Ok(desk) => desk,
        Err(e) => {
            report(&format!("criterion 5: FAIL (bench error: {e})"));
            panic!("bench error: {e}");
        }
    };
    let best = desk.nap_alpha.min(desk.nap_nlogn).min(desk.nap_nsq);
    let limit = best * 1.15;
    if desk.nap_nsq <= limit {
        report(&format!(
            "criterion 5: pass (1M cases, NAP means: alpha {:.3}s, nlogn {:.3}s, nsq {:.3}s; nsq <= 1.15x best)",
            desk.nap_alpha, desk.nap_nlogn, desk.nap_nsq
        ));
    } else {
        report(&format!(
            "criterion 5: FAIL (nsq {:.3}s > 1.15 x best {best:.3}s)",
            desk.nap_nsq
        ));
    }
    assert!(desk.nap_nsq <= limit, "nsq {:.3}s exceeds 1.15 x best {best:.3}s", desk.nap_nsq);
}

#[test]
fn criterion_6_cost_model_predicates_reproduce_the_reference_triples() {
    let _guard = serial();
    let checks = [
        // 10M cases, 9 attributes, root: 9e14 > 1e7
        (CostModel::NSquared, 10_000_000usize, 9usize, 10_000_000usize, true),
        // alpha threshold 1000 vs r = 500
        (CostModel::Alpha { alpha: 1000 }, 10_000_000, 9, 500, false),
        // 10 * 100 * log2(100) ~ 6644 > 1000
        (CostModel::NLogN, 1_000, 10, 100, true),
    ];
    let mut failure = None;
    for &(model, total, c, r, expected) in &checks {
        let got = build_att_test(model, total, c, r);
        if got != expected {
            failure = Some(format!(
                "build_att_test({model}, |T|={total}, c={c}, r={r}) = {got}, expected {expected}"
            ));
            break;
        }
    }
    match &failure {
        None => report("criterion 6: pass (build_att_test matches all three reference inequality triples exactly)"),
        Some(e) => report(&format!("criterion 6: FAIL ({e})")),
    }
    assert!(failure.is_none(), "{}", failure.unwrap());
}

#[test]
fn criterion_7_farm_delivers_a_million_tasks_exactly_once_in_order() {
    let _guard = serial();
    let start = Instant::now();
    let total_tasks: u64 = 1_000_000;
    let per_run = total_tasks / 8;
    let mut delivered = 0u64;
    let mut failure: Option<String> = None;

    thread_local! {
        static LAST_ID: std::cell::Cell<i64> = std::cell::Cell::new(-1);
    }

    'runs: for workers in 1..=8usize {
        let seen: Vec<AtomicU32> = (0..per_run).map(|_| AtomicU32::new(0)).collect();
        let mut next: u64 = 0;

        let emitter = |input: Option<Task<u64>>, out: &mut Outbox<u64>| {
            debug_assert!(input.is_none() || next == per_run);
            while next < per_run {
                let mut task = Task::new(next);
                // Integer-valued weights keep the pending-weight account
                // exact, so termination can assert equality with zero.
                task.set_weight((next % 7 + 1) as f64);
                out.emit(task);
                next += 1;
            }
            Ok(EmitterAction::End)
        };
        let worker = |task: Task<u64>| {
            let id = *task.payload();
            let out_of_order = LAST_ID.with(|last| {
                let prev = last.get();
                last.set(id as i64);
                prev >= id as i64
            });
            if out_of_order {
                return Err(Error::Protocol("out-of-order delivery on one input queue"));
            }
            if seen[id as usize].fetch_add(1, Ordering::SeqCst) != 0 {
                return Err(Error::Protocol("task delivered twice"));
            }
            Ok(task)
        };

        let config = FarmConfig { workers, qsize: 1024, scheduler: SchedulerKind::Weighted };
        match run_farm(config, emitter, worker) {
            Ok(stats) => {
                let lost = seen.iter().filter(|s| s.load(Ordering::SeqCst) != 1).count();
                let routed: u64 = stats.per_worker.iter().sum();
                let pending_clear = stats.final_pending.iter().all(|&p| p == 0.0);
                if stats.emitted != per_run
                    || stats.retired != per_run
                    || routed != per_run
                    || lost != 0
                    || !pending_clear
                {
                    failure = Some(format!(
                        "{workers} workers: emitted {} retired {} routed {routed} undelivered {lost} pending {:?}",
                        stats.emitted, stats.retired, stats.final_pending
                    ));
                    break 'runs;
                }
                delivered += stats.retired;
            }
            Err(e) => {
                failure = Some(format!("{workers} workers: {e}"));
                break 'runs;
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    match &failure {
        None => report(&format!(
            "criterion 7: pass ({delivered} tasks over worker counts 1-8, FIFO per queue, exactly-once, weighted pending drained to zero, {elapsed:.1}s)"
        )),
        Some(e) => report(&format!("criterion 7: FAIL ({e})")),
    }
    assert!(failure.is_none(), "{}", failure.unwrap());
    assert_eq!(delivered, total_tasks);
}

fn check_conservation(tree: &DecisionTree) -> (u64, Option<String>) {
    let mut checked = 0;
    let mut stack = vec![tree.root().clone()];
    while let Some(node) = stack.pop() {
        if let Some(NodeOutcome::Internal { children, .. }) = node.outcome() {
            let total = node.distribution().expect("internal node has a distribution").total;
            let sum: f64 = children
                .iter()
                .map(|c| c.distribution().expect("child has a distribution").total)
                .sum();
            if (sum - total).abs() > 1e-6 * total {
                return (
                    checked,
                    Some(format!("children sum to {sum}, node holds {total}")),
                );
            }
            checked += 1;
            stack.extend(children.iter().cloned());
        }
    }
    (checked, None)
}

fn check_restriction_equivalence(oracle: &OracleNode, ts: &TrainingSet) -> (u64, Option<String>) {
    let mut checked = 0;
    let mut stack = vec![oracle];
    while let Some(node) = stack.pop() {
        for &attr in &node.considered {
            if !ts.attribute(attr).is_continuous() {
                continue;
            }
            let ids: Vec<u32> = node.rows.iter().map(|&(case, _)| case as u32).collect();
            let weights: Vec<f64> = node.rows.iter().map(|&(_, w)| w).collect();
            let subset = CaseSubset::new(ids, weights);
            let restricted = gain_continuous(
                &subset,
                attr,
                ts,
                GainOptions { counting_sort: false, boundary_restriction: true },
            );
            let exhaustive = gain_continuous(
                &subset,
                attr,
                ts,
                GainOptions { counting_sort: false, boundary_restriction: false },
            );
            if restricted != exhaustive {
                return (
                    checked,
                    Some(format!(
                        "attribute {attr} over {} cases: restricted {restricted:?} vs exhaustive {exhaustive:?}",
                        subset.len()
                    )),
                );
            }
            checked += 1;
        }
        if let OracleKind::Internal { children, .. } = &node.kind {
            stack.extend(children.iter());
        }
    }
    (checked, None)
}

#[test]
fn criterion_8_weight_conservation_and_boundary_restriction_equivalence() {
    let _guard = serial();
    let start = Instant::now();
    let mut internal_nodes = 0u64;
    let mut gain_pairs = 0u64;
    let mut failure: Option<String> = None;

    for spec in small_specs() {
        let ts = generate_training_set(&spec).unwrap();
        let tree = build_sequential(&ts, GrowthParams::default()).unwrap();

        let (checked, err) = check_conservation(&tree);
        internal_nodes += checked;
        if let Some(e) = err {
            failure = Some(format!("seed {}: weight conservation: {e}", spec.seed));
            break;
        }

        let oracle = oracle_tree(&ts, GrowthParams::default().min_cases);
        let (checked, err) = check_restriction_equivalence(&oracle, &ts);
        gain_pairs += checked;
        if let Some(e) = err {
            failure = Some(format!("seed {}: boundary restriction: {e}", spec.seed));
            break;
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    match &failure {
        None => report(&format!(
            "criterion 8: pass (weights conserved within 1e-6 relative at {internal_nodes} internal nodes; restricted and exhaustive continuous gains identical in {gain_pairs} comparisons, {elapsed:.1}s)"
        )),
        Some(e) => report(&format!("criterion 8: FAIL ({e})")),
    }
    assert!(failure.is_none(), "{}", failure.unwrap());
}
