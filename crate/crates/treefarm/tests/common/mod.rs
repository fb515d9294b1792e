//! Brute-force reference tree builder used by the acceptance suite.
//!
//! Row-oriented and unoptimized on purpose: no value-index tables, no
//! incremental anything clever, no boundary restriction — every midpoint of
//! adjacent distinct values is evaluated. Entropy and the unknown-weight
//! rebalancing follow the same formulas (and the same accumulation order) as
//! the engine, so per-node decisions are comparable without tolerances.

use std::sync::Arc;

use treefarm::dataset::{AttributeKind, TrainingSet};
use treefarm::tree::node::{Node, NodeOutcome, SplitTest};

/// (case id, weight) of one case at one reference node.
type Row = (usize, f64);

pub struct OracleNode {
    pub total: f64,
    /// The node's (case id, weight) subset, kept for invariant checks.
    pub rows: Vec<(usize, f64)>,
    /// Attributes still eligible at this node.
    pub considered: Vec<usize>,
    pub kind: OracleKind,
}

pub enum OracleKind {
    Leaf { class: usize },
    Internal { attr: usize, threshold: Option<f64>, children: Vec<OracleNode> },
}

fn class_weights(rows: &[Row], ts: &TrainingSet) -> (Vec<f64>, f64) {
    let mut freq = vec![0.0; ts.class_count()];
    let mut total = 0.0;
    for &(case, w) in rows {
        freq[ts.class_of(case)] += w;
        total += w;
    }
    (freq, total)
}

fn entropy(freq: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &f in freq {
        if f > 0.0 {
            let p = f / total;
            sum -= p * p.log2();
        }
    }
    sum
}

fn majority(freq: &[f64]) -> usize {
    let mut best = 0;
    for (c, &f) in freq.iter().enumerate() {
        if f > freq[best] {
            best = c;
        }
    }
    best
}

fn discrete_gain(rows: &[Row], attr: usize, ts: &TrainingSet) -> f64 {
    let domain_size = match &ts.attribute(attr).kind {
        AttributeKind::Discrete { domain } => domain.len(),
        AttributeKind::Continuous => unreachable!(),
    };
    let classes = ts.class_count();
    let mut parts: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; classes], 0.0); domain_size];
    let mut known: (Vec<f64>, f64) = (vec![0.0; classes], 0.0);
    for &(case, w) in rows {
        if let Some(v) = ts.column(attr).get(case) {
            let c = ts.class_of(case);
            parts[v as usize].0[c] += w;
            parts[v as usize].1 += w;
            known.0[c] += w;
            known.1 += w;
        }
    }
    if known.1 <= 0.0 {
        return 0.0;
    }
    let mut expected = 0.0;
    for part in &parts {
        if part.1 > 0.0 {
            expected += (part.1 / known.1) * entropy(&part.0, part.1);
        }
    }
    entropy(&known.0, known.1) - expected
}

/// Exhaustive scan over every midpoint of adjacent distinct known values.
fn continuous_gain(rows: &[Row], attr: usize, ts: &TrainingSet) -> (f64, Option<f64>) {
    let classes = ts.class_count();
    let mut items: Vec<(f64, usize, f64)> = Vec::new();
    let mut known: (Vec<f64>, f64) = (vec![0.0; classes], 0.0);
    for &(case, w) in rows {
        if let Some(v) = ts.continuous_value(attr, case) {
            let c = ts.class_of(case);
            items.push((v, c, w));
            known.0[c] += w;
            known.1 += w;
        }
    }
    if items.is_empty() {
        return (0.0, None);
    }
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if items[0].0 == items[items.len() - 1].0 {
        return (0.0, None);
    }

    let total_info = entropy(&known.0, known.1);
    let mut left: (Vec<f64>, f64) = (vec![0.0; classes], 0.0);
    let mut right = known.clone();
    let mut best = f64::NEG_INFINITY;
    let mut best_threshold = None;

    let mut i = 0;
    while i < items.len() {
        let value = items[i].0;
        let mut j = i;
        while j < items.len() && items[j].0 == value {
            let (_, c, w) = items[j];
            left.0[c] += w;
            left.1 += w;
            right.0[c] -= w;
            right.1 -= w;
            j += 1;
        }
        if j == items.len() {
            break;
        }
        let expected = (left.1 / known.1) * entropy(&left.0, left.1)
            + (right.1 / known.1) * entropy(&right.0, right.1);
        let gain = total_info - expected;
        if gain > best {
            best = gain;
            best_threshold = Some((value + items[j].0) / 2.0);
        }
        i = j;
    }

    if best <= 0.0 {
        return (0.0, None);
    }
    (best, best_threshold)
}

/// Outcome of a case under the chosen test, None for unknown values.
fn outcome_of(case: usize, attr: usize, threshold: Option<f64>, ts: &TrainingSet) -> Option<usize> {
    match threshold {
        None => ts.column(attr).get(case).map(|v| v as usize),
        Some(t) => ts.continuous_value(attr, case).map(|v| if v <= t { 0 } else { 1 }),
    }
}

fn select(rows: &[Row], attr: usize, threshold: Option<f64>, outcome: usize, ts: &TrainingSet) -> Vec<Row> {
    let mut out = Vec::new();
    let mut known_total = 0.0;
    let mut outcome_total = 0.0;
    let mut has_unknown = false;
    for &(case, w) in rows {
        match outcome_of(case, attr, threshold, ts) {
            Some(o) => {
                known_total += w;
                if o == outcome {
                    out.push((case, w));
                    outcome_total += w;
                }
            }
            None => has_unknown = true,
        }
    }
    if has_unknown && outcome_total > 0.0 {
        let share = outcome_total / known_total;
        for &(case, w) in rows {
            if outcome_of(case, attr, threshold, ts).is_none() {
                out.push((case, w * share));
            }
        }
    }
    out
}

pub fn oracle_tree(ts: &TrainingSet, min_cases: f64) -> OracleNode {
    let rows: Vec<Row> = (0..ts.case_count()).map(|c| (c, 1.0)).collect();
    let considered: Vec<usize> = (0..ts.attribute_count()).collect();
    grow(rows, &considered, ts, min_cases)
}

fn grow(rows: Vec<Row>, considered: &[usize], ts: &TrainingSet, min_cases: f64) -> OracleNode {
    let (freq, total) = class_weights(&rows, ts);
    let positive = freq.iter().filter(|&&f| f > 0.0).count();
    if positive <= 1 || total < min_cases {
        let class = majority(&freq);
        return OracleNode {
            total,
            rows,
            considered: considered.to_vec(),
            kind: OracleKind::Leaf { class },
        };
    }

    // First maximum over the considered attributes in ascending order. With
    // no attributes left (deep discrete-only paths) the node is a leaf.
    let mut best: Option<(usize, f64, Option<f64>)> = None;
    for &attr in considered {
        let (gain, threshold) = if ts.attribute(attr).is_continuous() {
            continuous_gain(&rows, attr, ts)
        } else {
            (discrete_gain(&rows, attr, ts), None)
        };
        match best {
            Some((_, current, _)) if gain <= current => {}
            _ => best = Some((attr, gain, threshold)),
        }
    }
    let (attr, gain, local_threshold) = best.unwrap_or((0, 0.0, None));
    if gain <= 0.0 {
        let class = majority(&freq);
        return OracleNode {
            total,
            rows,
            considered: considered.to_vec(),
            kind: OracleKind::Leaf { class },
        };
    }

    if ts.attribute(attr).is_continuous() {
        let local = local_threshold.expect("positive continuous gain has a threshold");
        // Greatest whole-training-set value strictly below the local
        // threshold, by linear scan of the sorted table.
        let table = ts.sorted_values(attr);
        let mut threshold = table[0];
        for &v in table {
            if v < local {
                threshold = v;
            } else {
                break;
            }
        }
        let children = (0..2)
            .map(|o| grow(select(&rows, attr, Some(threshold), o, ts), considered, ts, min_cases))
            .collect();
        OracleNode {
            total,
            rows,
            considered: considered.to_vec(),
            kind: OracleKind::Internal { attr, threshold: Some(threshold), children },
        }
    } else {
        let domain_size = match &ts.attribute(attr).kind {
            AttributeKind::Discrete { domain } => domain.len(),
            AttributeKind::Continuous => unreachable!(),
        };
        let child_considered: Vec<usize> = considered.iter().copied().filter(|&a| a != attr).collect();
        let children = (0..domain_size)
            .map(|o| grow(select(&rows, attr, None, o, ts), &child_considered, ts, min_cases))
            .collect();
        OracleNode {
            total,
            rows,
            considered: considered.to_vec(),
            kind: OracleKind::Internal { attr, threshold: None, children },
        }
    }
}

/// Compares every per-node decision of a grown tree against the reference.
/// Returns the path and nature of the first divergence.
pub fn compare_tree(node: &Arc<Node>, oracle: &OracleNode, path: &mut Vec<usize>) -> Result<(), String> {
    let at = |path: &[usize]| format!("node {path:?}");
    let total = node.distribution().expect("resolved node has a distribution").total;
    if (total - oracle.total).abs() > 1e-9 * oracle.total.abs().max(1.0) {
        return Err(format!(
            "{}: subset weight {} differs from reference {}",
            at(path),
            total,
            oracle.total
        ));
    }
    match (node.outcome().expect("tree is resolved"), &oracle.kind) {
        (NodeOutcome::Leaf { class }, OracleKind::Leaf { class: expected }) => {
            if class != expected {
                return Err(format!("{}: leaf class {} vs reference {}", at(path), class, expected));
            }
            Ok(())
        }
        (NodeOutcome::Internal { test, children }, OracleKind::Internal { attr, threshold, children: expected }) => {
            if test.attribute() != *attr {
                return Err(format!(
                    "{}: split attribute {} vs reference {}",
                    at(path),
                    test.attribute(),
                    attr
                ));
            }
            match (test, threshold) {
                (SplitTest::Continuous { threshold: t, .. }, Some(want)) => {
                    if t != want {
                        return Err(format!("{}: threshold {t} vs reference {want}", at(path)));
                    }
                }
                (SplitTest::Discrete { .. }, None) => {}
                _ => return Err(format!("{}: test kind differs from reference", at(path))),
            }
            if children.len() != expected.len() {
                return Err(format!(
                    "{}: {} children vs reference {}",
                    at(path),
                    children.len(),
                    expected.len()
                ));
            }
            for (i, (child, oracle_child)) in children.iter().zip(expected).enumerate() {
                path.push(i);
                compare_tree(child, oracle_child, path)?;
                path.pop();
            }
            Ok(())
        }
        (NodeOutcome::Leaf { .. }, OracleKind::Internal { attr, .. }) => Err(format!(
            "{}: leaf, but reference splits on attribute {}",
            at(path),
            attr
        )),
        (NodeOutcome::Internal { test, .. }, OracleKind::Leaf { class }) => Err(format!(
            "{}: splits on attribute {}, but reference is a leaf of class {}",
            at(path),
            test.attribute(),
            class
        )),
    }
}
