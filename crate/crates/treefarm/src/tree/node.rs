//! Decision nodes and the three-phase split.
//!
//! `split_pre` / `split_att` / `split_post` carve the classic node split into
//! the pieces the parallel builders schedule independently. All state a later
//! phase needs lives behind interior mutability sized for the concurrency
//! contract: gain slots are write-once cells written by disjoint contexts,
//! the outstanding-attribute counter belongs to the emitter alone, and
//! pre/post never overlap with gain work on the same node.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::dataset::{AttributeKind, CaseSubset, TrainingSet};
use crate::error::{Error, Result};
use crate::tree::gain::{
    compute_frequencies, find_threshold, gain_continuous, gain_discrete, table_index_of,
    ClassDistribution, GainOptions, GainResult,
};

/// The test an internal node applies to route a case to a child.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitTest {
    /// One outcome per domain value of a discrete attribute.
    Discrete { attr: usize },
    /// Two outcomes: value ≤ threshold, value > threshold. The threshold is
    /// a value of the whole training set; `threshold_index` is its position
    /// in the attribute's sorted value table, so cases compare by index.
    Continuous { attr: usize, threshold: f64, threshold_index: u32 },
}

impl SplitTest {
    pub fn attribute(&self) -> usize {
        match *self {
            SplitTest::Discrete { attr } => attr,
            SplitTest::Continuous { attr, .. } => attr,
        }
    }

    pub fn outcome_count(&self, ts: &TrainingSet) -> usize {
        match *self {
            SplitTest::Discrete { attr } => ts.attribute(attr).outcome_count(),
            SplitTest::Continuous { .. } => 2,
        }
    }

    /// Outcome index of a case, or None when its value is unknown.
    pub fn outcome_of(&self, case: usize, ts: &TrainingSet) -> Option<usize> {
        match *self {
            SplitTest::Discrete { attr } => {
                ts.column(attr).get(case).map(|v| v as usize)
            }
            SplitTest::Continuous { attr, threshold_index, .. } => ts
                .column(attr)
                .get(case)
                .map(|v| if v <= threshold_index { 0 } else { 1 }),
        }
    }

    /// Human-readable label of one outcome, as it appears in tree text.
    pub fn outcome_label(&self, outcome: usize, ts: &TrainingSet) -> String {
        match *self {
            SplitTest::Discrete { attr } => {
                let name = &ts.attribute(attr).name;
                match &ts.attribute(attr).kind {
                    AttributeKind::Discrete { domain } => {
                        format!("{name} = {}", domain[outcome])
                    }
                    AttributeKind::Continuous => unreachable!("discrete test on continuous attribute"),
                }
            }
            SplitTest::Continuous { attr, threshold, .. } => {
                let name = &ts.attribute(attr).name;
                if outcome == 0 {
                    format!("{name} <= {threshold:?}")
                } else {
                    format!("{name} > {threshold:?}")
                }
            }
        }
    }
}

/// Resolution of a node.
#[derive(Debug)]
pub enum NodeOutcome {
    Leaf { class: usize },
    Internal { test: SplitTest, children: Vec<Arc<Node>> },
}

/// One decision node.
///
/// Nodes start unprocessed, holding their case subset; `split_pre` either
/// resolves them to a leaf or leaves them open for gain computation, and
/// `split_post` resolves them to a leaf or an internal node with unprocessed
/// children. The subset is released at resolution; the class distribution
/// stays for rendering.
pub struct Node {
    depth: usize,
    case_count: usize,
    considered: Vec<usize>,
    subset: Mutex<Option<Arc<CaseSubset>>>,
    dist: OnceLock<ClassDistribution>,
    gain_slots: Vec<OnceLock<GainResult>>,
    att_tasks: AtomicU32,
    outcome: OnceLock<NodeOutcome>,
}

impl std::fmt::Debug for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Node")
            .field("depth", &self.depth)
            .field("case_count", &self.case_count)
            .field("resolved", &self.is_resolved())
            .finish()
    }
}

impl Node {
    /// New unprocessed node. `considered` must be sorted ascending.
    pub fn new(depth: usize, subset: Arc<CaseSubset>, considered: Vec<usize>, attribute_count: usize) -> Self {
        debug_assert!(considered.windows(2).all(|w| w[0] < w[1]));
        let case_count = subset.len();
        let mut gain_slots = Vec::with_capacity(attribute_count);
        gain_slots.resize_with(attribute_count, OnceLock::new);
        Node {
            depth,
            case_count,
            considered,
            subset: Mutex::new(Some(subset)),
            dist: OnceLock::new(),
            gain_slots,
            att_tasks: AtomicU32::new(0),
            outcome: OnceLock::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of cases in the node's subset (the r of the cost models and
    /// task weights).
    pub fn case_count(&self) -> usize {
        self.case_count
    }

    pub fn considered(&self) -> &[usize] {
        self.considered.as_slice()
    }

    pub fn distribution(&self) -> Option<&ClassDistribution> {
        self.dist.get()
    }

    pub fn outcome(&self) -> Option<&NodeOutcome> {
        self.outcome.get()
    }

    pub fn is_resolved(&self) -> bool {
        self.outcome.get().is_some()
    }

    fn subset(&self) -> Result<Arc<CaseSubset>> {
        self.subset
            .lock()
            .unwrap()
            .as_ref()
            .cloned()
            .ok_or(Error::NodeState("subset already released"))
    }

    fn take_subset(&self) -> Result<Arc<CaseSubset>> {
        self.subset
            .lock()
            .unwrap()
            .take()
            .ok_or(Error::NodeState("subset already released"))
    }

    fn resolve(&self, outcome: NodeOutcome) -> Result<()> {
        self.outcome
            .set(outcome)
            .map_err(|_| Error::NodeState("node resolved twice"))
    }

    /// Outstanding-attribute counter for attribute-parallel building. Only
    /// the emitter context may touch it.
    pub fn set_att_tasks(&self, n: u32) {
        self.att_tasks.store(n, Ordering::Relaxed);
    }

    /// Decrements the counter and reports whether attribute tasks remain.
    pub fn dec_att_tasks(&self) -> Result<u32> {
        let n = self.att_tasks.load(Ordering::Relaxed);
        if n == 0 {
            return Err(Error::AttTaskUnderflow);
        }
        self.att_tasks.store(n - 1, Ordering::Relaxed);
        Ok(n - 1)
    }

    /// Computes the class distribution and resolves the node to a leaf when
    /// it holds a single class or too little weight. Returns true when the
    /// node became a leaf.
    pub fn split_pre(&self, ts: &TrainingSet, min_cases: f64) -> Result<bool> {
        let subset = self.subset()?;
        let dist = compute_frequencies(&subset, ts);
        self.dist
            .set(dist)
            .map_err(|_| Error::NodeState("split_pre ran twice"))?;
        let dist = self.dist.get().unwrap();
        if dist.single_class() || dist.total < min_cases {
            let class = dist.majority_class();
            drop(subset);
            self.take_subset()?;
            self.resolve(NodeOutcome::Leaf { class })?;
            return Ok(true);
        }
        Ok(false)
    }

    /// Computes the gain of one considered attribute into its slot.
    pub fn split_att(&self, attr: usize, ts: &TrainingSet, opts: GainOptions) -> Result<()> {
        if !self.considered.contains(&attr) {
            return Err(Error::AttributeNotConsidered { attr });
        }
        let subset = self.subset()?;
        let result = if ts.attribute(attr).is_continuous() {
            gain_continuous(&subset, attr, ts, opts)
        } else {
            gain_discrete(&subset, attr, ts)
        };
        self.gain_slots[attr]
            .set(result)
            .map_err(|_| Error::GainSlotRewritten { attr })
    }

    /// Selects the best attribute from the filled gain slots and resolves
    /// the node: a leaf when no attribute has positive gain, otherwise an
    /// internal node with one unprocessed child per outcome.
    pub fn split_post(&self, ts: &TrainingSet) -> Result<()> {
        let dist = self
            .dist
            .get()
            .ok_or(Error::NodeState("split_post before split_pre"))?;

        let mut best: Option<(usize, GainResult)> = None;
        for &attr in &self.considered {
            let slot = *self.gain_slots[attr]
                .get()
                .ok_or(Error::NodeState("split_post with unfilled gain slot"))?;
            match best {
                Some((_, current)) if slot.gain <= current.gain => {}
                _ => best = Some((attr, slot)),
            }
        }

        let (attr, result) = match best {
            Some((attr, result)) if result.gain > 0.0 => (attr, result),
            _ => {
                let class = dist.majority_class();
                self.take_subset()?;
                return self.resolve(NodeOutcome::Leaf { class });
            }
        };

        let test = if ts.attribute(attr).is_continuous() {
            let local = result
                .local_threshold
                .ok_or(Error::NodeState("positive continuous gain without threshold"))?;
            let threshold = find_threshold(local, attr, ts);
            let threshold_index = table_index_of(threshold, attr, ts);
            SplitTest::Continuous { attr, threshold, threshold_index }
        } else {
            SplitTest::Discrete { attr }
        };

        let child_considered: Vec<usize> = match test {
            SplitTest::Discrete { attr } => {
                self.considered.iter().copied().filter(|&a| a != attr).collect()
            }
            SplitTest::Continuous { .. } => self.considered.clone(),
        };

        let subset = self.take_subset()?;
        let attribute_count = ts.attribute_count();
        let children = (0..test.outcome_count(ts))
            .map(|outcome| {
                let part = select_cases(&subset, &test, outcome, ts);
                Arc::new(Node::new(
                    self.depth + 1,
                    Arc::new(part),
                    child_considered.clone(),
                    attribute_count,
                ))
            })
            .collect();
        self.resolve(NodeOutcome::Internal { test, children })
    }

    /// The whole sequential split of one node: pre, gains for every
    /// considered attribute, post.
    pub fn full_split(&self, ts: &TrainingSet, min_cases: f64, opts: GainOptions) -> Result<()> {
        if self.split_pre(ts, min_cases)? {
            return Ok(());
        }
        for &attr in &self.considered {
            self.split_att(attr, ts, opts)?;
        }
        self.split_post(ts)
    }
}

/// Cases of `subset` routed to one outcome of a test. Known-valued cases go
/// to exactly one outcome; unknown-valued cases go to every outcome that
/// received known weight, rescaled by that outcome's share of the known
/// weight. Known cases come first, both groups in subset order.
pub fn select_cases(
    subset: &CaseSubset,
    test: &SplitTest,
    outcome: usize,
    ts: &TrainingSet,
) -> CaseSubset {
    let mut ids = Vec::new();
    let mut weights = Vec::new();
    let mut known_total = 0.0;
    let mut outcome_total = 0.0;
    let mut has_unknown = false;

    for (case, w) in subset.iter() {
        match test.outcome_of(case as usize, ts) {
            Some(o) => {
                known_total += w;
                if o == outcome {
                    ids.push(case);
                    weights.push(w);
                    outcome_total += w;
                }
            }
            None => has_unknown = true,
        }
    }

    if has_unknown && outcome_total > 0.0 {
        let share = outcome_total / known_total;
        for (case, w) in subset.iter() {
            if test.outcome_of(case as usize, ts).is_none() {
                ids.push(case);
                weights.push(w * share);
            }
        }
    }
    CaseSubset::new(ids, weights)
}
