//! Decision-tree growth: split mathematics, nodes, the sequential
//! breadth-first builder and tree rendering.

pub mod gain;
pub mod node;

use std::collections::VecDeque;
use std::sync::Arc;

use crate::dataset::{root_subset, TrainingSet};
use crate::error::{Error, Result};
use gain::GainOptions;
use node::{Node, NodeOutcome};

/// Knobs of tree growth shared by every build strategy.
#[derive(Debug, Clone, Copy)]
pub struct GrowthParams {
    /// Nodes whose total case weight falls below this become leaves.
    pub min_cases: f64,
    /// Sort continuous subsets with a counting sort where profitable.
    pub counting_sort: bool,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams { min_cases: 2.0, counting_sort: false }
    }
}

impl GrowthParams {
    pub(crate) fn gain_options(&self) -> GainOptions {
        GainOptions { counting_sort: self.counting_sort, boundary_restriction: true }
    }
}

/// A fully grown decision tree.
pub struct DecisionTree {
    root: Arc<Node>,
    node_count: usize,
    leaf_count: usize,
    depth: usize,
}

impl DecisionTree {
    /// Wraps a resolved node graph, computing size statistics. Errs when any
    /// reachable node is still unresolved.
    pub(crate) fn from_root(root: Arc<Node>) -> Result<Self> {
        let mut node_count = 0;
        let mut leaf_count = 0;
        let mut depth = 0;
        let mut stack = vec![root.clone()];
        while let Some(node) = stack.pop() {
            node_count += 1;
            depth = depth.max(node.depth() + 1);
            match node.outcome() {
                Some(NodeOutcome::Leaf { .. }) => leaf_count += 1,
                Some(NodeOutcome::Internal { children, .. }) => {
                    stack.extend(children.iter().cloned())
                }
                None => return Err(Error::NodeState("unresolved node in a finished tree")),
            }
        }
        Ok(DecisionTree { root, node_count, leaf_count, depth })
    }

    pub fn root(&self) -> &Arc<Node> {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Number of levels; a lone leaf has depth 1.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Renders the tree as text: one node per line, two spaces of indent per
    /// level, internal nodes as one outcome label per child (`attr = v`,
    /// `attr <= t` / `attr > t`), leaves as `-> class (weight)`. Children
    /// appear in outcome order.
    pub fn render(&self, ts: &TrainingSet) -> String {
        enum Item<'a> {
            Node(&'a Arc<Node>),
            Line(usize, String),
        }
        let mut out = String::new();
        let mut stack = vec![Item::Node(&self.root)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Line(indent, text) => {
                    for _ in 0..indent {
                        out.push_str("  ");
                    }
                    out.push_str(&text);
                    out.push('\n');
                }
                Item::Node(node) => match node.outcome().expect("tree is resolved") {
                    NodeOutcome::Leaf { class } => {
                        let weight = node.distribution().expect("leaf has distribution").total;
                        stack.push(Item::Line(
                            node.depth(),
                            format!("-> {} ({:?})", ts.classes()[*class], weight),
                        ));
                    }
                    NodeOutcome::Internal { test, children } => {
                        for (outcome, child) in children.iter().enumerate().rev() {
                            stack.push(Item::Node(child));
                            stack.push(Item::Line(node.depth(), test.outcome_label(outcome, ts)));
                        }
                    }
                },
            }
        }
        out
    }
}

/// Fresh unprocessed root node over the whole training set.
pub(crate) fn make_root(ts: &TrainingSet) -> Result<Arc<Node>> {
    let subset = Arc::new(root_subset(ts)?);
    let considered = (0..ts.attribute_count()).collect();
    Ok(Arc::new(Node::new(0, subset, considered, ts.attribute_count())))
}

/// Grows the tree sequentially, processing unresolved nodes breadth-first
/// from a FIFO.
pub fn build_sequential(ts: &TrainingSet, params: GrowthParams) -> Result<DecisionTree> {
    let root = make_root(ts)?;
    let mut queue = VecDeque::new();
    queue.push_back(root.clone());
    while let Some(node) = queue.pop_front() {
        node.full_split(ts, params.min_cases, params.gain_options())?;
        if let Some(NodeOutcome::Internal { children, .. }) = node.outcome() {
            queue.extend(children.iter().cloned());
        }
    }
    DecisionTree::from_root(root)
}
