//! Class frequencies, entropy and information gain.
//!
//! Continuous gains work on the pre-sorted value indexes of the columnar
//! training set: subset cases are sorted by index (comparison sort, or
//! counting sort when enabled), candidate thresholds are midpoints of
//! adjacent distinct values, and by default only boundary candidates are
//! evaluated (adjacent value groups that are pure in the same class cannot
//! host the maximizer).

use crate::dataset::{AttributeKind, CaseSubset, TrainingSet};
use crate::error::{Error, Result};

/// Per-class weighted frequencies of a set of cases.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    pub freq: Vec<f64>,
    pub total: f64,
}

impl ClassDistribution {
    pub fn zeros(class_count: usize) -> Self {
        ClassDistribution { freq: vec![0.0; class_count], total: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, class: usize, weight: f64) {
        self.freq[class] += weight;
        self.total += weight;
    }

    #[inline]
    fn subtract(&mut self, class: usize, weight: f64) {
        self.freq[class] -= weight;
        self.total -= weight;
    }

    /// True when at most one class carries positive weight.
    pub fn single_class(&self) -> bool {
        self.freq.iter().filter(|&&f| f > 0.0).count() <= 1
    }

    /// Class with the largest weighted frequency; ties go to the lowest
    /// class index.
    pub fn majority_class(&self) -> usize {
        let mut best = 0;
        for (c, &f) in self.freq.iter().enumerate() {
            if f > self.freq[best] {
                best = c;
            }
        }
        best
    }
}

/// Weighted class frequencies of a subset: `freq[c]` sums the weights of the
/// subset cases whose class is `c`.
pub fn compute_frequencies(subset: &CaseSubset, ts: &TrainingSet) -> ClassDistribution {
    let mut dist = ClassDistribution::zeros(ts.class_count());
    for (case, w) in subset.iter() {
        dist.add(ts.class_of(case as usize), w);
    }
    dist
}

/// Entropy in bits; zero-frequency terms contribute nothing. Negative
/// frequencies (possible only as rounding residue of incremental updates)
/// are treated as zero.
#[inline]
fn entropy_bits(dist: &ClassDistribution) -> f64 {
    if dist.total <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &f in &dist.freq {
        if f > 0.0 {
            let p = f / dist.total;
            sum -= p * p.log2();
        }
    }
    sum
}

/// Entropy in bits of a non-empty distribution.
pub fn info(dist: &ClassDistribution) -> Result<f64> {
    if dist.total <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(entropy_bits(dist))
}

/// Information gain of one attribute at one node, with the local threshold
/// when the attribute is continuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainResult {
    pub gain: f64,
    pub local_threshold: Option<f64>,
}

impl GainResult {
    pub const ZERO: GainResult = GainResult { gain: 0.0, local_threshold: None };
}

/// Options controlling the continuous-gain scan.
#[derive(Debug, Clone, Copy)]
pub struct GainOptions {
    /// Sort subset cases with a counting sort over the value-index range
    /// instead of a comparison sort. Results are identical.
    pub counting_sort: bool,
    /// Evaluate only boundary candidates. Results are identical.
    pub boundary_restriction: bool,
}

impl Default for GainOptions {
    fn default() -> Self {
        GainOptions { counting_sort: false, boundary_restriction: true }
    }
}

/// Information gain of a discrete attribute over the known-valued cases of
/// the subset.
pub fn gain_discrete(subset: &CaseSubset, attr: usize, ts: &TrainingSet) -> GainResult {
    let domain_size = match &ts.attribute(attr).kind {
        AttributeKind::Discrete { domain } => domain.len(),
        AttributeKind::Continuous => panic!("gain_discrete on a continuous attribute"),
    };
    let column = ts.column(attr);
    let class_count = ts.class_count();

    let mut parts = vec![ClassDistribution::zeros(class_count); domain_size];
    let mut known = ClassDistribution::zeros(class_count);
    for (case, w) in subset.iter() {
        if let Some(v) = column.get(case as usize) {
            let class = ts.class_of(case as usize);
            parts[v as usize].add(class, w);
            known.add(class, w);
        }
    }
    if known.total <= 0.0 {
        return GainResult::ZERO;
    }

    let mut expected = 0.0;
    for part in &parts {
        if part.total > 0.0 {
            expected += (part.total / known.total) * entropy_bits(part);
        }
    }
    GainResult { gain: entropy_bits(&known) - expected, local_threshold: None }
}

/// One known-valued case of the scanned subset.
#[derive(Clone, Copy)]
struct GainItem {
    value_index: u32,
    class: u32,
    weight: f64,
}

/// Information gain of a continuous attribute over the known-valued cases of
/// the subset, together with the maximizing local threshold (the midpoint of
/// the adjacent distinct values around the best cut).
///
/// Results with no positive-gain candidate are normalized to gain 0 with no
/// threshold, so enabling the boundary restriction never changes the result.
pub fn gain_continuous(
    subset: &CaseSubset,
    attr: usize,
    ts: &TrainingSet,
    opts: GainOptions,
) -> GainResult {
    debug_assert!(ts.attribute(attr).is_continuous());
    let column = ts.column(attr);
    let class_count = ts.class_count();

    let mut items = Vec::with_capacity(subset.len());
    let mut known = ClassDistribution::zeros(class_count);
    for (case, w) in subset.iter() {
        if let Some(value_index) = column.get(case as usize) {
            let class = ts.class_of(case as usize) as u32;
            items.push(GainItem { value_index, class, weight: w });
            known.add(class as usize, w);
        }
    }
    if items.is_empty() {
        return GainResult::ZERO;
    }

    sort_items(&mut items, opts.counting_sort);
    if items[0].value_index == items[items.len() - 1].value_index {
        // fewer than 2 distinct known values
        return GainResult::ZERO;
    }

    // Group runs of equal value, remembering whether a run is pure and in
    // which class: a cut between two runs pure in the same class cannot be
    // the maximizer.
    let mut groups: Vec<(usize, usize, Option<u32>)> = Vec::new();
    let mut start = 0;
    while start < items.len() {
        let value_index = items[start].value_index;
        let mut end = start;
        let mut pure = Some(items[start].class);
        while end < items.len() && items[end].value_index == value_index {
            if pure != Some(items[end].class) {
                pure = None;
            }
            end += 1;
        }
        groups.push((start, end, pure));
        start = end;
    }

    let table = ts.sorted_values(attr);
    let total_info = entropy_bits(&known);
    let mut left = ClassDistribution::zeros(class_count);
    let mut right = known.clone();
    let mut best_gain = f64::NEG_INFINITY;
    let mut best_threshold = None;

    for g in 0..groups.len() - 1 {
        let (start, end, pure) = groups[g];
        for item in &items[start..end] {
            left.add(item.class as usize, item.weight);
            right.subtract(item.class as usize, item.weight);
        }
        if opts.boundary_restriction {
            let next_pure = groups[g + 1].2;
            if pure.is_some() && pure == next_pure {
                continue;
            }
        }
        let expected = (left.total / known.total) * entropy_bits(&left)
            + (right.total / known.total) * entropy_bits(&right);
        let gain = total_info - expected;
        if gain > best_gain {
            best_gain = gain;
            let value = table[items[start].value_index as usize];
            let next_value = table[items[end].value_index as usize];
            best_threshold = Some((value + next_value) / 2.0);
        }
    }

    if best_gain <= 0.0 {
        return GainResult::ZERO;
    }
    GainResult { gain: best_gain, local_threshold: best_threshold }
}

fn sort_items(items: &mut [GainItem], counting: bool) {
    if counting {
        let min = items.iter().map(|it| it.value_index).min().unwrap();
        let max = items.iter().map(|it| it.value_index).max().unwrap();
        let range = (max - min) as usize + 1;
        // Counting sort pays off on narrow ranges (lower tree nodes); fall
        // back to the comparison sort when the range dwarfs the subset.
        if range <= items.len().saturating_mul(4).max(64) {
            counting_sort(items, min, range);
            return;
        }
    }
    items.sort_by_key(|it| it.value_index);
}

/// Stable counting sort by value index; equal indexes keep subset order,
/// matching the stable comparison sort bit for bit.
fn counting_sort(items: &mut [GainItem], min: u32, range: usize) {
    let mut offsets = vec![0usize; range + 1];
    for it in items.iter() {
        offsets[(it.value_index - min) as usize + 1] += 1;
    }
    for i in 1..offsets.len() {
        offsets[i] += offsets[i - 1];
    }
    let mut out = vec![GainItem { value_index: 0, class: 0, weight: 0.0 }; items.len()];
    for it in items.iter() {
        let slot = &mut offsets[(it.value_index - min) as usize];
        out[*slot] = *it;
        *slot += 1;
    }
    items.copy_from_slice(&out);
}

/// Resolves a local threshold to the global one: the greatest value of the
/// attribute in the whole training set strictly below the local threshold,
/// found by binary search of the sorted value table. When no table value is
/// below, the smallest table value is returned.
pub fn find_threshold(local_threshold: f64, attr: usize, ts: &TrainingSet) -> f64 {
    let table = ts.sorted_values(attr);
    debug_assert!(!table.is_empty());
    let below = table.partition_point(|&t| t < local_threshold);
    if below == 0 {
        table[0]
    } else {
        table[below - 1]
    }
}

/// Index of a value inside the attribute's sorted table. The value must come
/// from the table (as `find_threshold` results do).
pub(crate) fn table_index_of(value: f64, attr: usize, ts: &TrainingSet) -> u32 {
    let table = ts.sorted_values(attr);
    let i = table.partition_point(|&t| t < value);
    debug_assert!(i < table.len() && table[i] == value);
    i as u32
}
