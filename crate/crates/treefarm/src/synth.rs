//! Seed-deterministic synthetic dataset generator.
//!
//! Labels follow a rule structure the tree can actually learn: a disjunction
//! of conjunctions of attribute conditions (threshold tests on continuous
//! attributes, equality tests on discrete ones), plus a little label noise.
//! Unknown fields are injected per cell after labeling, so unknowns hide
//! information instead of changing it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{load_data, load_schema, TrainingSet};
use crate::error::{Error, Result};

const DISCRETE_DOMAIN: usize = 4;
const LABEL_NOISE: f64 = 0.02;

/// Shape and seed of one generated dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub case_count: usize,
    pub continuous_attrs: usize,
    pub discrete_attrs: usize,
    pub classes: usize,
    /// Probability that any attribute field is masked out, in [0, 1).
    pub unknown_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// 9 attributes (3 discrete + 6 continuous), 2 classes: the shape of the
    /// largest set used in the reference measurements.
    fn default() -> Self {
        SyntheticSpec {
            case_count: 10_000,
            continuous_attrs: 6,
            discrete_attrs: 3,
            classes: 2,
            unknown_rate: 0.0,
            seed: 1,
        }
    }
}

enum Condition {
    /// continuous attribute ≤ threshold
    AtMost(usize, f64),
    /// discrete attribute = value index
    Equals(usize, u32),
}

impl Condition {
    fn matches(&self, discrete: &[u32], continuous: &[f64], discrete_count: usize) -> bool {
        match *self {
            Condition::Equals(attr, value) => discrete[attr] == value,
            Condition::AtMost(attr, threshold) => continuous[attr - discrete_count] <= threshold,
        }
    }
}

/// Generates schema and CSV text for the spec. Byte-identical for equal
/// specs.
pub fn generate(spec: &SyntheticSpec) -> Result<(String, String)> {
    if spec.case_count == 0 || spec.classes < 2 {
        return Err(Error::InvalidConfig(
            "synthetic spec needs at least 1 case and 2 classes".into(),
        ));
    }
    if spec.continuous_attrs + spec.discrete_attrs == 0 {
        return Err(Error::InvalidConfig("synthetic spec needs at least 1 attribute".into()));
    }
    if !(0.0..1.0).contains(&spec.unknown_rate) {
        return Err(Error::InvalidConfig("unknown rate must lie in [0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let attr_count = spec.discrete_attrs + spec.continuous_attrs;

    let mut schema = String::from("# synthetic dataset\n");
    for d in 0..spec.discrete_attrs {
        schema.push_str(&format!("d{d}: discrete"));
        for v in 0..DISCRETE_DOMAIN {
            schema.push_str(if v == 0 { " " } else { "," });
            schema.push_str(&format!("v{v}"));
        }
        schema.push('\n');
    }
    for c in 0..spec.continuous_attrs {
        schema.push_str(&format!("c{c}: continuous\n"));
    }
    schema.push_str("class: ");
    for k in 0..spec.classes {
        if k > 0 {
            schema.push(',');
        }
        schema.push_str(&format!("k{k}"));
    }
    schema.push('\n');

    // The hidden concept: 2-3 rules of 1-2 conditions each.
    let rule_count = rng.gen_range(2..=3);
    let rules: Vec<Vec<Condition>> = (0..rule_count)
        .map(|_| {
            (0..rng.gen_range(1..=2))
                .map(|_| {
                    let attr = rng.gen_range(0..attr_count);
                    if attr < spec.discrete_attrs {
                        Condition::Equals(attr, rng.gen_range(0..DISCRETE_DOMAIN as u32))
                    } else {
                        Condition::AtMost(attr, rng.gen_range(0.25..0.75))
                    }
                })
                .collect()
        })
        .collect();

    let mut csv = String::with_capacity(spec.case_count * (attr_count * 7 + 4));
    let mut discrete = vec![0u32; spec.discrete_attrs];
    let mut continuous = vec![0f64; spec.continuous_attrs];
    for _ in 0..spec.case_count {
        for value in discrete.iter_mut() {
            *value = rng.gen_range(0..DISCRETE_DOMAIN as u32);
        }
        for value in continuous.iter_mut() {
            // 4 decimals keep the per-attribute value tables bounded
            *value = (rng.gen_range(0.0..1.0f64) * 1e4).round() / 1e4;
        }

        let matched = rules
            .iter()
            .position(|conds| {
                conds.iter().all(|c| c.matches(&discrete, &continuous, spec.discrete_attrs))
            });
        let mut class = match matched {
            Some(i) => 1 + i % (spec.classes - 1),
            None => 0,
        };
        if rng.gen::<f64>() < LABEL_NOISE {
            class = rng.gen_range(0..spec.classes);
        }

        for value in discrete.iter() {
            let masked = rng.gen::<f64>() < spec.unknown_rate;
            if masked {
                csv.push('?');
            } else {
                csv.push_str(&format!("v{value}"));
            }
            csv.push(',');
        }
        for value in continuous.iter() {
            let masked = rng.gen::<f64>() < spec.unknown_rate;
            if masked {
                csv.push('?');
            } else {
                csv.push_str(&format!("{value:.4}"));
            }
            csv.push(',');
        }
        csv.push_str(&format!("k{class}\n"));
    }
    Ok((schema, csv))
}

/// Generates and immediately loads the dataset.
pub fn generate_training_set(spec: &SyntheticSpec) -> Result<TrainingSet> {
    let (schema_text, csv_text) = generate(spec)?;
    let schema = load_schema(&schema_text)?;
    load_data(&schema, &csv_text)
}
