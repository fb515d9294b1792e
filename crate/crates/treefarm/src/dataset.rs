//! Columnar training-set storage.
//!
//! The training set is stored by columns, not by rows: one column per
//! predictive attribute plus one class column. Continuous cells hold indexes
//! into a per-attribute ascending table of distinct values, so gain
//! computations sort small integers and threshold lookups binary-search the
//! table. Unknown cells hold a sentinel.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Sentinel for an unknown cell inside a column.
pub const UNKNOWN: u32 = u32::MAX;

/// Unknown marker in data files.
pub const UNKNOWN_FIELD: &str = "?";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributeKind {
    /// Finite domain; cells index into `domain`.
    Discrete { domain: Vec<String> },
    /// Real-valued; cells index into the attribute's sorted value table.
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSchema {
    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, AttributeKind::Continuous)
    }

    /// Number of split outcomes a test on this attribute has.
    pub fn outcome_count(&self) -> usize {
        match &self.kind {
            AttributeKind::Discrete { domain } => domain.len(),
            AttributeKind::Continuous => 2,
        }
    }
}

/// Parsed schema file: predictive attributes in declaration order plus the
/// class domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub attributes: Vec<AttributeSchema>,
    pub classes: Vec<String>,
}

/// One column of the training set. Cells are `UNKNOWN` or an index: into the
/// declared domain for discrete attributes, into the sorted value table for
/// continuous ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column(Vec<u32>);

impl Column {
    #[inline]
    pub fn get(&self, case: usize) -> Option<u32> {
        let v = self.0[case];
        (v != UNKNOWN).then_some(v)
    }

    #[inline]
    pub fn raw(&self) -> &[u32] {
        &self.0
    }
}

/// Immutable columnar training set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    schema: Vec<AttributeSchema>,
    classes: Vec<String>,
    columns: Vec<Column>,
    class_column: Vec<u32>,
    /// Ascending distinct known values, one table per attribute (empty for
    /// discrete attributes).
    sorted_values: Vec<Vec<f64>>,
    case_count: usize,
}

impl TrainingSet {
    pub fn case_count(&self) -> usize {
        self.case_count
    }

    pub fn attribute_count(&self) -> usize {
        self.schema.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn attribute(&self, attr: usize) -> &AttributeSchema {
        &self.schema[attr]
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn column(&self, attr: usize) -> &Column {
        &self.columns[attr]
    }

    #[inline]
    pub fn class_of(&self, case: usize) -> usize {
        self.class_column[case] as usize
    }

    /// Sorted distinct known values of a continuous attribute over the whole
    /// training set.
    pub fn sorted_values(&self, attr: usize) -> &[f64] {
        &self.sorted_values[attr]
    }

    /// Decodes a continuous cell back to its raw value.
    pub fn continuous_value(&self, attr: usize, case: usize) -> Option<f64> {
        self.columns[attr]
            .get(case)
            .map(|i| self.sorted_values[attr][i as usize])
    }
}

/// Weighted case indices associated with one decision node.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSubset {
    pub case_ids: Vec<u32>,
    pub weights: Vec<f64>,
    pub total_weight: f64,
}

impl CaseSubset {
    pub fn new(case_ids: Vec<u32>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(case_ids.len(), weights.len());
        let total_weight = weights.iter().sum();
        CaseSubset { case_ids, weights, total_weight }
    }

    pub fn len(&self) -> usize {
        self.case_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.case_ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.case_ids.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Subset holding every case of the training set with weight 1.0.
pub fn root_subset(ts: &TrainingSet) -> Result<CaseSubset> {
    if ts.case_count == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let case_ids: Vec<u32> = (0..ts.case_count as u32).collect();
    let weights = vec![1.0; ts.case_count];
    Ok(CaseSubset::new(case_ids, weights))
}

/// Parses a schema file.
///
/// One line per attribute, `name: discrete v1,v2,...` or `name: continuous`,
/// plus exactly one `class: c1,c2,...` line. `#` starts a comment.
pub fn load_schema(text: &str) -> Result<Schema> {
    let mut attributes: Vec<AttributeSchema> = Vec::new();
    let mut classes: Option<Vec<String>> = None;
    let mut seen = HashMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        let (name, rest) = line.split_once(':').ok_or_else(|| Error::Schema {
            line: lineno,
            msg: "expected `name: kind`".into(),
        })?;
        let name = name.trim();
        let rest = rest.trim();
        if name.is_empty() {
            return Err(Error::Schema { line: lineno, msg: "empty attribute name".into() });
        }

        if name == "class" {
            if classes.is_some() {
                return Err(Error::Schema { line: lineno, msg: "class declared twice".into() });
            }
            let domain = split_values(rest);
            if domain.is_empty() {
                return Err(Error::Schema { line: lineno, msg: "empty class domain".into() });
            }
            check_domain(&domain, lineno)?;
            classes = Some(domain);
            continue;
        }

        if seen.insert(name.to_string(), lineno).is_some() {
            return Err(Error::Schema {
                line: lineno,
                msg: format!("duplicate attribute name `{name}`"),
            });
        }

        let kind = if rest == "continuous" {
            AttributeKind::Continuous
        } else if let Some(values) = rest.strip_prefix("discrete") {
            let domain = split_values(values);
            if domain.is_empty() {
                return Err(Error::Schema {
                    line: lineno,
                    msg: format!("discrete attribute `{name}` has an empty domain"),
                });
            }
            check_domain(&domain, lineno)?;
            AttributeKind::Discrete { domain }
        } else {
            let kw = rest.split_whitespace().next().unwrap_or("");
            return Err(Error::Schema {
                line: lineno,
                msg: format!("unknown attribute kind `{kw}`"),
            });
        };

        attributes.push(AttributeSchema { name: name.to_string(), kind });
    }

    let classes = classes.ok_or_else(|| Error::Schema {
        line: text.lines().count(),
        msg: "missing class declaration".into(),
    })?;
    Ok(Schema { attributes, classes })
}

fn split_values(s: &str) -> Vec<String> {
    s.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
}

fn check_domain(domain: &[String], lineno: usize) -> Result<()> {
    let mut uniq = HashMap::new();
    for v in domain {
        if v == UNKNOWN_FIELD {
            return Err(Error::Schema {
                line: lineno,
                msg: "`?` is reserved for unknown values".into(),
            });
        }
        if uniq.insert(v, ()).is_some() {
            return Err(Error::Schema { line: lineno, msg: format!("duplicate value `{v}`") });
        }
    }
    Ok(())
}

/// Parses CSV case data against a schema into the columnar form.
///
/// Each row holds one field per attribute in schema order, class last, `?`
/// for unknown. Continuous cells are rewritten as indexes into the ascending
/// distinct-value table built here.
pub fn load_data(schema: &Schema, csv: &str) -> Result<TrainingSet> {
    let n_attrs = schema.attributes.len();

    let discrete_lookup: Vec<Option<HashMap<&str, u32>>> = schema
        .attributes
        .iter()
        .map(|a| match &a.kind {
            AttributeKind::Discrete { domain } => Some(
                domain.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect(),
            ),
            AttributeKind::Continuous => None,
        })
        .collect();
    let class_lookup: HashMap<&str, u32> =
        schema.classes.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect();

    // First pass: parse rows; continuous cells keep their raw value until the
    // per-attribute tables exist.
    let mut discrete_cols: Vec<Vec<u32>> = vec![Vec::new(); n_attrs];
    let mut raw_continuous: Vec<Vec<f64>> = vec![Vec::new(); n_attrs];
    let mut class_column: Vec<u32> = Vec::new();
    let mut case_count = 0usize;

    for (idx, raw_line) in csv.lines().enumerate() {
        let rowno = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        for (attr, spec) in schema.attributes.iter().enumerate() {
            let field = fields
                .next()
                .ok_or_else(|| Error::Data {
                    row: rowno,
                    msg: format!("expected {} fields", n_attrs + 1),
                })?
                .trim();
            match &spec.kind {
                AttributeKind::Discrete { .. } => {
                    let cell = if field == UNKNOWN_FIELD {
                        UNKNOWN
                    } else {
                        *discrete_lookup[attr].as_ref().unwrap().get(field).ok_or_else(|| {
                            Error::Data {
                                row: rowno,
                                msg: format!(
                                    "value `{field}` not in the domain of `{}`",
                                    spec.name
                                ),
                            }
                        })?
                    };
                    discrete_cols[attr].push(cell);
                }
                AttributeKind::Continuous => {
                    let value = if field == UNKNOWN_FIELD {
                        f64::NAN
                    } else {
                        let v: f64 = field.parse().map_err(|_| Error::Data {
                            row: rowno,
                            msg: format!("unparsable number `{field}` for `{}`", spec.name),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::Data {
                                row: rowno,
                                msg: format!("non-finite value for `{}`", spec.name),
                            });
                        }
                        v
                    };
                    raw_continuous[attr].push(value);
                }
            }
        }
        let class_field = fields
            .next()
            .ok_or_else(|| Error::Data { row: rowno, msg: format!("expected {} fields", n_attrs + 1) })?
            .trim();
        let class = *class_lookup.get(class_field).ok_or_else(|| Error::Data {
            row: rowno,
            msg: format!("unknown class value `{class_field}`"),
        })?;
        if fields.next().is_some() {
            return Err(Error::Data { row: rowno, msg: format!("expected {} fields", n_attrs + 1) });
        }
        class_column.push(class);
        case_count += 1;
    }

    // Second pass: build the sorted distinct-value tables and rewrite
    // continuous cells as indexes into them.
    let mut columns = Vec::with_capacity(n_attrs);
    let mut sorted_values = vec![Vec::new(); n_attrs];
    for (attr, spec) in schema.attributes.iter().enumerate() {
        match &spec.kind {
            AttributeKind::Discrete { .. } => {
                columns.push(Column(std::mem::take(&mut discrete_cols[attr])));
            }
            AttributeKind::Continuous => {
                let raw = &raw_continuous[attr];
                let mut table: Vec<f64> = raw.iter().copied().filter(|v| !v.is_nan()).collect();
                table.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                table.dedup();
                let cells = raw
                    .iter()
                    .map(|v| {
                        if v.is_nan() {
                            UNKNOWN
                        } else {
                            table.partition_point(|t| t < v) as u32
                        }
                    })
                    .collect();
                sorted_values[attr] = table;
                columns.push(Column(cells));
            }
        }
    }

    Ok(TrainingSet {
        schema: schema.attributes.clone(),
        classes: schema.classes.clone(),
        columns,
        class_column,
        sorted_values,
        case_count,
    })
}
