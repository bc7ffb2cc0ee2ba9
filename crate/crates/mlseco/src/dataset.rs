//! Typed multi-label datasets: attribute-valued instances plus a binary
//! label matrix, per-label minority classes, and the ingestion-time
//! transformations (label inversion, missing-value imputation).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttributeKind {
    Numeric,
    /// Declared value list; values are referenced by index everywhere else.
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn nominal(name: impl Into<String>, values: Vec<String>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Nominal(values),
        }
    }
}

/// One attribute value. Nominal values are interned to their index in the
/// attribute's declared value list at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Numeric(f64),
    Nominal(u32),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<Value>,
}

/// Dense binary matrix, instances x labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl LabelMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        LabelMatrix {
            rows,
            cols,
            bits: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = LabelMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged label rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, bit: u8) {
        debug_assert!(bit <= 1);
        self.bits[row * self.cols + col] = bit;
    }

    pub fn count_ones(&self, col: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, col) == 1).count()
    }

    pub fn flip_column(&mut self, col: usize) {
        for r in 0..self.rows {
            let b = self.get(r, col);
            self.set(r, col, 1 - b);
        }
    }

    pub fn row(&self, row: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }
}

/// Minority class per label: 1 iff the label is set in strictly less than
/// half of the rows, 0 otherwise (an exact 50/50 split gives 0).
pub fn compute_minority_classes(labels: &LabelMatrix) -> Vec<u8> {
    let m = labels.rows();
    (0..labels.cols())
        .map(|c| if 2 * labels.count_ones(c) < m { 1 } else { 0 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelDataset {
    pub relation: String,
    /// Feature attributes only; label attributes live in `labels`.
    pub attributes: Vec<AttributeSpec>,
    pub instances: Vec<Instance>,
    pub labels: LabelMatrix,
    pub label_names: Vec<String>,
    /// Minority class t_i per label.
    pub minority: Vec<u8>,
    /// Label columns bit-flipped at ingestion, sorted ascending.
    pub inverted: Vec<usize>,
}

impl MultiLabelDataset {
    pub fn new(
        relation: String,
        attributes: Vec<AttributeSpec>,
        instances: Vec<Instance>,
        labels: LabelMatrix,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if instances.len() != labels.rows() {
            return Err(Error::Dataset(format!(
                "{} instances but {} label rows",
                instances.len(),
                labels.rows()
            )));
        }
        if label_names.len() != labels.cols() {
            return Err(Error::Dataset(format!(
                "{} label names but {} label columns",
                label_names.len(),
                labels.cols()
            )));
        }
        for (i, inst) in instances.iter().enumerate() {
            if inst.values.len() != attributes.len() {
                return Err(Error::Dataset(format!(
                    "instance {} has {} values, expected {}",
                    i,
                    inst.values.len(),
                    attributes.len()
                )));
            }
        }
        let minority = compute_minority_classes(&labels);
        Ok(MultiLabelDataset {
            relation,
            attributes,
            instances,
            labels,
            label_names,
            minority,
            inverted: Vec::new(),
        })
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.cols()
    }

    pub fn num_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn recompute_minority(&mut self) {
        self.minority = compute_minority_classes(&self.labels);
    }

    /// Bit-flip every label column whose minority class is 0, so that the
    /// minority class is 1 afterwards. Exactly balanced columns are left
    /// alone (flipping them would change nothing about the imbalance).
    /// Flipped column indices are recorded in `inverted`.
    pub fn invert_frequent_labels(&self) -> MultiLabelDataset {
        let mut out = self.clone();
        let m = out.num_instances();
        let mut inverted: BTreeSet<usize> = out.inverted.iter().copied().collect();
        for col in 0..out.num_labels() {
            let ones = out.labels.count_ones(col);
            if 2 * ones > m {
                out.labels.flip_column(col);
                inverted.insert(col);
            }
        }
        out.recompute_minority();
        out.inverted = inverted.into_iter().collect();
        out
    }

    /// Replace missing feature values: numeric columns by their mean,
    /// nominal columns by their mode (ties resolved to the lowest value
    /// index). A column with no observed value at all is an error.
    pub fn impute_missing(&self) -> Result<MultiLabelDataset> {
        let mut out = self.clone();
        for (col, attr) in self.attributes.iter().enumerate() {
            let mut has_missing = false;
            let fill = match &attr.kind {
                AttributeKind::Numeric => {
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for inst in &self.instances {
                        match inst.values[col] {
                            Value::Numeric(v) => {
                                sum += v;
                                count += 1;
                            }
                            Value::Missing => has_missing = true,
                            Value::Nominal(_) => {
                                return Err(Error::Dataset(format!(
                                    "nominal value in numeric column {:?}",
                                    attr.name
                                )))
                            }
                        }
                    }
                    if !has_missing {
                        continue;
                    }
                    if count == 0 {
                        return Err(Error::Dataset(format!(
                            "column {:?} has no observed values to impute from",
                            attr.name
                        )));
                    }
                    Value::Numeric(sum / count as f64)
                }
                AttributeKind::Nominal(values) => {
                    let mut counts = vec![0usize; values.len()];
                    for inst in &self.instances {
                        match inst.values[col] {
                            Value::Nominal(v) => counts[v as usize] += 1,
                            Value::Missing => has_missing = true,
                            Value::Numeric(_) => {
                                return Err(Error::Dataset(format!(
                                    "numeric value in nominal column {:?}",
                                    attr.name
                                )))
                            }
                        }
                    }
                    if !has_missing {
                        continue;
                    }
                    let (mode, &n) = counts
                        .iter()
                        .enumerate()
                        .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
                        .ok_or_else(|| {
                            Error::Dataset(format!("nominal column {:?} has no values", attr.name))
                        })?;
                    if n == 0 {
                        return Err(Error::Dataset(format!(
                            "column {:?} has no observed values to impute from",
                            attr.name
                        )));
                    }
                    Value::Nominal(mode as u32)
                }
            };
            for inst in &mut out.instances {
                if inst.values[col].is_missing() {
                    inst.values[col] = fill;
                }
            }
        }
        Ok(out)
    }

    /// Row-subset (for cross-validation folds). Minority classes are
    /// recomputed on the subset; the ingestion-time `inverted` record is
    /// carried over unchanged.
    pub fn subset(&self, rows: &[usize]) -> MultiLabelDataset {
        let instances: Vec<Instance> = rows.iter().map(|&r| self.instances[r].clone()).collect();
        let mut labels = LabelMatrix::zeros(rows.len(), self.num_labels());
        for (i, &r) in rows.iter().enumerate() {
            for c in 0..self.num_labels() {
                labels.set(i, c, self.labels.get(r, c));
            }
        }
        let minority = compute_minority_classes(&labels);
        MultiLabelDataset {
            relation: self.relation.clone(),
            attributes: self.attributes.clone(),
            instances,
            labels,
            label_names: self.label_names.clone(),
            minority,
            inverted: self.inverted.clone(),
        }
    }

    /// Versioned JSON dump of the full dataset, used by tests and tooling.
    pub fn to_canonical_json(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            format_version: u32,
            #[serde(flatten)]
            dataset: &'a MultiLabelDataset,
        }
        serde_json::to_string(&Canonical {
            format_version: 1,
            dataset: self,
        })
        .expect("dataset serialization cannot fail")
    }

    /// Content hash used to detect pool/model/dataset mismatches. Computed
    /// over the canonical ARFF rendering plus label metadata, so it is
    /// independent of incidental formatting in the source file.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(crate::arff::write_arff(self));
        hasher.update(b"\x00");
        hasher.update(self.label_names.join(",").as_bytes());
        hasher.update(b"\x00");
        let inv: Vec<String> = self.inverted.iter().map(|i| i.to_string()).collect();
        hasher.update(inv.join(",").as_bytes());
        let hex: Vec<String> = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        hex.join("")
    }
}
