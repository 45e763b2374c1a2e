//! Confusion matrix, overall accuracy and kappa.
//!
//! Leaf is the positive class: TP counts leaf points predicted leaf, TN wood
//! predicted wood, FP wood predicted leaf and FN leaf predicted wood.
//!
//! Two kappa variants are provided. `Standard` is Cohen's kappa with chance
//! agreement from the product of marginals. `Paper` uses the alternative
//! expectation term `((TP+FP)(TP+TN) + (TN+FN)(FP+FN)) / N²`, which
//! coincides with Cohen's on symmetric matrices but not in general.

use std::fmt::Write as _;
use std::ops::Add;
use std::path::Path;

use crate::{Class, Error, LabelVector, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn n(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Leaf and wood roles exchanged.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;
    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn confusion(pred: &LabelVector, truth: &LabelVector) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "prediction has {} labels, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate empty label vectors".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in pred.iter().zip(truth.iter()) {
        match (t, p) {
            (Class::Leaf, Class::Leaf) => cm.tp += 1,
            (Class::Wood, Class::Wood) => cm.tn += 1,
            (Class::Wood, Class::Leaf) => cm.fp += 1,
            (Class::Leaf, Class::Wood) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// `(TP + TN) / N`.
pub fn overall_accuracy(cm: &ConfusionMatrix) -> f64 {
    (cm.tp + cm.tn) as f64 / cm.n() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KappaVariant {
    Paper,
    Standard,
}

impl KappaVariant {
    pub fn name(self) -> &'static str {
        match self {
            KappaVariant::Paper => "paper",
            KappaVariant::Standard => "standard",
        }
    }

    pub fn parse(s: &str) -> Option<KappaVariant> {
        match s {
            "paper" => Some(KappaVariant::Paper),
            "standard" => Some(KappaVariant::Standard),
            _ => None,
        }
    }
}

/// Numerator of the chance-agreement term, in exact integer arithmetic.
fn expected_numerator(cm: &ConfusionMatrix, variant: KappaVariant) -> u128 {
    let (tp, tn, fp, fn_) = (cm.tp as u128, cm.tn as u128, cm.fp as u128, cm.fn_ as u128);
    match variant {
        KappaVariant::Paper => (tp + fp) * (tp + tn) + (tn + fn_) * (fp + fn_),
        KappaVariant::Standard => (tp + fp) * (tp + fn_) + (fn_ + tn) * (fp + tn),
    }
}

/// Chance agreement `p_e` for the given variant.
pub fn expected_agreement(cm: &ConfusionMatrix, variant: KappaVariant) -> f64 {
    let n = cm.n() as f64;
    expected_numerator(cm, variant) as f64 / (n * n)
}

/// `(p_o - p_e) / (1 - p_e)`; when `p_e = 1` exactly the result is 1 for
/// perfect agreement and 0 otherwise.
///
/// Evaluated as `(N (TP + TN) - S) / (N^2 - S)` over integers, with `S` the
/// chance-agreement numerator, so the only rounding is the final division.
pub fn kappa(cm: &ConfusionMatrix, variant: KappaVariant) -> f64 {
    let n = cm.n() as u128;
    let s = expected_numerator(cm, variant);
    if s == n * n {
        return if cm.fp == 0 && cm.fn_ == 0 { 1.0 } else { 0.0 };
    }
    let num = (n * (cm.tp + cm.tn) as u128) as i128 - s as i128;
    let den = n * n - s;
    let g = gcd(num.unsigned_abs(), den);
    (num / g as i128) as f64 / (den / g) as f64
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub p_o: f64,
    pub kappa_paper: f64,
    pub kappa_standard: f64,
}

impl Metrics {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        Metrics {
            p_o: overall_accuracy(cm),
            kappa_paper: kappa(cm, KappaVariant::Paper),
            kappa_standard: kappa(cm, KappaVariant::Standard),
        }
    }

    pub fn kappa(&self, v: KappaVariant) -> f64 {
        match v {
            KappaVariant::Paper => self.kappa_paper,
            KappaVariant::Standard => self.kappa_standard,
        }
    }

    /// Plain difference `self - baseline` of every metric.
    pub fn improvement_over(&self, baseline: &Metrics) -> Metrics {
        Metrics {
            p_o: self.p_o - baseline.p_o,
            kappa_paper: self.kappa_paper - baseline.kappa_paper,
            kappa_standard: self.kappa_standard - baseline.kappa_standard,
        }
    }
}

/// One row of an accuracy report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub tree: String,
    pub method: String,
    pub cm: ConfusionMatrix,
    pub metrics: Metrics,
}

impl ReportRow {
    pub fn new(tree: impl Into<String>, method: impl Into<String>, cm: ConfusionMatrix) -> Self {
        ReportRow {
            tree: tree.into(),
            method: method.into(),
            metrics: Metrics::from_confusion(&cm),
            cm,
        }
    }
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "tree",
    "method",
    "p_o",
    "kappa_paper",
    "kappa_standard",
    "TP",
    "TN",
    "FP",
    "FN",
];

fn row_cells(r: &ReportRow) -> [String; 9] {
    [
        r.tree.clone(),
        r.method.clone(),
        format!("{:.4}", r.metrics.p_o),
        format!("{:.4}", r.metrics.kappa_paper),
        format!("{:.4}", r.metrics.kappa_standard),
        r.cm.tp.to_string(),
        r.cm.tn.to_string(),
        r.cm.fp.to_string(),
        r.cm.fn_.to_string(),
    ]
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = REPORT_COLUMNS.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&row_cells(r).join(","));
        s.push('\n');
    }
    s
}

/// Aligned plain-text table; numeric columns are right-aligned.
pub fn report_table(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 9]> = rows.iter().map(row_cells).collect();
    let mut width = REPORT_COLUMNS.map(str::len);
    for c in &cells {
        for (w, v) in width.iter_mut().zip(c) {
            *w = (*w).max(v.len());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, vals: &[&str]| {
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i < 2 {
                let _ = write!(s, "{v:<w$}", w = width[i]);
            } else {
                let _ = write!(s, "{v:>w$}", w = width[i]);
            }
        }
        let trimmed = s.trim_end().len();
        s.truncate(trimmed);
        s.push('\n');
    };
    line(&mut s, &REPORT_COLUMNS);
    for c in &cells {
        let refs: Vec<&str> = c.iter().map(String::as_str).collect();
        line(&mut s, &refs);
    }
    s
}

pub fn write_report(rows: &[ReportRow], csv_path: &Path, txt_path: Option<&Path>) -> Result<()> {
    std::fs::write(csv_path, report_csv(rows)).map_err(|e| Error::io(csv_path, e))?;
    if let Some(p) = txt_path {
        std::fs::write(p, report_table(rows)).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}
