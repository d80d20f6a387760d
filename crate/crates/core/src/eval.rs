//! Scoring against ground truth.
//!
//! Rows are truth classes and columns are predicted classes plus a final
//! UnID column. Fragments predicted as Silence or Filtered, and fragments
//! whose truth is Silence, are kept out of the matrix and counted in
//! [`ExcludedTally`] instead.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::pipeline::{csv_writer, ERROR, FILTERED, SILENCE, UNID};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExcludedTally {
    /// Truth Silence, predicted Silence.
    pub silence_detected: u64,
    /// Truth Silence, predicted anything else.
    pub silence_missed: u64,
    /// Truth class, predicted Silence.
    pub class_as_silence: u64,
    /// Truth class, predicted Filtered.
    pub filtered: u64,
    /// Fragments that failed to decode or encode.
    pub errors: u64,
}

impl ExcludedTally {
    /// Fraction of true silences labelled Silence; `None` without any.
    pub fn silence_recall(&self) -> Option<f64> {
        let total = self.silence_detected + self.silence_missed;
        (total > 0).then(|| self.silence_detected as f64 / total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    /// `classes.len()` rows of `classes.len() + 1` columns.
    counts: Vec<Vec<u64>>,
    pub excluded: ExcludedTally,
}

impl ConfusionMatrix {
    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k + 1) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: counts.len(),
            });
        }
        Ok(ConfusionMatrix {
            classes,
            counts,
            excluded: ExcludedTally::default(),
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn unid(&self, truth: usize) -> u64 {
        self.counts[truth][self.classes.len()]
    }

    pub fn support(&self, truth: usize) -> u64 {
        self.counts[truth].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// `truth,<class...>,UnID` header then one row per truth class.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        let mut header = vec!["truth".to_string()];
        header.extend(self.classes.iter().cloned());
        header.push(UNID.to_string());
        w.write_record(&header)?;
        for (class, row) in self.classes.iter().zip(&self.counts) {
            let mut rec = vec![class.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<confusion matrix>", e))?;
        Ok(())
    }
}

/// One predicted or true label for a fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledId {
    pub source_id: String,
    pub label: String,
}

impl LabeledId {
    pub fn new(source_id: impl Into<String>, label: impl Into<String>) -> Self {
        LabeledId {
            source_id: source_id.into(),
            label: label.into(),
        }
    }
}

/// Classes are the distinct truth labels, sorted. Silence is the only
/// reserved label accepted as truth.
pub fn score(predictions: &[LabeledId], truth: &[LabeledId]) -> Result<ConfusionMatrix> {
    let classes: Vec<String> = truth
        .iter()
        .map(|t| t.label.as_str())
        .filter(|l| ![SILENCE, UNID, FILTERED, ERROR].contains(l))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    score_with_classes(predictions, truth, classes)
}

pub fn score_with_classes(predictions: &[LabeledId], truth: &[LabeledId], classes: Vec<String>) -> Result<ConfusionMatrix> {
    if classes.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut truth_of: HashMap<&str, Option<usize>> = HashMap::with_capacity(truth.len());
    for t in truth {
        let slot = match (t.label.as_str(), index.get(t.label.as_str())) {
            (_, Some(&i)) => Some(i),
            (SILENCE, None) => None,
            _ => {
                return Err(Error::UnknownTruthLabel {
                    id: t.source_id.clone(),
                    label: t.label.clone(),
                })
            }
        };
        truth_of.insert(t.source_id.as_str(), slot);
    }

    let k = classes.len();
    let mut counts = vec![vec![0u64; k + 1]; k];
    let mut ex = ExcludedTally::default();
    for p in predictions {
        let truth_row = *truth_of
            .get(p.source_id.as_str())
            .ok_or_else(|| Error::IdMismatch { id: p.source_id.clone() })?;
        let predicted = match p.label.as_str() {
            ERROR => {
                ex.errors += 1;
                continue;
            }
            SILENCE => None,
            FILTERED => {
                if truth_row.is_some() {
                    ex.filtered += 1;
                } else {
                    ex.silence_missed += 1;
                }
                continue;
            }
            UNID => Some(k),
            label => Some(*index.get(label).ok_or_else(|| Error::UnknownPredictedLabel {
                id: p.source_id.clone(),
                label: label.to_string(),
            })?),
        };
        match (truth_row, predicted) {
            (Some(row), Some(col)) => counts[row][col] += 1,
            (Some(_), None) => ex.class_as_silence += 1,
            (None, None) => ex.silence_detected += 1,
            (None, Some(_)) => ex.silence_missed += 1,
        }
    }
    let mut cm = ConfusionMatrix::from_counts(classes, counts)?;
    cm.excluded = ex;
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when a denominator was zero and a metric was reported as 0.
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub total: u64,
    pub correct: u64,
    pub unid: u64,
    pub excluded: ExcludedTally,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// One-vs-rest precision, recall and F1 per class; UnID predictions count
/// against recall only.
pub fn report(cm: &ConfusionMatrix) -> Result<ClassificationReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let k = cm.classes.len();
    let per_class = (0..k)
        .map(|i| {
            let tp = cm.get(i, i);
            let predicted: u64 = (0..k).map(|r| cm.get(r, i)).sum();
            let support = cm.support(i);
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = match (precision, recall) {
                (Some(p), Some(r)) if p + r > 0.0 => 2.0 * p * r / (p + r),
                _ => 0.0,
            };
            ClassMetrics {
                class: cm.classes[i].clone(),
                precision: precision.unwrap_or(0.0),
                recall: recall.unwrap_or(0.0),
                f1,
                support,
                undefined: precision.is_none() || recall.is_none(),
            }
        })
        .collect();
    let correct = cm.correct();
    Ok(ClassificationReport {
        per_class,
        accuracy: correct as f64 / total as f64,
        total,
        correct,
        unid: (0..k).map(|i| cm.unid(i)).sum(),
        excluded: cm.excluded.clone(),
    })
}

impl ClassificationReport {
    pub fn metrics(&self, class: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|m| m.class == class)
    }

    /// Fixed-width table: one row per class, then overall accuracy.
    pub fn render_text(&self) -> String {
        let width = self.per_class.iter().map(|m| m.class.len()).max().unwrap_or(0).max(5);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$} | {:>9} {:>6} {:>6} {:>7}", "Class", "Precision", "Recall", "F1", "Support");
        let _ = writeln!(s, "{}", "-".repeat(width + 35));
        for m in &self.per_class {
            let flag = if m.undefined { " *" } else { "" };
            let _ = writeln!(
                s,
                "{:<width$} | {:>9.2} {:>6.2} {:>6.2} {:>7}{flag}",
                m.class, m.precision, m.recall, m.f1, m.support
            );
        }
        let _ = writeln!(s, "{}", "=".repeat(width + 35));
        let _ = writeln!(s, "Overall Accuracy: {:.2}   scored: {}", self.accuracy, self.total);
        let _ = writeln!(s, "UnID: {}", self.unid);
        let ex = &self.excluded;
        let _ = writeln!(
            s,
            "Excluded: silence detected {}, silence missed {}, class as silence {}, filtered {}, errors {}",
            ex.silence_detected, ex.silence_missed, ex.class_as_silence, ex.filtered, ex.errors
        );
        if self.per_class.iter().any(|m| m.undefined) {
            let _ = writeln!(s, "* zero denominator, metric reported as 0");
        }
        s
    }

    /// `class,precision,recall,f1,support` rows plus an `overall` accuracy row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["class", "precision", "recall", "f1", "support"])?;
        for m in &self.per_class {
            w.write_record([
                m.class.clone(),
                format!("{:.6}", m.precision),
                format!("{:.6}", m.recall),
                format!("{:.6}", m.f1),
                m.support.to_string(),
            ])?;
        }
        w.write_record([
            "overall".to_string(),
            String::new(),
            String::new(),
            format!("{:.6}", self.accuracy),
            self.total.to_string(),
        ])?;
        w.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }
}
