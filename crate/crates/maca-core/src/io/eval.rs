//! Classification metrics: accuracy, confusion matrix, per-class
//! precision/recall.

use serde::Serialize;

use crate::classifier::ClassId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    /// Number of truth items in this class.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub classes: Vec<String>,
    /// `confusion[truth][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub total: usize,
}

/// Scores predictions against truth over the given class table.
pub fn evaluate(
    predicted: &[ClassId],
    truth: &[ClassId],
    classes: &[String],
) -> Result<EvaluationReport> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::InvalidInput("nothing to evaluate".into()));
    }
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        if p.0 as usize >= k || t.0 as usize >= k {
            return Err(Error::InvalidInput(format!(
                "label {} outside class table of size {k}",
                p.0.max(t.0)
            )));
        }
        confusion[t.0 as usize][p.0 as usize] += 1;
    }
    let total = predicted.len();
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let per_class = (0..k)
        .map(|i| {
            let support: usize = confusion[i].iter().sum();
            let predicted_i: usize = confusion.iter().map(|row| row[i]).sum();
            let ratio = |num: usize, den: usize| {
                if den == 0 {
                    0.0
                } else {
                    num as f64 / den as f64
                }
            };
            ClassMetrics {
                class: classes[i].clone(),
                precision: ratio(confusion[i][i], predicted_i),
                recall: ratio(confusion[i][i], support),
                support,
            }
        })
        .collect();
    Ok(EvaluationReport {
        accuracy: correct as f64 / total as f64,
        classes: classes.to_vec(),
        confusion,
        per_class,
        total,
    })
}
