//! Held-out evaluation of a trained model.

use serde::{Deserialize, Serialize};

use super::loss::sample_loss;
use super::model::{argmax, MlpModel};
use super::train::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub mean_loss: f64,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    /// Recall of each class; `None` where the class never occurs.
    pub fn per_class_recall(&self) -> Vec<Option<f64>> {
        self.confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let total: u64 = row.iter().sum();
                (total > 0).then(|| row[i] as f64 / total as f64)
            })
            .collect()
    }

    pub fn confusion_csv(&self) -> String {
        let k = self.confusion.len();
        let mut out = String::from("true");
        for j in 0..k {
            out.push_str(&format!(",pred_{j}"));
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            out.push_str(&i.to_string());
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn evaluate(model: &MlpModel, data: &Dataset) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::data("evaluation set is empty"));
    }
    let k = model.classes();
    let mut confusion = vec![vec![0u64; k]; k];
    let mut loss = 0.0;
    for start in (0..data.len()).step_by(4096) {
        let end = (start + 4096).min(data.len());
        let probs = model.forward_batch(data.x.slice(ndarray::s![start..end, ..]))?;
        for (row, &l) in probs.rows().into_iter().zip(&data.labels[start..end]) {
            if l >= k {
                return Err(Error::data(format!("label {l} out of range for {k} classes")));
            }
            let p = row.as_slice().expect("standard layout");
            loss += sample_loss(p, l);
            confusion[l][argmax(p)] += 1;
        }
    }
    let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
    Ok(EvalReport {
        n: data.len(),
        accuracy: correct as f64 / data.len() as f64,
        mean_loss: loss / data.len() as f64,
        confusion,
    })
}
