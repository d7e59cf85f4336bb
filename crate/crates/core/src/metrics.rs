//! Evaluation of trained learners: accuracy, distortion, entropy, free energy.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{ClassId, Dataset};
use crate::error::{OdaError, Result};
use crate::oda::{AnnealState, LevelRecord};
use crate::par::Exec;

/// Anything that assigns samples to codevectors and classes.
pub trait Model: Sync {
    /// Predicted class of a raw sample.
    fn predict(&self, x: &[f64]) -> Result<ClassId>;

    /// Like [`Model::predict`], adding the divergence evaluations spent to `evals`.
    fn predict_counted(&self, x: &[f64], evals: &mut u64) -> Result<ClassId>;

    /// Divergence from `x` to the codevector it is assigned to.
    fn quantization_error(&self, x: &[f64]) -> Result<f64>;

    /// Gibbs association of `x` over the codevectors that compete for it.
    fn association(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Temperature at which associations are evaluated.
    fn temperature(&self) -> f64;

    /// Codevectors that can be the final answer for a sample.
    fn codevector_count(&self) -> usize;
}

impl Model for AnnealState {
    fn predict(&self, x: &[f64]) -> Result<ClassId> {
        AnnealState::predict(self, x)
    }

    fn predict_counted(&self, x: &[f64], evals: &mut u64) -> Result<ClassId> {
        let c = AnnealState::predict(self, x)?;
        *evals += self.k() as u64;
        Ok(c)
    }

    fn quantization_error(&self, x: &[f64]) -> Result<f64> {
        let i = self.assign(x)?;
        Ok(self.params.divergence.eval(x, &self.codebook[i].weights))
    }

    fn association(&self, x: &[f64]) -> Result<Vec<f64>> {
        AnnealState::association(self, x)
    }

    fn temperature(&self) -> f64 {
        self.temperature
    }

    fn codevector_count(&self) -> usize {
        self.k()
    }
}

/// Summary of a model on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    /// `None` for unlabeled data.
    pub accuracy: Option<f64>,
    /// Mean divergence to the assigned codevector.
    pub distortion: f64,
    /// Mean Shannon entropy (nats) of the association distribution.
    pub entropy: f64,
    pub temperature: f64,
    /// `distortion - temperature * entropy`.
    pub free_energy: f64,
    pub codevectors: usize,
}

fn non_empty(dataset: &Dataset) -> Result<()> {
    if dataset.is_empty() {
        return Err(OdaError::usage("dataset is empty"));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Fraction of samples whose predicted class equals their label.
pub fn eval_accuracy<M: Model + ?Sized>(model: &M, dataset: &Dataset) -> Result<f64> {
    eval_accuracy_with(model, dataset, Exec::default())
}

pub fn eval_accuracy_with<M: Model + ?Sized>(model: &M, dataset: &Dataset, exec: Exec) -> Result<f64> {
    non_empty(dataset)?;
    let labels = dataset
        .labels
        .as_ref()
        .ok_or_else(|| OdaError::usage("accuracy needs a labeled dataset"))?;
    let hits = exec.map_range(dataset.len(), |i| {
        model.predict(&dataset.samples[i]).map(|c| c == labels[i])
    });
    let mut correct = 0usize;
    for h in hits {
        correct += h? as usize;
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Mean divergence from each sample to its assigned codevector.
pub fn eval_distortion<M: Model + ?Sized>(model: &M, dataset: &Dataset) -> Result<f64> {
    eval_distortion_with(model, dataset, Exec::default())
}

pub fn eval_distortion_with<M: Model + ?Sized>(model: &M, dataset: &Dataset, exec: Exec) -> Result<f64> {
    non_empty(dataset)?;
    let d = exec.map(&dataset.samples, |x| model.quantization_error(x));
    Ok(mean(&d.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Mean entropy of the association distribution.
pub fn eval_entropy<M: Model + ?Sized>(model: &M, dataset: &Dataset) -> Result<f64> {
    non_empty(dataset)?;
    let h = Exec::default().map(&dataset.samples, |x| {
        model.association(x).map(|p| {
            -p.iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| v * v.ln())
                .sum::<f64>()
        })
    });
    Ok(mean(&h.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Predictions and the total divergence evaluations they required.
pub fn prediction_cost<M: Model + ?Sized>(model: &M, dataset: &Dataset) -> Result<(Vec<ClassId>, u64)> {
    let mut evals = 0;
    let preds = dataset
        .samples
        .iter()
        .map(|x| model.predict_counted(x, &mut evals))
        .collect::<Result<Vec<_>>>()?;
    Ok((preds, evals))
}

pub fn evaluate<M: Model + ?Sized>(model: &M, dataset: &Dataset) -> Result<EvalReport> {
    let accuracy = if dataset.is_labeled() {
        Some(eval_accuracy(model, dataset)?)
    } else {
        None
    };
    let distortion = eval_distortion(model, dataset)?;
    let entropy = eval_entropy(model, dataset)?;
    let temperature = model.temperature();
    Ok(EvalReport {
        samples: dataset.len(),
        accuracy,
        distortion,
        entropy,
        temperature,
        free_energy: distortion - temperature * entropy,
        codevectors: model.codevector_count(),
    })
}

pub const HISTORY_HEADER: &str = "level,temperature,codevectors,samples_observed,converged,train_accuracy,distortion";

/// Writes per-level history as CSV; missing metrics are left empty.
pub fn emit_history(records: &[LevelRecord], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.level,
            r.temperature,
            r.codevectors,
            r.samples_observed,
            r.converged,
            opt(r.train_accuracy),
            opt(r.distortion)
        )?;
    }
    Ok(())
}
