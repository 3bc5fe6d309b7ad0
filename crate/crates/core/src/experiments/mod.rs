//! The three studies: word-level frame membership, sentence-level
//! grammaticality, and the control-task selectivity sweep.
//!
//! Word-level metrics are computed on the confusion matrix pooled over the
//! test folds of a stratified k-fold split of the verbs.

mod control;
mod folds;
mod sentence;
mod sweep;
mod word;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{Alternation, DatasetError, FrameId, Split};
use crate::embstore::StoreError;
use crate::probes::{predict, train, ConfusionMatrix, ProbeConfig, ProbeError};

pub use control::{
    make_control_task, run_control_experiment, run_paired, subsample_mask, ComplexityConfig, ControlOptions,
    ControlOutcome, ControlTask, K_VALUES, L2_VALUES, P_VALUES,
};
pub use folds::{stratified_kfold, FoldAssignment};
pub use sentence::run_sentence_experiment;
pub use sweep::{load_plan, parse_plan, sweep, PlanFile, CellSpec, SweepCell, SweepPlan, SweepRow};
pub use word::{run_word_experiment, CvOptions};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error("{n} examples cannot be split into {k} folds")]
    TooFewExamples { n: usize, k: usize },
    #[error("{task}: {split} split is empty")]
    EmptySplit { task: Task, split: Split },
    #[error("frame {0} has a single class; a control task on it is vacuous")]
    DegenerateFrame(FrameId),
    #[error("{0} is not a valid task here")]
    InvalidTask(Task),
    #[error("invalid complexity setting: {0}")]
    InvalidComplexity(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    pub fn is_validation(&self) -> bool {
        match self {
            ExperimentError::Dataset(e) => !matches!(e, DatasetError::Io(_)),
            ExperimentError::Store(e) => !matches!(e, StoreError::Io(_)),
            ExperimentError::Io(_) => false,
            _ => true,
        }
    }
}

/// What a probe predicts: membership in one frame (word level), or
/// grammaticality within one alternation or all of them (sentence level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Task {
    Frame(FrameId),
    Alternation(Alternation),
    Combined,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Frame(id) => write!(f, "{id}"),
            Task::Alternation(a) => write!(f, "{a}"),
            Task::Combined => f.write_str("combined"),
        }
    }
}

impl FromStr for Task {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "combined" {
            return Ok(Task::Combined);
        }
        if s.contains('.') {
            return s.parse().map(Task::Frame);
        }
        s.parse().map(Task::Alternation)
    }
}

impl TryFrom<String> for Task {
    type Error = DatasetError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Task> for String {
    fn from(t: Task) -> String {
        t.to_string()
    }
}

/// Metrics of one probe on one task at one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerResult {
    pub task: Task,
    pub layer: usize,
    pub mcc: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    /// Single-class task: reported as MCC 0 / accuracy 1 by convention.
    pub degenerate: bool,
    /// Verbs represented by the isolated-verb fallback (word level only).
    pub fallback_verbs: usize,
}

impl LayerResult {
    pub fn from_confusion(task: Task, layer: usize, confusion: ConfusionMatrix) -> Result<LayerResult, ProbeError> {
        Ok(LayerResult {
            task,
            layer,
            mcc: confusion.mcc(),
            accuracy: confusion.accuracy()?,
            confusion,
            degenerate: false,
            fallback_verbs: 0,
        })
    }
}

fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    x.select_rows(rows.iter())
}

/// Train on the complement of each fold and predict the fold. With `keep`,
/// fold `f` trains only on the rows where `keep[f]` is true. Returns the
/// per-fold confusion matrices.
pub fn cross_validate(
    x: &DMatrix<f64>,
    y: &[bool],
    folds: &FoldAssignment,
    keep: Option<&[Vec<bool>]>,
    config: &ProbeConfig,
) -> Result<Vec<ConfusionMatrix>, ExperimentError> {
    if x.nrows() != y.len() || folds.len() != y.len() {
        return Err(ProbeError::DimMismatch(format!(
            "{} rows, {} labels, {} fold entries",
            x.nrows(),
            y.len(),
            folds.len()
        ))
        .into());
    }
    (0..folds.k)
        .map(|f| {
            let train_rows: Vec<usize> =
                folds.complement(f).into_iter().filter(|i| keep.is_none_or(|k| k[f][*i])).collect();
            let test_rows = folds.members(f);
            let y_train: Vec<bool> = train_rows.iter().map(|i| y[*i]).collect();
            let y_test: Vec<bool> = test_rows.iter().map(|i| y[*i]).collect();
            let probe = train(config, &select_rows(x, &train_rows), &y_train)?;
            let pred = predict(&probe, &select_rows(x, &test_rows))?;
            Ok(ConfusionMatrix::from_labels(&y_test, &pred.labels))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_tokens_round_trip() {
        for t in [
            Task::Combined,
            Task::Alternation(Alternation::Dative),
            Task::Frame("there.there".parse().unwrap()),
        ] {
            assert_eq!(t.to_string().parse::<Task>().unwrap(), t);
        }
        assert!("there.nowhere".parse::<Task>().is_err());
    }
}
