use serde::{Deserialize, Serialize};

use super::{cross_validate, stratified_kfold, ExperimentError, LayerResult, Task};
use crate::datasets::{frame_labels, FrameId, LavaDataset};
use crate::embstore::WordFeatures;
use crate::probes::{ConfusionMatrix, ProbeConfig};

/// Cross-validation settings for the word-level study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    /// Seed of the fold assignment.
    pub seed: u64,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions { folds: 4, seed: 0 }
    }
}

/// Probe one frame at one layer with stratified k-fold cross-validation
/// over the verbs annotated for that frame.
///
/// Predictions from all test folds are pooled into one confusion matrix.
/// A single-class frame short-circuits: every verb is counted as a correct
/// majority prediction, giving accuracy 1 and MCC 0.
pub fn run_word_experiment(
    lava: &LavaDataset,
    features: &WordFeatures,
    frame: FrameId,
    layer: usize,
    config: &ProbeConfig,
    cv: &CvOptions,
) -> Result<LayerResult, ExperimentError> {
    let (verbs, y) = frame_labels(lava, frame);
    let (x, fallback_verbs) = features.matrix(&verbs, layer)?;
    let task = Task::Frame(frame);
    let positives = y.iter().filter(|v| **v).count() as u64;
    let n = y.len() as u64;
    if n > 0 && (positives == 0 || positives == n) {
        let confusion = ConfusionMatrix::new(positives, n - positives, 0, 0);
        return Ok(LayerResult {
            task,
            layer,
            mcc: 0.0,
            accuracy: 1.0,
            confusion,
            degenerate: true,
            fallback_verbs,
        });
    }
    let folds = stratified_kfold(&y, cv.folds, cv.seed)?;
    let pooled = cross_validate(&x, &y, &folds, None, config)?.into_iter().sum();
    let mut result = LayerResult::from_confusion(task, layer, pooled)?;
    result.fallback_verbs = fallback_verbs;
    Ok(result)
}
