use super::{select_rows, ExperimentError, LayerResult, Task};
use crate::datasets::{FavaDataset, Split};
use crate::embstore::SentenceFeatures;
use crate::probes::{predict, train, ConfusionMatrix, ProbeConfig};

/// Train a grammaticality probe on the Train split and score it on the
/// Test split. The Dev split is never read. `Task::Combined` pools all five
/// alternations.
pub fn run_sentence_experiment(
    fava: &FavaDataset,
    features: &SentenceFeatures,
    task: Task,
    layer: usize,
    config: &ProbeConfig,
) -> Result<LayerResult, ExperimentError> {
    let alternation = match task {
        Task::Alternation(a) => Some(a),
        Task::Combined => None,
        Task::Frame(_) => return Err(ExperimentError::InvalidTask(task)),
    };
    let rows = |split| {
        let idx = fava.split_indices(alternation, split);
        if idx.is_empty() {
            return Err(ExperimentError::EmptySplit { task, split });
        }
        Ok(idx)
    };
    let (train_idx, test_idx) = (rows(Split::Train)?, rows(Split::Test)?);
    let labels = |idx: &[usize]| -> Vec<bool> { idx.iter().map(|i| fava.sentences()[*i].grammatical).collect() };

    let all: Vec<usize> = train_idx.iter().chain(&test_idx).copied().collect();
    let x = features.matrix(fava, &all, layer)?;
    let positions: Vec<usize> = (0..all.len()).collect();
    let (train_rows, test_rows) = positions.split_at(train_idx.len());

    let probe = train(config, &select_rows(&x, train_rows), &labels(&train_idx))?;
    let pred = predict(&probe, &select_rows(&x, test_rows))?;
    let confusion = ConfusionMatrix::from_labels(&labels(&test_idx), &pred.labels);
    Ok(LayerResult::from_confusion(task, layer, confusion)?)
}
