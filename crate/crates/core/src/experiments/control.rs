use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cross_validate, stratified_kfold, ExperimentError, FoldAssignment, LayerResult, Task};
use crate::datasets::{frame_labels, FrameId, LavaDataset};
use crate::embstore::WordFeatures;
use crate::probes::{ConfusionMatrix, ProbeConfig, ProbeKind};
use crate::rng;
use nalgebra::DMatrix;

/// Standard values of the dimensionality knob.
pub const K_VALUES: [usize; 4] = [20, 100, 300, 500];
/// Standard training proportions below 1.
pub const P_VALUES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// Standard L2 strengths above 0.
pub const L2_VALUES: [f64; 5] = [0.01, 0.1, 0.2, 0.5, 1.0];

/// Random relabeling of a verb set, one Bernoulli draw per verb at the
/// positive rate of the real labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTask {
    pub labels: Vec<bool>,
    pub seed: u64,
    pub positive_rate: f64,
}

pub fn make_control_task(y: &[bool], seed: u64) -> ControlTask {
    let positive_rate = if y.is_empty() { 0.0 } else { y.iter().filter(|v| **v).count() as f64 / y.len() as f64 };
    let mut rng = rng::keyed(seed, "control-task");
    let labels = y.iter().map(|_| rng.random::<f64>() < positive_rate).collect();
    ControlTask { labels, seed, positive_rate }
}

/// Probe complexity. At most one knob may differ from its default
/// (`k` unset, `train_prop` 1, `l2` 0).
///
/// `k` is the SVD rank for the linear probe and the hidden width for MLPs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityConfig {
    pub k: Option<usize>,
    pub train_prop: f64,
    pub l2: f64,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        ComplexityConfig { k: None, train_prop: 1.0, l2: 0.0 }
    }
}

impl ComplexityConfig {
    pub fn with_k(k: usize) -> ComplexityConfig {
        ComplexityConfig { k: Some(k), ..Default::default() }
    }

    pub fn with_train_prop(p: f64) -> ComplexityConfig {
        ComplexityConfig { train_prop: p, ..Default::default() }
    }

    pub fn with_l2(l2: f64) -> ComplexityConfig {
        ComplexityConfig { l2, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidComplexity(m));
        let changed = [self.k.is_some(), self.train_prop != 1.0, self.l2 != 0.0].iter().filter(|c| **c).count();
        if changed > 1 {
            return bad(format!("{changed} knobs changed at once; at most one is allowed"));
        }
        if self.k == Some(0) {
            return bad("k must be >= 1".into());
        }
        if !(self.train_prop > 0.0 && self.train_prop <= 1.0) {
            return bad(format!("train proportion must be in (0, 1], got {}", self.train_prop));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad(format!("l2 must be finite and >= 0, got {}", self.l2));
        }
        Ok(())
    }

    /// The probe configuration this setting induces on `base`.
    pub fn apply(&self, base: &ProbeConfig) -> ProbeConfig {
        let mut c = base.clone();
        c.l2 = self.l2;
        if let Some(k) = self.k {
            match c.kind {
                ProbeKind::Linear => c.svd_rank = Some(k),
                ProbeKind::Mlp1 | ProbeKind::Mlp2 => c.hidden_size = k,
            }
        }
        c
    }
}

/// Per-fold training masks keeping a proportion `p` of each class among
/// the fold's training rows. `p = 1` keeps every row. Any class present in
/// a training fold keeps at least one row.
pub fn subsample_mask(y: &[bool], folds: &FoldAssignment, p: f64, seed: u64) -> Vec<Vec<bool>> {
    (0..folds.k)
        .map(|f| {
            let train = folds.complement(f);
            if p >= 1.0 {
                let mut mask = vec![false; y.len()];
                for i in train {
                    mask[i] = true;
                }
                return mask;
            }
            let mut rng = rng::keyed(seed, &format!("subsample/{f}"));
            let mut mask = vec![false; y.len()];
            for class in [true, false] {
                let mut rows: Vec<usize> = train.iter().copied().filter(|i| y[*i] == class).collect();
                if rows.is_empty() {
                    continue;
                }
                rows.shuffle(&mut rng);
                let keep = ((rows.len() as f64 * p).round() as usize).max(1);
                for &i in &rows[..keep] {
                    mask[i] = true;
                }
            }
            mask
        })
        .collect()
}

/// Cross-validate two labelings of the same inputs on shared folds and
/// shared training masks. Returns the pooled confusion matrices.
pub fn run_paired(
    x: &DMatrix<f64>,
    real: &[bool],
    control: &[bool],
    folds: &FoldAssignment,
    masks: Option<&[Vec<bool>]>,
    config: &ProbeConfig,
) -> Result<(ConfusionMatrix, ConfusionMatrix), ExperimentError> {
    let r = cross_validate(x, real, folds, masks, config)?.into_iter().sum();
    let c = cross_validate(x, control, folds, masks, config)?.into_iter().sum();
    Ok((r, c))
}

/// Seeds of a control run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlOptions {
    pub folds: usize,
    /// Fold assignment and training subsample.
    pub seed: u64,
    /// Control labels.
    pub control_seed: u64,
}

impl Default for ControlOptions {
    fn default() -> Self {
        ControlOptions { folds: 4, seed: 0, control_seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlOutcome {
    pub real: LayerResult,
    pub control: LayerResult,
    pub real_accuracy: f64,
    pub control_accuracy: f64,
    /// `real_accuracy - control_accuracy`
    pub selectivity: f64,
}

/// Run the word-level pipeline on a frame's real labels and on a control
/// relabeling, with identical folds and training masks.
pub fn run_control_experiment(
    lava: &LavaDataset,
    features: &WordFeatures,
    frame: FrameId,
    layer: usize,
    base: &ProbeConfig,
    complexity: &ComplexityConfig,
    opts: &ControlOptions,
) -> Result<ControlOutcome, ExperimentError> {
    complexity.validate()?;
    let (verbs, y) = frame_labels(lava, frame);
    if y.iter().all(|v| *v) || y.iter().all(|v| !*v) {
        return Err(ExperimentError::DegenerateFrame(frame));
    }
    let (x, fallback_verbs) = features.matrix(&verbs, layer)?;
    let control = make_control_task(&y, opts.control_seed);
    let folds = stratified_kfold(&y, opts.folds, opts.seed)?;
    let masks = subsample_mask(&y, &folds, complexity.train_prop, opts.seed);
    let config = complexity.apply(base);
    let (r, c) = run_paired(&x, &y, &control.labels, &folds, Some(&masks), &config)?;
    let task = Task::Frame(frame);
    let mut real = LayerResult::from_confusion(task, layer, r)?;
    let mut ctrl = LayerResult::from_confusion(task, layer, c)?;
    real.fallback_verbs = fallback_verbs;
    ctrl.fallback_verbs = fallback_verbs;
    Ok(ControlOutcome {
        real_accuracy: real.accuracy,
        control_accuracy: ctrl.accuracy,
        selectivity: real.accuracy - ctrl.accuracy,
        real,
        control: ctrl,
    })
}
