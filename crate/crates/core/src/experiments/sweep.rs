use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_paired, make_control_task, stratified_kfold, subsample_mask, ComplexityConfig, ExperimentError};
use crate::datasets::{frame_labels, FrameId, LavaDataset};
use crate::embstore::WordFeatures;
use crate::probes::{ProbeConfig, ProbeKind};
use crate::rng::derive_seed;

/// One point of a sweep: a control run of one probe on one frame at one
/// layer under one complexity setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub frame: FrameId,
    pub layer: usize,
    pub probe: ProbeKind,
    pub complexity: ComplexityConfig,
}

impl SweepCell {
    /// Stable identifier, used to derive the cell's probe seed.
    pub fn key(&self) -> String {
        let c = &self.complexity;
        let k = c.k.map_or_else(|| "-".to_string(), |k| k.to_string());
        format!("{}/{}/{}/k={k}/p={}/l2={}", self.frame, self.layer, self.probe, c.train_prop, c.l2)
    }
}

/// A validated sweep: the full cross of frames, layers, probe kinds and
/// complexity settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub frames: Vec<FrameId>,
    pub layers: Vec<usize>,
    pub probes: Vec<ProbeKind>,
    pub complexities: Vec<ComplexityConfig>,
    pub folds: usize,
    pub seed: u64,
    /// Shared probe settings; `kind`, `l2`, `svd_rank` and `seed` are set
    /// per cell.
    pub base: ProbeConfig,
}

impl SweepPlan {
    pub fn new(
        frames: Vec<FrameId>,
        layers: Vec<usize>,
        probes: Vec<ProbeKind>,
        complexities: Vec<ComplexityConfig>,
        folds: usize,
        seed: u64,
    ) -> Result<SweepPlan, ExperimentError> {
        for c in &complexities {
            c.validate()?;
        }
        if folds < 2 {
            return Err(ExperimentError::InvalidPlan(format!("folds must be >= 2, got {folds}")));
        }
        Ok(SweepPlan { frames, layers, probes, complexities, folds, seed, base: ProbeConfig::default() })
    }

    /// Cells in output order: frame, then layer, then probe, then setting.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &frame in &self.frames {
            for &layer in &self.layers {
                for &probe in &self.probes {
                    for &complexity in &self.complexities {
                        out.push(SweepCell { frame, layer, probe, complexity });
                    }
                }
            }
        }
        out
    }
}

/// One output row of a sweep. A failed cell carries its error message and
/// no metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub frame: FrameId,
    pub layer: usize,
    pub probe: ProbeKind,
    pub k: Option<usize>,
    pub train_prop: f64,
    pub l2: f64,
    pub real_accuracy: Option<f64>,
    pub control_accuracy: Option<f64>,
    pub selectivity: Option<f64>,
    pub real_mcc: Option<f64>,
    pub control_mcc: Option<f64>,
    pub error: Option<String>,
}

fn run_cell(
    plan: &SweepPlan,
    cell: &SweepCell,
    lava: &LavaDataset,
    features: &WordFeatures,
) -> Result<[f64; 4], ExperimentError> {
    let (verbs, y) = frame_labels(lava, cell.frame);
    if y.iter().all(|v| *v) || y.iter().all(|v| !*v) {
        return Err(ExperimentError::DegenerateFrame(cell.frame));
    }
    let (x, _) = features.matrix(&verbs, cell.layer)?;
    let frame_key = cell.frame.to_string();
    let fold_seed = derive_seed(plan.seed, &format!("folds/{frame_key}"));
    let control = make_control_task(&y, derive_seed(plan.seed, &format!("control/{frame_key}")));
    let folds = stratified_kfold(&y, plan.folds, fold_seed)?;
    let masks = subsample_mask(&y, &folds, cell.complexity.train_prop, fold_seed);
    let mut base = plan.base.clone();
    base.kind = cell.probe;
    base.svd_rank = None;
    base.seed = derive_seed(plan.seed, &cell.key());
    let config = cell.complexity.apply(&base);
    let (r, c) = run_paired(&x, &y, &control.labels, &folds, Some(&masks), &config)?;
    Ok([r.accuracy()?, c.accuracy()?, r.mcc(), c.mcc()])
}

/// Run every cell of `plan`. Cells run in parallel; rows come back in
/// [`SweepPlan::cells`] order and do not depend on scheduling. A failing
/// cell is recorded in its row rather than aborting the sweep.
pub fn sweep(plan: &SweepPlan, lava: &LavaDataset, features: &WordFeatures) -> Vec<SweepRow> {
    plan.cells()
        .par_iter()
        .map(|cell| {
            let outcome = run_cell(plan, cell, lava, features);
            if let Err(e) = &outcome {
                log::warn!("sweep cell {} failed: {e}", cell.key());
            }
            let m = outcome.as_ref().ok();
            SweepRow {
                frame: cell.frame,
                layer: cell.layer,
                probe: cell.probe,
                k: cell.complexity.k,
                train_prop: cell.complexity.train_prop,
                l2: cell.complexity.l2,
                real_accuracy: m.map(|m| m[0]),
                control_accuracy: m.map(|m| m[1]),
                selectivity: m.map(|m| m[0] - m[1]),
                real_mcc: m.map(|m| m[2]),
                control_mcc: m.map(|m| m[3]),
                error: outcome.err().map(|e| e.to_string()),
            }
        })
        .collect()
}

/// Explicit complexity setting in a plan file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub k: Option<usize>,
    pub train_prop: Option<f64>,
    pub l2: Option<f64>,
}

/// A sweep plan as written in a TOML file.
///
/// ```toml
/// lava = "lava.tsv"
/// fava = "fava.tsv"
/// store = "bert.altprobe"
/// out = "sweep.csv"
/// frames = ["spray_load.with"]
/// layers = [9, 10]
/// probes = ["linear", "mlp1", "mlp2"]
/// k = [20, 100, 300, 500]
/// p = [0.1, 0.3, 0.5, 0.7, 0.9]
/// l2 = [0.01, 0.1, 0.2, 0.5, 1.0]
/// seed = 7
/// ```
///
/// Each value in `k`, `p` and `l2` becomes its own setting with the other
/// knobs at default. `include_default` (true unless set) adds the all-default
/// setting first. `[[cells]]` tables add explicit settings after those.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub lava: PathBuf,
    pub fava: PathBuf,
    pub store: PathBuf,
    pub out: Option<PathBuf>,
    pub frames: Vec<String>,
    pub layers: Vec<usize>,
    #[serde(default = "default_probes")]
    pub probes: Vec<String>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub l2: Vec<f64>,
    #[serde(default)]
    pub cells: Vec<CellSpec>,
    pub include_default: Option<bool>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    pub hidden_size: Option<usize>,
    pub max_iters: Option<usize>,
}

fn default_probes() -> Vec<String> {
    vec!["linear".into()]
}

fn default_folds() -> usize {
    4
}

impl PlanFile {
    /// Resolve tokens and validate every setting.
    pub fn plan(&self) -> Result<SweepPlan, ExperimentError> {
        let frames = self.frames.iter().map(|f| f.parse()).collect::<Result<Vec<FrameId>, _>>()?;
        let probes = self.probes.iter().map(|p| p.parse()).collect::<Result<Vec<ProbeKind>, _>>()?;
        let mut settings = Vec::new();
        if self.include_default.unwrap_or(true) {
            settings.push(ComplexityConfig::default());
        }
        settings.extend(self.k.iter().map(|k| ComplexityConfig::with_k(*k)));
        settings.extend(self.p.iter().map(|p| ComplexityConfig::with_train_prop(*p)));
        settings.extend(self.l2.iter().map(|l| ComplexityConfig::with_l2(*l)));
        settings.extend(self.cells.iter().map(|c| ComplexityConfig {
            k: c.k,
            train_prop: c.train_prop.unwrap_or(1.0),
            l2: c.l2.unwrap_or(0.0),
        }));
        let mut plan = SweepPlan::new(frames, self.layers.clone(), probes, settings, self.folds, self.seed)?;
        if let Some(h) = self.hidden_size {
            plan.base.hidden_size = h;
        }
        if let Some(m) = self.max_iters {
            plan.base.max_iters = m;
        }
        Ok(plan)
    }

    /// Interpret relative paths against `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        for p in [&mut self.lava, &mut self.fava, &mut self.store] {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if let Some(p) = self.out.as_mut().filter(|p| p.is_relative()) {
            *p = dir.join(&*p);
        }
    }
}

pub fn parse_plan(text: &str) -> Result<PlanFile, ExperimentError> {
    toml::from_str(text).map_err(|e| ExperimentError::InvalidPlan(e.to_string()))
}

/// Read a plan file; relative paths inside it are taken relative to the
/// file's directory.
pub fn load_plan(path: impl AsRef<Path>) -> Result<PlanFile, ExperimentError> {
    let path = path.as_ref();
    let mut plan = parse_plan(&std::fs::read_to_string(path)?)?;
    plan.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER_SWEEPS: &str = r#"
        lava = "l.tsv"
        fava = "f.tsv"
        store = "s.altprobe"
        frames = ["spray_load.with"]
        layers = [9]
        probes = ["linear", "mlp1", "mlp2"]
        k = [20, 100, 300, 500]
        p = [0.1, 0.3, 0.5, 0.7, 0.9]
        l2 = [0.01, 0.1, 0.2, 0.5, 1.0]
        include_default = false
    "#;

    #[test]
    fn standard_value_lists_expand_to_all_cells() {
        let plan = parse_plan(PAPER_SWEEPS).unwrap().plan().unwrap();
        let cells = plan.cells();
        assert_eq!(cells.len(), 3 * 14);
        assert_eq!(cells[0].probe, ProbeKind::Linear);
        assert_eq!(cells[0].complexity.k, Some(20));
        assert_eq!(cells[13].complexity.l2, 1.0);
        assert_eq!(cells[14].probe, ProbeKind::Mlp1);
    }

    #[test]
    fn two_knob_cell_is_rejected() {
        let text = format!("{PAPER_SWEEPS}\n[[cells]]\nk = 20\nl2 = 0.1\n");
        let err = parse_plan(&text).unwrap().plan().unwrap_err();
        assert!(matches!(err, ExperimentError::InvalidComplexity(_)));
    }

    #[test]
    fn malformed_plans_are_rejected() {
        assert!(matches!(parse_plan("frames = 3"), Err(ExperimentError::InvalidPlan(_))));
        let bad_frame = PAPER_SWEEPS.replace("spray_load.with", "spray_load.onto");
        assert!(parse_plan(&bad_frame).unwrap().plan().is_err());
    }

    #[test]
    fn empty_plan_has_no_cells() {
        let plan = SweepPlan::new(vec![], vec![1], vec![ProbeKind::Linear], vec![ComplexityConfig::default()], 4, 0)
            .unwrap();
        assert!(plan.cells().is_empty());
    }
}
