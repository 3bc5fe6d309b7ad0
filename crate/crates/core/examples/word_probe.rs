//! Word-level probing: does a layer encode which frames a verb takes?
//!
//! Verb vectors are pooled from the grammatical sentences containing the
//! verb. For each frame and layer a logistic-regression probe is scored by
//! 4-fold stratified cross-validation, pooling the test-fold predictions
//! into one confusion matrix. Single-class frames are starred and reported
//! as MCC 0 / accuracy 1.

use std::path::Path;

use altprobe::datasets::{load_fava, load_lava, FrameId};
use altprobe::embstore::{synth_store, SynthConfig, SynthScheme, WordFeatures};
use altprobe::experiments::{run_word_experiment, CvOptions};
use altprobe::probes::ProbeConfig;
use altprobe::report::{best_layer_table, ResultRow};

const LAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lava_fixture.tsv");
const FAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fava_fixture.tsv");

pub fn run_example(out_dir: &Path) -> Result<(), altprobe::Error> {
    let lava = load_lava(LAVA)?;
    let fava = load_fava(FAVA)?;
    let config = SynthConfig::new(3, SynthScheme::LinearSignal { sigma: 1.0 });
    let store = out_dir.join("word_probe.altprobe");
    let header = synth_store(&config, &lava, &fava, &store)?;
    let layers: Vec<usize> = (0..header.num_layers).collect();
    let features = WordFeatures::from_store(&store, &lava, &fava, &layers)?;

    let probe = ProbeConfig::linear();
    let mut rows = Vec::new();
    for frame in FrameId::ALL {
        for &layer in &layers {
            let r = run_word_experiment(&lava, &features, frame, layer, &probe, &CvOptions::default())?;
            assert_eq!(r.mcc, r.confusion.mcc());
            rows.push(ResultRow::new(features.model_id(), probe.kind, &r));
        }
    }
    let table = best_layer_table(&rows)?;
    print!("{}", table.render());
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    let dir = std::env::temp_dir().join("altprobe-examples");
    std::fs::create_dir_all(&dir).map_err(altprobe::embstore::StoreError::Io)?;
    run_example(&dir)
}
